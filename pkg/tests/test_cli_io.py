import json
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qmc import catalog, cli
from qmc import io as qio

from conftest import tuples

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@given(tuples(), st.lists(st.tuples(finite, finite), min_size=4, max_size=4))
def test_json_round_trip_is_bit_exact(t, extra):
    # push awkward values (subnormals, huge, negative zero) into the first matrix
    M = np.array(t.matrices[0])
    for k, (re, im) in enumerate(extra[: M.size]):
        M.flat[k] = complex(re, im)
    t = t.replace(matrices=[M] + list(t.matrices[1:]))
    back = qio.loads(qio.dumps(qio.TupleDocument(t, {"name": "x"}))).tuple
    assert back.q == t.q and back.poles == t.poles
    for a, b in zip(t.matrices, back.matrices):
        assert np.array_equal(a.view(np.float64), b.view(np.float64))


@pytest.mark.parametrize("doc,msg", [
    ({"schema_version": "2", "q": {"re": 0.5, "im": 0}, "poles": [], "matrices": []}, "schema"),
    ({"schema_version": "1", "q": {"re": 0.5, "im": 0}, "poles": [{"re": 1, "im": 0}],
      "matrices": [[[{"re": 0, "im": 0}]]]}, "poles"),
    ({"schema_version": "1", "q": "0.5", "poles": [{"re": 0, "im": 0}],
      "matrices": [[[{"re": 0, "im": 0}]]]}, "q"),
    ({"schema_version": "1", "q": {"re": 0.5, "im": 0}, "poles": [{"re": 0, "im": 0}],
      "matrices": [[[{"re": 0, "im": 0}, {"re": 0, "im": 0}]]]}, "matrices"),
    ({"schema_version": "1", "q": {"re": 0.5, "im": 0}}, "missing"),
])
def test_format_errors(doc, msg):
    with pytest.raises(qio.FormatError, match=msg):
        qio.TupleDocument.from_json(doc)


def test_to_jsonable_handles_numpy():
    out = qio.to_jsonable({"a": np.int64(3), "b": np.array([1 + 2j]), "c": np.bool_(True)})
    assert out == {"a": 3, "b": [{"re": 1.0, "im": 2.0}], "c": True}


def test_parse_complex_and_params():
    assert cli.parse_complex("0.3-2i") == 0.3 - 2j
    assert cli.parse_complex("(1+1i)") == 1 + 1j
    assert cli.parse_params(["lambda=0.3", "N=3", "alpha=1"]) == {"lam": 0.3, "N": 3, "alpha": 1.0}
    with pytest.raises(cli.UsageError):
        cli.parse_complex("abc")


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_catalog_qhg_prints_two_by_two(capsys):
    code, out, err = run(["catalog", "qhg", "--params", "q=0.4", "mu=0.7", "lambda=0.3",
                          "alpha=1", "beta=1.5"], capsys)
    assert code == 0
    doc = qio.loads(out)
    assert doc.tuple.m == 2 and doc.metadata["name"] == "qhg"


def test_catalog_ghg3_reports_dimensions(tmp_path, capsys):
    code, out, err = run(["catalog", "ghg3", "--out", str(tmp_path / "g.json"),
                          "--stages", str(tmp_path / "st")], capsys)
    assert code == 0
    assert "final: dim K=1, dim L=0, quotient=3" in err
    assert len(list((tmp_path / "st").iterdir())) == 4
    assert qio.load(tmp_path / "g.json").tuple.m == 3


def test_catalog_exit_codes(capsys):
    assert run(["catalog", "nope"], capsys)[0] == 2
    assert run(["catalog", "qhg", "--params", "q"], capsys)[0] == 2
    code, out, _ = run(["catalog", "ghg3", "--params", "mu=0.4", "lam=0.3", "mu2=0.55",
                        "lam2=0.25", "beta=2"], capsys)
    assert code == 3
    assert json.loads(out)["error"] == "non-generic"


@pytest.fixture
def qhg_file(tmp_path):
    path = tmp_path / "qhg.json"
    qio.save(path, qio.TupleDocument(catalog.build("qhg").final))
    return path


def test_apply_conv_and_add(qhg_file, tmp_path, capsys):
    out = tmp_path / "c.json"
    assert run(["apply", "conv", "--lambda", "0.5", "--in", str(qhg_file), "--out", str(out)],
               capsys)[0] == 0
    t = qio.load(qhg_file).tuple
    assert qio.load(out).tuple.m == (t.N + 1) * t.m
    assert run(["apply", "add", "--mu", "0", "--in", str(qhg_file), "--out", str(out)],
               capsys)[0] == 0
    a, b = json.loads(out.read_text()), json.loads(qhg_file.read_text())
    assert all(a[k] == b[k] for k in ("q", "poles", "matrices"))


def test_apply_mc_on_gauged_fixture(tmp_path, capsys):
    st_dir = tmp_path / "st"
    run(["catalog", "ghg3", "--stages", str(st_dir)], capsys)
    gauge = next(p for p in st_dir.iterdir() if "gauge" in p.name)
    code, out, err = run(["apply", "mc", "--lambda", "0.4", "--in", str(gauge)], capsys)
    assert code == 0 and "quotient=3" in err
    doc = qio.loads(out)
    assert np.asarray(doc.metadata["proj"]).shape[0] == 3


def test_apply_other_operations(qhg_file, capsys):
    for op, flags in (("polemove", ["--index", "1", "--newpole", "2+1i"]),
                      ("syconv", ["--lambda", "0.3"]), ("drconv", ["--lambda", "0.3"])):
        code, out, _ = run(["apply", op, "--in", str(qhg_file)] + flags, capsys)
        assert code == 0
        assert qio.loads(out).metadata["history"][-1]["op"] == op


def test_apply_errors(tmp_path, qhg_file, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{bad")
    assert run(["apply", "conv", "--lambda", "1", "--in", str(bad)], capsys)[0] == 2
    assert run(["apply", "conv", "--in", str(qhg_file)], capsys)[0] == 2
    assert run(["apply", "polemove", "--index", "1", "--newpole", "0", "--in", str(qhg_file)],
               capsys)[0] == 2
    with pytest.raises(SystemExit) as exc:
        cli.main(["apply", "spin", "--in", str(qhg_file)])
    assert exc.value.code == 2


def test_apply_non_invariant_exit_code(monkeypatch, qhg_file, capsys):
    from qmc.errors import NotInvariantError

    def boom(*a, **k):
        raise NotInvariantError("forced")
    monkeypatch.setattr(cli.sysm, "middle_convolution", boom)
    assert run(["apply", "mc", "--lambda", "0.3", "--in", str(qhg_file)], capsys)[0] == 3


@pytest.mark.parametrize("argv", [["verify", "scalar", "--name", "ghg3"],
                                  ["verify", "additivity", "--l1", "0.3", "--l2", "0.4"],
                                  ["verify", "spectral", "--name", "ghg3", "--expect",
                                   "111;111;21"],
                                  ["verify", "integral"], ["verify", "residual"],
                                  ["verify", "dr"], ["verify", "kernel"]])
def test_verify_passing_reports(argv, capsys):
    code, out, _ = run(argv, capsys)
    rep = json.loads(out)
    assert code == 0 and rep["pass"]
    assert {"check", "max_residual", "tol", "pass"} <= set(rep)


def test_verify_failure_and_usage(capsys):
    code, out, _ = run(["verify", "scalar", "--name", "ghg3_alt"], capsys)
    assert code == 1 and not json.loads(out)["pass"]
    assert run(["verify", "scalar", "--name", "ghg3_alt", "--corrected"], capsys)[0] == 0
    assert run(["verify", "scalar", "--name", "zzz"], capsys)[0] == 2
    assert run(["verify", "additivity", "--l1", "0.3"], capsys)[0] == 2
    assert run(["verify", "spectral"], capsys)[0] == 2


def test_verify_tol_override(capsys):
    code, out, _ = run(["verify", "kernel", "--tol", "1e-20"], capsys)
    assert code == 1 and json.loads(out)["stated_tol"] == 1e-9


def test_qmc_tol_environment(monkeypatch, tmp_path, capsys):
    monkeypatch.setenv("QMC_TOL", "1e-13")
    code, out, _ = run(["verify", "additivity", "--l1", "0.3", "--l2", "0.4"], capsys)
    assert code == 0
    monkeypatch.setenv("QMC_TOL", "abc")
    assert run(["verify", "additivity", "--l1", "0.3", "--l2", "0.4"], capsys)[0] == 2


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "qmc", "verify", "table1", "--draws", "1"],
                       capture_output=True, text=True, timeout=120)
    assert r.returncode == 0, r.stderr
    assert json.loads(r.stdout)["passed_rows"] == "11/11"
