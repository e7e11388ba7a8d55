import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.testing import assert_allclose

from qmc import catalog
from qmc.errors import ArgumentError, NonGenericParameterError
from qmc.qseries import qpow

SEED = catalog.DEFAULT_SEED


@pytest.mark.parametrize("name", ["qhg", "ghg3", "ghg3_alt", "jp2", "jp3", "variant_deg2",
                                  "variant_deg3", "s46", "s47", "s48"])
def test_default_pipelines_are_generic(name):
    res = catalog.build(name)
    assert all(r["generic"] for r in res.reports)
    assert res.final is res.chain[-1]


def test_final_sizes():
    sizes = {name: catalog.build(name).final.m for name in ("qhg", "ghg3", "s46", "s47", "s48")}
    assert sizes == {"qhg": 2, "ghg3": 3, "s46": 3, "s47": 3, "s48": 3}


def test_unknown_name():
    with pytest.raises(ArgumentError):
        catalog.default_params("hypergeo")
    with pytest.raises(ArgumentError):
        catalog.build("hypergeo", {})


def test_missing_parameters():
    with pytest.raises(ArgumentError, match="missing"):
        catalog.resolve_params("qhg", {"q": 0.4})


def test_derived_exponents_satisfy_constraints():
    p = catalog.default_params("s48")
    q = p["q"]
    prod_b = p["beta1"] * p["beta2"] * p["beta3"]
    prod_a = p["alpha1"] * p["alpha2"] * p["alpha3"]
    assert_allclose(qpow(q, p["lam"]), prod_b / prod_a)
    assert_allclose(qpow(q, p["lam"] + p["lam2"]),
                    p["alpha1"] * p["alpha2"] / (p["gamma1"] * p["gamma2"]))
    with pytest.raises(ArgumentError, match="constraint"):
        catalog.resolve_params("s48", dict(p, lam=p["lam"] + 0.1))


def test_random_params_are_reproducible():
    assert catalog.random_params("s47", 7) == catalog.random_params("s47", 7)


def test_non_generic_parameters_are_reported():
    params = dict(q=0.4, mu=0.4, lam=0.3, alpha=1.0, beta=2.0, mu2=0.55, lam2=0.25)
    with pytest.raises(NonGenericParameterError) as err:
        catalog.build("ghg3", params)
    last = err.value.report[-1]
    assert (last["K"], last["L"], last["generic"]) == (1, 1, False)
    res = catalog.build("ghg3", params, strict=False)
    assert res.final.m == 2


@pytest.mark.parametrize("name", ["qhg", "variant_deg2", "variant_deg3", "ghg3", "ghg3_alt",
                                  "s46", "s47"])
def test_printed_matrices_match_pipeline(name):
    rng = np.random.default_rng(SEED)
    for params in (catalog.default_params(name), catalog.random_params(name, rng)):
        dev = catalog.fixture_check(name, params)
        assert max(max(v) for v in dev.values()) < 1e-10


def test_s48_printed_entry_differs_and_repair_matches():
    p = catalog.default_params("s48")
    printed = catalog.fixture_check("s48", p)
    fixed = catalog.fixture_check("s48", p, corrected=True)
    assert max(printed["final"]) > 0.1
    assert max(fixed["final"]) < 1e-10
    # only the one entry is affected
    res = catalog.build("s48", p)
    pf = catalog.printed_fixtures("s48", p)["final"]
    diff = np.abs(res.final.matrices[2] - pf[2]) > 1e-8
    assert diff.sum() == 1 and diff[0, 0]


@pytest.mark.parametrize("name", ["ytil", "qhg_standard", "ghg3", "s46", "s47"])
def test_scalar_equations_as_printed(name):
    rep = catalog.cross_check_scalar(name)
    assert rep["max_residual"] < 1e-8
    assert rep["degree"] == rep["expected_degree"]


@pytest.mark.parametrize("name", ["ghg3_alt", "s48"])
def test_repaired_scalar_equations(name):
    rng = np.random.default_rng(SEED)
    for _ in range(3):
        params = catalog.random_params(catalog.EQUATIONS[name].system, rng)
        printed = catalog.cross_check_scalar(name, params)
        fixed = catalog.cross_check_scalar(name, params, corrected=True)
        assert printed["max_residual"] > 1e-3
        assert fixed["max_residual"] < 1e-8
        assert fixed["degree"] == catalog.EQUATIONS[name].degree


def test_equation_lookup():
    assert catalog.equation("ghg3_alt", corrected=True) is catalog.CORRECTED_EQUATIONS["ghg3_alt"]
    assert catalog.equation("ghg3", corrected=True) is catalog.EQUATIONS["ghg3"]
    with pytest.raises(ArgumentError):
        catalog.equation("nope")


@given(st.integers(0, 2**31))
def test_ghg3_scalar_equation_on_random_draws(seed):
    params = catalog.random_params("ghg3", seed)
    try:
        rep = catalog.cross_check_scalar("ghg3", params, steps=8, seed=seed)
    except NonGenericParameterError:
        return
    assert rep["max_residual"] < 1e-7


def test_limits_converge_linearly_for_qhg_and_ghg3():
    p = dict(mu=0.37, lam=0.21, alpha=1.3 + 0.2j, nu=0.63, mu2=0.52, lam2=0.29)
    for name, keys in (("qhg", ("mu", "lam", "alpha", "nu")), ("ghg3", tuple(p))):
        rep = catalog.q_to_1_limit(name, {k: p[k] for k in keys})
        assert all(0.05 <= r <= 0.2 for r in rep["ratios"])


def test_ghg3_alt_limit_entry_repair():
    p = dict(mu=0.37, lam=0.21, alpha=1.3 + 0.2j, nu=0.63, nu2=0.44, lam2=0.29)
    printed = catalog.q_to_1_limit("ghg3_alt", p)
    fixed = catalog.q_to_1_limit("ghg3_alt", p, corrected=True)
    assert min(printed["ratios"]) > 0.9
    assert all(0.05 <= r <= 0.2 for r in fixed["ratios"])
