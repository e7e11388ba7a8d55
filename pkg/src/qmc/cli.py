"""Command-line front end.

    qmc catalog NAME [--params k=v ...] [--out FILE] [--stages DIR]
    qmc apply OP --in FILE [--lambda L] [--mu M] [--index I] [--newpole B] [--out FILE]
    qmc verify WHAT [--seed S] [--tol T] ...

Exit codes: 0 success, 1 a tolerance was missed, 2 usage or format error,
3 non-generic parameters or a non-invariant subspace.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from . import catalog, checks
from . import composition as comp
from . import io as qio
from . import spectral
from . import system as sysm
from .catalog import DEFAULT_SEED
from .errors import (ArgumentError, IsomorphismFailure, NonGenericParameterError,
                     NotInvariantError, QMCError, StarViolation)
from .linalg import TolerancePolicy

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NONGENERIC = 0, 1, 2, 3

PARAM_ALIASES = {"lambda": "lam", "lambda2": "lam2", "λ": "lam", "μ": "mu"}


class UsageError(QMCError):
    pass


def parse_complex(text: str) -> complex:
    """Parse ``"1.5"``, ``"0.3-2i"``, ``"2j"`` or ``"(1+1i)"``."""
    s = text.strip().replace(" ", "").strip("()")
    if not s:
        raise UsageError("empty number")
    if s.endswith("i"):
        s = s[:-1] + "j"
    try:
        return complex(s)
    except ValueError:
        raise UsageError(f"cannot parse {text!r} as a complex number") from None


def _plain(z: complex):
    """``z`` as a float when it is real, for readable parameter dumps."""
    return z.real if z.imag == 0 else z


def parse_params(items) -> dict:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise UsageError(f"parameter {item!r} is not of the form key=value")
        key, value = item.split("=", 1)
        key = PARAM_ALIASES.get(key.strip(), key.strip())
        if key == "N":
            try:
                out[key] = int(value)
            except ValueError:
                raise UsageError(f"N must be an integer, got {value!r}") from None
        else:
            out[key] = _plain(parse_complex(value))
    return out


def _catalog_params(name: str, given: dict) -> dict:
    """Defaults for ``name`` overridden by ``given``; constrained values are re-derived."""
    base = catalog.default_params(name)
    for key in catalog._DERIVED.get(catalog._base_name(name), ()):
        base.pop(key, None)
    if "N" in given and name.startswith("jp"):
        raise UsageError("choose N through the name, e.g. jp3")
    base.update(given)
    return base


def _dims_line(label: str, rep: dict) -> str:
    return f"{label}: dim K={rep['K']}, dim L={rep['L']}, quotient={rep['quotient']}"


def _emit(text: str, path: str | None):
    if path is None or path == "-":
        sys.stdout.write(text + "\n")
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")


# ---------------------------------------------------------------------------
# catalog


def cmd_catalog(args) -> int:
    if catalog._base_name(args.name) not in catalog.NAMES:
        print(f"error: unknown catalog name {args.name!r}; known: {', '.join(catalog.NAMES)}",
              file=sys.stderr)
        return EXIT_USAGE
    params = _catalog_params(args.name, parse_params(args.params))
    policy = TolerancePolicy.from_env()
    try:
        res = catalog.build(args.name, params, policy, strict=not args.lenient)
    except NonGenericParameterError as exc:
        print(f"non-generic parameters: {exc}", file=sys.stderr)
        for rep in exc.report or []:
            print(_dims_line(rep["label"] or f"step {rep['step']}", rep), file=sys.stderr)
        print(qio.dumps({"error": "non-generic", "message": str(exc), "steps": exc.report}))
        return EXIT_NONGENERIC
    for rep in res.reports:
        print(_dims_line(rep["label"] or f"step {rep['step']}", rep), file=sys.stderr)
    meta = {"name": args.name, "params": res.params, "steps": res.reports}
    if args.stages:
        os.makedirs(args.stages, exist_ok=True)
        for k, (step, t) in enumerate(zip(res.recipe.steps, res.chain)):
            label = step.label or step.op
            qio.save(os.path.join(args.stages, f"{k:02d}_{label}.json"),
                     qio.TupleDocument(t, {"name": args.name, "stage": label, "step": k,
                                           "params": res.params}))
    _emit(qio.dumps(qio.TupleDocument(res.final, meta)), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# apply


def _need(args, attr: str, flag: str):
    value = getattr(args, attr)
    if value is None:
        raise UsageError(f"apply {args.op} needs {flag}")
    return value


def cmd_apply(args) -> int:
    doc = qio.load(args.infile) if args.infile != "-" else qio.loads(sys.stdin.read())
    t = doc.tuple
    policy = TolerancePolicy.from_env()
    meta = dict(doc.metadata)
    extra: dict = {}
    if args.op == "conv":
        lam = parse_complex(_need(args, "lam", "--lambda"))
        out = sysm.q_convolution(t, lam)
        step = {"op": "conv", "lambda": lam}
    elif args.op == "mc":
        lam = parse_complex(_need(args, "lam", "--lambda"))
        res = sysm.middle_convolution(t, lam, policy)
        out = res.reduced
        dims = res.dims()
        print(_dims_line("mc", dims), file=sys.stderr)
        step = {"op": "mc", "lambda": lam, **dims}
        extra = {"proj": res.proj, "lift": res.lift}
    elif args.op == "add":
        mu = parse_complex(_need(args, "mu", "--mu"))
        out = sysm.add_mu(t, mu)
        step = {"op": "add", "mu": mu}
    elif args.op == "polemove":
        index = int(_need(args, "index", "--index"))
        b = parse_complex(_need(args, "newpole", "--newpole"))
        out = sysm.pole_move(t, index, b)
        step = {"op": "polemove", "index": index, "newpole": b}
    elif args.op == "syconv":
        lam = parse_complex(_need(args, "lam", "--lambda"))
        out = sysm.sy_convolution(t, lam)
        step = {"op": "syconv", "lambda": lam}
    elif args.op == "drconv":
        lam = parse_complex(_need(args, "lam", "--lambda"))
        out = sysm.dr_convolution(t, lam)
        step = {"op": "drconv", "lambda": lam}
    else:  # pragma: no cover - argparse restricts the choices
        raise UsageError(f"unknown operation {args.op!r}")
    meta["history"] = list(meta.get("history", [])) + [step]
    meta.update(extra)
    _emit(qio.dumps(qio.TupleDocument(out, meta)), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify


def _override_tol(report: dict, tol) -> dict:
    """Judge ``max_residual`` alone against a user tolerance."""
    if tol is None:
        return report
    report = dict(report)
    report["stated_tol"] = report["tol"]
    report["tol"] = tol
    report["pass"] = bool(report["max_residual"] < tol)
    return report


def _verify_spectral(args, policy) -> dict:
    if args.infile:
        t = qio.load(args.infile).tuple
        source = args.infile
    elif args.name:
        t = catalog.build(args.name, _catalog_params(args.name, parse_params(args.params)),
                          policy).final
        source = args.name
    else:
        raise UsageError("verify spectral needs --in FILE or --name NAME")
    st = spectral.spectral_type(t, policy)
    consistency = st.details["det_consistency"]
    ok = consistency < 1e-6 and (args.expect is None or st.rendered == args.expect)
    return {"check": "spectral", "max_residual": consistency, "tol": 1e-6, "pass": ok,
            "source": source, "spectral_type": st.rendered, "expected": args.expect,
            "det_degree": st.details["det_degree"]}


def _verify_additivity(args, policy) -> dict:
    if (args.l1 is None) != (args.l2 is None):
        raise UsageError("give both --l1 and --l2, or neither")
    l1 = None if args.l1 is None else parse_complex(args.l1)
    l2 = None if args.l2 is None else parse_complex(args.l2)
    if args.infile:
        t = qio.load(args.infile).tuple
        if l1 is None:
            raise UsageError("--in needs --l1 and --l2")
        rep = comp.additivity_check(t, l1, l2, policy)
        return {"check": "additivity", "max_residual": rep.max_residual, "tol": 1e-8,
                "pass": rep.passed and rep.max_residual < 1e-8, "route": rep.route,
                "dims": rep.dims, "condition": rep.condition}
    return checks.additivity(args.draws, args.seed, l1=l1, l2=l2, policy=policy)


def cmd_verify(args) -> int:
    policy = TolerancePolicy.from_env()
    what = args.what
    if what == "residual":
        report = checks.transform_theorem()
    elif what == "scalar":
        names = [args.name] if args.name else None
        if args.name and args.name not in catalog.EQUATIONS:
            raise UsageError(f"unknown equation {args.name!r}; known: "
                             f"{', '.join(catalog.EQUATIONS)}")
        report = checks.scalar_equations(names, args.draws, args.seed, corrected=args.corrected)
    elif what == "additivity":
        report = _verify_additivity(args, policy)
    elif what == "spectral":
        report = _verify_spectral(args, policy)
    elif what == "table1":
        report = checks.table1(args.draws, args.seed, policy)
    elif what == "limits":
        report = checks.limits(corrected=args.corrected)
    elif what == "integral":
        report = checks.integral_equals_series()
        double = checks.threephitwo()
        report = dict(report, double_integral=double,
                      max_residual=max(report["max_residual"], double["integral_gap"]),
                      **{"pass": report["pass"] and double["pass"]})
    elif what == "kernel":
        report = checks.kernel_equation(seed=args.seed)
    elif what == "qbinomial":
        report = checks.q_binomial(seed=args.seed)
    elif what == "closedforms":
        report = checks.qhg_closed_forms()
    elif what == "threephitwo":
        report = checks.threephitwo()
    elif what == "dr":
        report = checks.dr_correspondence(seed=args.seed)
    elif what == "fixtures":
        report = checks.fixtures(seed=args.seed, corrected=args.corrected)
    else:  # pragma: no cover
        raise UsageError(f"unknown check {what!r}")
    report = _override_tol(report, args.tol)
    print(qio.dumps(report))
    return EXIT_OK if report["pass"] else EXIT_FAIL


# ---------------------------------------------------------------------------


VERIFY_CHOICES = ("residual", "scalar", "additivity", "spectral", "table1", "limits", "integral",
                  "kernel", "qbinomial", "closedforms", "threephitwo", "dr", "fixtures")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qmc", description="q-convolution and q-middle convolution "
                                "of q-difference systems")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("catalog", help="build a named operator pipeline")
    c.add_argument("name", help=f"one of {', '.join(catalog.NAMES)} (jp takes jp2, jp3, ...)")
    c.add_argument("--params", nargs="*", default=[], metavar="KEY=VALUE")
    c.add_argument("--out", help="output file for the final tuple (default stdout)")
    c.add_argument("--stages", metavar="DIR", help="also write every chain stage into DIR")
    c.add_argument("--lenient", action="store_true",
                   help="record non-generic dimensions instead of failing")
    c.set_defaults(func=cmd_catalog)

    a = sub.add_parser("apply", help="apply one operator to a tuple document")
    a.add_argument("op", choices=("conv", "mc", "add", "polemove", "syconv", "drconv"))
    a.add_argument("--in", dest="infile", required=True, help="input document ('-' for stdin)")
    a.add_argument("--out")
    a.add_argument("--lambda", dest="lam")
    a.add_argument("--mu")
    a.add_argument("--index", type=int)
    a.add_argument("--newpole")
    a.set_defaults(func=cmd_apply)

    v = sub.add_parser("verify", help="run a numerical check and print a JSON report")
    v.add_argument("what", choices=VERIFY_CHOICES)
    v.add_argument("--seed", type=int, default=DEFAULT_SEED)
    v.add_argument("--tol", type=float, help="override the stated tolerance")
    v.add_argument("--draws", type=int, default=None)
    v.add_argument("--name", help="equation name (scalar) or catalog name (spectral)")
    v.add_argument("--params", nargs="*", default=[], metavar="KEY=VALUE")
    v.add_argument("--in", dest="infile")
    v.add_argument("--expect", help="expected spectral type string")
    v.add_argument("--l1")
    v.add_argument("--l2")
    v.add_argument("--corrected", action="store_true",
                   help="use the corrected printed forms where they differ")
    v.set_defaults(func=cmd_verify)
    return p


_DEFAULT_DRAWS = {"scalar": 3, "additivity": 10, "table1": 3}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "draws", 0) is None:
        args.draws = _DEFAULT_DRAWS.get(getattr(args, "what", ""), 3)
    try:
        return args.func(args)
    except (UsageError, ArgumentError, qio.FormatError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NonGenericParameterError, NotInvariantError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONGENERIC
    except (StarViolation, IsomorphismFailure) as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (QMCError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
