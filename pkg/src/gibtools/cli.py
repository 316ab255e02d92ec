"""Command-line front end: certify, search, build-verify, geometry.

Exit codes: 0 pass, 1 usage or I/O error, 2 negative result, 3 undecided.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .polyclass import (
    DEFAULT_MAX_BITS,
    IntMatrix,
    IntPolynomial,
    Rejection,
    TwoClassCertificate,
    char_poly,
    classify_two_class,
    leaf_closure_dims,
    outcome_json,
    semisimple_matrix,
)

EXIT_OK, EXIT_USAGE, EXIT_NEGATIVE, EXIT_UNDECIDED = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _header(command: str, config: dict, seed=None, tolerances=None) -> dict:
    return {"tool": "gibtools", "version": __version__, "command": command,
            "config": config, "seed": seed, "tolerances": tolerances or {}}


def _emit(obj: dict, out) -> None:
    text = json.dumps(obj, indent=1) + "\n"
    if out:
        try:
            Path(out).write_text(text)
        except OSError as exc:
            raise UsageError(f"cannot write {out}: {exc}") from exc
    sys.stdout.write(text)


def _read_json(arg: str):
    """Inline JSON (starting with ``[`` or ``{``) or a path to a JSON file."""
    s = arg.strip()
    try:
        if s.startswith(("[", "{")):
            return json.loads(s)
        return json.loads(Path(arg).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read JSON from {arg!r}: {exc}") from exc


def parse_poly(text: str, degree=None) -> IntPolynomial:
    """Constant-first comma list; ``"-1,3,-1,1"`` is X^3 - X^2 + 3X - 1.

    A leading coefficient of -1 is accepted and the polynomial negated, so
    ``"1,-3,1,-1"`` names the same monic cubic.
    """
    try:
        coeffs = tuple(int(c) for c in text.replace(" ", "").strip("[]").split(","))
        if coeffs and coeffs[-1] == -1:
            coeffs = tuple(-c for c in coeffs)     # same roots; normalise to monic
        p = IntPolynomial(coeffs)
    except ValueError as exc:
        raise UsageError(f"bad polynomial {text!r}: {exc}") from exc
    if degree is not None and p.degree != degree:
        raise UsageError(f"--degree {degree} does not match the {len(coeffs)} coefficients given "
                         f"(degree {p.degree}); coefficients are constant-first")
    return p


def parse_int_matrix(obj) -> IntMatrix:
    rows = obj.get("matrix") if isinstance(obj, dict) else obj
    try:
        if any(float(x) != int(x) for r in rows for x in r):
            raise ValueError("entries must be integers")
        return IntMatrix.from_rows([[int(x) for x in r] for r in rows])
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad integer matrix: {exc}") from exc


def parse_real_matrix(obj) -> np.ndarray:
    rows = obj.get("matrix") if isinstance(obj, dict) else obj
    try:
        a = np.atleast_2d(np.array(rows, dtype=float))
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad matrix: {exc}") from exc
    if a.ndim != 2 or a.shape[0] != a.shape[1] or not np.all(np.isfinite(a)):
        raise UsageError("matrix must be square and finite")
    return a


def _exit_for(outcome) -> int:
    if isinstance(outcome, TwoClassCertificate):
        return EXIT_OK
    if isinstance(outcome, Rejection):
        return EXIT_NEGATIVE
    return EXIT_UNDECIDED


# subcommands ---------------------------------------------------------------

def cmd_certify(args) -> int:
    if (args.poly is None) == (args.matrix is None):
        raise UsageError("give exactly one of --poly or --matrix")
    matrix = None
    normalised = False
    if args.poly is not None:
        p = parse_poly(args.poly, args.degree)
        normalised = p.coeffs != tuple(int(c) for c in args.poly.replace(" ", "").strip("[]").split(","))
    else:
        matrix = parse_int_matrix(_read_json(args.matrix))
        p = char_poly(matrix)
        if args.degree is not None and args.degree != p.degree:
            raise UsageError(f"--degree {args.degree} does not match matrix size {p.degree}")
    outcome = classify_two_class(p, args.precision)
    body = {
        "header": _header("certify", {"poly": args.poly, "matrix": args.matrix, "precision": args.precision}),
        "input": {"poly": [str(c) for c in p.coeffs], "degree": p.degree, "display": str(p),
                  "negated_to_monic": normalised},
        "outcome": outcome_json(outcome),
    }
    if isinstance(outcome, TwoClassCertificate):
        body["matrix"] = (matrix if matrix is not None else semisimple_matrix(p)).tolist()
    _emit(body, args.out)
    return _exit_for(outcome)


def cmd_search(args) -> int:
    from .search import ResultStore, SpecError, parse_spec_text, search_certificates, single_exponent_scan

    try:
        spec, opts = parse_spec_text(Path(args.spec).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read spec {args.spec}: {exc}") from exc
    except (SpecError, ValueError, TypeError) as exc:
        raise UsageError(f"bad spec {args.spec}: {exc}") from exc
    workers = args.workers if args.workers is not None else opts["workers"]
    store = ResultStore(args.store) if args.store else ResultStore()
    config = {**spec.to_json(), "workers": workers, "single": opts["single"]}
    if opts["single"]:
        scan = single_exponent_scan(spec.degree_range, spec.coeff_bound, store, workers,
                                    spec.max_precision_bits)
        body = {"header": _header("search", config), "scan": scan}
        _emit(body, args.out)
        return EXIT_OK
    res = search_certificates(spec, store, workers)
    body = {"header": _header("search", config), "spec_hash": spec.spec_hash(),
            "cached": res.cached, "summary": res.summary,
            "matches": [str(r.poly) for r in res.matches]}
    _emit(body, args.out)
    return EXIT_UNDECIDED if res.summary["outcomes"].get("undecided") else EXIT_OK


def _load_certificate(args):
    if args.cert is not None:
        obj = _read_json(args.cert)
        out = obj.get("outcome", obj)
        if out.get("kind") not in (None, "certificate"):
            return None, None, out
        try:
            cert = TwoClassCertificate.from_json(out.get("certificate", out))
            matrix = IntMatrix.from_rows(obj["matrix"]) if "matrix" in obj else None
        except (KeyError, TypeError, ValueError) as exc:
            raise UsageError(f"bad certificate {args.cert}: {exc}") from exc
        return cert, matrix, None
    if args.matrix is not None:
        matrix = parse_int_matrix(_read_json(args.matrix))
        outcome = classify_two_class(char_poly(matrix), args.precision)
    elif args.poly is not None:
        matrix = None
        outcome = classify_two_class(parse_poly(args.poly), args.precision)
    else:
        raise UsageError("give --cert, --matrix or --poly")
    if not isinstance(outcome, TwoClassCertificate):
        return None, None, outcome_json(outcome)
    return outcome, matrix, None


def cmd_build_verify(args) -> int:
    from .geomver import gib_pullback_report
    from .simstruct import Tolerances, bieberbach_ratio_check, build_gib_data, conformal_factor_check

    cert, matrix, negative = _load_certificate(args)
    tol = Tolerances(args.tol_subspace, args.tol_gram, args.tol_pullback, args.tol_bieberbach)
    config = {"cert": args.cert, "matrix": args.matrix, "poly": args.poly, "e_class": args.e_class,
              "samples": args.samples, "t_scale": args.t_scale}
    header = _header("build-verify", config, args.seed, tol.to_json())
    if cert is None:
        _emit({"header": header, "outcome": negative}, args.out)
        return EXIT_UNDECIDED if negative.get("kind") == "undecided" else EXIT_NEGATIVE
    if matrix is None:
        matrix = semisimple_matrix(cert.poly)
    try:
        data = build_gib_data(matrix, cert, args.e_class, args.t_scale, tol)
    except (ValueError, ArithmeticError) as exc:
        # not semisimple, ill conditioned, or the matrix does not match the certificate
        _emit({"header": header, "error": f"{type(exc).__name__}: {exc}"}, args.out)
        return EXIT_NEGATIVE
    report = gib_pullback_report(data, args.samples, args.seed)
    report.extend(bieberbach_ratio_check(data))
    report.extend(conformal_factor_check(data, args.samples, args.seed))
    body = {
        "header": header,
        "gib_data": data.to_json(),
        "leaf_closure_dim": leaf_closure_dims(cert, data.e_class),
        "passed": report.passed,
        "report": report.to_json(),
    }
    _emit(body, args.out)
    return EXIT_OK if report.passed else EXIT_NEGATIVE


def cmd_geometry(args) -> int:
    from .geomver import Heintze, UpperHalfSpace, heintze_curvature, jacobi_contraction

    if (args.matrix is None) == (args.uhs is None):
        raise UsageError("give exactly one of --matrix or --uhs")
    if args.uhs is not None:
        if args.uhs < 2:
            raise UsageError("--uhs needs dimension >= 2")
        model = UpperHalfSpace(args.uhs)
        A = np.eye(args.uhs - 1)
    else:
        A = parse_real_matrix(_read_json(args.matrix))
        model = Heintze(A)
    config = {"mode": args.mode, "matrix": A.tolist(), "uhs": args.uhs}
    if args.mode == "curvature":
        config["samples"] = args.samples
        scan = heintze_curvature(A, args.samples, args.seed)
        header = _header("geometry", config, args.seed)
        if args.csv:
            try:
                Path(args.csv).write_text("# " + json.dumps(header) + "\n" + scan.to_csv())
            except OSError as exc:
                raise UsageError(f"cannot write {args.csv}: {exc}") from exc
        negative = scan.max < 0
        body = {"header": header, "curvature": scan.to_json(), "negatively_curved": negative}
        _emit(body, args.out)
        return EXIT_OK if negative else EXIT_NEGATIVE
    k = A.shape[0]
    if args.direction is not None:
        try:
            direction = [float(x) for x in args.direction.split(",")]
        except ValueError as exc:
            raise UsageError(f"bad direction {args.direction!r}") from exc
    else:
        direction = [1.0] + [0.0] * (k - 1)
    config.update({"alpha": args.alpha, "direction": direction, "steps_per_unit": args.steps})
    try:
        res = jacobi_contraction(model, args.alpha, direction, args.steps)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    body = {"header": _header("geometry", config, args.seed, {"jacobi": 1e-6}), "jacobi": res.to_json()}
    _emit(body, args.out)
    return EXIT_OK if res.contracting else EXIT_NEGATIVE


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="gibtools", description=__doc__,
                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--version", action="version", version=f"gibtools {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("certify", help="two-class certificate for a polynomial or integer matrix")
    c.add_argument("--poly", help='coefficients, CONSTANT TERM FIRST, e.g. "-1,3,-1,1" for X^3-X^2+3X-1 (a leading -1 is negated to monic)')
    c.add_argument("--degree", type=int, help="expected degree, checked against --poly")
    c.add_argument("--matrix", help="integer matrix as JSON rows (file or inline)")
    c.add_argument("--precision", type=int, default=DEFAULT_MAX_BITS, help="max precision bits")
    c.add_argument("--out")
    c.set_defaults(func=cmd_certify)

    s = sub.add_parser("search", help="classify a coefficient box given by a TOML spec")
    s.add_argument("spec")
    s.add_argument("--workers", type=int)
    s.add_argument("--store", help="store directory (default $GIB_STORE_DIR or ./gib_store)")
    s.add_argument("--out")
    s.set_defaults(func=cmd_search)

    b = sub.add_parser("build-verify", help="build the product-model data and run all checks")
    b.add_argument("--cert", help="certificate JSON (output of certify or a bare certificate)")
    b.add_argument("--matrix")
    b.add_argument("--poly", help="constant-first coefficients")
    b.add_argument("--precision", type=int, default=DEFAULT_MAX_BITS)
    b.add_argument("--e-class", default="expanding", help="A, B, expanding or contracting")
    b.add_argument("--samples", type=int, default=100)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--t-scale", type=float, help="override the glide scaling (fault injection)")
    b.add_argument("--tol-subspace", type=float, default=1e-8)
    b.add_argument("--tol-gram", type=float, default=1e-10)
    b.add_argument("--tol-pullback", type=float, default=1e-9)
    b.add_argument("--tol-bieberbach", type=float, default=1e-12)
    b.add_argument("--out")
    b.set_defaults(func=cmd_build_verify)

    g = sub.add_parser("geometry", help="Heintze curvature scan or Jacobi contraction")
    g.add_argument("mode", choices=["curvature", "jacobi"])
    g.add_argument("--matrix", help="real matrix A as JSON rows (file or inline)")
    g.add_argument("--uhs", type=int, help="upper half-space of this dimension")
    g.add_argument("--samples", type=int, default=100, help="random planes")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--alpha", type=float, default=1.0)
    g.add_argument("--direction", help="comma list, tangent to the horosphere")
    g.add_argument("--steps", type=int, default=10_000, help="RK4 steps per unit length")
    g.add_argument("--csv")
    g.add_argument("--out")
    g.set_defaults(func=cmd_geometry)
    return ap


_VALUE_FLAGS = ("--poly", "--direction")


def _join_negative_values(argv: list[str]) -> list[str]:
    # "--poly -1,0,1" would otherwise be read as an unknown option
    out = []
    it = iter(argv)
    for tok in it:
        if tok in _VALUE_FLAGS:
            nxt = next(it, None)
            if nxt is None:
                out.append(tok)
            else:
                out.append(f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_join_negative_values(argv))
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"gibtools: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
