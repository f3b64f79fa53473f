"""``powerpart`` command-line interface."""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

import mpmath

from . import coefficients, counting, estimator, expsums, phi, report
from .errors import PowerPartError, PreconditionError

SUBCOMMANDS = ("count", "estimate", "coeffs", "expsum", "gap-scan", "phi", "verify-lemma", "sweep", "verify-all")


def _int_list(text: str) -> list[int]:
    return [int(float(s)) for s in text.split(",") if s.strip()]


def _float_list(text: str) -> list[float]:
    return [float(s) for s in text.split(",") if s.strip()]


def _num(x):
    """JSON-friendly number: ints stay ints, everything else becomes a float."""
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        return str(x)
    return float(x)


def _global_flags(suppress: bool) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS if suppress else None)
    p.add_argument("--format", choices=("csv", "json"), help="output format")
    p.add_argument("--precision", type=int, metavar="DIGITS", help="working decimal digits")
    p.add_argument("--jobs", type=int, metavar="N", help="worker processes")
    p.add_argument("--seed", type=int, metavar="S", help="seed for sampled diagnostics")
    p.add_argument("--out", metavar="PATH", help="write output to PATH")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="powerpart",
        description="Partitions into perfect k-th powers: exact counts, asymptotics and circle-method checks.",
        parents=[_global_flags(False)],
    )
    parser.set_defaults(jobs=1, seed=0)
    sub = parser.add_subparsers(dest="command", required=True)
    flags = _global_flags(True)

    p = sub.add_parser("count", parents=[flags], help="exact p^k(n)")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--max-bytes", type=int, default=None, help="memory budget for the count table")

    p = sub.add_parser("estimate", parents=[flags], help="asymptotic estimate of log p^k(n) or its difference")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--n", type=float, required=True)
    p.add_argument("--J", type=int, default=estimator.DEFAULT_J)
    p.add_argument("--diff", action="store_true", help="estimate p^k(n+1) - p^k(n)")
    p.add_argument("--exact-compare", action="store_true", help="also compute the exact count and the ratio")
    p.add_argument("--b-convention", choices=coefficients.B_CONVENTIONS, default="quarter")

    p = sub.add_parser("coeffs", parents=[flags], help="correction coefficients c_j, c~_j or d_j")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--J", type=int, default=2)
    p.add_argument("--channel", choices=("c", "ctilde", "d"), default="c")
    p.add_argument("--b-convention", choices=coefficients.B_CONVENTIONS, default="quarter")

    p = sub.add_parser("expsum", parents=[flags], help="complete exponential sum S_k(r, b)")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--b", type=int, required=True)

    p = sub.add_parser("gap-scan", parents=[flags], help="worst |S_k(r,b)|/r over r <= r_max")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--r-max", type=int, default=2000)

    p = sub.add_parser("phi", parents=[flags], help="evaluate Phi_k(e^(-1/X) e(theta))")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--X", type=float, required=True)
    p.add_argument("--theta", default="0", help="decimal or fraction, e.g. 1/2")
    p.add_argument("--approx", choices=("direct", "xi", "major"), default="direct")
    p.add_argument("--q", type=int, default=None, help="major arc denominator (default: classify theta)")
    p.add_argument("--a", type=int, default=None)
    p.add_argument("--rel-tol", type=float, default=None)
    p.add_argument("--full-theta", action="store_true", help="major arc prefactor uses Theta instead of theta")

    p = sub.add_parser("verify-lemma", parents=[flags], help="measured approximation errors against their envelopes (--which 2, 3 or 4)")
    p.add_argument("--which", type=int, choices=(2, 3, 4), required=True)
    p.add_argument("--k", type=int, default=None, help="default 2, or 3 for --which 4")
    p.add_argument("--X", type=_float_list, default=None, help="comma-separated X values")
    p.add_argument("--samples", type=int, default=16)

    p = sub.add_parser("sweep", parents=[flags], help="estimate-vs-exact table")
    p.add_argument("--config", default=None, help="flat key = value config file")
    p.add_argument("--k", type=_int_list, default=None, help="comma-separated k values")
    p.add_argument("--n-list", type=_int_list, default=None)
    p.add_argument("--J", type=int, default=None)
    p.add_argument("--channel", default=None, help="value, difference or both comma-separated")
    p.add_argument("--no-exact", action="store_true")

    p = sub.add_parser("verify-all", parents=[flags], help="run every verification suite")
    p.add_argument("--level", choices=("quick", "full"), default="quick")
    p.add_argument("--inject-fault", action="append", default=[], choices=("c1",),
                   help="corrupt an intermediate value to exercise failure reporting")
    p.add_argument("--strict", action="store_true", help="known failures also fail the run")
    return parser


def _emit(payload, args, default_format: str = "json") -> None:
    fmt = args.format or default_format
    if isinstance(payload, str):
        text = payload
    elif fmt == "json":
        text = json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n"
    else:
        rows = payload if isinstance(payload, list) else [payload]
        text = report.render_dicts(rows, "csv")
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_count(args):
    if args.max_bytes is not None:
        table = counting.count_table(args.k, args.n, args.max_bytes)
        value = table[args.n]
    else:
        value = counting.count(args.k, args.n)
    log = counting.log_big(value) if value > 0 else None
    return {"k": args.k, "n": args.n, "count": str(value), "log_count": log}


def _cmd_estimate(args):
    n = int(args.n) if float(args.n).is_integer() else args.n
    if args.diff:
        est = estimator.estimate_log_diff(args.k, n, args.J, args.precision, args.b_convention)
    else:
        est = estimator.estimate_log_p(args.k, n, args.J, args.precision, args.b_convention)
    out = {
        "k": args.k, "n": _num(n), "X": float(est.X), "Y": float(est.Y),
        "log_estimate": float(est.log_value), "J": est.J_used, "channel": est.channel,
        "in_envelope": est.in_envelope, "J_clamped": est.J_clamped,
    }
    if args.exact_compare:
        if not isinstance(n, int):
            raise PreconditionError("--exact-compare needs an integer n")
        table = counting.count_table(args.k, n + 1)
        exact = table[n + 1] - table[n] if args.diff else table[n]
        out["log_exact"] = counting.log_big(exact)
        out["ratio"] = float(f"{estimator.ratio_to_exact(est, out['log_exact']):.12g}")
    return out


def _cmd_coeffs(args):
    if args.channel == "c":
        poly = coefficients.compute_c(args.k, args.J, args.b_convention)
    elif args.channel == "ctilde":
        poly = coefficients.compute_c_tilde(args.k, args.J, args.b_convention)
    else:
        poly = coefficients.compute_d(args.k, args.J, args.b_convention)
    return [
        {"power": p, "variable": poly.variable, "coefficient_over_sqrt_pi": str(poly.coefficient(p)),
         "value": float(poly.coefficient(p)) * float(mpmath.sqrt(mpmath.pi))}
        for p in sorted(poly.coeffs)
    ]


def _cmd_expsum(args):
    s = expsums.s_k(args.k, args.r, args.b)
    return {"k": args.k, "r": args.r, "b": args.b, "real": s.value.real, "imag": s.value.imag,
            "magnitude": s.magnitude, "ratio": s.magnitude / args.r}


def _cmd_gap_scan(args):
    return {"k": args.k, **expsums.gap_scan(args.k, args.r_max, args.jobs).to_dict()}


def _cmd_phi(args):
    theta = Fraction(args.theta) if "/" in args.theta else float(args.theta)
    out = {"k": args.k, "X": args.X, "theta": str(args.theta), "approx": args.approx}
    if args.approx == "direct":
        v = phi.phi_direct(args.k, args.X, theta, args.rel_tol, args.precision)
        out.update(real=float(v.value.real), imag=float(v.value.imag),
                   truncation_error_bound=float(v.truncation_error_bound), terms_used=v.terms_used)
    elif args.approx == "xi":
        v = phi.xi_approx(args.k, args.X, theta, args.precision)
        out.update(real=float(v.real), imag=float(v.imag))
    else:
        if args.q is None:
            point = phi.classify_arc(args.k, args.X, theta)
            q, a = point.q, point.a
            out["classification"] = point.classification
        else:
            q, a = args.q, args.a if args.a is not None else 0
        offset = float(theta) - a / q
        v = phi.major_arc_approx(args.k, args.X, q, a, offset, use_full_theta=args.full_theta)
        out.update(q=q, a=a, real=v.value.real, imag=v.value.imag, series_tail_bound=v.series_tail_bound)
    return out


def _cmd_verify_lemma(args):
    k = args.k if args.k is not None else (3 if args.which == 4 else 2)
    return report.lemma_rows(args.which, k, args.X, args.seed, args.samples)


def _cmd_sweep(args):
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            config = report.parse_config(fh.read())
    else:
        config = report.SweepConfig()
    if args.k is not None:
        config.ks = args.k
    if args.n_list is not None:
        config.ns = args.n_list
    if args.J is not None:
        config.J = args.J
    if args.channel is not None:
        config.channels = [c.strip() for c in args.channel.split(",")]
    if args.no_exact:
        config.exact = False
    if args.precision is not None:
        config.precision = args.precision
    if args.jobs != 1:
        config.jobs = args.jobs
    if args.format is not None:
        config.format = args.format
    if args.out is not None:
        config.out = args.out
    config.__post_init__()
    rows = report.run_sweep(config)
    text = report.write_report(rows, config.format, config.out)
    if not config.out:
        sys.stdout.write(text)
    return None


def _cmd_verify_all(args):
    summary = report.verify_all(args.level, tuple(args.inject_fault), args.jobs, args.seed)
    payload = summary.to_dict()
    if (args.format or "json") == "json":
        _emit(payload, args)
    else:
        _emit([r.to_dict() for r in summary.results], args)
    for line in summary.lines():
        print(line, file=sys.stderr)
    failed = summary.failures if args.strict else summary.unexpected_failures
    return 3 if failed else 0


_HANDLERS = {
    "count": _cmd_count,
    "estimate": _cmd_estimate,
    "coeffs": _cmd_coeffs,
    "expsum": _cmd_expsum,
    "gap-scan": _cmd_gap_scan,
    "phi": _cmd_phi,
    "verify-lemma": _cmd_verify_lemma,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "sweep":
            _cmd_sweep(args)
            return 0
        if args.command == "verify-all":
            return _cmd_verify_all(args)
        default_format = "csv" if args.command in ("verify-lemma", "coeffs") else "json"
        _emit(_HANDLERS[args.command](args), args, default_format)
        return 0
    except PowerPartError as exc:
        print(f"powerpart: error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
