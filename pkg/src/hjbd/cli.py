"""Command-line interface.

Subcommands cover the two denoising paths (MAP via the ROF solver,
posterior mean via Gibbs sampling), pointwise estimation with an
arbitrary JSON-described prior, noise generation, image metrics, the
verification suites, and a closed-form example table.

Exit codes: 0 success, 1 invalid input, 2 numerical failure (outputs
and reports that were already computed are still written).  The
environment variable HJBD_THREADS caps compiled-kernel worker threads.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .envelope import envelope
from .errors import NumericalError, ValidationError
from .gibbs import SamplerConfig, posterior_mean_mcmc
from .imaging import (
    NoiseSpec,
    add_gaussian_noise,
    plateau_fraction,
    psnr,
    read_pgm,
    rof_map_detailed,
    write_pgm,
)
from .posterior import EstimatorParams, posterior_summary
from .priors import QuadraticPrior, WeightedL1Prior, prior_from_json
from .report import render_figures, write_report_csv, write_report_json
from .verification import SUITE_NAMES, run_suite


class _Parser(argparse.ArgumentParser):
    """Argument parser whose usage errors map to exit code 1."""

    def error(self, message):
        raise ValidationError(message)


def _apply_thread_cap():
    raw = os.environ.get("HJBD_THREADS")
    if raw is None or raw == "":
        return
    try:
        count = int(raw)
    except ValueError as exc:
        raise ValidationError("HJBD_THREADS must be a positive integer") from exc
    if count < 1:
        raise ValidationError("HJBD_THREADS must be a positive integer")
    import numba

    numba.set_num_threads(min(count, numba.config.NUMBA_NUM_THREADS))


def _parse_vector(text: str) -> np.ndarray:
    try:
        return np.array([float(tok) for tok in text.split(",") if tok.strip()])
    except ValueError as exc:
        raise ValidationError(f"could not parse vector {text!r}") from exc


def _load_prior(text: str):
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"prior is not valid JSON: {exc}") from exc
    return prior_from_json(payload)


def _emit(payload: dict) -> None:
    print(json.dumps(payload, indent=2))


def _cmd_denoise_map(args) -> int:
    img = read_pgm(args.input)
    result = rof_map_detailed(img, args.t, args.lam)
    write_pgm(result.image, args.output)
    if not result.converged:
        print(
            f"warning: ROF solver hit the iteration cap "
            f"({result.iterations} iterations); output written anyway",
            file=sys.stderr,
        )
        return 2
    return 0


def _cmd_denoise_pm(args) -> int:
    img = read_pgm(args.input)
    cfg = SamplerConfig(sweeps=args.sweeps, burn_in=args.burn_in,
                        seed=args.seed, chains=args.chains, thin=args.thin)
    result = posterior_mean_mcmc(img, args.t, args.eps, args.lam, cfg)
    write_pgm(result.mean_image, args.output)
    written = read_pgm(args.output)
    payload = {
        "rhat_max": result.rhat_max,
        "converged": result.converged,
        "accepted_sweeps": result.accepted_sweeps,
        "max_stderr": float(np.max(result.stderr_image.pixels)),
        "psnr_vs_input": psnr(img, written),
    }
    if args.report:
        with open(args.report, "w", encoding="utf-8") as handle:
            json.dump(payload, handle, indent=2)
            handle.write("\n")
    _emit(payload)
    if not result.converged:
        print(
            f"warning: split-chain rhat {result.rhat_max:.3f} above 1.1; "
            "output and report written anyway",
            file=sys.stderr,
        )
        return 2
    return 0


def _cmd_pm_estimate(args) -> int:
    prior = _load_prior(args.prior)
    x = _parse_vector(args.x)
    summary = posterior_summary(prior, x, EstimatorParams(t=args.t, eps=args.eps))
    _emit({
        "u_pm": summary.u_pm.tolist(),
        "mse": summary.mse,
        "s_eps": summary.s_eps,
        "w_eps": summary.w_eps,
    })
    return 0


def _cmd_map_estimate(args) -> int:
    prior = _load_prior(args.prior)
    x = _parse_vector(args.x)
    result = envelope(prior, x, args.t)
    _emit({
        "u_map": result.minimizer.tolist(),
        "s0": result.value,
    })
    return 0


def _cmd_noise(args) -> int:
    img = read_pgm(args.input)
    noisy = add_gaussian_noise(img, NoiseSpec(sigma=args.sigma, seed=args.seed))
    write_pgm(noisy, args.output)
    return 0


def _cmd_metrics(args) -> int:
    a = read_pgm(args.first)
    b = read_pgm(args.second)
    _emit({
        "psnr": psnr(a, b),
        "mse": float(np.mean((a.pixels - b.pixels) ** 2)),
        "plateau_fraction_first": plateau_fraction(a, args.plateau_tol),
        "plateau_fraction_second": plateau_fraction(b, args.plateau_tol),
    })
    return 0


def _cmd_verify(args) -> int:
    report = run_suite(args.suite, args.seed)
    if args.out:
        json_path = write_report_json(report, args.out)
        write_report_csv(report, json_path.with_suffix(".csv"))
    else:
        _emit(report.to_json())
    if args.figures:
        render_figures(report, args.figures)
    if not report.all_passed:
        failed = [c.name for c in report.checks if not c.passed]
        print(f"failed checks: {', '.join(failed)}", file=sys.stderr)
        return 2
    return 0


def _cmd_example(args) -> int:
    xs = _parse_vector(args.x) if args.x else np.array([0.5, 1.0, 2.5, 5.0])
    params = EstimatorParams(t=args.t, eps=args.eps)
    quad = QuadraticPrior(args.m)
    l1 = WeightedL1Prior([args.lam])
    header = (
        f"closed forms at t={args.t:g}, eps={args.eps:g} "
        f"(quadratic m={args.m:g}; l1 weight {args.lam:g})"
    )
    print(header)
    print(f"{'x':>8} {'u_quad':>10} {'mse_quad':>10} {'u_l1':>10} "
          f"{'mse_l1':>10} {'soft_thr':>10}")
    for x in xs:
        xv = np.array([float(x)])
        sq = posterior_summary(quad, xv, params)
        sl = posterior_summary(l1, xv, params)
        soft = float(np.sign(x) * max(abs(x) - args.t * args.lam, 0.0))
        print(f"{x:8.3f} {sq.u_pm[0]:10.5f} {sq.mse:10.5f} "
              f"{sl.u_pm[0]:10.5f} {sl.mse:10.5f} {soft:10.5f}")
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="hjbd",
        description="MAP and posterior-mean denoising with report tooling",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("denoise-map", help="ROF MAP denoising of a PGM image")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.set_defaults(func=_cmd_denoise_map)

    p = sub.add_parser("denoise-pm",
                       help="posterior-mean denoising via Gibbs sampling")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--sweeps", type=int, default=20000)
    p.add_argument("--burn-in", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--chains", type=int, default=4)
    p.add_argument("--thin", type=int, default=1)
    p.add_argument("--report", help="write the run diagnostics to this JSON file")
    p.set_defaults(func=_cmd_denoise_pm)

    p = sub.add_parser("pm-estimate",
                       help="posterior-mean summary for a JSON prior")
    p.add_argument("--prior", required=True,
                   help='e.g. \'{"kind":"WeightedL1","lambda":[2]}\'')
    p.add_argument("--x", required=True, help="comma-separated components")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.set_defaults(func=_cmd_pm_estimate)

    p = sub.add_parser("map-estimate",
                       help="proximal MAP point and envelope value")
    p.add_argument("--prior", required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--t", type=float, required=True)
    p.set_defaults(func=_cmd_map_estimate)

    p = sub.add_parser("noise", help="add seeded Gaussian noise to a PGM image")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_noise)

    p = sub.add_parser("metrics", help="PSNR and plateau fractions of two images")
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("--plateau-tol", type=float, default=1e-6)
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("--suite", default="default",
                   choices=SUITE_NAMES + ("default",))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write the JSON report here (plus a CSV sibling)")
    p.add_argument("--figures", help="render summary figures into this directory")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("example", help="closed-form worked-example table")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--m", type=float, default=1.0)
    p.add_argument("--lambda", dest="lam", type=float, default=2.0)
    p.add_argument("--x", help="comma-separated evaluation points")
    p.set_defaults(func=_cmd_example)

    return parser


def main(argv=None) -> int:
    try:
        _apply_thread_cap()
        args = _build_parser().parse_args(argv)
        return args.func(args)
    except (ValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # argparse --help
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
