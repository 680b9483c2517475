"""Command-line front end.

Exit codes: 0 success, 1 bad input, 2 the solver did not converge, the
features are unattainable, or an experiment missed its tolerance.
"""

import argparse
import json
import math
import os
import sys
import time
import warnings

import numpy as np

from . import fileio
from .errors import InfeasibleSuspected, MaxEntError, MaxIterationsWarning
from .experiments import DEFAULT_POLE_ANGLE, DEFAULT_POLE_RADIUS, autoencode_batch, spectral_experiment
from .linmap import dense_map
from .priors import ElementModel, PriorKind, entropy_measures
from .selftest import run_checks
from .solver import InversionProblem, SolveOptions, solve

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_SOLVER = 2

SPECTRUM_TOLERANCE = 1e-6

_KIND_CHOICES = [k.value for k in PriorKind]


class InputError(Exception):
    """Bad command-line input; the message names the offending flag."""


def _flag_error(flag, exc):
    return InputError(f"{flag}: {exc}")


def _entropy_or_none(x):
    try:
        return entropy_measures(x)
    except MaxEntError:
        return None


def _ms(t0):
    return round(1000.0 * (time.perf_counter() - t0), 3)


def _options(args):
    try:
        return SolveOptions(tol=args.tol, max_iter=args.max_iter)
    except ValueError as exc:
        raise InputError(f"--tol/--max-iter: {exc}") from None


def cmd_invert(args):
    t0 = time.perf_counter()
    try:
        w = fileio.read_matrix_csv(args.w)
    except (OSError, MaxEntError) as exc:
        raise _flag_error("--w", exc) from None
    try:
        lmap = dense_map(w)
    except MaxEntError as exc:
        raise _flag_error("--w", exc) from None
    try:
        z = fileio.read_vector_csv(args.z)
    except (OSError, MaxEntError) as exc:
        raise _flag_error("--z", exc) from None

    if args.prior_per_element:
        try:
            models = [ElementModel.of(k) for k in fileio.read_kinds_csv(args.prior_per_element)]
        except (OSError, ValueError) as exc:
            raise _flag_error("--prior-per-element", exc) from None
        flag = "--prior-per-element"
    elif args.prior:
        models = args.prior
        flag = "--prior"
    else:
        raise InputError("--prior: one of --prior or --prior-per-element is required")
    try:
        problem = InversionProblem(lmap, models, z)
    except MaxEntError as exc:
        raise InputError(f"--z/{flag}: {exc}") from None
    except ValueError as exc:
        raise _flag_error(flag, exc) from None
    opts = _options(args)
    t_setup = _ms(t0)

    t1 = time.perf_counter()
    status = EXIT_OK
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", MaxIterationsWarning)
            result = solve(problem, opts)
    except InfeasibleSuspected as exc:
        print(f"error: {exc}", file=sys.stderr)
        result = exc.result
        status = EXIT_SOLVER
    if not result.converged and status == EXIT_OK:
        print(f"error: solver {result.status} (residual {result.residual_inf:.3g})", file=sys.stderr)
        status = EXIT_SOLVER
    t_solve = _ms(t1)
    if result is None:
        return status

    fileio.write_vector_csv(args.out, result.x_bar)
    report = fileio.make_report(
        "invert",
        {
            "w": str(args.w),
            "z": str(args.z),
            "prior": args.prior,
            "prior_per_element": None if not args.prior_per_element else str(args.prior_per_element),
            "tol": opts.tol,
            "max_iter": opts.max_iter,
        },
        result.residual_inf,
        result.iterations,
        _entropy_or_none(result.x_bar),
        timings_ms={"setup": t_setup, "solve": t_solve},
        converged=result.converged,
        status=result.status,
    )
    fileio.write_report(args.report, report)
    return status


def _seed(args):
    env = os.environ.get("MAXENT_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise InputError(f"MAXENT_SEED: not an integer: {env!r}") from None
    return args.seed


def cmd_spectrum(args):
    t0 = time.perf_counter()
    seed = _seed(args)
    signal = None
    if args.input:
        try:
            signal = fileio.read_vector_csv(args.input)
        except (OSError, MaxEntError) as exc:
            raise _flag_error("--input", exc) from None
    opts = _options(args)
    try:
        run = spectral_experiment(
            nfft=args.nfft, order=args.order, seed=seed, signal=signal, opts=opts,
            radius=args.pole_radius, angle=args.pole_angle,
        )
    except InfeasibleSuspected as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except MaxEntError as exc:
        raise InputError(f"--nfft/--order/--input: {exc}") from None
    elapsed = _ms(t0)

    result = run.result
    ok = result.converged and run.max_rel_deviation <= SPECTRUM_TOLERANCE
    if args.out:
        fileio.write_matrix_csv(args.out, np.column_stack([run.bins, result.x_bar, run.ar_spectrum]))
    parameters = {
        "nfft": int(run.signal.size),
        "order": args.order,
        "seed": None if args.input else seed,
        "input": None if not args.input else str(args.input),
        "tol": opts.tol,
        "filter": None if args.input else {
            "type": "all-pole, 2 poles",
            "pole_radius": args.pole_radius,
            "pole_angle": args.pole_angle,
            "denominator": [1.0, -2.0 * args.pole_radius * math.cos(args.pole_angle), args.pole_radius**2],
        },
        "models": "chisq1 at DC and Nyquist bins, exp elsewhere",
    }
    report = fileio.make_report(
        "spectrum",
        parameters,
        result.residual_inf,
        result.iterations,
        _entropy_or_none(result.x_bar),
        timings_ms={"total": elapsed},
        converged=result.converged,
        max_rel_deviation=run.max_rel_deviation,
        tolerance=SPECTRUM_TOLERANCE,
        acf=run.acf,
    )
    fileio.write_report(args.report, report)
    if not ok:
        print(
            f"error: max relative deviation {run.max_rel_deviation:.3g} "
            f"(tolerance {SPECTRUM_TOLERANCE:g}), converged={result.converged}",
            file=sys.stderr,
        )
        return EXIT_SOLVER
    return EXIT_OK


def cmd_autoencode(args):
    t0 = time.perf_counter()
    if not 1 <= args.keep < args.side:
        raise InputError(f"--keep: need 1 <= keep < side, got keep={args.keep}, side={args.side}")
    if args.count < 0:
        raise InputError("--count: must be non-negative")
    try:
        batch = fileio.read_idx_images(args.images, args.count)
    except (OSError, MaxEntError) as exc:
        raise _flag_error("--images", exc) from None
    if batch.side != args.side:
        raise InputError(f"--side: archive holds {batch.side}x{batch.side} images, not {args.side}x{args.side}")
    if batch.count < args.count:
        raise InputError(f"--count: archive holds only {batch.count} images")
    opts = _options(args)
    t_read = _ms(t0)

    t1 = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", MaxIterationsWarning)
        try:
            runs = autoencode_batch(batch.pixels, batch.side, args.keep, opts, workers=args.workers)
        except InfeasibleSuspected as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_SOLVER
    t_solve = _ms(t1)

    t2 = time.perf_counter()
    out_dir = args.out_dir
    created_dir = not os.path.isdir(out_dir)
    os.makedirs(out_dir, exist_ok=True)
    written = []
    images = []
    clipped_total = 0
    try:
        for i, run in enumerate(runs):
            entry = {"index": i}
            for tag, vec in (
                ("original", run.original),
                ("pinv", run.pinv.x_bar),
                ("exp", run.exponential.x_bar),
                ("ted", run.ted.x_bar),
            ):
                path = os.path.join(out_dir, f"{i:03d}_{tag}.pgm")
                written.append(path)
                clipped = fileio.write_pgm(path, vec, batch.side, clamp=True)
                clipped_total += clipped
                entry[f"{tag}_clipped"] = clipped
            entry.update(run.metrics)
            ent = _entropy_or_none(run.ted.x_bar)
            entry["ted_entropy"] = None if ent is None else vars(ent)
            images.append(entry)
    except BaseException:
        for path in written:
            if os.path.exists(path):
                os.unlink(path)
        if created_dir and not os.listdir(out_dir):
            os.rmdir(out_dir)
        raise
    t_write = _ms(t2)

    solved = [r.exponential for r in runs] + [r.ted for r in runs]
    converged = all(r.converged for r in solved)
    report = fileio.make_report(
        "autoencode",
        {
            "images": str(args.images),
            "count": args.count,
            "side": args.side,
            "keep": args.keep,
            "out_dir": str(out_dir),
            "tol": opts.tol,
            "max_iter": opts.max_iter,
        },
        max((r.residual_inf for r in solved), default=0.0),
        sum(r.iterations for r in solved),
        None,
        timings_ms={"read": t_read, "solve": t_solve, "write": t_write},
        clipped_pixels=clipped_total,
        converged=converged,
        images=images,
    )
    fileio.write_report(args.report, report)
    return EXIT_OK if converged else EXIT_SOLVER


def cmd_selftest(args):
    results = run_checks()
    if args.json:
        print(json.dumps(
            [{"name": r.name, "error": r.error if math.isfinite(r.error) else None,
              "tolerance": r.tolerance, "passed": r.passed} for r in results],
            indent=2,
        ))
    else:
        width = max(len(r.name) for r in results)
        for r in results:
            print(f"{'PASS' if r.passed else 'FAIL'}  {r.name:<{width}}  error={r.error:.3e}  tol={r.tolerance:.1e}")
    return EXIT_OK if all(r.passed for r in results) else EXIT_SOLVER


def _add_solver_flags(p):
    p.add_argument("--tol", type=float, default=1e-10, help="residual tolerance relative to max(1, |z|_inf)")
    p.add_argument("--max-iter", type=int, default=200)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="maxent-inversion",
        description="Maximum-entropy reconstruction of data from linear features.",
        allow_abbrev=False,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("invert", help="solve one inversion problem from CSV inputs", allow_abbrev=False)
    p.add_argument("--w", required=True, help="CSV file with the N x M feature matrix")
    p.add_argument("--z", required=True, help="CSV file with the M features")
    p.add_argument("--prior", choices=_KIND_CHOICES, help="prior applied to every element")
    p.add_argument("--prior-per-element", help="file listing one prior kind per element")
    _add_solver_flags(p)
    p.add_argument("--out", required=True, help="CSV file for the reconstruction")
    p.add_argument("--report", required=True, help="JSON report file")
    p.set_defaults(func=cmd_invert)

    p = sub.add_parser("spectrum", help="AR spectrum recovery from ACF features", allow_abbrev=False)
    p.add_argument("--nfft", type=int, default=128)
    p.add_argument("--order", type=int, default=6)
    p.add_argument("--seed", type=int, default=0, help="noise seed (MAXENT_SEED overrides)")
    p.add_argument("--input", help="CSV signal to use instead of generated noise")
    p.add_argument("--pole-radius", type=float, default=DEFAULT_POLE_RADIUS)
    p.add_argument("--pole-angle", type=float, default=DEFAULT_POLE_ANGLE)
    _add_solver_flags(p)
    p.add_argument("--out", help="CSV file with columns: periodogram, reconstruction, AR spectrum")
    p.add_argument("--report", required=True)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("autoencode", help="DCT feature inversion of IDX images", allow_abbrev=False)
    p.add_argument("--images", required=True, help="uncompressed IDX3 image archive")
    p.add_argument("--count", type=int, default=6)
    p.add_argument("--side", type=int, default=28)
    p.add_argument("--keep", type=int, default=7)
    p.add_argument("--workers", type=int, default=None, help="threads for per-image solves")
    _add_solver_flags(p)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--report", required=True)
    p.set_defaults(func=cmd_autoencode)

    p = sub.add_parser("selftest", help="run the embedded property checks", allow_abbrev=False)
    p.add_argument("--json", action="store_true", help="print machine-readable results")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
