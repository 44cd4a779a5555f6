"""Command-line interface.

Subcommands:

* ``run`` — run one experiment (a named preset or fully flag-specified)
  and optionally emit the trace as CSV.
* ``stability`` — print the analytic stability report for a
  gradient-learning configuration.
* ``presets`` — list the named presets and their expected outcomes.
* ``bench`` — time the compiled kernel against the pure-Python fallback
  on the same configuration and check the traces agree.

Exit codes: 0 on success (including a preset reaching its expected
outcome), 1 when a preset finishes with an unexpected outcome, 2 on
configuration errors.

A flat ``key=value`` config file (one pair per line, ``#`` comments) can
seed any flag of ``run``/``stability`` via ``--config``; explicit flags
override file values.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

from . import _kernels
from .env import ProblemConstants
from .harness import (
    PRESET_EXPECTED_OUTCOME,
    PRESET_NAMES,
    ExperimentConfig,
    emit_csv,
    preset_config,
    report_stability,
    run_experiment,
)
from .learners import Algorithm, LearnerConfig

_ALGORITHMS = tuple(a.value for a in Algorithm)


def _float_pair(text: str) -> tuple[float, float]:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected two comma-separated floats, got {text!r}")
    return float(parts[0]), float(parts[1])


def _matrix2(text: str) -> tuple[tuple[float, float], tuple[float, float]]:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 4:
        raise argparse.ArgumentTypeError(
            f"expected four comma-separated floats (row-major 2x2), got {text!r}"
        )
    a, b, c, d = (float(p) for p in parts)
    return ((a, b), (c, d))


def _add_model_flags(parser: argparse.ArgumentParser, with_run_flags: bool) -> None:
    parser.add_argument("--config", metavar="FILE", help="key=value config file")
    parser.add_argument("--preset", choices=PRESET_NAMES, help="named experiment preset")
    parser.add_argument("--algorithm", choices=_ALGORITHMS)
    parser.add_argument("--lambda", dest="lam", type=float, help="return-mixing parameter")
    parser.add_argument("--alpha", type=float, help="learning rate")
    parser.add_argument("--gamma", type=float, help="discount factor (default 1)")
    parser.add_argument("--c1", type=float, help="critic curvature at t=1")
    parser.add_argument("--c2", type=float, help="critic curvature at t=2")
    parser.add_argument("--k", type=float, help="action cost coefficient")
    parser.add_argument("--F", type=_matrix2, metavar="a,b,c,d", help="row-major 2x2 reparametrisation")
    parser.add_argument("--p0", type=_float_pair, metavar="x,y", help="starting p vector")
    parser.add_argument("--gdhp-mix", type=float, help="gdhp mixing coefficient (default 0.5)")
    if with_run_flags:
        parser.add_argument("--w34", type=_float_pair, metavar="x,y", help="starting (w3, w4)")
        parser.add_argument("--iterations", type=float, help="iteration cap (default 1e7)")
        parser.add_argument("--seed", type=int, help="noise seed (default 1)")
        parser.add_argument("--noise-var", type=float, help="exploration noise variance")
        parser.add_argument("--record-every", type=int, help="trace sampling stride (default 1000)")
        parser.add_argument("--div-threshold", type=float, help="early-exit divergence bound")
        parser.add_argument("--conv-threshold", type=float, help="early-exit convergence bound")
        parser.add_argument("--out", metavar="FILE", help="write the trace as CSV")


def _load_config_file(path: str) -> dict[str, str]:
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {raw.rstrip()!r}")
            key, value = line.split("=", 1)
            values[key.strip().lower().replace("_", "-")] = value.strip()
    return values


_FILE_KEYS = {
    "preset": str,
    "algorithm": str,
    "lambda": ("lam", float),
    "alpha": float,
    "gamma": float,
    "c1": float,
    "c2": float,
    "k": float,
    "f": ("F", _matrix2),
    "p0": _float_pair,
    "gdhp-mix": ("gdhp_mix", float),
    "w34": _float_pair,
    "iterations": float,
    "seed": int,
    "noise-var": ("noise_var", float),
    "record-every": ("record_every", int),
    "div-threshold": ("div_threshold", float),
    "conv-threshold": ("conv_threshold", float),
    "out": str,
}


def _merge_config_file(args: argparse.Namespace) -> None:
    """Fill unset args from the config file; explicit flags win."""
    if not getattr(args, "config", None):
        return
    for key, value in _load_config_file(args.config).items():
        entry = _FILE_KEYS.get(key)
        if entry is None:
            raise ValueError(f"unknown config file key {key!r}")
        if isinstance(entry, tuple):
            dest, conv = entry
        else:
            dest, conv = key, entry
        if getattr(args, dest, None) is None:
            setattr(args, dest, conv(value))


def _build_config(args: argparse.Namespace, for_run: bool) -> ExperimentConfig:
    if args.preset is not None and args.algorithm is not None:
        raise ValueError("give either --preset or --algorithm, not both")
    if args.preset is not None:
        ignored = [
            flag
            for flag, dest in (
                ("--lambda", "lam"), ("--alpha", "alpha"), ("--gamma", "gamma"),
                ("--c1", "c1"), ("--c2", "c2"), ("--k", "k"), ("--F", "F"),
                ("--p0", "p0"), ("--gdhp-mix", "gdhp_mix"), ("--w34", "w34"),
                ("--noise-var", "noise_var"), ("--div-threshold", "div_threshold"),
                ("--conv-threshold", "conv_threshold"),
            )
            if getattr(args, dest, None) is not None
        ]
        if ignored:
            raise ValueError(
                f"preset runs accept only --iterations/--seed/--record-every "
                f"overrides; drop {', '.join(ignored)}"
            )
        iterations = int(args.iterations) if for_run and args.iterations is not None else None
        seed = args.seed if for_run else None
        record_every = args.record_every if for_run else None
        return preset_config(args.preset, iterations=iterations, seed=seed, record_every=record_every)

    if args.algorithm is None:
        raise ValueError("an --algorithm (or --preset) is required")
    required = {"lam": args.lam, "alpha": args.alpha, "c1": args.c1, "c2": args.c2,
                "k": args.k, "F": args.F, "p0": args.p0}
    missing = [name for name, value in required.items() if value is None]
    if missing:
        raise ValueError(f"missing flags for a fully specified run: {', '.join(missing)}")
    gamma = 1.0 if args.gamma is None else args.gamma
    learner = LearnerConfig(
        algorithm=Algorithm(args.algorithm),
        lam=args.lam,
        alpha=args.alpha,
        gamma=gamma,
        gdhp_mix=0.5 if args.gdhp_mix is None else args.gdhp_mix,
    )
    consts = ProblemConstants(c1=args.c1, c2=args.c2, k=args.k, gamma=gamma, lam=args.lam)
    kwargs = {}
    if for_run:
        if args.w34 is not None:
            kwargs["w34_0"] = args.w34
        if args.iterations is not None:
            kwargs["iterations"] = int(args.iterations)
        if args.seed is not None:
            kwargs["seed"] = args.seed
        if args.noise_var is not None:
            kwargs["noise_variance"] = args.noise_var
        if args.record_every is not None:
            kwargs["record_every"] = args.record_every
        if args.div_threshold is not None:
            kwargs["divergence_threshold"] = args.div_threshold
        if args.conv_threshold is not None:
            kwargs["convergence_threshold"] = args.conv_threshold
    return ExperimentConfig(learner=learner, consts=consts, F=args.F, p0=args.p0, **kwargs)


def _cmd_run(args: argparse.Namespace) -> int:
    config = _build_config(args, for_run=True)
    trace = run_experiment(config)
    print(
        f"outcome: {trace.outcome.value} at iteration {trace.at_iteration} "
        f"(|p| {trace.p_norm[0]:.6g} -> {trace.p_norm[-1]:.6g}, {len(trace)} rows, "
        f"{_kernels.active_backend()} backend)"
    )
    if args.out:
        emit_csv(trace, args.out)
        print(f"trace written to {args.out}")
    if args.preset is not None:
        expected = PRESET_EXPECTED_OUTCOME[args.preset]
        if trace.outcome is not expected:
            print(
                f"note: preset {args.preset} is expected to end {expected.value}; "
                "the noisy presets need iterations ~1e9 to cross their divergence "
                "marker (see README)",
                file=sys.stderr,
            )
            return 1
    return 0


def _cmd_stability(args: argparse.Namespace) -> int:
    config = _build_config(args, for_run=False)
    report = report_stability(config)
    if args.json:
        print(report.to_json())
    else:
        print(report)
    return 0


def _cmd_presets(_args: argparse.Namespace) -> int:
    for name in PRESET_NAMES:
        config = preset_config(name)
        learner = config.learner
        print(
            f"{name:>15}: {learner.algorithm.value:>9} lam={learner.lam:g} "
            f"alpha={learner.alpha:g} c1={config.consts.c1:g} "
            f"noise_var={config.noise_variance:g} "
            f"expected={PRESET_EXPECTED_OUTCOME[name].value}"
        )
    return 0


def _timed_run(config: ExperimentConfig, backend: str):
    previous = os.environ.get(_kernels.BACKEND_ENV_VAR)
    os.environ[_kernels.BACKEND_ENV_VAR] = backend
    try:
        start = time.perf_counter()
        trace = run_experiment(config)
        elapsed = time.perf_counter() - start
    finally:
        if previous is None:
            os.environ.pop(_kernels.BACKEND_ENV_VAR, None)
        else:
            os.environ[_kernels.BACKEND_ENV_VAR] = previous
    return trace, elapsed


def _cmd_bench(args: argparse.Namespace) -> int:
    iterations = int(args.iterations)
    config = preset_config(args.preset, iterations=iterations)
    if not _kernels.NUMBA_AVAILABLE:
        print("numba is not installed; benchmarking the python path only")
        trace, elapsed = _timed_run(config, "python")
        print(f"python: {elapsed:8.3f}s   ({iterations / elapsed:,.0f} iter/s)")
        return 0
    # Warm-up compiles the kernel so the timed run measures steady state.
    _timed_run(preset_config(args.preset, iterations=10), "numba")
    jit_trace, jit_time = _timed_run(config, "numba")
    py_trace, py_time = _timed_run(config, "python")
    match = "identical" if jit_trace == py_trace else "DIFFERENT"
    print(f"preset {args.preset}, {iterations} iterations")
    print(f"  numba : {jit_time:8.3f}s   ({iterations / jit_time:,.0f} iter/s)")
    print(f"  python: {py_time:8.3f}s   ({iterations / py_time:,.0f} iter/s)")
    print(f"  speedup: {py_time / jit_time:,.0f}x, traces {match}")
    return 0 if match == "identical" else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="criticlab",
        description="critic-learning divergence laboratory on a three-step benchmark",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one experiment and emit its trace")
    _add_model_flags(run_p, with_run_flags=True)
    run_p.set_defaults(func=_cmd_run)

    stab_p = sub.add_parser("stability", help="analytic stability report")
    _add_model_flags(stab_p, with_run_flags=False)
    stab_p.add_argument("--json", action="store_true", help="machine-readable output")
    stab_p.set_defaults(func=_cmd_stability)

    presets_p = sub.add_parser("presets", help="list named presets")
    presets_p.set_defaults(func=_cmd_presets)

    bench_p = sub.add_parser("bench", help="compare the numba and python backends")
    bench_p.add_argument("--preset", choices=PRESET_NAMES, default="td0-div")
    bench_p.add_argument("--iterations", type=float, default=2e5)
    bench_p.set_defaults(func=_cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command in ("run", "stability"):
            _merge_config_file(args)
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
