"""Command-line entry point.

Subcommands: simulate, ustat, limit, converge, check-gaussian,
identity-check.  Exit codes: 0 success, 2 config/validation error,
3 infeasible exact computation.  All randomness flows from the config's
seeds; UST_THREADS caps the worker count (0 = auto) and never changes
results.
"""

from __future__ import annotations

import argparse
import math
import sys

from . import csvio
from .config import ParsedConfig, load_config, parse_experiment, parse_kernel_spec, parse_process
from .core import ConfigurationError, InfeasibilityError
from .diagnostics import convergence_experiment, reconstruction_identity_check
from .engine import incomplete_u_statistic, u_statistic
from .kernels import build_kernel
from .limits import component_law_for_path, estimate_limit, mixture_component_models
from .processes import GaussianAR1, GaussianLinear, IID, Mixture, Normal, simulate
from .processes import cesaro_absolute_autocovariance, min_covariance_determinant
from . import rng as _rng

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3

_CESARO_POINTS = (10, 100, 1000)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ustatlab",
        description="U-statistics over stationary sequences: simulation, estimation, convergence reports.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("-c", "--config", required=True, help="INI config file")
        p.add_argument(
            "--set",
            dest="overrides",
            action="append",
            default=[],
            metavar="SECTION.KEY=VALUE",
            help="override a config value (beats the file; repeatable)",
        )

    p = sub.add_parser("simulate", help="simulate a path and write it as CSV")
    common(p)
    p.add_argument("-o", "--output", required=True, help="output path CSV")

    p = sub.add_parser("ustat", help="compute one U-statistic (exact or incomplete)")
    common(p)
    p.add_argument("--input", help="ingest a path CSV instead of simulating")
    p.add_argument("-o", "--output", help="also write the value as a one-row report CSV")

    p = sub.add_parser("limit", help="estimate the limit value(s) for a process/kernel pair")
    common(p)
    p.add_argument("-o", "--output", help="write component rows as CSV")

    p = sub.add_parser("converge", help="run a replicated convergence experiment")
    common(p)
    p.add_argument("-o", "--output", required=True, help="output report CSV")
    p.add_argument("--no-plot", action="store_true", help="skip the PNG figure next to the CSV")

    p = sub.add_parser("check-gaussian", help="determinant and Cesaro ergodicity checks")
    common(p)
    p.add_argument("--order", type=int, default=2, help="tuple order m for the determinant scan")
    p.add_argument("--max-lag", type=int, default=64, help="span window for the determinant scan")

    p = sub.add_parser("identity-check", help="verify the weighted reconstruction of an order-2 U-statistic")
    common(p)
    p.add_argument("--level", type=float, default=None, help="truncation level (default: experiment.truncation or 10)")

    return parser


def _experiment_field(cfg: ParsedConfig, getter, key, default=None):
    return getter("experiment", key, default)


def _required_n(cfg: ParsedConfig) -> int:
    n = cfg.get_int("experiment", "n", None)
    if n is None:
        raise ConfigurationError("missing required config field experiment.n")
    return n


def _master_seed(cfg: ParsedConfig) -> int:
    return cfg.get_int("experiment", "master_seed", 0)


def cmd_simulate(args) -> int:
    cfg = load_config(args.config, args.overrides)
    spec = parse_process(cfg)
    path = simulate(spec, _required_n(cfg), _master_seed(cfg))
    csvio.write_path_csv(path, args.output)
    print(f"wrote {args.output}: n={len(path)} d={path.dim} seed={path.seed}")
    print(f"latent_component={path.latent_component if path.latent_component is not None else 'none'}")
    return EXIT_OK


def cmd_ustat(args) -> int:
    cfg = load_config(args.config, args.overrides)
    kernel = build_kernel(parse_kernel_spec(cfg))
    if args.input:
        path = csvio.read_path_csv(args.input)
    else:
        path = simulate(parse_process(cfg), _required_n(cfg), _master_seed(cfg))
    if len(path) < kernel.order:
        raise ConfigurationError(
            f"kernel order {kernel.order} exceeds the path length {len(path)}"
        )
    mode = (cfg.get("experiment", "mode", "exact") or "exact").strip().lower()
    if mode == "incomplete":
        samples = cfg.get_int("experiment", "samples", None)
        if samples is None or samples < 1:
            raise ConfigurationError("experiment.samples must be >= 1 in incomplete mode")
        value = incomplete_u_statistic(
            path, kernel, samples, _rng.derive_seed(_master_seed(cfg), _rng.TUPLES, 0, 0)
        )
        label = f"incomplete({samples})"
    elif mode == "exact":
        value = u_statistic(path, kernel)
        label = "exact"
    else:
        raise ConfigurationError(f"experiment.mode must be 'exact' or 'incomplete', got {mode!r}")
    print(f"U[m={kernel.order},n={len(path)},{label}] = {value:.12g}")
    if args.output:
        csvio.write_ustat_csv(args.output, len(path), value)
        print(f"wrote {args.output}")
    return EXIT_OK


def cmd_limit(args) -> int:
    cfg = load_config(args.config, args.overrides)
    spec = parse_process(cfg)
    kernel = build_kernel(parse_kernel_spec(cfg))
    mc_samples = cfg.get_int("experiment", "limit_samples", 100_000)
    seed = _master_seed(cfg)
    if isinstance(spec, Mixture):
        models = mixture_component_models(spec)
    else:
        path = simulate(spec, 1, seed)
        models = [component_law_for_path(spec, path)]
    rows = []
    for model in models:
        est = estimate_limit(model, kernel, mc_samples, _rng.derive_seed(seed, _rng.MC, model.component_index))
        rows.append((model.component_index, est))
        print(
            f"component={model.component_index} value={est.value:.12g} "
            f"std_error={est.std_error:.6g} method={est.method} ({model.description})"
        )
    if args.output:
        lines = ["component,value,std_error,method"]
        for idx, est in rows:
            lines.append(f"{idx},{csvio.fmt_float(est.value)},{csvio.fmt_float(est.std_error)},{est.method}")
        csvio.atomic_write_text(args.output, "\n".join(lines) + "\n")
        print(f"wrote {args.output}")
    return EXIT_OK


def cmd_converge(args) -> int:
    cfg = load_config(args.config, args.overrides)
    experiment = parse_experiment(cfg)
    report = convergence_experiment(experiment)
    csvio.write_report_csv(report, args.output)
    print(f"wrote {args.output}: {report.replicates} replicates x {len(report.checkpoints)} checkpoints")
    for k, checkpoint in enumerate(report.checkpoints):
        print(
            f"n={checkpoint}: L^{report.p:g} error={report.lp_errors[k]:.6g} "
            f"max|U-limit|={report.max_abs_errors[k]:.6g}"
        )
    if report.clusters is not None:
        for c in report.clusters:
            print(
                f"component {c.component}: weight={c.weight:g} limit={c.limit_value:.6g} "
                f"count={c.count} mean_terminal_u={c.mean_terminal_u:.6g}"
            )
        print(f"cluster agreement (nearest limit vs latent): {report.cluster_agreement:.4f}")
    for note in report.notes:
        print(f"note: {note}")
    plot = cfg.get_bool("experiment", "plot", True) and not args.no_plot
    if plot:
        from .plots import render_report_figure

        figure_path = args.output.rsplit(".", 1)[0] + ".png"
        render_report_figure(report, figure_path)
        print(f"wrote {figure_path}")
    return EXIT_OK


def _is_gaussian_family(spec) -> bool:
    if isinstance(spec, (GaussianAR1, GaussianLinear)):
        return True
    return isinstance(spec, IID) and isinstance(spec.marginal, Normal)


def cmd_check_gaussian(args) -> int:
    cfg = load_config(args.config, args.overrides)
    spec = parse_process(cfg)
    if not _is_gaussian_family(spec):
        raise ConfigurationError(
            "check-gaussian requires a Gaussian-family process (ar1, gaussian-linear, or iid normal)"
        )
    m = args.order
    if m < 1:
        raise ConfigurationError(f"--order must be >= 1, got {m}")
    if args.max_lag < max(m - 1, 1):
        raise ConfigurationError(f"--max-lag must be >= {max(m - 1, 1)}, got {args.max_lag}")
    min_det = min_covariance_determinant(spec, m, args.max_lag)
    certified = not isinstance(spec, GaussianLinear)
    det_verdict = ("PASS" if min_det > 0 else "FAIL") if certified else "WINDOW-LIMITED"
    print(f"min det Sigma(i_1..i_{m}) over span <= {args.max_lag}: {min_det:.12g} [{det_verdict}]")
    if not certified:
        print("  (general linear coefficients: scanned window only, no finite certificate)")
    values = [cesaro_absolute_autocovariance(spec, n) for n in _CESARO_POINTS]
    for n, v in zip(_CESARO_POINTS, values):
        print(f"cesaro |autocovariance| mean, N={n}: {v:.12g}")
    decreasing = all(b <= a for a, b in zip(values, values[1:]))
    print(f"cesaro trend: {'decreasing (consistent with ergodicity)' if decreasing else 'NOT decreasing'}")
    return EXIT_OK


def cmd_identity_check(args) -> int:
    cfg = load_config(args.config, args.overrides)
    spec = parse_process(cfg)
    kernel = build_kernel(parse_kernel_spec(cfg))
    if kernel.order != 2:
        raise ConfigurationError(f"identity-check requires an order-2 kernel, got order {kernel.order}")
    level = args.level
    if level is None:
        level = cfg.get_float("experiment", "truncation", 10.0)
    if not (math.isfinite(level) and level > 0):
        raise ConfigurationError(f"truncation level must be positive and finite, got {level}")
    path = simulate(spec, _required_n(cfg), _master_seed(cfg))
    ok = reconstruction_identity_check(path, kernel, level)
    print(f"weighted reconstruction identity at n={len(path)}, level={level:g}: {'PASS' if ok else 'FAIL'}")
    return EXIT_OK


_HANDLERS = {
    "simulate": cmd_simulate,
    "ustat": cmd_ustat,
    "limit": cmd_limit,
    "converge": cmd_converge,
    "check-gaussian": cmd_check_gaussian,
    "identity-check": cmd_identity_check,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except InfeasibilityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ConfigurationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
