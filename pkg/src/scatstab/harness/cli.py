"""Command-line entry point ``scatstab``.

Exit codes: 0 when every check passes, 1 when a check or the admissibility
condition fails (the failing inequality is printed), 2 for configuration
errors.

Output columns of ``results.csv`` (one row per ladder rung):

``rung``                  ladder index k, amplitude ``s0 * 2**-k``
``tau_sup``               measured ``||tau||_inf``
``jacobian_sup``          measured ``||D tau||_inf``
``input_error``           ``||f - F_tau f||_2``
``feature_error``         ``|||Phi(F_tau f) - Phi(f)|||`` (empty without a network)
``bound``                 theoretical bound at this rung, when one applies
``alpha_input``           fitted exponent of the input curve
``alpha_feature``         fitted exponent of the feature curve
``log_constant_feature``  fitted log-constant of the feature curve
``residual_feature``      RMS log residual of the feature fit
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from ..network import AdmissibilityError, check_admissibility, extract_features, format_path
from ..signals import l2_norm, load_signal, read_pgm, save_signal
from .config import ConfigError, load_config
from .experiments import (
    ExperimentResult,
    build_sequence,
    default_config,
    run_experiment,
)
from .report import RESULT_COLUMNS, loglog_svg, write_rows

__all__ = ["main", "run", "write_result"]


def write_result(result: ExperimentResult, out_dir) -> None:
    """``results.csv``, ``plot.svg`` and one CSV per auxiliary table."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_rows(out / "results.csv", RESULT_COLUMNS, result.rows())
    for name, (columns, rows) in sorted(result.tables.items()):
        write_rows(out / f"{name}.csv", columns, rows)

    taus = [r.tau_sup for r in result.rungs]
    series = {"input error": (taus, [r.input_error for r in result.rungs])}
    if all(r.feature_error is not None for r in result.rungs):
        series["feature error"] = (taus, [r.feature_error for r in result.rungs])
    fit = result.feature_fit or result.input_fit
    fit_line = (fit.alpha, fit.log_constant, f"fit alpha = {fit.alpha:.4f}") if fit else None
    (out / "plot.svg").write_text(loglog_svg(series, fit_line, title=f"{result.name} experiment"))


def _report(result: ExperimentResult) -> int:
    for check in result.checks:
        print(check.line())
    print(f"{result.name}: {'PASS' if result.passed else 'FAIL'}")
    return 0 if result.passed else 1


def _guarded(action) -> int:
    try:
        return action()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except AdmissibilityError as exc:
        print(f"admissibility violated: {exc}", file=sys.stderr)
        return 1


def _configure(args, default_name=None):
    cfg = load_config(args.config) if getattr(args, "config", None) else default_config(default_name)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    return cfg


def run(config_path, out_dir, seed: int | None = None, grid_refine: int = 0) -> int:
    """Run the experiment named in the config, write outputs, return the exit code."""
    def action():
        cfg = load_config(config_path)
        if seed is not None:
            cfg = cfg.with_seed(seed)
        result = run_experiment(cfg, grid_refine)
        write_result(result, out_dir)
        return _report(result)
    return _guarded(action)


def _cmd_run(args) -> int:
    if not args.config:
        print("config error: run needs --config", file=sys.stderr)
        return 2
    return run(args.config, args.out, args.seed, args.grid_refine)


def _cmd_named(name):
    def command(args) -> int:
        def action():
            cfg = _configure(args, name)
            if cfg.experiment != name:
                cfg = replace(cfg, experiment=name)
            result = run_experiment(cfg, args.grid_refine)
            write_result(result, args.out)
            return _report(result)
        return _guarded(action)
    return command


def _load_input(path):
    path = Path(path)
    try:
        return read_pgm(path) if path.suffix.lower() == ".pgm" else load_signal(path)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read input signal: {exc}") from None


def _cmd_extract(args) -> int:
    def action():
        cfg = _configure(args, "stability")
        f = _load_input(args.input)
        seq = build_sequence(cfg.network, f.grid, cfg.seed)
        check_admissibility(seq)
        features = extract_features(seq, f, n_jobs=cfg.n_jobs)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        rows = []
        for n, q, g in features.items():
            rows.append({"layer": n, "path": format_path(q), "l2_norm": l2_norm(g)})
            if args.blobs:
                name = "feature_" + (format_path(q).replace("/", "_"))
                save_signal(g, out / f"{name}.scs")
        write_rows(out / "features.csv", ("layer", "path", "l2_norm"), rows)
        print(f"{len(rows)} features, energy {features.energy():.17g}")
        return 0
    return _guarded(action)


def _cmd_bessel(args) -> int:
    def action():
        cfg = _configure(args, "stability")
        grid = cfg.grid.build(args.grid_refine)
        seq = build_sequence(cfg.network, grid, cfg.seed)
        rows, ok = [], True
        for n, module in enumerate(seq.active):
            budget = module.budget
            passed = budget <= 1.0 + 1e-12
            ok &= passed
            rows.append({"layer": n, "atoms": len(module.bank), "scale": module.bank.scale,
                         "lipschitz": module.nonlinearity.lipschitz, "budget": budget})
            status = "PASS" if passed else "FAIL"
            print(f"[{status}] layer {n}: B * max(1, L^2) = {budget:.17g} <= 1")
        if args.out:
            Path(args.out).mkdir(parents=True, exist_ok=True)
            write_rows(Path(args.out) / "bessel.csv",
                       ("layer", "atoms", "scale", "lipschitz", "budget"), rows)
        return 0 if ok else 1
    return _guarded(action)


def _cmd_deform(args) -> int:
    def action():
        cfg = _configure(args, "deformation")
        result = run_experiment(replace(cfg, experiment="deformation"), args.grid_refine)
        write_result(result, args.out)
        return _report(result)
    return _guarded(action)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scatstab", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_required=True):
        p.add_argument("--config", help="TOML experiment config")
        p.add_argument("--out", required=out_required, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--grid-refine", type=int, default=0,
                       help="halve the grid spacing this many times")

    p = sub.add_parser("run", help="run the experiment named in --config")
    common(p)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("extract", help="write per-path feature norms of one signal")
    common(p)
    p.add_argument("--input", required=True, help="signal file (.scs or .pgm)")
    p.add_argument("--blobs", action="store_true", help="also write each feature as .scs")
    p.set_defaults(func=_cmd_extract)

    p = sub.add_parser("bessel", help="print per-layer Bessel budgets")
    common(p, out_required=False)
    p.set_defaults(func=_cmd_bessel)

    p = sub.add_parser("deform", help="input deformation error curve only")
    common(p)
    p.set_defaults(func=_cmd_deform)

    for name in ("sharpness", "smooth", "bandlimited"):
        p = sub.add_parser(name, help=f"{name} experiment (built-in config unless --config)")
        common(p)
        p.set_defaults(func=_cmd_named(name))
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
