#!/usr/bin/env python3
"""
Command-line experiment drivers for the filtered Hermite spectral solver
Runs the advection, forced-advection and Landau damping experiments, eigenvalue
reports and the dispersion solver, writing CSV/JSON results for external plotting
"""
import argparse
import csv
import json
import logging
import math
import os
import sys
from datetime import datetime, timezone
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field, ValidationError

from . import __version__
from .analysis import (
    eigen_report_filtered,
    electric_energy,
    exact_electric_energy,
    fit_decay_rate,
    nonconstant_mode_energy,
    recurrence_metric,
    sweep_dispersion,
)
from .config import (
    DEFAULT_PERIOD,
    FilterSpec,
    HermiteParams,
    SimConfig,
    configure_logging,
    load_settings,
)
from .dynamics import TimeSeries, initial_state, propagate_modes_exact, run_simulation
from .errors import (
    ConvergenceError,
    FilterError,
    InsufficientPeaksError,
    NumericalError,
)

logger = logging.getLogger("hermite_spectral.cli")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2

FILTER_CHOICES = {
    "none": "none",
    "hou-li": "exponential",
    "threshold": "houli-threshold",
    "cutoff": "cutoff",
    "timestep": "timestep-scaled",
}

# Defaults per experiment: model, epsilon, t_end, m_c
EXPERIMENTS = {
    "advection": ("advection", 0.01, 100.0, 1),
    "forced": ("forced", 0.9, 80.0, 3),
    "landau": ("vlasov-poisson", 0.001, 60.0, 3),
}

# Models each experiment command may run, including from --config
COMMAND_MODELS = {
    "advection": ("advection",),
    "forced": ("forced",),
    "landau": ("vlasov-poisson", "linearized-landau"),
}


class UsageError(Exception):
    pass


class RunManifest(BaseModel):
    """Config echo, timing, version, output files and summary numbers of one run."""

    config: Dict[str, Any]
    started: str
    finished: str
    software_version: str = __version__
    outputs: Dict[str, str] = Field(default_factory=dict)
    summary: Dict[str, Any] = Field(default_factory=dict)


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _fmt(value: float) -> str:
    return f"{value:.17g}"


def _add_discretization_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--M", type=int, default=None, help="Hermite moment order")
    parser.add_argument("--k", type=float, default=None, help="base wavenumber (k = 2*pi/D)")
    parser.add_argument("--period", type=float, default=None, help="spatial period D")
    parser.add_argument("--cfl-c", type=float, default=0.5, help="dt = cfl_c / sqrt(M)")
    parser.add_argument("--filter", choices=sorted(FILTER_CHOICES), default="hou-li")
    parser.add_argument("--no-filter", action="store_true", help="alias for --filter none")
    parser.add_argument("--alpha", type=float, default=36.0, help="filter strength")
    parser.add_argument("--p", type=float, default=36.0, help="filter exponent")
    parser.add_argument("--threshold", type=float, default=2.0 / 3.0)
    parser.add_argument("--dt-ref", type=float, default=None, help="reference step (timestep filter)")
    parser.add_argument("--protected", type=int, default=0, help="indices i <= M0 left unfiltered")
    parser.add_argument("--out", default=None, help="output directory")


def _add_run_flags(parser: argparse.ArgumentParser) -> None:
    _add_discretization_flags(parser)
    parser.add_argument("--epsilon", type=float, default=None)
    parser.add_argument("--mc", type=int, default=None, help="Fourier cutoff m_c")
    parser.add_argument("--t-end", type=float, default=None)
    parser.add_argument("--tF", type=float, action="append", default=None, help="fit horizon (repeatable)")
    parser.add_argument("--t-min", type=float, default=30.0, help="rebound window start")
    parser.add_argument("--sample-every", type=int, default=1)
    parser.add_argument("--checkpoint-every", type=int, default=None)
    parser.add_argument("--filter-mode", choices=["discrete", "continuous"], default="discrete")
    parser.add_argument("--abscissa", action="store_true", help="report spectral abscissa of the m=1 operator")
    parser.add_argument("--config", default=None, help="JSON config or run summary to re-run")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hermite-spectral", description="Filtered Fourier-Hermite spectral experiments")
    parser.add_argument("--log-level", default=None)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    for name, help_text in (
        ("advection", "pure advection: recurrence and its suppression"),
        ("forced", "advection under a decaying oscillating force"),
        ("landau", "linear Landau damping in the Vlasov-Poisson system"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        _add_run_flags(cmd)
        if name == "landau":
            cmd.add_argument("--model", choices=COMMAND_MODELS["landau"], default="vlasov-poisson")

    eigen = sub.add_parser("eigen", help="eigenvalues of the filtered mode operators")
    _add_discretization_flags(eigen)
    eigen.add_argument("--m", type=int, default=1, help="Fourier mode")
    eigen.add_argument("--with-g", action="store_true", help="include the Poisson coupling G")
    eigen.add_argument("--dt", type=float, default=None, help="time step defining H")

    disp = sub.add_parser("dispersion", help="Landau dispersion relation roots")
    disp.add_argument("--k", type=float, default=0.5)
    disp.add_argument("--sweep", default=None, help="k grid as start:stop:step")
    disp.add_argument("--out", default=None, help="output directory")
    return parser


def _params_from_args(args, default_M: int = 30) -> HermiteParams:
    M = args.M if args.M is not None else default_M
    if args.k is not None and args.period is not None:
        params = HermiteParams(M=M, k=args.k, D=args.period)
    elif args.k is not None:
        params = HermiteParams.from_wavenumber(M, args.k)
    else:
        params = HermiteParams.from_period(M, args.period or DEFAULT_PERIOD)
    return params


def _filter_from_args(args) -> FilterSpec:
    name = "none" if args.no_filter else args.filter
    return FilterSpec(
        variant=FILTER_CHOICES[name],
        alpha=args.alpha,
        p=args.p,
        threshold=args.threshold,
        dt_ref=args.dt_ref,
        protected=args.protected,
    )


def _load_config_file(path: str) -> Dict[str, Any]:
    with open(path) as fh:
        return json.load(fh)


def config_from_args(args) -> SimConfig:
    """SimConfig from flags, or from a --config file (plain config or run summary)."""
    if args.config:
        payload = _load_config_file(args.config)
        config = SimConfig.model_validate(payload.get("config", payload))
        if config.model not in COMMAND_MODELS[args.command]:
            raise UsageError(f"{args.config} holds a {config.model!r} run, not a {args.command} run")
        return config

    model, epsilon, t_end, m_c = EXPERIMENTS[args.command]
    if args.command == "landau":
        model = args.model
    t_end = args.t_end if args.t_end is not None else t_end
    if args.tF and max(args.tF) > t_end:
        logger.warning("⚠️ t_end extended from %g to %g to cover t_F", t_end, max(args.tF))
        t_end = max(args.tF)
    return SimConfig(
        model=model,
        params=_params_from_args(args),
        filter=_filter_from_args(args),
        epsilon=args.epsilon if args.epsilon is not None else epsilon,
        m_c=args.mc if args.mc is not None else m_c,
        cfl_c=args.cfl_c,
        t_end=t_end,
        sample_every=args.sample_every,
        filter_mode=args.filter_mode,
        checkpoint_every=args.checkpoint_every,
    )


def _fit_horizons(args) -> List[float]:
    if args.tF:
        return list(args.tF)
    if args.config:
        payload = _load_config_file(args.config)
        return list(payload.get("summary", {}).get("t_F", []))
    return []


def write_energy_csv(path: str, series: TimeSeries, m_c: int) -> None:
    """Columns t, E, logE, mass, mode_norm_0..mode_norm_{m_c}."""
    header = ["t", "E", "logE", "mass"] + [f"mode_norm_{m}" for m in range(m_c + 1)]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for s in series.samples:
            log_e = math.log(s.E) if s.E > 0 else float("-inf")
            writer.writerow([_fmt(s.t), _fmt(s.E), _fmt(log_e), _fmt(s.mass)] + [_fmt(x) for x in s.mode_norms])


def write_exact_csv(path: str, series: TimeSeries, config: SimConfig) -> None:
    exact = exact_electric_energy(series.times, config.epsilon, config.params)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "E_exact"])
        for t, e in zip(series.times, np.atleast_1d(exact)):
            writer.writerow([_fmt(t), _fmt(e)])


def _output_dir(args, settings_dir: str) -> str:
    path = args.out or os.path.join(settings_dir, args.command)
    os.makedirs(path, exist_ok=True)
    return path


def _write_manifest(path: str, manifest: RunManifest) -> None:
    with open(path, "w") as fh:
        json.dump(manifest.model_dump(mode="json"), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _run_experiment(args, settings_dir: str) -> int:
    config = config_from_args(args)
    horizons = _fit_horizons(args)
    out_dir = _output_dir(args, settings_dir)
    started = _now()
    logger.info("🚀 Running %s experiment (M=%d, filter=%s)", args.command, config.params.M, config.filter.variant)

    series = run_simulation(config)
    outputs = {"energy_csv": os.path.join(out_dir, "energy.csv")}
    write_energy_csv(outputs["energy_csv"], series, config.m_c)

    first, last = series.samples[0], series.samples[-1]
    summary: Dict[str, Any] = {
        "t_F": horizons,
        "E_initial": first.E,
        "E_final": last.E,
        "mass_drift": abs(last.mass - first.mass),
        "fits": {},
    }
    for t_f in horizons:
        fit = fit_decay_rate(series, t_f)
        summary["fits"][_fmt(t_f)] = {"rate": fit.rate, "n_peaks": fit.n_peaks}
        logger.info("📈 t_F=%g: decay rate %.6f over %d peaks", t_f, fit.rate, fit.n_peaks)

    if series.times[-1] >= args.t_min:
        summary["recurrence_metric"] = recurrence_metric(series, args.t_min)

    if config.model == "advection":
        outputs["exact_csv"] = os.path.join(out_dir, "exact.csv")
        write_exact_csv(outputs["exact_csv"], series, config)
        exact_state = propagate_modes_exact(config, last.t)
        summary["expm_energy_at_t_end"] = electric_energy(exact_state, config.params)

    if config.model == "forced":
        start = initial_state(config)
        summary["nonconstant_energy_ratio"] = nonconstant_mode_energy(series.final_state) / nonconstant_mode_energy(start)

    if args.abscissa:
        report = eigen_report_filtered(
            config.params, config.filter, config.dt, 1, with_g=config.model in ("vlasov-poisson", "linearized-landau")
        )
        summary["spectral_abscissa"] = report.spectral_abscissa

    outputs["summary_json"] = os.path.join(out_dir, "summary.json")
    manifest = RunManifest(
        config=config.model_dump(mode="json"),
        started=started,
        finished=_now(),
        outputs=outputs,
        summary=summary,
    )
    _write_manifest(outputs["summary_json"], manifest)
    logger.info("✅ Wrote %s", ", ".join(outputs.values()))
    return EXIT_OK


def cmd_advection(args, settings_dir: str = "runs") -> int:
    return _run_experiment(args, settings_dir)


def cmd_forced(args, settings_dir: str = "runs") -> int:
    return _run_experiment(args, settings_dir)


def cmd_landau(args, settings_dir: str = "runs") -> int:
    return _run_experiment(args, settings_dir)


def cmd_eigen(args, settings_dir: str = "runs") -> int:
    params = _params_from_args(args)
    filter = _filter_from_args(args)
    dt = args.dt if args.dt is not None else args.cfl_c / math.sqrt(params.M)
    report = eigen_report_filtered(params, filter, dt, args.m, with_g=args.with_g)

    out_dir = _output_dir(args, settings_dir)
    path = os.path.join(out_dir, "eigenvalues.txt")
    with open(path, "w") as fh:
        for value in report.eigenvalues:
            fh.write(f"{_fmt(value.real)} {_fmt(value.imag)}\n")
    manifest = RunManifest(
        config={"params": params.model_dump(), "filter": filter.model_dump(), "dt": dt, "m": args.m, "with_g": args.with_g},
        started=_now(),
        finished=_now(),
        outputs={"eigenvalues": path},
        summary={"spectral_abscissa": report.spectral_abscissa, "iterations": report.iterations},
    )
    _write_manifest(os.path.join(out_dir, "summary.json"), manifest)
    print(f"spectral_abscissa {_fmt(report.spectral_abscissa)}")
    logger.info("✅ %d eigenvalues written to %s", len(report.eigenvalues), path)
    return EXIT_OK


def _parse_sweep(text: str) -> np.ndarray:
    try:
        start, stop, step = (float(x) for x in text.split(":"))
    except ValueError as exc:
        raise UsageError(f"--sweep expects start:stop:step, got {text!r}") from exc
    if step <= 0 or stop < start:
        raise UsageError(f"invalid sweep {text!r}")
    count = int(round((stop - start) / step)) + 1
    return start + step * np.arange(count)


def cmd_dispersion(args, settings_dir: str = "runs") -> int:
    ks = _parse_sweep(args.sweep) if args.sweep else np.array([args.k])
    roots = sweep_dispersion(ks)
    rows = [[r.k, r.omega_p, r.gamma, r.residual] for r in roots]
    print("k omega_p gamma residual")
    for row in rows:
        print(" ".join(_fmt(x) for x in row))
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, "dispersion.csv")
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["k", "omega_p", "gamma", "residual"])
            writer.writerows([[_fmt(x) for x in row] for row in rows])
        logger.info("✅ Dispersion table written to %s", path)
    return EXIT_OK


COMMANDS = {
    "advection": cmd_advection,
    "forced": cmd_forced,
    "landau": cmd_landau,
    "eigen": cmd_eigen,
    "dispersion": cmd_dispersion,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    settings = load_settings()
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level or settings.log_level)

    try:
        return COMMANDS[args.command](args, settings.output_dir)
    except (UsageError, ValidationError, FilterError, ValueError, OSError) as exc:
        logger.error("❌ Invalid configuration: %s", exc)
        return EXIT_USAGE
    except (ConvergenceError, NumericalError, InsufficientPeaksError) as exc:
        logger.error("❌ Numerical failure: %s", exc)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
