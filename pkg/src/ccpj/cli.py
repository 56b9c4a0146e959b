"""Command-line interface.

Subcommands: simulate, sweep, calibrate, optimize, report. All artifacts
(CSV traces, SVG figures, text reports) are deterministic: no
timestamps, fixed formatting, so reruns of a shipped scenario are
byte-identical. Exit codes: 0 ok, 2 configuration, 3 simulation, 4 data.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import calibrate as cal
from .config import (
    MASKS,
    SCHEMA_VERSION,
    EffectiveConfig,
    build_scenario,
    load_config,
    write_config,
)
from .errors import (
    CcpjError,
    ConfigError,
    EmptyDatasetError,
    InfeasibleConfinementError,
    NoConvergenceError,
    NoFeasibleFitError,
    NotUnimodalError,
    SingularSystemError,
    TooFewPointsError,
    UnreachableError,
)
from .gait import Scenario, SimTrace, navigate_confined, run, sweep_period
from .optimize import SearchSpec, max_feasible_current, optimize_period, select_mask
from .plotsvg import line_plot

EXIT_OK, EXIT_CONFIG, EXIT_SIM, EXIT_DATA = 0, 2, 3, 4

SIM_ERRORS = (InfeasibleConfinementError, NotUnimodalError,
              NoConvergenceError, UnreachableError)
DATA_ERRORS = (FileNotFoundError, EmptyDatasetError, TooFewPointsError,
               SingularSystemError, NoFeasibleFitError)


@dataclass
class RunReport:
    """What a command did: digest, headline metrics, artifact paths."""

    name: str
    digest: str
    metrics: dict = field(default_factory=dict)
    artifacts: list = field(default_factory=list)
    error: str | None = None

    def render(self) -> str:
        lines = [f"name = {self.name}", f"digest = {self.digest}",
                 f"status = {'error' if self.error else 'ok'}"]
        if self.error:
            lines.append(f"error = {self.error}")
        for key, val in self.metrics.items():
            if isinstance(val, float):
                val = f"{val:.6g}"
            lines.append(f"{key} = {val}")
        for art in self.artifacts:
            lines.append(f"artifact = {art}")
        return "\n".join(lines) + "\n"


def _single_line(err: BaseException) -> str:
    return " ".join(str(err).split())


def _fail(code: int, err: BaseException) -> int:
    print(f"ccpj: error[{code}]: {type(err).__name__}: {_single_line(err)}",
          file=sys.stderr)
    return code


def _emit(args, text: str):
    if not args.quiet:
        print(text)


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load(args) -> tuple[EffectiveConfig, Scenario]:
    if not args.config:
        raise ConfigError("--config is required for this command")
    cfg = load_config(args.config)
    sc = build_scenario(cfg)
    if getattr(args, "mask", None):
        sc = replace(sc, signal=replace(sc.signal, mask=MASKS[args.mask]))
    return cfg, sc


def _parse_range(spec: str | None, default: str) -> tuple[float, float, float]:
    text = spec if spec else default
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"--range must be a:b:step, got {text!r}")
    try:
        a, b, step = (float(p) for p in parts)
    except ValueError as err:
        raise ConfigError(f"--range must be numeric a:b:step: {err}") from err
    return a, b, step


def _range_values(spec: str | None, default: str) -> list[float]:
    a, b, step = _parse_range(spec, default)
    if step <= 0.0 or b < a:
        raise ConfigError(
            f"empty sweep range {a}:{b}:{step} (need step > 0 and b >= a)")
    values = []
    k = 0
    while a + k * step <= b + step * 1e-9:
        values.append(a + k * step)
        k += 1
    return values


def _run_scenario(scenario: Scenario) -> tuple[SimTrace, object | None]:
    if scenario.terrain.confined:
        return navigate_confined(scenario)
    return run(scenario), None


def _trace_metrics(trace: SimTrace, feas) -> dict:
    metrics = {
        "average_speed_mm_s": trace.average_speed * 1e3,
        "distance_mm": trace.displacement * 1e3,
        "duration_s": trace.duration,
        "peak_height_mm": max(trace.height) * 1e3,
        "feasible": "yes",
    }
    if feas is not None:
        metrics["mask"] = feas.mask_used
        metrics["min_gap_mm"] = feas.min_gap_m * 1e3
        metrics["all_legs_feasible"] = "yes" if feas.all_legs_feasible else "no"
    return metrics


def cmd_simulate(args) -> int:
    cfg, sc = _load(args)
    out = _outdir(args)
    try:
        trace, feas = _run_scenario(sc)
    except InfeasibleConfinementError as err:
        report = RunReport(name=cfg.name, digest=cfg.digest,
                           metrics={"feasible": "no"},
                           error=f"{type(err).__name__}: {_single_line(err)}")
        (out / f"{cfg.name}_report.txt").write_text(report.render())
        raise
    csv_name = f"{cfg.name}_trace.csv"
    (out / csv_name).write_text(trace.to_csv())
    svg_name = f"{cfg.name}_displacement.svg"
    (out / svg_name).write_text(line_plot(
        [("x", list(trace.t), [x * 1e3 for x in trace.x])],
        xlabel="time (s)", ylabel="displacement (mm)",
        title=f"{cfg.name}: displacement vs time"))
    report = RunReport(name=cfg.name, digest=cfg.digest,
                       metrics=_trace_metrics(trace, feas),
                       artifacts=[csv_name, svg_name])
    (out / f"{cfg.name}_report.txt").write_text(report.render())
    _emit(args, report.render().rstrip())
    return EXIT_OK


SWEEPABLE = {
    "period": "period_s",
    "slope": "slope_deg",
    "payload": "payload_g",
    "current": "current_a",
}

SWEEP_DEFAULT_RANGE = {
    "period": "2:10:0.5",
    "slope": "0:15:2.5",
    "payload": "0:5:1",
    "current": "0.3:0.4:0.02",
}


def _sweep_speeds(param: str, values: list[float], sc: Scenario
                  ) -> list[float]:
    if param == "period":
        return [v for _, v in sweep_period(sc, values)]
    speeds = []
    for v in values:
        if param == "slope":
            variant = replace(sc, terrain=replace(sc.terrain,
                                                  slope=math.radians(v)))
        elif param == "payload":
            variant = replace(sc, payload_mass=v * 1e-3)
        else:  # current
            variant = replace(sc, signal=replace(sc.signal, i_high=v))
        speeds.append(run(variant).average_speed)
    return speeds


def cmd_sweep(args) -> int:
    if args.param not in SWEEPABLE:
        raise ConfigError(
            f"--param must be one of {sorted(SWEEPABLE)}, got {args.param!r}")
    cfg, sc = _load(args)
    out = _outdir(args)
    values = _range_values(args.range, SWEEP_DEFAULT_RANGE[args.param])
    speeds = _sweep_speeds(args.param, values, sc)

    col = SWEEPABLE[args.param]
    csv_name = f"{cfg.name}_sweep_{args.param}.csv"
    lines = [f"{col},speed_mm_s"]
    lines += [f"{v:.6g},{s * 1e3:.6f}" for v, s in zip(values, speeds)]
    (out / csv_name).write_text("\n".join(lines) + "\n")

    marker = None
    k_best = max(range(len(values)), key=lambda i: speeds[i])
    if args.param == "period":
        marker = (values[k_best], speeds[k_best] * 1e3,
                  f"max at {values[k_best]:.6g} s")
    svg_name = f"{cfg.name}_sweep_{args.param}.svg"
    (out / svg_name).write_text(line_plot(
        [("speed", values, [s * 1e3 for s in speeds])],
        xlabel=col, ylabel="speed (mm/s)",
        title=f"{cfg.name}: speed vs {args.param}", marker=marker))

    report = RunReport(
        name=cfg.name, digest=cfg.digest,
        metrics={"sweep_param": args.param, "points": len(values),
                 f"best_{col}": values[k_best],
                 "best_speed_mm_s": speeds[k_best] * 1e3},
        artifacts=[csv_name, svg_name])
    (out / f"{cfg.name}_sweep_{args.param}_report.txt").write_text(report.render())
    _emit(args, report.render().rstrip())
    return EXIT_OK


def cmd_calibrate(args) -> int:
    out = _outdir(args)
    result = cal.run_calibration()
    table = result["table"]
    act = result["actuator"]
    slip = result["slip"]

    points = " ".join(f"{c!r}:{k!r}" for c, k in
                      zip(table.currents, table.stiffnesses))
    write_config(out / "calibrated.config", {
        "meta": {"schema_version": str(SCHEMA_VERSION), "name": "calibrated"},
        "stiffness_table": {"points_a_n_m": points},
        "actuator": {
            "tau_heat_s": repr(act.tau_heat),
            "tau_cool_s": repr(act.tau_cool),
            "i_threshold_a": repr(act.i_threshold),
            "a_on": repr(act.a_on),
            "a_sat": repr(act.a_sat),
        },
        "slip": {
            "eta0": repr(slip.eta0),
            "c_slope": repr(slip.c_slope),
            "c_load": repr(slip.c_load),
        },
        "signal": {"period_s": "4.0"},
    })

    summary = "\n".join(r.summary() for r in result["results"])
    (out / "calibration_report.txt").write_text(summary + "\n")
    _emit(args, summary)
    return EXIT_OK


def cmd_optimize(args) -> int:
    if args.param not in ("period", "current", "mask"):
        raise ConfigError(
            f"--param must be period, current, or mask, got {args.param!r}")
    cfg, sc = _load(args)
    out = _outdir(args)
    lines = []
    if args.param == "period":
        lo, hi, tol = _parse_range(args.range, "2:10:0.05")
        spec = SearchSpec(objective="max-speed", variable="period",
                          lo=lo, hi=hi, tolerance=tol)
        t_star, v_star = optimize_period(spec, sc)
        lines.append(f"optimize_period: period_s={t_star:.6g}, "
                     f"speed_mm_s={v_star * 1e3:.6g}")
    elif args.param == "current":
        gap = sc.terrain.min_gap()
        if not math.isfinite(gap):
            raise ConfigError(
                "current optimization needs a ceiling gap in [terrain]")
        if sc.table is None:
            raise ConfigError(
                "current optimization needs a [stiffness_table]")
        res = max_feasible_current(gap, sc.robot, sc.table,
                                   height_map=sc.height_map,
                                   i_threshold=sc.actuator.i_threshold)
        lines.append(res.summary())
    else:
        choice = select_mask(sc)
        lines.append(choice.summary())
    report = RunReport(name=cfg.name, digest=cfg.digest,
                       metrics={"result": "; ".join(lines)})
    (out / f"{cfg.name}_optimize_{args.param}_report.txt").write_text(
        report.render())
    _emit(args, "\n".join(lines))
    return EXIT_OK


def cmd_report(args) -> int:
    """Full artifact bundle for a scenario: run + headline figures."""
    code = cmd_simulate(args)
    if code != EXIT_OK:
        return code
    cfg, sc = _load(args)
    if not sc.terrain.confined:
        sweep_args = argparse.Namespace(**{**vars(args), "param": "period",
                                           "range": args.range or "2:10:0.5"})
        return cmd_sweep(sweep_args)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ccpj",
        description="Simulate, calibrate, and optimize the tripod "
                    "bead-chain crawler.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_config=True):
        if needs_config:
            p.add_argument("--config", help="scenario config file")
            p.add_argument("--mask", choices=sorted(MASKS),
                           help="override the leg mask")
        p.add_argument("--out", default="ccpj_out",
                       help="artifact output directory (default: ccpj_out)")
        p.add_argument("--quiet", action="store_true",
                       help="suppress informational output")

    p = sub.add_parser("simulate", help="run one scenario")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="speed vs one swept parameter")
    common(p)
    p.add_argument("--param", required=True, help="period|slope|payload|current")
    p.add_argument("--range", help="a:b:step sweep range")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("calibrate",
                       help="fit model constants from the dataset directory "
                            "(CCPJ_DATA_DIR overrides the shipped data)")
    common(p, needs_config=False)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("optimize", help="search periods, currents, or masks")
    common(p)
    p.add_argument("--param", required=True, help="period|current|mask")
    p.add_argument("--range", help="lo:hi:tolerance for period search")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("report", help="simulate plus headline figures")
    common(p)
    p.add_argument("--range", help="a:b:step for the period figure")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except SIM_ERRORS as err:
        return _fail(EXIT_SIM, err)
    except DATA_ERRORS as err:
        return _fail(EXIT_DATA, err)
    except CcpjError as err:
        return _fail(EXIT_CONFIG, err)


if __name__ == "__main__":
    sys.exit(main())
