"""Fitting model constants to the shipped measurement datasets.

Three fits, in dependency order: the stiffness table (isotonic regression
on the digitized stiffness curve), the actuator lag constants (grid search
plus refinement against the speed-vs-period curve, with the overall slip
scale profiled out), and the slip coefficients (exact three-point solve
through the flat / slope / payload operating points).

Datasets are small CSV files with `# key: value` provenance headers. Every
file states where its numbers came from and a digitization uncertainty;
fits must not pretend to more accuracy than those headers admit.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import (
    EmptyDatasetError,
    NoFeasibleFitError,
    SingularSystemError,
    TooFewPointsError,
    ValidationError,
)
from .gait import FRONT, REAR, ActuatorModel, Scenario, SlipModel, steady_cycle_displacement, sweep_period
from .params import CalibrationTable


def data_dir() -> Path:
    """Directory holding datasets, scenario files, and the default config.

    CCPJ_DATA_DIR overrides the packaged data directory wholesale.
    """
    env = os.environ.get("CCPJ_DATA_DIR")
    if env:
        return Path(env)
    return Path(str(resources.files("ccpj").joinpath("data")))


@dataclass(frozen=True)
class Dataset:
    """A measurement series with provenance.

    source must start with "digitized" or "synthetic" so nobody mistakes a
    model-generated curve for a measurement. uncertainty is the relative
    digitization error the numbers are good to.
    """

    name: str
    columns: tuple[str, ...]
    rows: np.ndarray  # shape (n, len(columns))
    source: str
    uncertainty: float

    def __post_init__(self):
        if self.rows.size == 0:
            raise EmptyDatasetError(f"dataset {self.name!r} has no rows")
        if self.rows.ndim != 2 or self.rows.shape[1] != len(self.columns):
            raise ValidationError(
                f"dataset {self.name!r}: rows shape {self.rows.shape} does not "
                f"match {len(self.columns)} columns")
        if not np.all(np.isfinite(self.rows)):
            raise ValidationError(f"dataset {self.name!r} has non-finite values")
        head = self.source.split(":", 1)[0].split(" ", 1)[0].lower()
        if head not in ("digitized", "synthetic"):
            raise ValidationError(
                f"dataset {self.name!r}: source must start with 'digitized' "
                f"or 'synthetic', got {self.source!r}")
        if not (0.0 < self.uncertainty < 1.0):
            raise ValidationError(
                f"dataset {self.name!r}: uncertainty {self.uncertainty!r} "
                f"must be a fraction in (0, 1)")

    def column(self, name: str) -> np.ndarray:
        try:
            idx = self.columns.index(name)
        except ValueError:
            raise ValidationError(
                f"dataset {self.name!r} has no column {name!r} "
                f"(has {', '.join(self.columns)})") from None
        return self.rows[:, idx].copy()

    def to_csv(self) -> str:
        lines = [
            f"# name: {self.name}",
            f"# source: {self.source}",
            f"# uncertainty: {self.uncertainty:g}",
            ",".join(self.columns),
        ]
        for row in self.rows:
            lines.append(",".join(f"{v:g}" for v in row))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str, fallback_name: str = "dataset") -> "Dataset":
        meta = {"name": fallback_name, "source": "", "uncertainty": None}
        columns: tuple[str, ...] | None = None
        rows: list[list[float]] = []
        for raw in text.splitlines():
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line.lstrip("#").strip()
                if ":" in body:
                    key, _, value = body.partition(":")
                    meta[key.strip().lower()] = value.strip()
                continue
            if columns is None:
                columns = tuple(c.strip() for c in line.split(","))
                continue
            try:
                rows.append([float(v) for v in line.split(",")])
            except ValueError as err:
                raise ValidationError(f"bad dataset row {line!r}: {err}") from None
        if columns is None or not rows:
            raise EmptyDatasetError(f"dataset {meta['name']!r} has no rows")
        try:
            unc = float(meta["uncertainty"])
        except (TypeError, ValueError):
            raise ValidationError(
                f"dataset {meta['name']!r}: missing or bad '# uncertainty:' header"
            ) from None
        return cls(name=str(meta["name"]), columns=columns,
                   rows=np.array(rows, dtype=float),
                   source=str(meta["source"]), uncertainty=unc)


def load_dataset(name: str, directory: Path | None = None) -> Dataset:
    path = (directory or data_dir()) / f"{name}.csv"
    if not path.exists():
        raise FileNotFoundError(f"dataset file not found: {path}")
    return Dataset.from_csv(path.read_text(), fallback_name=name)


@dataclass(frozen=True)
class CalibrationResult:
    """One fit's outcome: what was fitted, to what, how well."""

    name: str
    method: str
    dataset: str
    parameters: dict
    residual: float
    bounds: dict = field(default_factory=dict)
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        if self.residual < 0.0 or not math.isfinite(self.residual):
            raise ValidationError(f"residual {self.residual!r} must be finite, >= 0")
        for key, (lo, hi) in self.bounds.items():
            v = self.parameters[key]
            if not (lo - 1e-12 <= v <= hi + 1e-12):
                raise ValidationError(
                    f"fitted {key}={v!r} outside declared bounds [{lo}, {hi}]")

    def summary(self) -> str:
        pairs = ", ".join(f"{k}={v:.6g}" for k, v in self.parameters.items())
        line = f"{self.name}: {pairs}; rmse={self.residual:.6g} ({self.method})"
        for w in self.warnings:
            line += f"\n  warning: {w}"
        return line


def isotonic_nondecreasing(y, weights=None) -> np.ndarray:
    """Pool-adjacent-violators: least-squares non-decreasing fit to y."""
    y = np.asarray(y, dtype=float)
    w = np.ones_like(y) if weights is None else np.asarray(weights, dtype=float)
    # blocks of (value, weight, count), merged while out of order
    vals: list[float] = []
    wts: list[float] = []
    cnt: list[int] = []
    for yi, wi in zip(y, w):
        vals.append(float(yi))
        wts.append(float(wi))
        cnt.append(1)
        while len(vals) > 1 and vals[-2] > vals[-1]:
            v = (vals[-2] * wts[-2] + vals[-1] * wts[-1]) / (wts[-2] + wts[-1])
            wts[-2] += wts[-1]
            cnt[-2] += cnt[-1]
            vals[-2] = v
            vals.pop()
            wts.pop()
            cnt.pop()
    out = np.empty_like(y)
    pos = 0
    for v, c in zip(vals, cnt):
        out[pos:pos + c] = v
        pos += c
    return out


def fit_stiffness_table(dataset: Dataset) -> CalibrationTable:
    """Monotone stiffness table from the digitized stiffness curve.

    Digitization noise can break monotonicity; isotonic regression repairs
    it with the least-squares monotone fit. Adjustment details are surfaced
    by stiffness_fit_report.
    """
    current = dataset.column("current_a")
    stiff = dataset.column("stiffness_n_m")
    order = np.argsort(current)
    current, stiff = current[order], stiff[order]
    fitted = isotonic_nondecreasing(stiff)
    return CalibrationTable.from_points(zip(current, fitted))


def stiffness_fit_report(dataset: Dataset) -> CalibrationResult:
    table = fit_stiffness_table(dataset)
    raw = dataset.column("stiffness_n_m")[np.argsort(dataset.column("current_a"))]
    fitted = np.array(table.stiffnesses)
    adj = fitted - raw
    warnings = []
    for i, (a, r) in enumerate(zip(adj, raw)):
        if abs(a) > dataset.uncertainty * abs(r) + 1e-12:
            warnings.append(
                f"isotonic adjustment at row {i} ({a:+.3g} N/m) exceeds the "
                f"stated {dataset.uncertainty:.0%} digitization uncertainty")
    return CalibrationResult(
        name="stiffness_table", method="isotonic regression (PAV)",
        dataset=dataset.name,
        parameters={"max_adjustment_n_m": float(np.max(np.abs(adj))),
                    "k_min_n_m": fitted[0], "k_max_n_m": fitted[-1]},
        residual=float(np.sqrt(np.mean(adj ** 2))),
        warnings=tuple(warnings),
    )


def _require_flat_alternating(template: Scenario, what: str):
    ter = template.terrain
    if (ter.slope != 0.0 or template.payload_mass != 0.0
            or not (template.signal.mask[FRONT] and template.signal.mask[REAR])
            or template.signal.phase[FRONT] != template.signal.phase[REAR]):
        raise ValidationError(
            f"{what} expects a flat, unloaded, all-legs, in-phase template")


SWEEP_CYCLES = 6  # sweep_period runs each period for this many cycles


def _stroke_scales(template: Scenario, actuator: ActuatorModel,
                   periods: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-cycle ideal stand/sit advances (m) at unit slip, steady state."""
    from .gait import _beta_caps  # internal reuse: same caps as the simulator

    sc = replace(template, actuator=actuator)
    s_stand = np.empty_like(periods)
    s_sit = np.empty_like(periods)
    cap_f, _ = _beta_caps(sc, 0.0)
    leg = template.robot.leg.leg_length
    duty = template.signal.duty
    for i, period in enumerate(periods):
        a_top, a_bot = actuator.steady_cycle(float(period), duty)
        b_top = actuator.window(a_top) * cap_f
        b_bot = actuator.window(a_bot) * cap_f
        dcos = math.cos(b_bot) - math.cos(b_top)
        s_stand[i] = leg * dcos
        s_sit[i] = (leg / 2.0) * dcos
    return s_stand, s_sit


def _sweep_stroke_arcs(template: Scenario, actuator: ActuatorModel,
                       periods: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Ideal unit-slip stroke advances for each of the first SWEEP_CYCLES
    cycles of every period, shapes (n_periods, SWEEP_CYCLES).

    The activation tops/bottoms approach the steady cycle geometrically
    from a cold start (a=0), so sweep_period's transient is available in
    closed form: paired with the re-seat loss, this reproduces the
    simulator's sweep averages exactly (it is tested to).
    """
    from .gait import _beta_caps

    sc = replace(template, actuator=actuator)
    cap_f, _ = _beta_caps(sc, 0.0)
    leg = template.robot.leg.leg_length
    duty = template.signal.duty
    n = len(periods)
    arcs_stand = np.empty((n, SWEEP_CYCLES))
    arcs_sit = np.empty((n, SWEEP_CYCLES))
    for i, period in enumerate(periods):
        e_h = math.exp(-duty * period / actuator.tau_heat)
        e_c = math.exp(-(1.0 - duty) * period / actuator.tau_cool)
        top_inf = (1.0 - e_h) / (1.0 - e_h * e_c)
        q = e_h * e_c

        def cosb(a):
            return math.cos(actuator.window(a) * cap_f)

        bot_prev = 0.0
        for k in range(1, SWEEP_CYCLES + 1):
            top_k = top_inf * (1.0 - q ** k)
            bot_k = top_k * e_c
            arcs_stand[i, k - 1] = leg * (cosb(bot_prev) - cosb(top_k))
            arcs_sit[i, k - 1] = (leg / 2.0) * (cosb(bot_k) - cosb(top_k))
            bot_prev = bot_k
    return arcs_stand, arcs_sit


def _sweep_speeds(template: Scenario, actuator: ActuatorModel,
                  eta0_grid: np.ndarray, periods: np.ndarray) -> np.ndarray:
    """Closed-form sweep_period averages, shape (n_eta, n_periods)."""
    arcs_stand, arcs_sit = _sweep_stroke_arcs(template, actuator, periods)
    ter = template.terrain
    half = ter.pitch / 2.0 if ter.surface == "ratchet" else 0.0
    anchor_eff = 1.0
    if math.isfinite(ter.mu_backward) and ter.mu_backward > 0.0:
        anchor_eff = 1.0 - ter.mu_forward / ter.mu_backward
    e = (eta0_grid * anchor_eff)[:, None, None]
    d = (np.maximum(0.0, e * arcs_stand[None] - half)
         + np.maximum(0.0, e * arcs_sit[None] - half)).sum(axis=2)
    return d / (SWEEP_CYCLES * periods[None, :])


def _profile_eta0(template: Scenario, actuator: ActuatorModel,
                  periods: np.ndarray, speeds: np.ndarray) -> tuple[float, float]:
    """Best slip scale for a candidate actuator; returns (eta0, sse)."""
    etas = np.linspace(0.0, 1.0, 2001)
    v = _sweep_speeds(template, actuator, etas, periods)
    sse = np.sum((v - speeds[None, :]) ** 2, axis=1)
    k = int(np.argmin(sse))
    return float(etas[k]), float(sse[k])


THERMAL_BOUNDS = {"tau_heat_s": (0.2, 3.0), "tau_cool_s": (0.1, 2.0)}
SPEED_PEAK_WINDOW = (3.5, 4.5)  # s


def _fit_thermal_full(dataset: Dataset, template: Scenario,
                      peak_window: tuple[float, float] = SPEED_PEAK_WINDOW) -> dict:
    periods = dataset.column("period_s")
    speeds = dataset.column("speed_mm_s") * 1e-3
    if len(periods) < 4:
        raise NoFeasibleFitError(
            f"thermal fit needs >= 4 (period, speed) points, got {len(periods)}")
    _require_flat_alternating(template, "fit_thermal")
    order = np.argsort(periods)
    periods, speeds = periods[order], speeds[order]

    (th_lo, th_hi) = THERMAL_BOUNDS["tau_heat_s"]
    (tc_lo, tc_hi) = THERMAL_BOUNDS["tau_cool_s"]

    def candidate(tau_h, tau_c):
        return replace(template.actuator, tau_heat=float(tau_h), tau_cool=float(tau_c))

    # coarse grid, then shrinking refinement. The profiled objective is the
    # closed-form transcription of sweep_period's averages, so the surface
    # being minimized is exactly the one the simulator would report.
    best = None
    th_grid = np.linspace(th_lo, th_hi, 15)
    tc_grid = np.linspace(tc_lo, tc_hi, 15)
    for _ in range(7):
        for th in th_grid:
            for tc in tc_grid:
                act = candidate(th, tc)
                eta0, sse = _profile_eta0(template, act, periods, speeds)
                if best is None or sse < best[0]:
                    best = (sse, float(th), float(tc), eta0)
        step_h = (th_grid[-1] - th_grid[0]) / (len(th_grid) - 1)
        step_c = (tc_grid[-1] - tc_grid[0]) / (len(tc_grid) - 1)
        th_grid = np.linspace(max(th_lo, best[1] - 1.5 * step_h),
                              min(th_hi, best[1] + 1.5 * step_h), 9)
        tc_grid = np.linspace(max(tc_lo, best[2] - 1.5 * step_c),
                              min(tc_hi, best[2] + 1.5 * step_c), 9)

    _, tau_h, tau_c, eta0 = best
    fitted = candidate(tau_h, tau_c)

    # report the residual off an actual simulator sweep, not the transcription
    sc = replace(template, actuator=fitted,
                 slip=SlipModel(eta0=eta0, c_slope=0.0, c_load=0.0))
    sim = np.array([v for _, v in sweep_period(sc, periods)])
    rmse = math.sqrt(float(np.sum((sim - speeds) ** 2)) / len(periods))

    fine = np.arange(0.5, 20.0 + 1e-9, 0.01)
    v_fine = _sweep_speeds(template, fitted, np.array([eta0]), fine)[0]
    peak = float(fine[int(np.argmax(v_fine))])
    if not (peak_window[0] <= peak <= peak_window[1]):
        raise NoFeasibleFitError(
            f"fitted speed curve peaks at {peak:.2f} s, outside "
            f"[{peak_window[0]}, {peak_window[1]}] s",
            best_loss=rmse)

    return {"actuator": fitted, "eta0_profile": eta0, "residual": rmse,
            "peak_s": peak, "sim_speeds": sim, "periods": periods,
            "speeds": speeds}


def fit_thermal(dataset: Dataset, template: Scenario,
                peak_window: tuple[float, float] = SPEED_PEAK_WINDOW) -> ActuatorModel:
    """Actuator lag constants from the speed-vs-period curve.

    Grid search over (tau_heat, tau_cool) with the overall slip scale
    profiled out per candidate, refined by grid shrinking. The objective
    is an exact closed-form transcription of the simulator's period
    sweep, so data the simulator generated is recovered without bias.
    Raises NoFeasibleFit when the fitted curve's peak falls outside the
    expected period window.
    """
    return _fit_thermal_full(dataset, template, peak_window)["actuator"]


def thermal_fit_report(dataset: Dataset, template: Scenario,
                       peak_window: tuple[float, float] = SPEED_PEAK_WINDOW) -> CalibrationResult:
    full = _fit_thermal_full(dataset, template, peak_window)
    act = full["actuator"]
    return CalibrationResult(
        name="thermal", method="grid + refinement, slip scale profiled",
        dataset=dataset.name,
        parameters={"tau_heat_s": act.tau_heat, "tau_cool_s": act.tau_cool,
                    "eta0_profile": full["eta0_profile"],
                    "peak_s": full["peak_s"]},
        residual=full["residual"],
        bounds=dict(THERMAL_BOUNDS),
    )


def _invert_cycle_efficiency(speed: float, period: float, s_stand: float,
                             s_sit: float, half: float) -> float:
    """Efficiency that makes the steady cycle travel speed*period.

    The cycle displacement is piecewise linear in efficiency because each
    stroke independently stalls below the re-seat loss; invert the active
    branch.
    """
    d = speed * period
    if d <= 0.0:
        raise ValidationError("operating point with zero speed is uninformative")
    if half == 0.0:
        return d / (s_stand + s_sit)
    eta_both = (d + 2.0 * half) / (s_stand + s_sit)
    if eta_both * s_sit >= half - 1e-15:
        return eta_both
    eta_stand = (d + half) / s_stand
    if eta_stand * s_sit <= half + 1e-15:
        return eta_stand
    # between branches: numerically resolve the kink
    lo, hi = 0.0, 1.5
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        dm = (max(0.0, mid * s_stand - half) + max(0.0, mid * s_sit - half))
        if dm < d:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _fit_slip_full(dataset: Dataset, template: Scenario) -> dict:
    slope_deg = dataset.column("slope_deg")
    payload = dataset.column("payload_g") * 1e-3
    speeds = dataset.column("speed_mm_s") * 1e-3
    n = len(speeds)
    if n < 3:
        raise TooFewPointsError(n, 3, what="operating points")
    if not (template.signal.mask[FRONT] and template.signal.mask[REAR]):
        raise ValidationError("fit_slip expects an all-legs scenario template")

    periods = np.full(1, template.signal.period)
    s1, s2 = _stroke_scales(template, template.actuator, periods)
    half = (template.terrain.pitch / 2.0
            if template.terrain.surface == "ratchet" else 0.0)
    etas = np.array([
        _invert_cycle_efficiency(float(v), template.signal.period,
                                 float(s1[0]), float(s2[0]), half)
        for v in speeds
    ])

    total = template.robot.total_mass
    design = np.column_stack([
        np.ones(n), -np.sin(np.radians(slope_deg)), -payload / total,
    ])
    if n == 3:
        det = float(np.linalg.det(design))
        scale = float(np.abs(design).max()) ** 3
        if abs(det) < 1e-12 * max(scale, 1.0):
            raise SingularSystemError(
                "operating points do not separate slope and load effects "
                f"(det={det:.3e})")
        coeff = np.linalg.solve(design, etas)
    else:
        coeff, _, rank, _ = np.linalg.lstsq(design, etas, rcond=None)
        if rank < 3:
            raise SingularSystemError("operating points are rank deficient")
    model = SlipModel(eta0=float(coeff[0]), c_slope=float(coeff[1]),
                      c_load=float(coeff[2]))

    warnings = []
    for s in (0.0, float(np.max(slope_deg))):
        for m in (0.0, float(np.max(payload))):
            eta = (model.eta0 - model.c_slope * math.sin(math.radians(s))
                   - model.c_load * m / total)
            if eta < 0.0 or eta > 1.0:
                warnings.append(
                    f"efficiency clamps to [0,1] at slope={s:g} deg, "
                    f"payload={m * 1e3:g} g (raw {eta:.3f})")

    fit_eta = design @ coeff
    residual = float(np.sqrt(np.mean((fit_eta - etas) ** 2)))
    return {"model": model, "etas": etas, "residual": residual,
            "warnings": tuple(warnings)}


def fit_slip(dataset: Dataset, template: Scenario) -> SlipModel:
    """Slip coefficients through the flat / slope / payload operating points.

    Exact three-point solve of the affine efficiency model (least squares
    when more points are given). The simulator's efficiency clamps to
    [0,1]; the fit warns when the envelope reaches a clamp.
    """
    return _fit_slip_full(dataset, template)["model"]


def slip_fit_report(dataset: Dataset, template: Scenario) -> CalibrationResult:
    full = _fit_slip_full(dataset, template)
    m = full["model"]
    return CalibrationResult(
        name="slip", method="exact affine solve through operating points",
        dataset=dataset.name,
        parameters={"eta0": m.eta0, "c_slope": m.c_slope, "c_load": m.c_load},
        residual=full["residual"],
        warnings=full["warnings"],
    )


REQUIRED_DATASETS = ("stiffness_vs_current", "speed_vs_period", "operating_points")


def run_calibration(directory: Path | None = None,
                    template: Scenario | None = None) -> dict:
    """All three fits against a dataset directory.

    Returns {"table", "actuator", "slip", "results"}; raises
    FileNotFoundError naming any missing dataset file.
    """
    directory = directory or data_dir()
    missing = [n for n in REQUIRED_DATASETS
               if not (directory / f"{n}.csv").exists()]
    if missing:
        raise FileNotFoundError(
            "missing dataset files: "
            + ", ".join(f"{directory / (n + '.csv')}" for n in missing))
    if template is None:
        from .params import GaitSignal
        template = Scenario(signal=GaitSignal(period=4.0))

    ds_stiff = load_dataset("stiffness_vs_current", directory)
    ds_speed = load_dataset("speed_vs_period", directory)
    ds_ops = load_dataset("operating_points", directory)

    table = fit_stiffness_table(ds_stiff)
    res_stiff = stiffness_fit_report(ds_stiff)
    res_thermal = thermal_fit_report(ds_speed, template)
    actuator = ActuatorModel(tau_heat=res_thermal.parameters["tau_heat_s"],
                             tau_cool=res_thermal.parameters["tau_cool_s"],
                             i_threshold=template.actuator.i_threshold,
                             a_on=template.actuator.a_on,
                             a_sat=template.actuator.a_sat)
    slip_template = replace(template, actuator=actuator, table=table)
    res_slip = slip_fit_report(ds_ops, slip_template)
    slip = SlipModel(eta0=res_slip.parameters["eta0"],
                     c_slope=res_slip.parameters["c_slope"],
                     c_load=res_slip.parameters["c_load"])

    return {"table": table, "actuator": actuator, "slip": slip,
            "results": [res_stiff, res_thermal, res_slip]}
