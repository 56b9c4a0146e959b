"""Quasi-static slip-stick gait simulator.

Two-stroke crawl driven by a square-wave current: heating stiffens the legs
and the robot stands up (front claw anchored, body pulled forward by the
stand-advance increment); cooling softens them and the robot sits down
(rear claws anchored, body advances by the sit increment). Leg angle
follows a first-order thermal lag through an activation window, and every
increment is scaled by a slip efficiency degraded by slope and payload.

Integration is exact: activation advances by closed-form exponentials,
steps are split internally at square-wave switch times, and displacement
increments telescope on cos(beta), so results do not depend on dt beyond
trace resolution.

Ratchet anchoring: anchor positions are bookkept on the tooth lattice
(floor-snapped relative to each foot's starting tooth). In the alternating
all-leg gait every hand-off fully unloads one claw and flips the load onto
the other, so the engaging claw re-seats mid-tooth and gives back half a
pitch. In single-group drag gaits the working claw stays loaded; it only
pays the half pitch when it slid a full tooth or more since last engaging.
These rules produce the short-period dead zone, the confined-space dead
zone for the all-leg gait, and leave the smooth-surface ideal limit exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .beam import FlexuralModel, LoadCase, equilibrium_shape, node_positions
from .errors import (
    InfeasibleConfinementError,
    OutOfRangeError,
    ValidationError,
)
from .kinematics import BETA_MAX, beta_for_height, standing_height
from .params import BeamParams, CalibrationTable, GaitSignal, RobotParams

# Rear-pair azimuthal splay of the tripod: the two rear legs fan out
# symmetrically at this angle from the body axis.
REAR_SPLAY = math.radians(60.0)

_EPS_T = 1e-12


@dataclass(frozen=True)
class ActuatorModel:
    """First-order thermal lag with an engagement window.

    The lag state a in [0,1] relaxes toward 1 while the commanded current
    is at or above i_threshold (time constant tau_heat) and toward 0
    otherwise (tau_cool). The contact angle follows the windowed fraction
    window(a): dead below a_on, saturated above a_sat. The window models
    the cord having to take up slack before the legs move, and the legs
    reaching their geometric stop before the cord is fully contracted.

    Defaults are the values calibrated against the shipped speed-vs-period
    dataset (see calibrate.fit_thermal).
    """

    tau_heat: float = 1.25  # s
    tau_cool: float = 0.5  # s
    i_threshold: float = 0.28  # A, the stiffness-knee onset
    a_on: float = 0.35
    a_sat: float = 0.80

    def __post_init__(self):
        if self.tau_heat <= 0.0 or self.tau_cool <= 0.0:
            raise OutOfRangeError("tau", min(self.tau_heat, self.tau_cool), 0.0, math.inf)
        if not (0.0 <= self.a_on < self.a_sat <= 1.0):
            raise ValidationError(
                f"window bounds a_on={self.a_on!r}, a_sat={self.a_sat!r} invalid"
            )

    def advance(self, a: float, current: float, dt: float) -> float:
        """Exact exponential update of the lag state over dt at a held current."""
        target = 1.0 if current >= self.i_threshold - 1e-12 else 0.0
        tau = self.tau_heat if target == 1.0 else self.tau_cool
        return target + (a - target) * math.exp(-dt / tau)

    def window(self, a: float) -> float:
        """Stroke fraction in [0,1] for a lag state."""
        return min(1.0, max(0.0, (a - self.a_on) / (self.a_sat - self.a_on)))

    def steady_cycle(self, period: float, duty: float) -> tuple[float, float]:
        """(a_top, a_bot) of the periodic steady state under the square wave."""
        e_h = math.exp(-duty * period / self.tau_heat)
        e_c = math.exp(-(1.0 - duty) * period / self.tau_cool)
        a_top = (1.0 - e_h) / (1.0 - e_h * e_c)
        return a_top, a_top * e_c


@dataclass(frozen=True)
class SlipModel:
    """Slip efficiency: fraction of the ideal stroke realized as displacement.

    Affine in sin(slope) and in payload-to-robot mass ratio, clamped to
    [0,1]. Defaults are the exact three-point solve through the shipped
    operating points (see calibrate.fit_slip); the fractions are kept
    symbolic so the round trip is bit-exact.
    """

    eta0: float = 37.0 / 48.75
    c_slope: float = (37.0 / 48.75 - 12.6 / 48.75) / math.sin(math.radians(15.0))
    c_load: float = (37.0 / 48.75 - 2.86 / 32.5) * 2.1 / 5.0

    def efficiency(self, slope: float, payload_mass: float, total_mass: float) -> float:
        eta = (self.eta0 - self.c_slope * math.sin(slope)
               - self.c_load * payload_mass / total_mass)
        return min(1.0, max(0.0, eta))


@dataclass(frozen=True)
class CurrentHeightMap:
    """Steady standing angle as a function of the applied high current.

    The beam does not fully deploy into the tripod at reduced current, so
    the standing angle (and with it the height) shrinks with current. The
    map is piecewise linear through measured anchor points: onset at the
    activation threshold, the reduced-height operating point at 0.38 A,
    and full deployment at 0.4 A. Below the threshold the legs never
    engage at all.
    """

    anchors: tuple[tuple[float, float], ...]  # (current A, beta rad), increasing

    @classmethod
    def default(cls, robot: RobotParams,
                i_threshold: float = 0.28) -> "CurrentHeightMap":
        beta_40mm = beta_for_height(40e-3, robot.leg.leg_length, robot.height_offset)
        return cls(anchors=(
            (i_threshold, math.radians(20.0)),
            (0.38, beta_40mm),
            (0.40, math.radians(robot.leg_tilt_deploy)),
        ))

    def __post_init__(self):
        cur = [a[0] for a in self.anchors]
        if len(cur) < 2 or any(b <= a for a, b in zip(cur, cur[1:])):
            raise ValidationError("height map anchors must have increasing currents")

    def beta_cap(self, i_high: float) -> float:
        """Standing-angle ceiling (rad) for a square wave peaking at i_high."""
        cur = [a[0] for a in self.anchors]
        if i_high < cur[0] - 1e-12:
            return 0.0
        beta = [a[1] for a in self.anchors]
        return float(np.interp(i_high, cur, beta))


@dataclass(frozen=True)
class Terrain:
    """Ground and confinement description.

    ceiling is a tuple of (x_start, x_end, gap) regions in meters;
    +-inf bounds give a constant ceiling. tunnel_width limits the robot's
    lateral extent inside the same regions. mu_forward/mu_backward model
    the claw: negligible friction sliding forward, near-infinite backward.
    """

    slope: float = 0.0  # rad
    surface: str = "ratchet"
    pitch: float = 3e-3  # m, ratchet tooth spacing
    tooth_height: float = 0.5e-3  # m
    ceiling: tuple[tuple[float, float, float], ...] = ()
    tunnel_width: float | None = None
    mu_forward: float = 0.0
    mu_backward: float = math.inf

    def __post_init__(self):
        if self.surface not in ("smooth", "ratchet"):
            raise ValidationError(f"unknown surface {self.surface!r}")
        if self.surface == "ratchet":
            if self.pitch <= 0.0:
                raise OutOfRangeError("pitch", self.pitch, 0.0, math.inf)
            if self.tooth_height < 0.0:
                raise OutOfRangeError("tooth_height", self.tooth_height, 0.0, math.inf)
        for x0, x1, gap in self.ceiling:
            if gap <= 0.0:
                raise OutOfRangeError("ceiling gap", gap, 0.0, math.inf)
            if x1 <= x0:
                raise ValidationError(f"ceiling region [{x0}, {x1}] is empty")
        if self.tunnel_width is not None and self.tunnel_width <= 0.0:
            raise OutOfRangeError("tunnel_width", self.tunnel_width, 0.0, math.inf)
        if not (0.0 <= self.mu_forward <= self.mu_backward):
            raise ValidationError(
                f"need 0 <= mu_forward <= mu_backward, got "
                f"{self.mu_forward!r}, {self.mu_backward!r}"
            )

    @property
    def confined(self) -> bool:
        return bool(self.ceiling) or self.tunnel_width is not None

    def gap_over(self, x_lo: float, x_hi: float) -> float:
        """Smallest ceiling gap (m) over any region overlapping [x_lo, x_hi]."""
        gap = math.inf
        for x0, x1, g in self.ceiling:
            if x1 >= x_lo and x0 <= x_hi:
                gap = min(gap, g)
        return gap

    def min_gap(self) -> float:
        return min((g for _, _, g in self.ceiling), default=math.inf)


def gait_width(robot: RobotParams, beta: float) -> float:
    """Lateral extent (m) of the splayed rear pair at elevation angle beta.

    Softening the legs lowers the robot but fans the rear pair out wider:
    width shrinks as the robot stands.
    """
    deploy = math.radians(robot.leg_tilt_deploy)
    arm = 2.0 * robot.leg.leg_length * math.sin(REAR_SPLAY)
    body = robot.deployed_width - arm * math.cos(deploy)
    return body + arm * math.cos(beta)


def drag_width(robot: RobotParams) -> float:
    """Lateral extent (m) in front-leg-only mode, rear legs trailing folded."""
    return robot.compact_box[1]


@dataclass(frozen=True)
class Scenario:
    """Everything one simulation run needs."""

    signal: GaitSignal
    robot: RobotParams = field(default_factory=RobotParams)
    terrain: Terrain = field(default_factory=Terrain)
    actuator: ActuatorModel = field(default_factory=ActuatorModel)
    slip: SlipModel = field(default_factory=SlipModel)
    height_map: CurrentHeightMap | None = None
    table: CalibrationTable | None = None
    payload_mass: float = 0.0  # kg
    duration: float = 24.6  # s
    dt: float = 0.04  # s
    seed: int = 0
    slip_noise: float = 0.0  # std of per-engagement efficiency noise

    def __post_init__(self):
        if self.dt > self.signal.period / 100.0 + _EPS_T:
            raise ValidationError(
                f"dt={self.dt!r} must be <= period/100 = {self.signal.period / 100.0!r}"
            )
        if self.duration <= self.signal.period:
            raise ValidationError(
                f"duration={self.duration!r} must exceed one period {self.signal.period!r}"
            )
        if self.payload_mass < 0.0:
            raise OutOfRangeError("payload_mass", self.payload_mass, 0.0, math.inf)
        if self.slip_noise < 0.0:
            raise OutOfRangeError("slip_noise", self.slip_noise, 0.0, math.inf)
        if self.signal.groups != ((0,), (1, 2)):
            raise ValidationError("simulator expects the front / rear-pair grouping")

    def resolved_height_map(self) -> CurrentHeightMap:
        if self.height_map is not None:
            return self.height_map
        return CurrentHeightMap.default(self.robot, self.actuator.i_threshold)

    def mask_name(self) -> str:
        return {(True, True): "all", (True, False): "front_only",
                (False, True): "rear_only"}.get(tuple(self.signal.mask), "none")


FRONT, REAR = 0, 1  # group indices of the canonical front / rear-pair split


@dataclass
class GaitState:
    """Mutable integrator state between steps."""

    t: float = 0.0
    x: float = 0.0  # body position, m
    a: tuple[float, float] = (0.0, 0.0)  # lag state per group
    phase: str = "sit"
    pending_loss: float = 0.0  # re-grip loss not yet eaten, m
    slide_front: float = 0.0  # front foot travel since last engagement, m
    slide_rear: float = 0.0
    anchor_front: float = 0.0  # recorded anchor positions, m
    anchor_rear: float = 0.0
    anchor_front_0: float = 0.0  # starting teeth, lattice origins
    anchor_rear_0: float = 0.0
    noise_factor: float = 1.0


def _initial_state(scenario: Scenario) -> GaitState:
    leg = scenario.robot.leg.leg_length
    st = GaitState()
    st.anchor_front = st.anchor_front_0 = leg  # foot of the flat front leg
    st.anchor_rear = st.anchor_rear_0 = -leg / 2.0
    return st


LOOKAHEAD = 50e-3  # m, how far ahead of its reach the robot starts ducking


def _beta_caps(scenario: Scenario, x: float) -> tuple[float, float]:
    """Standing-angle ceiling per group at body position x.

    Combines the current->angle map with any ceiling clip. The ceiling is
    applied over a conservative envelope ahead of the body so the robot
    ducks before its reach enters the region.
    """
    hmap = scenario.resolved_height_map()
    leg = scenario.robot.leg.leg_length
    gap = scenario.terrain.gap_over(x - leg / 2.0, x + leg + LOOKAHEAD)
    if gap is not math.inf and gap < scenario.robot.height_offset - 1e-12:
        raise InfeasibleConfinementError(
            "gap below the fully-flat body height",
            required_mm=scenario.robot.height_offset * 1e3,
            available_mm=gap * 1e3,
        )
    beta_gap = BETA_MAX
    if math.isfinite(gap):
        beta_gap = beta_for_height(
            min(gap, standing_height(leg, BETA_MAX, scenario.robot.height_offset)),
            leg, scenario.robot.height_offset,
        )
    caps = []
    for g in (FRONT, REAR):
        i_high = scenario.signal.i_high if scenario.signal.mask[g] else 0.0
        caps.append(min(hmap.beta_cap(i_high), beta_gap, BETA_MAX))
    return caps[0], caps[1]


def _next_switch(signal: GaitSignal, t: float, group: int) -> float:
    """First square-wave edge of a group strictly after time t."""
    u = (t / signal.period - signal.phase[group]) % 1.0
    best = math.inf
    for b in (signal.duty, 1.0):
        d = b - u
        if d <= 1e-9:
            d += 1.0
        best = min(best, d)
    return t + best * signal.period


def step(state: GaitState, scenario: Scenario, dt: float | None = None,
         rng: np.random.Generator | None = None) -> GaitState:
    """Advance the gait by one time step, splitting at signal edges inside.

    Returns the same (mutated) state object for chaining.
    """
    if dt is None:
        dt = scenario.dt
    sig = scenario.signal
    act = scenario.actuator
    ter = scenario.terrain
    leg = scenario.robot.leg.leg_length
    eta = scenario.slip.efficiency(ter.slope, scenario.payload_mass,
                                   scenario.robot.total_mass)
    anchor_eff = 1.0
    if math.isfinite(ter.mu_backward) and ter.mu_backward > 0.0:
        anchor_eff = 1.0 - ter.mu_forward / ter.mu_backward
    cap_f, cap_r = _beta_caps(scenario, state.x)
    on_ratchet = ter.surface == "ratchet"
    pitch = ter.pitch

    t_end = state.t + dt
    s0 = state.t
    a = list(state.a)
    while s0 < t_end - _EPS_T:
        s1 = t_end
        for g in (FRONT, REAR):
            if sig.mask[g]:
                s1 = min(s1, _next_switch(sig, s0, g))
        s1 = min(s1, t_end)
        mid = 0.5 * (s0 + s1)
        b_old = [0.0, 0.0]
        b_new = [0.0, 0.0]
        for g, cap in ((FRONT, cap_f), (REAR, cap_r)):
            cur = sig.current_at(mid, g)
            a_new = act.advance(a[g], cur, s1 - s0)
            b_old[g] = act.window(a[g]) * cap
            b_new[g] = act.window(a_new) * cap
            a[g] = a_new

        dbf = b_new[FRONT] - b_old[FRONT]
        dbr = b_new[REAR] - b_old[REAR]
        direction = dbf if abs(dbf) > 1e-15 else dbr
        if direction > 1e-15:
            new_phase = "stand"
        elif direction < -1e-15:
            new_phase = "sit"
        else:
            new_phase = state.phase

        if new_phase != state.phase:
            # anchor hand-off: the engaging claw bites the lattice. In the
            # alternating gait every hand-off re-seats a fully unloaded claw
            # mid-tooth (half-pitch loss); a drag gait's claw stays loaded
            # and only re-seats after sliding a full tooth.
            alternating = sig.mask[FRONT] and sig.mask[REAR]
            if new_phase == "stand":
                foot = state.x + leg * math.cos(b_old[FRONT])
                if on_ratchet:
                    state.anchor_front = (state.anchor_front_0 + pitch
                                          * math.floor((foot - state.anchor_front_0)
                                                       / pitch))
                else:
                    state.anchor_front = foot
                reseats = alternating or state.slide_front >= pitch - 1e-12
                state.pending_loss = pitch / 2.0 if on_ratchet and reseats else 0.0
                state.slide_front = 0.0
            else:
                foot = state.x - (leg / 2.0) * math.cos(b_old[REAR])
                if on_ratchet:
                    state.anchor_rear = (state.anchor_rear_0 + pitch
                                         * math.floor((foot - state.anchor_rear_0)
                                                      / pitch))
                else:
                    state.anchor_rear = foot
                reseats = alternating or state.slide_rear >= pitch - 1e-12
                state.pending_loss = pitch / 2.0 if on_ratchet and reseats else 0.0
                state.slide_rear = 0.0
            if scenario.slip_noise > 0.0 and rng is not None:
                state.noise_factor = max(0.0, 1.0 + scenario.slip_noise
                                         * float(rng.standard_normal()))
            state.phase = new_phase

        if state.phase == "stand":
            raw = max(0.0, leg * (math.cos(b_old[FRONT]) - math.cos(b_new[FRONT])))
        else:
            raw = max(0.0, (leg / 2.0) * (math.cos(b_new[REAR]) - math.cos(b_old[REAR])))
        raw *= eta * anchor_eff * state.noise_factor
        net = max(0.0, raw - state.pending_loss)
        state.pending_loss = max(0.0, state.pending_loss - raw)
        x_new = state.x + net

        # kinematic foot travel, for the re-grip rule at the next hand-off
        if state.phase == "stand":
            state.slide_rear += abs(
                (x_new - (leg / 2.0) * math.cos(b_new[REAR]))
                - (state.x - (leg / 2.0) * math.cos(b_old[REAR]))
            )
        else:
            state.slide_front += abs(
                (x_new + leg * math.cos(b_new[FRONT]))
                - (state.x + leg * math.cos(b_old[FRONT]))
            )
        state.x = x_new
        s0 = s1

    state.t = t_end
    state.a = (a[FRONT], a[REAR])
    return state


@dataclass(frozen=True)
class SimTrace:
    """Time series of the run, one row per step boundary."""

    t: np.ndarray
    x: np.ndarray
    beta_front: np.ndarray
    beta_rear: np.ndarray
    activation_front: np.ndarray
    activation_rear: np.ndarray
    anchored_front: np.ndarray
    anchored_rear: np.ndarray
    height: np.ndarray
    anchor_front_x: np.ndarray
    anchor_rear_x: np.ndarray
    anchor_front_0: float
    anchor_rear_0: float

    @property
    def duration(self) -> float:
        return float(self.t[-1] - self.t[0])

    @property
    def displacement(self) -> float:
        return float(self.x[-1] - self.x[0])

    @property
    def average_speed(self) -> float:
        return self.displacement / self.duration

    def to_csv(self) -> str:
        lines = ["t_s,x_mm,beta_front_deg,beta_rear_deg,height_mm,anchored_front,anchored_rear"]
        for i in range(len(self.t)):
            lines.append(
                f"{self.t[i]:.6f},{self.x[i] * 1e3:.6f},"
                f"{math.degrees(self.beta_front[i]):.6f},"
                f"{math.degrees(self.beta_rear[i]):.6f},"
                f"{self.height[i] * 1e3:.6f},"
                f"{int(self.anchored_front[i])},{int(self.anchored_rear[i])}"
            )
        return "\n".join(lines) + "\n"


def run(scenario: Scenario) -> SimTrace:
    """Simulate the full scenario. Deterministic for a given (scenario, seed)."""
    st = _initial_state(scenario)
    rng = (np.random.default_rng(scenario.seed)
           if scenario.slip_noise > 0.0 else None)
    n_steps = int(math.ceil(scenario.duration / scenario.dt - 1e-9))
    rows = []
    act = scenario.actuator

    def snapshot(prev_x: float):
        cap_f, cap_r = _beta_caps(scenario, st.x)
        bf = act.window(st.a[FRONT]) * cap_f
        br = act.window(st.a[REAR]) * cap_r
        h = standing_height(scenario.robot.leg.leg_length, max(bf, br),
                            scenario.robot.height_offset)
        moving = st.x > prev_x + 1e-15
        anch_f = 0 if (st.phase == "sit" and moving) else 1
        anch_r = 0 if (st.phase == "stand" and moving) else 1
        rows.append((st.t, st.x, bf, br, st.a[FRONT], st.a[REAR],
                     anch_f, anch_r, h, st.anchor_front, st.anchor_rear))

    snapshot(prev_x=st.x)
    try:
        for k in range(n_steps):
            t_target = min(scenario.duration, (k + 1) * scenario.dt)
            prev_x = st.x
            step(st, scenario, dt=t_target - st.t, rng=rng)
            snapshot(prev_x)
    except InfeasibleConfinementError as err:
        raise InfeasibleConfinementError(
            f"t={st.t:.3f} s: {err.args[0]}", err.required_mm, err.available_mm
        ) from err
    cols = list(zip(*rows))
    return SimTrace(
        t=np.array(cols[0]), x=np.array(cols[1]),
        beta_front=np.array(cols[2]), beta_rear=np.array(cols[3]),
        activation_front=np.array(cols[4]), activation_rear=np.array(cols[5]),
        anchored_front=np.array(cols[6]), anchored_rear=np.array(cols[7]),
        height=np.array(cols[8]),
        anchor_front_x=np.array(cols[9]), anchor_rear_x=np.array(cols[10]),
        anchor_front_0=st.anchor_front_0, anchor_rear_0=st.anchor_rear_0,
    )


def steady_cycle_displacement(scenario: Scenario) -> tuple[float, float, float]:
    """Closed-form per-cycle displacement of the periodic steady state.

    Returns (displacement_m, beta_top, beta_bot) for the front group.
    Mirrors the simulator's steady cycle exactly, including the re-grip
    rule, by solving the loss booleans self-consistently.
    """
    sig = scenario.signal
    act = scenario.actuator
    ter = scenario.terrain
    leg = scenario.robot.leg.leg_length
    eta = scenario.slip.efficiency(ter.slope, scenario.payload_mass,
                                   scenario.robot.total_mass)
    anchor_eff = 1.0
    if math.isfinite(ter.mu_backward) and ter.mu_backward > 0.0:
        anchor_eff = 1.0 - ter.mu_forward / ter.mu_backward
    eta = eta * anchor_eff
    cap_f, cap_r = _beta_caps(scenario, 0.0)

    def group_band(g, cap):
        if not sig.mask[g]:
            return 0.0, 0.0
        a_top, a_bot = act.steady_cycle(sig.period, sig.duty)
        return act.window(a_top) * cap, act.window(a_bot) * cap

    bf_top, bf_bot = group_band(FRONT, cap_f)
    br_top, br_bot = group_band(REAR, cap_r)
    dcos_f = math.cos(bf_bot) - math.cos(bf_top)
    dcos_r = math.cos(br_bot) - math.cos(br_top)
    raw_stand = eta * leg * dcos_f
    raw_sit = eta * (leg / 2.0) * dcos_r

    if ter.surface != "ratchet":
        return raw_stand + raw_sit, bf_top, bf_bot

    pitch = ter.pitch
    half = pitch / 2.0
    alternating = sig.mask[FRONT] and sig.mask[REAR]
    if alternating:
        # every hand-off re-seats the engaging claw half a tooth back
        d_stand = max(0.0, raw_stand - half)
        d_sit = max(0.0, raw_sit - half)
        return d_stand + d_sit, bf_top, bf_bot
    # drag gait: the loss booleans depend on how far each claw slid, which
    # depends on the other stroke's net advance; iterate the fixed point.
    loss_stand, loss_sit = True, True
    for _ in range(8):
        d_stand = max(0.0, raw_stand - (half if loss_stand else 0.0))
        d_sit = max(0.0, raw_sit - (half if loss_sit else 0.0))
        slide_front = d_sit + leg * dcos_f  # front foot travels during sit
        slide_rear = d_stand + (leg / 2.0) * dcos_r
        new_stand = slide_front >= pitch - 1e-12
        new_sit = slide_rear >= pitch - 1e-12
        if (new_stand, new_sit) == (loss_stand, loss_sit):
            break
        loss_stand, loss_sit = new_stand, new_sit
    d_stand = max(0.0, raw_stand - (half if loss_stand else 0.0))
    d_sit = max(0.0, raw_sit - (half if loss_sit else 0.0))
    return d_stand + d_sit, bf_top, bf_bot


def sweep_period(scenario: Scenario, periods) -> list[tuple[float, float]]:
    """Average speed at each actuation period.

    Each point reruns the scenario with period T, duration 6T, dt T/200.
    """
    out = []
    for period in periods:
        if not (0.5 <= period <= 20.0):
            raise OutOfRangeError("period", period, 0.5, 20.0)
        sc = replace(
            scenario,
            signal=replace(scenario.signal, period=period),
            duration=6.0 * period,
            dt=period / 200.0,
        )
        out.append((period, run(sc).average_speed))
    return out


@dataclass(frozen=True)
class FeasibilityReport:
    """Outcome of a confined navigation attempt."""

    mask_used: str
    feasible: bool
    all_legs_feasible: bool
    min_gap_m: float
    max_height_m: float
    predicted_cycle_advance_m: float
    width_required_m: float
    width_available_m: float


def _mask_width(scenario: Scenario) -> float:
    """Worst-case lateral extent of the scenario's gait."""
    if scenario.mask_name() == "all":
        # the all-leg gait sits flat every cycle, its widest posture
        return gait_width(scenario.robot, 0.0)
    return drag_width(scenario.robot)


def _progress_gap_requirement(scenario: Scenario) -> float:
    """Smallest ceiling gap at which the scenario's gait still advances."""
    lo = scenario.robot.height_offset + 1e-9
    hi = standing_height(scenario.robot.leg.leg_length, BETA_MAX,
                         scenario.robot.height_offset)

    def advances(gap):
        sc = replace(scenario, terrain=replace(scenario.terrain,
                                               ceiling=((-math.inf, math.inf, gap),)))
        return steady_cycle_displacement(sc)[0] > 1e-12

    if not advances(hi):
        return math.inf
    if advances(lo):
        return lo
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if advances(mid):
            hi = mid
        else:
            lo = mid
    return hi


def navigate_confined(scenario: Scenario) -> tuple[SimTrace, FeasibilityReport]:
    """Run a scenario with ceiling/tunnel limits and report feasibility.

    Raises InfeasibleConfinementError when the scenario's own leg mask
    cannot fit (height or width) or cannot make forward progress under
    the confinement.
    """
    ter = scenario.terrain
    if not ter.confined:
        raise ValidationError("navigate_confined needs a ceiling or tunnel")
    min_gap = ter.min_gap()
    offset = scenario.robot.height_offset
    if min_gap < offset:
        raise InfeasibleConfinementError(
            "gap below the fully-flat body height",
            required_mm=offset * 1e3, available_mm=min_gap * 1e3)

    width_need = _mask_width(scenario)
    width_have = ter.tunnel_width if ter.tunnel_width is not None else math.inf
    if width_need > width_have:
        raise InfeasibleConfinementError(
            f"leg mask {scenario.mask_name()!r} too wide for the tunnel",
            required_mm=width_need * 1e3, available_mm=width_have * 1e3)

    d_cycle, _, _ = steady_cycle_displacement(scenario)
    if d_cycle <= 1e-12:
        need = _progress_gap_requirement(scenario)
        raise InfeasibleConfinementError(
            f"{scenario.mask_name()} gait makes no progress under this ceiling",
            required_mm=need * 1e3, available_mm=min_gap * 1e3)

    trace = run(scenario)

    all_sc = replace(scenario, signal=replace(scenario.signal, mask=(True, True)))
    all_ok = (_mask_width(all_sc) <= width_have
              and steady_cycle_displacement(all_sc)[0] > 1e-12)

    report = FeasibilityReport(
        mask_used=scenario.mask_name(),
        feasible=True,
        all_legs_feasible=all_ok,
        min_gap_m=min_gap,
        max_height_m=float(np.max(trace.height)),
        predicted_cycle_advance_m=d_cycle,
        width_required_m=width_need,
        width_available_m=width_have,
    )
    return trace, report


# Share of a lone leg's sink felt by the braced stance: the splayed rear
# pair mutually braces into an A-frame and sinks about a quarter as much
# as an isolated leg, so the body tracks roughly half the lone-leg sink.
BRACE_SHARE = 2.0

# A stance "stands" if the body drops by less than this fraction of the
# nominal height under load.
STANCE_DROP_FRAC = 0.10


@dataclass(frozen=True)
class StaticLoadResult:
    stands: bool
    height_drop: float  # m
    front_leg_sink: float  # m
    drop_limit: float  # m


def static_load_check(current: float, load_mass: float, robot: RobotParams,
                      table: CalibrationTable) -> StaticLoadResult:
    """Can the stiffened stance statically hold the body plus a payload?

    Each leg is a clamped bead-chain cantilever at the deploy tilt; body
    weight plus payload splits across the three legs and loads each tip
    transverse to its axis. A lone leg's tip deflection maps to a vertical
    sink; the braced stance drops by that sink over BRACE_SHARE, and it
    stands while the drop stays within 10% of the nominal height. The drop
    is absolute (not payload-relative): a stance too soft to carry its own
    body already counts as collapsed.
    """
    if load_mass < 0.0:
        raise OutOfRangeError("load_mass", load_mass, 0.0, math.inf)
    flex = FlexuralModel.from_current(current, table, robot.leg)
    tilt = math.radians(robot.leg_tilt_deploy)

    force = (robot.body_mass + load_mass) * 9.81 / robot.n_legs
    transverse = force * math.cos(tilt)
    res = equilibrium_shape(
        robot.leg, flex,
        LoadCase(gravity=0.0,
                 point_loads=((robot.leg.n_beads, 0.0, -transverse),)),
        boundary="clamped",
    )
    nodes = node_positions(res.shape, robot.leg.bead_thickness)
    sink = -float(nodes[-1, 1]) * math.cos(tilt)

    drop = sink / BRACE_SHARE
    limit = STANCE_DROP_FRAC * robot.freestanding_height
    return StaticLoadResult(stands=drop <= limit, height_drop=drop,
                            front_leg_sink=sink, drop_limit=limit)
