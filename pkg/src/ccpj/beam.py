"""Variable-stiffness beam mechanics.

The bead chain is a discrete elastica: rigid segments (one per bead) joined
by torsional springs. Equilibrium is the minimum of

    E(theta) = 1/2 k sum(theta_j^2) + sum_i m_i g y(center_i)
               - sum_k F_k . p(node_k) + 1/2 sum_s K_s (y_s - rest_s)^2

over the joint angles (plus the base rotation when the base is pinned
instead of clamped). The solver is damped Newton with an analytic gradient
and Hessian, Armijo backtracking, and a load-ramp restart for the heavy
droop regime where the straight initial guess is far from equilibrium.

The bridge from the bend-test apparent stiffness k_app (N/m) to the
elastica is the simply-supported center-load relation EI = k_app S^3 / 48;
each joint then gets torsional stiffness EI / segment_length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NoConvergenceError, OutOfRangeError, ValidationError
from .params import BeamParams, CalibrationTable, validate_table

GRAVITY = 9.81  # m/s^2

# Penalty stiffness standing in for rigid supports (roller, indentor).
# ~1e5 times the stiffest beam; series-compliance error ~1e-5.
SUPPORT_SPRING = 1e7  # N/m


def stiffness_at(current: float, table: CalibrationTable) -> float:
    """Apparent bending stiffness (N/m) at a current, by linear interpolation.

    Exact at table knots. No extrapolation: currents outside the table
    range raise OutOfRangeError.
    """
    validate_table(table)
    cur = np.asarray(table.currents)
    if current < cur[0] - 1e-12 or current > cur[-1] + 1e-12:
        raise OutOfRangeError("current_a", current, cur[0], cur[-1])
    return float(np.interp(current, cur, np.asarray(table.stiffnesses)))


def ei_from_apparent(k_app: float, span: float) -> float:
    """Flexural rigidity EI (N m^2) from bend-test stiffness over a span.

    Simply-supported center load: deflection = F S^3 / (48 EI), so
    EI = k_app S^3 / 48.
    """
    if k_app <= 0.0:
        raise OutOfRangeError("k_app", k_app, 0.0, math.inf)
    if span <= 0.0:
        raise OutOfRangeError("span", span, 0.0, math.inf)
    return k_app * span**3 / 48.0


@dataclass(frozen=True)
class FlexuralModel:
    """Effective flexural rigidity and the per-joint torsional stiffness.

    joint_stiffness is EI / segment_length by construction, which keeps the
    discrete chain's bending response consistent with the continuum EI.
    """

    ei: float  # N m^2
    segment_length: float  # m

    def __post_init__(self):
        if self.ei <= 0.0:
            raise OutOfRangeError("ei", self.ei, 0.0, math.inf)
        if self.segment_length <= 0.0:
            raise OutOfRangeError("segment_length", self.segment_length, 0.0, math.inf)

    @property
    def joint_stiffness(self) -> float:
        """Torsional stiffness per joint (N m / rad)."""
        return self.ei / self.segment_length

    @classmethod
    def from_current(
        cls, current: float, table: CalibrationTable, params: BeamParams
    ) -> "FlexuralModel":
        k_app = stiffness_at(current, table)
        ei = ei_from_apparent(k_app, params.span_3pb)
        return cls(ei=ei, segment_length=params.bead_thickness)


@dataclass(frozen=True)
class BeamShape:
    """Discrete beam configuration: relative joint angles plus base pose."""

    joint_angles: tuple[float, ...]
    base_position: tuple[float, float] = (0.0, 0.0)
    base_orientation: float = 0.0  # rad

    def __post_init__(self):
        for i, th in enumerate(self.joint_angles):
            if not (abs(th) < math.pi):
                raise OutOfRangeError(f"joint_angle[{i}]", th, -math.pi, math.pi)

    @property
    def n_segments(self) -> int:
        return len(self.joint_angles) + 1

    def is_straight(self) -> bool:
        return all(th == 0.0 for th in self.joint_angles)


def node_positions(shape: BeamShape, segment_length: float) -> np.ndarray:
    """(n_segments+1, 2) array of node coordinates, base node first."""
    theta = np.asarray(shape.joint_angles, dtype=float)
    phi = shape.base_orientation + np.concatenate(([0.0], np.cumsum(theta)))
    steps = segment_length * np.stack([np.cos(phi), np.sin(phi)], axis=1)
    nodes = np.zeros((len(phi) + 1, 2))
    nodes[0] = shape.base_position
    nodes[1:] = shape.base_position + np.cumsum(steps, axis=0)
    return nodes


def max_chord_deviation(shape: BeamShape, segment_length: float) -> float:
    """Max perpendicular node distance (m) from the base-to-tip chord.

    Measures how bent the beam is, independent of any rigid rotation of the
    whole chain. Degenerate chords (tip on top of base, a fully curled
    chain) fall back to the max distance from the base point.
    """
    nodes = node_positions(shape, segment_length)
    chord = nodes[-1] - nodes[0]
    norm = float(np.hypot(*chord))
    rel = nodes - nodes[0]
    if norm < 1e-9:
        return float(np.max(np.hypot(rel[:, 0], rel[:, 1])))
    cross = rel[:, 0] * chord[1] - rel[:, 1] * chord[0]
    return float(np.max(np.abs(cross)) / norm)


def is_deployed(shape: BeamShape, params: BeamParams, tol_frac: float = 0.02) -> bool:
    """True iff the shape deviates from straight by < tol_frac * leg length."""
    if tol_frac <= 0.0:
        raise OutOfRangeError("tol_frac", tol_frac, 0.0, math.inf)
    return max_chord_deviation(shape, params.bead_thickness) < tol_frac * params.leg_length


def shape_to_csv(shape: BeamShape, segment_length: float) -> str:
    """Node coordinates as CSV text: arc_length_m, x_m, y_m."""
    nodes = node_positions(shape, segment_length)
    lines = ["arc_length_m,x_m,y_m"]
    for i, (x, y) in enumerate(nodes):
        lines.append(f"{i * segment_length:.9f},{x:.9f},{y:.9f}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class LoadCase:
    """Loads on the chain: gravity plus constant point forces at nodes."""

    gravity: float = GRAVITY  # m/s^2, 0 disables self-weight
    point_loads: tuple[tuple[int, float, float], ...] = ()  # (node, fx, fy) N


@dataclass(frozen=True)
class EquilibriumResult:
    shape: BeamShape
    energy: float
    grad_norm: float
    iterations: int
    energy_history: tuple[float, ...] = field(repr=False, default=())


class _EnergyModel:
    """Energy, gradient, and Hessian of the discrete elastica.

    DOF layout: [base rotation (pinned only)] + joint angles. Every DOF d
    is a rotation about a pivot node; it moves all material downstream of
    that pivot. For a constant world force F at point r the contributions
    are grad_d = -(r - q_d) x F and hess_dl = F . (r - q_m) with q_m the
    downstream-most of the two pivots. Support springs add a rank-1 term
    on top of the same geometric curvature.
    """

    def __init__(self, n_seg, seg_len, kappa, masses, gravity,
                 point_loads, springs, pinned, base_orientation=0.0):
        self.n_seg = n_seg
        self.seg_len = seg_len
        self.kappa = kappa
        self.masses = np.asarray(masses, dtype=float)  # one per segment
        self.gravity = gravity
        self.point_loads = tuple(point_loads)
        self.springs = tuple(springs)  # (node, k, rest_y)
        self.pinned = pinned
        self.base_orientation = base_orientation
        self.n_joint = n_seg - 1
        self.n_dof = self.n_joint + (1 if pinned else 0)
        # pivot node of each DOF: base rotation pivots at node 0,
        # joint j at node j+1
        if pinned:
            self.pivot = np.concatenate(([0], np.arange(1, n_seg)))
        else:
            self.pivot = np.arange(1, n_seg)
        self._joint_slice = slice(1, None) if pinned else slice(0, None)

    def unpack(self, x):
        if self.pinned:
            return x[0] + self.base_orientation, x[1:]
        return self.base_orientation, x

    def geometry(self, x):
        phi0, theta = self.unpack(x)
        phi = phi0 + np.concatenate(([0.0], np.cumsum(theta)))
        steps = self.seg_len * np.stack([np.cos(phi), np.sin(phi)], axis=1)
        nodes = np.zeros((self.n_seg + 1, 2))
        nodes[1:] = np.cumsum(steps, axis=0)
        centers = 0.5 * (nodes[:-1] + nodes[1:])
        return theta, nodes, centers

    def _material_points(self, nodes, centers):
        """Positions, forces, and pivot-cutoff arc index of every load point.

        A point with cutoff c is moved by DOF d iff pivot[d] <= c.
        """
        pts = [centers]
        forces = [np.stack([np.zeros(self.n_seg),
                            -self.masses * self.gravity], axis=1)]
        cuts = [np.arange(self.n_seg)]
        if self.point_loads:
            idx = np.array([p[0] for p in self.point_loads])
            pts.append(nodes[idx])
            forces.append(np.array([[p[1], p[2]] for p in self.point_loads]))
            cuts.append(idx - 1)
        return np.concatenate(pts), np.concatenate(forces), np.concatenate(cuts)

    def energy(self, x):
        theta, nodes, centers = self.geometry(x)
        e = 0.5 * self.kappa * float(np.dot(theta, theta))
        e += self.gravity * float(np.dot(self.masses, centers[:, 1]))
        for node, fx, fy in self.point_loads:
            e -= fx * nodes[node, 0] + fy * nodes[node, 1]
        for node, ks, rest in self.springs:
            e += 0.5 * ks * (nodes[node, 1] - rest) ** 2
        return e

    def energy_grad_hess(self, x, want_hess=True):
        theta, nodes, centers = self.geometry(x)
        e = self.energy(x)
        grad = np.zeros(self.n_dof)
        grad[self._joint_slice] += self.kappa * theta

        pts, forces, cuts = self._material_points(nodes, centers)
        q = nodes[self.pivot]  # (n_dof, 2) pivot positions
        # affected[d, k]: DOF d moves point k
        affected = self.pivot[:, None] <= cuts[None, :]
        rx = pts[None, :, 0] - q[:, None, 0]
        ry = pts[None, :, 1] - q[:, None, 1]
        torque = rx * forces[None, :, 1] - ry * forces[None, :, 0]
        grad -= np.sum(np.where(affected, torque, 0.0), axis=1)

        # springs enter the gradient as state-dependent vertical forces
        spring_jac = []
        for node, ks, rest in self.springs:
            dy = nodes[node, 1] - rest
            cut = node - 1
            moved = self.pivot <= cut
            jac = np.where(moved, nodes[node, 0] - q[:, 0], 0.0)
            grad += ks * dy * jac
            spring_jac.append((node, ks, dy, cut, moved, jac))

        if not want_hess:
            return e, grad, None

        hess = np.zeros((self.n_dof, self.n_dof))
        hess[self._joint_slice, self._joint_slice] += self.kappa * np.eye(self.n_joint)
        # geometric curvature of constant forces: H_dl = F . (r - q_max(d,l));
        # pivots are arc-ordered, so only the downstream-most pivot matters
        # and the whole block collapses to a per-pivot sum.
        fdotr = np.where(affected,
                         (pts[None, :, 0] - q[:, None, 0]) * forces[None, :, 0]
                         + (pts[None, :, 1] - q[:, None, 1]) * forces[None, :, 1],
                         0.0).sum(axis=1)
        order = np.maximum.outer(np.arange(self.n_dof), np.arange(self.n_dof))
        hess += fdotr[order]
        for node, ks, dy, cut, moved, jac in spring_jac:
            hess += ks * np.outer(jac, jac)
            # moved[] is a prefix along the arc-ordered pivots, so indexing
            # the zeroed curvature by max(d,l) masks both-moved for free
            curv = np.where(moved, -(nodes[node, 1] - q[:, 1]), 0.0) * (ks * dy)
            hess += curv[order]
        return e, grad, hess


def _minimize(model: _EnergyModel, x0: np.ndarray, tol_grad: float,
              max_iters: int) -> tuple[np.ndarray, list[float], float, int]:
    """Damped Newton with Armijo backtracking. Returns (x, history, |g|, it)."""
    x = x0.copy()
    e, grad, hess = model.energy_grad_hess(x)
    history = [e]
    gnorm = float(np.max(np.abs(grad))) if grad.size else 0.0
    for it in range(1, max_iters + 1):
        if gnorm < tol_grad:
            return x, history, gnorm, it - 1
        # damp until the (possibly indefinite) Hessian factorizes
        mu = 0.0
        scale = max(1e-12, float(np.max(np.abs(np.diag(hess)))))
        for _ in range(60):
            try:
                l_fac = np.linalg.cholesky(hess + mu * np.eye(model.n_dof))
                break
            except np.linalg.LinAlgError:
                mu = max(2.0 * mu, 1e-10 * scale)
                mu *= 8.0
        else:
            l_fac = None
        if l_fac is not None:
            p = -np.linalg.solve(hess + mu * np.eye(model.n_dof), grad)
        else:
            p = -grad
        slope = float(np.dot(grad, p))
        if slope >= 0.0:  # not a descent direction, fall back
            p = -grad
            slope = -float(np.dot(grad, grad))
        t = 1.0
        accepted = False
        for _ in range(50):
            e_new = model.energy(x + t * p)
            if e_new <= e + 1e-4 * t * slope:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            break
        x = x + t * p
        e, grad, hess = model.energy_grad_hess(x)
        history.append(e)
        gnorm = float(np.max(np.abs(grad))) if grad.size else 0.0
    if gnorm < tol_grad:
        return x, history, gnorm, max_iters
    raise NoConvergenceError("elastica solve", x, gnorm, len(history) - 1)


def _solve(model: _EnergyModel, x0: np.ndarray, tol_grad: float, max_iters: int):
    """Solve, restarting with a gravity/load ramp if the direct attempt fails."""
    try:
        return _minimize(model, x0, tol_grad, max_iters)
    except NoConvergenceError:
        pass
    x = x0.copy()
    history_all: list[float] = []
    full = (model.gravity, model.point_loads)
    try:
        for frac in (0.25, 0.5, 0.75, 1.0):
            model.gravity = full[0] * frac
            model.point_loads = tuple(
                (n, fx * frac, fy * frac) for n, fx, fy in full[1]
            )
            x, hist, gnorm, its = _minimize(model, x, tol_grad, max_iters)
            history_all.extend(hist)
    finally:
        model.gravity, model.point_loads = full
    return x, history_all, gnorm, len(history_all)


def equilibrium_shape(
    params: BeamParams,
    flex: FlexuralModel,
    load: LoadCase | None = None,
    boundary: str = "clamped",
    initial: BeamShape | None = None,
    tol_grad: float = 1e-9,
    max_iters: int = 400,
) -> EquilibriumResult:
    """Minimum-energy configuration of the bead chain under load.

    boundary "clamped" fixes the first bead's orientation at the base pose;
    "simply-supported" pins the base node but leaves its rotation free and
    rests the far end on a stiff vertical support. The returned shape is a
    local energy minimum with max |dE/dtheta| < tol_grad, and its energy
    never exceeds the initial guess's.

    Pass the previous solution as `initial` when sweeping current: warm
    starts keep the solver on one deterministic branch.

    Raises
    ------
    NoConvergenceError
        Budget exhausted; carries the last iterate and gradient norm.
    """
    if load is None:
        load = LoadCase()
    for node, _, _ in load.point_loads:
        if not (0 <= node <= params.n_beads):
            raise ValidationError(f"point load node {node} outside 0..{params.n_beads}")
    n_seg = params.n_beads
    masses = np.full(n_seg, params.beam_mass / n_seg)
    pinned = boundary == "simply-supported"
    if boundary not in ("clamped", "simply-supported"):
        raise ValidationError(f"unknown boundary {boundary!r}")
    springs = []
    if pinned:
        springs.append((n_seg, SUPPORT_SPRING, 0.0))
    model = _EnergyModel(
        n_seg=n_seg,
        seg_len=params.bead_thickness,
        kappa=flex.ei / params.bead_thickness,
        masses=masses,
        gravity=load.gravity,
        point_loads=load.point_loads,
        springs=springs,
        pinned=pinned,
    )
    if initial is not None:
        x0 = np.asarray(initial.joint_angles, dtype=float)
        if pinned:
            x0 = np.concatenate(([initial.base_orientation], x0))
    else:
        x0 = np.zeros(model.n_dof)
    x, history, gnorm, its = _solve(model, x0, tol_grad, max_iters)
    phi0, theta = model.unpack(x)
    shape = BeamShape(
        joint_angles=tuple(float(t) for t in theta),
        base_orientation=float(phi0) if pinned else 0.0,
    )
    return EquilibriumResult(
        shape=shape,
        energy=float(model.energy(x)),
        grad_norm=gnorm,
        iterations=its,
        energy_history=tuple(history),
    )


# Bend-test discretization: segments close to the physical bead pitch
# across the 40 mm span, even so a center node exists.
N_SEG_3PB = 14


def three_point_bend(
    params: BeamParams,
    flex: FlexuralModel,
    indentation: float,
    max_iters: int = 400,
) -> float:
    """Center reaction force (N) at a prescribed indentation of the bend test.

    Simply supported at the test span: pinned at one support, stiff
    vertical spring at the other (a roller that lets the chord shorten).
    The indentor is a third stiff spring driven to the target depth; its
    force is the readout. Gravity is off, matching a force reading zeroed
    at contact: the slope, not the offset, is the measurement.
    """
    if not (0.0 <= indentation <= 4e-3 + 1e-12):
        raise OutOfRangeError("indentation", indentation, 0.0, 4e-3)
    n_seg = N_SEG_3PB
    seg_len = params.span_3pb / n_seg
    center = n_seg // 2
    model = _EnergyModel(
        n_seg=n_seg,
        seg_len=seg_len,
        kappa=flex.ei / seg_len,
        masses=np.zeros(n_seg),
        gravity=0.0,
        point_loads=(),
        springs=[
            (n_seg, SUPPORT_SPRING, 0.0),
            (center, SUPPORT_SPRING, -indentation),
        ],
        pinned=True,
    )
    x, _, _, _ = _solve(model, np.zeros(model.n_dof), 1e-10, max_iters)
    _, nodes, _ = model.geometry(x)
    force = SUPPORT_SPRING * (nodes[center, 1] + indentation)
    return max(0.0, float(force))
