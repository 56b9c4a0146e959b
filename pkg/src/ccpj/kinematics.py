"""Closed-form stick-slip stroke kinematics and standing-height geometry.

The two-stroke crawl: legs soften and the body sits down (front leg slides
forward), then legs stiffen and the body stands up (rear legs slide
forward). With contact angles alpha (sat) and beta (stood) and leg length
L, the strokes advance the body by L(cos a - cos b)/2 and L(cos a - cos b),
so one full cycle covers 3L(cos a - cos b)/2.

Angles are radians everywhere in this module; degrees only at the CLI.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import OutOfRangeError, UnreachableError, ZeroDimensionError

# The tripod geometry cannot stand steeper than this.
BETA_MAX = math.radians(60.0)


@dataclass(frozen=True)
class StrokeGeometry:
    """Inputs of the stroke model: leg length L, angles alpha <= beta, period T."""

    leg_length: float  # m
    alpha: float  # rad, fully-sat contact angle
    beta: float  # rad, fully-stood contact angle
    period: float  # s

    def __post_init__(self):
        if self.leg_length <= 0.0:
            raise ZeroDimensionError("leg_length", self.leg_length)
        if self.period <= 0.0:
            raise ZeroDimensionError("period", self.period)
        if not (0.0 <= self.alpha <= self.beta <= BETA_MAX + 1e-12):
            raise OutOfRangeError("alpha..beta", self.beta, 0.0, BETA_MAX)


def sit_advance(g: StrokeGeometry) -> float:
    """Body advance (m) during the sit-down stroke: L(cos a - cos b)/2."""
    return g.leg_length * (math.cos(g.alpha) - math.cos(g.beta)) / 2.0


def stand_advance(g: StrokeGeometry) -> float:
    """Body advance (m) during the stand-up stroke: L(cos a - cos b).

    Always exactly twice sit_advance.
    """
    return g.leg_length * (math.cos(g.alpha) - math.cos(g.beta))


def cycle_speed(g: StrokeGeometry) -> float:
    """Average speed (m/s) of the ideal two-stroke cycle: 3L(cos a - cos b)/(2T)."""
    return 3.0 * g.leg_length * (math.cos(g.alpha) - math.cos(g.beta)) / (2.0 * g.period)


def invert_beta(v: float, leg_length: float, period: float, alpha: float = 0.0) -> float:
    """Recover the stood contact angle beta that yields average speed v.

    Inverts cycle_speed: cos(beta) = cos(alpha) - 2 v T / (3 L).

    Raises
    ------
    UnreachableError
        If v exceeds the speed at beta = 60 deg (the geometric ceiling).
    """
    if v < 0.0:
        raise OutOfRangeError("speed", v, 0.0, math.inf)
    v_max = cycle_speed(StrokeGeometry(leg_length, alpha, BETA_MAX, period))
    if v > v_max * (1.0 + 1e-12):
        raise UnreachableError("speed above the beta=60 deg limit", v, v_max)
    cos_beta = math.cos(alpha) - 2.0 * v * period / (3.0 * leg_length)
    return math.acos(min(1.0, max(-1.0, cos_beta)))


def standing_height(leg_length: float, beta: float, height_offset: float) -> float:
    """Body top height (m) when stood at angle beta: L sin(beta) + offset.

    The additive offset is the body's own vertical extent, calibrated so
    that the default geometry stands 63.5 mm tall at beta = 60 deg.
    """
    if not (0.0 <= beta <= BETA_MAX + 1e-12):
        raise OutOfRangeError("beta", beta, 0.0, BETA_MAX)
    return leg_length * math.sin(beta) + height_offset


def beta_for_height(height: float, leg_length: float, height_offset: float) -> float:
    """Inverse of standing_height: the beta that puts the body top at `height`.

    Heights at or below the offset return 0 (the robot cannot get lower);
    heights above the beta = 60 deg ceiling raise UnreachableError.
    """
    if height <= height_offset:
        if height < height_offset:
            raise UnreachableError(
                "height below the fully-flat minimum", height, height_offset
            )
        return 0.0
    s = (height - height_offset) / leg_length
    if s > math.sin(BETA_MAX) + 1e-12:
        raise UnreachableError(
            "height above the beta=60 deg maximum",
            height,
            standing_height(leg_length, BETA_MAX, height_offset),
        )
    return math.asin(min(1.0, s))
