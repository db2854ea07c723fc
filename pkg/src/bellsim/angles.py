"""Angle conventions and degree-based trigonometry.

All public interfaces speak degrees. A polarizing filter at ``theta`` and at
``theta + 180`` is physically the same filter, so filter angles canonicalize
to [0, 180). The labeling convention is x = 0 degrees = horizontal; it has no
observable consequence.

``cos_deg``/``sin_deg`` return exact values at multiples of 90 degrees. The
branch engine and the projection algebra rely on this: perpendicular
configurations must yield amplitudes that are exactly 0.0, not 1e-17, so that
zero-probability branches can be pruned without a tolerance knob.
"""

from __future__ import annotations

import math

__all__ = [
    "canonical_angle",
    "angular_distance",
    "cos_deg",
    "sin_deg",
]


def canonical_angle(theta_deg: float) -> float:
    """Reduce a filter angle to the canonical range [0, 180)."""
    return float(theta_deg) % 180.0


def angular_distance(a_deg: float, b_deg: float) -> float:
    """Distance between two filter orientations on the 180-periodic circle.

    Result lies in [0, 90].
    """
    d = abs(a_deg - b_deg) % 180.0
    return min(d, 180.0 - d)


def cos_deg(theta_deg: float) -> float:
    """cos(theta), theta in degrees, exact at multiples of 90."""
    r = math.fmod(theta_deg, 360.0)
    a = abs(r)
    if a == 0.0 or a == 360.0:
        return 1.0
    if a == 180.0:
        return -1.0
    if a == 90.0 or a == 270.0:
        return 0.0
    return math.cos(math.radians(theta_deg))


def sin_deg(theta_deg: float) -> float:
    """sin(theta), theta in degrees, exact at multiples of 90."""
    r = math.fmod(theta_deg, 360.0)
    a = abs(r)
    if a == 0.0 or a == 180.0 or a == 360.0:
        return 0.0
    if r == 90.0 or r == -270.0:
        return 1.0
    if r == -90.0 or r == 270.0:
        return -1.0
    return math.sin(math.radians(theta_deg))
