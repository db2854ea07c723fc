"""Exact linear-polarization state algebra for one and two photons.

Conventions
-----------
* Amplitudes are real. Linear polarization only; no circular components.
* Single-photon basis: ``|x>`` (horizontal, 0 degrees) and ``|y>`` (vertical).
* Two-photon amplitudes are 4-vectors in the fixed order
  ``[xx, xy, yx, yy]`` (photon 1's basis letter first). Expansions in a
  rotated product basis use the analogous order ``[bb, b+, +b, ++]`` where
  ``+`` is the perpendicular direction ``basis + 90``.
* Angles are degrees everywhere; filter angles canonicalize to [0, 180).
* States must arrive normalized: a squared norm off by more than 1e-9 is
  rejected rather than silently renormalized, since a bad norm means an
  upstream bug.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .angles import canonical_angle, cos_deg, sin_deg

__all__ = [
    "NORM_REJECT_TOL",
    "PROB_FLOOR",
    "Outcome",
    "ZeroProbabilityOutcome",
    "SinglePhotonState",
    "TwoPhotonState",
    "JointDistribution",
    "linear_polarization",
    "product_state",
    "twin_state",
    "rotate_basis",
    "transmission_prob",
    "joint_distribution",
    "project",
    "expand_in_basis",
    "state_from_basis",
]

# Constructors reject norms further than this from 1.
NORM_REJECT_TOL = 1e-9
# Outcomes at or below this probability cannot be projected onto.
PROB_FLOOR = 1e-12


class Outcome(str, Enum):
    """Result of sending a photon through an ideal polarizing filter."""

    TRANSMITTED = "T"
    ABSORBED = "A"

    def __str__(self) -> str:  # render as the bare letter in tables
        return self.value


class ZeroProbabilityOutcome(ValueError):
    """Projection onto an outcome whose probability is <= PROB_FLOOR."""


def _check_norm(sq_norm: float, what: str) -> None:
    if abs(sq_norm - 1.0) > NORM_REJECT_TOL:
        raise ValueError(f"{what} is not normalized: squared norm = {sq_norm!r}")


@dataclass(frozen=True)
class SinglePhotonState:
    """One photon's linear-polarization amplitudes on ``|x>``, ``|y>``."""

    ax: float
    ay: float

    def __post_init__(self) -> None:
        _check_norm(self.ax * self.ax + self.ay * self.ay, "single-photon state")


@dataclass(frozen=True)
class TwoPhotonState:
    """Real amplitude 4-vector over the product basis ``[xx, xy, yx, yy]``."""

    amps: np.ndarray

    def __post_init__(self) -> None:
        a = np.asarray(self.amps, dtype=np.float64).reshape(4).copy()
        _check_norm(float(a @ a), "two-photon state")
        a.flags.writeable = False
        object.__setattr__(self, "amps", a)


@dataclass(frozen=True)
class JointDistribution:
    """Probabilities of the four joint filter outcomes (TT, TA, AT, AA)."""

    tt: float
    ta: float
    at: float
    aa: float

    def __post_init__(self) -> None:
        entries = (self.tt, self.ta, self.at, self.aa)
        if min(entries) < 0.0:
            raise ValueError(f"negative probability in {entries}")
        if abs(sum(entries) - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {sum(entries)!r}, not 1")

    @property
    def mismatch(self) -> float:
        """Probability the two stations record different outcomes."""
        return self.ta + self.at

    @property
    def coincidence(self) -> float:
        return self.tt + self.aa

    def as_array(self) -> np.ndarray:
        return np.array([self.tt, self.ta, self.at, self.aa])


def _ket(angle_deg: float) -> np.ndarray:
    """Unit vector of a linear polarization along ``angle_deg``."""
    return np.array([cos_deg(angle_deg), sin_deg(angle_deg)])


def _rotation(theta_deg: float) -> np.ndarray:
    """Basis-change matrix; rows project onto ``|theta>`` and ``|theta+90>``."""
    c, s = cos_deg(theta_deg), sin_deg(theta_deg)
    return np.array([[c, s], [-s, c]])


def linear_polarization(angle_deg: float) -> SinglePhotonState:
    """Single photon polarized along ``angle_deg``."""
    v = _ket(angle_deg)
    return SinglePhotonState(float(v[0]), float(v[1]))


def product_state(angle1_deg: float, angle2_deg: float) -> TwoPhotonState:
    """Unentangled pair: photon 1 along ``angle1_deg``, photon 2 along ``angle2_deg``."""
    return TwoPhotonState(np.kron(_ket(angle1_deg), _ket(angle2_deg)))


def twin_state() -> TwoPhotonState:
    """The isotropic twin state ``(|xx> + |yy>) / sqrt(2)``.

    Identical filter settings at the two stations always yield identical
    outcomes, whatever the common angle: the state keeps the same form in
    every rotated basis.
    """
    r = 1.0 / math.sqrt(2.0)
    return TwoPhotonState(np.array([r, 0.0, 0.0, r]))


def rotate_basis(state: TwoPhotonState, theta_deg: float) -> TwoPhotonState:
    """Express ``state`` in the frame rotated counterclockwise by ``theta_deg``.

    Both photons' axes rotate together. The physical state is unchanged;
    only the amplitude components move. Norm is preserved.
    """
    m = np.kron(_rotation(theta_deg), _rotation(theta_deg))
    return TwoPhotonState(m @ state.amps)


def transmission_prob(state: SinglePhotonState, filter_deg: float) -> float:
    """Born-rule probability that ``state`` passes a filter at ``filter_deg``.

    The amplitude along the filter axis is ``ax*cos + ay*sin``; the
    probability is its square.
    """
    amp = state.ax * cos_deg(filter_deg) + state.ay * sin_deg(filter_deg)
    return amp * amp


def joint_distribution(
    state: TwoPhotonState, theta1_deg: float, theta2_deg: float
) -> JointDistribution:
    """Joint outcome probabilities with filters at ``theta1_deg``/``theta2_deg``.

    Projects onto the four product outcomes ``{|t1>, |t1+90>} x {|t2>,
    |t2+90>}``. For the twin state the coincidence ``P(TT) + P(AA)`` equals
    ``cos^2(theta2 - theta1)``.
    """
    m = np.kron(_rotation(theta1_deg), _rotation(theta2_deg))
    p = (m @ state.amps) ** 2
    return JointDistribution(float(p[0]), float(p[1]), float(p[2]), float(p[3]))


def project(
    state: TwoPhotonState, photon: int, filter_deg: float, outcome: Outcome
) -> TwoPhotonState:
    """Normalized post-measurement state after one photon meets its filter.

    ``photon`` is 1 or 2. Transmission projects that photon onto the filter
    axis, absorption onto the perpendicular axis. Raises
    ZeroProbabilityOutcome if the requested outcome has probability <=
    PROB_FLOOR in ``state``.
    """
    if photon not in (1, 2):
        raise ValueError(f"photon must be 1 or 2, got {photon!r}")
    axis = filter_deg if outcome is Outcome.TRANSMITTED else filter_deg + 90.0
    v = _ket(axis)
    p_op = np.outer(v, v)
    eye = np.eye(2)
    op = np.kron(p_op, eye) if photon == 1 else np.kron(eye, p_op)
    new = op @ state.amps
    prob = float(new @ new)
    if prob <= PROB_FLOOR:
        raise ZeroProbabilityOutcome(
            f"outcome {outcome.value} at {filter_deg} deg on photon {photon} "
            f"has probability {prob:.3e}"
        )
    return TwoPhotonState(new / math.sqrt(prob))


def expand_in_basis(state: TwoPhotonState, basis_deg: float) -> np.ndarray:
    """Amplitudes of ``state`` on the rotated product basis at ``basis_deg``.

    Index order ``[bb, b+, +b, ++]`` with ``+`` the direction ``basis + 90``.
    The basis angle canonicalizes to [0, 180); the basis kets are built from
    the canonical angle, which fixes all amplitude signs.
    """
    b = canonical_angle(basis_deg)
    m = np.kron(_rotation(b), _rotation(b))
    return m @ state.amps


def state_from_basis(amps4: np.ndarray, basis_deg: float) -> TwoPhotonState:
    """Reassemble the state whose expansion at ``basis_deg`` is ``amps4``."""
    b = canonical_angle(basis_deg)
    m = np.kron(_rotation(b), _rotation(b))
    return TwoPhotonState(m.T @ np.asarray(amps4, dtype=np.float64))
