"""Collapse-interpretation Monte Carlo: measure, collapse both photons, measure.

The first-measured photon's outcome is drawn from its marginal; the state
then collapses for both photons at once, and the second outcome is drawn from
the conditional distribution of the collapsed state. Which station measures
first is a configuration knob with no statistical effect (a tested
invariant), mirroring the fact that the ordering of spacelike-separated
events is frame-dependent.

Conditional probabilities are computed as ratios of joint-distribution
entries. This equals the collapsed state's own transmission probability (the
sequential-projection consistency tests pin the two routes together) and has
one useful exactness property: at equal filter angles the cross terms of the
joint distribution are exactly 0.0, so the conditional of a matching outcome
is exactly 1.0 and a mismatch can never be sampled.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from ._parallel import map_trial_chunks
from .polarization import Outcome, TwoPhotonState, joint_distribution
from .rng import SplitMix64, uniform_matrix

__all__ = [
    "MeasurementOrder",
    "TrialResult",
    "sequential_probabilities",
    "sample_pair",
    "run_trials",
    "marginal_distribution",
]


class MeasurementOrder(Enum):
    PHOTON_1_FIRST = "photon1-first"
    PHOTON_2_FIRST = "photon2-first"


@dataclass(frozen=True)
class TrialResult:
    outcome1: Outcome
    outcome2: Outcome

    @property
    def mismatch(self) -> bool:
        return self.outcome1 is not self.outcome2


def _ratio(num: float, den: float) -> float:
    return num / den if den > 0.0 else 0.0


def sequential_probabilities(
    state: TwoPhotonState,
    theta1_deg: float,
    theta2_deg: float,
    order: MeasurementOrder = MeasurementOrder.PHOTON_1_FIRST,
) -> tuple[float, float, float]:
    """Transmission probabilities for sequential measurement.

    Returns ``(p_first, p_second_if_T, p_second_if_A)``: the first-measured
    photon's P(T), and the second photon's P(T) conditioned on the first
    outcome.
    """
    jd = joint_distribution(state, theta1_deg, theta2_deg)
    if order is MeasurementOrder.PHOTON_1_FIRST:
        p_first = jd.tt + jd.ta
        return p_first, _ratio(jd.tt, jd.tt + jd.ta), _ratio(jd.at, jd.at + jd.aa)
    p_first = jd.tt + jd.at
    return p_first, _ratio(jd.tt, jd.tt + jd.at), _ratio(jd.ta, jd.ta + jd.aa)


def _to_outcomes(first_t: bool, second_t: bool, order: MeasurementOrder) -> TrialResult:
    t = Outcome.TRANSMITTED
    a = Outcome.ABSORBED
    if order is MeasurementOrder.PHOTON_1_FIRST:
        return TrialResult(t if first_t else a, t if second_t else a)
    return TrialResult(t if second_t else a, t if first_t else a)


def sample_pair(
    state: TwoPhotonState,
    theta1_deg: float,
    theta2_deg: float,
    order: MeasurementOrder,
    stream: SplitMix64,
) -> TrialResult:
    """One trial: two uniforms from ``stream``, outcome is T iff u < P(T)."""
    p_first, p_if_t, p_if_a = sequential_probabilities(state, theta1_deg, theta2_deg, order)
    first_t = stream.uniform() < p_first
    second_t = stream.uniform() < (p_if_t if first_t else p_if_a)
    return _to_outcomes(first_t, second_t, order)


def run_trials(
    state: TwoPhotonState,
    theta1_deg: float,
    theta2_deg: float,
    n: int,
    seed: int,
    order: MeasurementOrder = MeasurementOrder.PHOTON_1_FIRST,
    workers: int | None = 1,
) -> tuple[np.ndarray, np.ndarray]:
    """Boolean outcome arrays (True = transmitted) for stations 1 and 2.

    Trial ``i`` consumes the first two uniforms of the stream derived from
    ``(seed, i)``; the result is bit-identical to ``sample_pair`` on that
    stream and independent of ``workers``.
    """
    if n < 1:
        raise ValueError(f"need at least one trial, got {n}")
    p_first, p_if_t, p_if_a = sequential_probabilities(state, theta1_deg, theta2_deg, order)

    def chunk(start: int, count: int) -> tuple[np.ndarray, np.ndarray]:
        u = uniform_matrix(seed, start, count, 2)
        first_t = u[:, 0] < p_first
        second_t = u[:, 1] < np.where(first_t, p_if_t, p_if_a)
        return first_t, second_t

    first_t, second_t = map_trial_chunks(chunk, n, workers)
    if order is MeasurementOrder.PHOTON_1_FIRST:
        return first_t, second_t
    return second_t, first_t


def marginal_distribution(
    state: TwoPhotonState, photon: int, theta_own_deg: float, theta_other_deg: float
) -> float:
    """P(transmitted) for one station, summed over the other station's outcomes.

    For the twin state this is 1/2 regardless of either angle: the distant
    filter setting leaves the local marginal untouched, so no signal can be
    carried by it.
    """
    if photon == 1:
        jd = joint_distribution(state, theta_own_deg, theta_other_deg)
        return jd.tt + jd.ta
    if photon == 2:
        jd = joint_distribution(state, theta_other_deg, theta_own_deg)
        return jd.tt + jd.at
    raise ValueError(f"photon must be 1 or 2, got {photon!r}")
