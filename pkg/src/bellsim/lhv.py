"""Local-hidden-variable strategies and the mismatch inequality they obey.

A strategy consists of a distribution over a hidden polarization angle
``lambda`` (set at the source, shared by both photons of a pair) and a
per-station response rule mapping ``(own filter angle, lambda)`` to a
transmission probability. Locality is structural: neither rule ever sees the
other station's filter.

Mismatch probabilities are evaluated two ways:

* exactly, by integrating over the lambda law -- a closed piecewise sum when
  both responses declare their jump locations, adaptive Simpson otherwise;
* empirically, by seeded Monte Carlo trials (one lambda per pair, then an
  independent auxiliary variate per station).

``bell_triple`` checks the constraint M(-a, a) <= M(-a, 0) + M(0, a). For
any strategy in which both stations share one response rule, the constraint
is a pointwise triangle inequality in lambda and can never fail;
``cfd_enumeration_bound`` establishes the same bound for every theory that
assigns one definite outcome per setting, by brute-force enumeration.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._parallel import map_trial_chunks
from .angles import canonical_angle
from .polarization import Outcome
from .quadrature import QuadratureNotConverged, adaptive_simpson
from .rng import SplitMix64, uniform_matrix

__all__ = [
    "LAMBDA_BINS",
    "UnknownStrategy",
    "StrategyFileError",
    "HiddenVariable",
    "ResponseRule",
    "LocalStrategy",
    "StrategyEvaluation",
    "BellTriple",
    "builtin_strategy",
    "BUILTIN_STRATEGIES",
    "random_strategy",
    "exact_mismatch",
    "evaluate_mismatch",
    "run_lhv_trials",
    "sample_lhv_outcomes",
    "run_single_trial",
    "bell_triple",
    "cfd_enumeration_bound",
    "strategy_from_file",
    "strategy_from_dict",
    "strategy_to_dict",
]

# Histogram resolution for binned lambda laws and table responses: 360 bins
# of 0.5 degrees over [0, 180).
LAMBDA_BINS = 360
_BIN_WIDTH = 180.0 / LAMBDA_BINS

# Slack when judging the inequality at exact-quadrature level.
BELL_TOLERANCE = 1e-9


class UnknownStrategy(ValueError):
    """No built-in strategy with the requested name."""


class StrategyFileError(ValueError):
    """A strategy definition file is missing, unreadable, or malformed."""


@dataclass(frozen=True)
class HiddenVariable:
    """One station's view of a trial: shared angle plus a private variate.

    ``lambda_deg`` canonicalizes to [0, 180). ``aux`` feeds stochastic
    responses: the station transmits iff ``aux < response probability``.
    """

    lambda_deg: float
    aux: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "lambda_deg", canonical_angle(self.lambda_deg))


@dataclass(frozen=True)
class ResponseRule:
    """Station rule giving P(transmit) as a function of (filter, lambda).

    Rules are rotation covariant: they depend on ``lambda - filter`` only.
    ``kind`` is one of:

    * ``"nearest-axis"`` -- transmit iff the filter is within 45 degrees of
      lambda on the 180-periodic circle (the exact-45 tie absorbs);
    * ``"malus-stochastic"`` -- transmit with probability cos^2(filter - lambda);
    * ``"table"`` -- piecewise-constant probabilities over the LAMBDA_BINS
      grid of ``lambda - filter``.
    """

    kind: str
    table: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("nearest-axis", "malus-stochastic", "table"):
            raise ValueError(f"unknown response kind {self.kind!r}")
        if self.kind == "table":
            t = np.asarray(self.table, dtype=np.float64).reshape(LAMBDA_BINS).copy()
            if t.min() < 0.0 or t.max() > 1.0:
                raise ValueError("table probabilities must lie in [0, 1]")
            t.flags.writeable = False
            object.__setattr__(self, "table", t)
        elif self.table is not None:
            raise ValueError(f"{self.kind} takes no table")

    @property
    def deterministic(self) -> bool:
        if self.kind == "nearest-axis":
            return True
        if self.kind == "malus-stochastic":
            return False
        return bool(np.all((self.table == 0.0) | (self.table == 1.0)))

    def prob(self, filter_deg: float, lambda_deg):
        """P(transmit); ``lambda_deg`` may be a scalar or an ndarray."""
        lam = np.asarray(lambda_deg, dtype=np.float64)
        rel = (lam - filter_deg) % 180.0
        if self.kind == "nearest-axis":
            d = np.minimum(rel, 180.0 - rel)
            out = (d < 45.0).astype(np.float64)
        elif self.kind == "malus-stochastic":
            out = np.cos(np.radians(rel)) ** 2
        else:
            idx = np.minimum((rel / _BIN_WIDTH).astype(np.int64), LAMBDA_BINS - 1)
            out = self.table[idx]
        return out if out.ndim else float(out)

    def breakpoints(self, filter_deg: float) -> np.ndarray | None:
        """Lambda values in [0, 180) where ``prob`` may jump; None if smooth."""
        if self.kind == "nearest-axis":
            return np.sort(
                np.array([(filter_deg - 45.0) % 180.0, (filter_deg + 45.0) % 180.0])
            )
        if self.kind == "table":
            return np.sort((filter_deg + np.arange(LAMBDA_BINS) * _BIN_WIDTH) % 180.0)
        return None

    def to_json_obj(self):
        return self.kind if self.table is None else [float(v) for v in self.table]


@dataclass(frozen=True)
class LocalStrategy:
    """Hidden-variable law plus one response rule per station.

    ``lambda_weights`` is None for the uniform law on [0, 180), or
    LAMBDA_BINS histogram weights (normalized on construction).
    """

    name: str
    response1: ResponseRule
    response2: ResponseRule
    lambda_weights: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.lambda_weights is not None:
            w = np.asarray(self.lambda_weights, dtype=np.float64).reshape(LAMBDA_BINS).copy()
            if w.min() < 0.0:
                raise ValueError("lambda weights must be non-negative")
            total = w.sum()
            if total <= 0.0:
                raise ValueError("lambda weights must not all vanish")
            w /= total
            w.flags.writeable = False
            object.__setattr__(self, "lambda_weights", w)

    @property
    def deterministic(self) -> bool:
        return self.response1.deterministic and self.response2.deterministic

    def sample_lambda(self, u) -> np.ndarray:
        """Map uniforms in [0, 1) to lambda draws via the inverse CDF."""
        u = np.asarray(u, dtype=np.float64)
        if self.lambda_weights is None:
            return u * 180.0
        cdf = np.cumsum(self.lambda_weights)
        idx = np.minimum(np.searchsorted(cdf, u, side="right"), LAMBDA_BINS - 1)
        prev = np.where(idx > 0, cdf[idx - 1], 0.0)
        w = self.lambda_weights[idx]
        frac = np.clip(np.divide(u - prev, w, out=np.zeros_like(u), where=w > 0), 0.0, 1.0 - 1e-12)
        return (idx + frac) * _BIN_WIDTH

    def _density_edges(self) -> np.ndarray:
        if self.lambda_weights is None:
            return np.array([0.0, 180.0])
        return np.arange(LAMBDA_BINS + 1) * _BIN_WIDTH

    def density(self, lambda_deg) -> np.ndarray:
        """Probability density of the lambda law at ``lambda_deg``."""
        lam = np.asarray(lambda_deg, dtype=np.float64)
        if self.lambda_weights is None:
            return np.full(lam.shape, 1.0 / 180.0) if lam.ndim else 1.0 / 180.0
        idx = np.minimum((lam / _BIN_WIDTH).astype(np.int64), LAMBDA_BINS - 1)
        out = self.lambda_weights[idx] / _BIN_WIDTH
        return out if out.ndim else float(out)


_NEAREST_AXIS = "nearest-axis"
_MALUS = "malus-stochastic"
BUILTIN_STRATEGIES = (_NEAREST_AXIS, _MALUS)


def builtin_strategy(name: str) -> LocalStrategy:
    """Built-in strategies, both with a uniform shared lambda.

    ``nearest-axis`` is the deterministic classic: transmit iff the filter
    sits within 45 degrees of the hidden polarization. Its exact mismatch is
    linear in the angle gap: 2*delta/180 for delta up to 90. ``malus-
    stochastic`` responds with the cos^2 law; it reproduces single-station
    statistics but fails equal-angle perfect correlation (mismatch 1/4).
    """
    if name not in BUILTIN_STRATEGIES:
        raise UnknownStrategy(
            f"unknown strategy {name!r}; built-ins are {', '.join(BUILTIN_STRATEGIES)}"
        )
    rule = ResponseRule(name)
    return LocalStrategy(name=name, response1=rule, response2=rule)


def random_strategy(seed: int) -> LocalStrategy:
    """Seeded random strategy for sweeping the local-strategy space.

    Both stations share one random table rule (deterministic 0/1 tables and
    stochastic ones in equal measure), over either a uniform or a random
    binned lambda law. The shared rule matters: it is what makes the
    equal-angle mismatch vanish for the deterministic case, which is the
    premise under which the mismatch inequality is derived. Rule pairs that
    differ between stations can void that premise (and the bound) while
    remaining perfectly local.
    """
    rng = np.random.default_rng(seed)
    if rng.integers(2) == 0:
        table = rng.integers(0, 2, size=LAMBDA_BINS).astype(np.float64)
    else:
        table = rng.uniform(0.0, 1.0, size=LAMBDA_BINS)
    rule = ResponseRule("table", table)
    weights = None if rng.integers(2) == 0 else rng.uniform(0.0, 1.0, size=LAMBDA_BINS)
    return LocalStrategy(
        name=f"random-{seed}", response1=rule, response2=rule, lambda_weights=weights
    )


@dataclass(frozen=True)
class StrategyEvaluation:
    mismatch: float
    method: str  # "exact-quadrature" | "monte-carlo"
    trials_or_nodes: int


def _merged_edges(strategy: LocalStrategy, bps: list[np.ndarray]) -> np.ndarray:
    parts = [strategy._density_edges(), np.array([0.0, 180.0])]
    parts.extend(bps)
    return np.unique(np.concatenate(parts))


def _mismatch_integrand(strategy: LocalStrategy, theta1: float, theta2: float):
    def m(lam):
        p1 = strategy.response1.prob(theta1, lam)
        p2 = strategy.response2.prob(theta2, lam)
        return p1 * (1.0 - p2) + (1.0 - p1) * p2

    return m


def evaluate_mismatch(
    strategy: LocalStrategy,
    theta1_deg: float,
    theta2_deg: float,
    tol: float = 1e-9,
) -> StrategyEvaluation:
    """Exact P(outcomes differ) for a filter pair, integrating over lambda.

    When both response rules expose their jump locations the integrand is
    piecewise constant and the integral is summed in closed form; otherwise
    each smooth segment goes to adaptive Simpson with the tolerance budget
    split proportionally to segment length.
    """
    m = _mismatch_integrand(strategy, theta1_deg, theta2_deg)
    bp1 = strategy.response1.breakpoints(theta1_deg)
    bp2 = strategy.response2.breakpoints(theta2_deg)
    if bp1 is not None and bp2 is not None:
        edges = _merged_edges(strategy, [bp1, bp2])
        widths = np.diff(edges)
        mids = 0.5 * (edges[:-1] + edges[1:])
        total = float(np.sum(m(mids) * strategy.density(mids) * widths))
        return StrategyEvaluation(total, "exact-quadrature", len(widths))

    known = [bp for bp in (bp1, bp2) if bp is not None]
    edges = _merged_edges(strategy, known)
    total = 0.0
    nodes = 0
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi - lo <= 0.0:
            continue
        seg_tol = tol * (hi - lo) / 180.0
        dens = strategy.density(0.5 * (lo + hi))
        value, n = adaptive_simpson(lambda x: float(m(x)) * dens, lo, hi, seg_tol)
        total += value
        nodes += n
    return StrategyEvaluation(total, "exact-quadrature", nodes)


def exact_mismatch(
    strategy: LocalStrategy, theta1_deg: float, theta2_deg: float, tol: float = 1e-9
) -> float:
    return evaluate_mismatch(strategy, theta1_deg, theta2_deg, tol).mismatch


def sample_lhv_outcomes(
    strategy: LocalStrategy,
    theta1_deg: float,
    theta2_deg: float,
    n: int,
    seed: int,
    workers: int | None = 1,
) -> tuple[np.ndarray, np.ndarray]:
    """Boolean outcome arrays under the strategy (True = transmitted).

    Trial ``i`` consumes three uniforms of the stream derived from
    ``(seed, i)``: the shared lambda draw, then one auxiliary variate per
    station, evaluated independently given lambda.
    """
    if n < 1:
        raise ValueError(f"need at least one trial, got {n}")

    def chunk(start: int, count: int) -> tuple[np.ndarray, np.ndarray]:
        u = uniform_matrix(seed, start, count, 3)
        lam = strategy.sample_lambda(u[:, 0])
        o1 = u[:, 1] < strategy.response1.prob(theta1_deg, lam)
        o2 = u[:, 2] < strategy.response2.prob(theta2_deg, lam)
        return o1, o2

    return map_trial_chunks(chunk, n, workers)


def run_single_trial(
    strategy: LocalStrategy, theta1_deg: float, theta2_deg: float, stream: SplitMix64
) -> tuple[Outcome, Outcome]:
    """Scalar counterpart of ``sample_lhv_outcomes`` for one stream."""
    lam = float(strategy.sample_lambda(stream.uniform()))
    hv1 = HiddenVariable(lam, stream.uniform())
    hv2 = HiddenVariable(lam, stream.uniform())
    o1 = hv1.aux < strategy.response1.prob(theta1_deg, hv1.lambda_deg)
    o2 = hv2.aux < strategy.response2.prob(theta2_deg, hv2.lambda_deg)
    t, a = Outcome.TRANSMITTED, Outcome.ABSORBED
    return (t if o1 else a, t if o2 else a)


def run_lhv_trials(
    strategy: LocalStrategy,
    theta1_deg: float,
    theta2_deg: float,
    n: int,
    seed: int,
    workers: int | None = 1,
) -> int:
    """Number of mismatched pairs over ``n`` seeded trials."""
    o1, o2 = sample_lhv_outcomes(strategy, theta1_deg, theta2_deg, n, seed, workers)
    return int(np.count_nonzero(o1 != o2))


@dataclass(frozen=True)
class BellTriple:
    """Exact mismatches of the three-filter configuration and the verdict."""

    m_left: float   # M(-alpha, 0)
    m_right: float  # M(0, alpha)
    m_wide: float   # M(-alpha, alpha)
    satisfied: bool


def bell_triple(strategy: LocalStrategy, alpha_deg: float) -> BellTriple:
    """Evaluate M(-a, a) <= M(-a, 0) + M(0, a) at exact-quadrature level."""
    m_left = exact_mismatch(strategy, -alpha_deg, 0.0)
    m_right = exact_mismatch(strategy, 0.0, alpha_deg)
    m_wide = exact_mismatch(strategy, -alpha_deg, alpha_deg)
    return BellTriple(m_left, m_right, m_wide, m_wide <= m_left + m_right + BELL_TOLERANCE)


def cfd_enumeration_bound(n_settings: int) -> bool:
    """Exhaustively verify the mismatch bound for definite-outcome theories.

    Considers every assignment of one definite T/A outcome per filter setting
    (shared by both photons, as perfect equal-angle correlation requires) --
    all ``2**n_settings`` of them. For every assignment and every triple of
    settings (a, b, c), checks the per-trial indicator inequality
    ``mismatch(a, c) <= mismatch(a, b) + mismatch(b, c)``. Returns True iff
    no counterexample exists; mixtures of assignments, hence all theories
    with definite counterfactual outcomes, then obey the averaged bound.
    """
    if not 2 <= n_settings <= 20:
        raise ValueError(f"n_settings must be in [2, 20], got {n_settings}")
    n_assign = 1 << n_settings
    # bit k of each assignment = outcome at setting k (1 = transmitted)
    bits = (
        (np.arange(n_assign, dtype=np.uint32)[:, None] >> np.arange(n_settings)) & 1
    ).astype(bool)
    for a in range(n_settings):
        for b in range(a + 1, n_settings):
            for c in range(b + 1, n_settings):
                for mid, lo, hi in ((b, a, c), (a, b, c), (c, a, b)):
                    far = bits[:, lo] != bits[:, hi]
                    near1 = bits[:, lo] != bits[:, mid]
                    near2 = bits[:, mid] != bits[:, hi]
                    if np.any(far & ~near1 & ~near2):
                        return False
    return True


# --- strategy definition files -------------------------------------------

def _rule_from_json(obj, label: str) -> ResponseRule:
    if isinstance(obj, str):
        if obj not in BUILTIN_STRATEGIES:
            raise StrategyFileError(
                f"{label}: unknown formula id {obj!r}; expected one of {BUILTIN_STRATEGIES}"
            )
        return ResponseRule(obj)
    if isinstance(obj, list):
        if len(obj) != LAMBDA_BINS:
            raise StrategyFileError(f"{label}: table must have {LAMBDA_BINS} entries")
        try:
            return ResponseRule("table", np.asarray(obj, dtype=np.float64))
        except (ValueError, TypeError) as exc:
            raise StrategyFileError(f"{label}: {exc}") from exc
    raise StrategyFileError(f"{label}: expected a formula id or a table of numbers")


def strategy_from_dict(data: dict) -> LocalStrategy:
    if not isinstance(data, dict):
        raise StrategyFileError("strategy definition must be a JSON object")
    name = data.get("name")
    if not isinstance(name, str) or not name:
        raise StrategyFileError("strategy needs a non-empty string 'name'")
    bins = data.get("lambda_bins")
    weights = None
    if bins is not None:
        if not isinstance(bins, list) or len(bins) != LAMBDA_BINS:
            raise StrategyFileError(f"lambda_bins must be a list of {LAMBDA_BINS} weights")
        weights = np.asarray(bins, dtype=np.float64)
    try:
        strategy = LocalStrategy(
            name=name,
            response1=_rule_from_json(data.get("response1"), "response1"),
            response2=_rule_from_json(data.get("response2"), "response2"),
            lambda_weights=weights,
        )
    except ValueError as exc:
        raise StrategyFileError(str(exc)) from exc
    return strategy


def strategy_to_dict(strategy: LocalStrategy) -> dict:
    return {
        "name": strategy.name,
        "lambda_bins": None
        if strategy.lambda_weights is None
        else [float(w) for w in strategy.lambda_weights],
        "response1": strategy.response1.to_json_obj(),
        "response2": strategy.response2.to_json_obj(),
    }


def strategy_from_file(path: str | Path) -> LocalStrategy:
    try:
        raw = Path(path).read_text()
    except OSError as exc:
        raise StrategyFileError(f"cannot read strategy file {path}: {exc}") from exc
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise StrategyFileError(f"invalid JSON in {path}: {exc}") from exc
    return strategy_from_dict(data)
