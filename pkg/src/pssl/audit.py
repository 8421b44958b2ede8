"""Black-box privacy auditing on discrete outcome spaces.

A mechanism is run many times on each side of a neighboring pair. For an
event F, the privacy inequality ``P1(F) <= e^eps P2(F) + delta`` gives the
witness ``ln((P1(F) - delta) / P2(F))``. The estimator plugs in a
Clopper-Pearson lower bound for ``P1(F)`` and upper bound for ``P2(F)``, scans
singleton events (or every event when there are at most 12 outcomes), and
symmetrizes over the pair order. The result is a lower-bound witness on the
true epsilon; it never proves privacy.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Hashable

import numpy as np
from scipy.stats import beta as beta_dist

from .concepts import Concept, ConceptClass
from .data import PartiallyLabeledDatabase
from .errors import DomainError, ResourceError
from .learners import BaseLearner, label_boost_procedure
from .mechanisms import Mechanism, PrivacyParams, Stage, compose_declared_privacy
from .rng import derive_seed, make_rng

MAX_SUBSET_OUTCOMES = 12


@dataclass(frozen=True)
class NeighborPair:
    d1: Any
    d2: Any
    diff_index: int


def neighbors(D: Any, index: int, replacement: Any) -> NeighborPair:
    """``(D, D with record index replaced)``."""
    if not 0 <= index < len(D):
        raise DomainError(f"record index {index} outside [0, {len(D)})")
    if isinstance(D, PartiallyLabeledDatabase):
        return NeighborPair(D, D.with_record(index, replacement), index)
    if isinstance(D, np.ndarray):
        D2 = D.copy()
        D2[index] = replacement
        return NeighborPair(D, D2, index)
    D2 = list(D)
    D2[index] = replacement
    return NeighborPair(D, type(D)(D2) if isinstance(D, tuple) else D2, index)


def clopper_pearson(k: int, n: int, confidence: float = 0.95) -> tuple[float, float]:
    """Two-sided exact binomial interval for ``k`` successes in ``n`` trials."""
    a = 1.0 - confidence
    lo = 0.0 if k == 0 else float(beta_dist.ppf(a / 2, k, n - k + 1))
    hi = 1.0 if k == n else float(beta_dist.ppf(1 - a / 2, k + 1, n - k))
    return lo, hi


def outcome_key(outcome: Hashable) -> str:
    if isinstance(outcome, Concept):
        return f"{outcome.class_id}#{outcome.index}"
    return repr(outcome)


@dataclass
class AuditReport:
    epsilon_hat: float
    delta: float
    trials: int
    counts1: dict
    counts2: dict
    confidence: tuple[str, float]
    seed: int | None = None
    mechanism: str = ""
    pair_id: str = ""
    #: plug-in (no interval) value on the maximizing event
    epsilon_point: float = 0.0
    #: maximizing event, as a tuple of outcome keys, and the order (1 or 2 on top)
    witness: tuple = ()
    witness_direction: int = 1
    declared: PrivacyParams | None = None
    extra: dict = field(default_factory=dict)

    @property
    def slack(self) -> float:
        """Width of the interval adjustment on the maximizing event."""
        if math.isinf(self.epsilon_point) or math.isinf(self.epsilon_hat):
            return 0.0
        return max(0.0, self.epsilon_point - self.epsilon_hat)

    def to_json(self) -> dict:
        return {
            "mechanism": self.mechanism,
            "pair_id": self.pair_id,
            "epsilon_hat": _num(self.epsilon_hat),
            "epsilon_point": _num(self.epsilon_point),
            "delta": self.delta,
            "trials": self.trials,
            "seed": self.seed,
            "confidence": {"method": self.confidence[0], "level": self.confidence[1]},
            "witness": list(self.witness),
            "witness_direction": self.witness_direction,
            "declared": None if self.declared is None else self.declared.to_json(),
            "counts1": self.counts1,
            "counts2": self.counts2,
            **self.extra,
        }

    def csv_row(self) -> list:
        return [self.mechanism, self.pair_id, _num(self.epsilon_hat), _num(self.epsilon_point),
                self.confidence[0], self.confidence[1], self.trials, self.seed]


def _num(x: float):
    return "inf" if math.isinf(x) else x


def _log_ratio(num: float, den: float) -> float:
    if num <= 0:
        return -math.inf
    if den <= 0:
        return math.inf
    return math.log(num / den)


def _events(keys: list, mode: str) -> list[tuple[int, ...]]:
    k = len(keys)
    if mode == "singleton":
        return [(i,) for i in range(k)]
    if mode == "subset":
        if k > MAX_SUBSET_OUTCOMES:
            raise ResourceError(f"subset scan over {k} outcomes exceeds {MAX_SUBSET_OUTCOMES}; coarsen the outcomes")
        return [tuple(i for i in range(k) if mask >> i & 1) for mask in range(1, 2**k - 1)]
    raise DomainError(f"unknown event scan {mode!r}")


def epsilon_from_counts(
    counts1: dict,
    counts2: dict,
    delta: float = 0.0,
    confidence: float | None = 0.95,
    events: str = "singleton",
) -> tuple[float, float, tuple, int]:
    """``(eps_hat, eps_point, witness_event, direction)`` from two outcome histograms.

    ``confidence=None`` uses raw frequencies. A zero denominator with a
    positive numerator gives ``inf``.
    """
    n1, n2 = sum(counts1.values()), sum(counts2.values())
    if n1 == 0 or n2 == 0:
        raise DomainError("empty histogram")
    keys = sorted(set(counts1) | set(counts2))
    best = (-math.inf, -math.inf, (), 1)
    for ev in _events(keys, events):
        ev_keys = tuple(keys[i] for i in ev)
        k1 = sum(counts1.get(key, 0) for key in ev_keys)
        k2 = sum(counts2.get(key, 0) for key in ev_keys)
        for direction, (ka, na, kb, nb) in ((1, (k1, n1, k2, n2)), (2, (k2, n2, k1, n1))):
            point = _log_ratio(ka / na - delta, kb / nb)
            if confidence is None:
                adj = point
            else:
                lo, _ = clopper_pearson(ka, na, confidence)
                _, hi = clopper_pearson(kb, nb, confidence)
                adj = _log_ratio(lo - delta, hi)
            if adj > best[0] or (adj == best[0] and point > best[1]):
                best = (adj, point, ev_keys, direction)
    eps_hat, point, witness, direction = best
    return max(0.0, eps_hat), max(0.0, point), witness, direction


def sample_outcomes(M: Mechanism, database: Any, trials: int, rng: np.random.Generator) -> Counter:
    counts: Counter = Counter()
    for _ in range(trials):
        counts[outcome_key(M.run(database, rng))] += 1
    return counts


def estimate_epsilon(
    M: Mechanism,
    pair: NeighborPair,
    delta: float,
    trials: int,
    seed: int,
    *,
    confidence: float | None = 0.95,
    events: str = "singleton",
    coupled: bool = False,
    pair_id: str = "",
    min_trials: int = 1000,
) -> AuditReport:
    """Audit ``M`` on ``pair``. ``coupled=True`` drives both sides with the same random stream."""
    if trials < min_trials:
        raise DomainError(f"audit needs at least {min_trials} trials")
    s1 = derive_seed(seed, 1)
    s2 = s1 if coupled else derive_seed(seed, 2)
    c1 = sample_outcomes(M, pair.d1, trials, make_rng(s1))
    c2 = sample_outcomes(M, pair.d2, trials, make_rng(s2))
    return report_from_counts(c1, c2, delta, trials, seed, confidence, events, M.name, pair_id, M.privacy)


def report_from_counts(c1, c2, delta, trials, seed, confidence, events, name, pair_id, declared) -> AuditReport:
    eps_hat, point, witness, direction = epsilon_from_counts(c1, c2, delta, confidence, events)
    method = ("clopper-pearson", confidence) if confidence is not None else ("plug-in", 1.0)
    return AuditReport(
        eps_hat, delta, trials, dict(sorted(c1.items())), dict(sorted(c2.items())), method,
        seed=seed, mechanism=name, pair_id=pair_id, epsilon_point=point,
        witness=witness, witness_direction=direction, declared=declared,
    )


# -- reference mechanisms -----------------------------------------------------


def randomized_response(epsilon: float) -> Mechanism:
    """Report the single input bit, flipped with probability ``1 / (1 + e^eps)``."""
    flip = 1.0 / (1.0 + math.exp(epsilon))

    def run(database, rng):
        bit = int(np.asarray(database).reshape(-1)[0])
        return bit ^ int(rng.random() < flip)

    return Mechanism(f"randomized_response(eps={epsilon:g})", PrivacyParams(epsilon, 0.0), run, input_size=1)


def constant_mechanism(value: Hashable = 0) -> Mechanism:
    return Mechanism("constant", PrivacyParams(0.0, 0.0), lambda db, rng: value)


def procedure_then_base(cls: ConceptClass, base: BaseLearner) -> Mechanism:
    """Relabel ``S o T`` then run ``base`` on the whole relabeled database."""

    def run(db: PartiallyLabeledDatabase, rng):
        out = label_boost_procedure(db, cls, rng).database
        return base.fit(out.points, out.labels, rng)

    stages = (Stage("base", base.privacy.epsilon, base.privacy.delta), Stage("label_boost_procedure"))
    return Mechanism(f"procedure+{base.name}", compose_declared_privacy(stages), run, stages=stages)


def audit_lemma_composition(
    cls: ConceptClass,
    base: BaseLearner,
    pair: NeighborPair,
    trials: int,
    seed: int,
    *,
    coupled: bool = False,
    **kwargs,
) -> AuditReport:
    """Audit relabel-then-base; declared ``(eps + 3, 4 e delta)`` for an ``(eps, delta)`` base."""
    M = procedure_then_base(cls, base)
    return estimate_epsilon(M, pair, M.privacy.delta, trials, seed, coupled=coupled, **kwargs)


def histograms_identical(M: Mechanism, pair: NeighborPair, trials: int, seed: int) -> bool:
    """Seed-coupled runs on both sides agree outcome by outcome."""
    r1, r2 = make_rng(derive_seed(seed, 1)), make_rng(derive_seed(seed, 1))
    return all(
        outcome_key(M.run(pair.d1, r1)) == outcome_key(M.run(pair.d2, r2)) for _ in range(trials)
    )
