"""Exponential mechanism and the privacy-amplification wrappers.

Mechanisms carry their declared privacy as metadata only. Nothing here
enforces it; the ``audit`` module is how a declaration gets checked.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Sequence

import numpy as np

from .data import UNLABELED, PartiallyLabeledDatabase
from .errors import DomainError
from .rng import make_rng

LN_244 = math.log(244.0)
IID_DELTA_FACTOR = 2467.0
LABEL_BOOST_DELTA_FACTOR = 41.0


@dataclass(frozen=True)
class PrivacyParams:
    """``(epsilon, delta)``; ``delta == 0`` is pure DP.

    Folded declarations can push delta to 1 or beyond, at which point the
    guarantee is vacuous; such values are kept (and flagged) rather than
    rejected so a fold can still be reported.
    """

    epsilon: float
    delta: float = 0.0

    def __post_init__(self):
        if not self.epsilon >= 0 or math.isnan(self.epsilon):
            raise DomainError(f"epsilon must be nonnegative, got {self.epsilon}")
        if not self.delta >= 0:
            raise DomainError(f"delta must be nonnegative, got {self.delta}")

    @property
    def pure(self) -> bool:
        return self.delta == 0

    @property
    def vacuous(self) -> bool:
        return self.delta >= 1

    def to_json(self) -> dict:
        return {"epsilon": self.epsilon, "delta": self.delta}


# -- exponential mechanism ----------------------------------------------------


def agreement_scores(rows: np.ndarray, points: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """``q(S, h) = |{i : h(x_i) = y_i}|`` for every candidate row of a truth table.

    ``rows`` has one 0/1 row per candidate over the whole domain. Unlabeled
    records are ignored. Changing one record moves every score by at most 1.
    """
    points = np.asarray(points, dtype=np.int64)
    labels = np.asarray(labels)
    keep = labels != UNLABELED
    points, labels = points[keep], labels[keep].astype(np.int64)
    n_points = rows.shape[1]
    ones = np.bincount(points[labels == 1], minlength=n_points)
    zeros = np.bincount(points[labels == 0], minlength=n_points)
    return int(zeros.sum()) + rows.astype(np.int64) @ (ones - zeros)


def softmax_probabilities(epsilon: float, scores: Sequence[float] | np.ndarray) -> np.ndarray:
    """``exp(eps*q/2) / sum exp(eps*q/2)``, shifted by the max score."""
    logits = 0.5 * epsilon * np.asarray(scores, dtype=np.float64)
    w = np.exp(logits - logits.max())
    return w / w.sum()


def _check_em(epsilon: float, scores: np.ndarray) -> None:
    if scores.size == 0:
        raise DomainError("exponential mechanism over an empty candidate set")
    if not epsilon > 0:
        raise DomainError("exponential mechanism needs epsilon > 0")


def exponential_mechanism(
    epsilon: float,
    scores: Sequence[float] | np.ndarray,
    rng: np.random.Generator | int,
    sampler: str = "gumbel",
) -> int:
    """Index ``i`` drawn with probability proportional to ``exp(eps * scores[i] / 2)``.

    ``sampler="gumbel"`` takes the argmax of Gumbel-perturbed logits;
    ``sampler="cumsum"`` inverts the normalised cumulative weights in log
    space. Both draw the same distribution.
    """
    scores = np.asarray(scores, dtype=np.float64)
    _check_em(epsilon, scores)
    rng = make_rng(rng)
    logits = 0.5 * epsilon * scores
    if sampler == "gumbel":
        return int(np.argmax(logits + rng.gumbel(size=logits.size)))
    if sampler == "cumsum":
        shifted = logits - logits.max()
        log_norm = np.log(np.exp(shifted).sum())
        cdf = np.cumsum(np.exp(shifted - log_norm))
        u = rng.random() * cdf[-1]
        return int(min(np.searchsorted(cdf, u, side="right"), scores.size - 1))
    raise DomainError(f"unknown sampler {sampler!r}")


def exponential_mechanism_batch(
    epsilon: float,
    scores: Sequence[float] | np.ndarray,
    rng: np.random.Generator | int,
    size: int,
    sampler: str = "gumbel",
    chunk: int = 1 << 15,
) -> np.ndarray:
    """``size`` independent draws for a fixed score vector."""
    scores = np.asarray(scores, dtype=np.float64)
    _check_em(epsilon, scores)
    rng = make_rng(rng)
    logits = 0.5 * epsilon * scores
    out = np.empty(size, dtype=np.int64)
    if sampler == "gumbel":
        for lo in range(0, size, chunk):
            k = min(chunk, size - lo)
            out[lo:lo + k] = np.argmax(logits[None, :] + rng.gumbel(size=(k, logits.size)), axis=1)
        return out
    if sampler == "cumsum":
        shifted = logits - logits.max()
        cdf = np.cumsum(np.exp(shifted - np.log(np.exp(shifted).sum())))
        u = rng.random(size) * cdf[-1]
        return np.minimum(np.searchsorted(cdf, u, side="right"), scores.size - 1)
    raise DomainError(f"unknown sampler {sampler!r}")


def select_hypothesis(
    epsilon: float,
    candidates: np.ndarray,
    table: np.ndarray,
    points: np.ndarray,
    labels: np.ndarray,
    rng: np.random.Generator | int,
) -> int:
    """Exponential mechanism over concept indices ``candidates`` with the agreement score."""
    candidates = np.asarray(candidates, dtype=np.int64)
    if candidates.size == 0:
        raise DomainError("exponential mechanism over an empty candidate set")
    scores = agreement_scores(table[candidates], points, labels)
    return int(candidates[exponential_mechanism(epsilon, scores, rng)])


def utility_bound_check(h_size: int, epsilon: float, m: int, gap: float) -> float:
    """``min(1, |H| * exp(-eps * gap * m / 2))``: chance of picking a hypothesis ``gap`` worse than the best."""
    if h_size < 1 or epsilon < 0 or m < 0 or gap < 0:
        raise DomainError("utility bound needs nonnegative arguments and |H| >= 1")
    return min(1.0, h_size * math.exp(-epsilon * gap * m / 2.0))


# -- mechanisms and wrappers --------------------------------------------------


@dataclass(frozen=True)
class Stage:
    """One step of a declared-privacy fold; see ``compose_declared_privacy``."""

    rule: str
    epsilon: float | None = None
    delta: float | None = None

    def to_json(self) -> dict:
        out: dict[str, Any] = {"rule": self.rule}
        if self.epsilon is not None:
            out["epsilon"] = self.epsilon
        if self.delta is not None:
            out["delta"] = self.delta
        return out


@dataclass(frozen=True)
class Mechanism:
    """A randomized map ``(database, rng) -> hashable outcome`` with declared privacy."""

    name: str
    privacy: PrivacyParams
    run: Callable[[Any, np.random.Generator], Hashable]
    input_size: int | None = None
    stages: tuple[Stage, ...] = field(default=())

    def __call__(self, database: Any, rng: np.random.Generator | int) -> Hashable:
        return self.run(database, make_rng(rng))


def take_records(database: Any, idx: np.ndarray) -> Any:
    """Sub-database of ``database`` at positions ``idx`` (segmentation dropped)."""
    if isinstance(database, PartiallyLabeledDatabase):
        return PartiallyLabeledDatabase(database.points[idx], database.labels[idx])
    if isinstance(database, np.ndarray):
        return database[idx]
    return [database[int(i)] for i in idx]


def _near_ceil(x: float) -> int:
    # values that are integers up to float noise should not round up
    r = round(x)
    if abs(x - r) <= 1e-9 * max(1.0, abs(x)):
        return int(r)
    return math.ceil(x)


def subsample_size(n: int, eps_star: float, eps: float) -> int:
    """``ceil((n / eps) * (3 + e^eps_star))`` records feed a size-``n`` subsample."""
    if not 0 < eps <= 1:
        raise DomainError("subsampling needs 0 < eps <= 1")
    return _near_ceil(n / eps * (3.0 + math.exp(eps_star)))


def subsample_active_size(n: int, eps_star: float, eps: float) -> int:
    """``ceil((n / eps) * (3 + e^(2 eps_star)))``, the pool size of the active wrapper."""
    if not 0 < eps <= 1:
        raise DomainError("subsampling needs 0 < eps <= 1")
    return _near_ceil(n / eps * (3.0 + math.exp(2.0 * eps_star)))


def subsample_privacy(base: PrivacyParams, eps: float) -> PrivacyParams:
    return PrivacyParams(eps, 4.0 * eps * base.delta / (3.0 + math.exp(base.epsilon)))


def subsample_active_privacy(base: PrivacyParams, eps: float) -> PrivacyParams:
    factor = (7.0 + math.exp(base.epsilon)) / (3.0 + math.exp(2.0 * base.epsilon))
    return PrivacyParams(eps, factor * eps * base.delta)


def subsample_wrapper(A: Mechanism, n: int, eps: float, eps_star: float | None = None) -> Mechanism:
    """Run ``A`` on a random size-``n`` subset, in random order, of a ``t``-record input."""
    eps_star = A.privacy.epsilon if eps_star is None else eps_star
    base = PrivacyParams(eps_star, A.privacy.delta)
    t = subsample_size(n, eps_star, eps)

    def run(database: Any, rng: np.random.Generator) -> Hashable:
        if len(database) < t:
            raise DomainError(f"subsampling wrapper needs {t} records, got {len(database)}")
        idx = rng.permutation(len(database))[:n]
        return A.run(take_records(database, idx), rng)

    return Mechanism(
        f"subsample({A.name})",
        subsample_privacy(base, eps),
        run,
        input_size=t,
        stages=A.stages + (Stage("subsample", eps),),
    )


def iid_resample_wrapper(A: Mechanism) -> Mechanism:
    """Run ``A`` on ``n`` records drawn with replacement from the ``n``-record input."""
    if A.privacy.epsilon > 1:
        raise DomainError("i.i.d. resampling is declared only for base epsilon <= 1")

    def run(database: Any, rng: np.random.Generator) -> Hashable:
        n = len(database)
        return A.run(take_records(database, rng.integers(0, n, size=n)), rng)

    return Mechanism(
        f"iid_resample({A.name})",
        PrivacyParams(LN_244, IID_DELTA_FACTOR * A.privacy.delta),
        run,
        input_size=A.input_size,
        stages=A.stages + (Stage("iid_resample"),),
    )


def _apply(rule: Stage, p: PrivacyParams | None) -> PrivacyParams:
    if rule.rule == "base":
        if rule.epsilon is None:
            raise DomainError("a base stage needs epsilon")
        return PrivacyParams(rule.epsilon, rule.delta or 0.0)
    if p is None:
        raise DomainError(f"stage {rule.rule!r} needs a preceding base stage")
    if rule.rule == "label_boost_procedure":
        return PrivacyParams(p.epsilon + 3.0, 4.0 * math.e * p.delta)
    if rule.rule == "iid_resample":
        if p.epsilon > 1:
            raise DomainError("i.i.d. resampling is declared only for epsilon <= 1")
        return PrivacyParams(LN_244, IID_DELTA_FACTOR * p.delta)
    if rule.rule == "subsample":
        return subsample_privacy(p, _need_eps(rule))
    if rule.rule == "subsample_active":
        return subsample_active_privacy(p, _need_eps(rule))
    if rule.rule == "label_boost":
        if p.epsilon > 1:
            raise DomainError("LabelBoost is declared only for a base with epsilon <= 1")
        return PrivacyParams(1.0, LABEL_BOOST_DELTA_FACTOR * p.delta)
    raise DomainError(f"unknown privacy stage rule {rule.rule!r}")


def _need_eps(rule: Stage) -> float:
    if rule.epsilon is None:
        raise DomainError(f"stage {rule.rule!r} needs a target epsilon")
    return rule.epsilon


def compose_declared_privacy(
    stages: Sequence[Stage], initial: PrivacyParams | None = None
) -> PrivacyParams:
    """Fold declared ``(eps, delta)`` through ``stages`` in order.

    Rules: ``base`` (sets the starting pair), ``label_boost_procedure``
    (eps+3, 4e*delta), ``iid_resample`` (ln 244, 2467*delta), ``subsample``
    and ``subsample_active`` (target eps), ``label_boost`` (1, 41*delta).
    An empty list returns ``initial`` unchanged.
    """
    return fold_trace(stages, initial)[-1] if stages else (initial or PrivacyParams(0.0, 0.0))


def fold_trace(stages: Sequence[Stage], initial: PrivacyParams | None = None) -> list[PrivacyParams]:
    """Every intermediate value of the fold (empty for an empty stage list)."""
    out = []
    p = initial
    for st in stages:
        p = _apply(st, p)
        out.append(p)
    return out
