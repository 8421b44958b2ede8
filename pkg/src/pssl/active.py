"""Pool-based active learning: label oracle, query transcripts, and the
subsampling wrapper that turns a semi-supervised private learner into an
active one whose labeled cost does not depend on epsilon.

Indices are 0-based throughout.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable

import numpy as np

from .audit import AuditReport, outcome_key, report_from_counts
from .concepts import Concept
from .data import UNLABELED, PartiallyLabeledDatabase
from .errors import BudgetExceeded, DomainError, ProtocolError, ResourceError
from .learners import LearnerOutput
from .mechanisms import PrivacyParams, subsample_active_privacy, subsample_active_size
from .rng import derive_seed, make_rng

#: A semi-supervised learner: labeled and unlabeled records in, output out.
SSLearner = Callable[[PartiallyLabeledDatabase, np.random.Generator], LearnerOutput]
#: An active learner: ``(pool, query, rng) -> hypothesis``.
ActiveLearner = Callable[[np.ndarray, Callable[[int], int], np.random.Generator], Any]


class LabelOracle:
    """Answers label queries by pool index, up to a budget."""

    def __init__(self, labels: np.ndarray, budget: int):
        self._labels = np.asarray(labels, dtype=np.int64)
        if budget < 0:
            raise DomainError("budget must be nonnegative")
        self.budget = budget
        self.queries: list[int] = []

    @classmethod
    def for_concept(cls, target: Concept, pool: np.ndarray, budget: int) -> LabelOracle:
        return cls(target.labels(pool), budget)

    @property
    def count(self) -> int:
        return len(self.queries)

    def query(self, i: int) -> int:
        i = int(i)
        if not 0 <= i < self._labels.size:
            raise ProtocolError(f"query index {i} outside the pool [0, {self._labels.size})")
        if self.count >= self.budget:
            raise BudgetExceeded(f"label budget {self.budget} exhausted")
        self.queries.append(i)
        return int(self._labels[i])


@dataclass(frozen=True)
class Transcript:
    indices: tuple[int, ...] = ()

    def __len__(self) -> int:
        return len(self.indices)

    def to_json(self) -> dict:
        return {"queries": list(self.indices)}


def run_active(
    learner: ActiveLearner, pool: np.ndarray, oracle: LabelOracle, rng: np.random.Generator | int
) -> tuple[Any, Transcript]:
    """Run ``learner`` against ``oracle``; the transcript is every index it queried, in order."""
    pool = np.asarray(pool, dtype=np.int64)
    if pool.size == 0:
        raise DomainError("pool must be nonempty")
    start = oracle.count
    hypothesis = learner(pool, oracle.query, make_rng(rng))
    return hypothesis, Transcript(tuple(oracle.queries[start:]))


def prefix_learner(ssl: SSLearner, m: int) -> ActiveLearner:
    """Query indices ``0..m-1`` and hand the pool to ``ssl`` with that prefix labeled."""

    def learn(pool, query, rng):
        labels = np.full(pool.size, UNLABELED, dtype=np.int8)
        for i in range(min(m, pool.size)):
            labels[i] = query(i)
        return ssl(PartiallyLabeledDatabase(pool, labels), rng).hypothesis

    return learn


def first_positive_learner(pool, query, rng) -> int:
    """Scan the pool in order until a label-1 record; returns its index or -1."""
    for i in range(pool.size):
        try:
            if query(i) == 1:
                return i
        except BudgetExceeded:
            break
    return -1


@dataclass
class ActiveResult:
    hypothesis: Any
    transcript: Transcript
    privacy: PrivacyParams
    pool_size: int
    labeled_used: int
    inner: LearnerOutput | None = None
    info: dict = field(default_factory=dict)


def sub_sampling_active(
    A: SSLearner,
    A_privacy: PrivacyParams,
    n: int,
    m: int,
    epsilon: float,
    pool: np.ndarray,
    oracle: LabelOracle,
    rng: np.random.Generator | int,
) -> ActiveResult:
    """Active wrapper around a semi-supervised learner ``A`` on ``n`` records with ``m`` labeled.

    Picks a uniform ``J`` of size ``n`` among the first
    ``t = ceil((n/eps) * (3 + e^(2 eps*)))`` pool indices, queries the
    smallest ``m`` of them (``K``) and runs ``A`` with ``K`` labeled and
    ``J \\ K`` unlabeled. ``J`` never depends on the pool's contents.
    """
    rng = make_rng(rng)
    pool = np.asarray(pool, dtype=np.int64)
    if m > n:
        raise DomainError("labeled count m cannot exceed n")
    t = subsample_active_size(n, A_privacy.epsilon, epsilon)
    if pool.size < t:
        raise DomainError(f"active wrapper needs a pool of {t} points, got {pool.size}")
    J = np.sort(rng.permutation(t)[:n])
    K, rest = J[:m], J[m:]
    start = oracle.count
    labels = np.array([oracle.query(int(i)) for i in K], dtype=np.int8)
    db = PartiallyLabeledDatabase(
        np.concatenate([pool[K], pool[rest]]),
        np.concatenate([labels, np.full(rest.size, UNLABELED, dtype=np.int8)]),
    )
    out = A(db, rng)
    transcript = Transcript(tuple(oracle.queries[start:]))
    return ActiveResult(
        out.hypothesis,
        transcript,
        subsample_active_privacy(A_privacy, epsilon),
        pool_size=t,
        labeled_used=len(transcript),
        inner=out,
        info={"J": J.tolist()},
    )


def transcript_leak_probe(
    learner: ActiveLearner,
    pool: np.ndarray,
    labels1: np.ndarray,
    labels2: np.ndarray,
    budget: int,
    trials: int,
    seed: int,
    *,
    view: str = "joint",
    coarsen: Callable[[Hashable], Hashable] | None = None,
    max_outcomes: int = 4096,
    confidence: float | None = 0.95,
    events: str = "singleton",
) -> AuditReport:
    """Audit what an active learner reveals on two neighboring fully labeled pools.

    ``view`` selects the observed outcome: ``"joint"`` (hypothesis,
    transcript), ``"output"`` or ``"transcript"``.
    """
    if view not in ("joint", "output", "transcript"):
        raise DomainError(f"unknown view {view!r}")
    labels1 = np.asarray(labels1)
    labels2 = np.asarray(labels2)
    if labels1.shape != labels2.shape or int(np.count_nonzero(labels1 != labels2)) > 1:
        raise DomainError("pools must have equal length and differ in at most one label")

    def observe(labels, rng) -> Hashable:
        h, tr = run_active(learner, pool, LabelOracle(labels, budget), rng)
        key = {"joint": (outcome_key(h), tr.indices), "output": outcome_key(h), "transcript": tr.indices}[view]
        return coarsen(key) if coarsen is not None else key

    counts = []
    for side, labels in ((1, labels1), (2, labels2)):
        rng = make_rng(derive_seed(seed, side))
        c: Counter = Counter()
        for _ in range(trials):
            c[repr(observe(labels, rng))] += 1
            if len(c) > max_outcomes:
                raise ResourceError(f"more than {max_outcomes} distinct outcomes; pass a coarsening")
        counts.append(c)
    return report_from_counts(counts[0], counts[1], 0.0, trials, seed, confidence, events,
                              getattr(learner, "__name__", "active"), view, None)
