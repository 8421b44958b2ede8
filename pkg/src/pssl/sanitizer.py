"""Private synthetic databases for counting queries.

The sanitizer picks a size-``mhat`` multiset over the domain with the
exponential mechanism. A candidate ``Dh`` is scored by how far its query
answers are from the input's, in integer form::

    dev(Dh) = max_c | #1(c, D) * mhat - #1(c, Dh) * |D| |
    score(Dh) = -dev(Dh) / mhat  =  -|D| * max_c |Q_c(D) - Q_c(Dh)|

Changing one record of ``D`` moves each ``#1(c, D)`` by at most one, so
``dev`` moves by at most ``mhat`` and ``score`` by at most 1.

Small candidate spaces are scored exhaustively. Larger ones fall back to a
Metropolis walk over multisets targeting the same distribution; the result is
then flagged as approximate.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import kernels
from .concepts import ConceptClass, Predicate, predict, vc_dimension
from .errors import DomainError, ResourceError
from .mechanisms import PrivacyParams, exponential_mechanism
from .rng import make_rng

log = logging.getLogger(__name__)

#: Largest candidate space scored exhaustively.
MAX_EXHAUSTIVE = 1_000_000
#: Hard cap on the walk length of the approximate sampler.
MAX_WALK_STEPS = 50_000_000


class SmallInputWarning(UserWarning):
    """Input database is below the size the accuracy guarantee asks for."""


@dataclass(frozen=True)
class SyntheticDatabase:
    points: np.ndarray  # sorted flat indices, length target_size
    target_size: int
    privacy: PrivacyParams
    approximate: bool
    candidates: int

    @property
    def counts(self) -> np.ndarray:
        return np.bincount(self.points, minlength=0)

    def support(self) -> np.ndarray:
        return np.unique(self.points)

    def to_json(self) -> dict:
        return {"points": self.points.tolist()}


def query_value(c: Predicate, D: np.ndarray) -> Fraction:
    """``Q_c(D)``: exact fraction of records of ``D`` satisfying ``c``."""
    D = np.asarray(D, dtype=np.int64)
    if D.size == 0:
        raise DomainError("query value of an empty database")
    return Fraction(int(np.count_nonzero(predict(c, D))), D.size)


def synthetic_size(vc: int, alpha: float, kappa: float = 1.0) -> int:
    """``ceil(kappa * vc / alpha^2 * ln(1/alpha))``, at least 1."""
    if not 0 < alpha < 1:
        raise DomainError("alpha must lie in (0, 1)")
    return max(1, math.ceil(kappa * vc / alpha**2 * math.log(1.0 / alpha)))


def input_size_needed(vc: int, domain_size: int, alpha: float, beta: float, epsilon: float) -> float:
    """Input size asked for by the accuracy guarantee, with every hidden constant set to 1."""
    return (
        math.log(domain_size) * vc * math.log(1.0 / alpha) / (alpha**3 * epsilon)
        + math.log(1.0 / beta) / (epsilon * alpha)
    )


def candidate_count(domain_size: int, mhat: int) -> int:
    """Number of size-``mhat`` multisets over the domain."""
    return math.comb(domain_size + mhat - 1, mhat)


@lru_cache(maxsize=4)
def _compositions(mhat: int, domain_size: int) -> np.ndarray:
    comps = kernels.compositions(mhat, domain_size)
    comps.setflags(write=False)
    return comps


def deviations(comps: np.ndarray, query_table: np.ndarray, D: np.ndarray) -> np.ndarray:
    """Integer ``dev`` (see module docstring) of every candidate count vector."""
    D = np.asarray(D, dtype=np.int64)
    mhat = int(comps[0].sum()) if comps.shape[0] else 0
    target = query_table[:, D].sum(axis=1).astype(np.int64)
    return kernels.max_count_deviation(comps, query_table, target, D.size, mhat)


def max_query_error(query_class: ConceptClass, D: np.ndarray, Dhat: np.ndarray) -> float:
    """``max_c |Q_c(D) - Q_c(Dhat)|`` over every query in the class."""
    t = query_class.table
    qd = t[:, np.asarray(D, dtype=np.int64)].mean(axis=1)
    qh = t[:, np.asarray(Dhat, dtype=np.int64)].mean(axis=1)
    return float(np.abs(qd - qh).max())


def blr_sanitize(
    D: np.ndarray,
    query_class: ConceptClass,
    alpha: float,
    beta: float,
    epsilon: float,
    rng: np.random.Generator | int,
    *,
    kappa: float = 1.0,
    vc: int | None = None,
    max_exhaustive: int = MAX_EXHAUSTIVE,
    walk_steps: int | None = None,
) -> SyntheticDatabase:
    """``epsilon``-DP synthetic database of size ``mhat`` for the queries in ``query_class``.

    ``vc`` overrides the VC dimension used to size the output (default: the
    exact VC dimension of ``query_class``).
    """
    D = query_class.domain.encode_many(D)
    if D.size == 0:
        raise DomainError("cannot sanitize an empty database")
    if not 0 < beta < 1:
        raise DomainError("beta must lie in (0, 1)")
    rng = make_rng(rng)
    vc = vc_dimension(query_class) if vc is None else vc
    mhat = synthetic_size(max(vc, 1), alpha, kappa)
    size = query_class.domain.size
    need = input_size_needed(max(vc, 1), size, alpha, beta, epsilon)
    if D.size < need:
        warnings.warn(
            f"sanitizer input has {D.size} records; the accuracy guarantee asks for about {need:.0f}",
            SmallInputWarning,
            stacklevel=2,
        )
    qt = query_class.table
    n_cand = candidate_count(size, mhat)
    if n_cand <= max_exhaustive:
        comps = _compositions(mhat, size)
        scores = -deviations(comps, qt, D) / mhat
        chosen = comps[exponential_mechanism(epsilon, scores, rng)]
        approximate = False
    else:
        chosen = _walk(D, qt, mhat, epsilon, rng, walk_steps)
        approximate = True
    points = np.repeat(np.arange(size, dtype=np.int64), np.asarray(chosen, dtype=np.int64))
    if log.isEnabledFor(logging.DEBUG):
        log.debug("sanitizer max query error %.4f (mhat=%d, approximate=%s)",
                  max_query_error(query_class, D, points), mhat, approximate)
    return SyntheticDatabase(points, mhat, PrivacyParams(epsilon, 0.0), approximate, n_cand)


def _walk(
    D: np.ndarray, qt: np.ndarray, mhat: int, epsilon: float, rng: np.random.Generator, steps: int | None
) -> np.ndarray:
    size = qt.shape[1]
    if steps is None:
        steps = 200 * mhat * max(size, 1)
    if steps > MAX_WALK_STEPS:
        raise ResourceError(
            f"approximate sanitizer would need {steps} steps; reduce the synthetic size or the domain"
        )
    # data-independent start: mhat uniform points
    counts = np.bincount(rng.integers(0, size, size=mhat), minlength=size).astype(np.int64)
    target = qt[:, D].sum(axis=1).astype(np.int64)
    slots = rng.random(steps)
    proposals = rng.integers(0, size, size=steps, dtype=np.int64)
    accepts = rng.random(steps)
    counts, _ = kernels.metropolis_walk(counts, qt, target, D.size, mhat, epsilon, slots, proposals, accepts)
    return counts


def sanitize_for_learner(
    D: np.ndarray,
    cls: ConceptClass,
    alpha: float,
    beta: float,
    epsilon: float,
    rng: np.random.Generator | int,
    *,
    kappa: float = 1.0,
    **kwargs,
) -> tuple[SyntheticDatabase, np.ndarray]:
    """Sanitize w.r.t. the disagreement class of ``cls``; also return the support.

    The output is sized from ``VC(cls)``, which bounds the disagreement
    class's VC dimension up to a constant.
    """
    xor = ConceptClass.xor_of(cls)
    vc = cls.known_vc if cls.known_vc is not None else vc_dimension(cls)
    synth = blr_sanitize(D, xor, alpha, beta, epsilon, rng, kappa=kappa, vc=vc, **kwargs)
    return synth, synth.support()
