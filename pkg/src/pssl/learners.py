"""Private semi-supervised learners.

* ``generic_learner``: sanitize the unlabeled data w.r.t. the disagreement
  class, keep one concept per dichotomy on the synthetic support, then pick
  one with the exponential mechanism on the labeled data.
* ``label_boost_procedure``: pick a hypothesis from the dichotomy cover of
  ``S o T`` using ``S`` and relabel ``S o T`` with it.
* ``label_boost``: the iterative self-training loop that shrinks a private
  learner's labeled cost, with subsampling between rounds.

Hypotheses are ``Concept`` objects for proper learners. Every learner
returns a ``LearnerOutput`` with a JSON-ready transcript.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from .concepts import Concept, ConceptClass, dichotomy_cover, vc_dimension
from .data import UNLABELED, PartiallyLabeledDatabase
from .errors import DomainError, LearnerFailure
from .mechanisms import (
    Mechanism,
    PrivacyParams,
    Stage,
    agreement_scores,
    compose_declared_privacy,
    iid_resample_wrapper,
    select_hypothesis,
    subsample_privacy,
    subsample_size,
)
from .rng import make_rng
from .sanitizer import sanitize_for_learner

# absolute constants of the boosting loop (multiplied by the scale factor)
UNLABELED_FACTOR = 90000
STOP_FACTOR = 300
STEP_CAP_FACTOR = 30000
EXPONENT_FACTOR = 200
LABELED_FACTOR = 96000
GROWTH_FACTOR = 4800


class SmallLabeledSampleWarning(UserWarning):
    """Labeled sample is below the size the boosting analysis assumes."""


@dataclass
class LearnerOutput:
    hypothesis: Any
    labeled_used: int
    unlabeled_used: int
    privacy: PrivacyParams
    transcript: dict = field(default_factory=dict)
    #: alternative accounting, when one applies (see ``generic_learner``)
    privacy_alt: PrivacyParams | None = None

    @property
    def index(self) -> int:
        if not isinstance(self.hypothesis, Concept):
            raise DomainError("improper hypothesis has no concept index")
        return self.hypothesis.index


@dataclass(frozen=True)
class LearnerConfig:
    alpha: float
    beta: float
    privacy: PrivacyParams
    n: int
    m: int
    scale: float = 1.0
    class_id: str = ""

    def __post_init__(self):
        if not (0 < self.alpha < 1 and 0 < self.beta < 1):
            raise DomainError("alpha and beta must lie in (0, 1)")
        if self.m > self.n:
            raise DomainError("labeled count m cannot exceed total n")
        if not self.scale > 0:
            raise DomainError("scale must be positive")


def _labeled(points: np.ndarray, labels: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    points = np.asarray(points, dtype=np.int64)
    labels = np.asarray(labels, dtype=np.int64)
    if points.shape != labels.shape:
        raise DomainError("points and labels differ in length")
    keep = labels != UNLABELED
    return points[keep], labels[keep]


# -- baselines ----------------------------------------------------------------


def erm_learner(points: np.ndarray, labels: np.ndarray, cls: ConceptClass) -> Concept:
    """Lowest-index concept with the fewest mistakes on the labeled records."""
    pts, lab = _labeled(points, labels)
    return cls[int(np.argmax(agreement_scores(cls.table, pts, lab)))]


def generic_private_learner(
    points: np.ndarray, labels: np.ndarray, cls: ConceptClass, epsilon: float, rng: np.random.Generator | int
) -> Concept:
    """Exponential mechanism over the whole class with the agreement score (pure ``epsilon``-DP)."""
    pts, lab = _labeled(points, labels)
    cand = np.arange(len(cls), dtype=np.int64)
    return cls[select_hypothesis(epsilon, cand, cls.table, pts, lab, make_rng(rng))]


def generic_private_sample_size(class_size: int, alpha: float, beta: float, epsilon: float) -> int:
    """Labeled records after which the class-wide exponential mechanism is ``(alpha, beta)``-accurate on its sample."""
    return math.ceil(2.0 / (epsilon * alpha) * (math.log(class_size) + math.log(1.0 / beta)))


@dataclass(frozen=True)
class BaseLearner:
    """A learner on fully labeled records, with declared sample complexity and privacy."""

    name: str
    cls: ConceptClass
    n: int
    privacy: PrivacyParams
    fit: Callable[[np.ndarray, np.ndarray, np.random.Generator], Any]

    def as_mechanism(self) -> Mechanism:
        def run(db: PartiallyLabeledDatabase, rng: np.random.Generator):
            return self.fit(db.points, db.labels, rng)

        return Mechanism(self.name, self.privacy, run, input_size=self.n, stages=(self._base_stage(),))

    def _base_stage(self) -> Stage:
        return Stage("base", self.privacy.epsilon, self.privacy.delta)


def private_base(cls: ConceptClass, n: int, epsilon: float = 1.0) -> BaseLearner:
    """``generic_private_learner`` packaged as a base learner."""
    return BaseLearner(
        f"generic_private(eps={epsilon:g})",
        cls,
        n,
        PrivacyParams(epsilon, 0.0),
        lambda p, y, rng: generic_private_learner(p, y, cls, epsilon, rng),
    )


def constant_base(cls: ConceptClass, n: int, index: int = 0) -> BaseLearner:
    """Ignores its input and returns concept ``index``; trivially (0, 0)-DP."""
    return BaseLearner(f"constant({index})", cls, n, PrivacyParams(0.0, 0.0), lambda p, y, rng: cls[index])


def apply_privacy_boost(learner: BaseLearner, eps_target: float) -> BaseLearner:
    """Run ``learner`` on a random size-``n`` subset (shuffled) of a larger input.

    The input size becomes ``ceil((n / eps) * (3 + e^eps*))`` and the declared
    privacy becomes ``(eps, 4 * eps * delta / (3 + e^eps*))``.
    """
    n = learner.n
    t = subsample_size(n, learner.privacy.epsilon, eps_target)

    def fit(points, labels, rng):
        points = np.asarray(points)
        if points.size < t:
            raise DomainError(f"privacy-boosted learner needs {t} records, got {points.size}")
        idx = rng.permutation(points.size)[:n]
        return learner.fit(points[idx], np.asarray(labels)[idx], rng)

    return BaseLearner(
        f"boost({learner.name}, eps={eps_target:g})",
        learner.cls,
        t,
        subsample_privacy(learner.privacy, eps_target),
        fit,
    )


# -- GenericLearner -----------------------------------------------------------


def generic_learner_sizes(
    vc: int, d: int, alpha: float, beta: float, epsilon: float, kappa_m: float = 1.0, kappa_n: float = 1.0
) -> tuple[int, int]:
    """``(labeled, unlabeled)`` sizes from the generic learner's bounds, constants set to ``kappa``."""
    tail = math.log(1.0 / beta) / (alpha * epsilon)
    core = vc * math.log(1.0 / alpha) / (alpha**3 * epsilon)
    m = math.ceil(kappa_m * (core + tail))
    n_unlabeled = math.ceil(kappa_n * (d * core + tail))
    return m, n_unlabeled


def generic_learner(
    D: np.ndarray,
    S_points: np.ndarray,
    S_labels: np.ndarray,
    cls: ConceptClass,
    alpha: float,
    beta: float,
    epsilon: float,
    rng: np.random.Generator | int,
    *,
    kappa: float = 1.0,
    **sanitizer_kwargs,
) -> LearnerOutput:
    """Proper learner reading ``D`` only through the sanitizer and ``S`` only through the exponential mechanism.

    Declared privacy is ``2 * epsilon`` (two ``epsilon``-DP stages); the
    alternative accounting, ``epsilon``, treats ``D`` and ``S`` as disjoint.
    """
    rng = make_rng(rng)
    S_points, S_labels = _labeled(S_points, S_labels)
    D = cls.domain.encode_many(D)
    synth, B = sanitize_for_learner(D, cls, alpha, beta, epsilon, rng, kappa=kappa, **sanitizer_kwargs)
    H = dichotomy_cover(cls, B)
    h = select_hypothesis(epsilon, H, cls.table, S_points, S_labels, rng)
    transcript = {
        "learner": "generic",
        "synthetic_size": synth.target_size,
        "approximate_sampler": synth.approximate,
        "support": B.tolist(),
        "hypotheses": H.tolist(),
        "chosen": h,
    }
    return LearnerOutput(
        cls[h],
        labeled_used=int(S_points.size),
        unlabeled_used=int(D.size),
        privacy=PrivacyParams(2 * epsilon, 0.0),
        transcript=transcript,
        privacy_alt=PrivacyParams(epsilon, 0.0),
    )


def generic_ssl(cls: ConceptClass, alpha: float, beta: float, epsilon: float, kappa: float = 1.0, **kwargs):
    """``generic_learner`` over a mixed database: labeled records form S, the rest D."""

    def learn(db: PartiallyLabeledDatabase, rng: np.random.Generator) -> LearnerOutput:
        lab = db.labels != UNLABELED
        return generic_learner(db.points[~lab], db.points[lab], db.labels[lab], cls, alpha, beta, epsilon,
                               rng, kappa=kappa, **kwargs)

    return learn


# -- LabelBoostProcedure ------------------------------------------------------


@dataclass(frozen=True)
class ProcedureResult:
    database: PartiallyLabeledDatabase
    chosen: int
    cover_size: int


def _relabel(
    cls: ConceptClass,
    S_points: np.ndarray,
    S_labels: np.ndarray,
    T_points: np.ndarray,
    rng: np.random.Generator,
    epsilon: float = 1.0,
) -> tuple[np.ndarray, np.ndarray, int, int]:
    st = np.concatenate([S_points, T_points])
    if st.size == 0:
        raise DomainError("relabeling needs a nonempty S o T")
    H = dichotomy_cover(cls, st)
    h = select_hypothesis(epsilon, H, cls.table, S_points, S_labels, rng)
    return st, cls.table[h, st].astype(np.int8), h, int(H.size)


def label_boost_procedure(
    db: PartiallyLabeledDatabase, cls: ConceptClass, rng: np.random.Generator | int, epsilon: float = 1.0
) -> ProcedureResult:
    """Relabel ``S o T`` with a hypothesis chosen on ``S``; ``D`` is passed through untouched."""
    if db.segments is None:
        raise DomainError("label boost procedure needs a segmented S o T o D database")
    S_points, S_labels = db.segment("S")
    T_points, _ = db.segment("T")
    D_points, D_labels = db.segment("D")
    st, st_labels, h, h_size = _relabel(cls, S_points, S_labels, T_points, make_rng(rng), epsilon)
    out = PartiallyLabeledDatabase(
        np.concatenate([st, D_points]),
        np.concatenate([st_labels, D_labels]),
        (st.size, st.size),
    )
    return ProcedureResult(out, h, h_size)


# -- LabelBoost ---------------------------------------------------------------


@dataclass(frozen=True)
class BoostSchedule:
    alpha: float
    beta: float

    def at(self, i: int) -> tuple[float, float]:
        """``(alpha_i, beta_i) = (alpha / (10 * 2^i), beta / (4 * 2^i))``."""
        return self.alpha / (10 * 2**i), self.beta / (4 * 2**i)


def label_boost_labeled_size(alpha: float, beta: float, vc: int, scale: float = 1.0, agnostic: bool = False) -> int:
    """Labeled sample the boosting analysis assumes: ``scale * 96000/alpha * VC * ln(2240/(alpha*beta))``.

    The agnostic variant replaces ``1/alpha`` by ``1/alpha^2``.
    """
    power = 2 if agnostic else 1
    return _ceil(scale * LABELED_FACTOR / alpha**power * max(vc, 1) * math.log(2240.0 / (alpha * beta)))


def label_boost_unlabeled_size(n: int, scale: float = 1.0) -> int:
    return _ceil(UNLABELED_FACTOR * n * scale)


def _ceil(x: float) -> int:
    r = round(x)
    return int(r) if abs(x - r) <= 1e-9 * max(1.0, abs(x)) else math.ceil(x)


def growth_bound(alpha_i: float, beta_i: float, vc: int, scale: float = 1.0) -> float:
    """Lower bound on ``|S|`` at the start of round ``i``: ``scale * 4800/alpha_i * VC * ln(14/(alpha_i*beta_i))``."""
    return scale * GROWTH_FACTOR / alpha_i * max(vc, 1) * math.log(14.0 / (alpha_i * beta_i))


def step_size(alpha_i: float, beta_i: float, vc: int, s_len: int, n: int, scale: float = 1.0) -> int:
    """Records moved from ``D`` to ``T``: ``min(30000 n, beta_i VC e^(alpha_i |S| / (200 VC))) - |S|``, floored, at least 0."""
    vc = max(vc, 1)
    cap = STEP_CAP_FACTOR * n * scale
    exponent = alpha_i * s_len / (EXPONENT_FACTOR * scale * vc)
    grow = beta_i * vc * math.exp(exponent) - s_len if exponent < 700 else math.inf
    return max(0, math.floor(min(cap, grow)))


def label_boost_plan(
    alpha: float,
    beta: float,
    vc: int,
    n: int,
    m: int,
    scale: float = 1.0,
    d_size: int | None = None,
    max_iterations: int = 64,
) -> dict:
    """Every database size along a boosting run, from ``(alpha, beta, n, m, scale)`` alone.

    Raises ``LearnerFailure`` where the run itself would fail (a round
    that adds nothing, or ``D`` running out when ``d_size`` is given).
    """
    sched = BoostSchedule(alpha, beta)
    stop = STOP_FACTOR * n * scale
    s_len = m
    consumed = 0
    rounds = []
    i = 1
    while s_len < stop:
        if i > max_iterations:
            raise LearnerFailure(f"boosting did not finish in {max_iterations} rounds")
        a_i, b_i = sched.at(i)
        v = step_size(a_i, b_i, vc, s_len, n, scale)
        if v == 0:
            raise LearnerFailure(
                f"round {i}: step adds no records (|S|={s_len} < {stop:g}); labeled sample too small"
            )
        if d_size is not None and consumed + v > d_size:
            raise LearnerFailure(f"round {i}: needs {v} unlabeled records, only {d_size - consumed} left")
        consumed += v
        t_keep = v - (99 * v) // 100
        s_keep = s_len - (99 * s_len) // 100
        rounds.append({
            "round": i,
            "alpha_i": a_i,
            "beta_i": b_i,
            "S_before": s_len,
            "T_before": v,
            "S_kept": s_keep,
            "T_kept": t_keep,
            "S_after": s_keep + t_keep,
        })
        s_len = s_keep + t_keep
        i += 1
    final_keep = s_len - (299 * s_len) // 300
    return {"rounds": rounds, "S_end": s_len, "final_size": final_keep, "unlabeled_consumed": consumed}


def _keep_random(rng: np.random.Generator, size: int, keep: int) -> np.ndarray:
    """Sorted positions of ``keep`` entries surviving a uniformly random deletion."""
    return np.sort(rng.permutation(size)[:keep])


def label_boost(
    D: np.ndarray,
    S_points: np.ndarray,
    S_labels: np.ndarray,
    base: BaseLearner,
    alpha: float,
    beta: float,
    rng: np.random.Generator | int,
    *,
    scale: float = 1.0,
    vc: int | None = None,
    agnostic: bool = False,
    max_iterations: int = 64,
) -> LearnerOutput:
    """Boost ``base`` (sample complexity ``base.n``) to a learner needing few labels.

    ``D`` must hold at least ``ceil(90000 * n * scale)`` unlabeled points.
    Declared privacy is ``(1, 41 delta)`` for a ``(1, delta)`` base; with
    ``scale != 1`` the constants behind that declaration no longer hold and
    the transcript says so.
    """
    rng = make_rng(rng)
    cls = base.cls
    vc = (cls.known_vc if cls.known_vc is not None else vc_dimension(cls)) if vc is None else vc
    D = cls.domain.encode_many(D)
    S_points = np.asarray(S_points, dtype=np.int64)
    S_labels = np.asarray(S_labels, dtype=np.int64)
    if S_points.shape != S_labels.shape or (S_labels == UNLABELED).any():
        raise DomainError("S must be fully labeled and match its points")
    need_d = label_boost_unlabeled_size(base.n, scale)
    if D.size < need_d:
        raise DomainError(f"boosting needs {need_d} unlabeled records, got {D.size}")
    need_s = label_boost_labeled_size(alpha, beta, vc, scale, agnostic)
    if S_points.size < need_s:
        warnings.warn(
            f"labeled sample has {S_points.size} records; the analysis assumes {need_s}",
            SmallLabeledSampleWarning,
            stacklevel=2,
        )
    plan = label_boost_plan(alpha, beta, vc, base.n, S_points.size, scale, D.size, max_iterations)

    s_pts, s_lab = S_points, S_labels.astype(np.int8)
    pos = 0
    rounds = []
    for step in plan["rounds"]:
        v = step["T_before"]
        T = D[pos:pos + v]
        pos += v
        T = T[_keep_random(rng, v, step["T_kept"])]
        kept = _keep_random(rng, s_pts.size, step["S_kept"])
        s_pts, s_lab = s_pts[kept], s_lab[kept]
        s_pts, s_lab, h, h_size = _relabel(cls, s_pts, s_lab, T, rng)
        rounds.append({**step, "cover_size": h_size, "chosen": h})

    kept = _keep_random(rng, s_pts.size, plan["final_size"])
    final = PartiallyLabeledDatabase(s_pts[kept], s_lab[kept])
    hypothesis = iid_resample_wrapper(base.as_mechanism()).run(final, rng)

    stages = [Stage("base", base.privacy.epsilon, base.privacy.delta), Stage("label_boost")]
    privacy = compose_declared_privacy(stages)
    transcript = {
        "learner": "label_boost_agnostic" if agnostic else "label_boost",
        "base": base.name,
        "scale": scale,
        "vc": vc,
        "rounds": rounds,
        "iterations": len(rounds),
        "final_size": int(final.points.size),
        "unlabeled_consumed": plan["unlabeled_consumed"],
        "labeled_threshold": need_s,
        "privacy_fold": [s.to_json() for s in stages],
        "declared_privacy_valid": scale == 1.0,
    }
    if isinstance(hypothesis, Concept):
        transcript["chosen"] = hypothesis.index
    return LearnerOutput(
        hypothesis,
        labeled_used=int(S_points.size),
        unlabeled_used=int(D.size),
        privacy=privacy,
        transcript=transcript,
    )


def label_boost_agnostic(D, S_points, S_labels, base: BaseLearner, alpha, beta, rng, **kwargs) -> LearnerOutput:
    """``label_boost`` with hypothesis class ``base.cls`` and no realizability assumption.

    Same code path; only the labeled-size threshold uses ``1/alpha^2``.
    """
    return label_boost(D, S_points, S_labels, base, alpha, beta, rng, agnostic=True, **kwargs)
