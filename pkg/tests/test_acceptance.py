"""Acceptance suite: one test per criterion, each printing a single PASS/FAIL line.

Every criterion is a function ``(seed, cache) -> Outcome`` whose ``csv``
field holds the rows it measured; the determinism check reruns each one
from the same seed and compares hashes. Run with ``-s`` to see the lines as
they are produced; they are also repeated in pytest's terminal summary.
"""
from __future__ import annotations

import hashlib
import io
import itertools
import math
import time
from dataclasses import dataclass
from decimal import ROUND_CEILING, Decimal, getcontext

import numpy as np
import pytest
from scipy.stats import chisquare

from pssl import harness
from pssl.active import LabelOracle, sub_sampling_active
from pssl.audit import histograms_identical, neighbors, procedure_then_base
from pssl.concepts import ConceptClass, Domain, vc_dimension
from pssl.errors import LearnerFailure
from pssl.learners import (
    constant_base,
    generic_private_sample_size,
    generic_ssl,
    label_boost_plan,
    label_boost_unlabeled_size,
    private_base,
)
from pssl.mechanisms import (
    PrivacyParams,
    agreement_scores,
    exponential_mechanism_batch,
    select_hypothesis,
    softmax_probabilities,
    subsample_active_size,
    utility_bound_check,
)
from pssl.rng import derive_seed, make_rng
from pssl.sanitizer import max_query_error, sanitize_for_learner

pytestmark = pytest.mark.acceptance

ROOT_SEED = 20261016
REPORT: list[str] = []
FIRST_RUN: dict[int, str] = {}


@dataclass
class Outcome:
    ok: bool
    detail: str
    csv: str


def _csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for r in rows:
        buf.write(",".join(harness.fmt(x) for x in r) + "\n")
    return buf.getvalue()


def _digest(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()[:16]


# -- 1: exponential mechanism utility ----------------------------------------------


def em_utility(seed: int, cache: dict) -> Outcome:
    T = ConceptClass.thresholds(3)
    H = np.arange(8)  # eight thresholds; the target below is one of them
    target, m, eps, trials = 4, 100, 1.0, 100_000
    rng = make_rng(seed)
    S = rng.integers(0, 8, size=(trials, m))
    Y = T.table[target][S]
    errs = np.empty(trials)
    for k in range(trials):
        h = select_hypothesis(eps, H, T.table, S[k], Y[k], rng)
        errs[k] = np.count_nonzero(T.table[h][S[k]] != Y[k]) / m
    rows, ok = [], True
    for gap in (0.1, 0.2):
        freq = float(np.mean(errs > gap))  # the empirical minimum is 0 on realizable labels
        bound = utility_bound_check(len(H), eps, m, gap)
        sigma = math.sqrt(bound * (1 - bound) / trials)
        ok &= freq <= bound + 3 * sigma
        rows.append([gap, trials, freq, bound, sigma])
    detail = "; ".join(f"gap {r[0]}: freq {r[2]:.2e} vs bound {r[3]:.2e} + 3sd {3 * r[4]:.1e}" for r in rows)
    return Outcome(ok, detail, _csv(["gap", "trials", "freq", "bound", "sigma"], rows))


# -- 2: exact output distribution ----------------------------------------------------


def em_distribution(seed: int, cache: dict) -> Outcome:
    vectors = [np.array([0, 1, 2, 3, 4.0]), np.array([10, 10, 0, -5.0]), np.array([3.5, 0, 7, 1, 1, 2])]
    rows, ok = [], True
    for j, q in enumerate(vectors):
        p = softmax_probabilities(1.0, q)
        for sampler in ("gumbel", "cumsum"):
            draws = exponential_mechanism_batch(1.0, q, derive_seed(seed, j, sampler == "cumsum"), 100_000, sampler)
            counts = np.bincount(draws, minlength=q.size)
            pv = float(chisquare(counts, p * draws.size).pvalue)
            ok &= pv > 0.01
            rows.append([j, sampler, draws.size, pv])
    detail = "min chi-square p = %.3f over %d tests" % (min(r[3] for r in rows), len(rows))
    return Outcome(ok, detail, _csv(["vector", "sampler", "draws", "pvalue"], rows))


# -- 3 and 4: disagreement class VC and projections --------------------------------------


def _brute_vc(table: np.ndarray) -> int:
    n = table.shape[1]
    best = 0
    for k in range(1, n + 1):
        w = 1 << np.arange(k)
        if not any(np.unique(table[:, list(B)] @ w).size == 2**k for B in itertools.combinations(range(n), k)):
            break
        best = k
    return best


def _fixtures(seed: int, cache: dict) -> list[ConceptClass]:
    key = ("fixtures", seed)
    if key not in cache:
        out = [ConceptClass.thresholds(d) for d in range(1, 5)]
        out += [ConceptClass.points(d) for d in range(1, 5)]
        out += [ConceptClass.intervals(d) for d in range(1, 4)]
        out.append(ConceptClass.rectangles(2, 2))
        rng = make_rng(seed)
        for _ in range(20):
            rows = int(rng.integers(1, 40))
            table = np.unique(rng.integers(0, 2, size=(rows, 8)), axis=0)
            out.append(ConceptClass.explicit(Domain.bitline(3), table))
        cache[key] = out
    return cache[key]


def _codes(table: np.ndarray, B: tuple) -> np.ndarray:
    return np.unique(table[:, list(B)] @ (1 << np.arange(len(B))))


def xor_vc(seed: int, cache: dict) -> Outcome:
    rows, ok = [], True
    for C in _fixtures(seed, cache):
        X = ConceptClass.xor_of(C)
        v, vx = vc_dimension(C), vc_dimension(X)
        bv, bvx = _brute_vc(C.table), _brute_vc(X.table)
        law_fail = 0
        for B in itertools.combinations(range(C.domain.size), min(4, C.domain.size)):
            base = _codes(C.table, B)
            law = np.unique(base[:, None] ^ base[None, :])
            if not np.array_equal(law, _codes(X.table, B)):
                law_fail += 1
        good = v == bv and vx == bvx and vx <= 10 * v and law_fail == 0
        ok &= good
        rows.append([C.class_id, len(C), v, vx, bvx, law_fail, int(good)])
    worst = max(r[3] / max(r[2], 1) for r in rows)
    detail = f"{len(rows)} classes, max VC(xor)/VC = {worst:.1f}, projection law failures {sum(r[5] for r in rows)}"
    return Outcome(ok, detail, _csv(["class", "size", "vc", "vc_xor", "vc_xor_brute", "law_failures", "ok"], rows))


def sauer(seed: int, cache: dict) -> Outcome:
    violations, checked, rows = 0, 0, []
    for C in _fixtures(seed, cache):
        for K in (C, ConceptClass.xor_of(C)):
            v = vc_dimension(K)
            bad = 0
            for k in range(1, min(4, K.domain.size) + 1):
                limit = sum(math.comb(k, i) for i in range(v + 1))
                for B in itertools.combinations(range(K.domain.size), k):
                    checked += 1
                    if _codes(K.table, B).size > limit:
                        bad += 1
            violations += bad
            rows.append([K.class_id, v, bad])
    return Outcome(violations == 0, f"{checked} projections, {violations} violations",
                   _csv(["class", "vc", "violations"], rows))


# -- 5: sanitizer utility --------------------------------------------------------------

SANITIZER_KAPPA = 0.8  # synthetic size 18: 480700 candidate multisets, inside the exhaustive regime


def sanitizer_utility(seed: int, cache: dict) -> Outcome:
    T = ConceptClass.thresholds(3)
    X = ConceptClass.xor_of(T)
    alpha, runs = 0.25, 50
    rows = []
    for r in range(runs):
        rng = make_rng(derive_seed(seed, r))
        D = rng.integers(0, 8, 64)
        synth, _ = sanitize_for_learner(D, T, alpha, 0.2, 1.0, rng, kappa=SANITIZER_KAPPA)
        err = max_query_error(X, D, synth.points)
        rows.append([r, synth.target_size, synth.candidates, int(synth.approximate), err, int(err <= alpha)])
    good = sum(r[5] for r in rows)
    exhaustive = not any(r[3] for r in rows)
    ok = exhaustive and good >= math.ceil(0.8 * runs)
    detail = f"{good}/{runs} runs with max query error <= {alpha} (mhat {rows[0][1]}, {rows[0][2]} candidates)"
    return Outcome(ok, detail, _csv(["run", "mhat", "candidates", "approximate", "max_error", "ok"], rows))


# -- 6: generic learner end to end ---------------------------------------------------------

GENERIC = {
    "learner": "generic",
    "params": {"alpha": 0.2, "beta": 0.2, "epsilon": 1.0, "kappa": 0.4},
    "concept_class": {"family": "thresh", "d": 3},
    "target": "random",
    "trials": 200,
}


def _generic_report(seed: int, cache: dict) -> harness.TrialReport:
    key = ("generic", seed)
    if key not in cache:
        cfg = harness.ExperimentConfig.from_dict({**GENERIC, "root_seed": seed})
        cache[key] = harness.run_experiment(cfg)
    return cache[key]


def generic_end_to_end(seed: int, cache: dict) -> Outcome:
    rep = _generic_report(seed, cache)
    beta, n = 0.2, len(rep.trials)
    sigma = math.sqrt(beta * (1 - beta) / n)
    proper = all(isinstance(t.hypothesis, int) and 0 <= t.hypothesis < 9 for t in rep.trials)
    ok = rep.failure_fraction <= beta + 2 * sigma and proper
    m, u = rep.trials[0].labeled_used, rep.trials[0].unlabeled_used
    detail = (f"failure fraction {rep.failure_fraction:.3f} <= {beta + 2 * sigma:.3f} over {n} trials "
              f"(m={m}, unlabeled={u}), proper={proper}")
    return Outcome(ok, detail, harness.trial_csv([rep]))


# -- 7: boosting utility -------------------------------------------------------------------

BOOST = {
    "learner": "label_boost",
    "params": {"alpha": 0.3, "beta": 0.1, "scale": 0.001, "error_threshold": 3.3},
    "concept_class": {"family": "thresh", "d": 3},
    "target": "random",
    "trials": 100,
}


def boost_utility(seed: int, cache: dict) -> Outcome:
    cfg = harness.ExperimentConfig.from_dict({**BOOST, "root_seed": seed})
    rep = harness.run_experiment(cfg)
    alpha, beta, n = 0.3, 0.1, len(rep.trials)
    m = harness.planned_labeled(cfg)
    within = sum(t.status == "ok" and t.error <= 11 * alpha for t in rep.trials) / n
    sigma = math.sqrt(2 * beta * (1 - 2 * beta) / n)
    exact_m = all(t.labeled_used == m for t in rep.trials)
    iters = max(t.iterations for t in rep.trials)
    strict = sum(t.status == "ok" and t.error <= alpha for t in rep.trials) / n
    ok = within >= 1 - 2 * beta - 2 * sigma and exact_m and iters <= 5
    detail = (f"err <= 11a in {within:.2f} >= {1 - 2 * beta - 2 * sigma:.2f}; labeled used == {m} on every trial: "
              f"{exact_m}; max iterations {iters}; err <= a in {strict:.2f}")
    return Outcome(ok, detail, harness.trial_csv([rep]))


# -- 8: label complexity scaling ----------------------------------------------------------------


def _shape_fit(alphas: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Least-squares fit of ``A (1/a) ln(1/a) + B (1/a)``; returns relative residuals."""
    X = np.column_stack([np.log(1 / alphas) / alphas, 1 / alphas])
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    fit = X @ coef
    return np.abs(y - fit) / fit


def _minimal_labeled(alpha: float, beta: float, scale: float) -> int:
    n = math.ceil(generic_private_sample_size(9, alpha, beta, 1.0) / scale)
    d_size = label_boost_unlabeled_size(n, scale)

    def feasible(m: int) -> bool:
        try:
            label_boost_plan(alpha, beta, 1, n, m, scale, d_size)
            return True
        except LearnerFailure:
            return False

    lo, hi = 1, 1
    while not feasible(hi):
        hi *= 2
    while lo < hi:
        mid = (lo + hi) // 2
        lo, hi = (lo, mid) if feasible(mid) else (mid + 1, hi)
    return lo


def label_scaling(seed: int, cache: dict) -> Outcome:
    raw = {
        "learner": "label_boost",
        "params": {"beta": 0.1, "scale": 0.001, "m": "auto"},
        "concept_class": {"family": "thresh", "d": 3},
        "target": "random",
        "trials": 5,
        "root_seed": seed,
        "sweep": {"axis": "alpha", "values": [0.4, 0.2, 0.1]},
    }
    curve = harness.sample_complexity_curve(harness.ExperimentConfig.from_dict(raw))
    alphas = np.array(raw["sweep"]["values"])
    used = np.array([np.mean([t.labeled_used for t in r.trials]) for r in curve.reports])
    res = _shape_fit(alphas, used)
    grid = np.array([0.4, 0.3, 0.2, 0.15, 0.1, 0.05])
    minimal = np.array([_minimal_labeled(a, 0.1, 0.001) for a in grid], dtype=float)
    res_min = _shape_fit(grid, minimal)
    ok = bool((res <= 0.2).all() and (res_min <= 0.2).all())
    detail = (f"labeled used {used.astype(int).tolist()}: max residual {res.max():.3f}; "
              f"smallest feasible m {minimal.astype(int).tolist()}: max residual {res_min.max():.3f}")
    return Outcome(ok, detail, curve.csv() + _csv(["alpha", "minimal_m", "residual"],
                                                  [[a, int(v), r] for a, v, r in zip(grid, minimal, res_min)]))


# -- 9: audit of the exponential mechanism ---------------------------------------------------

EM_AUDIT = {
    "mechanism": "exponential_mechanism", "epsilon": 1.0, "pair_id": "em",
    "concept_class": {"family": "thresh", "d": 2}, "candidates": [4, 0, 1],
    "sample": [[3, 0], [3, 0], [3, 0], [3, 0], [3, 1]],
    "neighbor": {"index": 4, "record": [3, 0]},
}


def em_audit(seed: int, cache: dict) -> Outcome:
    eps = 1.0
    M, pair, _, _ = harness.build_audit(EM_AUDIT)
    T = ConceptClass.thresholds(2)
    cand = np.array(EM_AUDIT["candidates"])
    q1 = agreement_scores(T.table[cand], pair.d1.points, pair.d1.labels)
    q2 = agreement_scores(T.table[cand], pair.d2.points, pair.d2.labels)
    p1, p2 = softmax_probabilities(eps, q1), softmax_probabilities(eps, q2)
    exact = float(np.abs(np.log(p1 / p2)).max())
    rep = harness.run_audits({"root_seed": seed, "trials": 100_000, "audits": [EM_AUDIT]})[0]
    ok = (int(np.abs(q1 - q2).max()) == 1 and rep.epsilon_hat <= eps + rep.slack
          and rep.epsilon_hat >= 0.5 * eps)
    detail = (f"eps_hat {rep.epsilon_hat:.3f} (point {rep.epsilon_point:.3f}, exact {exact:.3f}) "
              f"in [{0.5 * eps}, {eps} + {rep.slack:.3f}], witness {rep.witness}")
    return Outcome(ok, detail, harness.audit_csv([rep]))


# -- 10: audit of relabel-then-learn ------------------------------------------------------------


PROCEDURE_AUDIT = {
    "mechanism": "label_boost_procedure", "pair_id": "procedure-S",
    "concept_class": {"family": "thresh", "d": 2},
    "S": [[0, 1], [1, 1], [2, 0], [3, 0]], "T": [1, 2], "D": [0, 3],
    "base": {"type": "constant", "index": 2},
    "neighbor": {"index": 0, "record": [3, 0]},
}


def procedure_audit(seed: int, cache: dict) -> Outcome:
    T = ConceptClass.thresholds(2)
    reports = harness.run_audits({"root_seed": seed, "trials": 100_000, "audits": [PROCEDURE_AUDIT]})
    private = {**PROCEDURE_AUDIT, "pair_id": "procedure-S-private", "base": {"type": "private", "epsilon": 1.0}}
    reports += harness.run_audits({"root_seed": seed, "trials": 20_000, "audits": [private]})
    db = harness.build_audit(PROCEDURE_AUDIT)[1].d1
    d_pair = neighbors(db, len(db) - 1, (1, -1))
    same_const = histograms_identical(procedure_then_base(T, constant_base(T, len(db), 2)), d_pair, 100_000, seed)
    same_priv = histograms_identical(procedure_then_base(T, private_base(T, len(db), 1.0)), d_pair, 20_000, seed)
    const, priv = reports
    ok = (const.epsilon_hat <= 3 + const.slack and priv.epsilon_hat <= 4 + priv.slack
          and same_const and same_priv)
    detail = (f"constant base eps_hat {const.epsilon_hat:.3f} <= 3; private base eps_hat {priv.epsilon_hat:.3f} <= 4; "
              f"D-only neighbours identical: {same_const and same_priv}")
    return Outcome(ok, detail, harness.audit_csv(reports) + f"d_only_identical,{int(same_const)},{int(same_priv)}\n")


# -- 11: active wrapper ------------------------------------------------------------------------------


def _exact_pool_size(n: int, eps: Decimal, eps_star: Decimal) -> int:
    getcontext().prec = 60
    return int((Decimal(n) / eps * (3 + (2 * eps_star).exp())).to_integral_value(rounding=ROUND_CEILING))


def active_wrapper(seed: int, cache: dict) -> Outcome:
    mism = 0
    grid = list(itertools.product([1, 7, 50, 120, 822, 1000], ["0.1", "0.25", "0.5", "1"], ["0", "0.5", "1", "2"]))
    for n, e, es in grid:
        mism += subsample_active_size(n, float(es), float(e)) != _exact_pool_size(n, Decimal(e), Decimal(es))

    T = ConceptClass.thresholds(3)
    m, n = 210, 822  # labeled and total sizes of the unwrapped learner
    lengths = []
    for j, eps in enumerate((0.25, 0.5, 1.0)):
        for k in range(5):
            rng = make_rng(derive_seed(seed, j, k))
            t = subsample_active_size(n, 2.0, eps)
            pool = rng.integers(0, 8, t)
            oracle = LabelOracle.for_concept(T[int(rng.integers(0, 9))], pool, budget=m)
            res = sub_sampling_active(generic_ssl(T, 0.2, 0.2, 1.0, kappa=0.4), PrivacyParams(2.0), n, m, eps,
                                      pool, oracle, rng)
            lengths.append([eps, k, t, len(res.transcript), oracle.count])
    lengths_ok = all(r[3] == m and r[4] == m for r in lengths)

    # at the formula sizes both learners are nearly always exact, so also compare
    # at a small sample where the error is visibly nonzero
    small = {**GENERIC["params"], "m": 10, "n_unlabeled": 30, "kappa": 0.2}
    wrapped = _wrapped_pair(seed, GENERIC["params"], 0)
    plain = _generic_report(seed, cache)
    wrapped_small = _wrapped_pair(seed, small, 1)
    plain_small = harness.run_experiment(harness.ExperimentConfig.from_dict(
        {**GENERIC, "root_seed": derive_seed(seed, 2), "params": small}))
    comps = [_compare(wrapped, plain), _compare(wrapped_small, plain_small)]
    utility_ok = all(c[0] for c in comps)
    ok = mism == 0 and lengths_ok and utility_ok
    detail = (f"pool size mismatches {mism}/{len(grid)}; transcript length == {m}: {lengths_ok}; "
              + "; ".join(c[1] for c in comps))
    return Outcome(ok, detail, _csv(["eps", "run", "pool", "transcript", "oracle"], lengths)
                   + harness.trial_csv([wrapped, wrapped_small, plain_small]))


def _wrapped_pair(seed: int, params: dict, point: int) -> harness.TrialReport:
    cfg = harness.ExperimentConfig.from_dict(
        {**GENERIC, "learner": "sub_sampling_active", "root_seed": derive_seed(seed, 1),
         "params": {**params, "inner_epsilon": 1.0}})
    return harness.run_experiment(cfg, point=point)


def _compare(wrapped: harness.TrialReport, plain: harness.TrialReport) -> tuple[bool, str]:
    """Failure fractions and mean errors agree within two standard deviations."""
    fw, fu, n = wrapped.failure_fraction, plain.failure_fraction, len(plain.trials)
    pooled = (fw + fu) / 2
    sd_f = math.sqrt(pooled * (1 - pooled) * 2 / n)
    ew = np.array([t.error for t in wrapped.trials])
    eu = np.array([t.error for t in plain.trials])
    sd_e = math.sqrt(ew.var(ddof=1) / ew.size + eu.var(ddof=1) / eu.size)
    ok = abs(fw - fu) <= 2 * sd_f and abs(ew.mean() - eu.mean()) <= 2 * sd_e
    m = wrapped.trials[0].labeled_used
    return ok, (f"m={m}: failure {fw:.3f} vs {fu:.3f} (2sd {2 * sd_f:.3f}), "
                f"mean error {ew.mean():.4f} vs {eu.mean():.4f} (2sd {2 * sd_e:.4f})")


# -- runner ----------------------------------------------------------------------------------------------

CRITERIA = {
    1: ("exponential mechanism utility bound", em_utility, 30),
    2: ("exponential mechanism output distribution", em_distribution, 10),
    3: ("disagreement class VC dimension and projection law", xor_vc, 120),
    4: ("Sauer bound on every enumerated projection", sauer, 120),
    5: ("sanitizer accuracy", sanitizer_utility, 300),
    6: ("generic learner end to end", generic_end_to_end, 600),
    7: ("label boosting utility and label count", boost_utility, 600),
    8: ("label complexity scaling in alpha", label_scaling, 900),
    9: ("audit: exponential mechanism", em_audit, 60),
    10: ("audit: relabel then learn", procedure_audit, 300),
    11: ("active subsampling wrapper", active_wrapper, 600),
}
SHARED_CACHE: dict = {}


def _line(k: int, title: str, ok: bool, detail: str, elapsed: float, limit: float | None) -> str:
    timing = f"{elapsed:.1f}s" + (f" < {limit}s" if limit is not None else "")
    return f"[{'PASS' if ok else 'FAIL'}] {k:>2} {title}: {detail} ({timing})"


@pytest.mark.parametrize("k", sorted(CRITERIA))
def test_criterion(k):
    title, fn, limit = CRITERIA[k]
    t0 = time.perf_counter()
    out = fn(derive_seed(ROOT_SEED, k), SHARED_CACHE)
    elapsed = time.perf_counter() - t0
    FIRST_RUN[k] = out.csv
    ok = out.ok and elapsed < limit
    line = _line(k, title, ok, out.detail, elapsed, limit)
    REPORT.append(line)
    print(line)
    assert out.ok, line
    assert elapsed < limit, line


def test_determinism():
    t0 = time.perf_counter()
    diffs = []
    for k, (_, fn, _) in sorted(CRITERIA.items()):
        seed = derive_seed(ROOT_SEED, k)
        first = FIRST_RUN.get(k) or fn(seed, {}).csv
        again = fn(seed, {}).csv
        if _digest(first) != _digest(again):
            diffs.append(k)
    ok = not diffs
    detail = f"{len(CRITERIA)} experiments rerun, CSV hashes differ for {diffs or 'none'}"
    line = _line(12, "byte-identical reruns", ok, detail, time.perf_counter() - t0, None)
    REPORT.append(line)
    print(line)
    assert ok, line
