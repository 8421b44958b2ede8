"""Seeded experiment runner and report writers.

A config is a JSON object::

    {"learner": "generic_private",
     "params": {"alpha": 0.2, "beta": 0.2, "epsilon": 1.0, "m": 16},
     "concept_class": {"family": "thresh", "d": 3},
     "distribution": {"type": "uniform"},
     "target": {"index": 3} | "random",
     "trials": 100, "root_seed": 7,
     "sweep": {"axis": "m", "values": [4, 8, 16]},
     "output": {"dir": "out", "name": "exp"}}

Trial ``k`` of sweep point ``j`` draws everything from
``derive_seed(root_seed, j, k)``, so reports depend on the config and the
root seed only. CSV files carry no timing data and are byte-identical across
reruns; wall times go to the JSON aggregate.
"""
from __future__ import annotations

import copy
import csv
import io
import json
import math
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import active, audit
from .concepts import ConceptClass, Distribution, generalization_error, vc_dimension
from .data import PartiallyLabeledDatabase
from .errors import ConfigError, DomainError, LearnerFailure, ProtocolError, ResourceError
from .learners import (
    LearnerOutput,
    constant_base,
    erm_learner,
    generic_learner,
    generic_learner_sizes,
    generic_private_learner,
    generic_private_sample_size,
    generic_ssl,
    label_boost,
    label_boost_labeled_size,
    label_boost_unlabeled_size,
    private_base,
)
from .mechanisms import Mechanism, PrivacyParams, select_hypothesis, subsample_active_size, utility_bound_check
from .rng import derive_seed, make_rng

TRIAL_SCHEMA = "# pssl-trial-report v1"
CURVE_SCHEMA = "# pssl-curve v1"
AUDIT_SCHEMA = "# pssl-audit-report v1"
TRIAL_COLUMNS = [
    "sweep_axis", "sweep_value", "trial", "seed", "target", "hypothesis", "status",
    "error", "error_lower", "error_upper", "failed", "labeled_used", "unlabeled_used", "iterations",
]
CURVE_COLUMNS = [
    "axis", "value", "trials", "failures", "failure_fraction", "failure_sigma",
    "mean_error", "labeled_used_mean", "bound",
]
SWEEP_AXES = ("m", "n", "alpha", "epsilon")
LEARNERS = ("erm", "generic_private", "generic", "label_boost", "label_boost_agnostic", "sub_sampling_active")


def fmt(x: Any) -> str:
    """Stable text form for CSV cells."""
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        return f"{x:.12g}"
    return str(x)


# -- config ----------------------------------------------------------------------


@dataclass
class ExperimentConfig:
    learner: str
    params: dict
    concept_class: ConceptClass
    distribution: Distribution
    target: int | None  # None: random per trial
    trials: int
    root_seed: int
    sweep_axis: str | None = None
    sweep_values: list = field(default_factory=list)
    out_dir: Path | None = None
    name: str = "experiment"
    raw: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, raw: dict, base_dir: Path | None = None) -> ExperimentConfig:
        try:
            learner = raw["learner"]
            if learner not in LEARNERS:
                raise ConfigError(f"unknown learner {learner!r}; choose from {', '.join(LEARNERS)}")
            klass = ConceptClass.from_spec(raw["concept_class"], base_dir)
            dist = Distribution.from_spec(klass.domain, raw.get("distribution", {"type": "uniform"}))
            target = raw.get("target", "random")
            if target == "random":
                target_idx = None
            else:
                target_idx = int(target["index"] if isinstance(target, dict) else target)
                if not 0 <= target_idx < len(klass):
                    raise ConfigError(f"target index {target_idx} outside the class")
            trials = int(raw.get("trials", 1))
            if trials < 1:
                raise ConfigError("trials must be at least 1")
            sweep = raw.get("sweep")
            axis, values = None, []
            if sweep is not None:
                axis = sweep["axis"]
                if axis not in SWEEP_AXES:
                    raise ConfigError(f"sweep axis must be one of {SWEEP_AXES}")
                values = list(sweep.get("values", []))
            out = raw.get("output", {})
            out_dir = Path(out["dir"]) if "dir" in out else None
            if out_dir is not None and base_dir is not None and not out_dir.is_absolute():
                out_dir = base_dir / out_dir
            return cls(learner, dict(raw.get("params", {})), klass, dist, target_idx, trials,
                       int(raw.get("root_seed", 0)), axis, values, out_dir, out.get("name", "experiment"), raw)
        except ConfigError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad experiment config: {exc}") from exc

    @classmethod
    def load(cls, path: str | Path) -> ExperimentConfig:
        path = Path(path)
        return cls.from_dict(load_json(path), path.parent)

    def with_param(self, axis: str, value: Any) -> ExperimentConfig:
        out = copy.copy(self)
        out.params = {**self.params, axis: value}
        return out


def load_json(path: str | Path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc


def _param(p: dict, key: str, default: Any = None) -> Any:
    if key in p and p[key] is not None:
        return p[key]
    if default is None:
        raise ConfigError(f"missing parameter {key!r}")
    return default


# -- per-trial execution -------------------------------------------------------------


@dataclass
class TrialResult:
    trial: int
    seed: int
    target: int
    hypothesis: int | str
    status: str
    error: float
    error_lower: float
    error_upper: float
    failed: bool
    labeled_used: int
    unlabeled_used: int
    iterations: int
    wall_time: float
    privacy: PrivacyParams | None = None


def _vc(klass: ConceptClass) -> int:
    return klass.known_vc if klass.known_vc is not None else vc_dimension(klass)


def _label_boost_sizes(cfg: ExperimentConfig, p: dict) -> tuple[int, int, int, float]:
    klass = cfg.concept_class
    alpha, beta = _param(p, "alpha"), _param(p, "beta")
    scale = float(p.get("scale", 1.0))
    base_eps = float(p.get("base_epsilon", 1.0))
    n = p.get("n")
    if n is None:
        n = math.ceil(generic_private_sample_size(len(klass), alpha, beta, base_eps) / scale)
    agn = cfg.learner == "label_boost_agnostic"
    m = p.get("m")
    if m is None or m == "auto":
        m = label_boost_labeled_size(alpha, beta, _vc(klass), scale, agn)
    return int(n), int(m), label_boost_unlabeled_size(int(n), scale), scale


def planned_labeled(cfg: ExperimentConfig) -> int:
    """Labeled records a trial of ``cfg`` is configured to use."""
    p = cfg.params
    if cfg.learner in ("label_boost", "label_boost_agnostic"):
        return _label_boost_sizes(cfg, p)[1]
    if cfg.learner in ("generic", "sub_sampling_active"):
        return _generic_sizes(cfg, p)[0]
    return int(_param(p, "m"))


def _generic_sizes(cfg: ExperimentConfig, p: dict) -> tuple[int, int]:
    alpha, beta, eps = _param(p, "alpha"), _param(p, "beta"), _param(p, "epsilon")
    m0, n0 = generic_learner_sizes(_vc(cfg.concept_class), cfg.concept_class.domain.d * cfg.concept_class.domain.ell,
                                   alpha, beta, eps, p.get("kappa_m", 1.0), p.get("kappa_n", 1.0))
    return int(p.get("m", m0)), int(p.get("n_unlabeled", n0))


def run_learner(cfg: ExperimentConfig, p: dict, target: int, rng: np.random.Generator) -> LearnerOutput:
    """Draw one trial's data and run the configured learner on it."""
    klass, mu = cfg.concept_class, cfg.distribution
    c = klass[target]
    if cfg.learner in ("erm", "generic_private"):
        m = int(_param(p, "m"))
        S = mu.sample(rng, m)
        y = c.labels(S)
        if cfg.learner == "erm":
            h = erm_learner(S, y, klass)
            priv = PrivacyParams(math.inf, 0.0)
        else:
            eps = _param(p, "epsilon")
            h = generic_private_learner(S, y, klass, eps, rng)
            priv = PrivacyParams(eps, 0.0)
        return LearnerOutput(h, m, 0, priv)
    if cfg.learner == "generic":
        m, n_unl = _generic_sizes(cfg, p)
        S = mu.sample(rng, m)
        D = mu.sample(rng, n_unl)
        return generic_learner(D, S, c.labels(S), klass, _param(p, "alpha"), _param(p, "beta"),
                               _param(p, "epsilon"), rng, kappa=p.get("kappa", 1.0))
    if cfg.learner in ("label_boost", "label_boost_agnostic"):
        n, m, n_unl, scale = _label_boost_sizes(cfg, p)
        base_spec = p.get("base", "generic_private")
        if base_spec == "constant":
            base = constant_base(klass, n, int(p.get("base_index", 0)))
        else:
            base = private_base(klass, n, float(p.get("base_epsilon", 1.0)))
        S = mu.sample(rng, m)
        D = mu.sample(rng, n_unl)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return label_boost(D, S, c.labels(S), base, _param(p, "alpha"), _param(p, "beta"), rng,
                               scale=scale, agnostic=cfg.learner == "label_boost_agnostic")
    if cfg.learner == "sub_sampling_active":
        alpha, beta, eps = _param(p, "alpha"), _param(p, "beta"), _param(p, "epsilon")
        inner_eps = float(p.get("inner_epsilon", 1.0))
        m, n_unl = _generic_sizes(cfg, p)
        n = m + n_unl
        A = generic_ssl(klass, alpha, beta, inner_eps, kappa=p.get("kappa", 1.0))
        # the inner learner is 2*eps-DP under the conservative accounting
        A_priv = PrivacyParams(2 * inner_eps, 0.0)
        t = subsample_active_size(n, A_priv.epsilon, eps)
        pool = mu.sample(rng, t)
        oracle = active.LabelOracle.for_concept(c, pool, m)
        res = active.sub_sampling_active(A, A_priv, n, m, eps, pool, oracle, rng)
        if oracle.count != len(res.transcript):
            raise ProtocolError("oracle counter and transcript length disagree")
        return LearnerOutput(res.hypothesis, res.labeled_used, t - res.labeled_used, res.privacy,
                             {"transcript": list(res.transcript.indices)})
    raise ConfigError(f"unknown learner {cfg.learner!r}")


def run_trial(cfg: ExperimentConfig, p: dict, point: int, k: int) -> TrialResult:
    seed = derive_seed(cfg.root_seed, point, k)
    rng = make_rng(seed)
    target = int(rng.integers(0, len(cfg.concept_class))) if cfg.target is None else cfg.target
    alpha = float(p.get("alpha", 0.0) or 0.0)
    threshold = float(p.get("error_threshold", alpha))
    t0 = time.perf_counter()
    try:
        out = run_learner(cfg, p, target, rng)
    except LearnerFailure:
        return TrialResult(k, seed, target, "", "learner_failure", math.nan, math.nan, math.nan, True,
                           0, 0, 0, time.perf_counter() - t0)
    except ResourceError as exc:
        raise ResourceError(f"trial {k}: {exc}") from exc
    wall = time.perf_counter() - t0
    c = cfg.concept_class[target]
    err_cfg = cfg.raw.get("error", {"mode": "exact"})
    if err_cfg.get("mode", "exact") == "exact":
        est = generalization_error(out.hypothesis, c, cfg.distribution)
    else:
        est = generalization_error(out.hypothesis, c, cfg.distribution, trials=int(err_cfg.get("trials", 10000)),
                                   seed=derive_seed(seed, 1))
    m_limit = planned_labeled(cfg)
    if out.labeled_used > m_limit:
        raise ProtocolError(f"trial {k}: learner used {out.labeled_used} labels, configured {m_limit}")
    hyp = out.hypothesis.index if hasattr(out.hypothesis, "index") else str(out.hypothesis)
    return TrialResult(
        k, seed, target, hyp, "ok", est.value, est.lower, est.upper, est.value > threshold,
        out.labeled_used, out.unlabeled_used, int(out.transcript.get("iterations", 0)), wall, out.privacy,
    )


# -- reports ---------------------------------------------------------------------


@dataclass
class TrialReport:
    config: ExperimentConfig
    axis: str | None
    value: Any
    trials: list[TrialResult]

    @property
    def failures(self) -> int:
        return sum(t.failed for t in self.trials)

    @property
    def failure_fraction(self) -> float:
        return self.failures / len(self.trials) if self.trials else math.nan

    @property
    def failure_sigma(self) -> float:
        n = len(self.trials)
        f = self.failure_fraction
        return math.sqrt(f * (1 - f) / n) if n else math.nan

    @property
    def mean_error(self) -> float:
        errs = [t.error for t in self.trials if not math.isnan(t.error)]
        return float(np.mean(errs)) if errs else math.nan

    def rows(self) -> list[list[str]]:
        return [
            [fmt(x) for x in (self.axis or "", "" if self.value is None else self.value, t.trial, t.seed, t.target,
                              t.hypothesis, t.status, t.error, t.error_lower, t.error_upper, int(t.failed),
                              t.labeled_used, t.unlabeled_used, t.iterations)]
            for t in self.trials
        ]

    def aggregate(self) -> dict:
        priv = next((t.privacy for t in self.trials if t.privacy is not None), None)
        return {
            "learner": self.config.learner,
            "sweep_axis": self.axis,
            "sweep_value": self.value,
            "trials": len(self.trials),
            "failures": self.failures,
            "failure_fraction": self.failure_fraction,
            "failure_sigma": self.failure_sigma,
            "beta": self.config.params.get("beta"),
            "mean_error": self.mean_error,
            "declared_privacy": None if priv is None else {"epsilon": _jnum(priv.epsilon), "delta": priv.delta},
            "wall_time_total": sum(t.wall_time for t in self.trials),
            "seeds": [t.seed for t in self.trials],
        }


def _jnum(x: float):
    return "inf" if isinstance(x, float) and math.isinf(x) else x


def _map(fn: Callable[[int], TrialResult], n: int, threads: int) -> list[TrialResult]:
    if threads <= 1:
        return [fn(k) for k in range(n)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(n)))  # map keeps trial order


def run_experiment(cfg: ExperimentConfig, threads: int = 1, point: int = 0, axis: str | None = None,
                   value: Any = None) -> TrialReport:
    p = cfg.params
    results = _map(lambda k: run_trial(cfg, p, point, k), cfg.trials, threads)
    return TrialReport(cfg, axis, value, results)


def trial_csv(reports: list[TrialReport]) -> str:
    buf = io.StringIO()
    buf.write(TRIAL_SCHEMA + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRIAL_COLUMNS)
    for rep in reports:
        w.writerows(rep.rows())
    return buf.getvalue()


def bound_for(cfg: ExperimentConfig) -> float:
    """Theory overlay for a sweep point: the exponential mechanism utility bound where it applies."""
    p = cfg.params
    if cfg.learner in ("generic_private", "erm"):
        eps = math.inf if cfg.learner == "erm" else _param(p, "epsilon")
        if math.isinf(eps):
            return 0.0
        return utility_bound_check(len(cfg.concept_class), eps, int(_param(p, "m")), _param(p, "alpha"))
    if cfg.learner in ("label_boost", "label_boost_agnostic"):
        return float(_label_boost_sizes(cfg, p)[1])
    if cfg.learner == "generic":
        m, _ = _generic_sizes(cfg, p)
        return utility_bound_check(len(cfg.concept_class), _param(p, "epsilon"), m, _param(p, "alpha"))
    return math.nan


@dataclass
class Curve:
    axis: str
    reports: list[TrialReport]
    bounds: list[float]

    def rows(self) -> list[list[str]]:
        out = []
        for rep, b in zip(self.reports, self.bounds):
            lab = float(np.mean([t.labeled_used for t in rep.trials]))
            out.append([fmt(x) for x in (self.axis, rep.value, len(rep.trials), rep.failures, rep.failure_fraction,
                                         rep.failure_sigma, rep.mean_error, lab, b)])
        return out

    def csv(self) -> str:
        buf = io.StringIO()
        buf.write(CURVE_SCHEMA + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CURVE_COLUMNS)
        w.writerows(self.rows())
        return buf.getvalue()


def sample_complexity_curve(cfg: ExperimentConfig, threads: int = 1) -> Curve:
    if cfg.sweep_axis is None:
        raise ConfigError("config has no sweep")
    reports, bounds = [], []
    for j, v in enumerate(cfg.sweep_values):
        sub = cfg.with_param(cfg.sweep_axis, v)
        reports.append(run_experiment(sub, threads, point=j, axis=cfg.sweep_axis, value=v))
        bounds.append(bound_for(sub))
    return Curve(cfg.sweep_axis, reports, bounds)


def summary_table(header: list[str], rows: list[list[str]]) -> str:
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h) for i, h in enumerate(header)]
    lines = ["  ".join(h.rjust(w) for h, w in zip(header, widths))]
    lines += ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in rows]
    return "\n".join(lines)


def write_outputs(out_dir: Path, files: dict[str, str]) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, text in files.items():
        path = out_dir / name
        path.write_text(text)
        written.append(path)
    return written


# -- audits ----------------------------------------------------------------------


def _records(klass: ConceptClass, recs: list) -> tuple[np.ndarray, np.ndarray]:
    pts = klass.domain.encode_many([r[0] for r in recs])
    return pts, np.array([r[1] for r in recs], dtype=np.int64)


def build_audit(spec: dict, base_dir: Path | None = None) -> tuple[Any, audit.NeighborPair, float, dict]:
    """Resolve one audit spec into ``(mechanism, pair, delta, options)``."""
    kind = spec.get("mechanism")
    try:
        if kind == "randomized_response":
            M = audit.randomized_response(float(spec["epsilon"]))
            pair = audit.neighbors(np.array([0]), 0, 1)
            return M, pair, 0.0, {}
        if kind == "exponential_mechanism":
            klass = ConceptClass.from_spec(spec["concept_class"], base_dir)
            cand = np.asarray(spec["candidates"], dtype=np.int64)
            eps = float(spec["epsilon"])
            pts, lab = _records(klass, spec["sample"])
            db = PartiallyLabeledDatabase(pts, lab)
            M = Mechanism(f"exponential_mechanism(eps={eps:g})", PrivacyParams(eps, 0.0),
                          lambda d, rng: select_hypothesis(eps, cand, klass.table, d.points, d.labels, rng))
            i = int(spec["neighbor"]["index"])
            rep = spec["neighbor"]["record"]
            pair = audit.neighbors(db, i, (klass.domain.encode(rep[0]), int(rep[1])))
            return M, pair, 0.0, {}
        if kind == "label_boost_procedure":
            klass = ConceptClass.from_spec(spec["concept_class"], base_dir)
            S, y = _records(klass, spec["S"])
            T = klass.domain.encode_many(spec.get("T", []))
            D = klass.domain.encode_many(spec.get("D", []))
            db = PartiallyLabeledDatabase.concat(S, y, T, D)
            b = spec.get("base", {"type": "constant"})
            if b.get("type", "constant") == "constant":
                base = constant_base(klass, len(db), int(b.get("index", 0)))
            else:
                base = private_base(klass, len(db), float(b.get("epsilon", 1.0)))
            M = audit.procedure_then_base(klass, base)
            i = int(spec["neighbor"]["index"])
            rep = spec["neighbor"]["record"]
            label = -1 if rep[1] is None else int(rep[1])
            pair = audit.neighbors(db, i, (klass.domain.encode(rep[0]), label))
            return M, pair, M.privacy.delta, {}
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, (DomainError,)):
            raise ConfigError(str(exc)) from exc
        raise ConfigError(f"bad audit spec: {exc}") from exc
    raise ConfigError(f"unknown audit mechanism {kind!r}")


def run_audits(raw: dict, base_dir: Path | None = None, seed: int | None = None,
               trials: int | None = None) -> list[audit.AuditReport]:
    specs = raw.get("audits", [raw])
    root = int(raw.get("root_seed", 0) if seed is None else seed)
    n = int(raw.get("trials", 100000) if trials is None else trials)
    reports = []
    for j, spec in enumerate(specs):
        M, pair, delta, _ = build_audit(spec, base_dir)
        rep = audit.estimate_epsilon(M, pair, delta, n, derive_seed(root, j),
                                     confidence=spec.get("confidence", 0.95),
                                     events=spec.get("events", "singleton"),
                                     coupled=bool(spec.get("coupled", False)),
                                     pair_id=str(spec.get("pair_id", j)),
                                     min_trials=int(spec.get("min_trials", 1000)))
        reports.append(rep)
    return reports


def audit_csv(reports: list[audit.AuditReport]) -> str:
    buf = io.StringIO()
    buf.write(AUDIT_SCHEMA + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["mechanism", "pair_id", "epsilon_hat", "epsilon_point", "ci_method", "ci_level", "trials", "seed"])
    for r in reports:
        w.writerow([fmt(x) for x in r.csv_row()])
    return buf.getvalue()
