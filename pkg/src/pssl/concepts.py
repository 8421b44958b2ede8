"""Discrete domains, finite concept classes and the combinatorics on them.

Domain points are handled internally as flat integer indices into the domain
(row-major over the axes). Public entry points also accept coordinate tuples.
Every concept class materialises a truth table of shape
``(n_concepts, domain.size)``; the closed-form evaluators exist so the tables
can be cross-checked.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from pathlib import Path
from typing import Any, Callable, Iterable, Iterator, Sequence, Union

import numpy as np

from . import kernels
from .errors import DomainError, ResourceError
from .rng import make_rng

PointLike = Union[int, np.integer, Sequence[int]]

#: Largest truth table (concepts x points) a class may materialise.
MAX_TABLE_ENTRIES = 1 << 26
#: Default budget for the number of candidate sets examined by ``vc_dimension``.
VC_BUDGET = 1 << 20


@dataclass(frozen=True)
class Domain:
    """``bitline(d)`` = {0,...,2^d - 1}; ``grid(d, ell)`` = bitline(d)^ell."""

    kind: str
    d: int
    ell: int = 1

    def __post_init__(self):
        if self.kind not in ("bitline", "grid"):
            raise DomainError(f"unknown domain kind {self.kind!r}")
        if self.d < 0 or self.ell < 1:
            raise DomainError("need d >= 0 and ell >= 1")
        if self.kind == "bitline" and self.ell != 1:
            raise DomainError("a bitline has exactly one axis")

    @classmethod
    def bitline(cls, d: int) -> Domain:
        return cls("bitline", d, 1)

    @classmethod
    def grid(cls, d: int, ell: int) -> Domain:
        return cls("grid", d, ell)

    @property
    def side(self) -> int:
        return 1 << self.d

    @property
    def size(self) -> int:
        return self.side ** self.ell

    def encode(self, x: PointLike) -> int:
        """Flat index of a point given as an int (single axis) or a coordinate tuple."""
        if isinstance(x, (int, np.integer)):
            coords: tuple[int, ...] = (int(x),)
        else:
            coords = tuple(int(v) for v in x)
        if len(coords) != self.ell:
            raise DomainError(f"point {x!r} has {len(coords)} coordinates, domain has {self.ell}")
        flat = 0
        for v in coords:
            if not 0 <= v < self.side:
                raise DomainError(f"coordinate {v} outside [0, {self.side})")
            flat = flat * self.side + v
        return flat

    def encode_many(self, xs: Iterable[PointLike]) -> np.ndarray:
        """Flat indices of many points; a 1-D integer ndarray is taken as flat indices already."""
        if isinstance(xs, np.ndarray) and xs.ndim == 1 and np.issubdtype(xs.dtype, np.integer):
            if xs.size and (xs.min() < 0 or xs.max() >= self.size):
                raise DomainError("point outside the domain")
            return xs.astype(np.int64)
        return np.array([self.encode(x) for x in xs], dtype=np.int64)

    def decode(self, flat: int) -> tuple[int, ...]:
        flat = int(flat)
        if not 0 <= flat < self.size:
            raise DomainError(f"flat index {flat} outside the domain")
        coords = []
        for _ in range(self.ell):
            coords.append(flat % self.side)
            flat //= self.side
        return tuple(reversed(coords))

    def coordinates(self) -> np.ndarray:
        """``(size, ell)`` array of the coordinates of every flat index."""
        idx = np.arange(self.size)
        out = np.empty((self.size, self.ell), dtype=np.int64)
        for axis in range(self.ell - 1, -1, -1):
            out[:, axis] = idx % self.side
            idx = idx // self.side
        return out

    def to_json(self) -> dict:
        if self.kind == "bitline":
            return {"kind": "bitline", "d": self.d}
        return {"kind": "grid", "d": self.d, "ell": self.ell}

    @classmethod
    def from_json(cls, spec: dict) -> Domain:
        try:
            kind = spec["kind"]
            if kind == "bitline":
                return cls.bitline(int(spec["d"]))
            return cls(kind, int(spec["d"]), int(spec.get("ell", spec.get("l", 1))))
        except (KeyError, TypeError) as exc:
            raise DomainError(f"bad domain spec {spec!r}") from exc


def _intervals(side: int) -> list[tuple[int, int]]:
    return [(a, b) for a in range(side) for b in range(a, side)]


@dataclass(frozen=True, eq=False)
class Concept:
    """A member of a concept class, identified by its canonical index."""

    owner: ConceptClass = field(repr=False)
    index: int

    @property
    def class_id(self) -> str:
        return self.owner.class_id

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Concept):
            return NotImplemented
        return self.class_id == other.class_id and self.index == other.index

    def __hash__(self) -> int:
        return hash((self.class_id, self.index))

    def __repr__(self) -> str:
        return f"Concept({self.class_id}, {self.index})"

    def __call__(self, x: PointLike) -> int:
        return evaluate(self.owner, self, x)

    @property
    def truth_table(self) -> np.ndarray:
        return self.owner.table[self.index]

    def labels(self, points: np.ndarray) -> np.ndarray:
        """Labels of an array of flat point indices."""
        return self.owner.table[self.index, np.asarray(points, dtype=np.int64)]

    def describe(self) -> str:
        return self.owner.describe(self.index)


class ConceptClass:
    """A finite family of boolean predicates over a ``Domain``.

    Build instances with the constructors (``thresholds``, ``points``,
    ``intervals``, ``rectangles``, ``xor_of``, ``explicit``) or ``from_spec``.
    """

    def __init__(
        self,
        domain: Domain,
        family: str,
        *,
        known_vc: int | None = None,
        base: ConceptClass | None = None,
        tables: np.ndarray | None = None,
        max_table_entries: int = MAX_TABLE_ENTRIES,
    ):
        self.domain = domain
        self.family = family
        self.known_vc = known_vc
        self.base = base
        self._explicit = tables
        self.max_table_entries = max_table_entries
        self._pairs: np.ndarray | None = None
        self._table: np.ndarray | None = None
        if family == "EXPLICIT":
            assert tables is not None
            self._table = np.ascontiguousarray(tables, dtype=np.uint8)
            self._check_budget(*self._table.shape)

    # -- constructors -----------------------------------------------------

    @classmethod
    def thresholds(cls, d: int) -> ConceptClass:
        """THRESH_d: ``c_j(x) = 1`` iff ``x < j`` for ``0 <= j <= 2^d``."""
        return cls(Domain.bitline(d), "THRESH", known_vc=1)

    @classmethod
    def points(cls, d: int) -> ConceptClass:
        """POINT_d: ``c_j(x) = 1`` iff ``x == j``."""
        return cls(Domain.bitline(d), "POINT", known_vc=1 if d >= 1 else 0)

    @classmethod
    def intervals(cls, d: int) -> ConceptClass:
        """Closed intervals ``[a, b]``; index 0 is the empty interval."""
        return cls(Domain.bitline(d), "INTERVAL", known_vc=2 if d >= 1 else 1)

    @classmethod
    def rectangles(cls, d: int, ell: int) -> ConceptClass:
        """Axis-aligned boxes ``prod [a_i, b_i]`` over ``grid(d, ell)``.

        Every corner pair with some ``a_i > b_i`` denotes the empty set; those
        are merged into index 0 so members are distinct functions.
        """
        vc = 2 * ell if (1 << d) >= 3 else None
        return cls(Domain.grid(d, ell), "RECT", known_vc=vc)

    @classmethod
    def xor_of(cls, base: ConceptClass) -> ConceptClass:
        """``{h xor f : h, f in base}`` with one member per distinct function."""
        return cls(base.domain, "XOR", base=base)

    @classmethod
    def explicit(cls, domain: Domain, tables: Any) -> ConceptClass:
        arr = np.asarray(tables, dtype=np.int64)
        if arr.ndim != 2 or arr.shape[1] != domain.size:
            raise DomainError(f"truth tables must have shape (k, {domain.size})")
        if arr.shape[0] == 0:
            raise DomainError("a concept class needs at least one member")
        if not np.isin(arr, (0, 1)).all():
            raise DomainError("truth tables must be 0/1")
        if np.unique(arr, axis=0).shape[0] != arr.shape[0]:
            raise DomainError("explicit members must be distinct functions")
        return cls(domain, "EXPLICIT", tables=arr.astype(np.uint8))

    @classmethod
    def from_spec(cls, spec: dict, base_dir: Path | None = None) -> ConceptClass:
        """Resolve a JSON-style class spec.

        ``{"family": "thresh", "d": 3}``, ``{"family": "rect", "d": 2, "ell": 2}``,
        ``{"family": "xor", "base": {...}}``, ``{"family": "explicit", "path": ...}``
        or ``{"family": "explicit", "domain": {...}, "truthTables": [...]}``.
        """
        try:
            family = str(spec["family"]).upper()
            if family == "THRESH":
                return cls.thresholds(int(spec["d"]))
            if family == "POINT":
                return cls.points(int(spec["d"]))
            if family == "INTERVAL":
                return cls.intervals(int(spec["d"]))
            if family == "RECT":
                return cls.rectangles(int(spec["d"]), int(spec.get("ell", spec.get("l", 1))))
            if family in ("XOR", "XOR-OF"):
                return cls.xor_of(cls.from_spec(spec["base"], base_dir))
            if family == "EXPLICIT":
                if "path" in spec:
                    path = Path(spec["path"])
                    if base_dir is not None and not path.is_absolute():
                        path = base_dir / path
                    return cls.from_json(path)
                return cls.explicit(Domain.from_json(spec["domain"]), spec["truthTables"])
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, DomainError):
                raise
            raise DomainError(f"bad concept class spec {spec!r}: {exc}") from exc
        raise DomainError(f"unknown concept family {spec.get('family')!r}")

    @classmethod
    def from_json(cls, path: str | Path) -> ConceptClass:
        with open(path) as fh:
            data = json.load(fh)
        return cls.explicit(Domain.from_json(data["domain"]), data["truthTables"])

    def to_json(self) -> dict:
        return {"domain": self.domain.to_json(), "truthTables": self.table.astype(int).tolist()}

    # -- identity and enumeration ------------------------------------------

    @cached_property
    def class_id(self) -> str:
        d = self.domain.d
        if self.family == "RECT":
            return f"RECT_{d}^{self.domain.ell}"
        if self.family == "XOR":
            return f"XOR({self.base.class_id})"
        if self.family == "EXPLICIT":
            digest = hashlib.sha1(self._table.tobytes() + repr(self._table.shape).encode()).hexdigest()
            return f"EXPLICIT[{digest[:12]}]"
        return f"{self.family}_{d}"

    def __repr__(self) -> str:
        return f"ConceptClass({self.class_id})"

    def __len__(self) -> int:
        return self.cardinality

    def __iter__(self) -> Iterator[Concept]:
        for i in range(len(self)):
            yield Concept(self, i)

    def __getitem__(self, index: int) -> Concept:
        if not 0 <= index < len(self):
            raise IndexError(index)
        return Concept(self, int(index))

    @cached_property
    def cardinality(self) -> int:
        side, ell = self.domain.side, self.domain.ell
        if self.family == "THRESH":
            return side + 1
        if self.family == "POINT":
            return side
        if self.family == "INTERVAL":
            return side * (side + 1) // 2 + 1
        if self.family == "RECT":
            return (side * (side + 1) // 2) ** ell + 1
        return self.table.shape[0]

    def _check_budget(self, n_concepts: int, n_points: int) -> None:
        if n_concepts * n_points > self.max_table_entries:
            raise ResourceError(
                f"{self.family} table needs {n_concepts * n_points} entries "
                f"(budget {self.max_table_entries}); use a smaller domain"
            )

    @property
    def table(self) -> np.ndarray:
        """``uint8`` truth table, row ``i`` = concept ``i``."""
        if self._table is None:
            self._table = self._build_table()
        return self._table

    def _build_table(self) -> np.ndarray:
        dom = self.domain
        x = np.arange(dom.size)
        if self.family != "XOR":
            self._check_budget(self.cardinality, dom.size)
        if self.family == "THRESH":
            return (x[None, :] < np.arange(dom.side + 1)[:, None]).astype(np.uint8)
        if self.family == "POINT":
            return (x[None, :] == np.arange(dom.side)[:, None]).astype(np.uint8)
        if self.family == "INTERVAL":
            iv = np.array(_intervals(dom.side)).reshape(-1, 2)
            body = (iv[:, :1] <= x[None, :]) & (x[None, :] <= iv[:, 1:])
            return np.vstack([np.zeros((1, dom.size), bool), body]).astype(np.uint8)
        if self.family == "RECT":
            iv = np.array(_intervals(dom.side))
            coords = dom.coordinates()
            # per-axis membership: (n_intervals, size)
            inside = [
                (iv[:, :1] <= coords[None, :, a]) & (coords[None, :, a] <= iv[:, 1:])
                for a in range(dom.ell)
            ]
            rows = inside[0]
            for a in range(1, dom.ell):
                rows = (rows[:, None, :] & inside[a][None, :, :]).reshape(-1, dom.size)
            return np.vstack([np.zeros((1, dom.size), bool), rows]).astype(np.uint8)
        if self.family == "XOR":
            return self._build_xor()
        raise AssertionError(self.family)

    def _build_xor(self) -> np.ndarray:
        base = self.base.table
        k, size = base.shape
        n_pairs = k * (k + 1) // 2
        self._check_budget(n_pairs, size)
        ii, jj = np.triu_indices(k)
        rows = base[ii] ^ base[jj]
        _, first = np.unique(rows, axis=0, return_index=True)
        first.sort()
        self._pairs = np.stack([ii[first], jj[first]], axis=1)
        return np.ascontiguousarray(rows[first])

    @property
    def pairs(self) -> np.ndarray:
        """Representative base pair ``(h, f)`` for each XOR member."""
        if self.family != "XOR":
            raise DomainError("only XOR classes have representative pairs")
        _ = self.table
        return self._pairs

    # -- closed-form evaluation --------------------------------------------

    def formula(self, index: int, flat_x: int) -> int:
        """Evaluate member ``index`` at ``flat_x`` from its definition, not the table."""
        dom = self.domain
        if self.family == "THRESH":
            return int(flat_x < index)
        if self.family == "POINT":
            return int(flat_x == index)
        if self.family == "INTERVAL":
            if index == 0:
                return 0
            a, b = _intervals(dom.side)[index - 1]
            return int(a <= flat_x <= b)
        if self.family == "RECT":
            if index == 0:
                return 0
            lo, hi = self.corners(index)
            coords = dom.decode(flat_x)
            return int(all(a <= v <= b for a, v, b in zip(lo, coords, hi)))
        if self.family == "XOR":
            h, f = self.pairs[index]
            return self.base.formula(int(h), flat_x) ^ self.base.formula(int(f), flat_x)
        return int(self._table[index, flat_x])

    def corners(self, index: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """Lower and upper corners of a nonempty rectangle."""
        if self.family != "RECT" or index == 0:
            raise DomainError("corners are defined for nonempty rectangles only")
        ivs = _intervals(self.domain.side)
        k = len(ivs)
        rest = index - 1
        picked = []
        for _ in range(self.domain.ell):
            picked.append(ivs[rest % k])
            rest //= k
        picked.reverse()
        return tuple(a for a, _ in picked), tuple(b for _, b in picked)

    def rectangle_index(self, lo: Sequence[int], hi: Sequence[int]) -> int:
        """Canonical index of the box with corners ``lo`` and ``hi``."""
        if any(a > b for a, b in zip(lo, hi)):
            return 0
        ivs = {iv: i for i, iv in enumerate(_intervals(self.domain.side))}
        idx = 0
        for a, b in zip(lo, hi):
            idx = idx * len(ivs) + ivs[(int(a), int(b))]
        return idx + 1

    def describe(self, index: int) -> str:
        if self.family in ("THRESH", "POINT"):
            return f"c_{index}"
        if self.family == "INTERVAL":
            return "empty" if index == 0 else "[{}, {}]".format(*_intervals(self.domain.side)[index - 1])
        if self.family == "RECT":
            return "empty" if index == 0 else "c_[{}, {}]".format(*self.corners(index))
        if self.family == "XOR":
            h, f = self.pairs[index]
            return f"{self.base.describe(int(h))} xor {self.base.describe(int(f))}"
        return f"#{index}"


# -- operations ---------------------------------------------------------------


def evaluate(cls: ConceptClass, c: Concept, x: PointLike) -> int:
    """Label of point ``x`` under concept ``c`` of ``cls``."""
    if c.class_id != cls.class_id:
        raise DomainError(f"concept of {c.class_id} evaluated against {cls.class_id}")
    if not 0 <= c.index < len(cls):
        raise DomainError(f"concept index {c.index} outside {cls.class_id}")
    return int(cls.table[c.index, cls.domain.encode(x)])


def _unique_points(cls: ConceptClass, B: Iterable[PointLike]) -> np.ndarray:
    flat = cls.domain.encode_many(B)
    if flat.size == 0:
        raise DomainError("point set must be nonempty")
    _, first = np.unique(flat, return_index=True)
    return flat[np.sort(first)]


def _dichotomy_groups(cls: ConceptClass, pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Distinct dichotomies on ``pts`` as packed codes, with the lowest index realising each."""
    if pts.size <= 62:
        codes = kernels.pack_codes(cls.table, pts)
        uniq, first = np.unique(codes, return_index=True)
        return uniq, first
    rows = cls.table[:, pts]
    uniq, first = np.unique(rows, axis=0, return_index=True)
    return uniq, first


def projection(cls: ConceptClass, B: Iterable[PointLike]) -> set[tuple[int, ...]]:
    """All dichotomies ``cls`` realises on ``B`` (deduplicated, first-seen order)."""
    pts = _unique_points(cls, B)
    uniq, _ = _dichotomy_groups(cls, pts)
    if uniq.ndim == 2:
        return {tuple(int(v) for v in row) for row in uniq}
    k = pts.size
    return {tuple((int(code) >> i) & 1 for i in range(k)) for code in uniq}


def projection_size(cls: ConceptClass, B: Iterable[PointLike]) -> int:
    pts = _unique_points(cls, B)
    return int(_dichotomy_groups(cls, pts)[0].shape[0])


def dichotomy_cover(cls: ConceptClass, points: Iterable[PointLike]) -> np.ndarray:
    """One concept per dichotomy on ``points``: the lowest-index one, ascending.

    This is the hypothesis set built from a point set by both the generic
    learner and the relabeling procedure.
    """
    pts = _unique_points(cls, points)
    _, first = _dichotomy_groups(cls, pts)
    return np.sort(first).astype(np.int64)


def consistent_concept(cls: ConceptClass, B: Sequence[PointLike], z: Sequence[int]) -> Concept | None:
    """Lowest-index concept with ``c(B[i]) == z[i]`` for all i, or None."""
    if len(B) != len(z):
        raise DomainError("point list and label vector differ in length")
    pts = cls.domain.encode_many(B)
    want = np.asarray(z, dtype=np.uint8)
    if pts.size == 0:
        return cls[0]
    match = np.all(cls.table[:, pts] == want[None, :], axis=1)
    hits = np.flatnonzero(match)
    return cls[int(hits[0])] if hits.size else None


def is_shattered(cls: ConceptClass, B: Iterable[PointLike]) -> bool:
    pts = _unique_points(cls, B)
    return projection_size(cls, pts) == 2 ** pts.size


def vc_dimension(cls: ConceptClass, budget: int = VC_BUDGET) -> int:
    """Exact VC dimension by level-wise search over shattered sets.

    A ``(k+1)``-set can only be shattered if dropping its largest point leaves a
    shattered ``k``-set, so each level is generated by extending the previous
    one with larger points. ``budget`` caps the number of candidate sets
    examined; exceeding it raises ``ResourceError``.
    """
    table = cls.table
    n_points = table.shape[1]
    # the empty set is always shattered; size-1 sets need both labels present
    level: list[tuple[int, ...]] = [()]
    k = 0
    examined = 0
    while level:
        nxt: list[tuple[int, ...]] = []
        for s in level:
            start = s[-1] + 1 if s else 0
            if start >= n_points:
                continue
            examined += n_points - start
            if examined > budget:
                raise ResourceError(
                    f"VC search on {cls.class_id} exceeded {budget} candidate sets; raise the budget"
                )
            codes = kernels.pack_codes(table, np.array(s, dtype=np.int64))
            counts = kernels.extension_counts(table, codes, k, start)
            full = 1 << (k + 1)
            for off in np.flatnonzero(counts == full):
                nxt.append(s + (start + int(off),))
        if not nxt:
            return k
        level = nxt
        k += 1
    return k


def sauer_bound(n_points: int, vc: int) -> float:
    """``(e * |B| / VC)^VC``; for VC 0 the class realises a single dichotomy."""
    if vc == 0:
        return 1.0
    return (math.e * n_points / vc) ** vc


# -- error measures -----------------------------------------------------------

Predicate = Union[Concept, np.ndarray, Callable[[int], int]]


def predict(h: Predicate, points: np.ndarray) -> np.ndarray:
    """Labels of flat ``points`` under a concept, a truth table, or a callable."""
    points = np.asarray(points, dtype=np.int64)
    if isinstance(h, Concept):
        return h.labels(points).astype(np.int8)
    if isinstance(h, np.ndarray):
        return h[points].astype(np.int8)
    return np.array([int(h(int(p))) for p in points], dtype=np.int8)


def empirical_error(h: Predicate, points: Sequence[int] | np.ndarray, labels: Sequence[int] | np.ndarray) -> Fraction:
    """Fraction of labeled records ``h`` gets wrong, as an exact rational."""
    points = np.asarray(points, dtype=np.int64)
    labels = np.asarray(labels, dtype=np.int64)
    if points.size == 0:
        raise DomainError("empirical error of an empty sample")
    if points.shape != labels.shape:
        raise DomainError("points and labels differ in length")
    if not np.isin(labels, (0, 1)).all():
        raise DomainError("empirical error needs labels in {0, 1}")
    wrong = int(np.count_nonzero(predict(h, points) != labels))
    return Fraction(wrong, points.size)


def disagreement(h: Predicate, c: Predicate, points: Sequence[int] | np.ndarray) -> Fraction:
    """Fraction of ``points`` where ``h`` and ``c`` disagree."""
    points = np.asarray(points, dtype=np.int64)
    return empirical_error(h, points, predict(c, points))


class Distribution:
    """A probability table over the flat points of a domain."""

    def __init__(self, domain: Domain, weights: Sequence[float] | np.ndarray | None = None):
        self.domain = domain
        if weights is None:
            self.kind = "uniform"
            self.weights = np.full(domain.size, 1.0 / domain.size)
        else:
            w = np.asarray(weights, dtype=np.float64)
            if w.shape != (domain.size,):
                raise DomainError(f"need {domain.size} weights, got {w.shape}")
            if (w < 0).any() or abs(w.sum() - 1.0) > 1e-9:
                raise DomainError("weights must be nonnegative and sum to 1 (within 1e-9)")
            self.kind = "table"
            self.weights = w

    @classmethod
    def uniform(cls, domain: Domain) -> Distribution:
        return cls(domain)

    @classmethod
    def from_spec(cls, domain: Domain, spec: dict) -> Distribution:
        kind = spec.get("type")
        if kind == "uniform":
            return cls(domain)
        if kind == "table":
            return cls(domain, spec["weights"])
        raise DomainError(f"unknown distribution type {kind!r}")

    def to_json(self) -> dict:
        if self.kind == "uniform":
            return {"type": "uniform"}
        return {"type": "table", "weights": self.weights.tolist()}

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.kind == "uniform":
            return rng.integers(0, self.domain.size, size=size, dtype=np.int64)
        return rng.choice(self.domain.size, size=size, p=self.weights).astype(np.int64)


@dataclass(frozen=True)
class ErrorEstimate:
    value: float
    lower: float
    upper: float
    exact: bool
    trials: int = 0


def generalization_error(
    h: Predicate,
    c: Predicate,
    mu: Distribution,
    trials: int | None = None,
    seed: int | None = None,
    confidence: float = 0.95,
) -> ErrorEstimate:
    """``Pr_{x~mu}[h(x) != c(x)]``.

    With ``trials=None`` the probability is summed exactly over the table.
    Otherwise it is estimated from ``trials`` draws with a two-sided Hoeffding
    interval at ``confidence``.
    """
    if trials is None:
        pts = np.arange(mu.domain.size)
        diff = predict(h, pts) != predict(c, pts)
        value = float(mu.weights[diff].sum())
        return ErrorEstimate(value, value, value, exact=True)
    if trials < 1:
        raise DomainError("need at least one trial")
    rng = make_rng(seed)
    pts = mu.sample(rng, trials)
    value = float(np.mean(predict(h, pts) != predict(c, pts)))
    half = math.sqrt(math.log(2.0 / (1.0 - confidence)) / (2.0 * trials))
    return ErrorEstimate(value, max(0.0, value - half), min(1.0, value + half), exact=False, trials=trials)


def all_subsets(points: Sequence[int], size: int) -> Iterator[tuple[int, ...]]:
    return combinations(points, size)
