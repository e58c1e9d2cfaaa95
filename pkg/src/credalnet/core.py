"""Frames, domains, configuration indexing and the two kinds of valuation.

A domain orders its variables by ascending name. Configurations of a domain
are numbered in mixed radix with the *last* variable varying fastest, which
is exactly numpy's C order: a probability vector on a domain reshapes to an
array of shape ``domain.shape`` with one axis per variable.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import CoherenceError, DomainError, EmptyCredalSet, InvalidState, ThresholdExceeded

COHERENCE_TOL = 1e-9
PMF_SUM_TOL = 1e-12
VERTEX_DEDUP_TOL = 1e-12
DEFAULT_VERTEX_THRESHOLD = 16


@dataclass(frozen=True)
class Variable:
    name: str
    frame: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "frame", tuple(str(s) for s in self.frame))
        if not self.name:
            raise DomainError("variable name must be non-empty")
        if len(self.frame) < 1:
            raise DomainError(f"variable {self.name!r} has an empty frame")
        if len(set(self.frame)) != len(self.frame):
            raise DomainError(f"variable {self.name!r} has duplicate frame labels")

    @property
    def size(self) -> int:
        return len(self.frame)

    def state_index(self, label: str) -> int:
        try:
            return self.frame.index(str(label))
        except ValueError:
            raise InvalidState(f"{label!r} is not a state of {self.name}") from None

    def __repr__(self):
        return f"Variable({self.name}:{{{','.join(self.frame)}}})"


@dataclass(frozen=True)
class Domain:
    """An ordered set of variables; order is ascending variable name."""

    variables: tuple[Variable, ...] = ()

    def __post_init__(self):
        vs = tuple(sorted(self.variables, key=lambda v: v.name))
        names = [v.name for v in vs]
        if len(set(names)) != len(names):
            dup = sorted({n for n in names if names.count(n) > 1})
            raise DomainError(f"duplicate variables in domain: {dup}")
        object.__setattr__(self, "variables", vs)

    @classmethod
    def of(cls, *variables: Variable) -> "Domain":
        return cls(tuple(variables))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(v.size for v in self.variables)

    @property
    def cardinality(self) -> int:
        return math.prod(self.shape)

    def __len__(self):
        return len(self.variables)

    def __iter__(self):
        return iter(self.variables)

    def __contains__(self, item) -> bool:
        name = item.name if isinstance(item, Variable) else item
        return name in self.names

    def __getitem__(self, name: str) -> Variable:
        for v in self.variables:
            if v.name == name:
                return v
        raise DomainError(f"variable {name!r} not in domain {self}")

    def axis(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise DomainError(f"variable {name!r} not in domain {self}") from None

    def union(self, other: "Domain") -> "Domain":
        merged = {v.name: v for v in self.variables}
        for v in other.variables:
            if v.name in merged and merged[v.name] != v:
                raise DomainError(f"conflicting frames for variable {v.name!r}")
            merged[v.name] = v
        return Domain(tuple(merged.values()))

    def intersection(self, other: "Domain") -> "Domain":
        return Domain(tuple(v for v in self.variables if v.name in other))

    def difference(self, other) -> "Domain":
        drop = set(other.names) if isinstance(other, Domain) else {
            o.name if isinstance(o, Variable) else o for o in other}
        return Domain(tuple(v for v in self.variables if v.name not in drop))

    def issubset(self, other: "Domain") -> bool:
        return all(v.name in other and other[v.name] == v for v in self.variables)

    __or__ = union
    __and__ = intersection
    __sub__ = difference
    __le__ = issubset

    def __str__(self):
        return "{" + ",".join(self.names) + "}"


def config_encode(domain: Domain, states) -> int:
    """Mixed-radix index of a configuration.

    ``states`` is either a mapping from variable name to state index or a
    sequence of state indices in the domain's canonical order.
    """
    if isinstance(states, Mapping):
        missing = [n for n in domain.names if n not in states]
        if missing:
            raise InvalidState(f"no state given for {missing}")
        states = [states[n] for n in domain.names]
    states = list(states)
    if len(states) != len(domain):
        raise InvalidState(f"expected {len(domain)} states, got {len(states)}")
    index = 0
    for var, s in zip(domain.variables, states):
        s = int(s)
        if not 0 <= s < var.size:
            raise InvalidState(f"state {s} out of range for {var.name} (size {var.size})")
        index = index * var.size + s
    return index


def config_decode(domain: Domain, index: int) -> tuple[int, ...]:
    if not 0 <= index < domain.cardinality:
        raise InvalidState(f"configuration index {index} out of range for {domain}")
    out = []
    for size in reversed(domain.shape):
        index, s = divmod(index, size)
        out.append(s)
    return tuple(reversed(out))


def config_labels(domain: Domain, index: int) -> dict[str, str]:
    return {v.name: v.frame[s] for v, s in zip(domain.variables, config_decode(domain, index))}


def _as_vector(values, n: int, what: str) -> np.ndarray:
    arr = np.array(values, dtype=float).reshape(-1)
    if arr.shape != (n,):
        raise DomainError(f"{what} has {arr.size} entries, domain has {n} configurations")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{what} contains non-finite values")
    return arr


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class PmfValuation:
    domain: Domain
    probs: np.ndarray

    def __post_init__(self):
        p = _as_vector(self.probs, self.domain.cardinality, "probs")
        if np.any(p < -PMF_SUM_TOL):
            raise DomainError("negative probability in PMF")
        p = np.maximum(p, 0.0)
        if abs(p.sum() - 1.0) > PMF_SUM_TOL:
            raise DomainError(f"PMF sums to {p.sum():.15g}, not 1")
        object.__setattr__(self, "probs", _freeze(p))

    @classmethod
    def uniform(cls, domain: Domain) -> "PmfValuation":
        n = domain.cardinality
        return cls(domain, np.full(n, 1.0 / n))

    def table(self) -> np.ndarray:
        """Probabilities as an array with one axis per variable."""
        return self.probs.reshape(self.domain.shape)

    @property
    def label(self) -> Domain:
        return self.domain

    def __repr__(self):
        return f"PmfValuation({self.domain}, {np.array2string(self.probs, precision=4)})"


@dataclass(frozen=True)
class CoherenceReport:
    cond1_ok: bool
    reachable_ok: bool
    violating_indices: tuple[int, ...] = ()

    @property
    def ok(self) -> bool:
        return self.cond1_ok and self.reachable_ok

    def __bool__(self):
        return self.ok


def check_coherence(v, upper=None, tol: float = COHERENCE_TOL) -> CoherenceReport:
    """Non-emptiness and reachability of probability intervals.

    Accepts an :class:`IntervalValuation` or a pair of raw ``lower, upper``
    vectors. Pure diagnostic: never raises on incoherent input.
    """
    if upper is None:
        lower, upper = v.lower, v.upper
    else:
        lower = v
    lo = np.asarray(lower, dtype=float)
    up = np.asarray(upper, dtype=float)
    s_lo, s_up = lo.sum(), up.sum()
    cond1 = bool(s_lo <= 1 + tol and s_up >= 1 - tol)
    reach_upper = (s_lo - lo) + up <= 1 + tol
    reach_lower = (s_up - up) + lo >= 1 - tol
    bad = np.flatnonzero(~(reach_upper & reach_lower))
    return CoherenceReport(cond1, bad.size == 0, tuple(int(i) for i in bad))


def _tighten_arrays(lower, upper, tol: float = COHERENCE_TOL) -> tuple[np.ndarray, np.ndarray]:
    lo = np.array(lower, dtype=float).reshape(-1)
    up = np.array(upper, dtype=float).reshape(-1)
    if lo.shape != up.shape:
        raise DomainError("lower and upper vectors differ in length")
    if np.any(lo < -tol) or np.any(up > 1 + tol) or np.any(up < -tol) or np.any(lo > 1 + tol):
        raise CoherenceError("probability bounds outside [0, 1]")
    lo = np.clip(lo, 0.0, 1.0)
    up = np.clip(up, 0.0, 1.0)
    crossed = lo > up
    if np.any(lo - up > tol):
        i = int(np.argmax(lo - up))
        raise CoherenceError(f"lower bound exceeds upper bound at configuration {i}")
    if np.any(crossed):
        mid = 0.5 * (lo + up)
        lo = np.where(crossed, mid, lo)
        up = np.where(crossed, mid, up)
    s_lo, s_up = lo.sum(), up.sum()
    if s_lo > 1 + tol or s_up < 1 - tol:
        raise EmptyCredalSet(
            f"empty credal set: sum of lower bounds {s_lo:.6g}, sum of upper bounds {s_up:.6g}")
    if np.array_equal(lo, up):
        # a single PMF is already tight; the pass below would only add rounding
        return lo, up
    new_lo = np.maximum(lo, 1.0 - (s_up - up))
    new_up = np.minimum(up, 1.0 - (s_lo - lo))
    new_lo = np.clip(new_lo, 0.0, 1.0)
    new_up = np.clip(new_up, 0.0, 1.0)
    crossed = new_lo > new_up
    if np.any(crossed):
        mid = 0.5 * (new_lo + new_up)
        new_lo = np.where(crossed, mid, new_lo)
        new_up = np.where(crossed, mid, new_up)
    return new_lo, new_up


@dataclass(frozen=True, eq=False)
class IntervalValuation:
    """Coherent probability intervals on the configurations of a domain.

    Construction always tightens the bounds so that every bound is reached by
    some member PMF; the represented credal set is unchanged by this.
    """

    domain: Domain
    lower: np.ndarray
    upper: np.ndarray
    _checked: bool = field(default=False, repr=False, compare=False)

    def __post_init__(self):
        n = self.domain.cardinality
        lo = _as_vector(self.lower, n, "lower")
        up = _as_vector(self.upper, n, "upper")
        if not self._checked:
            lo, up = _tighten_arrays(lo, up)
        object.__setattr__(self, "lower", _freeze(lo))
        object.__setattr__(self, "upper", _freeze(up))

    @classmethod
    def vacuous(cls, domain: Domain) -> "IntervalValuation":
        n = domain.cardinality
        if n == 1:
            return cls(domain, np.ones(1), np.ones(1))
        return cls(domain, np.zeros(n), np.ones(n), _checked=True)

    @classmethod
    def precise(cls, pmf: PmfValuation) -> "IntervalValuation":
        return cls(pmf.domain, pmf.probs.copy(), pmf.probs.copy(), _checked=True)

    @classmethod
    def uniform(cls, domain: Domain) -> "IntervalValuation":
        return cls.precise(PmfValuation.uniform(domain))

    @property
    def label(self) -> Domain:
        return self.domain

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower

    @property
    def is_precise(self) -> bool:
        return bool(np.all(self.upper - self.lower == 0.0))

    @property
    def is_vacuous(self) -> bool:
        return self.domain.cardinality > 1 and bool(
            np.all(self.lower == 0.0) and np.all(self.upper == 1.0))

    def to_pmf(self) -> PmfValuation:
        if not self.is_precise:
            raise DomainError("interval valuation is not precise")
        return PmfValuation(self.domain, self.lower.copy())

    def contains(self, pmf, tol: float = COHERENCE_TOL) -> bool:
        p = pmf.probs if isinstance(pmf, PmfValuation) else np.asarray(pmf, dtype=float)
        return bool(np.all(p >= self.lower - tol) and np.all(p <= self.upper + tol)
                    and abs(p.sum() - 1) <= tol)

    def __repr__(self):
        pairs = ", ".join(f"[{a:.4g},{b:.4g}]" for a, b in zip(self.lower, self.upper))
        return f"IntervalValuation({self.domain}, {pairs})"


def tighten_to_reachable(lower, upper, domain: Domain | None = None) -> IntervalValuation:
    lo = np.asarray(lower, dtype=float).reshape(-1)
    if domain is None:
        domain = Domain((Variable("X", tuple(str(i) for i in range(lo.size))),))
    new_lo, new_up = _tighten_arrays(lo, upper)
    return IntervalValuation(domain, new_lo, new_up, _checked=True)


def box_simplex_vertices(lower, upper, tol: float = COHERENCE_TOL) -> np.ndarray:
    """Extreme points of ``{p : lower <= p <= upper, sum(p) = 1}``.

    Every vertex has all coordinates but (at most) one at a bound. For each
    choice of free coordinate the others are expanded bound by bound, keeping
    only partial sums that can still land the free coordinate in range.
    Returns an array of shape ``(k, n)``.
    """
    lo = np.asarray(lower, dtype=float)
    up = np.asarray(upper, dtype=float)
    n = lo.size
    found = []
    for free in range(n):
        others = [j for j in range(n) if j != free]
        need_lo, need_hi = 1.0 - up[free], 1.0 - lo[free]
        rest_lo = np.concatenate([np.cumsum(lo[others][::-1])[::-1], [0.0]])
        rest_up = np.concatenate([np.cumsum(up[others][::-1])[::-1], [0.0]])
        partial = np.zeros(1)
        choices = np.zeros((1, 0), dtype=bool)
        for depth, j in enumerate(others):
            if up[j] - lo[j] <= 0.0:
                partial = partial + lo[j]
                choices = np.hstack([choices, np.zeros((len(choices), 1), dtype=bool)])
            else:
                partial = np.concatenate([partial + lo[j], partial + up[j]])
                choices = np.vstack([
                    np.hstack([choices, np.zeros((len(choices), 1), dtype=bool)]),
                    np.hstack([choices, np.ones((len(choices), 1), dtype=bool)]),
                ])
            keep = ((partial + rest_lo[depth + 1] <= need_hi + tol)
                    & (partial + rest_up[depth + 1] >= need_lo - tol))
            partial, choices = partial[keep], choices[keep]
            if partial.size == 0:
                break
        if partial.size == 0:
            continue
        pts = np.empty((partial.size, n))
        pts[:, others] = np.where(choices, up[others], lo[others])
        pts[:, free] = np.clip(1.0 - partial, lo[free], up[free])
        found.append(pts)
    if not found:
        return np.zeros((0, n))
    pts = np.vstack(found)
    return _dedupe(pts)


def _dedupe(pts: np.ndarray, tol: float = VERTEX_DEDUP_TOL) -> np.ndarray:
    pts = pts[np.lexsort(pts.T[::-1])]
    pairs = cKDTree(pts).query_pairs(r=tol, p=np.inf, output_type="ndarray")
    drop = np.zeros(len(pts), dtype=bool)
    for i, j in sorted(map(tuple, pairs)):
        if not drop[i]:
            drop[j] = True
    return pts[~drop]


def enumerate_vertices(v: IntervalValuation,
                       threshold: int = DEFAULT_VERTEX_THRESHOLD) -> list[PmfValuation]:
    if v.domain.cardinality > threshold:
        raise ThresholdExceeded(
            f"frame of {v.domain.cardinality} configurations exceeds vertex threshold {threshold}")
    pts = box_simplex_vertices(v.lower, v.upper)
    out = []
    for row in pts:
        row = row / row.sum()
        out.append(PmfValuation(v.domain, row))
    return out


def make_variable(name: str, frame: Iterable | int) -> Variable:
    if isinstance(frame, int):
        frame = [str(i) for i in range(frame)]
    return Variable(name, tuple(frame))


def make_domain(variables: Sequence[Variable]) -> Domain:
    return Domain(tuple(variables))
