"""Bounds of the normalised product of two interval credal sets.

For a configuration ``x_i`` the combined lower probability is the infimum of

    p1(x_i) p2(x_i) / sum_x p1(x) p2(x)

over ``p1 in K1, p2 in K2``. Writing the ratio's infimum as the largest ``nu``
for which ``min sum_x (1[x = x_i] - nu) p1(x) p2(x) >= 0`` turns the fractional
program into a bisection over ``nu`` whose inner step is a bilinear
minimisation over a product of polytopes. The inner step is solved by
alternating LPs from several starts and, on small frames, exactly by
enumerating vertex pairs. Upper bounds use the complementary mask.

The inner minimum only matters through its sign, so after bisection the
returned bound is the ratio actually attained by the best pair found. That
value is always achievable, lies inside the final bisection bracket whenever
the inner search is exact, and reproduces precise results to rounding.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field, replace

import numpy as np

from ..core import COHERENCE_TOL, DEFAULT_VERTEX_THRESHOLD, IntervalValuation, box_simplex_vertices
from ..errors import SolverError, ThresholdExceeded, TotalConflict
from .lp import box_simplex_argmin, interval_lp_problem, solve_lp

log = logging.getLogger(__name__)

METHODS = ("auto", "lp", "oracle")


@dataclass(frozen=True)
class SolverConfig:
    bisection_tol: float = 1e-6
    bisection_max_iter: int = 60
    multistart_count: int = 16
    rng_seed: int = 0
    vertex_threshold: int = DEFAULT_VERTEX_THRESHOLD
    eps_conflict: float = 1e-9
    method: str = "auto"
    # caps the vertex-pair matrix used by the exact route in "auto" mode
    oracle_pair_limit: int = 250_000
    lp_backend: str = "greedy"

    def __post_init__(self):
        for name in ("bisection_tol", "eps_conflict"):
            val = getattr(self, name)
            if not 0 < val < 1e-2:
                raise ValueError(f"{name} must lie in (0, 1e-2), got {val}")
        for name in ("bisection_max_iter", "multistart_count", "vertex_threshold",
                     "oracle_pair_limit"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.rng_seed < 0:
            raise ValueError("rng_seed must be non-negative")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if self.lp_backend not in ("greedy", "simplex"):
            raise ValueError("lp_backend must be 'greedy' or 'simplex'")

    def with_(self, **changes) -> "SolverConfig":
        return replace(self, **changes)


def bound_objective(n: int, i: int, nu: float, kind: str) -> np.ndarray:
    """Diagonal of the bilinear form for configuration ``i``.

    ``kind="lower"``: ``1 - nu`` at ``i``, ``-nu`` elsewhere.
    ``kind="upper"``: ``-nu`` at ``i``, ``1 - nu`` elsewhere.
    """
    mask = np.zeros(n)
    mask[i] = 1.0
    if kind == "upper":
        mask = 1.0 - mask
    elif kind != "lower":
        raise ValueError("kind must be 'lower' or 'upper'")
    return mask - nu


@dataclass(frozen=True, eq=False)
class BilinearProblem:
    """``min p1' diag(c) p2`` over ``p1 in K1``, ``p2 in K2``."""

    c: np.ndarray
    lower1: np.ndarray
    upper1: np.ndarray
    lower2: np.ndarray
    upper2: np.ndarray
    eps_conflict: float = 1e-9

    @classmethod
    def from_valuations(cls, k1: IntervalValuation, k2: IntervalValuation, c,
                        eps_conflict: float = 1e-9) -> "BilinearProblem":
        return cls(np.asarray(c, dtype=float), k1.lower, k1.upper, k2.lower, k2.upper,
                   eps_conflict)

    @property
    def n(self) -> int:
        return self.c.size

    def value(self, p1, p2) -> float:
        return float(np.sum(self.c * np.asarray(p1) * np.asarray(p2)))


@dataclass(frozen=True, eq=False)
class PairResult:
    value: float
    p1: np.ndarray
    p2: np.ndarray
    rounds: int = 0


def _lp_argmin(cost: np.ndarray, lower, upper, backend: str) -> np.ndarray:
    if backend == "greedy":
        return box_simplex_argmin(cost, lower, upper)
    out = np.empty_like(cost)
    for k, row in enumerate(np.atleast_2d(cost)):
        out[k] = solve_lp(interval_lp_problem(row, lower, upper)).x
    return out.reshape(cost.shape)


def _alternate(c, lo1, up1, lo2, up2, P1, P2, first_block, max_rounds=100, tol=1e-10,
               backend="greedy"):
    """Batched block-coordinate descent; row ``k`` is one chain.

    ``first_block[k]`` says which block chain ``k`` re-optimises first
    (2: solve for p2 with p1 fixed).
    """
    P1 = P1.copy()
    P2 = P2.copy()
    vals = np.sum(c * P1 * P2, axis=1)
    active = np.ones(len(P1), dtype=bool)
    rounds = np.zeros(len(P1), dtype=int)
    flip = first_block == 1
    for _ in range(max_rounds):
        if not active.any():
            break
        idx = np.flatnonzero(active)
        a1, a2 = P1[idx], P2[idx]
        f = flip[idx]
        if (~f).any():
            a2[~f] = _lp_argmin(c * a1[~f], lo2, up2, backend)
            a1[~f] = _lp_argmin(c * a2[~f], lo1, up1, backend)
        if f.any():
            a1[f] = _lp_argmin(c * a2[f], lo1, up1, backend)
            a2[f] = _lp_argmin(c * a1[f], lo2, up2, backend)
        new = np.sum(c * a1 * a2, axis=1)
        improved = new < vals[idx] - tol
        better = new <= vals[idx]
        upd = idx[better]
        P1[upd], P2[upd], vals[upd] = a1[better], a2[better], new[better]
        rounds[idx] += 1
        active[idx[~improved]] = False
    return vals, P1, P2, rounds


def alternating_lp(problem: BilinearProblem, start, max_rounds: int = 100, tol: float = 1e-10,
                   backend: str = "greedy") -> PairResult:
    """Local minimum of the bilinear problem from one feasible start pair.

    Fixes p1 and solves the LP in p2, then fixes p2 and solves for p1, until
    a full round improves the value by less than ``tol``.
    """
    p1, p2 = (np.asarray(getattr(s, "probs", s), dtype=float) for s in start)
    vals, P1, P2, rounds = _alternate(problem.c, problem.lower1, problem.upper1,
                                      problem.lower2, problem.upper2, p1[None], p2[None],
                                      np.array([2]), max_rounds, tol, backend)
    return PairResult(float(vals[0]), P1[0], P2[0], int(rounds[0]))


def vertex_pair_oracle(problem: BilinearProblem,
                       threshold: int = DEFAULT_VERTEX_THRESHOLD) -> PairResult:
    """Exact minimum over all vertex pairs with ``sum p1 p2 >= eps_conflict``."""
    if problem.n > threshold:
        raise ThresholdExceeded(f"frame of {problem.n} exceeds vertex threshold {threshold}")
    V1 = box_simplex_vertices(problem.lower1, problem.upper1)
    V2 = box_simplex_vertices(problem.lower2, problem.upper2)
    vals = (V1 * problem.c) @ V2.T
    den = V1 @ V2.T
    vals = np.where(den >= problem.eps_conflict, vals, np.inf)
    k = int(np.argmin(vals))
    if not np.isfinite(vals.flat[k]):
        raise TotalConflict("every vertex pair is in total conflict")
    a, b = np.unravel_index(k, vals.shape)
    return PairResult(float(vals[a, b]), V1[a], V2[b])


def _aligned_push_costs(lo1, up1, lo2, up2, max_pair_starts: int = 240,
                        pair_pool: int = 8, triple_pool: int = 6) -> np.ndarray:
    """Cost rows that push both credal sets towards the same configurations.

    One row per configuration ``a`` (fill ``a`` first), one per ordered
    pair ``(a, b)`` (fill ``a``, then ``b``) and one per ordered triple. These seed the regime where the
    normaliser concentrates on shared configurations, which random vertices
    rarely reach. On large frames the pairs are drawn from the configurations
    with the largest joint capacity only.
    """
    n = lo1.size
    rows = [-np.eye(n)]
    if n * (n - 1) <= max_pair_starts:
        pool = np.arange(n)
    else:
        capacity = up1 * up2
        pool = np.sort(np.argsort(-capacity, kind="stable")[:pair_pool])
    pairs = [(a, b) for a in pool for b in pool if a != b]
    if pairs:
        P = np.zeros((len(pairs), n))
        for k, (a, b) in enumerate(pairs):
            P[k, a] = -2.0
            P[k, b] = -1.0
        rows.append(P)
    # ordered triples from the highest-capacity configurations
    capacity = up1 * up2
    tpool = np.sort(np.argsort(-capacity, kind="stable")[:triple_pool])
    triples = list(itertools.permutations(tpool, 3))
    if triples:
        T = np.zeros((len(triples), n))
        for k, (a, b, c) in enumerate(triples):
            T[k, [a, b, c]] = (-4.0, -2.0, -1.0)
        rows.append(T)
    return np.vstack(rows)


@dataclass
class BoundSolution:
    """Outcome of one bisection: the bound and how it was certified."""

    value: float
    nu_low: float
    nu_high: float
    iterations: int
    p1: np.ndarray | None
    p2: np.ndarray | None
    trace: list[tuple[float, float]] = field(default_factory=list)


class PairSolver:
    """Solves all combined bounds for one pair of interval credal sets.

    Start vertices, and vertex lists for the exact route, are computed once and
    shared by every configuration and both bound kinds.
    """

    def __init__(self, k1: IntervalValuation, k2: IntervalValuation,
                 config: SolverConfig | None = None):
        cfg = config or SolverConfig()
        if k1.domain.cardinality != k2.domain.cardinality:
            raise ValueError("credal sets live on frames of different size")
        self.cfg = cfg
        self.lo1, self.up1 = np.asarray(k1.lower), np.asarray(k1.upper)
        self.lo2, self.up2 = np.asarray(k2.lower), np.asarray(k2.upper)
        self.n = self.lo1.size
        self.use_lp = cfg.method in ("auto", "lp")
        self.V1 = self.V2 = None
        if cfg.method == "oracle":
            if self.n > cfg.vertex_threshold:
                raise ThresholdExceeded(
                    f"frame of {self.n} exceeds vertex threshold {cfg.vertex_threshold}")
            self._load_vertices()
        elif cfg.method == "auto" and self.n <= cfg.vertex_threshold:
            self._load_vertices()
            if len(self.V1) * len(self.V2) > cfg.oracle_pair_limit:
                self.V1 = self.V2 = None
        if self.use_lp:
            self._make_starts()

    def _load_vertices(self):
        self.V1 = box_simplex_vertices(self.lo1, self.up1)
        self.V2 = box_simplex_vertices(self.lo2, self.up2)
        self.den = self.V1 @ self.V2.T
        self.valid = self.den >= self.cfg.eps_conflict

    @property
    def has_oracle(self) -> bool:
        return self.V1 is not None

    def _start_costs(self, rng) -> np.ndarray:
        n = self.n
        ramp = np.arange(n, dtype=float)
        rows = [ramp, -ramp]
        k = max(self.cfg.multistart_count - 2, 0)
        if k:
            rows.extend(rng.standard_normal((k, n)))
        return np.asarray(rows[: max(self.cfg.multistart_count, 1)])

    def _make_starts(self):
        rng = np.random.default_rng(self.cfg.rng_seed)
        S1 = box_simplex_argmin(self._start_costs(rng), self.lo1, self.up1)
        S2 = box_simplex_argmin(self._start_costs(rng), self.lo2, self.up2)
        push = _aligned_push_costs(self.lo1, self.up1, self.lo2, self.up2)
        S1 = np.vstack([S1, box_simplex_argmin(push, self.lo1, self.up1)])
        S2 = np.vstack([S2, box_simplex_argmin(push, self.lo2, self.up2)])
        # each start pair seeds two chains, one per block updated first
        self.P1 = np.vstack([S1, S1])
        self.P2 = np.vstack([S2, S2])
        self.first = np.concatenate([np.full(len(S1), 2), np.full(len(S1), 1)])

    def _inner_lp(self, c, warm=None):
        P1, P2, first = self.P1, self.P2, self.first
        if warm is not None:
            P1 = np.vstack([P1, warm[0][None], warm[0][None]])
            P2 = np.vstack([P2, warm[1][None], warm[1][None]])
            first = np.concatenate([first, [2, 1]])
        return _alternate(c, self.lo1, self.up1, self.lo2, self.up2, P1, P2, first,
                          backend=self.cfg.lp_backend)

    def inner_min(self, mask: np.ndarray, nu: float, warm=None):
        """Approximate (or exact) ``min sum (mask - nu) p1 p2`` with candidate pairs."""
        c = mask - nu
        best = np.inf
        cands1, cands2 = [], []
        if self.use_lp:
            vals, P1, P2, _ = self._inner_lp(c, warm)
            k = int(np.argmin(vals))
            best = float(vals[k])
            cands1.append(P1)
            cands2.append(P2)
        if self.has_oracle:
            num = (self.V1 * mask) @ self.V2.T
            vals = np.where(self.valid, num - nu * self.den, np.inf)
            k = int(np.argmin(vals))
            if np.isfinite(vals.flat[k]):
                a, b = np.unravel_index(k, vals.shape)
                best = min(best, float(vals[a, b]))
                cands1.append(self.V1[a][None])
                cands2.append(self.V2[b][None])
        return best, np.vstack(cands1), np.vstack(cands2)

    def max_agreement(self) -> float:
        """Largest ``sum p1 p2`` reachable; below ``eps_conflict`` means total conflict."""
        best = -np.inf
        if self.use_lp:
            vals, _, _, _ = self._inner_lp(-np.ones(self.n))
            best = float(-vals.min())
        if self.has_oracle:
            best = max(best, float(self.den.max()))
        return best

    def solve(self, i: int, kind: str) -> BoundSolution:
        """Lower or upper combined probability of configuration ``i``."""
        cfg = self.cfg
        target = np.zeros(self.n)
        target[i] = 1.0
        # the bisection always computes an infimum of a masked ratio
        mask = target if kind == "lower" else 1.0 - target

        best = [np.inf, None, None]

        def consider(P1, P2):
            den = np.sum(P1 * P2, axis=1)
            ok = den >= cfg.eps_conflict
            if not ok.any():
                return
            ratio = np.where(ok, np.sum(mask * P1 * P2, axis=1) / np.where(ok, den, 1.0), np.inf)
            k = int(np.argmin(ratio))
            if ratio[k] < best[0]:
                best[:] = [float(ratio[k]), P1[k].copy(), P2[k].copy()]

        trace = []

        def evaluate(nu):
            warm = (best[1], best[2]) if best[1] is not None else None
            val, P1, P2 = self.inner_min(mask, nu, warm)
            consider(P1, P2)
            trace.append((nu, val))
            return val

        lo, hi = 0.0, 1.0
        evaluate(0.0)
        iterations = 0
        probe_next = True
        if evaluate(1.0) >= 0.0:
            lo = 1.0
        else:
            while hi - lo > cfg.bisection_tol and iterations < cfg.bisection_max_iter:
                # probe just below the best attained ratio; a non-negative inner
                # minimum there closes the bracket at once, otherwise halve
                probe = best[0] - 0.25 * cfg.bisection_tol
                if probe_next and lo < probe < hi:
                    nu = probe
                else:
                    nu = 0.5 * (lo + hi)
                if evaluate(nu) >= 0.0:
                    lo = nu
                    probe_next = True
                else:
                    hi = nu
                    probe_next = not probe_next
                if best[0] + 0.25 * cfg.bisection_tol < hi:
                    # the best pair witnesses a negative inner value above its ratio
                    hi = max(best[0] + 0.25 * cfg.bisection_tol, lo + 1e-300)
                iterations += 1
                assert lo < hi, "bisection bracket collapsed"
        if best[1] is None:
            raise TotalConflict("no pair of members has a positive normaliser")
        inf_ratio = min(max(best[0], 0.0), 1.0)
        if inf_ratio < lo - 10 * cfg.bisection_tol:
            log.debug("inner search missed a pair at nu=%g (found ratio %g)", lo, inf_ratio)
        p1, p2 = best[1], best[2]
        if kind == "lower":
            value = inf_ratio
        else:
            # attained value of the target ratio itself, not 1 - (1 - ratio)
            value = float(p1[i] * p2[i] / np.sum(p1 * p2))
        return BoundSolution(value, lo, hi, iterations, p1, p2, trace)

    def intervals(self) -> tuple[np.ndarray, np.ndarray]:
        if self.max_agreement() < self.cfg.eps_conflict:
            raise TotalConflict("the two credal sets are in total conflict")
        lower = np.array([self.solve(i, "lower").value for i in range(self.n)])
        upper = np.array([self.solve(i, "upper").value for i in range(self.n)])
        if np.any(lower > upper + COHERENCE_TOL):
            raise SolverError("combined lower bound above upper bound")
        return lower, upper


def lower_combined(k1: IntervalValuation, k2: IntervalValuation, i: int,
                   config: SolverConfig | None = None) -> float:
    return PairSolver(k1, k2, config).solve(i, "lower").value


def upper_combined(k1: IntervalValuation, k2: IntervalValuation, i: int,
                   config: SolverConfig | None = None) -> float:
    return PairSolver(k1, k2, config).solve(i, "upper").value


def ratio_oracle(k1: IntervalValuation, k2: IntervalValuation, i: int,
                 eps_conflict: float = 1e-9,
                 threshold: int = DEFAULT_VERTEX_THRESHOLD) -> tuple[float, float]:
    """Exact ``(lower, upper)`` of the combined probability of ``i`` by direct
    evaluation of the ratio on every vertex pair; no bisection involved."""
    n = k1.domain.cardinality
    if n > threshold:
        raise ThresholdExceeded(f"frame of {n} exceeds vertex threshold {threshold}")
    V1 = box_simplex_vertices(k1.lower, k1.upper)
    V2 = box_simplex_vertices(k2.lower, k2.upper)
    den = V1 @ V2.T
    ok = den >= eps_conflict
    if not ok.any():
        raise TotalConflict("every vertex pair is in total conflict")
    r = np.outer(V1[:, i], V2[:, i])[ok] / den[ok]
    return float(r.min()), float(r.max())
