"""Linear programming.

Two solvers live here:

* :func:`solve_lp` -- a dense two-phase tableau simplex (Bland's rule) for
  ``min c.x  s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  x >= 0``.
* :func:`box_simplex_argmin` -- the closed-form optimum of a linear objective
  over ``{p : lower <= p <= upper, sum(p) = 1}``, batched over rows of the
  cost matrix. This is the LP that appears in every alternating step, so it
  gets the fast path; :func:`interval_lp_problem` states the same problem in
  matrix form for the general solver.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import Infeasible, SolverError

LP_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class LpProblem:
    c: np.ndarray
    A_ub: np.ndarray | None = None
    b_ub: np.ndarray | None = None
    A_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None

    @property
    def n(self) -> int:
        return len(self.c)


@dataclass(frozen=True, eq=False)
class LpSolution:
    x: np.ndarray
    value: float
    iterations: int


def interval_lp_problem(cost, lower, upper) -> LpProblem:
    """Box-and-simplex LP in ``A p <= b`` form.

    Rows come in pairs ``-p_i <= -lower_i``, ``p_i <= upper_i`` followed by
    ``sum(p) <= 1`` and ``-sum(p) <= -1``; a (2n+2) x n matrix.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    n = lower.size
    A = np.zeros((2 * n + 2, n))
    b = np.zeros(2 * n + 2)
    for i in range(n):
        A[2 * i, i] = -1.0
        A[2 * i + 1, i] = 1.0
        b[2 * i] = -lower[i]
        b[2 * i + 1] = upper[i]
    A[2 * n, :] = 1.0
    A[2 * n + 1, :] = -1.0
    b[2 * n] = 1.0
    b[2 * n + 1] = -1.0
    return LpProblem(np.asarray(cost, dtype=float), A, b)


def _pivot(T: np.ndarray, r: int, j: int) -> None:
    T[r] /= T[r, j]
    col = T[:, j].copy()
    col[r] = 0.0
    T -= np.outer(col, T[r])


def _run_simplex(T: np.ndarray, basis: list[int], allowed: int, max_iter: int) -> int:
    m = T.shape[0] - 1
    for it in range(max_iter):
        reduced = T[-1, :allowed]
        entering = np.flatnonzero(reduced < -LP_TOL)
        if entering.size == 0:
            return it
        j = int(entering[0])
        col = T[:m, j]
        pos = col > LP_TOL
        if not pos.any():
            raise SolverError("LP is unbounded")
        ratios = np.full(m, np.inf)
        ratios[pos] = T[:m, -1][pos] / col[pos]
        best = ratios.min()
        ties = np.flatnonzero(ratios <= best + LP_TOL * max(1.0, abs(best)))
        r = int(min(ties, key=lambda k: basis[k]))
        _pivot(T, r, j)
        basis[r] = j
    raise SolverError(f"simplex did not converge in {max_iter} iterations")


def solve_lp(problem: LpProblem, max_iter: int | None = None) -> LpSolution:
    c = np.asarray(problem.c, dtype=float)
    n = c.size
    rows, rhs, kinds = [], [], []
    if problem.A_ub is not None:
        for a, b in zip(np.atleast_2d(problem.A_ub), np.asarray(problem.b_ub, dtype=float)):
            rows.append(np.asarray(a, dtype=float))
            rhs.append(float(b))
            kinds.append("ub")
    if problem.A_eq is not None:
        for a, b in zip(np.atleast_2d(problem.A_eq), np.asarray(problem.b_eq, dtype=float)):
            rows.append(np.asarray(a, dtype=float))
            rhs.append(float(b))
            kinds.append("eq")
    m = len(rows)
    if m == 0:
        if np.any(c < 0):
            raise SolverError("LP is unbounded")
        return LpSolution(np.zeros(n), 0.0, 0)

    n_slack = sum(k == "ub" for k in kinds)
    n_art = sum(1 for k, b in zip(kinds, rhs) if k == "eq" or b < 0)
    width = n + n_slack + n_art
    T = np.zeros((m + 1, width + 1))
    basis: list[int] = []
    art_cols = []
    s_col, a_col = n, n + n_slack
    for r, (a, b, kind) in enumerate(zip(rows, rhs, kinds)):
        sign = -1.0 if b < 0 else 1.0
        T[r, :n] = sign * a
        T[r, -1] = sign * b
        if kind == "ub":
            T[r, s_col] = sign
            if sign > 0:
                basis.append(s_col)
            s_col += 1
        if kind == "eq" or sign < 0:
            T[r, a_col] = 1.0
            basis.append(a_col)
            art_cols.append(a_col)
            a_col += 1
    max_iter = max_iter or 50 * (m + width)
    iterations = 0

    if art_cols:
        T[-1, art_cols] = 1.0
        for r, b in enumerate(basis):
            if b in art_cols:
                T[-1] -= T[r]
        iterations += _run_simplex(T, basis, width, max_iter)
        if -T[-1, -1] > LP_TOL * max(1.0, np.abs(T[:m, -1]).max()):
            raise Infeasible("LP has no feasible point")
        first_art = n + n_slack
        keep = []
        for r in range(m):
            if basis[r] >= first_art:
                nz = np.flatnonzero(np.abs(T[r, :first_art]) > LP_TOL)
                if nz.size:
                    _pivot(T, r, int(nz[0]))
                    basis[r] = int(nz[0])
                    keep.append(r)
            else:
                keep.append(r)
        T = np.vstack([T[keep][:, list(range(first_art)) + [width]], np.zeros((1, first_art + 1))])
        basis = [basis[r] for r in keep]
        width = first_art
        m = len(keep)

    T[-1, :] = 0.0
    T[-1, :n] = c
    for r, b in enumerate(basis):
        if T[-1, b] != 0.0:
            T[-1] -= T[-1, b] * T[r]
    iterations += _run_simplex(T, basis, width, max_iter)
    x = np.zeros(width)
    for r, b in enumerate(basis):
        x[b] = T[r, -1]
    x = x[:n]
    x[np.abs(x) < 1e-15] = 0.0
    return LpSolution(x, float(c @ x), iterations)


def box_simplex_argmin(cost, lower, upper) -> np.ndarray:
    """Minimiser of ``cost . p`` over the box-simplex, one row per cost row.

    Start every coordinate at its lower bound and pour the remaining mass into
    the cheapest coordinates first. Ties are broken by index, so the result is
    a deterministic vertex.
    """
    cost = np.asarray(cost, dtype=float)
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    squeeze = cost.ndim == 1
    cost = np.atleast_2d(cost)
    order = np.argsort(cost, axis=1, kind="stable")
    room = (upper - lower)[order]
    slack = max(1.0 - lower.sum(), 0.0)
    before = np.cumsum(room, axis=1) - room
    added = np.clip(slack - before, 0.0, room)
    x = np.empty_like(cost)
    np.put_along_axis(x, order, lower[order] + added, axis=1)
    return x[0] if squeeze else x
