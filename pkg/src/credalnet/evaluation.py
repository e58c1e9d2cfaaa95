"""Accuracy of interval marginals against a ground-truth PMF."""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .core import Domain, IntervalValuation, PmfValuation, config_labels
from .errors import DomainError

WIDTH_FLOOR = 1e-12
CONTAIN_TOL = 1e-9


def _vector(v, n: int | None = None) -> np.ndarray:
    arr = np.asarray(getattr(v, "probs", v), dtype=float).reshape(-1)
    if n is not None and arr.size != n:
        raise DomainError(f"expected {n} states, got {arr.size}")
    return arr


def _bounds(interval) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(interval, IntervalValuation):
        return interval.lower, interval.upper
    if isinstance(interval, PmfValuation):
        return interval.probs, interval.probs
    lo, up = interval
    return np.asarray(lo, dtype=float), np.asarray(up, dtype=float)


def _check_domains(truth, interval) -> None:
    da, db = getattr(truth, "domain", None), getattr(interval, "domain", None)
    if da is not None and db is not None and da != db:
        raise DomainError(f"truth on {da} but intervals on {db}")


def containment(truth, interval, tol: float = CONTAIN_TOL) -> np.ndarray:
    """Per-state flags: truth inside its interval up to ``tol``."""
    _check_domains(truth, interval)
    lo, up = _bounds(interval)
    p = _vector(truth, lo.size)
    return (lo - tol <= p) & (p <= up + tol)


def distance_D(truth, interval) -> float:
    """Distance in [0, 1] between a PMF and probability intervals.

    The logistic of the mean log-width, where any state whose true probability
    falls outside its interval makes the distance 1. Widths are floored at
    ``WIDTH_FLOOR`` so an exact precise answer scores near 0.
    """
    inside = containment(truth, interval)
    if not inside.all():
        return 1.0
    lo, up = _bounds(interval)
    w = np.maximum(up - lo, WIDTH_FLOOR)
    m = float(np.mean(np.log(w)))
    return 1.0 / (1.0 + math.exp(-m))


@dataclass(frozen=True, eq=False)
class MarginalReport:
    """One method's marginal on the target, optionally scored against truth."""

    method: str
    domain: Domain
    lower: np.ndarray
    upper: np.ndarray
    truth: np.ndarray | None = None

    @classmethod
    def from_valuation(cls, method: str, valuation, truth=None) -> "MarginalReport":
        lo, up = _bounds(valuation)
        t = None if truth is None else _vector(truth, lo.size)
        _check_domains(truth, valuation)
        return cls(method, valuation.domain, np.array(lo), np.array(up), t)

    @property
    def precise(self) -> bool:
        return bool(np.all(self.lower == self.upper))

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower

    @property
    def contained(self) -> np.ndarray | None:
        return None if self.truth is None else containment(self.truth, (self.lower, self.upper))

    @property
    def D(self) -> float | None:
        return None if self.truth is None else distance_D(self.truth, (self.lower, self.upper))

    def with_truth(self, truth) -> "MarginalReport":
        return MarginalReport(self.method, self.domain, self.lower, self.upper,
                              _vector(truth, self.lower.size))

    def state_labels(self) -> list[str]:
        out = []
        for i in range(self.domain.cardinality):
            lab = config_labels(self.domain, i)
            out.append(",".join(lab.values()) if len(lab) > 1 else next(iter(lab.values()), ""))
        return out


@dataclass(frozen=True)
class ComparisonTable:
    target: str
    states: tuple[str, ...]
    truth: tuple[float, ...] | None
    methods: tuple[str, ...]
    intervals: tuple[tuple[tuple[float, float], ...], ...]
    D: tuple[float | None, ...]
    contained: tuple[tuple[bool, ...] | None, ...]

    def to_dict(self) -> dict:
        return {
            "target": self.target,
            "states": list(self.states),
            "truth": None if self.truth is None else list(self.truth),
            "methods": [
                {"name": m, "intervals": [list(iv) for iv in ivs],
                 "widths": [b - a for a, b in ivs], "D": d,
                 "contained": None if c is None else list(c)}
                for m, ivs, d, c in zip(self.methods, self.intervals, self.D, self.contained)
            ],
        }

    def format(self, digits: int = 3) -> str:
        def cell(a, b):
            if a == b:
                return f"{a:.{digits}f}"
            return f"[{a:.{digits}f}, {b:.{digits}f}]"

        header = [self.target] + (["truth"] if self.truth is not None else []) + list(self.methods)
        rows = []
        for k, s in enumerate(self.states):
            row = [s]
            if self.truth is not None:
                row.append(f"{self.truth[k]:.{digits}f}")
            row.extend(cell(*ivs[k]) for ivs in self.intervals)
            rows.append(row)
        if any(d is not None for d in self.D):
            tail = ["D"] + ([""] if self.truth is not None else [])
            tail.extend("" if d is None else f"{d:.{digits}f}" for d in self.D)
            rows.append(tail)
        widths = [max(len(r[c]) for r in [header, *rows]) for c in range(len(header))]
        line = lambda r: "  ".join(x.rjust(w) for x, w in zip(r, widths))
        out = [line(header), "  ".join("-" * w for w in widths)]
        out.extend(line(r) for r in rows)
        return "\n".join(out)

    def __str__(self):
        return self.format()


def compare(reports: Sequence[MarginalReport], truth=None) -> ComparisonTable:
    """Side-by-side intervals and distances, columns in the order given.

    ``truth`` overrides any truth carried by the reports.
    """
    reports = list(reports)
    if not reports:
        raise ValueError("nothing to compare")
    dom = reports[0].domain
    for r in reports[1:]:
        if r.domain != dom:
            raise DomainError(f"report {r.method!r} is on {r.domain}, expected {dom}")
    if truth is not None:
        reports = [r.with_truth(truth) for r in reports]
    t = next((r.truth for r in reports if r.truth is not None), None)
    if t is not None:
        reports = [r if r.truth is not None else r.with_truth(t) for r in reports]
    return ComparisonTable(
        target=",".join(dom.names),
        states=tuple(reports[0].state_labels()),
        truth=None if t is None else tuple(float(x) for x in t),
        methods=tuple(r.method for r in reports),
        intervals=tuple(tuple((float(a), float(b)) for a, b in zip(r.lower, r.upper))
                        for r in reports),
        D=tuple(r.D for r in reports),
        contained=tuple(None if r.contained is None else tuple(bool(x) for x in r.contained)
                        for r in reports),
    )
