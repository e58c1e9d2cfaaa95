"""Combination, marginalisation and vacuous extension.

Two valuation algebras share one interface: precise PMFs and interval
credal sets. The generic :func:`combine`, :func:`marginalize`, :func:`extend`
and :func:`eliminate` dispatch on the valuation kind; mixing kinds in one
call is an error.
"""

from __future__ import annotations

from collections.abc import Iterable
from typing import Union

import numpy as np

from .core import Domain, IntervalValuation, PmfValuation, Variable
from .errors import DomainError, KindMismatch, TotalConflict
from .optim import PairSolver, SolverConfig

Valuation = Union[PmfValuation, IntervalValuation]


def _resolve(domain: Domain, target) -> Domain:
    if isinstance(target, Domain):
        return target
    if isinstance(target, Variable):
        target = [target]
    names = [t.name if isinstance(t, Variable) else t for t in target]
    missing = [n for n in names if n not in domain]
    if missing:
        raise DomainError(f"{missing} not in domain {domain}")
    return Domain(tuple(domain[n] for n in names))


def _sum_axes(domain: Domain, target: Domain) -> tuple[int, ...]:
    if not target.issubset(domain):
        raise DomainError(f"{target} is not a subset of {domain}")
    return tuple(k for k, name in enumerate(domain.names) if name not in target)


def _group_sum(values: np.ndarray, domain: Domain, target: Domain) -> np.ndarray:
    axes = _sum_axes(domain, target)
    return values.reshape(domain.shape).sum(axis=axes).reshape(-1)


def _spread(values: np.ndarray, domain: Domain, target: Domain) -> np.ndarray:
    """Copy each entry to every extending configuration of ``target`` (no scaling)."""
    if not domain.issubset(target):
        raise DomainError(f"{domain} is not a subset of {target}")
    t = values.reshape(domain.shape)
    for k, name in enumerate(target.names):
        if name not in domain:
            t = np.expand_dims(t, k)
    return np.broadcast_to(t, target.shape).reshape(-1).copy()


# -- precise PMFs ------------------------------------------------------------

def combine_pmf(p1: PmfValuation, p2: PmfValuation) -> PmfValuation:
    if p1.domain != p2.domain:
        raise DomainError(f"combine_pmf needs equal domains, got {p1.domain} and {p2.domain}")
    prod = p1.probs * p2.probs
    total = prod.sum()
    if not total > 0.0:
        raise TotalConflict("PMFs have disjoint support")
    return PmfValuation(p1.domain, prod / total)


def marginalize_pmf(p: PmfValuation, target) -> PmfValuation:
    target = _resolve(p.domain, target)
    if target == p.domain:
        return p
    return PmfValuation(target, _group_sum(p.probs, p.domain, target))


def extend_pmf(p: PmfValuation, target: Domain) -> PmfValuation:
    if target == p.domain:
        return p
    spread = _spread(p.probs, p.domain, target)
    return PmfValuation(target, spread * (p.domain.cardinality / target.cardinality))


# -- interval credal sets ----------------------------------------------------

def combine_credal_vacuous(k: IntervalValuation, eps_conflict: float = 1e-9) -> IntervalValuation:
    """``k`` combined with the vacuous set on the same domain, in closed form.

    Whenever every configuration can carry some but not all of the mass this
    is the vacuous set itself. Degenerate members force the exact answer: a
    configuration that can never carry mass keeps upper 0, one that must carry
    all of it keeps lower 1.
    """
    lower = np.where(k.lower >= 1.0 - eps_conflict, 1.0, 0.0)
    upper = np.where(k.upper >= eps_conflict, 1.0, 0.0)
    if k.domain.cardinality == 1:
        return IntervalValuation(k.domain, [1.0], [1.0])
    return IntervalValuation(k.domain, lower, upper)


def _canonical_pair(k1: IntervalValuation, k2: IntervalValuation):
    a = np.concatenate([k1.lower, k1.upper])
    b = np.concatenate([k2.lower, k2.upper])
    diff = np.flatnonzero(a != b)
    if diff.size and b[diff[0]] < a[diff[0]]:
        return k2, k1
    return k1, k2


def _is_uniform(k: IntervalValuation) -> bool:
    return k.is_precise and bool(np.all(k.lower == k.lower[0]))


def combine_credal(k1: IntervalValuation, k2: IntervalValuation,
                   config: SolverConfig | None = None) -> IntervalValuation:
    if k1.domain != k2.domain:
        raise DomainError(f"combine_credal needs equal domains, got {k1.domain} and {k2.domain}")
    cfg = config or SolverConfig()
    if k2.is_vacuous:
        return combine_credal_vacuous(k1, cfg.eps_conflict)
    if k1.is_vacuous:
        return combine_credal_vacuous(k2, cfg.eps_conflict)
    if k1.is_precise and k2.is_precise:
        return IntervalValuation.precise(combine_pmf(k1.to_pmf(), k2.to_pmf()))
    # p * uniform / sum = p for every member, so the other operand comes back as is
    if _is_uniform(k2):
        return k1
    if _is_uniform(k1):
        return k2
    # the problem is symmetric in its operands; fixing their order makes the
    # result bit-identical under swapping
    a, b = _canonical_pair(k1, k2)
    lower, upper = PairSolver(a, b, cfg).intervals()
    return IntervalValuation(k1.domain, lower, upper)


def marginalize_credal(k: IntervalValuation, target) -> IntervalValuation:
    target = _resolve(k.domain, target)
    if target == k.domain:
        return k
    if k.is_precise:
        return IntervalValuation.precise(marginalize_pmf(k.to_pmf(), target))
    lo_sum = _group_sum(k.lower, k.domain, target)
    up_sum = _group_sum(k.upper, k.domain, target)
    lower = np.maximum(lo_sum, 1.0 - (k.upper.sum() - up_sum))
    upper = np.minimum(up_sum, 1.0 - (k.lower.sum() - lo_sum))
    return IntervalValuation(target, lower, upper)


def extend_credal(k: IntervalValuation, target: Domain) -> IntervalValuation:
    if target == k.domain:
        return k
    scale = k.domain.cardinality / target.cardinality
    lower = _spread(k.lower, k.domain, target) * scale
    upper = _spread(k.upper, k.domain, target) * scale
    if k.is_precise:
        return IntervalValuation(target, lower, lower.copy(), _checked=True)
    return IntervalValuation(target, lower, upper)


# -- generic interface -------------------------------------------------------

def identity(domain: Domain, kind: type = PmfValuation) -> Valuation:
    """Neutral element: the uniform PMF (zero-width intervals in credal mode)."""
    if kind is IntervalValuation:
        return IntervalValuation.uniform(domain)
    return PmfValuation.uniform(domain)


def vacuous(domain: Domain) -> IntervalValuation:
    return IntervalValuation.vacuous(domain)


def label(v: Valuation) -> Domain:
    return v.domain


def _same_kind(v1: Valuation, v2: Valuation) -> None:
    if type(v1) is not type(v2):
        raise KindMismatch(
            f"cannot combine {type(v1).__name__} with {type(v2).__name__}")


def extend(v: Valuation, target: Domain) -> Valuation:
    if isinstance(v, IntervalValuation):
        return extend_credal(v, target)
    return extend_pmf(v, target)


def marginalize(v: Valuation, target) -> Valuation:
    if isinstance(v, IntervalValuation):
        return marginalize_credal(v, target)
    return marginalize_pmf(v, target)


def eliminate(v: Valuation, x) -> Valuation:
    name = x.name if isinstance(x, Variable) else x
    if name not in v.domain:
        return v
    return marginalize(v, v.domain.difference([name]))


def eliminate_all(v: Valuation, names: Iterable) -> Valuation:
    for x in names:
        v = eliminate(v, x)
    return v


def combine(v1: Valuation, v2: Valuation, config: SolverConfig | None = None) -> Valuation:
    """Extend both valuations to the union of their domains and combine."""
    _same_kind(v1, v2)
    joint = v1.domain.union(v2.domain)
    a, b = extend(v1, joint), extend(v2, joint)
    if isinstance(a, IntervalValuation):
        return combine_credal(a, b, config)
    return combine_pmf(a, b)
