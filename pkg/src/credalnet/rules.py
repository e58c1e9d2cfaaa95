"""Knowledge statements compiled into valuations.

A rule names a relation on the configurations of its domain and a
reliability: the probability (or probability interval) that the relation
holds. Compilation spreads the reliability uniformly over the satisfying
configurations S and the remaining mass uniformly over the violating ones V.
"""

from __future__ import annotations

import itertools
from collections.abc import Mapping
from dataclasses import dataclass

import numpy as np

from .core import Domain, IntervalValuation, PmfValuation, Variable, config_decode
from .errors import DomainError, InvalidRule, UnsatisfiableRule

RULE_KINDS = ("sum", "implies", "assign", "table")
ENGINES = ("precise", "credal")


@dataclass(frozen=True)
class RuleSpec:
    """One knowledge statement on the variables ``domain``.

    ``antecedent``/``consequent``/``assignment`` are ``(variable, label)``
    pairs. ``rows`` holds per-configuration ``(lower, upper)`` for tables.
    ``truth`` is an optional point reliability used by the precise engine when
    ``reliability`` is a proper interval.
    """

    kind: str
    domain: tuple[str, ...]
    target: str | None = None
    addends: tuple[str, ...] = ()
    antecedent: tuple[str, str] | None = None
    consequent: tuple[str, str] | None = None
    assignment: tuple[str, str] | None = None
    rows: tuple[tuple[float, float], ...] = ()
    reliability: tuple[float, float] = (1.0, 1.0)
    truth: float | None = None

    def __post_init__(self):
        if self.kind not in RULE_KINDS:
            raise InvalidRule(f"unknown rule kind {self.kind!r}")
        lo, up = (float(x) for x in self.reliability)
        object.__setattr__(self, "reliability", (lo, up))
        if not (0.0 <= lo <= up <= 1.0):
            raise InvalidRule(f"reliability [{lo}, {up}] is not an interval inside [0, 1]")
        if self.truth is not None and not 0.0 <= self.truth <= 1.0:
            raise InvalidRule(f"truth {self.truth} outside [0, 1]")
        if len(set(self.domain)) != len(self.domain):
            raise InvalidRule(f"repeated variable in rule domain {self.domain}")
        missing = [v for v in self.participants if v not in self.domain]
        if missing:
            raise InvalidRule(f"rule mentions {missing} outside its domain {self.domain}")
        if self.kind == "sum" and (self.target is None or not self.addends):
            raise InvalidRule("sum rule needs a target and at least one addend")
        if self.kind == "implies" and (self.antecedent is None or self.consequent is None):
            raise InvalidRule("implies rule needs an antecedent and a consequent")
        if self.kind == "assign" and self.assignment is None:
            raise InvalidRule("assign rule needs an assignment")

    @property
    def participants(self) -> tuple[str, ...]:
        if self.kind == "sum":
            return (self.target, *self.addends) if self.target else self.addends
        if self.kind == "implies":
            return tuple(p[0] for p in (self.antecedent, self.consequent) if p)
        if self.kind == "assign":
            return (self.assignment[0],) if self.assignment else ()
        return self.domain

    def point_reliability(self) -> float:
        lo, up = self.reliability
        if self.truth is not None:
            return self.truth
        if lo == up:
            return lo
        raise InvalidRule(
            f"precise engine needs a point reliability, rule has [{lo}, {up}] and no truth value")


@dataclass(frozen=True)
class SatisfyingSet:
    domain: Domain
    mask: np.ndarray

    @property
    def satisfying(self) -> np.ndarray:
        return np.flatnonzero(self.mask)

    @property
    def violating(self) -> np.ndarray:
        return np.flatnonzero(~self.mask)

    def __len__(self):
        return int(self.mask.sum())


def rule_domain(rule: RuleSpec, variables: Mapping[str, Variable]) -> Domain:
    missing = [n for n in rule.domain if n not in variables]
    if missing:
        raise DomainError(f"undeclared variables {missing}")
    return Domain(tuple(variables[n] for n in rule.domain))


def _int_labels(var: Variable) -> np.ndarray:
    try:
        return np.array([int(s) for s in var.frame])
    except ValueError:
        raise InvalidRule(f"sum rule needs integer state labels, {var.name} has {var.frame}") from None


def _labels_grid(domain: Domain, name: str, values) -> np.ndarray:
    """``values`` (one per state of ``name``) broadcast over every configuration."""
    shape = [1] * len(domain)
    k = domain.axis(name)
    shape[k] = domain.shape[k]
    return np.broadcast_to(np.asarray(values).reshape(shape), domain.shape).reshape(-1)


def _is_state(domain: Domain, pair: tuple[str, str]) -> np.ndarray:
    name, label = pair
    s = domain[name].state_index(label)
    return _labels_grid(domain, name, np.arange(domain[name].size) == s)


def satisfying_set(rule: RuleSpec, domain: Domain) -> SatisfyingSet:
    if rule.kind == "sum":
        target = domain[rule.target]
        total = sum(_labels_grid(domain, a, _int_labels(domain[a])) for a in rule.addends)
        tvals = _int_labels(target)
        mask = _labels_grid(domain, rule.target, tvals) == total
        # every reachable sum must be a state of the target
        addend_vals = [_int_labels(domain[a]) for a in rule.addends]
        sums = {int(sum(c)) for c in itertools.product(*addend_vals)}
        uncovered = sorted(sums - set(int(t) for t in tvals))
        if uncovered:
            raise UnsatisfiableRule(
                f"sum rule {rule.target} = {' + '.join(rule.addends)}: "
                f"sums {uncovered} are not states of {rule.target}")
    elif rule.kind == "implies":
        mask = ~_is_state(domain, rule.antecedent) | _is_state(domain, rule.consequent)
    elif rule.kind == "assign":
        mask = _is_state(domain, rule.assignment)
    else:
        raise InvalidRule("table rules have no satisfying set")
    mask = np.array(mask, dtype=bool)
    if not mask.any():
        raise UnsatisfiableRule(f"no configuration of {domain} satisfies the {rule.kind} rule")
    return SatisfyingSet(domain, mask)


def _table_valuation(rule: RuleSpec, domain: Domain, engine: str):
    n = domain.cardinality
    if len(rule.rows) != n:
        raise InvalidRule(f"table has {len(rule.rows)} rows, domain {domain} has {n} configurations")
    rows = np.asarray(rule.rows, dtype=float).reshape(n, 2)
    if engine == "precise":
        if np.any(rows[:, 0] != rows[:, 1]):
            raise InvalidRule("precise engine needs point probabilities in table rows")
        return PmfValuation(domain, rows[:, 0])
    return IntervalValuation(domain, rows[:, 0], rows[:, 1])


def _spread(sat: SatisfyingSet, on_s: float, on_v: float) -> np.ndarray:
    n_s, n_v = len(sat), sat.mask.size - len(sat)
    return np.where(sat.mask, on_s / n_s, on_v / n_v if n_v else 0.0)


def compile_rule(rule: RuleSpec, variables: Mapping[str, Variable] | Domain,
                 engine: str = "credal"):
    """Valuation expressed by ``rule``: a PMF for the precise engine,
    probability intervals for the credal engine."""
    if engine not in ENGINES:
        raise ValueError(f"engine must be one of {ENGINES}")
    if isinstance(variables, Domain):
        variables = {v.name: v for v in variables}
    domain = rule_domain(rule, variables)
    if rule.kind == "table":
        return _table_valuation(rule, domain, engine)
    sat = satisfying_set(rule, domain)
    lo, up = rule.reliability
    full = len(sat) == sat.mask.size
    if engine == "precise":
        r = rule.point_reliability()
        if full and r < 1.0:
            raise InvalidRule("rule holds on every configuration, reliability must be 1")
        return PmfValuation(domain, _spread(sat, r, 1.0 - r))
    if full and up < 1.0:
        raise InvalidRule("rule holds on every configuration, reliability upper bound must be 1")
    lower = _spread(sat, lo, 1.0 - up)
    upper = _spread(sat, up, 1.0 - lo)
    return IntervalValuation(domain, lower, upper)
