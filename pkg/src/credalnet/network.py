"""Valuation networks and inference by variable elimination.

:func:`build_join_tree` records, as a binary tree, which valuations are
combined two at a time and where each variable is eliminated. Evaluating the
tree bottom-up is the fusion algorithm; :func:`fuse` does both steps.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from typing import Union

from . import algebra
from .core import Domain, IntervalValuation, PmfValuation, Variable
from .errors import DomainError, KindMismatch, OrderError, TotalConflict
from .optim import SolverConfig

log = logging.getLogger(__name__)

Valuation = Union[PmfValuation, IntervalValuation]


class ValuationNetwork:
    """Variables, named valuations over them, and the query variables."""

    def __init__(self, variables: Iterable[Variable],
                 valuations: Mapping[str, Valuation] | Sequence[tuple[str, Valuation]],
                 query: Iterable[str] | str):
        self.variables: dict[str, Variable] = {}
        for v in variables:
            if v.name in self.variables:
                raise DomainError(f"variable {v.name!r} declared twice")
            self.variables[v.name] = v
        items = list(valuations.items() if isinstance(valuations, Mapping) else valuations)
        if not items:
            raise DomainError("network has no valuations")
        self.valuations: dict[str, Valuation] = {}
        for name, val in items:
            if name in self.valuations:
                raise DomainError(f"duplicate valuation name {name!r}")
            for var in val.domain:
                if self.variables.get(var.name) != var:
                    raise DomainError(f"valuation {name!r} uses undeclared variable {var.name!r}")
            self.valuations[name] = val
        kinds = {type(v) for v in self.valuations.values()}
        if len(kinds) > 1:
            raise KindMismatch("network mixes precise and interval valuations")
        self.kind = kinds.pop()
        used = set().union(*(set(v.domain.names) for v in self.valuations.values()))
        unused = sorted(set(self.variables) - used)
        if unused:
            raise DomainError(f"variables {unused} appear in no valuation")
        query = [query] if isinstance(query, str) else list(query)
        if not query:
            raise DomainError("empty query")
        bad = [q for q in query if q not in self.variables]
        if bad:
            raise DomainError(f"query variables {bad} are not declared")
        self.query = Domain(tuple(self.variables[q] for q in query))
        self._cache: dict = {}

    @property
    def domain(self) -> Domain:
        return Domain(tuple(self.variables.values()))

    def elimination_variables(self) -> list[str]:
        return sorted(set(self.variables) - set(self.query.names))

    def with_query(self, query) -> "ValuationNetwork":
        """Same network, different query; shares the message cache."""
        net = ValuationNetwork(self.variables.values(), self.valuations, query)
        net._cache = self._cache
        return net

    def __repr__(self):
        return (f"ValuationNetwork({len(self.variables)} variables, "
                f"{len(self.valuations)} valuations, query={self.query})")


def _cardinality(names, variables: Mapping[str, Variable]) -> int:
    n = 1
    for x in names:
        n *= variables[x].size
    return n


def default_order(net: ValuationNetwork) -> list[str]:
    """Greedy order: eliminate the variable with the smallest joint frame
    over everything it touches; ties go to the smaller name."""
    pool = [frozenset(v.domain.names) for v in net.valuations.values()]
    remaining = set(net.elimination_variables())
    order = []
    while remaining:
        best = None
        for x in sorted(remaining):
            clique = frozenset().union(*(d for d in pool if x in d))
            cost = _cardinality(clique, net.variables)
            if best is None or cost < best[0]:
                best = (cost, x, clique)
        _, x, clique = best
        pool = [d for d in pool if x not in d] + [clique - {x}]
        remaining.discard(x)
        order.append(x)
    return order


def validate_order(net: ValuationNetwork, order: Sequence[str] | None) -> list[str]:
    if order is None:
        return default_order(net)
    order = list(order)
    expected = set(net.elimination_variables())
    if len(set(order)) != len(order):
        raise OrderError(f"elimination order repeats a variable: {order}")
    missing, extra = sorted(expected - set(order)), sorted(set(order) - expected)
    if missing or extra:
        parts = []
        if missing:
            parts.append(f"missing {missing}")
        if extra:
            parts.append(f"unexpected {extra} (query or undeclared)")
        raise OrderError("invalid elimination order: " + "; ".join(parts))
    return order


def induced_cliques(net: ValuationNetwork, order: Sequence[str]) -> dict[str, frozenset]:
    """Joint domain formed when each variable of ``order`` is eliminated."""
    pool = [frozenset(v.domain.names) for v in net.valuations.values()]
    out = {}
    for x in order:
        clique = frozenset().union(*(d for d in pool if x in d))
        out[x] = clique
        pool = [d for d in pool if x not in d] + [clique - {x}]
    return out


@dataclass(frozen=True)
class JoinTreeNode:
    """``op`` is ``leaf``, ``combine``, ``eliminate`` or ``marginalize``.

    ``key`` identifies the subtree structurally (leaf names and operations),
    so equal keys within a network denote equal valuations.
    """

    id: int
    op: str
    domain: Domain
    key: str
    children: tuple[int, ...] = ()
    name: str | None = None
    variable: str | None = None


@dataclass
class JoinTree:
    nodes: list[JoinTreeNode]
    root: int
    order: list[str]
    query: Domain
    payload: dict[int, Valuation] = field(default_factory=dict)

    def leaves(self) -> list[JoinTreeNode]:
        return [n for n in self.nodes if n.op == "leaf"]

    def __len__(self):
        return len(self.nodes)

    def max_domain(self) -> int:
        return max(len(n.domain) for n in self.nodes)

    def describe(self) -> str:
        lines = []

        def walk(i, depth):
            n = self.nodes[i]
            what = {"leaf": f"{n.name}", "eliminate": f"eliminate {n.variable}",
                    "combine": "combine", "marginalize": "marginalize"}[n.op]
            lines.append(f"{'  ' * depth}{what} on {n.domain}")
            for c in n.children:
                walk(c, depth + 1)

        walk(self.root, 0)
        return "\n".join(lines)


class _Builder:
    def __init__(self):
        self.nodes: list[JoinTreeNode] = []

    def add(self, **kw) -> JoinTreeNode:
        node = JoinTreeNode(id=len(self.nodes), **kw)
        self.nodes.append(node)
        return node

    def combine_all(self, group: list[JoinTreeNode]) -> JoinTreeNode:
        # smallest joint domain first, ties by structural key
        group = list(group)
        while len(group) > 1:
            best = None
            for a in range(len(group)):
                for b in range(a + 1, len(group)):
                    na, nb = group[a], group[b]
                    joint = na.domain.union(nb.domain)
                    rank = (joint.cardinality, *sorted((na.key, nb.key)))
                    if best is None or rank < best[0]:
                        best = (rank, a, b, joint)
            _, a, b, joint = best
            na, nb = sorted((group[a], group[b]), key=lambda n: n.key)
            node = self.add(op="combine", domain=joint, key=f"({na.key}*{nb.key})",
                            children=(na.id, nb.id))
            group = [g for k, g in enumerate(group) if k not in (a, b)] + [node]
        return group[0]


def build_join_tree(net: ValuationNetwork, order: Sequence[str] | None = None) -> JoinTree:
    order = validate_order(net, order)
    b = _Builder()
    pool = [b.add(op="leaf", domain=v.domain, key=name, name=name)
            for name, v in net.valuations.items()]
    for x in order:
        group = [n for n in pool if x in n.domain]
        pool = [n for n in pool if x not in n.domain]
        if not group:
            continue
        joint = b.combine_all(group)
        pool.append(b.add(op="eliminate", domain=joint.domain.difference([x]),
                          key=f"{joint.key}-{x}", children=(joint.id,), variable=x))
    root = b.combine_all(pool)
    if root.domain != net.query:
        root = b.add(op="marginalize", domain=net.query,
                     key=f"{root.key}@{','.join(net.query.names)}", children=(root.id,))
    return JoinTree(b.nodes, root.id, list(order), net.query)


def _leaf_names(tree: JoinTree, i: int) -> list[str]:
    n = tree.nodes[i]
    if n.op == "leaf":
        return [n.name]
    return [x for c in n.children for x in _leaf_names(tree, c)]


def evaluate(tree: JoinTree, net: ValuationNetwork, config: SolverConfig | None = None,
             cache: dict | None = None) -> Valuation:
    """Replay ``tree`` bottom-up; node values are stored in ``tree.payload``."""
    cfg = config or SolverConfig()
    values = tree.payload
    for node in tree.nodes:
        ck = (node.key, cfg)
        if cache is not None and ck in cache:
            values[node.id] = cache[ck]
            continue
        if node.op == "leaf":
            out = net.valuations[node.name]
        elif node.op == "combine":
            a, b = (values[c] for c in node.children)
            try:
                out = algebra.combine(a, b, cfg)
            except TotalConflict as exc:
                left, right = (_leaf_names(tree, c) for c in node.children)
                raise TotalConflict(
                    f"total conflict combining {'*'.join(left)} with {'*'.join(right)}: {exc}"
                ) from exc
        elif node.op == "eliminate":
            out = algebra.eliminate(values[node.children[0]], node.variable)
        else:
            out = algebra.marginalize(values[node.children[0]], node.domain)
        assert out.domain == node.domain
        values[node.id] = out
        if cache is not None:
            cache[ck] = out
    return values[tree.root]


def fuse(net: ValuationNetwork, order: Sequence[str] | None = None,
         config: SolverConfig | None = None, use_cache: bool = True) -> Valuation:
    """Marginal of the combination of all valuations on the query domain."""
    tree = build_join_tree(net, order)
    log.debug("join tree with %d nodes, order %s", len(tree), tree.order)
    return evaluate(tree, net, config, net._cache if use_cache else None)


def joint(net: ValuationNetwork, config: SolverConfig | None = None) -> Valuation:
    """Combination of every valuation on the full domain, no local computation.

    Valuations are combined in declaration order. Only sensible for small
    networks; it is the reference that :func:`fuse` is checked against.
    """
    it = iter(net.valuations.values())
    acc = next(it)
    for v in it:
        acc = algebra.combine(acc, v, config)
    return algebra.extend(acc, net.domain)


def brute_force_marginal(net: ValuationNetwork, config: SolverConfig | None = None) -> Valuation:
    return algebra.marginalize(joint(net, config), net.query)
