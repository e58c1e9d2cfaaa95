"""The ``.cvn`` network file format.

One statement per line, ``#`` starts a comment::

    var A : 0..4                     # integer shorthand for {0,1,2,3,4}
    var L : {0,1}
    val phi1 on A,D,T : sum A = D + T prob [0.96,1.00] truth 1.0
    val phi4 on S,R   : implies S=1 -> R=0 prob [0.88,0.91]
    val phi5 on L     : assign L=1 prob 0.82
    val prior on L    : table 0.17,0.20; 0.80,0.83
    query A

``prob r`` is shorthand for ``prob [r,r]``. The optional ``truth r`` gives the
point reliability used by the precise engine when ``prob`` is an interval.
Table rows may be ``l,u``, ``[l,u]`` or a single number, separated by ``;``,
one per configuration in canonical order: variables sorted by name, the last
one varying fastest.

Parsing checks syntax and declarations only. Rules are compiled when a
network is built, so :func:`diagnose` can report rule-level problems without
stopping at the first one.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from .core import Domain, Variable, check_coherence, config_decode, tighten_to_reachable
from .errors import (CoherenceError, CredalNetError, EmptyCredalSet, InvalidRule, ParseError)
from .network import ValuationNetwork
from .rules import RuleSpec, compile_rule, satisfying_set

NAME = r"[A-Za-z_][A-Za-z0-9_]*"
NUM = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_NAME_RE = re.compile(rf"^{NAME}$")
_RANGE_RE = re.compile(r"^(-?\d+)\s*\.\.\s*(-?\d+)$")
_PROB_RE = re.compile(
    rf"\s+prob\s+(?:\[\s*({NUM})\s*,\s*({NUM})\s*\]|({NUM}))(?:\s+truth\s+({NUM}))?\s*$")
_ASSIGN_RE = re.compile(rf"^({NAME})\s*=\s*(\S+)$")


@dataclass(frozen=True)
class ValuationDecl:
    name: str
    rule: RuleSpec
    line: int | None = field(default=None, compare=False)


@dataclass
class NetworkSpec:
    variables: dict[str, Variable] = field(default_factory=dict)
    valuations: list[ValuationDecl] = field(default_factory=list)
    query: tuple[str, ...] = ()
    var_lines: dict[str, int] = field(default_factory=dict, compare=False)

    def valuation(self, name: str) -> ValuationDecl:
        for v in self.valuations:
            if v.name == name:
                return v
        raise KeyError(name)

    def build(self, engine: str = "credal", query=None) -> ValuationNetwork:
        vals = {}
        for decl in self.valuations:
            try:
                vals[decl.name] = compile_rule(decl.rule, self.variables, engine)
            except CredalNetError as exc:
                raise type(exc)(f"valuation {decl.name!r} (line {decl.line}): {exc}") from exc
        return ValuationNetwork(self.variables.values(), vals, query or self.query)


def _strip_comment(line: str) -> str:
    k = line.find("#")
    return line if k < 0 else line[:k]


def _col(raw: str, token: str) -> int:
    k = raw.find(token)
    return k + 1 if k >= 0 else 1


def _parse_frame(text: str, lineno: int, raw: str) -> tuple[str, ...]:
    text = text.strip()
    m = _RANGE_RE.match(text)
    if m:
        a, b = int(m.group(1)), int(m.group(2))
        if b < a:
            raise ParseError(f"empty range {text}", lineno, _col(raw, text))
        return tuple(str(i) for i in range(a, b + 1))
    if text.startswith("{") and text.endswith("}"):
        labels = tuple(s.strip() for s in text[1:-1].split(","))
        if any(not s for s in labels):
            raise ParseError("empty state label", lineno, _col(raw, "{"))
        return labels
    raise ParseError(f"expected a frame like {{a,b}} or 0..4, got {text!r}", lineno,
                     _col(raw, text))


def _names(text: str, lineno: int, raw: str) -> tuple[str, ...]:
    names = tuple(s.strip() for s in text.split(","))
    for n in names:
        if not _NAME_RE.match(n):
            raise ParseError(f"bad variable name {n!r}", lineno, _col(raw, n or ","))
    return names


def _pair(text: str, lineno: int, raw: str) -> tuple[str, str]:
    m = _ASSIGN_RE.match(text.strip())
    if not m:
        raise ParseError(f"expected VAR=STATE, got {text.strip()!r}", lineno, _col(raw, text.strip()))
    return m.group(1), m.group(2)


def _num(text: str, lineno: int, raw: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ParseError(f"expected a number, got {text!r}", lineno, _col(raw, text)) from None


def parse_table_rows(text: str, lineno: int | None = None, raw: str = "") -> tuple:
    rows = []
    for chunk in text.split(";"):
        chunk = chunk.strip().strip("[]").strip()
        if not chunk:
            raise ParseError("empty table row", lineno, _col(raw, ";"))
        parts = [p.strip() for p in chunk.split(",")]
        if len(parts) == 1:
            r = _num(parts[0], lineno, raw)
            rows.append((r, r))
        elif len(parts) == 2:
            rows.append((_num(parts[0], lineno, raw), _num(parts[1], lineno, raw)))
        else:
            raise ParseError(f"table row {chunk!r} needs one or two numbers", lineno,
                             _col(raw, chunk))
    return tuple(rows)


def _parse_val(rest: str, lineno: int, raw: str, spec: NetworkSpec) -> ValuationDecl:
    m = re.match(rf"^({NAME})\s+on\s+([^:]+?)\s*:\s*(.+)$", rest)
    if not m:
        raise ParseError("expected 'val NAME on V1,V2 : BODY'", lineno, _col(raw, "val"))
    name, dom_text, body = m.groups()
    dom = _names(dom_text, lineno, raw)
    for v in dom:
        if v not in spec.variables:
            raise ParseError(f"undeclared variable {v!r}", lineno, _col(raw, v))
    if any(d.name == name for d in spec.valuations):
        raise ParseError(f"duplicate valuation name {name!r}", lineno, _col(raw, name))
    kind, _, args = body.partition(" ")
    kind = kind.strip()
    if kind == "table":
        if _PROB_RE.search(" " + args):
            raise ParseError("table rows carry their own probabilities; drop 'prob'", lineno,
                             _col(raw, "prob"))
        rule = RuleSpec("table", dom, rows=parse_table_rows(args, lineno, raw))
        return ValuationDecl(name, rule, lineno)
    pm = _PROB_RE.search(" " + args)
    if not pm:
        raise ParseError(f"{kind} rule needs 'prob [l,u]' or 'prob r'", lineno, len(raw))
    lo, up, point, truth = pm.groups()
    rel = (float(point), float(point)) if point is not None else (float(lo), float(up))
    truth = None if truth is None else float(truth)
    args = (" " + args)[: pm.start()].strip()
    kw: dict = {}
    if kind == "sum":
        sm = re.match(rf"^({NAME})\s*=\s*(.+)$", args)
        if not sm:
            raise ParseError("expected 'sum TARGET = A + B'", lineno, _col(raw, "sum"))
        addends = tuple(a.strip() for a in sm.group(2).split("+"))
        for a in (sm.group(1), *addends):
            if not _NAME_RE.match(a):
                raise ParseError(f"bad variable name {a!r}", lineno, _col(raw, a or "+"))
        kw = dict(target=sm.group(1), addends=addends)
    elif kind == "implies":
        left, arrow, right = args.partition("->")
        if not arrow:
            raise ParseError("expected 'implies V=s -> W=t'", lineno, _col(raw, "implies"))
        kw = dict(antecedent=_pair(left, lineno, raw), consequent=_pair(right, lineno, raw))
    elif kind == "assign":
        kw = dict(assignment=_pair(args, lineno, raw))
    else:
        raise ParseError(f"unknown rule kind {kind!r}", lineno, _col(raw, kind))
    try:
        rule = RuleSpec(kind, dom, reliability=rel, truth=truth, **kw)
    except InvalidRule as exc:
        raise ParseError(str(exc), lineno, _col(raw, kind)) from None
    for var, label in (p for p in (rule.antecedent, rule.consequent, rule.assignment) if p):
        if label not in spec.variables[var].frame:
            raise ParseError(f"{label!r} is not a state of {var}", lineno, _col(raw, f"{var}="))
    return ValuationDecl(name, rule, lineno)


def parse_network(text: str, require_query: bool = True) -> NetworkSpec:
    spec = NetworkSpec()
    query_line = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        rest = rest.strip()
        if head == "var":
            m = re.match(rf"^({NAME})\s*:\s*(.+)$", rest)
            if not m:
                raise ParseError("expected 'var NAME : FRAME'", lineno, _col(raw, "var"))
            name = m.group(1)
            if name in spec.variables:
                raise ParseError(f"variable {name!r} declared twice", lineno, _col(raw, name))
            spec.variables[name] = Variable(name, _parse_frame(m.group(2), lineno, raw))
            spec.var_lines[name] = lineno
        elif head == "val":
            spec.valuations.append(_parse_val(rest, lineno, raw, spec))
        elif head == "query":
            if query_line is not None:
                raise ParseError(f"second query statement (first on line {query_line})", lineno, 1)
            q = _names(rest, lineno, raw)
            for v in q:
                if v not in spec.variables:
                    raise ParseError(f"undeclared variable {v!r}", lineno, _col(raw, v))
            spec.query = q
            query_line = lineno
        else:
            raise ParseError(f"unknown statement {head!r}", lineno, _col(raw, head))
    if require_query and query_line is None:
        raise ParseError("no query statement")
    return spec


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _fmt_frame(v: Variable) -> str:
    labels = v.frame
    try:
        ints = [int(s) for s in labels]
        if [str(i) for i in ints] == list(labels) and ints == list(range(ints[0], ints[0] + len(ints))):
            return f"{ints[0]}..{ints[-1]}"
    except ValueError:
        pass
    return "{" + ",".join(labels) + "}"


def format_rule(rule: RuleSpec) -> str:
    if rule.kind == "table":
        return "table " + "; ".join(
            _fmt(a) if a == b else f"{_fmt(a)},{_fmt(b)}" for a, b in rule.rows)
    if rule.kind == "sum":
        body = f"sum {rule.target} = {' + '.join(rule.addends)}"
    elif rule.kind == "implies":
        body = f"implies {'='.join(rule.antecedent)} -> {'='.join(rule.consequent)}"
    else:
        body = f"assign {'='.join(rule.assignment)}"
    lo, up = rule.reliability
    prob = _fmt(lo) if lo == up else f"[{_fmt(lo)},{_fmt(up)}]"
    out = f"{body} prob {prob}"
    if rule.truth is not None:
        out += f" truth {_fmt(rule.truth)}"
    return out


def format_network(spec: NetworkSpec) -> str:
    lines = [f"var {name} : {_fmt_frame(v)}" for name, v in spec.variables.items()]
    for d in spec.valuations:
        lines.append(f"val {d.name} on {','.join(d.rule.domain)} : {format_rule(d.rule)}")
    if spec.query:
        lines.append(f"query {','.join(spec.query)}")
    return "\n".join(lines) + "\n"


def explain_order(domain: Domain) -> list[str]:
    """Human-readable list of the configurations of ``domain`` in row order."""
    out = []
    for i in range(domain.cardinality):
        states = config_decode(domain, i)
        out.append(", ".join(f"{v.name}={v.frame[s]}" for v, s in zip(domain.variables, states)))
    return out


@dataclass(frozen=True)
class Diagnostic:
    valuation: str
    line: int | None
    severity: str  # "error" or "warning"
    message: str
    exit_code: int = 0


def diagnose(spec: NetworkSpec, engine: str = "credal") -> list[Diagnostic]:
    """Rule-level problems in a parsed network, one entry per valuation."""
    out = []
    for d in spec.valuations:
        r = d.rule
        try:
            if r.kind == "table":
                dom = Domain(tuple(spec.variables[n] for n in r.domain))
                if len(r.rows) != dom.cardinality:
                    raise InvalidRule(
                        f"table has {len(r.rows)} rows, {dom} has {dom.cardinality} configurations")
                lo, up = np.asarray(r.rows, dtype=float).T
                if np.any(lo > up) or np.any(lo < 0) or np.any(up > 1):
                    raise CoherenceError("table rows need 0 <= lower <= upper <= 1")
                rep = check_coherence(lo, up)
                if not rep.cond1_ok:
                    raise EmptyCredalSet(
                        f"no PMF fits these rows: lower bounds sum to {lo.sum():.6g}, "
                        f"upper bounds to {up.sum():.6g}")
                if not rep.reachable_ok:
                    fixed = tighten_to_reachable(lo, up)
                    rows = "; ".join(f"{a:.6g},{b:.6g}" for a, b in zip(fixed.lower, fixed.upper))
                    out.append(Diagnostic(
                        d.name, d.line, "warning",
                        f"rows {list(rep.violating_indices)} are not reachable; "
                        f"equivalent tight rows: {rows}", CoherenceError.exit_code))
            else:
                dom = Domain(tuple(spec.variables[n] for n in r.domain))
                satisfying_set(r, dom)
            compile_rule(r, spec.variables, engine)
        except CredalNetError as exc:
            out.append(Diagnostic(d.name, d.line, "error", f"{type(exc).__name__}: {exc}",
                                  exc.exit_code))
    used = {n for d in spec.valuations for n in d.rule.domain}
    for name in spec.variables:
        if name not in used:
            out.append(Diagnostic("", spec.var_lines.get(name), "error",
                                  f"variable {name!r} appears in no valuation", 2))
    return out


def read_intervals(text: str) -> tuple[NetworkSpec, ValuationDecl]:
    """An intervals file: variable declarations plus exactly one table."""
    spec = parse_network(text, require_query=False)
    tables = [d for d in spec.valuations if d.rule.kind == "table"]
    if len(tables) != 1 or len(spec.valuations) != 1:
        raise ParseError("an intervals file holds exactly one table valuation")
    return spec, tables[0]
