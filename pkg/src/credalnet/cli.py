"""Command-line front end.

Exit codes: 0 success, 2 parse or model error, 3 incoherent intervals,
4 total conflict, 5 solver failure, 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .core import Domain, IntervalValuation
from .errors import CredalNetError, DomainError, OrderError, ParseError
from .evaluation import MarginalReport, compare
from .fileformat import NetworkSpec, diagnose, explain_order, parse_network, read_intervals
from .network import build_join_tree, evaluate, validate_order
from .optim import SolverConfig

EXIT_USAGE = 64
DEMOS = ("arrival-delay",)


def _round(x):
    """Floats to 12 significant digits, recursively."""
    if isinstance(x, float):
        return float(f"{x:.12g}")
    if isinstance(x, dict):
        return {k: _round(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_round(v) for v in x]
    return x


@dataclass
class ResultDocument:
    engine: str
    query: list[str]
    order: list[str]
    states: list[str]
    lower: list[float]
    upper: list[float]
    solver: dict
    D: float | None = None
    truth: list[float] | None = None
    time_s: float | None = None
    extra: dict = field(default_factory=dict)

    def to_dict(self, timing: bool = False) -> dict:
        d = asdict(self)
        if self.engine == "precise":
            d["probabilities"] = d.pop("lower")
            d.pop("upper")
        for key in ("D", "truth"):
            if d[key] is None:
                d.pop(key)
        if not timing or self.time_s is None:
            d.pop("time_s")
        if not d["extra"]:
            d.pop("extra")
        return _round(d)

    def to_json(self, timing: bool = False) -> str:
        return json.dumps(self.to_dict(timing), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "ResultDocument":
        d = dict(d)
        if "probabilities" in d:
            p = d.pop("probabilities")
            d["lower"], d["upper"] = p, list(p)
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "ResultDocument":
        return cls.from_dict(json.loads(text))


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _default_seed() -> int:
    env = os.environ.get("CVN_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise OrderError(f"CVN_SEED must be an integer, got {env!r}") from None


def _solver_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--order", help="elimination order, comma separated (default: greedy)")
    p.add_argument("--solver", choices=("auto", "lp", "oracle"), default="auto",
                   help="inner solver for credal combination")
    p.add_argument("--seed", type=int, default=None,
                   help="multistart seed (default: $CVN_SEED or 0)")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.add_argument("--timing", action="store_true", help="include wall-clock time in --json output")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="credalnet", description="Inference in credal valuation networks.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("infer", help="marginal of the query variables")
    p.add_argument("file")
    p.add_argument("--engine", choices=("precise", "credal"), default="credal")
    _solver_args(p)

    p = sub.add_parser("validate", help="parse and check a network file")
    p.add_argument("file")
    p.add_argument("--explain", action="store_true",
                   help="list table row order for every valuation")
    p.add_argument("--engine", choices=("precise", "credal"), default="credal")

    p = sub.add_parser("compare", help="credal result against a truth and other methods")
    p.add_argument("file")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--truth", metavar="PATH", help="intervals file holding the true PMF")
    g.add_argument("--truth-inline", metavar="P0,P1,...", help="true PMF as a list")
    g.add_argument("--precise-truth", action="store_true",
                   help="use the precise engine on the same file as truth")
    p.add_argument("--extra", action="append", default=[], metavar="NAME=PATH",
                   help="additional interval result to tabulate")
    _solver_args(p)

    p = sub.add_parser("demo", help="bundled reproductions")
    p.add_argument("name", help=f"one of: {', '.join(DEMOS)}")
    _solver_args(p)
    return parser


def _config(args) -> SolverConfig:
    seed = args.seed if args.seed is not None else _default_seed()
    return SolverConfig(rng_seed=seed, method=args.solver)


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None


def _data(name: str) -> str:
    return resources.files("credalnet").joinpath("data", name).read_text(encoding="utf-8")


def run_inference(spec: NetworkSpec, engine: str, cfg: SolverConfig,
                  order=None) -> tuple[ResultDocument, object]:
    net = spec.build(engine)
    if isinstance(order, str):
        order = [x.strip() for x in order.split(",") if x.strip()]
    order = validate_order(net, order)
    t0 = time.perf_counter()
    tree = build_join_tree(net, order)
    out = evaluate(tree, net, cfg)
    elapsed = time.perf_counter() - t0
    states = MarginalReport.from_valuation(engine, out).state_labels()
    if isinstance(out, IntervalValuation):
        lo, up = out.lower.tolist(), out.upper.tolist()
    else:
        lo = up = out.probs.tolist()
    solver = {"bisection_tol": cfg.bisection_tol, "bisection_max_iter": cfg.bisection_max_iter,
              "multistart_count": cfg.multistart_count, "rng_seed": cfg.rng_seed,
              "vertex_threshold": cfg.vertex_threshold, "eps_conflict": cfg.eps_conflict,
              "method": cfg.method}
    doc = ResultDocument(engine, list(net.query.names), list(order), states, lo, list(up),
                         solver, time_s=elapsed)
    return doc, out


def _print_result(doc: ResultDocument) -> None:
    print(f"engine: {doc.engine}   query: {','.join(doc.query)}   "
          f"order: {','.join(doc.order) or '-'}")
    width = max(len(s) for s in doc.states)
    for s, a, b in zip(doc.states, doc.lower, doc.upper):
        cell = f"{a:.6f}" if doc.engine == "precise" else f"[{a:.6f}, {b:.6f}]"
        print(f"  {s.rjust(width)}  {cell}")


def cmd_infer(args) -> int:
    spec = parse_network(_read(args.file))
    doc, _ = run_inference(spec, args.engine, _config(args), args.order)
    if args.json:
        print(doc.to_json(args.timing))
    else:
        _print_result(doc)
        print(f"time: {doc.time_s:.3f} s")
    return 0


def cmd_validate(args) -> int:
    spec = parse_network(_read(args.file))
    diags = diagnose(spec, args.engine)
    print(f"{len(spec.variables)} variables, {len(spec.valuations)} valuations, "
          f"query {','.join(spec.query)}")
    for d in diags:
        where = f"line {d.line}" if d.line else "network"
        who = f" {d.valuation}:" if d.valuation else ""
        print(f"{d.severity}: {where}:{who} {d.message}")
    if args.explain:
        print("table rows follow canonical configuration order: variables sorted by name, "
              "the last one varying fastest")
        for decl in spec.valuations:
            dom = Domain(tuple(spec.variables[n] for n in decl.rule.domain))
            print(f"{decl.name} on {dom}:")
            for k, text in enumerate(explain_order(dom)):
                print(f"  row {k}: {text}")
    if not diags:
        print("ok")
        return 0
    return max(d.exit_code for d in diags) if any(d.severity == "error" for d in diags) \
        else diags[0].exit_code


def _truth_vector(args, spec, cfg) -> np.ndarray | None:
    if args.truth_inline:
        try:
            return np.array([float(x) for x in args.truth_inline.split(",")])
        except ValueError:
            raise ParseError(f"bad --truth-inline list {args.truth_inline!r}") from None
    if args.truth:
        _, decl = read_intervals(_read(args.truth))
        lo, up = np.asarray(decl.rule.rows, dtype=float).T
        if np.any(lo != up):
            raise ParseError("truth file must hold point probabilities")
        return lo
    if args.precise_truth:
        doc, _ = run_inference(spec, "precise", cfg, args.order)
        return np.array(doc.lower)
    return None


def _extra_report(item: str, domain) -> MarginalReport:
    name, eq, path = item.partition("=")
    if not eq or not name:
        raise OrderError(f"--extra expects NAME=PATH, got {item!r}")
    spec, decl = read_intervals(_read(path))
    dom = Domain(tuple(spec.variables[n] for n in decl.rule.domain))
    if dom != domain:
        raise DomainError(
            f"--extra {name}: intervals on {dom}, result on {domain}")
    lo, up = np.asarray(decl.rule.rows, dtype=float).T
    return MarginalReport(name, dom, lo, up)


def comparison(spec: NetworkSpec, cfg: SolverConfig, order=None, truth=None, extras=()):
    doc, out = run_inference(spec, "credal", cfg, order)
    reports = [MarginalReport.from_valuation("CVN", out)]
    reports.extend(extras(out.domain) if callable(extras) else extras)
    table = compare(reports, truth)
    if truth is not None:
        doc.truth = [float(x) for x in truth]
        doc.D = table.D[0]
    return doc, table


def cmd_compare(args) -> int:
    spec = parse_network(_read(args.file))
    cfg = _config(args)
    truth = _truth_vector(args, spec, cfg)
    doc, table = comparison(spec, cfg, args.order, truth,
                            lambda dom: [_extra_report(e, dom) for e in args.extra])
    if args.json:
        d = doc.to_dict(args.timing)
        d["comparison"] = _round(table.to_dict())
        print(json.dumps(d, indent=2, sort_keys=True))
    else:
        print(table.format())
    return 0


def cmd_demo(args) -> int:
    if args.name not in DEMOS:
        print(f"unknown demo {args.name!r}; available: {', '.join(DEMOS)}", file=sys.stderr)
        return EXIT_USAGE
    spec = parse_network(_data("arrival_delay.cvn"))
    en_spec, en = read_intervals(_data("arrival_delay_en.intervals"))
    cfg = _config(args)
    precise, _ = run_inference(spec, "precise", cfg, args.order)
    truth = np.array(precise.lower)
    lo, up = np.asarray(en.rule.rows, dtype=float).T

    def extras(dom):
        return [MarginalReport("EN", dom, lo, up)]

    credal, table = comparison(spec, cfg, args.order, truth, extras)
    if args.json:
        out = {"precise": precise.to_dict(args.timing), "credal": credal.to_dict(args.timing),
               "comparison": _round(table.to_dict())}
        print(json.dumps(out, indent=2, sort_keys=True))
        return 0
    print("Arrival delay: marginal of A (days)")
    print(f"elimination order: {','.join(credal.order)}")
    print()
    print(table.format())
    print()
    for m, d in zip(table.methods, table.D):
        print(f"D({m}) = {d:.3f}")
    print(f"precise engine {precise.time_s:.3f} s, credal engine {credal.time_s:.2f} s")
    return 0


COMMANDS = {"infer": cmd_infer, "validate": cmd_validate, "compare": cmd_compare,
            "demo": cmd_demo}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except CredalNetError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
