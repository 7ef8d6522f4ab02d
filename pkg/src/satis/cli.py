"""Command line interface.

Exit codes: 0 success, 1 validation or usage error, 2 I/O error, 3 rendering failure.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from pathlib import Path

from .compiler import CompileError, compile_map, emit_rule_text
from .diagnostics import ParseError
from .engine import EngineConfig, RenderingReport, explain, flatten
from .graph import Graph
from .maps import validate
from .registry import KnowledgeBase, list_fragments, load_memory, refinement_heads
from .signature import SectionPattern
from .syntax import parse_map_dsl
from .syntax.lexer import resolve_iri, tokenize
from .terms import Iri, TermError, compact

EXIT_OK, EXIT_INVALID, EXIT_IO, EXIT_RENDER = 0, 1, 2, 3

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["goal", "status", "pipelines", "truncated"],
    "additionalProperties": False,
    "properties": {
        "goal": {
            "type": "object",
            "required": ["verb", "object"],
            "additionalProperties": False,
            "properties": {"verb": {"type": "string"}, "object": {"type": "string"}},
        },
        "status": {"enum": ["success", "failure"]},
        "reason": {"enum": ["no-matching-rule", "no-services", "depth-exceeded", "cycle"]},
        "pipelines": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["steps"],
                "additionalProperties": False,
                "properties": {
                    "steps": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["verb", "object", "services"],
                            "additionalProperties": False,
                            "properties": {
                                "verb": {"type": "string"},
                                "object": {"type": "string"},
                                "services": {"type": "array", "minItems": 1, "items": {"type": "string"}},
                                "rule": {"type": "string"},
                            },
                        },
                    }
                },
            },
        },
        "truncated": {"type": "boolean"},
    },
}


class _Fail(Exception):
    def __init__(self, code: int, message: str = ""):
        super().__init__(message)
        self.code = code


def _root(arg: str | None) -> Path:
    root = arg or os.environ.get("SATIS_MEMORY")
    if not root:
        raise _Fail(EXIT_INVALID, "no memory directory given and SATIS_MEMORY is not set")
    return Path(root)


def _load(root: Path, show_warnings: bool = True) -> KnowledgeBase:
    try:
        kb, diags = load_memory(root)
    except (FileNotFoundError, NotADirectoryError) as exc:
        raise _Fail(EXIT_IO, str(exc)) from None
    for d in diags:
        if d.is_error or show_warnings:
            print(d, file=sys.stderr)
    if any(d.is_error for d in diags):
        raise _Fail(EXIT_INVALID)
    return kb


def _qname(text: str, kb: KnowledgeBase) -> Iri:
    try:
        tokens = tokenize(text)
    except ParseError as exc:
        raise _Fail(EXIT_INVALID, f"cannot parse {text!r}: {exc}") from None
    if len(tokens) != 2 or tokens[0].kind not in ("QNAME", "IRI"):
        raise _Fail(EXIT_INVALID, f"cannot parse {text!r} as a qname or <iri>")
    try:
        return resolve_iri(tokens[0], kb.namespaces)
    except (ParseError, TermError) as exc:
        raise _Fail(EXIT_INVALID, f"cannot parse {text!r}: {exc}") from None


def cmd_validate(args: argparse.Namespace) -> int:
    kb = _load(_root(args.root))
    print(f"ok: {len(kb.maps)} maps, {len(kb.services)} services, {len(kb.rules)} rules, "
          f"{len(kb.graph)} triples")
    return EXIT_OK


def cmd_fragments(args: argparse.Namespace) -> int:
    kb = _load(_root(args.root), show_warnings=False)
    verb = _qname(args.verb, kb) if args.verb else None
    obj = _qname(args.object, kb) if args.object else None
    ns = kb.namespaces
    for f in list_fragments(kb, verb, obj):
        print(f"{f.rule_id}\t{f.kind}\t{f.signature.render(ns)}\t{f.origin}")
    return EXIT_OK


def report_json(report: RenderingReport, cfg: EngineConfig) -> dict:
    goal = report.goal
    out: dict = {
        "goal": {"verb": goal.target_verb.value, "object": goal.target_object.value},
        "status": "success" if report.ok else "failure",
    }
    pipelines, truncated = [], False
    if report.ok:
        flat = flatten(report, cfg)
        truncated = flat.truncated
        for p in flat.pipelines:
            steps = [{"verb": s.goal.target_verb.value, "object": s.goal.target_object.value,
                      "services": [x.value for x in s.services], "rule": s.rule_id} for s in p.steps]
            pipelines.append({"steps": steps})
    else:
        out["reason"] = report.reason
    out["pipelines"] = pipelines
    out["truncated"] = truncated
    return out


def cmd_render(args: argparse.Namespace) -> int:
    kb = _load(_root(args.root), show_warnings=False)
    goal = SectionPattern.goal(_qname(args.verb, kb), _qname(args.object, kb))
    try:
        cfg = EngineConfig(max_depth=args.max_depth, subsumption_matching=not args.no_subsumption,
                           max_pipelines=args.max_pipelines)
    except ValueError as exc:
        raise _Fail(EXIT_INVALID, str(exc)) from None
    report = kb.render(goal, cfg)
    ns = kb.namespaces
    if args.json:
        print(json.dumps(report_json(report, cfg), indent=2))
    else:
        print(f"goal: {compact(goal.target_verb, ns)} {compact(goal.target_object, ns)}")
        if report.ok:
            flat = flatten(report, cfg)
            print(f"status: success, {len(flat.pipelines)} pipeline(s)" + (" (truncated)" if flat.truncated else ""))
            for n, p in enumerate(flat.pipelines, 1):
                print(f"pipeline {n}:")
                for k, s in enumerate(p.steps, 1):
                    services = " ".join(compact(x, ns) for x in s.services)
                    print(f"  {k}. {compact(s.goal.target_verb, ns)} {compact(s.goal.target_object, ns)}: "
                          f"{{{services}}}  [{s.rule_id}]")
        else:
            print(f"status: failure ({report.reason})")
    if args.explain:
        print()
        print(explain(report, ns), end="")
    return EXIT_OK if report.ok else EXIT_RENDER


def _file_name(rule_id: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.\-]", "_", rule_id.replace("#", ".")) + ".rq"


def cmd_compile(args: argparse.Namespace) -> int:
    path = Path(args.map)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise _Fail(EXIT_IO, f"cannot read {path}: {exc}") from None
    try:
        doc = parse_map_dsl(text)
    except ParseError as exc:
        for d in exc.diagnostics:
            print(d.with_source(str(path)), file=sys.stderr)
        return EXIT_INVALID

    memory = Path(args.memory) if args.memory else (path.parent.parent if path.parent.name == "maps" else None)
    queries, domain, others = {}, Graph(), []
    if memory is not None and memory.is_dir():
        kb, _ = load_memory(memory)
        queries, domain, others = kb.queries, kb.graph, list(kb.maps.values())
    known = {m.id for m in doc.maps}
    heads = refinement_heads([m for m in others if m.id not in known] + list(doc.maps))

    rules = []
    failed = False
    for m in doc.maps:
        diags = validate(m, domain)
        for d in diags:
            print(d.with_source(str(path)), file=sys.stderr)
        if any(d.is_error for d in diags):
            failed = True
            continue
        map_heads = heads.get(m.id, []) + ([m.goal_head()] if m.goal is not None else [])
        try:
            rules += compile_map(m, queries, map_heads, origin=str(path))
        except CompileError as exc:
            print(f"{path}: error: {exc}", file=sys.stderr)
            failed = True
    if failed:
        return EXIT_INVALID

    out = Path(args.output)
    try:
        out.mkdir(parents=True, exist_ok=True)
        for rule in rules:
            name = _file_name(rule.id)
            (out / name).write_text(emit_rule_text(rule), encoding="utf-8")
            print(name)
    except OSError as exc:
        raise _Fail(EXIT_IO, str(exc)) from None
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="satis", description="Goal-driven semantic service retrieval.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="load a memory directory and report diagnostics")
    p.add_argument("root", nargs="?", help="memory directory (default: $SATIS_MEMORY)")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("compile", help="compile a map file into rule files")
    p.add_argument("map")
    p.add_argument("-o", "--output", required=True, help="output directory for .rq files")
    p.add_argument("--memory", help="memory directory providing queries and refining maps")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("fragments", help="list the rules of a memory")
    p.add_argument("root", nargs="?")
    p.add_argument("--verb")
    p.add_argument("--object")
    p.set_defaults(func=cmd_fragments)

    p = sub.add_parser("render", help="render a goal into pipelines of candidate services")
    p.add_argument("root", nargs="?")
    p.add_argument("--verb", required=True)
    p.add_argument("--object", required=True)
    p.add_argument("--json", action="store_true")
    p.add_argument("--explain", action="store_true")
    p.add_argument("--max-depth", type=int, default=EngineConfig.max_depth)
    p.add_argument("--no-subsumption", action="store_true")
    p.add_argument("--max-pipelines", type=int, default=EngineConfig.max_pipelines)
    p.set_defaults(func=cmd_render)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    try:
        return args.func(args)
    except _Fail as exc:
        if str(exc):
            print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
