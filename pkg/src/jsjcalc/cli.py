"""Command-line interface: ``jsjcalc <command> FILE``.

Exit codes: 0 success, 1 domain violation, 2 usage or parse error.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .classify import classify_block, piece_types, recognize_exceptional
from .core import GraphError, KIND_JSJ, KIND_W, validate
from .isocanon import canonical_form, isomorphic
from .normalize import (
    characteristic_submanifold, check_toral, geometric_decomposition, jsj_to_w,
    matched_annulus_warnings, w_to_jsj,
)
from .oracle import EnumerationBounds, enumerate_graphs
from .textformat import ParseError, parse, serialize

OK, VIOLATION, USAGE = 0, 1, 2


class _Usage(Exception):
    pass


class _Violation(Exception):
    pass


def _load(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise _Usage(f"{path}: {exc.strerror}") from exc
    try:
        g = parse(text)
    except ParseError as exc:
        raise _Usage(f"{path}:{exc}") from exc
    return g


def _checked(path: str, strict: bool, kind=None):
    g = _load(path)
    problems = validate(g)
    if problems:
        raise _Violation("\n".join(f"{path}: {p}" for p in problems))
    if kind is not None and g.kind != kind:
        raise _Violation(f"{path}: expected a {kind} graph, got {g.kind}")
    if g.kind == KIND_W:
        warnings = matched_annulus_warnings(g)
        for w in warnings:
            print(f"warning: {path}: {w}", file=sys.stderr)
        if strict and warnings:
            raise _Violation(f"{path}: warnings escalated by --strict")
    return g


def cmd_validate(a):
    _checked(a.file, a.strict)
    print("valid")


def cmd_classify(a):
    g = _checked(a.file, a.strict)
    for pid, p in g.pieces.items():
        types = ",".join(sorted(piece_types(p)))
        print(f"{pid}\t{classify_block(p)}\t{types}")
    print(f"exceptional\t{recognize_exceptional(g)}")


def cmd_reduce(a):
    sys.stdout.write(serialize(w_to_jsj(_checked(a.file, a.strict, KIND_W))))


def cmd_expand(a):
    sys.stdout.write(serialize(jsj_to_w(_checked(a.file, a.strict, KIND_JSJ))))


def cmd_char(a):
    ann = characteristic_submanifold(_checked(a.file, a.strict, KIND_JSJ))
    for pid, label in ann.pieces.items():
        print(f"piece\t{pid}\t{label}")
    for eid, (product, label) in sorted(ann.thickenings.items()):
        print(f"thicken\t{eid}\t{product}\t{label}")


def cmd_geometric(a):
    sys.stdout.write(serialize(geometric_decomposition(_checked(a.file, a.strict, KIND_JSJ))))


def cmd_toral(a):
    if not check_toral(_checked(a.file, a.strict, KIND_JSJ)):
        raise _Violation(f"{a.file}: annulus edge in a graph with toral boundary")
    print("toral check holds")


def cmd_canon(a):
    print(canonical_form(_checked(a.file, a.strict)).hex())


def cmd_iso(a):
    same = isomorphic(_checked(a.file1, a.strict), _checked(a.file2, a.strict))
    print("isomorphic" if same else "not isomorphic")
    return OK if same else VIOLATION


def cmd_enum(a):
    if a.max_pieces < 1:
        raise _Usage("--max-pieces must be positive")
    bounds = EnumerationBounds(max_pieces=a.max_pieces, max_total_fibres=a.max_fibres,
                               max_total_genus=a.max_genus)
    out = Path(a.out)
    out.mkdir(parents=True, exist_ok=True)
    counts = {}
    for i, g in enumerate(enumerate_graphs(bounds)):
        n = len(g.pieces)
        counts[n] = counts.get(n, 0) + 1
        (out / f"g{i:06d}.jsjg").write_text(serialize(replace(g, name=f"g{i:06d}")), encoding="utf-8")
    manifest = {"bounds": {"max_pieces": a.max_pieces, "max_total_fibres": a.max_fibres,
                           "max_total_genus": a.max_genus},
                "counts": {str(k): v for k, v in sorted(counts.items())},
                "total": sum(counts.values())}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    print(f"{manifest['total']} graphs written to {out}")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="jsjcalc", description=__doc__.splitlines()[0])
    ap.add_argument("--strict", action="store_true",
                    help="treat warnings (unexpected matched-annulus patterns) as failures")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, fn, help_ in (
        ("validate", cmd_validate, "check a graph"),
        ("classify", cmd_classify, "per-piece block types"),
        ("reduce", cmd_reduce, "W-decomposition to JSJ-decomposition"),
        ("expand", cmd_expand, "JSJ-decomposition to W-decomposition"),
        ("char", cmd_char, "characteristic submanifold labels"),
        ("geometric", cmd_geometric, "geometric decomposition"),
        ("toral", cmd_toral, "toral-boundary check"),
        ("canon", cmd_canon, "canonical encoding as hex"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("file")
        p.set_defaults(func=fn)
    p = sub.add_parser("iso", help="decide isomorphism of two graphs")
    p.add_argument("file1")
    p.add_argument("file2")
    p.set_defaults(func=cmd_iso)
    p = sub.add_parser("enum", help="dump the census of small graphs")
    p.add_argument("--max-pieces", type=int, required=True)
    p.add_argument("--max-fibres", type=int, default=1, help="exceptional fibres in the whole graph")
    p.add_argument("--max-genus", type=int, default=1, help="base genus summed over the graph")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_enum)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code else OK
    try:
        code = args.func(args)
    except _Usage as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    except (_Violation, GraphError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return VIOLATION
    return OK if code is None else code


if __name__ == "__main__":
    sys.exit(main())
