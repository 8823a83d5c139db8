"""Line-oriented text format for decomposition graphs.

::

    # comment
    manifold M kind=w
    piece P seifert base=or:0 circles=t:x;d0,a:s b=0 fibres=
    piece Q ibundle base=no:1:a:s twisted=1 sites=s
    piece R simple chi0=-1 flags=ss sites=a:u,t:v
    edge E annulus P.s Q.s flip=0
    edge T torus P.x R.v m=0,1,1,0
    edge K klein R.w                    (geometric graphs only)
    was P edge E annulus A.s B.s flip=0 (merge provenance of piece P)
    was P piece A seifert ...

Provenance lines are written as ``was <path>`` where ``path`` names the
merged piece and, for nested merges, the retired parts below it separated by
``/``.
"""
from __future__ import annotations

import re
from typing import Optional

from .core import (
    ANNULUS, ANNULUS_ARC, D0, FREE, GRAPH_KINDS, KLEIN, MOBIUS, SPECIAL_SIMPLE,
    STRONGLY_SIMPLE, TORUS, TORUS_ARC, Arc, BaseSurface, DecompositionGraph, Edge,
    IBundleBlock, Merge, SeifertBlock, SimpleBlock,
)

ID = re.compile(r"[A-Za-z0-9_+\-]+$")
FIBRE = re.compile(r"\((-?\d+),(-?\d+)\)")
INT = re.compile(r"-?\d+$")


class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.message = message
        self.line = line
        self.column = column


class _Line:
    def __init__(self, text: str, number: int):
        self.number = number
        self.tokens = []  # (token, column)
        for m in re.finditer(r"\S+", text):
            self.tokens.append((m.group(), m.start() + 1))

    def fail(self, message: str, index: Optional[int] = None):
        col = 1
        if index is not None and index < len(self.tokens):
            col = self.tokens[index][1]
        elif index is not None and self.tokens:
            tok, c = self.tokens[-1]
            col = c + len(tok)
        raise ParseError(message, self.number, col)


def _ident(line: _Line, i: int, what: str) -> str:
    if i >= len(line.tokens):
        line.fail(f"missing {what}", i)
    tok = line.tokens[i][0]
    if not ID.match(tok):
        line.fail(f"bad {what} {tok!r}", i)
    return tok


def _keys(line: _Line, start: int, required, optional=()) -> dict:
    out = {}
    for i in range(start, len(line.tokens)):
        tok = line.tokens[i][0]
        if "=" not in tok:
            line.fail(f"expected key=value, got {tok!r}", i)
        k, v = tok.split("=", 1)
        if k not in required and k not in optional:
            line.fail(f"unknown key {k!r}", i)
        if k in out:
            line.fail(f"duplicate key {k!r}", i)
        out[k] = (v, i)
    for k in required:
        if k not in out:
            line.fail(f"missing key {k!r}", len(line.tokens))
    return out


def _int(line: _Line, val) -> int:
    v, i = val
    if not INT.match(v):
        line.fail(f"expected an integer, got {v!r}", i)
    return int(v)


def _bit(line: _Line, val) -> int:
    v, i = val
    if v not in ("0", "1"):
        line.fail(f"expected 0 or 1, got {v!r}", i)
    return int(v)


def _pattern(line: _Line, text: str, i: int) -> tuple:
    if text == "":
        return ()
    circles = []
    for chunk in text.split(";"):
        arcs = []
        for a in chunk.split(","):
            if a == D0:
                arcs.append(FREE)
                continue
            tag, _, site = a.partition(":")
            if tag not in (ANNULUS_ARC, TORUS_ARC) or not ID.match(site):
                line.fail(f"bad arc {a!r}", i)
            arcs.append(Arc(tag, site))
        circles.append(tuple(arcs))
    return tuple(circles)


def _orientation(line: _Line, text: str, i: int) -> bool:
    if text not in ("or", "no"):
        line.fail(f"base orientation must be 'or' or 'no', got {text!r}", i)
    return text == "or"


def _piece(line: _Line, start: int):
    """Parse ``<id> <kind> key=value...`` from token ``start`` on."""
    pid = _ident(line, start, "piece id")
    if start + 1 >= len(line.tokens):
        line.fail("missing piece kind", start + 1)
    kind = line.tokens[start + 1][0]
    if kind == "seifert":
        kv = _keys(line, start + 2, ("base", "circles", "b", "fibres"))
        base_text, bi = kv["base"]
        parts = base_text.split(":")
        if len(parts) != 2 or not INT.match(parts[1]):
            line.fail(f"bad base {base_text!r}", bi)
        orientable = _orientation(line, parts[0], bi)
        circles = _pattern(line, *kv["circles"])
        ftext, fi = kv["fibres"]
        fibres = FIBRE.findall(ftext)
        if "".join(f"({a},{b})" for a, b in fibres) != ftext:
            line.fail(f"bad fibre list {ftext!r}", fi)
        return pid, SeifertBlock(BaseSurface(orientable, int(parts[1]), circles),
                                 _int(line, kv["b"]),
                                 tuple((int(a), int(b)) for a, b in fibres))
    if kind == "ibundle":
        kv = _keys(line, start + 2, ("base", "twisted", "sites"))
        base_text, bi = kv["base"]
        parts = base_text.split(":", 2)
        if len(parts) != 3 or not INT.match(parts[1]):
            line.fail(f"bad base {base_text!r}", bi)
        orientable = _orientation(line, parts[0], bi)
        base = BaseSurface(orientable, int(parts[1]), _pattern(line, parts[2], bi))
        stext, si = kv["sites"]
        sites = stext.split(",") if stext else []
        if sites != list(base.sites()):
            line.fail("sites must list the annulus circles of the base in order", si)
        return pid, IBundleBlock(base, bool(_bit(line, kv["twisted"])))
    if kind == "simple":
        kv = _keys(line, start + 2, ("chi0", "flags", "sites"), ("label",))
        flag, fi = kv["flags"]
        if flag not in (STRONGLY_SIMPLE, SPECIAL_SIMPLE):
            line.fail(f"flags must be ss or sp, got {flag!r}", fi)
        stext, si = kv["sites"]
        sites = []
        for item in stext.split(",") if stext else []:
            tag, _, site = item.partition(":")
            if tag not in (ANNULUS_ARC, TORUS_ARC) or not ID.match(site):
                line.fail(f"bad site {item!r}", si)
            sites.append((ANNULUS if tag == ANNULUS_ARC else TORUS, site))
        label = kv["label"][0] if "label" in kv else None
        return pid, SimpleBlock(tuple(sites), _int(line, kv["chi0"]), flag, label)
    line.fail(f"unknown piece kind {kind!r}", start + 1)


def _end(line: _Line, i: int) -> tuple:
    if i >= len(line.tokens):
        line.fail("missing edge end", i)
    tok = line.tokens[i][0]
    pid, dot, site = tok.partition(".")
    if not dot or not ID.match(pid) or not ID.match(site):
        line.fail(f"bad edge end {tok!r}", i)
    return (pid, site)


def _edge(line: _Line, start: int):
    eid = _ident(line, start, "edge id")
    if start + 1 >= len(line.tokens):
        line.fail("missing edge kind", start + 1)
    kind = line.tokens[start + 1][0]
    if kind in (MOBIUS, KLEIN):
        end = _end(line, start + 2)
        _keys(line, start + 3, ())
        return eid, Edge(kind, end), [(end, start + 2)]
    if kind not in (ANNULUS, TORUS):
        line.fail(f"unknown edge kind {kind!r}", start + 1)
    a, b = _end(line, start + 2), _end(line, start + 3)
    ends = [(a, start + 2), (b, start + 3)]
    if kind == ANNULUS:
        kv = _keys(line, start + 4, ("flip",))
        return eid, Edge(ANNULUS, a, b, _bit(line, kv["flip"])), ends
    kv = _keys(line, start + 4, ("m",))
    mtext, mi = kv["m"]
    entries = mtext.split(",")
    if len(entries) != 4 or not all(INT.match(x) for x in entries):
        line.fail(f"bad gluing matrix {mtext!r}", mi)
    return eid, Edge(TORUS, a, b, matrix=tuple(int(x) for x in entries)), ends


def parse(text: str) -> DecompositionGraph:
    header = None
    pieces, edges = {}, {}
    where = {}
    refs = []
    was = {}  # path -> list of (kind, id, object, line)
    for number, raw in enumerate(text.split("\n"), start=1):
        body = raw.split("#", 1)[0]
        line = _Line(body, number)
        if not line.tokens:
            continue
        word = line.tokens[0][0]
        if header is None:
            if word != "manifold":
                line.fail("missing manifold header", 0)
            name = _ident(line, 1, "manifold name")
            kv = _keys(line, 2, ("kind",))
            kind, ki = kv["kind"]
            if kind not in GRAPH_KINDS:
                line.fail(f"unknown graph kind {kind!r}", ki)
            header = (name, kind)
            continue
        if word == "manifold":
            line.fail("second manifold header", 0)
        if word == "piece":
            pid, piece = _piece(line, 1)
            if pid in pieces:
                line.fail(f"duplicate piece id {pid!r}", 1)
            pieces[pid] = piece
            where[pid] = line
        elif word == "edge":
            eid, edge, ends = _edge(line, 1)
            if eid in edges:
                line.fail(f"duplicate edge id {eid!r}", 1)
            edges[eid] = edge
            refs += [(end, line, i) for end, i in ends]
        elif word == "was":
            if len(line.tokens) < 3:
                line.fail("incomplete provenance line", len(line.tokens))
            path = line.tokens[1][0]
            if not all(ID.match(p) for p in path.split("/")):
                line.fail(f"bad provenance path {path!r}", 1)
            what = line.tokens[2][0]
            if what == "piece":
                pid, piece = _piece(line, 3)
                was.setdefault(path, []).append(("piece", pid, piece, line))
            elif what == "edge":
                eid, edge, _ = _edge(line, 3)
                was.setdefault(path, []).append(("edge", eid, edge, line))
            else:
                line.fail(f"expected piece or edge after provenance path, got {what!r}", 2)
        else:
            line.fail(f"unknown statement {word!r}", 0)
    if header is None:
        raise ParseError("missing manifold header", 1, 1)
    for (pid, site), line, i in refs:
        if pid not in pieces:
            line.fail(f"edge refers to unknown piece {pid!r}", i)
        if site not in pieces[pid].sites():
            line.fail(f"edge refers to absent site {pid}.{site}", i)

    def attach(path, piece):
        entries = was.pop(path, None)
        if not entries:
            return piece
        if not isinstance(piece, SeifertBlock):
            entries[0][3].fail("provenance attached to a piece that is not Seifert", 1)
        edge_entries = [e for e in entries if e[0] == "edge"]
        part_entries = [e for e in entries if e[0] == "piece"]
        if len(edge_entries) != 1 or len(part_entries) not in (1, 2):
            entries[0][3].fail("provenance needs one edge and one or two pieces", 1)
        _, eid, edge, _ = edge_entries[0]
        parts = tuple((pid, attach(f"{path}/{pid}", p)) for _, pid, p, _ in part_entries)
        return SeifertBlock(piece.base, piece.b, piece.fibres, Merge(eid, edge, parts))

    pieces = {pid: attach(pid, p) for pid, p in pieces.items()}
    if was:
        path, entries = next(iter(was.items()))
        entries[0][3].fail(f"provenance path {path!r} names no merged piece", 1)
    return DecompositionGraph(pieces, edges, header[1], header[0])


def _pattern_text(circles) -> str:
    return ";".join(",".join(str(a) for a in c) for c in circles)


def piece_text(pid: str, p) -> str:
    if isinstance(p, SeifertBlock):
        base = p.base
        fibres = "".join(str(f) for f in p.fibres)
        return (f"piece {pid} seifert base={'or' if base.orientable else 'no'}:{base.genus} "
                f"circles={_pattern_text(base.circles)} b={p.b} fibres={fibres}")
    if isinstance(p, IBundleBlock):
        base = p.fiber_base
        return (f"piece {pid} ibundle base={'or' if base.orientable else 'no'}:{base.genus}:"
                f"{_pattern_text(base.circles)} twisted={int(p.twisted)} "
                f"sites={','.join(base.sites())}")
    sites = ",".join(f"{ANNULUS_ARC if k == ANNULUS else TORUS_ARC}:{s}" for k, s in p.sites_)
    label = f" label={p.label}" if p.label is not None else ""
    return f"piece {pid} simple chi0={p.chi0} flags={p.flag} sites={sites}{label}"


def edge_text(eid: str, e: Edge) -> str:
    ends = " ".join(f"{pid}.{site}" for pid, site in e.ends())
    if e.kind == ANNULUS:
        return f"edge {eid} annulus {ends} flip={e.flip}"
    if e.kind == TORUS:
        return f"edge {eid} torus {ends} m={','.join(str(x) for x in e.matrix)}"
    return f"edge {eid} {e.kind} {ends}"


def _witness_lines(path: str, p) -> list:
    if not isinstance(p, SeifertBlock) or p.witness is None:
        return []
    m = p.witness
    out = [f"was {path} {edge_text(m.edge_id, m.edge)}"]
    for pid, part in m.parts:
        out.append(f"was {path} {piece_text(pid, part)}")
        out += _witness_lines(f"{path}/{pid}", part)
    return out


def serialize(g: DecompositionGraph) -> str:
    lines = [f"manifold {g.name} kind={g.kind}"]
    for pid in sorted(g.pieces):
        lines.append(piece_text(pid, g.pieces[pid]))
        lines += _witness_lines(pid, g.pieces[pid])
    for eid in sorted(g.edges):
        lines.append(edge_text(eid, g.edges[eid]))
    return "\n".join(lines) + "\n"
