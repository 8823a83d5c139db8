"""Rewriting between W-, JSJ- and geometric decompositions."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional, Sequence

from .classify import classify_block, is_torus_cross_interval
from .core import (
    ANNULUS, ANNULUS_ARC, D0, FREE, KIND_GEOMETRIC, KIND_JSJ, KIND_W, KLEIN, MOBIUS,
    TORUS, TORUS_ARC, Arc, BaseSurface, DecompositionGraph, Edge, GraphError,
    IBundleBlock, Merge, SeifertBlock, SimpleBlock, boundary_euler_characteristic,
    glue_base_arcs, matinv, matmul, matvec, validate,
)
from .seifert import alternate_fibrations

MATCH_REASONS = (
    "annulus-core-fibres-both-sides",
    "torus-fibre-slope-preserved",
    "no-fibration-one-side",
    "slopes-differ",
    "i-bundle-side",
)


class MatchReport(NamedTuple):
    edge_id: str
    match: bool
    reason: str


def _seifert_view(p):
    """The piece as a Seifert block, using its alternate fibration if needed."""
    if isinstance(p, SeifertBlock):
        return p
    for alt in alternate_fibrations(p):
        if isinstance(alt.piece, SeifertBlock):
            return alt.piece
    return None


def _fibre_slopes(p) -> list:
    if not isinstance(p, SeifertBlock):
        return []
    slopes = [(1, 0)]
    for alt in alternate_fibrations(p):
        if isinstance(alt.piece, SeifertBlock) and alt.framing is not None:
            slopes.append(matvec(matinv(alt.framing), (1, 0)))
    return slopes


def fibration_matches(g: DecompositionGraph, eid: str) -> MatchReport:
    if eid not in g.edges:
        raise KeyError(f"unknown edge {eid!r}")
    e = g.edges[eid]
    if e.end_b is None:
        return MatchReport(eid, False, "no-fibration-one-side")
    pa, pb = g.pieces[e.end_a[0]], g.pieces[e.end_b[0]]
    if e.kind == ANNULUS:
        views = [_seifert_view(pa), _seifert_view(pb)]
        if all(v is not None for v in views):
            return MatchReport(eid, True, "annulus-core-fibres-both-sides")
        if any(isinstance(p, IBundleBlock) and v is None for p, v in zip((pa, pb), views)):
            return MatchReport(eid, False, "i-bundle-side")
        return MatchReport(eid, False, "no-fibration-one-side")
    slopes_a, slopes_b = _fibre_slopes(pa), _fibre_slopes(pb)
    if not slopes_a or not slopes_b:
        return MatchReport(eid, False, "no-fibration-one-side")
    for va in slopes_a:
        image = matvec(e.matrix, va)
        for vb in slopes_b:
            if image == vb or image == (-vb[0], -vb[1]):
                return MatchReport(eid, True, "torus-fibre-slope-preserved")
    return MatchReport(eid, False, "slopes-differ")


def detect_matched_annuli(g: DecompositionGraph) -> list:
    return [eid for eid, e in g.edges.items()
            if e.kind == ANNULUS and fibration_matches(g, eid).match]


def _annulus_pattern_type(p):
    view = _seifert_view(p)
    t = classify_block(view) if view is not None else None
    return t.index if t is not None and t.kind == "fig8" else None


def matched_annulus_warnings(g: DecompositionGraph) -> list:
    """Matched annuli whose neighbourhood is not one of the admissible shapes."""
    out = []
    for eid in detect_matched_annuli(g):
        e = g.edges[eid]
        ka, kb = _annulus_pattern_type(g.pieces[e.end_a[0]]), _annulus_pattern_type(g.pieces[e.end_b[0]])
        if e.end_a[0] == e.end_b[0]:
            if ka != 1:
                out.append(f"edge {eid}: self-matched piece is not Fig8(1)")
        elif ka not in (2, 4) or kb not in (2, 4):
            out.append(f"edge {eid}: matched pieces are not of type 2 or 4 "
                       f"(got {ka}, {kb})")
    return out


def _unique(name: str, taken) -> str:
    while name in taken:
        name += "_"
    return name


def site_renaming(a_sites, b_sites, b_id: str) -> dict:
    """Renaming applied to the second block's sites when two blocks merge."""
    taken = set(a_sites) | set(b_sites)
    out = {}
    for s in b_sites:
        if s in a_sites:
            new = _unique(f"{b_id}_{s}", taken)
            taken.add(new)
            out[s] = new
    return out


def merged_id(pa: str, pb: str) -> str:
    return "+".join(sorted((pa, pb)))


_MIRROR = (1, 0, 0, -1)


def mirror_block(p: SeifertBlock) -> SeifertBlock:
    """The same block described with the opposite base orientation."""
    circles = tuple(tuple(c[::-1]) for c in p.base.circles)
    base = BaseSurface(p.base.orientable, p.base.genus, circles)
    return SeifertBlock(base, -p.b, tuple((a, -b) for a, b in p.fibres))


def mirror_ends(edges: dict, pid: str) -> dict:
    """Rewrite the edges at ``pid`` after its base orientation is reversed."""
    out = {}
    for k, v in edges.items():
        at = [end is not None and end[0] == pid for end in (v.end_a, v.end_b)]
        if v.kind == ANNULUS and sum(at) == 1:
            v = Edge(v.kind, v.end_a, v.end_b, 1 - v.flip, v.matrix)
        elif v.kind == TORUS and any(at):
            m = v.matrix
            if at[0]:
                m = matmul(m, _MIRROR)
            if at[1]:
                m = matmul(_MIRROR, m)
            v = Edge(v.kind, v.end_a, v.end_b, v.flip, m)
        out[k] = v
    return out


def merge_annulus(g: DecompositionGraph, eid: str) -> DecompositionGraph:
    """Delete one matched annulus and fuse the blocks on its two sides."""
    e = g.edges[eid]
    (pa, sa), (pb, sb) = e.end_a, e.end_b
    A = _seifert_view(g.pieces[pa])
    B = _seifert_view(g.pieces[pb])
    if A is None or B is None:
        raise GraphError(f"edge {eid} is not a matched annulus")
    pieces = dict(g.pieces)
    edges = {k: v for k, v in g.edges.items() if k != eid}
    if pa == pb:
        base = glue_base_arcs(A.base, sa, None, sb, bool(e.flip))
        witness = Merge(eid, e, ((pa, g.pieces[pa]),))
        pieces[pa] = SeifertBlock(base, 0, A.fibres, witness)
        return DecompositionGraph(pieces, edges, g.kind, g.name)
    if e.flip:
        # glue orientation-consistently after reversing the second base
        B = mirror_block(B)
        edges = mirror_ends(edges, pb)
    rename = site_renaming(A.base.sites(), B.base.sites(), pb)
    base = glue_base_arcs(A.base, sa, B.base.renamed(rename), rename.get(sb, sb))
    new_id = merged_id(pa, pb)
    if new_id in pieces:
        raise GraphError(f"merged piece id {new_id!r} already in use")
    witness = Merge(eid, e, ((pa, g.pieces[pa]), (pb, g.pieces[pb])))
    del pieces[pa], pieces[pb]
    pieces[new_id] = SeifertBlock(base, 0, A.fibres + B.fibres, witness)

    def repoint(end):
        if end is None:
            return None
        if end[0] == pa:
            return (new_id, end[1])
        if end[0] == pb:
            return (new_id, rename.get(end[1], end[1]))
        return end

    edges = {k: Edge(v.kind, repoint(v.end_a), repoint(v.end_b), v.flip, v.matrix)
             for k, v in edges.items()}
    return DecompositionGraph(pieces, edges, g.kind, g.name)


def _require(g: DecompositionGraph, kind: str):
    if g.kind != kind:
        raise GraphError(f"expected a {kind} graph, got {g.kind}")
    problems = validate(g)
    if problems:
        raise GraphError("invalid graph: " + "; ".join(problems))


def w_to_jsj(g: DecompositionGraph, order: Optional[Sequence[str]] = None,
             check: bool = True) -> DecompositionGraph:
    """Delete every matched annulus.  ``order`` fixes the deletion order."""
    if check:
        _require(g, KIND_W)
    todo = list(order) if order is not None else detect_matched_annuli(g)
    if sorted(todo) != sorted(detect_matched_annuli(g)):
        raise ValueError("deletion order must list exactly the matched annuli")
    for eid in todo:
        g = merge_annulus(g, eid)
    return g.with_kind(KIND_JSJ)


def split_merge(g: DecompositionGraph, pid: str) -> DecompositionGraph:
    """Undo the most recent merge recorded on a piece."""
    p = g.pieces[pid]
    m: Merge = p.witness
    pieces = dict(g.pieces)
    edges = dict(g.edges)
    if len(m.parts) == 1:
        (orig_id, orig), = m.parts
        pieces[orig_id] = orig
        edges[m.edge_id] = m.edge
        return DecompositionGraph(pieces, edges, g.kind, g.name)
    (pa, A), (pb, B) = m.parts
    rename = site_renaming(_seifert_view(A).base.sites(), _seifert_view(B).base.sites(), pb)
    back = {v: k for k, v in rename.items()}
    a_sites = set(A.sites())
    del pieces[pid]
    pieces[pa], pieces[pb] = A, B

    def repoint(end):
        if end is None or end[0] != pid:
            return end
        if end[1] in a_sites and end[1] not in back:
            return (pa, end[1])
        return (pb, back.get(end[1], end[1]))

    edges = {k: Edge(v.kind, repoint(v.end_a), repoint(v.end_b), v.flip, v.matrix)
             for k, v in edges.items()}
    if m.edge.flip:
        edges = mirror_ends(edges, pb)
    edges[m.edge_id] = m.edge
    return DecompositionGraph(pieces, edges, g.kind, g.name)


def _tags(c) -> list:
    return [a.tag for a in c]


def merged_shape_split(pid: str, p: SeifertBlock, taken_ids=()) -> Optional[tuple]:
    """Recognise a block that is two admissible blocks fused along an annulus.

    Returns ``(pieces, edge_id, edge)`` describing the split, or None.
    """
    if not isinstance(p, SeifertBlock) or p.witness is not None:
        return None
    base = p.base
    circles = base.circles
    free = [c for c in circles if _tags(c) == [D0]]
    tori = [c for c in circles if _tags(c) == [TORUS_ARC]]
    used = set(base.sites())
    m1 = _unique("m1", used)
    m2 = _unique("m2", used | {m1})
    taken = set(taken_ids)
    id1 = _unique(f"{pid}_1", taken)
    id2 = _unique(f"{pid}_2", taken | {id1})
    eid = f"{pid}_m"
    outer1 = (FREE, Arc(ANNULUS_ARC, m1))
    outer2 = (FREE, Arc(ANNULUS_ARC, m2))
    fibres = list(p.fibres)
    if base.orientable and base.genus == 0 and len(free) == 1 \
            and len(free) + len(tori) == len(circles):
        if len(tori) == 2 and not fibres:
            halves = [((tori[0], outer1), ()), ((tori[1], outer2), ())]
        elif len(tori) == 1 and len(fibres) == 1:
            halves = [((tori[0], outer1), ()), ((outer2,), tuple(fibres))]
        elif not tori and len(fibres) == 2:
            halves = [((outer1,), (fibres[0],)), ((outer2,), (fibres[1],))]
        else:
            return None
        new = {id1: SeifertBlock(BaseSurface(True, 0, halves[0][0]), 0, halves[0][1]),
               id2: SeifertBlock(BaseSurface(True, 0, halves[1][0]), 0, halves[1][1])}
        return new, eid, Edge(ANNULUS, (id1, m1), (id2, m2), 0)
    if fibres or len(circles) > 2:
        return None
    partial = [c for c in circles if len(c) == 2 and set(_tags(c)) == {D0, ANNULUS_ARC}]
    if len(partial) != 1:
        return None
    kept = next(a for a in partial[0] if a.tag == ANNULUS_ARC)
    hexagon = BaseSurface(True, 0, ((Arc(ANNULUS_ARC, m1), FREE, Arc(ANNULUS_ARC, m2),
                                     FREE, kept, FREE),))
    if base.orientable and base.genus == 0 and len(free) == 1:
        flip = 0
    elif not base.orientable and base.genus == 1 and len(circles) == 1:
        flip = 1
    else:
        return None
    return {pid: SeifertBlock(hexagon)}, eid, Edge(ANNULUS, (pid, m1), (pid, m2), flip)


def jsj_to_w(g: DecompositionGraph, check: bool = True) -> DecompositionGraph:
    if check:
        _require(g, KIND_JSJ)
    changed = True
    while changed:
        changed = False
        for pid, p in list(g.pieces.items()):
            if isinstance(p, SeifertBlock) and p.witness is not None:
                g = split_merge(g, pid)
                changed = True
                break
    for pid, p in list(g.pieces.items()):
        split = merged_shape_split(pid, p, set(g.pieces))
        if split is None:
            continue
        new, eid, edge = split
        pieces = {k: v for k, v in g.pieces.items() if k != pid}
        pieces.update(new)
        edges = dict(g.edges)
        if eid in edges:
            raise GraphError(f"edge id {eid!r} already in use")
        edges[eid] = edge
        if pid not in new:
            # the outer circles went to the two halves; sites keep their names
            ids = list(new)

            def owner(site):
                return next(i for i in ids if site in new[i].sites())

            edges = {k: Edge(v.kind, *[None if end is None else
                                       ((owner(end[1]), end[1]) if end[0] == pid else end)
                                       for end in (v.end_a, v.end_b)], v.flip, v.matrix)
                     for k, v in edges.items()}
        g = DecompositionGraph(pieces, edges, g.kind, g.name)
    return g.with_kind(KIND_W)


FIBRED = "sigma"
COMPLEMENT = "complement"


@dataclass(frozen=True)
class CharacteristicAnnotation:
    pieces: dict  # piece id -> label
    thickenings: dict  # edge id -> (product name, label)


def _is_fibred(p) -> bool:
    return isinstance(p, (SeifertBlock, IBundleBlock))


def characteristic_submanifold(g: DecompositionGraph) -> CharacteristicAnnotation:
    _require(g, KIND_JSJ)
    labels = {pid: FIBRED if _is_fibred(p) else COMPLEMENT for pid, p in g.pieces.items()}
    thick = {}
    for eid, e in g.edges.items():
        if e.end_b is None:
            continue
        product = "T2xI" if e.kind == TORUS else "AxI"
        fa, fb = (labels[e.end_a[0]] == FIBRED), (labels[e.end_b[0]] == FIBRED)
        if fa and fb:
            thick[eid] = (product, COMPLEMENT)
        elif not fa and not fb:
            thick[eid] = (product, FIBRED)
    return CharacteristicAnnotation(labels, thick)


def _mobius_kind(p) -> Optional[str]:
    """Which one-sided surface replaces a piece fibred over the Moebius band."""
    candidates = [p] + [a.piece for a in alternate_fibrations(p)]
    for c in candidates:
        if isinstance(c, IBundleBlock) and classify_block(c).detail == "mobius":
            return MOBIUS
        if (isinstance(c, SeifertBlock) and not c.base.orientable and c.base.genus == 1
                and len(c.base.circles) == 1 and not c.fibres
                and _tags(c.base.circles[0]) == [TORUS_ARC]):
            return KLEIN
    return None


def geometric_decomposition(g: DecompositionGraph) -> DecompositionGraph:
    _require(g, KIND_JSJ)
    pieces = dict(g.pieces)
    edges = dict(g.edges)
    at = g.edge_at()
    for pid, p in g.pieces.items():
        kind = _mobius_kind(p)
        sites = list(p.sites())
        if kind is None or len(sites) != 1 or pid not in pieces:
            continue
        eid = at[(pid, sites[0])]
        e = edges[eid]
        if e.end_b is None:
            continue
        other = e.end_b if e.end_a[0] == pid else e.end_a
        if other[0] == pid or other[0] not in pieces or len(pieces) == 1:
            continue
        del pieces[pid]
        edges[eid] = Edge(kind, other)
    return DecompositionGraph(pieces, edges, KIND_GEOMETRIC, g.name)


def check_toral(g: DecompositionGraph) -> bool:
    _require(g, KIND_JSJ)
    if boundary_euler_characteristic(g) != 0:
        return True
    return not any(e.kind == ANNULUS for e in g.edges.values())


@dataclass(frozen=True)
class VirtualSurface:
    """A surface inside one piece that is not part of the edge set.

    ``kind`` is ``vertical-annulus`` (an interior vertical annulus of a
    Seifert piece) or ``companion-torus`` (the torus made from the annulus at
    ``site`` and the d0 annulus next to it, pushed into the piece).
    """

    kind: str
    piece: str
    site: Optional[str] = None


CANONICAL = "canonical"
ANNULUS_CANONICAL_ONLY = "annulus-canonical-not-canonical"
TORUS_CANONICAL_EXTRA = "torus-canonical-extra"
NOT_CANONICAL = "not-canonical"


def classify_surface(g: DecompositionGraph, target) -> str:
    if isinstance(target, str):
        if target not in g.edges:
            raise KeyError(f"unknown edge {target!r}")
        return CANONICAL if g.edges[target].end_b is not None else NOT_CANONICAL
    if not isinstance(target, VirtualSurface) or target.piece not in g.pieces:
        raise KeyError(f"unknown surface descriptor {target!r}")
    p = g.pieces[target.piece]
    if not isinstance(p, SeifertBlock):
        return NOT_CANONICAL
    base = p.base
    if target.kind == "vertical-annulus":
        if (not base.orientable and base.genus == 1 and len(base.circles) == 1
                and ANNULUS_ARC in _tags(base.circles[0])):
            return ANNULUS_CANONICAL_ONLY
        return NOT_CANONICAL
    if target.kind == "companion-torus":
        if base.sites().get(target.site) != ANNULUS_ARC:
            return NOT_CANONICAL
        ci, _ = base.locate(target.site)
        if sorted(_tags(base.circles[ci])) != [ANNULUS_ARC, D0]:
            return NOT_CANONICAL
        rest = [c for k, c in enumerate(base.circles) if k != ci]
        if base.orientable and base.genus == 0:
            if not rest and len(p.fibres) <= 1:
                return NOT_CANONICAL  # bounds a solid torus
            if not p.fibres and len(rest) == 1 and _tags(rest[0]) == [TORUS_ARC]:
                return CANONICAL  # parallel to the torus site
        return TORUS_CANONICAL_EXTRA
    raise KeyError(f"unknown surface kind {target.kind!r}")
