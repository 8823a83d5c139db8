"""Taxonomy of pieces: the eight fibred building blocks and their relatives."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import sympy

from .core import (
    ANNULUS, ANNULUS_ARC, D0, SPECIAL_SIMPLE, TORUS, TORUS_ARC,
    DecompositionGraph, IBundleBlock, Matrix, SeifertBlock, SimpleBlock, det, matmul,
)
from .seifert import SeifertData, alternate_fibrations, euler_number, normalize_invariants


@dataclass(frozen=True)
class BlockType:
    kind: str  # fig8 | toral | ibundle | strongly-simple | special-simple | unrecognized
    index: Optional[int] = None
    detail: Optional[str] = None

    def __str__(self):
        if self.kind == "fig8":
            return f"Fig8({self.index})"
        if self.kind == "toral":
            return f"Toral({self.index},{self.detail})"
        if self.kind == "ibundle":
            return f"IBundle({self.detail})"
        return self.kind


@dataclass(frozen=True)
class BlockSchema:
    """Shape of a building block: base topology, boundary circles, fibre count.

    Circles are tuples of tags; the annulus-site arcs of a circle are listed
    in cyclic order.  ``fibres`` is the allowed range of exceptional fibres.
    """

    index: int
    orientable: bool
    genus: int
    circles: tuple
    fibres: tuple  # (min, max)


# The block shapes.  Each entry is data only; nothing below depends on which
# index carries which shape.
FIG8_SCHEMAS = {
    1: BlockSchema(1, True, 0, ((D0, ANNULUS_ARC, D0, ANNULUS_ARC, D0, ANNULUS_ARC),), (0, 0)),
    2: BlockSchema(2, True, 0, ((TORUS_ARC,), (D0, ANNULUS_ARC)), (0, 0)),
    3: BlockSchema(3, True, 0, ((TORUS_ARC,), (TORUS_ARC,), (TORUS_ARC,)), (0, 0)),
    4: BlockSchema(4, True, 0, ((D0, ANNULUS_ARC),), (1, 1)),
    5: BlockSchema(5, True, 0, ((TORUS_ARC,),), (2, 2)),
    6: BlockSchema(6, True, 0, ((TORUS_ARC,), (TORUS_ARC,)), (1, 1)),
    7: BlockSchema(7, False, 1, ((TORUS_ARC,), (TORUS_ARC,)), (0, 0)),
    8: BlockSchema(8, False, 1, ((TORUS_ARC,),), (0, 1)),
}

# blocks whose boundary is all tori, retagged with some circles in d0
TORAL_SOURCES = (3, 5, 6, 7, 8)
TORAL_TYPES = tuple(
    (k, j) for k in TORAL_SOURCES for j in range(len(FIG8_SCHEMAS[k].circles))
)

_SMALL_SHAPES = {
    (True, 0, 3): "twice-punctured-disk",
    (False, 1, 1): "mobius",
    (False, 1, 2): "punctured-mobius",
}


def _circle_tags(c) -> tuple:
    tags = [a if isinstance(a, str) else a.tag for a in c]
    n = len(tags)
    return min(tuple(seq[i:] + seq[:i]) for seq in (tags, tags[::-1]) for i in range(n))


def _shape(base) -> tuple:
    return (base.orientable, base.genus, tuple(sorted(_circle_tags(c) for c in base.circles)))


def _schema_shape(s: BlockSchema) -> tuple:
    return (s.orientable, s.genus, tuple(sorted(_circle_tags(c) for c in s.circles)))


def ibundle_kind(p: IBundleBlock) -> str:
    fb = p.fiber_base
    return _SMALL_SHAPES.get((fb.orientable, fb.genus, len(fb.circles)), "other")


def classify_block(p) -> BlockType:
    if isinstance(p, IBundleBlock):
        return BlockType("ibundle", detail=ibundle_kind(p))
    if isinstance(p, SimpleBlock):
        return BlockType("special-simple" if p.flag == SPECIAL_SIMPLE else "strongly-simple")
    if not isinstance(p, SeifertBlock):
        return BlockType("unrecognized")
    shape = _shape(p.base)
    nfib = len(normalize_invariants(SeifertData.of(p)).fibres)
    for k, s in FIG8_SCHEMAS.items():
        if shape == _schema_shape(s) and s.fibres[0] <= nfib <= s.fibres[1]:
            return BlockType("fig8", k)
    tags = [_circle_tags(c) for c in p.base.circles]
    n_free = sum(t == (D0,) for t in tags)
    if all(t in ((D0,), (TORUS_ARC,)) for t in tags) and 0 < n_free < len(tags):
        retagged = (shape[0], shape[1], tuple(sorted((TORUS_ARC,) for _ in tags)))
        for k in TORAL_SOURCES:
            s = FIG8_SCHEMAS[k]
            if retagged == _schema_shape(s) and s.fibres[0] <= nfib <= s.fibres[1]:
                return BlockType("toral", k, str(n_free))
    return BlockType("unrecognized")


def piece_types(p) -> frozenset:
    if isinstance(p, IBundleBlock):
        kind = ibundle_kind(p)
        if kind == "mobius":
            return frozenset({"i-bundle", "seifert"})
        if kind in ("twice-punctured-disk", "punctured-mobius"):
            return frozenset({"i-bundle", "strongly-simple"})
        return frozenset({"i-bundle"})
    if isinstance(p, SeifertBlock):
        if any(isinstance(a.piece, IBundleBlock) for a in alternate_fibrations(p)):
            return frozenset({"seifert", "i-bundle"})
        return frozenset({"seifert"})
    if p.flag == SPECIAL_SIMPLE:
        return frozenset({"seifert"})
    return frozenset({"strongly-simple"})


def _has_annular_d0(p) -> bool:
    if isinstance(p, SeifertBlock):
        return any(len(c) > 1 and any(a.tag == D0 for a in c) for c in p.base.circles)
    if isinstance(p, IBundleBlock):
        return any(c[0].tag == D0 for c in p.fiber_base.circles)
    return False


def is_special_simple(p) -> bool:
    if not p.sites():
        raise ValueError("special simplicity needs a non-empty d1 boundary")
    if isinstance(p, SimpleBlock):
        return p.flag == SPECIAL_SIMPLE
    if isinstance(p, SeifertBlock):
        return True
    if _has_annular_d0(p):
        return True
    return any(isinstance(a.piece, SeifertBlock) for a in alternate_fibrations(p))


EXCEPTIONAL_TAGS = (
    "I-bundle-over-torus",
    "I-bundle-over-Klein-bottle",
    "circle-bundle-over-torus",
    "circle-bundle-over-Klein-bottle",
    "circle-bundle-over-annulus",
    "circle-bundle-over-mobius",
    "torus-bundle-trace-pm2",
    "RP2-double-fibration",
    "tangent-circle-bundle-Klein-bottle",
)
NO_TAG = "none"


def is_torus_cross_interval(p) -> bool:
    return (isinstance(p, SeifertBlock) and p.base.orientable and p.base.genus == 0
            and not p.fibres and len(p.base.circles) == 2
            and all(len(c) == 1 and c[0].tag == TORUS_ARC for c in p.base.circles))


# Boundary sections carry the boundary orientation of the base, so the two
# ends of T^2 x I see the section with opposite signs.
_END_SWAP: Matrix = (1, 0, 0, -1)


def monodromy(m: Matrix) -> Matrix:
    """Monodromy of the torus bundle obtained by gluing the ends of T^2 x I by m."""
    return matmul(m, _END_SWAP)


def torus_bundle_classify(h: Matrix) -> str:
    if abs(det(h)) != 1:
        raise ValueError("holonomy must be unimodular")
    return "circle-bundle" if h[0] + h[3] in (2, -2) else "canonical-torus"


def recognize_exceptional(g: DecompositionGraph) -> str:
    if len(g.pieces) != 1:
        return NO_TAG
    (p,) = g.pieces.values()
    edges = list(g.edges.values())
    if isinstance(p, IBundleBlock) and not edges and p.fiber_base.closed:
        fb = p.fiber_base
        if fb.orientable and fb.genus == 1:
            return "I-bundle-over-torus"
        if not fb.orientable and fb.genus == 2:
            return "I-bundle-over-Klein-bottle"
        return NO_TAG
    if not isinstance(p, SeifertBlock):
        return NO_TAG
    if is_torus_cross_interval(p) and len(edges) == 1 and edges[0].kind == TORUS:
        if torus_bundle_classify(monodromy(edges[0].matrix)) == "circle-bundle":
            return "torus-bundle-trace-pm2"
        return NO_TAG
    if edges:
        return NO_TAG
    base = p.base
    tags = [tuple(a.tag for a in c) for c in base.circles]
    if not p.fibres:
        if not base.circles:
            if base.orientable and base.genus == 1:
                return "circle-bundle-over-torus"
            if not base.orientable and base.genus == 2:
                return "circle-bundle-over-Klein-bottle"
        elif all(t == (D0,) for t in tags):
            if base.orientable and base.genus == 0 and len(tags) == 2:
                return "circle-bundle-over-annulus"
            if not base.orientable and base.genus == 1 and len(tags) == 1:
                return "circle-bundle-over-mobius"
        return NO_TAG
    if not base.closed:
        return NO_TAG
    d = SeifertData.of(p)
    norm = normalize_invariants(d)
    alphas = [f.alpha for f in norm.fibres]
    if euler_number(d) != 0:
        return NO_TAG
    if not base.orientable and base.genus == 1 and alphas == [2, 2]:
        return "RP2-double-fibration"
    if base.orientable and base.genus == 0 and alphas == [2, 2, 2, 2]:
        return "tangent-circle-bundle-Klein-bottle"
    return NO_TAG


def h1_presentation(d: SeifertData) -> list:
    """Relation matrix of H_1 for a closed fibration over S^2 or RP^2.

    Columns: one per exceptional fibre, then (crosscap for RP^2), then the
    regular fibre h.
    """
    base = d.base
    n = len(d.fibres)
    cross = 0 if base.orientable else 1
    width = n + cross + 1
    rows = []
    for i, f in enumerate(d.fibres):
        row = [0] * width
        row[i] = f.alpha
        row[-1] = f.beta
        rows.append(row)
    last = [1] * n + [2] * cross + [-d.b]
    rows.append(last)
    if cross:
        row = [0] * width
        row[-1] = 2
        rows.append(row)
    return rows


def h1_order(d: SeifertData) -> int:
    """|H_1| for a closed fibration over S^2 or RP^2; 0 when H_1 is infinite."""
    return abs(int(sympy.Matrix(h1_presentation(d)).det()))


def closed_simple_seifert(d: SeifertData) -> bool:
    base = d.base
    if not base.closed:
        raise ValueError("closed base required")
    if base.orientable and base.genus == 0:
        limit = 3
    elif not base.orientable and base.genus == 1:
        limit = 1
    else:
        return False
    d = normalize_invariants(d) if base.orientable else d
    if len(d.fibres) > limit:
        return False
    return h1_order(d) != 0
