"""Domain types for decomposition graphs and base-surface arithmetic.

A decomposition graph has pieces (Seifert fibred blocks, I-bundles and opaque
simple pieces) joined by edges (annuli and tori; geometric graphs also carry
one-sided Moebius band and Klein bottle surfaces).  Every attachment point on
a piece is a *site*, identified by a string unique within that piece.

Base surfaces are stored as ``(orientable, genus, circles)`` where each
boundary circle is a cyclic tuple of arcs.  An arc is ``("d0", None)`` for a
stretch of boundary lying in the boundary of the manifold, ``("a", site)`` for
the base arc under an annulus attachment and ``("t", site)`` for a whole
circle under a torus attachment.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd
from typing import Mapping, NamedTuple, Optional, Union

D0 = "d0"
ANNULUS_ARC = "a"
TORUS_ARC = "t"

ANNULUS = "annulus"
TORUS = "torus"
MOBIUS = "mobius"
KLEIN = "klein"

KIND_W = "w"
KIND_JSJ = "jsj"
KIND_GEOMETRIC = "geometric"
GRAPH_KINDS = (KIND_W, KIND_JSJ, KIND_GEOMETRIC)

STRONGLY_SIMPLE = "ss"
SPECIAL_SIMPLE = "sp"


class GraphError(ValueError):
    """Raised when an operation needs a valid graph and did not get one."""


class GluingError(ValueError):
    pass


class Arc(NamedTuple):
    tag: str
    site: Optional[str] = None

    def __str__(self):
        return self.tag if self.site is None else f"{self.tag}:{self.site}"


FREE = Arc(D0)

Circle = tuple  # tuple[Arc, ...], read cyclically


def merge_free_arcs(circle) -> tuple:
    """Concatenate cyclically adjacent free boundary arcs."""
    arcs = list(circle)
    if not arcs:
        return ()
    if all(a.tag == D0 for a in arcs):
        return (FREE,)
    # rotate so that the circle does not start inside a run of d0 arcs
    while arcs[0].tag == D0 and arcs[-1].tag == D0:
        arcs.append(arcs.pop(0))
    out = []
    for a in arcs:
        if a.tag == D0 and out and out[-1].tag == D0:
            continue
        out.append(a)
    return tuple(out)


@dataclass(frozen=True)
class BaseSurface:
    orientable: bool
    genus: int
    circles: tuple = ()

    def __post_init__(self):
        circles = tuple(tuple(Arc(*a) for a in c) for c in self.circles)
        object.__setattr__(self, "circles", circles)

    @property
    def euler_characteristic(self) -> int:
        if self.orientable:
            return 2 - 2 * self.genus - len(self.circles)
        return 2 - self.genus - len(self.circles)

    @property
    def closed(self) -> bool:
        return not self.circles

    def sites(self) -> dict:
        """Map site id -> arc tag, in circle order."""
        out = {}
        for c in self.circles:
            for a in c:
                if a.site is not None:
                    out[a.site] = a.tag
        return out

    def locate(self, site: str) -> tuple:
        for ci, c in enumerate(self.circles):
            for ai, a in enumerate(c):
                if a.site == site:
                    return ci, ai
        raise KeyError(site)

    def renamed(self, mapping: Mapping[str, str]) -> "BaseSurface":
        circles = tuple(
            tuple(Arc(a.tag, mapping.get(a.site, a.site)) if a.site else a for a in c)
            for c in self.circles
        )
        return BaseSurface(self.orientable, self.genus, circles)

    def problems(self) -> list:
        out = []
        if self.genus < 0:
            out.append("negative genus")
        if not self.orientable and self.genus < 1:
            out.append("non-orientable surface needs at least one crosscap")
        seen = set()
        for c in self.circles:
            if not c:
                out.append("empty boundary circle")
            for a in c:
                if a.tag not in (D0, ANNULUS_ARC, TORUS_ARC):
                    out.append(f"unknown arc tag {a.tag!r}")
                if a.tag == D0 and a.site is not None:
                    out.append("free arc carries a site id")
                if a.tag != D0:
                    if not a.site:
                        out.append(f"{a.tag} arc without site id")
                    elif a.site in seen:
                        out.append(f"site {a.site} appears twice")
                    seen.add(a.site)
                if a.tag == TORUS_ARC and len(c) != 1:
                    out.append(f"torus site {a.site} does not fill its circle")
            if len(c) > 1 and merge_free_arcs(c) != c:
                out.append("adjacent free arcs not concatenated")
        return out


def surface_from_chi(orientable: bool, chi: int, circles) -> BaseSurface:
    n = len(circles)
    if orientable:
        twice = 2 - chi - n
        if twice < 0 or twice % 2:
            raise GluingError(f"no orientable surface with chi={chi}, {n} circles")
        genus = twice // 2
    else:
        genus = 2 - chi - n
        if genus < 1:
            raise GluingError(f"no non-orientable surface with chi={chi}, {n} circles")
    return BaseSurface(orientable, genus, tuple(circles))


def _cut(circle, index):
    """Arcs of ``circle`` read forward starting just after ``index``."""
    return tuple(circle[index + 1:]) + tuple(circle[:index])


def glue_base_arcs(s1: BaseSurface, site1: str, s2: Optional[BaseSurface],
                   site2: str, reversing: bool = False) -> BaseSurface:
    """Identify two annulus-end arcs of one or two base surfaces.

    ``s2=None`` glues two arcs of ``s1`` to each other.  With ``reversing``
    the identification runs the same way along both boundary circles, which
    makes a same-surface gluing one-sided.
    """
    for s, site in ((s1, site1), (s2 or s1, site2)):
        if s.sites().get(site) != ANNULUS_ARC:
            raise GluingError(f"site {site!r} is not an annulus-end arc")
    if s2 is not None:
        if set(s1.sites()) & set(s2.sites()):
            raise GluingError("site ids of the two surfaces overlap")
        c1, i1 = s1.locate(site1)
        c2, i2 = s2.locate(site2)
        rest1 = _cut(s1.circles[c1], i1)
        rest2 = _cut(s2.circles[c2], i2)
        joined = rest1 + (rest2[::-1] if reversing else rest2)
        circles = [c for k, c in enumerate(s1.circles) if k != c1]
        circles += [c for k, c in enumerate(s2.circles) if k != c2]
        circles.append(joined)
        orientable = s1.orientable and s2.orientable
        chi = s1.euler_characteristic + s2.euler_characteristic - 1
    else:
        if site1 == site2:
            raise GluingError("cannot glue an arc to itself")
        c1, i1 = s1.locate(site1)
        c2, i2 = s1.locate(site2)
        others = [c for k, c in enumerate(s1.circles) if k not in (c1, c2)]
        if c1 == c2:
            circle = s1.circles[c1]
            rest = _cut(circle, i1)
            j = rest.index(circle[i2])
            between, after = rest[:j], rest[j + 1:]
            if reversing:
                new = [between + after[::-1]]
            else:
                new = [between, after]
            orientable = s1.orientable and not reversing
        else:
            rest1 = _cut(s1.circles[c1], i1)
            rest2 = _cut(s1.circles[c2], i2)
            new = [rest1 + (rest2[::-1] if reversing else rest2)]
            orientable = s1.orientable and not reversing
        circles = others + new
        chi = s1.euler_characteristic - 1
    merged = []
    for c in circles:
        m = merge_free_arcs(c)
        if not m:
            raise GluingError("gluing leaves a boundary circle with no arcs")
        merged.append(m)
    return surface_from_chi(orientable, chi, merged)


@dataclass(frozen=True, order=True)
class ExceptionalFibre:
    alpha: int
    beta: int

    def __iter__(self):
        return iter((self.alpha, self.beta))

    def __str__(self):
        return f"({self.alpha},{self.beta})"


def _fibres(fs) -> tuple:
    return tuple(sorted(ExceptionalFibre(*f) for f in fs))


@dataclass(frozen=True)
class Merge:
    """Provenance of a merged Seifert block: the deleted annulus and its sides."""

    edge_id: str
    edge: "Edge"
    parts: tuple  # ((piece_id, piece), ...): one entry for a self-gluing


@dataclass(frozen=True)
class SeifertBlock:
    base: BaseSurface
    b: int = 0
    fibres: tuple = ()
    witness: Optional[Merge] = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "fibres", _fibres(self.fibres))

    def sites(self) -> dict:
        return {s: ANNULUS if t == ANNULUS_ARC else TORUS
                for s, t in self.base.sites().items()}


@dataclass(frozen=True)
class IBundleBlock:
    fiber_base: BaseSurface
    twisted: bool = False

    def sites(self) -> dict:
        return {s: ANNULUS for s in self.fiber_base.sites()}


@dataclass(frozen=True)
class SimpleBlock:
    sites_: tuple = ()
    chi0: int = 0
    flag: str = STRONGLY_SIMPLE
    label: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "sites_", tuple(tuple(s) for s in self.sites_))

    def sites(self) -> dict:
        return {site: kind for kind, site in self.sites_}


Piece = Union[SeifertBlock, IBundleBlock, SimpleBlock]


def piece_sites(p: Piece) -> dict:
    return p.sites()


Matrix = tuple  # (p, q, r, s) for [[p, q], [r, s]]


def det(m: Matrix) -> int:
    p, q, r, s = m
    return p * s - q * r


def matmul(m: Matrix, n: Matrix) -> Matrix:
    a, b, c, d = m
    e, f, g, h = n
    return (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)


def matinv(m: Matrix) -> Matrix:
    p, q, r, s = m
    d = det(m)
    if d not in (1, -1):
        raise ValueError("matrix is not unimodular")
    return (s * d, -q * d, -r * d, p * d)


def matvec(m: Matrix, v: tuple) -> tuple:
    p, q, r, s = m
    return (p * v[0] + q * v[1], r * v[0] + s * v[1])


IDENTITY = (1, 0, 0, 1)


def twist(k: int) -> Matrix:
    """Change of (fibre, section) coordinates when the section moves by ``k``."""
    return (1, k, 0, 1)


@dataclass(frozen=True)
class Edge:
    kind: str
    end_a: tuple
    end_b: Optional[tuple] = None
    flip: int = 0
    matrix: Optional[Matrix] = None

    def __post_init__(self):
        object.__setattr__(self, "end_a", tuple(self.end_a))
        if self.end_b is not None:
            object.__setattr__(self, "end_b", tuple(self.end_b))
        if self.matrix is not None:
            object.__setattr__(self, "matrix", tuple(self.matrix))

    def ends(self) -> tuple:
        return (self.end_a,) if self.end_b is None else (self.end_a, self.end_b)


@dataclass(frozen=True)
class DecompositionGraph:
    pieces: Mapping[str, Piece]
    edges: Mapping[str, Edge]
    kind: str = KIND_W
    name: str = "M"

    def __post_init__(self):
        object.__setattr__(self, "pieces", dict(sorted(self.pieces.items())))
        object.__setattr__(self, "edges", dict(sorted(self.edges.items())))

    def with_kind(self, kind: str) -> "DecompositionGraph":
        return DecompositionGraph(self.pieces, self.edges, kind, self.name)

    def edge_at(self) -> dict:
        """Map (piece, site) -> edge id."""
        out = {}
        for eid, e in self.edges.items():
            for end in e.ends():
                out[end] = eid
        return out

    def neighbours(self, pid: str) -> set:
        out = set()
        for e in self.edges.values():
            ends = e.ends()
            if any(end[0] == pid for end in ends):
                out.update(end[0] for end in ends)
        out.discard(pid)
        return out


def _connected(g: DecompositionGraph) -> bool:
    if not g.pieces:
        return True
    start = next(iter(g.pieces))
    seen = {start}
    todo = [start]
    while todo:
        for n in g.neighbours(todo.pop()):
            if n not in seen:
                seen.add(n)
                todo.append(n)
    return len(seen) == len(g.pieces)


def fibre_problems(fibres) -> list:
    out = []
    for f in fibres:
        if f.alpha < 2:
            out.append(f"exceptional fibre {f} has alpha < 2")
        elif gcd(f.alpha, f.beta) != 1:
            out.append(f"exceptional fibre {f} has gcd(alpha, beta) != 1")
    return out


def piece_problems(p: Piece) -> list:
    if isinstance(p, SeifertBlock):
        out = p.base.problems() + fibre_problems(p.fibres)
        if not p.base.closed and p.b != 0:
            out.append("bounded base must carry b = 0")
        return out
    if isinstance(p, IBundleBlock):
        out = p.fiber_base.problems()
        for c in p.fiber_base.circles:
            if len(c) != 1 or c[0].tag == TORUS_ARC:
                out.append("I-bundle circles must be whole d0 or annulus-end circles")
        if p.twisted == p.fiber_base.orientable:
            out.append("I-bundle twisted flag must match non-orientability of its base")
        return out
    if isinstance(p, SimpleBlock):
        out = []
        if p.flag not in (STRONGLY_SIMPLE, SPECIAL_SIMPLE):
            out.append(f"simple piece flag {p.flag!r} is not ss or sp")
        names = [s for _, s in p.sites_]
        if len(set(names)) != len(names):
            out.append("duplicate site ids")
        for kind, _ in p.sites_:
            if kind not in (ANNULUS, TORUS):
                out.append(f"simple piece site kind {kind!r}")
        if p.chi0 > 0:
            out.append("chi of the d0 part of a simple piece is positive")
        has_annulus = any(k == ANNULUS for k, _ in p.sites_)
        if has_annulus and p.chi0 == 0 and p.flag == STRONGLY_SIMPLE:
            # the annulus ends lie on d0 components, which are then annuli
            out.append("annular d0 component forces special simple")
        return out
    return [f"unknown piece type {type(p).__name__}"]


def _site_kind_problems(g: DecompositionGraph) -> list:
    out = []
    used = {}
    for eid, e in g.edges.items():
        if e.kind not in (ANNULUS, TORUS, MOBIUS, KLEIN):
            out.append(f"edge {eid}: unknown kind {e.kind!r}")
            continue
        one_sided = e.kind in (MOBIUS, KLEIN)
        if one_sided and g.kind != KIND_GEOMETRIC:
            out.append(f"edge {eid}: {e.kind} surfaces only occur in geometric graphs")
        if one_sided != (e.end_b is None):
            out.append(f"edge {eid}: wrong number of ends for {e.kind}")
        want = ANNULUS if e.kind in (ANNULUS, MOBIUS) else TORUS
        for end in e.ends():
            pid, site = end
            if pid not in g.pieces:
                out.append(f"edge {eid}: unknown piece {pid}")
                continue
            kind = g.pieces[pid].sites().get(site)
            if kind is None:
                out.append(f"edge {eid}: piece {pid} has no site {site}")
            elif kind != want:
                out.append(f"edge {eid}: site {pid}.{site} is a {kind} site")
            if end in used:
                out.append(f"site {pid}.{site} used by edges {used[end]} and {eid}")
            used[end] = eid
        if e.kind == TORUS:
            if e.matrix is None or len(e.matrix) != 4:
                out.append(f"edge {eid}: torus edge needs a 2x2 gluing matrix")
            elif det(e.matrix) not in (1, -1):
                out.append(f"edge {eid}: gluing matrix has determinant {det(e.matrix)}")
        elif e.flip not in (0, 1):
            out.append(f"edge {eid}: flip must be 0 or 1")
    for pid, p in g.pieces.items():
        for site in p.sites():
            if (pid, site) not in used:
                out.append(f"site {pid}.{site} is not attached to any edge")
    return out


def validate(g: DecompositionGraph) -> list:
    """Structural violations of a decomposition graph, sorted; empty when valid."""
    from .classify import is_torus_cross_interval
    from .normalize import detect_matched_annuli, fibration_matches, merged_shape_split

    out = []
    if g.kind not in GRAPH_KINDS:
        out.append(f"unknown graph kind {g.kind!r}")
    if not g.pieces:
        out.append("graph has no pieces")
    for pid, p in g.pieces.items():
        out += [f"piece {pid}: {msg}" for msg in piece_problems(p)]
    structural = _site_kind_problems(g)
    out += structural
    if not _connected(g):
        out.append("graph is not connected")
    if out:
        return sorted(set(out))
    single = len(g.pieces) == 1
    for pid, p in g.pieces.items():
        if isinstance(p, IBundleBlock) and not single:
            fb = p.fiber_base
            if fb.closed:
                out.append(f"piece {pid}: I-bundle over a closed surface is a whole manifold")
            elif fb.orientable and fb.genus == 0 and len(fb.circles) <= 2:
                out.append(f"piece {pid}: I-bundle over a disk or annulus is not a piece")
        if isinstance(p, SeifertBlock) and is_torus_cross_interval(p) \
                and not _self_glued_once(g):
            out.append(f"piece {pid}: T2xI only occurs as a torus bundle")
        if g.kind == KIND_W and merged_shape_split(pid, p) is not None:
            out.append(f"piece {pid}: contains a matched annulus missing from the W-system")
    for eid, e in g.edges.items():
        if e.end_b is None:
            continue
        pa, pb = g.pieces[e.end_a[0]], g.pieces[e.end_b[0]]
        if e.kind == ANNULUS and isinstance(pa, IBundleBlock) and isinstance(pb, IBundleBlock):
            out.append(f"edge {eid}: adjacent I-bundles")
        if e.kind == TORUS and not (is_torus_cross_interval(pa) or is_torus_cross_interval(pb)):
            if fibration_matches(g, eid).match:
                out.append(f"edge {eid}: fibrations match across a torus")
    if g.kind == KIND_JSJ:
        for eid in detect_matched_annuli(g):
            out.append(f"edge {eid}: matched annulus in JSJ graph")
    return sorted(set(out))


def _self_glued_once(g: DecompositionGraph) -> bool:
    return len(g.pieces) == 1 and len(g.edges) == 1 and \
        next(iter(g.edges.values())).kind == TORUS


def piece_boundary_chi(p: Piece) -> int:
    if isinstance(p, SeifertBlock):
        return 0
    if isinstance(p, IBundleBlock):
        return 2 * p.fiber_base.euler_characteristic
    return p.chi0


def boundary_euler_characteristic(g: DecompositionGraph) -> int:
    problems = validate(g)
    if problems:
        raise GraphError("invalid graph: " + "; ".join(problems))
    return sum(piece_boundary_chi(p) for p in g.pieces.values())
