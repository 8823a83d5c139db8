"""Canonical encodings and isomorphism of decorated decomposition graphs.

The encoding is the text serialization of a relabelled copy of the graph,
minimized over

* piece, edge and site relabelings (site relabelings restricted to the
  symmetries of each piece: circle permutations and per-circle
  rotation/reflection for fibred bases, any permutation within a kind for
  I-bundle and simple pieces),
* Seifert normal forms, the shift being pushed into the boundary framing,
* the preferred fibration of the two-fibration blocks,
* reversing fibre and section together on a Seifert piece, and any sign at
  a torus end of a simple piece,
* describing a piece with the opposite base orientation (negated
  invariants, toggled annulus flips, section negated at torus ends),
* section twists at torus ends, subject to the sum rule of
  :func:`seifert.section_twist_modulus`; simple ends twist freely.

Section twists form an affine lattice for every fixed labeling and choice of
signs; its canonical representative is found exactly by lattice reduction
(:func:`_normalize_twists`), so no search over twists is needed.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

from .core import (
    ANNULUS_ARC, D0, FREE, TORUS, Arc, BaseSurface, DecompositionGraph, Edge,
    GraphError, IBundleBlock, SeifertBlock, SimpleBlock, matinv, matmul, twist, validate,
)
from .seifert import (
    EXACT, FREE_TWIST, MOD2, SeifertData, alternate_fibrations, normalize_with_shift,
    section_twist_modulus,
)
from .normalize import mirror_block, mirror_ends
from .textformat import serialize


@dataclass(frozen=True)
class CanonicalEncoding:
    data: bytes
    graph: Optional[DecompositionGraph] = field(default=None, compare=False, repr=False)

    def hex(self) -> str:
        return self.data.hex()

    def __bytes__(self):
        return self.data


# --- two-fibration blocks -------------------------------------------------

def _preferred_alternative(p):
    for alt in alternate_fibrations(p):
        q = alt.piece
        if isinstance(p, IBundleBlock) and isinstance(q, SeifertBlock):
            return alt
        if isinstance(p, SeifertBlock) and p.base.orientable and isinstance(q, SeifertBlock):
            return alt
    return None


def apply_framing(edges: dict, pid: str, site: str, f) -> dict:
    """New coordinates ``f @ old`` at one torus end: rewrite its edge matrix."""
    out = dict(edges)
    for eid, e in edges.items():
        if e.kind != TORUS:
            continue
        m = e.matrix
        if e.end_a == (pid, site):
            m = matmul(m, matinv(f))
        if e.end_b == (pid, site):
            m = matmul(f, m)
        if m != e.matrix:
            out[eid] = Edge(e.kind, e.end_a, e.end_b, e.flip, m)
    return out


def collapse_alternates(g: DecompositionGraph) -> DecompositionGraph:
    """Replace each two-fibration block by its preferred Seifert form."""
    pieces, edges = dict(g.pieces), dict(g.edges)
    for pid, p in g.pieces.items():
        alt = _preferred_alternative(p)
        if alt is None:
            continue
        pieces[pid] = alt.piece
        if alt.framing is not None:
            (site,) = alt.piece.sites()
            edges = apply_framing(edges, pid, site, alt.framing)
    return DecompositionGraph(pieces, edges, g.kind, g.name)


# --- piece descriptors and symmetric readings -----------------------------

def _circle_readings(c) -> tuple:
    """Minimal tag sequence of a circle and the arc sequences realizing it."""
    n = len(c)
    variants = []
    for seq in (list(c), list(c)[::-1]):
        variants += [tuple(seq[i:] + seq[:i]) for i in range(n)]
    key = min(tuple(a.tag for a in v) for v in variants)
    best = sorted({v for v in variants if tuple(a.tag for a in v) == key})
    return key, best


class _Piece:
    """A piece in normal form together with its site-numbering choices."""

    def __init__(self, p):
        self.piece = p
        self.shift = 0
        self.modulus = FREE_TWIST
        if isinstance(p, SeifertBlock):
            norm, self.shift = normalize_with_shift(SeifertData.of(p))
            self.modulus = section_twist_modulus(p) if not p.base.closed else FREE_TWIST
            per_circle = [_circle_readings(c) for c in p.base.circles]
            keys = sorted(k for k, _ in per_circle)
            self.descriptor = ("seifert", p.base.orientable, p.base.genus, norm.b,
                               tuple(tuple(f) for f in norm.fibres), tuple(keys))
            self.norm = norm
            groups = {}
            for k, options in per_circle:
                groups.setdefault(k, []).append(options)
            choices = []
            for k in sorted(groups):
                members = groups[k]
                per_order = []
                for order in itertools.permutations(range(len(members))):
                    per_order += list(itertools.product(*[members[i] for i in order]))
                choices.append(per_order)
            self.readings = []
            for combo in itertools.product(*choices):
                circles = tuple(c for part in combo for c in part)
                self.readings.append(circles)
            self.readings = sorted(set(self.readings))
            self.orders = [[a.site for c in r for a in c if a.site is not None]
                           for r in self.readings]
        elif isinstance(p, IBundleBlock):
            fb = p.fiber_base
            sites = list(fb.sites())
            n_free = len(fb.circles) - len(sites)
            self.descriptor = ("ibundle", fb.orientable, fb.genus, int(p.twisted),
                               len(sites), n_free)
            self.orders = [list(o) for o in itertools.permutations(sites)]
        else:
            ann = [s for k, s in p.sites_ if k != TORUS]
            tor = [s for k, s in p.sites_ if k == TORUS]
            self.descriptor = ("simple", p.chi0, p.flag, p.label or "", len(ann), len(tor))
            self.orders = [list(a) + list(t) for a in itertools.permutations(ann)
                           for t in itertools.permutations(tor)]

    def rebuilt(self, reading: int, name) -> object:
        """The piece in normal form with sites renamed by ``name``."""
        p = self.piece
        order = self.orders[reading]
        if isinstance(p, SeifertBlock):
            circles = tuple(tuple(Arc(a.tag, name(order.index(a.site))) if a.site else FREE
                                  for a in c) for c in self.readings[reading])
            return SeifertBlock(BaseSurface(p.base.orientable, p.base.genus, circles),
                                self.norm.b, tuple(self.norm.fibres))
        if isinstance(p, IBundleBlock):
            fb = p.fiber_base
            n_free = len(fb.circles) - len(order)
            circles = tuple((Arc(ANNULUS_ARC, name(j)),) for j in range(len(order)))
            circles += ((FREE,),) * n_free
            return IBundleBlock(BaseSurface(fb.orientable, fb.genus, circles), p.twisted)
        kinds = p.sites()
        return SimpleBlock(tuple((kinds[s], name(j)) for j, s in enumerate(order)),
                           p.chi0, p.flag, p.label)


# --- section-twist lattice -------------------------------------------------

def _split(values, basis):
    """Unimodular change of basis so that at most one value is nonzero."""
    vals = list(values)
    vecs = [list(v) for v in basis]
    while True:
        nz = [i for i, v in enumerate(vals) if v]
        if len(nz) <= 1:
            break
        i = min(nz, key=lambda j: abs(vals[j]))
        for j in nz:
            if j != i:
                q = vals[j] // vals[i]
                vals[j] -= q * vals[i]
                vecs[j] = [x - q * y for x, y in zip(vecs[j], vecs[i])]
    if not nz:
        return 0, None, vecs
    i = nz[0]
    g, lead = vals[i], vecs[i]
    if g < 0:
        g, lead = -g, [-x for x in lead]
    return g, lead, [v for j, v in enumerate(vecs) if j != i]


def _twisted(m, ka: int, kb: int):
    return matmul(matmul(twist(kb), m), twist(-ka))


def _normalize_twists(mats, constraints, free_vars) -> tuple:
    """Canonical representative of edge matrices under section twists.

    ``mats[i]`` is glued through variables ``2i`` (end a) and ``2i+1``
    (end b); ``constraints`` lists ``(vars, modulus, target)``.  Entries
    are fixed one by one, each to its least non-negative residue over what
    the remaining lattice still allows.
    """
    n = 2 * len(mats)
    k0 = [0] * n
    basis = []
    for vars_, modulus, target in constraints:
        v0 = vars_[0]
        k0[v0] += target
        for v in vars_[1:]:
            vec = [0] * n
            vec[v], vec[v0] = 1, -1
            basis.append(vec)
        if modulus == MOD2:
            vec = [0] * n
            vec[v0] = 2
            basis.append(vec)
    for v in free_vars:
        vec = [0] * n
        vec[v] = 1
        basis.append(vec)
    entries = []
    for i, (p, q, r, s) in enumerate(mats):
        a, b = 2 * i, 2 * i + 1
        if r:
            entries.append((p, {b: r}))
            entries.append((s, {a: -r}))
        else:
            entries.append((q, {b: s, a: -p}))
    for f0, coef in entries:
        if not basis:
            break
        vals = [sum(c * vec[v] for v, c in coef.items()) for vec in basis]
        g, lead, rest = _split(vals, basis)
        if not g:
            continue
        cur = f0 + sum(c * k0[v] for v, c in coef.items())
        lam = (cur % g - cur) // g
        k0 = [x + lam * y for x, y in zip(k0, lead)]
        basis = rest
    return tuple(_twisted(m, k0[2 * i], k0[2 * i + 1]) for i, m in enumerate(mats))


# --- the search ----------------------------------------------------------

_MIRROR = (1, 0, 0, -1)


def _structure(g, labels) -> list:
    """Edges as (kind, end, end) label triples, sorted; flips kept apart."""
    out = []
    for e in g.edges.values():
        ends = [labels[end] for end in e.ends()]
        if len(ends) == 2:
            swapped = ends[1] < ends[0]
            if swapped:
                ends.reverse()
            out.append(((e.kind, ends[0], ends[1]), e, swapped))
        else:
            out.append(((e.kind, ends[0], (-1, -1)), e, False))
    out.sort(key=lambda t: t[0])
    return out


def _labelings(infos, groups):
    """Yield (piece order, readings) pairs: each a relabeling of the graph."""
    perms = [list(itertools.permutations(grp)) for grp in groups]
    for combo in itertools.product(*perms):
        order = [pid for part in combo for pid in part]
        for readings in itertools.product(*[range(len(infos[pid].orders)) for pid in order]):
            yield order, readings


def _sign_patterns(g, torus) -> list:
    seif = sorted({end[0] for _, e, _ in torus for end in e.ends()
                   if isinstance(g.pieces[end[0]], SeifertBlock)})
    out = set()
    for signs in itertools.product((1, -1), repeat=len(seif)):
        sign = dict(zip(seif, signs))
        per_edge = []
        for _, e, _ in torus:
            if any(isinstance(g.pieces[pid], SimpleBlock) for pid, _ in e.ends()):
                per_edge.append((1, -1))
            else:
                per_edge.append((sign[e.end_a[0]] * sign[e.end_b[0]],))
        out.update(itertools.product(*per_edge))
    return sorted(out)


def _flips(structure, mirror) -> tuple:
    out = []
    for _, e, _ in structure:
        if e.kind == TORUS or e.end_b is None:
            continue
        out.append(e.flip ^ mirror[e.end_a[0]] ^ mirror[e.end_b[0]])
    return tuple(out)


def _matrices(g, infos, mirror, structure) -> tuple:
    torus = [t for t in structure if t[1].kind == TORUS]
    if not torus:
        return ()
    mats = []
    var = {}
    for i, (_, e, swapped) in enumerate(torus):
        m = e.matrix
        if mirror[e.end_a[0]]:
            m = matmul(m, _MIRROR)
        if mirror[e.end_b[0]]:
            m = matmul(_MIRROR, m)
        a, b = e.end_a, e.end_b
        if swapped:
            m, a, b = matinv(m), b, a
        mats.append(m)
        var[a], var[b] = 2 * i, 2 * i + 1
    constraints, free_vars = [], []
    by_piece = {}
    for end, v in var.items():
        by_piece.setdefault(end[0], []).append(v)
    for pid, vars_ in by_piece.items():
        info = infos[pid][mirror[pid]]
        vars_.sort()
        if isinstance(info.piece, SeifertBlock) and info.modulus != FREE_TWIST:
            constraints.append((vars_, info.modulus, -info.shift))
        else:
            free_vars += vars_
    best = None
    for pattern in _sign_patterns(g, torus):
        signed = [tuple(x * sg for x in m) for m, sg in zip(mats, pattern)]
        cand = _normalize_twists(signed, constraints, sorted(free_vars))
        if best is None or cand < best:
            best = cand
    return best


def _mirror_infos(p) -> tuple:
    if isinstance(p, SeifertBlock):
        return _Piece(p), _Piece(mirror_block(p))
    info = _Piece(p)
    return info, info


def canonical_form(g: DecompositionGraph) -> CanonicalEncoding:
    problems = validate(g)
    if problems:
        raise GraphError("invalid graph: " + "; ".join(problems))
    g = collapse_alternates(g)
    infos = {pid: _mirror_infos(p) for pid, p in g.pieces.items()}
    desc = {pid: min(i.descriptor for i in pair) for pid, pair in infos.items()}
    allowed = {pid: [m for m in (0, 1) if pair[m].descriptor == desc[pid]]
               for pid, pair in infos.items()}
    plain = {pid: pair[0] for pid, pair in infos.items()}
    by_desc = {}
    for pid in sorted(g.pieces, key=lambda x: desc[x]):
        by_desc.setdefault(desc[pid], []).append(pid)
    groups = [by_desc[d] for d in sorted(by_desc)]

    def labels_of(order, readings):
        labels = {}
        for i, (pid, r) in enumerate(zip(order, readings)):
            for j, site in enumerate(plain[pid].orders[r]):
                labels[(pid, site)] = (i, j)
        return labels

    best_struct, survivors = None, []
    for order, readings in _labelings(plain, groups):
        structure = _structure(g, labels_of(order, readings))
        key = tuple(t[0] for t in structure)
        if best_struct is None or key < best_struct:
            best_struct, survivors = key, [(order, readings, structure)]
        elif key == best_struct:
            survivors.append((order, readings, structure))

    ids = list(g.pieces)
    mirrors = [dict(zip(ids, bits)) for bits in itertools.product(*[allowed[x] for x in ids])]
    best = None
    for order, readings, structure in survivors:
        for mirror in mirrors:
            cand = (_flips(structure, mirror), _matrices(g, infos, mirror, structure))
            if best is None or cand < best[0]:
                best = (cand, order, readings, structure, mirror)
    (flips, mats), order, readings, structure, mirror = best

    def site_name(j):
        return f"s{j}"

    pieces = {f"P{i}": infos[pid][mirror[pid]].rebuilt(r, site_name)
              for i, (pid, r) in enumerate(zip(order, readings))}
    torus_at = [n for n, t in enumerate(structure) if t[1].kind == TORUS]
    annulus_at = [n for n, t in enumerate(structure)
                  if t[1].kind != TORUS and t[1].end_b is not None]
    matrix_of = dict(zip(torus_at, mats))
    flip_of = dict(zip(annulus_at, flips))
    edges = {}
    for n, (key, e, _) in enumerate(structure):
        kind, a, b = key
        end_a = (f"P{a[0]}", site_name(a[1]))
        end_b = None if b == (-1, -1) else (f"P{b[0]}", site_name(b[1]))
        edges[f"E{n}"] = Edge(kind, end_a, end_b, flip_of.get(n, 0), matrix_of.get(n))
    canon = DecompositionGraph(pieces, edges, g.kind, "M")
    return CanonicalEncoding(serialize(canon).encode(), canon)


def isomorphic(g1: DecompositionGraph, g2: DecompositionGraph) -> bool:
    return canonical_form(g1) == canonical_form(g2)


# --- generators of the move set ----------------------------------------------

def relabel(g: DecompositionGraph, pieces: dict, sites: Optional[dict] = None,
            edges: Optional[dict] = None) -> DecompositionGraph:
    """Rename pieces, sites (keyed by (piece, site)) and edges."""
    sites = sites or {}
    edges = edges or {}
    out = {}
    for pid, p in g.pieces.items():
        mapping = {s: sites.get((pid, s), s) for s in p.sites()}
        if isinstance(p, SeifertBlock):
            p = SeifertBlock(p.base.renamed(mapping), p.b, p.fibres)
        elif isinstance(p, IBundleBlock):
            p = IBundleBlock(p.fiber_base.renamed(mapping), p.twisted)
        else:
            p = SimpleBlock(tuple((k, mapping[s]) for k, s in p.sites_), p.chi0, p.flag, p.label)
        out[pieces.get(pid, pid)] = p

    def end(x):
        return None if x is None else (pieces.get(x[0], x[0]), sites.get(x, x[1]))

    new_edges = {edges.get(eid, eid): Edge(e.kind, end(e.end_a), end(e.end_b), e.flip, e.matrix)
                 for eid, e in g.edges.items()}
    return DecompositionGraph(out, new_edges, g.kind, g.name)


def reverse_edge(g: DecompositionGraph, eid: str) -> DecompositionGraph:
    e = g.edges[eid]
    if e.end_b is None:
        return g
    m = matinv(e.matrix) if e.kind == TORUS else None
    edges = dict(g.edges)
    edges[eid] = Edge(e.kind, e.end_b, e.end_a, e.flip, m)
    return DecompositionGraph(g.pieces, edges, g.kind, g.name)


def rotate_circle(g: DecompositionGraph, pid: str, index: int, steps: int,
                  reflect: bool = False) -> DecompositionGraph:
    p = g.pieces[pid]
    circles = list(p.base.circles)
    c = list(circles[index])
    if reflect:
        c.reverse()
    steps %= len(c)
    circles[index] = tuple(c[steps:] + c[:steps])
    circles = circles[index:] + circles[:index]
    base = BaseSurface(p.base.orientable, p.base.genus, tuple(circles))
    pieces = dict(g.pieces)
    pieces[pid] = SeifertBlock(base, p.b, p.fibres)
    return DecompositionGraph(pieces, g.edges, g.kind, g.name)


def _torus_sites(p) -> list:
    return [s for s, k in p.sites().items() if k == TORUS]


def shift_fibre(g: DecompositionGraph, pid: str, index: int, k: int) -> DecompositionGraph:
    """beta_i += k*alpha_i, compensated in b or in the framing of one torus end."""
    p = g.pieces[pid]
    fibres = [list(f) for f in p.fibres]
    fibres[index][1] += k * fibres[index][0]
    edges = g.edges
    b = p.b
    if p.base.closed:
        b -= k
    elif section_twist_modulus(p) != FREE_TWIST:
        edges = apply_framing(edges, pid, _torus_sites(p)[0], twist(k))
    pieces = dict(g.pieces)
    pieces[pid] = SeifertBlock(p.base, b, tuple(tuple(f) for f in fibres))
    return DecompositionGraph(pieces, edges, g.kind, g.name)


def twist_sections(g: DecompositionGraph, pid: str, amounts: dict) -> DecompositionGraph:
    """Move the section at torus ends of ``pid``; amounts must be admissible."""
    p = g.pieces[pid]
    if isinstance(p, SeifertBlock):
        m = section_twist_modulus(p)
        total = sum(amounts.values())
        if (m == EXACT and total) or (m == MOD2 and total % 2):
            raise ValueError("section twists violate the sum rule")
    elif not isinstance(p, SimpleBlock):
        raise ValueError("no torus ends to twist")
    edges = g.edges
    for site, k in amounts.items():
        edges = apply_framing(edges, pid, site, twist(k))
    return DecompositionGraph(g.pieces, edges, g.kind, g.name)


def reverse_fibre(g: DecompositionGraph, pid: str, site: Optional[str] = None) -> DecompositionGraph:
    """Negate fibre and section at every torus end of a Seifert piece, or at
    one end of a simple piece."""
    p = g.pieces[pid]
    if isinstance(p, SeifertBlock):
        sites = _torus_sites(p)
    elif isinstance(p, SimpleBlock) and site is not None:
        sites = [site]
    else:
        raise ValueError("fibre reversal needs a Seifert piece or a simple end")
    edges = g.edges
    for s in sites:
        edges = apply_framing(edges, pid, s, (-1, 0, 0, -1))
    return DecompositionGraph(g.pieces, edges, g.kind, g.name)


def swap_alternate(g: DecompositionGraph, pid: str) -> DecompositionGraph:
    """Replace a two-fibration block by its other fibred description."""
    p = g.pieces[pid]
    alts = alternate_fibrations(p)
    if not alts:
        raise ValueError(f"piece {pid} has a unique fibration")
    alt = alts[0]
    pieces = dict(g.pieces)
    pieces[pid] = alt.piece
    edges = g.edges
    if alt.framing is not None:
        (site,) = alt.piece.sites()
        edges = apply_framing(edges, pid, site, alt.framing)
    return DecompositionGraph(pieces, edges, g.kind, g.name)


def mirror_piece(g: DecompositionGraph, pid: str) -> DecompositionGraph:
    """Describe one piece with the opposite base orientation."""
    pieces = dict(g.pieces)
    p = pieces[pid]
    if isinstance(p, SeifertBlock):
        pieces[pid] = mirror_block(p)
    return DecompositionGraph(pieces, mirror_ends(g.edges, pid), g.kind, g.name)
