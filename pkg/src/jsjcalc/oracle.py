"""Brute-force oracles: census enumeration, permutation isomorphism,
all-orders confluence and cell-complex surface arithmetic.

Nothing here uses :mod:`jsjcalc.isocanon`; the two isomorphism tests are
meant to be compared against each other.
"""
from __future__ import annotations

import functools
import itertools
from collections import Counter
from dataclasses import dataclass
from typing import Iterator, NamedTuple, Optional

import sympy
from sympy.matrices.normalforms import smith_normal_decomp

from .core import (
    ANNULUS, ANNULUS_ARC, D0, FREE, KIND_W, SPECIAL_SIMPLE, STRONGLY_SIMPLE, TORUS,
    TORUS_ARC, Arc, BaseSurface, DecompositionGraph, Edge, GraphError, IBundleBlock,
    SeifertBlock, SimpleBlock, matinv, matmul, twist, validate,
)
from .normalize import detect_matched_annuli, w_to_jsj
from .seifert import (
    FREE_TWIST, SeifertData, alternate_fibrations, normalize_with_shift, section_twist_modulus,
)

# --- census -----------------------------------------------------------------


@dataclass(frozen=True)
class EnumerationBounds:
    max_pieces: int = 2
    max_exceptional_fibres: int = 1
    max_alpha: int = 3
    max_genus: int = 1
    max_circles: int = 2
    max_sites: int = 2  # per piece
    kinds: tuple = ("seifert", "ibundle", "simple")
    torus_gluings: tuple = ((0, 1, 1, 0),)
    flips: tuple = (0, 1)
    closed_b: tuple = (-1, 0, 1)
    seifert_only_disk: bool = False  # restrict Seifert bases to disks
    # graph-wide totals; None leaves them to the per-piece bounds
    max_total_fibres: Optional[int] = None
    max_total_genus: Optional[int] = None

    def __post_init__(self):
        for name in ("max_pieces", "max_exceptional_fibres", "max_alpha", "max_genus",
                     "max_circles", "max_sites"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")


CIRCLE_PATTERNS = ((D0,), (TORUS_ARC,), (D0, ANNULUS_ARC), (D0, ANNULUS_ARC, D0, ANNULUS_ARC))


def _surfaces(b: EnumerationBounds):
    yield True, 0
    for g in range(1, b.max_genus + 1):
        yield True, g
        yield False, g


def _fibre_sets(b: EnumerationBounds, orientable: bool):
    options = []
    for alpha in range(2, b.max_alpha + 1):
        for beta in range(1, alpha):
            if sympy.igcd(alpha, beta) == 1 and (orientable or 2 * beta <= alpha):
                options.append((alpha, beta))
    for n in range(b.max_exceptional_fibres + 1):
        yield from itertools.combinations_with_replacement(options, n)


def _name_sites(patterns) -> tuple:
    circles, n = [], 0
    for pat in patterns:
        arcs = []
        for tag in pat:
            if tag == D0:
                arcs.append(FREE)
            else:
                arcs.append(Arc(tag, f"s{n}"))
                n += 1
        circles.append(tuple(arcs))
    return tuple(circles)


def piece_catalogue(b: EnumerationBounds) -> list:
    """Every piece within the bounds, sites named s0, s1, ..."""
    out = []
    if "seifert" in b.kinds:
        for orientable, genus in _surfaces(b):
            if b.seifert_only_disk and not (orientable and genus == 0):
                continue
            for nc in range(b.max_circles + 1):
                if b.seifert_only_disk and nc != 1:
                    continue
                for pats in itertools.combinations_with_replacement(CIRCLE_PATTERNS, nc):
                    nsites = sum(t != D0 for p in pats for t in p)
                    if nsites > b.max_sites:
                        continue
                    base = BaseSurface(orientable, genus, _name_sites(pats))
                    for fibres in _fibre_sets(b, orientable):
                        bs = b.closed_b if base.closed else (0,)
                        if base.closed and not orientable:
                            bs = tuple(sorted({x % 2 for x in bs}))
                        for bb in bs:
                            out.append(SeifertBlock(base, bb, fibres))
    if "ibundle" in b.kinds:
        for orientable, genus in _surfaces(b):
            for nc in range(1, b.max_circles + 1):
                for na in range(1, min(nc, b.max_sites) + 1):
                    pats = [(ANNULUS_ARC,)] * na + [(D0,)] * (nc - na)
                    base = BaseSurface(orientable, genus, _name_sites(pats))
                    out.append(IBundleBlock(base, not orientable))
    if "simple" in b.kinds:
        for n in range(1, b.max_sites + 1):
            for na in range(n + 1):
                kinds = [ANNULUS] * na + [TORUS] * (n - na)
                sites = tuple((k, f"s{i}") for i, k in enumerate(kinds))
                for chi0 in ((-2,) if na else (0, -2)):
                    out.append(SimpleBlock(sites, chi0, STRONGLY_SIMPLE))
    return out


def _matchings(items):
    """Perfect matchings of a list of (kind, end) items pairing equal kinds."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for i, other in enumerate(rest):
        if other[0] == first[0]:
            for m in _matchings(rest[:i] + rest[i + 1:]):
                yield [(first, other)] + m


def _site_class(p, site) -> str:
    """Relabelling- and mirror-invariant description of where a site sits."""
    if isinstance(p, SeifertBlock):
        for c in p.base.circles:
            if any(a.site == site for a in c):
                return min(repr(w) for w in _dihedral([a.tag for a in c]))
    return str(p.sites()[site])


def _invariant(g: DecompositionGraph) -> tuple:
    """Cheap isomorphism invariant: pieces with their edge neighbourhoods,
    refined once more by the neighbours' neighbourhoods."""
    g = collapse(g)
    every = _reflect(g, set(g.pieces))
    data = {pid: min(repr(_piece_data(p)[0]), repr(_piece_data(every.pieces[pid])[0]))
            for pid, p in g.pieces.items()}
    around = {pid: [] for pid in g.pieces}
    # mirroring one side toggles every annulus flip between two pieces at once
    between = {}
    for e in g.edges.values():
        ends = e.ends()
        for x in ends:
            others = tuple(sorted((data[y[0]], _site_class(g.pieces[y[0]], y[1]))
                                  for y in ends if y != x))
            loop = e.flip if e.kind == ANNULUS and ends[0][0] == ends[-1][0] else None
            around[x[0]].append((e.kind, _site_class(g.pieces[x[0]], x[1]), others, loop))
        if e.kind == ANNULUS and e.end_a[0] != e.end_b[0]:
            pair = tuple(sorted((e.end_a[0], e.end_b[0])))
            between.setdefault(pair, [0, 0])[e.flip] += 1
    colour = {pid: repr((data[pid], sorted(around[pid], key=repr))) for pid in g.pieces}
    nbrs = {pid: [] for pid in g.pieces}
    for e in g.edges.values():
        ends = e.ends()
        for x in ends:
            nbrs[x[0]].extend(colour[y[0]] for y in ends if y != x)
    refined = {pid: (colour[pid], tuple(sorted(nbrs[pid]))) for pid in g.pieces}
    splits = sorted((tuple(sorted((refined[a], refined[b]))), tuple(sorted(c)))
                    for (a, b), c in between.items())
    return tuple(sorted(refined.values())), tuple(splits)


def _fibre_count(p) -> int:
    return len(p.fibres) if isinstance(p, SeifertBlock) else 0


def _genus(p) -> int:
    if isinstance(p, SeifertBlock):
        return p.base.genus
    if isinstance(p, IBundleBlock):
        return p.fiber_base.genus
    return 0


def _combinations(cat, n, b):
    """Multisets of n catalogue indices within the graph-wide totals."""
    fmax = b.max_total_fibres if b.max_total_fibres is not None else float("inf")
    gmax = b.max_total_genus if b.max_total_genus is not None else float("inf")

    def grow(start, left, fibres, genus, chosen):
        if not left:
            yield tuple(chosen)
            return
        for i in range(start, len(cat)):
            p = cat[i]
            f, g = fibres + _fibre_count(p), genus + _genus(p)
            if f <= fmax and g <= gmax:
                chosen.append(i)
                yield from grow(i, left - 1, f, g, chosen)
                chosen.pop()

    yield from grow(0, n, 0, 0, [])


def _spans(n, matching) -> bool:
    parent = list(range(n))

    def find(v):
        while parent[v] != v:
            v = parent[v]
        return v

    for (_, (a, _)), (_, (b, _)) in matching:
        parent[find(int(a[1:]))] = find(int(b[1:]))
    return len({find(i) for i in range(n)}) == 1


def enumerate_graphs(b: EnumerationBounds, kind: str = KIND_W) -> Iterator[DecompositionGraph]:
    """Valid graphs within the bounds, one per oracle-isomorphism class."""
    if b.max_pieces <= 0:
        return
    cat = piece_catalogue(b)
    seen = {}
    for n in range(1, b.max_pieces + 1):
        pool = cat if n == 1 else [p for p in cat if p.sites()]
        for combo in _combinations(pool, n, b):
            parts = [pool[i] for i in combo]
            ends = [(k, (f"P{i}", s)) for i, p in enumerate(parts)
                    for s, k in sorted(p.sites().items())]
            kinds = [k for k, _ in ends]
            if kinds.count(ANNULUS) % 2 or kinds.count(TORUS) % 2 or len(ends) < 2 * (n - 1):
                continue
            pieces = {f"P{i}": p for i, p in enumerate(parts)}
            syms = _identical_swaps(combo)
            labelled = set()
            for matching in _matchings(ends):
                if not _spans(n, matching):
                    continue
                decos = []
                for (k, _), _ in matching:
                    decos.append(b.flips if k == ANNULUS else b.torus_gluings)
                for choice in itertools.product(*decos):
                    edges = {}
                    for j, (((k, ea), (_, eb)), d) in enumerate(zip(matching, choice)):
                        if k == ANNULUS:
                            edges[f"E{j}"] = Edge(ANNULUS, ea, eb, d)
                        else:
                            edges[f"E{j}"] = Edge(TORUS, ea, eb, matrix=d)
                    # a relabelling of identical pieces is an isomorphism for free
                    key = min(_labelled_key(edges, m) for m in syms)
                    if key in labelled:
                        continue
                    labelled.add(key)
                    g = DecompositionGraph(pieces, edges, kind, "M")
                    if validate(g):
                        continue
                    key = _invariant(g)
                    bucket = seen.setdefault(key, [])
                    if any(oracle_isomorphic(g, h, check=False) for h in bucket):
                        continue
                    bucket.append(g)
                    yield g


def _identical_swaps(combo) -> list:
    """Renamings P_i -> P_j permuting equal catalogue entries among themselves."""
    groups = {}
    for i, c in enumerate(combo):
        groups.setdefault(c, []).append(i)
    out = []
    for perms in itertools.product(*(itertools.permutations(v) for v in groups.values())):
        m = {}
        for src, dst in zip(groups.values(), perms):
            m.update({f"P{a}": f"P{b}" for a, b in zip(src, dst)})
        out.append(m)
    return out


def _labelled_key(edges, m) -> tuple:
    out = []
    for e in edges.values():
        a, b = (m[e.end_a[0]], e.end_a[1]), (m[e.end_b[0]], e.end_b[1])
        if e.kind == TORUS:
            out.append((a, b, e.matrix) if a <= b else (b, a, matinv(e.matrix)))
        else:
            out.append((min(a, b), max(a, b), e.flip))
    return tuple(sorted(out))


# --- isomorphism by exhaustive permutation ------------------------------------


def collapse(g: DecompositionGraph) -> DecompositionGraph:
    """Two-fibration blocks in their Seifert form (disk blocks go to the
    Moebius-band form)."""
    pieces, edges = dict(g.pieces), dict(g.edges)
    for pid, p in g.pieces.items():
        for alt in alternate_fibrations(p):
            q = alt.piece
            if not isinstance(q, SeifertBlock):
                continue
            if isinstance(p, SeifertBlock) and not p.base.orientable:
                continue
            pieces[pid] = q
            if alt.framing is not None:
                (site,) = q.sites()
                for eid, e in edges.items():
                    if e.kind != TORUS:
                        continue
                    m = e.matrix
                    if e.end_a == (pid, site):
                        m = matmul(m, matinv(alt.framing))
                    if e.end_b == (pid, site):
                        m = matmul(alt.framing, m)
                    edges[eid] = Edge(e.kind, e.end_a, e.end_b, e.flip, m)
            break
    return DecompositionGraph(pieces, edges, g.kind, g.name)


def _dihedral(c) -> frozenset:
    out = set()
    for seq in (list(c), list(c)[::-1]):
        for i in range(len(seq)):
            out.add(tuple(seq[i:] + seq[:i]))
    return frozenset(out)


@functools.lru_cache(maxsize=None)
def _piece_data(p):
    """(site-free normal data, shift, twist modulus) of a piece."""
    if isinstance(p, SeifertBlock):
        norm, shift = normalize_with_shift(SeifertData.of(p))
        circles = Counter(_dihedral([a.tag for a in c]) for c in p.base.circles)
        mod = section_twist_modulus(p) if p.base.circles else FREE_TWIST
        data = ("seifert", p.base.orientable, p.base.genus, norm.b,
                tuple(tuple(f) for f in norm.fibres),
                tuple(sorted((sorted(k), v) for k, v in circles.items())))
        return data, shift, mod
    if isinstance(p, IBundleBlock):
        fb = p.fiber_base
        return ("ibundle", fb.orientable, fb.genus, p.twisted, len(fb.sites()),
                len(fb.circles)), 0, FREE_TWIST
    kinds = Counter(k for k, _ in p.sites_)
    return ("simple", p.chi0, p.flag, p.label, tuple(sorted(kinds.items()))), 0, FREE_TWIST


@functools.lru_cache(maxsize=None)
def _site_maps(p1, p2) -> list:
    s1, s2 = list(p1.sites()), list(p2.sites())
    if len(s1) != len(s2):
        return []
    out = []
    for perm in itertools.permutations(s2):
        m = dict(zip(s1, perm))
        if isinstance(p1, SeifertBlock):
            renamed = p1.base.renamed(m)
            if Counter(_dihedral(c) for c in renamed.circles) != \
                    Counter(_dihedral(c) for c in p2.base.circles):
                continue
        elif isinstance(p1, SimpleBlock):
            k1, k2 = p1.sites(), p2.sites()
            if any(k1[a] != k2[b] for a, b in m.items()):
                continue
        out.append(m)
    return out


def _integer_solvable(rows, rhs, nvars) -> bool:
    if not rows:
        return True
    A = sympy.Matrix(rows)
    c = sympy.Matrix(rhs)
    if all(x == 0 for x in A):
        return all(x == 0 for x in c)
    S, U, V = smith_normal_decomp(A)
    y = U * c
    for i in range(A.rows):
        d = S[i, i] if i < min(S.shape) else 0
        if d == 0:
            if y[i] != 0:
                return False
        elif y[i] % d != 0:
            return False
    return True


def _twists_solvable(pairs, pieces, ends_of) -> bool:
    """Do section twists carry every matrix in ``pairs`` to its partner?

    ``pairs``: ((end_a, end_b), M1, M2) with ends named by g1.
    ``pieces``: pid -> (modulus, target) for constrained pieces.
    """
    fixed = {}
    linear = []

    def fix(v, val):
        if v in fixed and fixed[v] != val:
            return False
        fixed[v] = val
        return True

    for (a, b), m1, m2 in pairs:
        p, q, r, s = m1
        if r != m2[2]:
            return False
        if r:
            if (m2[0] - p) % r or (s - m2[3]) % r:
                return False
            kb, ka = (m2[0] - p) // r, (s - m2[3]) // r
            if matmul(matmul(twist(kb), m1), twist(-ka)) != m2:
                return False
            if not (fix(a, ka) and fix(b, kb)):
                return False
        else:
            if p != m2[0] or s != m2[3]:
                return False
            linear.append(({b: s, a: -p}, m2[1] - q))
    for pid, (mod, target) in pieces.items():
        coef = {v: 1 for v in ends_of.get(pid, [])}
        if not coef:
            continue
        if mod:
            coef[("z", pid)] = -mod
        linear.append((coef, target))
    names = sorted({v for coef, _ in linear for v in coef if v not in fixed}, key=repr)
    index = {v: i for i, v in enumerate(names)}
    rows, rhs = [], []
    for coef, val in linear:
        row = [0] * len(names)
        for v, c in coef.items():
            if v in fixed:
                val -= c * fixed[v]
            else:
                row[index[v]] += c
        if not names:
            if val != 0:
                return False
            continue
        rows.append(row)
        rhs.append(val)
    return _integer_solvable(rows, rhs, len(names))


def _reflect(g: DecompositionGraph, flipped) -> DecompositionGraph:
    """Re-describe the pieces in ``flipped`` with opposite base orientation."""
    pieces = dict(g.pieces)
    for pid in flipped:
        p = pieces[pid]
        if isinstance(p, SeifertBlock):
            base = BaseSurface(p.base.orientable, p.base.genus,
                               tuple(tuple(reversed(c)) for c in p.base.circles))
            pieces[pid] = SeifertBlock(base, -p.b, tuple((a, -b) for a, b in p.fibres))
    edges = {}
    for eid, e in g.edges.items():
        if e.end_b is None:
            edges[eid] = e
            continue
        fa, fb = e.end_a[0] in flipped, e.end_b[0] in flipped
        if e.kind == TORUS:
            p, q, r, s = e.matrix
            if fa:
                q, s = -q, -s
            if fb:
                r, s = -r, -s
            edges[eid] = Edge(TORUS, e.end_a, e.end_b, matrix=(p, q, r, s))
        else:
            edges[eid] = Edge(e.kind, e.end_a, e.end_b, e.flip ^ (fa != fb))
    return DecompositionGraph(pieces, edges, g.kind, g.name)


def oracle_isomorphic(g1: DecompositionGraph, g2: DecompositionGraph, check: bool = True) -> bool:
    if check:
        for g in (g1, g2):
            problems = validate(g)
            if problems:
                raise GraphError("invalid graph: " + "; ".join(problems))
    if g1.kind != g2.kind or len(g1.pieces) != len(g2.pieces) or len(g1.edges) != len(g2.edges):
        return False
    g1, g2 = collapse(g1), collapse(g2)
    ids1, ids2 = list(g1.pieces), list(g2.pieces)
    every = _reflect(g1, set(ids1))
    data1 = {pid: (_piece_data(g1.pieces[pid]), _piece_data(every.pieces[pid])) for pid in ids1}
    data2 = {pid: _piece_data(p) for pid, p in g2.pieces.items()}
    at2 = g2.edge_at()
    links2 = Counter((e.kind, frozenset(x[0] for x in e.ends())) for e in g2.edges.values())
    for perm in itertools.permutations(ids2):
        pm = dict(zip(ids1, perm))
        links = Counter((e.kind, frozenset(pm[x[0]] for x in e.ends())) for e in g1.edges.values())
        if links != links2:
            continue
        choices = []
        for a, b in zip(ids1, perm):
            choices.append([m for m in (0, 1) if data1[a][m][0] == data2[b][0]])
        if not all(choices):
            continue
        pmap = dict(zip(ids1, perm))
        for bits in itertools.product(*choices):
            h = _reflect(g1, {a for a, m in zip(ids1, bits) if m})
            hdata = {a: data1[a][m] for a, m in zip(ids1, bits)}
            options = [_site_maps(h.pieces[a], g2.pieces[pmap[a]]) for a in ids1]
            if _assign_sites(h, g2, ids1, options, pmap, at2, hdata, data2):
                return True
    return False


def _assign_sites(h, g2, ids1, options, pmap, at2, data1, data2) -> bool:
    """Backtrack over site maps piece by piece, checking each edge as soon as
    all of its ends have images; the twist system is solved at the leaves."""
    placed = {pid: k for k, pid in enumerate(ids1)}
    due = [[] for _ in ids1]
    for e in h.edges.values():
        due[max(placed[x[0]] for x in e.ends())].append(e)
    end_map = {}

    def fits(e):
        images = [end_map[x] for x in e.ends()]
        e2 = g2.edges[at2[images[0]]]
        if e2.kind != e.kind or len(e2.ends()) != len(images):
            return False
        if len(images) == 2 and (set(e2.ends()) != set(images)
                                 or (e.kind == ANNULUS and e.flip != e2.flip)):
            return False
        return True

    def step(k):
        if k == len(ids1):
            return _edges_match(h, g2, end_map, at2, data1, data2, pmap)
        a = ids1[k]
        for m in options[k]:
            for site, t in m.items():
                end_map[(a, site)] = (pmap[a], t)
            if all(fits(e) for e in due[k]) and step(k + 1):
                return True
        return False

    return step(0)


def _edges_match(g1, g2, end_map, at2, data1, data2, pmap) -> bool:
    pairs = []
    for e in g1.edges.values():
        images = [end_map[x] for x in e.ends()]
        e2 = g2.edges[at2[images[0]]]
        if e2.kind != e.kind or len(e2.ends()) != len(images):
            return False
        if len(images) == 1:
            continue
        if set(e2.ends()) != set(images) or (e.kind == ANNULUS and e.flip != e2.flip):
            return False
        if e.kind == TORUS:
            m1 = e.matrix if e2.end_a == images[0] else matinv(e.matrix)
            ends = (e.end_a, e.end_b) if e2.end_a == images[0] else (e.end_b, e.end_a)
            pairs.append((ends, m1, e2.matrix))
    if not pairs:
        return True
    ends_of = {}
    for ends, _, _ in pairs:
        for x in ends:
            ends_of.setdefault(x[0], []).append(x)
    constrained = {}
    for pid, (data, shift, mod) in data1.items():
        if data[0] == "seifert" and mod != FREE_TWIST:
            constrained[pid] = (mod, data2[pmap[pid]][1] - shift)
    # signs: -1 on a whole Seifert piece, or on one end of a simple piece
    units = sorted({x[0] for ends, _, _ in pairs for x in ends
                    if isinstance(g1.pieces[x[0]], SeifertBlock)})
    units += sorted({x for ends, _, _ in pairs for x in ends
                     if isinstance(g1.pieces[x[0]], SimpleBlock)})
    # the signed system only depends on the sign carried by each edge; rule out
    # edge signs locally and solve each surviving sign vector once
    allowed = [{eps for eps in (1, -1) if _locally_twistable(tuple(eps * v for v in m1), m2)}
               for _, m1, m2 in pairs]
    if not all(allowed):
        return False
    tried = set()
    for signs in itertools.product((1, -1), repeat=len(units)):
        sign = dict(zip(units, signs))

        def sg(x):
            return sign[x[0]] if x[0] in sign else sign[x]

        eps = tuple(sg(ends[0]) * sg(ends[1]) for ends, _, _ in pairs)
        if eps in tried or any(e not in ok for e, ok in zip(eps, allowed)):
            continue
        tried.add(eps)
        signed = [(ends, tuple(e * v for v in m1), m2) for e, (ends, m1, m2) in zip(eps, pairs)]
        if _twists_solvable(signed, constrained, ends_of):
            return True
    return False


def _locally_twistable(m1, m2) -> bool:
    """Can U(kb) m1 U(-ka) equal m2 for some integers ka, kb?"""
    p, q, r, s = m1
    if r != m2[2]:
        return False
    if r:
        return (m2[0] - p) % r == 0 and (s - m2[3]) % r == 0
    return p == m2[0] and s == m2[3]


# --- confluence ---------------------------------------------------------------


def check_confluence(g: DecompositionGraph) -> bool:
    problems = validate(g)
    if problems:
        raise GraphError("invalid graph: " + "; ".join(problems))
    if g.kind != KIND_W:
        raise GraphError("confluence is checked on W graphs")
    matched = detect_matched_annuli(g)
    results = [w_to_jsj(g, order) for order in itertools.permutations(matched)]
    return all(oracle_isomorphic(results[0], r, check=False) for r in results[1:])


# --- cell-complex surface arithmetic ------------------------------------------


class SurfaceInvariants(NamedTuple):
    chi: int
    orientable: bool
    circles: int
    circle_sites: tuple  # sorted tuple of sorted site tuples, one per circle


class _Complex:
    def __init__(self):
        self.faces = []  # list of [(label, dir)]
        self.site_label = {}
        self.label_site = {}
        self.alias = {}
        self._n = 0

    def fresh(self, site=None):
        self._n += 1
        label = self._n
        if site is not None:
            self.label_site[label] = site
        return label

    def add_surface(self, s: BaseSurface, tag: str):
        word = []
        for _ in range(s.genus):
            if s.orientable:
                a, b = self.fresh(), self.fresh()
                word += [(a, 1), (b, 1), (a, -1), (b, -1)]
            else:
                x = self.fresh()
                word += [(x, 1), (x, 1)]
        for c in s.circles:
            conn = self.fresh()
            word.append((conn, 1))
            for arc in c:
                label = self.fresh(arc.site)
                if arc.site is not None:
                    self.site_label[(tag, arc.site)] = (label, len(self.faces), len(word))
                word.append((label, 1))
            word.append((conn, -1))
        self.faces.append(word)

    def glue(self, x, y, reversing: bool):
        lx, fx, ix = self.site_label[x]
        ly, fy, iy = self.site_label[y]
        self.faces[fy][iy] = (lx, 1 if reversing else -1)
        self.label_site.pop(lx, None)
        self.label_site.pop(ly, None)

    def invariants(self) -> SurfaceInvariants:
        parent = {}

        def find(v):
            while parent.setdefault(v, v) != v:
                parent[v] = parent[parent[v]]
                v = parent[v]
            return v

        def union(u, v):
            parent[find(u)] = find(v)

        uses = {}
        for f, word in enumerate(self.faces):
            n = len(word)
            for i, (label, d) in enumerate(word):
                tail, head = (f, i), (f, (i + 1) % n)
                if d < 0:
                    tail, head = head, tail
                uses.setdefault(label, []).append((f, d, tail, head))
        for label, us in uses.items():
            for u in us[1:]:
                union(us[0][2], u[2])
                union(us[0][3], u[3])
        corners = {(f, i) for f, w in enumerate(self.faces) for i in range(len(w))}
        V = len({find(c) for c in corners})
        chi = V - len(uses) + len(self.faces)
        # orientation: each face gets a sign; interior edges need opposite uses
        sign = {0: 1} if self.faces else {}
        orientable = True
        changed = True
        while changed:
            changed = False
            for us in uses.values():
                if len(us) != 2:
                    continue
                (f1, d1, _, _), (f2, d2, _, _) = us
                for fa, da, fb, db in ((f1, d1, f2, d2), (f2, d2, f1, d1)):
                    if fa in sign:
                        want = -sign[fa] * da * db
                        if fb not in sign:
                            sign[fb] = want
                            changed = True
                        elif sign[fb] != want:
                            orientable = False
        # boundary circles: components of the once-used edges
        bparent = {}

        def bfind(v):
            while bparent.setdefault(v, v) != v:
                v = bparent[v]
            return v

        bedges = [(label, us[0]) for label, us in uses.items() if len(us) == 1]
        for _, (_, _, tail, head) in bedges:
            bparent[bfind(find(tail))] = bfind(find(head))
        comps = {}
        for label, (_, _, tail, _) in bedges:
            comps.setdefault(bfind(find(tail)), []).append(self.label_site.get(label))
        sites = tuple(sorted(tuple(sorted(s for s in c if s is not None))
                             for c in comps.values()))
        return SurfaceInvariants(chi, orientable, len(comps), sites)


def surface_invariants(s: BaseSurface) -> SurfaceInvariants:
    if not s.circles and s.genus == 0:
        return SurfaceInvariants(2, True, 0, ())
    cx = _Complex()
    cx.add_surface(s, "A")
    return cx.invariants()


def glued_invariants(s1: BaseSurface, site1: str, s2: Optional[BaseSurface], site2: str,
                     reversing: bool = False) -> SurfaceInvariants:
    """Invariants of the surface obtained by identifying two annulus-end arcs."""
    cx = _Complex()
    cx.add_surface(s1, "A")
    tag2 = "A"
    if s2 is not None:
        cx.add_surface(s2, "B")
        tag2 = "B"
    cx.glue(("A", site1), (tag2, site2), reversing)
    return cx.invariants()


def core_invariants(s: BaseSurface) -> SurfaceInvariants:
    sites = tuple(sorted(tuple(sorted(a.site for a in c if a.site is not None))
                         for c in s.circles))
    return SurfaceInvariants(s.euler_characteristic, s.orientable, len(s.circles), sites)
