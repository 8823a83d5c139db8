"""Exact arithmetic on unnormalized Seifert invariants {b; (a1,b1), ...}."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import NamedTuple, Optional

from .core import (
    ANNULUS_ARC, D0, FREE, TORUS_ARC, Arc, BaseSurface, ExceptionalFibre,
    IBundleBlock, Matrix, SeifertBlock, matinv, matmul, twist,
)


@dataclass(frozen=True)
class SeifertData:
    base: BaseSurface
    b: int = 0
    fibres: tuple = ()

    def __post_init__(self):
        object.__setattr__(
            self, "fibres", tuple(sorted(ExceptionalFibre(*f) for f in self.fibres)))

    @classmethod
    def of(cls, block: SeifertBlock) -> "SeifertData":
        return cls(block.base, block.b, block.fibres)

    def __str__(self):
        return "{%d;%s}" % (self.b, ",".join(str(f) for f in self.fibres))


SPHERE = BaseSurface(True, 0)
PROJECTIVE_PLANE = BaseSurface(False, 1)
DISK = BaseSurface(True, 0, ((FREE,),))


def normalize_with_shift(d: SeifertData) -> tuple:
    """Normal form plus the integer pushed into the boundary framing.

    For a closed base the shift is always 0 because ``b`` absorbs it.  For a
    bounded base ``b`` stays 0 and the returned shift says how far the section
    of the normal form has moved against the original one.
    """
    b = d.b
    shift = 0
    fibres = []
    for alpha, beta in d.fibres:
        q, r = divmod(beta, alpha)
        shift += q
        if alpha == 1:
            continue
        fibres.append([alpha, r])
    free_parity = False
    if not d.base.orientable:
        for f in fibres:
            alpha, beta = f
            if 2 * beta > alpha:
                # flip (a, b) -> (a, -b), then shift back into [0, a)
                f[1] = alpha - beta
                shift -= 1
            if 2 * f[1] == alpha:
                free_parity = True
    if d.base.closed:
        b = b + shift
        shift = 0
        if not d.base.orientable:
            b = 0 if free_parity else b % 2
    else:
        b = 0
    return SeifertData(d.base, b, tuple(ExceptionalFibre(*f) for f in fibres)), shift


def normalize_invariants(d: SeifertData) -> SeifertData:
    return normalize_with_shift(d)[0]


def _rational_gcd(values) -> Fraction:
    g = Fraction(0)
    for v in values:
        v = abs(Fraction(v))
        if g == 0:
            g = v
        elif v != 0:
            den = g.denominator * v.denominator // gcd(g.denominator, v.denominator)
            g = Fraction(gcd(int(g * den), int(v * den)), den)
    return g


def euler_number(d: SeifertData) -> Fraction:
    """Rational Euler number -(b + sum beta/alpha) of a closed-base fibration.

    Over a non-orientable base the value is only defined modulo the subgroup
    generated by 2 and the 2*beta/alpha; the smallest non-negative
    representative is returned.
    """
    if not d.base.closed:
        raise ValueError("Euler number undefined for bounded base")
    e = -(d.b + sum(Fraction(f.beta, f.alpha) for f in d.fibres))
    if d.base.orientable:
        return e
    g = _rational_gcd([2] + [Fraction(2 * f.beta, f.alpha) for f in d.fibres])
    return e - g * (e // g)


def _pattern_key(base: BaseSurface) -> tuple:
    """Base topology and arc pattern with site names erased, up to symmetry."""
    def circle_key(c):
        tags = [a.tag for a in c]
        n = len(tags)
        variants = []
        for seq in (tags, tags[::-1]):
            variants += [tuple(seq[i:] + seq[:i]) for i in range(n)]
        return min(variants)
    return (base.orientable, base.genus, tuple(sorted(circle_key(c) for c in base.circles)))


def fibrations_equivalent(d1: SeifertData, d2: SeifertData) -> bool:
    n1, n2 = normalize_invariants(d1), normalize_invariants(d2)
    return (n1.b, n1.fibres) == (n2.b, n2.fibres) and \
        _pattern_key(d1.base) == _pattern_key(d2.base)


# Framing change between the two Seifert fibrations of the twisted I-bundle
# over the Klein bottle, from the disk-with-two-(2,1) framing to the Moebius
# framing.  Its fibre (1, 0) lands on the rational longitude (1, 1).
KLEIN_FRAMING: Matrix = (0, 1, -1, 1)


class Alternative(NamedTuple):
    piece: object
    framing: Optional[Matrix]  # primary (fibre, section) coords -> alternative's


def _single_circle(base: BaseSurface):
    if len(base.circles) != 1 or len(base.circles[0]) not in (1, 2):
        return None
    return base.circles[0]


def alternate_fibrations(p) -> list:
    """The second fibred structure of the four non-unique building blocks."""
    if isinstance(p, IBundleBlock):
        base = p.fiber_base
        c = _single_circle(base)
        if (not base.orientable and base.genus == 1 and c is not None
                and len(c) == 1 and c[0].tag == ANNULUS_ARC):
            disk = BaseSurface(True, 0, ((FREE, c[0]),))
            return [Alternative(SeifertBlock(disk, 0, ((2, 1),)), None)]
        return []
    if not isinstance(p, SeifertBlock):
        return []
    base = p.base
    c = _single_circle(base)
    if c is None:
        return []
    norm, _ = normalize_with_shift(SeifertData.of(p))
    fibres = [tuple(f) for f in norm.fibres]
    if base.orientable and base.genus == 0:
        if (len(c) == 2 and {a.tag for a in c} == {D0, ANNULUS_ARC}
                and fibres == [(2, 1)]):
            site = next(a for a in c if a.tag == ANNULUS_ARC)
            mob = BaseSurface(False, 1, ((site,),))
            return [Alternative(IBundleBlock(mob, True), None)]
        if len(c) == 1 and c[0].tag == TORUS_ARC and fibres == [(2, 1), (2, 1)]:
            total = sum(Fraction(f.beta, f.alpha) for f in p.fibres)
            framing = matmul(KLEIN_FRAMING, twist(1 - int(total)))
            mob = BaseSurface(False, 1, (c,))
            return [Alternative(SeifertBlock(mob, 0, ()), framing)]
    if (not base.orientable and base.genus == 1 and len(c) == 1
            and c[0].tag == TORUS_ARC and not p.fibres):
        disk = BaseSurface(True, 0, (c,))
        return [Alternative(SeifertBlock(disk, 0, ((2, 1), (2, 1))),
                            matinv(KLEIN_FRAMING))]
    return []


EXACT, MOD2, FREE_TWIST = 0, 2, 1


def section_twist_modulus(p: SeifertBlock) -> int:
    """How boundary section twists of a bounded-base block are constrained.

    The twists k_i at the torus sites must satisfy sum k_i = const modulo the
    returned value: 0 means exactly, 2 means up to parity, 1 means freely.
    Blocks meeting the free boundary (d0 arcs or annulus sites) carry no
    constraint; over a non-orientable base sliding a boundary circle round a
    crosscap changes the sum by 2, and a fibre with 2*beta = alpha absorbs the
    remaining parity.
    """
    base = p.base
    if any(a.tag != TORUS_ARC for c in base.circles for a in c):
        return FREE_TWIST
    if base.orientable:
        return EXACT
    norm = normalize_invariants(SeifertData.of(p))
    if any(2 * f.beta == f.alpha for f in norm.fibres):
        return FREE_TWIST
    return MOD2
