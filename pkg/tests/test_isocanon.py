import random

import pytest
from hypothesis import given, settings, strategies as st

from moves import random_move
from jsjcalc.core import (
    ANNULUS, ANNULUS_ARC, FREE, TORUS, TORUS_ARC, Arc, BaseSurface, DecompositionGraph, Edge,
    IBundleBlock, SeifertBlock, SimpleBlock,
)
from jsjcalc.isocanon import (
    canonical_form, collapse_alternates, isomorphic, relabel, shift_fibre, swap_alternate,
)
from jsjcalc.normalize import w_to_jsj
from jsjcalc.oracle import EnumerationBounds, enumerate_graphs, oracle_isomorphic

A = lambda s: Arc(ANNULUS_ARC, s)  # noqa: E731
T = lambda s: Arc(TORUS_ARC, s)  # noqa: E731

CENSUS = list(enumerate_graphs(EnumerationBounds(max_pieces=2, max_total_fibres=1,
                                                 max_total_genus=1)))
SIMPLE_A = SimpleBlock((("annulus", "q"),), -2, "ss")


def test_relabelled_copy_has_same_encoding():
    g = CENSUS[-1]
    h = relabel(g, {p: p + "x" for p in g.pieces}, {}, {e: "Z" + e for e in g.edges})
    assert canonical_form(g) == canonical_form(h)
    assert canonical_form(g).hex() == canonical_form(h).hex()


def test_unnormalized_decorations_collapse():
    disk = BaseSurface(True, 0, ((FREE, A("x")),))
    g1 = DecompositionGraph({"D": SeifertBlock(disk, 0, ((2, -1),)), "S": SIMPLE_A},
                            {"E": Edge(ANNULUS, ("D", "x"), ("S", "q"))})
    g2 = DecompositionGraph({"D": SeifertBlock(disk, 0, ((2, 1),)), "S": SIMPLE_A},
                            {"E": Edge(ANNULUS, ("D", "x"), ("S", "q"))})
    assert isomorphic(g1, g2)
    sphere = lambda b, fs: DecompositionGraph({"P": SeifertBlock(BaseSurface(True, 0), b, fs)}, {})  # noqa: E731
    assert isomorphic(sphere(0, ((2, -1), (3, 1))), sphere(-1, ((2, 1), (3, 1))))


def test_claim_alternative_collapses():
    mob = IBundleBlock(BaseSurface(False, 1, ((A("x"),),)), True)
    g = DecompositionGraph({"M": mob, "S": SIMPLE_A}, {"E": Edge(ANNULUS, ("M", "x"), ("S", "q"))})
    h = swap_alternate(g, "M")
    assert isinstance(h.pieces["M"], SeifertBlock)
    assert canonical_form(g) == canonical_form(h)
    assert isinstance(collapse_alternates(g).pieces["M"], SeifertBlock)


def test_klein_pair_collapses_with_framing():
    disk = SeifertBlock(BaseSurface(True, 0, ((T("t"),),)), 0, ((2, 1), (2, 1)))
    other = SimpleBlock((("torus", "q"),), -2, "ss")
    g = DecompositionGraph({"K": disk, "S": other},
                           {"E": Edge(TORUS, ("K", "t"), ("S", "q"), matrix=(1, 0, 1, 1))})
    assert isomorphic(g, swap_alternate(g, "K"))


def test_identity_and_distinct_fibre():
    g = CENSUS[10]
    assert isomorphic(g, g)
    disk = lambda f: SeifertBlock(BaseSurface(True, 0, ((FREE, A("x")),)), 0, (f,))  # noqa: E731
    g1 = DecompositionGraph({"D": disk((3, 1)), "S": SIMPLE_A}, {"E": Edge(ANNULUS, ("D", "x"), ("S", "q"))})
    g2 = DecompositionGraph({"D": disk((3, 2)), "S": SIMPLE_A}, {"E": Edge(ANNULUS, ("D", "x"), ("S", "q"))})
    # (3,2) is the mirror image of (3,1) and the mirror is in the move set
    assert isomorphic(g1, g2) and oracle_isomorphic(g1, g2)
    g3 = DecompositionGraph({"D": disk((2, 1)), "S": SIMPLE_A}, {"E": Edge(ANNULUS, ("D", "x"), ("S", "q"))})
    assert not isomorphic(g1, g3) and not oracle_isomorphic(g1, g3)


def test_deletion_orders_isomorphic():
    fig2 = SeifertBlock(BaseSurface(True, 0, ((T("t"),), (FREE, A("x")))))
    fig4 = SeifertBlock(BaseSurface(True, 0, ((FREE, A("x")),)), 0, ((3, 1),))
    g = DecompositionGraph({"A": fig2, "B": fig2, "C": fig4, "D": fig4},
                           {"E": Edge(ANNULUS, ("A", "x"), ("C", "x")),
                            "G": Edge(ANNULUS, ("B", "x"), ("D", "x"), 1),
                            "F": Edge(TORUS, ("A", "t"), ("B", "t"), matrix=(0, 1, 1, 0))})
    assert isomorphic(w_to_jsj(g, ["E", "G"]), w_to_jsj(g, ["G", "E"]))


def test_fibre_shift_on_closed_piece():
    g = DecompositionGraph({"P": SeifertBlock(BaseSurface(True, 0), 0, ((2, 1), (3, 1), (5, 1)))}, {})
    assert isomorphic(g, shift_fibre(g, "P", 1, 2))


def test_canonical_form_is_deterministic():
    for g in CENSUS[:50]:
        assert canonical_form(g) == canonical_form(g)


def test_census_encodings_are_pairwise_distinct():
    forms = [canonical_form(g) for g in CENSUS]
    assert len(set(forms)) == len(CENSUS)


@settings(max_examples=300)
@given(st.integers(0, len(CENSUS) - 1), st.randoms(use_true_random=False))
def test_every_generator_preserves_the_encoding(i, rnd):
    g = CENSUS[i]
    form = canonical_form(g)
    name, h = random_move(g, rnd)
    assert canonical_form(h) == form, name


@settings(max_examples=100)
@given(st.integers(0, len(CENSUS) - 1), st.integers(0, len(CENSUS) - 1),
       st.randoms(use_true_random=False))
def test_equivalence_relation(i, j, rnd):
    g, h = CENSUS[i], CENSUS[j]
    g2 = g
    for _ in range(3):
        _, g2 = random_move(g2, rnd)
    assert isomorphic(g, g2) and isomorphic(g2, g)
    assert isomorphic(g, h) == isomorphic(h, g) == (i == j)
    assert isomorphic(g2, h) == (i == j)


@pytest.mark.parametrize("seed", range(5))
def test_agrees_with_oracle_on_moved_pairs(seed):
    rnd = random.Random(seed)
    for g in rnd.sample(CENSUS, 40):
        h = g
        for _ in range(4):
            _, h = random_move(h, rnd)
        other = rnd.choice(CENSUS)
        assert isomorphic(g, h) and oracle_isomorphic(g, h)
        assert isomorphic(g, other) == oracle_isomorphic(g, other)
