import random

import pytest
from hypothesis import given, strategies as st

from jsjcalc.core import (
    ANNULUS, ANNULUS_ARC, D0, FREE, KIND_JSJ, TORUS, TORUS_ARC, Arc, BaseSurface,
    DecompositionGraph, Edge, GluingError, GraphError, IBundleBlock, SeifertBlock,
    SimpleBlock, boundary_euler_characteristic, det, glue_base_arcs, matinv, matmul,
    validate,
)
from jsjcalc.oracle import core_invariants, glued_invariants

A = lambda s: Arc(ANNULUS_ARC, s)  # noqa: E731
T = lambda s: Arc(TORUS_ARC, s)  # noqa: E731


def test_euler_characteristic_formula():
    assert BaseSurface(True, 0).euler_characteristic == 2
    assert BaseSurface(True, 1, ((FREE,),)).euler_characteristic == -1
    assert BaseSurface(False, 1).euler_characteristic == 1
    assert BaseSurface(False, 2, ((FREE,), (FREE,))).euler_characteristic == -2


def test_surface_problems():
    assert BaseSurface(False, 0).problems()
    assert BaseSurface(True, 0, ((T("x"), FREE),)).problems()
    assert BaseSurface(True, 0, ((A("x"), A("x")),)).problems()
    assert BaseSurface(True, 0, ((FREE, FREE, A("x")),)).problems()
    assert not BaseSurface(True, 0, ((A("x"), A("y")),)).problems()


def test_single_seifert_block_is_valid():
    base = BaseSurface(True, 1, ((FREE,),))
    g = DecompositionGraph({"P": SeifertBlock(base)}, {})
    assert validate(g) == []


def test_adjacent_ibundles_rejected():
    pants = BaseSurface(True, 0, ((A("x"),), (FREE,), (FREE,)))
    g = DecompositionGraph({"P": IBundleBlock(pants), "Q": IBundleBlock(pants)},
                           {"E": Edge(ANNULUS, ("P", "x"), ("Q", "x"))})
    assert "edge E: adjacent I-bundles" in validate(g)


def test_matched_annulus_in_jsj_graph_rejected():
    fig2 = SeifertBlock(BaseSurface(True, 0, ((T("t"),), (FREE, A("x")))))
    g = DecompositionGraph({"A": fig2, "B": fig2},
                           {"E": Edge(ANNULUS, ("A", "x"), ("B", "x")),
                            "F": Edge(TORUS, ("A", "t"), ("B", "t"), matrix=(0, 1, 1, 0))},
                           KIND_JSJ)
    assert "edge E: matched annulus in JSJ graph" in validate(g)


def test_dangling_and_disconnected():
    fig4 = SeifertBlock(BaseSurface(True, 0, ((FREE, A("x")),)), 0, ((2, 1),))
    g = DecompositionGraph({"A": fig4}, {})
    assert any("x" in v for v in validate(g))
    h = DecompositionGraph({"A": SeifertBlock(BaseSurface(True, 1)),
                            "B": SeifertBlock(BaseSurface(True, 1))}, {})
    assert "graph is not connected" in validate(h)


def test_torus_edge_with_matching_fibres_rejected():
    tor = SeifertBlock(BaseSurface(True, 1, ((T("t"),),)))
    g = DecompositionGraph({"A": tor, "B": tor},
                           {"E": Edge(TORUS, ("A", "t"), ("B", "t"), matrix=(1, 0, 0, 1))})
    assert "edge E: fibrations match across a torus" in validate(g)
    g2 = DecompositionGraph({"A": tor, "B": tor},
                            {"E": Edge(TORUS, ("A", "t"), ("B", "t"), matrix=(0, 1, 1, 0))})
    assert validate(g2) == []


def test_simple_annular_boundary_forces_special():
    g = DecompositionGraph({"A": SimpleBlock((("annulus", "x"),), 0, "ss"),
                            "B": SimpleBlock((("annulus", "x"),), 0, "ss")},
                           {"E": Edge(ANNULUS, ("A", "x"), ("B", "x"))})
    assert validate(g)


def test_boundary_euler_characteristic():
    g = DecompositionGraph({"P": SeifertBlock(BaseSurface(True, 1, ((FREE,),)))}, {})
    assert boundary_euler_characteristic(g) == 0
    pants = BaseSurface(True, 0, ((FREE,), (FREE,), (FREE,)))
    assert boundary_euler_characteristic(DecompositionGraph({"P": IBundleBlock(pants)}, {})) == -2
    tor = SeifertBlock(BaseSurface(True, 1, ((T("t"),),)))
    g = DecompositionGraph({"A": tor, "B": tor},
                           {"E": Edge(TORUS, ("A", "t"), ("B", "t"), matrix=(0, 1, 1, 0))})
    assert boundary_euler_characteristic(g) == 0


def test_boundary_euler_characteristic_refuses_invalid():
    with pytest.raises(GraphError):
        boundary_euler_characteristic(DecompositionGraph({}, {}))


def test_glue_two_disks():
    d1 = BaseSurface(True, 0, ((FREE, A("x")),))
    d2 = BaseSurface(True, 0, ((FREE, A("y")),))
    out = glue_base_arcs(d1, "x", d2, "y")
    assert (out.orientable, out.genus, out.circles) == (True, 0, ((FREE,),))


def test_glue_two_annuli_gives_pants():
    a1 = BaseSurface(True, 0, ((T("t1"),), (FREE, A("x"))))
    a2 = BaseSurface(True, 0, ((T("t2"),), (FREE, A("y"))))
    out = glue_base_arcs(a1, "x", a2, "y")
    assert out.euler_characteristic == -1 and out.orientable
    assert sorted(tuple(a.tag for a in c) for c in out.circles) == [(D0,), (TORUS_ARC,), (TORUS_ARC,)]


def test_hexagon_self_gluing_reversing_is_mobius():
    hexagon = BaseSurface(True, 0, ((A("x"), FREE, A("y"), FREE, A("z"), FREE),))
    out = glue_base_arcs(hexagon, "x", None, "y", reversing=True)
    assert out.euler_characteristic == 0 and not out.orientable
    assert len(out.circles) == 1
    out = glue_base_arcs(hexagon, "x", None, "y", reversing=False)
    assert out.euler_characteristic == 0 and out.orientable and len(out.circles) == 2


def test_glue_rejects_non_annulus_sites():
    d = BaseSurface(True, 0, ((T("t"),),))
    with pytest.raises(GluingError):
        glue_base_arcs(d, "t", d, "t")


def test_matrix_helpers():
    m = (2, 1, 1, 1)
    assert det(m) == 1
    assert matmul(m, matinv(m)) == (1, 0, 0, 1)
    n = (1, 0, 0, -1)
    assert matmul(n, matinv(n)) == (1, 0, 0, 1)


# --- properties ----------------------------------------------------------------

@st.composite
def surfaces(draw, prefix):
    orientable = draw(st.booleans())
    genus = draw(st.integers(0 if orientable else 1, 2))
    ncirc = draw(st.integers(1, 3))
    counter = iter(range(100))
    circles = []
    for _ in range(ncirc):
        kinds = draw(st.lists(st.sampled_from(["d", "a"]), min_size=1, max_size=4))
        arcs = []
        for k in kinds:
            if k == "d" and arcs and arcs[-1].tag == D0:
                continue
            arcs.append(FREE if k == "d" else A(f"{prefix}{next(counter)}"))
        if len(arcs) > 1 and arcs[0].tag == D0 and arcs[-1].tag == D0:
            arcs.pop()
        if all(a.tag == ANNULUS_ARC for a in arcs) and len(arcs) == 1:
            arcs.append(FREE)  # a lone annulus arc would be a whole torus
        circles.append(tuple(arcs))
    return BaseSurface(orientable, genus, tuple(circles))


@given(surfaces("a"), surfaces("b"), st.booleans(), st.randoms(use_true_random=False))
def test_chi_additivity_and_cell_oracle(s1, s2, reversing, rnd):
    sites1, sites2 = list(s1.sites()), list(s2.sites())
    if not sites1 or not sites2:
        return
    x, y = rnd.choice(sites1), rnd.choice(sites2)
    out = glue_base_arcs(s1, x, s2, y, reversing)
    assert out.euler_characteristic == s1.euler_characteristic + s2.euler_characteristic - 1
    assert core_invariants(out) == glued_invariants(s1, x, s2, y, reversing)


@given(surfaces("a"), st.booleans(), st.randoms(use_true_random=False))
def test_self_gluing_chi_and_cell_oracle(s, reversing, rnd):
    sites = list(s.sites())
    if len(sites) < 2:
        return
    x, y = rnd.sample(sites, 2)
    try:
        out = glue_base_arcs(s, x, None, y, reversing)
    except GluingError:
        # only when the result would keep an arc-free boundary circle
        return
    assert out.euler_characteristic == s.euler_characteristic - 1
    assert core_invariants(out) == glued_invariants(s, x, None, y, reversing)


def _shuffled(g, rnd):
    pieces = list(g.pieces.items())
    edges = list(g.edges.items())
    rnd.shuffle(pieces)
    rnd.shuffle(edges)
    return DecompositionGraph(dict(pieces), dict(edges), g.kind, g.name)


@given(st.randoms(use_true_random=False))
def test_validate_order_insensitive_and_idempotent(rnd):
    fig4 = SeifertBlock(BaseSurface(True, 0, ((FREE, A("x")),)), 0, ((2, 1),))
    pants = BaseSurface(True, 0, ((A("x"),), (A("y"),), (FREE,)))
    graphs = [
        DecompositionGraph({"A": IBundleBlock(pants), "B": IBundleBlock(pants), "C": fig4},
                           {"E": Edge(ANNULUS, ("A", "x"), ("B", "x")),
                            "F": Edge(ANNULUS, ("A", "y"), ("C", "x"))}),
        DecompositionGraph({"A": fig4, "B": fig4, "C": SimpleBlock((("annulus", "q"),), -2)},
                           {"E": Edge(ANNULUS, ("A", "x"), ("B", "x"))}),
    ]
    for g in graphs:
        report = validate(g)
        assert validate(_shuffled(g, rnd)) == report == validate(g)


def test_seifert_only_graphs_have_toral_boundary():
    rnd = random.Random(5)
    for _ in range(20):
        genus = rnd.randint(0, 2)
        tor = SeifertBlock(BaseSurface(True, genus, ((T("t"),), (FREE,))))
        other = SeifertBlock(BaseSurface(False, 2 + genus, ((T("t"),),)))
        g = DecompositionGraph({"A": tor, "B": other},
                               {"E": Edge(TORUS, ("A", "t"), ("B", "t"), matrix=(0, 1, 1, 0))})
        assert boundary_euler_characteristic(g) == 0
