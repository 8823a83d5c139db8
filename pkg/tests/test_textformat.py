import random

import pytest
from hypothesis import given, settings, strategies as st

from conftest import DATA, load
from jsjcalc.core import validate
from jsjcalc.normalize import w_to_jsj
from jsjcalc.oracle import EnumerationBounds, enumerate_graphs
from jsjcalc.textformat import ParseError, parse, serialize

GOLDEN = sorted(DATA.rglob("*.jsjg"))
SMALL = list(enumerate_graphs(EnumerationBounds(max_pieces=2, max_total_fibres=1,
                                                max_total_genus=1)))


@pytest.mark.parametrize("path", GOLDEN, ids=lambda p: p.name)
def test_golden_files_round_trip_byte_exact(path):
    text = path.read_text(encoding="utf-8")
    g = parse(text)
    assert serialize(g) == text
    assert parse(serialize(g)) == g


def test_fig2_pair_document():
    g = load("fig8_2_pair_w.jsjg")
    assert len(g.pieces) == 2 and len(g.edges) == 2
    assert [e.kind for e in g.edges.values()] == ["annulus", "torus"]


def test_witness_survives_round_trip():
    j = w_to_jsj(load("fig8_2_pair_w.jsjg"))
    back = parse(serialize(j))
    (p,) = back.pieces.values()
    assert p.witness is not None and p.witness == next(iter(j.pieces.values())).witness


def test_single_piece_is_two_lines():
    g = load("exceptional/circle_bundle_over_torus.jsjg")
    lines = [ln for ln in serialize(g).splitlines() if ln and not ln.startswith("#")]
    assert len(lines) == 2


def test_comments_and_blank_lines_are_ignored():
    text = (DATA / "fig8_2_pair_w.jsjg").read_text()
    noisy = "# header comment\n\n" + text.replace("\n", "\n\n", 1) + "# trailing\n"
    assert parse(noisy) == parse(text)


@pytest.mark.parametrize("text,message,line", [
    ("", "missing manifold header", 1),
    ("# only a comment\n", "missing manifold header", 1),
    ("manifold x kind=q\n", "unknown graph kind", 1),
    ("manifold x kind=w\npiece P seifert base=or:1 circles= b=0 fibres= foo=1\n",
     "unknown key", 2),
    ("manifold x kind=w\npiece P seifert base=or:1 circles= b=zz fibres=\n",
     "expected an integer", 2),
    ("manifold x kind=w\npiece P seifert base=or:1 circles= b=0 fibres=\n"
     "piece P seifert base=or:1 circles= b=0 fibres=\n", "duplicate piece id", 3),
    ("manifold x kind=w\npiece P seifert base=or:0 circles=d0,a:x b=0 fibres=(2,1)\n"
     "edge E annulus P.x Q.y flip=0\n", "unknown piece", 3),
    ("manifold x kind=w\npiece P seifert base=or:0 circles=d0,a:x b=0 fibres=(2,1)\n"
     "edge E annulus P.x P.y flip=0\n", "absent site", 3),
])
def test_diagnostics_carry_positions(text, message, line):
    with pytest.raises(ParseError) as info:
        parse(text)
    assert message in str(info.value)
    assert info.value.line == line and info.value.column >= 1


@settings(max_examples=200)
@given(st.text(alphabet="manifoldpiecedgsrt=:;,.()-0123456789 \n#", max_size=200))
def test_parser_never_fails_without_position(text):
    try:
        parse(text)
    except ParseError as exc:
        assert exc.line >= 1 and exc.column >= 1


@given(st.integers(0, len(SMALL) - 1))
def test_census_round_trip(i):
    g = SMALL[i]
    text = serialize(g)
    h = parse(text)
    assert h == g and serialize(h) == text
    assert validate(h) == validate(g)


def test_serialization_is_deterministic_under_reordering():
    rnd = random.Random(0)
    for g in SMALL[:100]:
        pieces = list(g.pieces.items())
        edges = list(g.edges.items())
        rnd.shuffle(pieces)
        rnd.shuffle(edges)
        shuffled = type(g)(dict(pieces), dict(edges), g.kind, g.name)
        assert serialize(shuffled) == serialize(g)
