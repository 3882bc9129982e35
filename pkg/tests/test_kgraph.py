"""Test k-graph construction, normal forms and the factorization gate."""

import copy

import pytest

from conduche.bundle import load_bundle
from conduche.category import NkMonoid
from conduche.exceptions import DanglingEdge, InconsistentSquares, NoLift, NotComposable
from conduche.fibration import check_dcf
from conduche.kgraph import KPath, build_kgraph

from .samples import ONE_GRAPHS, TWO_GRAPH_EDGES, TWO_GRAPH_SQUARES


def build_two_graph(squares: list[list[str]] = TWO_GRAPH_SQUARES, strict: bool = True):
    return build_kgraph(["v"], TWO_GRAPH_EDGES, squares, k=2, strict=strict)


def test_paths_are_stored_in_normal_form():
    cat, degree = build_two_graph()

    path = cat.parse("e1.f1")
    assert path == KPath("v", ("f2", "e2"))
    assert cat.format(path) == "f2.e2"
    assert degree(path) == (1, 1)
    assert cat.compose(cat.parse("e1"), cat.parse("f1")) == path


def test_paths_of_degree_count():
    cat, _ = build_two_graph()

    assert len(cat.paths_of_degree("v", (1, 1))) == 4
    assert len(cat.paths_of_degree("v", (2, 1))) == 8
    assert cat.paths_of_degree("v", (0, 0)) == [KPath("v")]


def test_factor_moves_edges_by_squares():
    cat, _ = build_two_graph()

    head, tail = cat.factor(cat.parse("f2.e2"), [(0, 1), (1, 0)])
    assert head == cat.parse("e1")
    assert tail == cat.parse("f1")
    with pytest.raises(NoLift):
        cat.factor(cat.parse("f2.e2"), [(1, 1), (1, 0)])


def test_degree_functor_flags():
    _, degree = build_two_graph()

    assert isinstance(degree.codomain, NkMonoid)
    assert degree.flags.dcf is True
    assert degree.flags.strongly_surjective is True
    assert degree.flags.is_kp


def test_bundled_two_graph_passes_dcf_gate(two_graph):
    assert check_dcf(two_graph, depth=2) is None


@pytest.mark.parametrize("square", range(4))
@pytest.mark.parametrize("entry", range(4))
def test_corrupted_square_is_caught(square: int, entry: int):
    corrupted = copy.deepcopy(TWO_GRAPH_SQUARES)
    other = {"e1": "e2", "e2": "e1", "f1": "f2", "f2": "f1"}
    corrupted[square][entry] = other[corrupted[square][entry]]

    with pytest.raises(InconsistentSquares):
        build_two_graph(corrupted)

    _, degree = build_two_graph(corrupted, strict=False)
    counterexample = check_dcf(degree, depth=2)
    assert counterexample is not None
    assert counterexample.lifts != 1


def test_broken_bundle_reports_counterexample():
    F = load_bundle("catalog:broken_two_graph").fibration
    counterexample = check_dcf(F, depth=1)

    assert counterexample is not None
    assert set(counterexample.to_dict()) == {"phi", "left", "right", "lifts"}


def test_square_with_one_colour_is_rejected():
    with pytest.raises(InconsistentSquares):
        build_kgraph(["v"], TWO_GRAPH_EDGES, [["e1", "e2", "e2", "e1"]], k=2)


def test_missing_squares_are_rejected():
    with pytest.raises(InconsistentSquares) as excinfo:
        build_kgraph(["v"], TWO_GRAPH_EDGES, TWO_GRAPH_SQUARES[:3], k=2)
    assert "missing" in excinfo.value.payload or "uncovered" in excinfo.value.payload


@pytest.mark.parametrize(
    "edges,squares",
    [
        ([{"id": "a", "src": "v", "tgt": "w"}], []),
        ([{"id": "a", "src": "v", "tgt": "v"}], [["a", "b", "c", "d"]]),
        ([{"id": "a", "src": "v", "tgt": "v"}, {"id": "a", "src": "v", "tgt": "v"}], []),
    ],
)
def test_dangling_references(edges: list[dict], squares: list[list[str]]):
    with pytest.raises(DanglingEdge):
        build_kgraph(["v"], edges, squares)


def test_one_graph_composition():
    vertices, edges = ONE_GRAPHS["cycle with a loop"]
    cat, degree = build_kgraph(vertices, edges)

    ab = cat.parse("a.b")
    assert cat.source(ab) == "v"
    assert cat.target(ab) == "v"
    assert degree(ab) == (2,)
    with pytest.raises(NotComposable):
        cat.parse("a.a")


def test_source_vertex_breaks_strong_surjectivity():
    vertices, edges = ONE_GRAPHS["source vertex"]
    _, degree = build_kgraph(vertices, edges)

    assert degree.flags.strongly_surjective is False
    assert degree.flags.locally_split is None
