"""Test infinite paths, res / ind and cylinder sets."""

import itertools

import pytest

from conduche.exceptions import IncoherentOracle, NoSplittingFound, PathNotInCylinder, PathSpaceNotFinite
from conduche.kgraph import build_kgraph
from conduche.paths import (
    CylinderSet,
    PathOracle,
    aperiodicity_scan,
    canonical_splitting,
    cylinder_intersection,
    enumerate_paths,
    eval_path_morphism,
    oracle_from_spec,
    partition_by_lifts,
    path_equal,
    res,
    staircase_block,
    verify_restrict_induce,
)

from .samples import ONE_GRAPHS


def test_constant_path_values(o2):
    x = oracle_from_spec(o2, "constant:e1")

    assert x.target == "v"
    assert o2.domain.format(x((3,))) == "e1.e1.e1"
    head, tail = eval_path_morphism(x, (1,), (2,))
    assert o2.domain.format(head) == "e1"
    assert o2.domain.format(tail) == "e1.e1"


def test_staircase_order():
    blocks = ["m1", "m2"]

    assert [staircase_block(i, blocks) for i in range(9)] == [
        "m1", "m2", "m1", "m2", "m2", "m1", "m2", "m2", "m2"
    ]


@pytest.mark.parametrize("spec", ["staircase:e1", "constant:e1,e2", "spiral:e1", "periodic:", "min"])
def test_bad_oracle_specs(o2, spec: str):
    with pytest.raises(ValueError):
        oracle_from_spec(o2, spec)


def test_canonical_path_uses_min_chooser(o2, two_graph):
    x = canonical_splitting(o2, "v", depth=3)
    assert o2.domain.format(x((2,))) == "e1.e1"
    assert x.certified_depth == 3

    y = canonical_splitting(two_graph, "v", depth=2)
    assert two_graph(y((2, 1))) == (2, 1)


def test_source_vertex_has_no_path():
    vertices, edges = ONE_GRAPHS["source vertex"]
    _, degree = build_kgraph(vertices, edges)

    with pytest.raises(NoSplittingFound):
        canonical_splitting(degree, "u", depth=2)


def test_oracle_must_lie_over_its_argument(o2):
    E = o2.domain
    x = PathOracle(o2, "v", lambda b: E.parse("e1"))

    with pytest.raises(IncoherentOracle) as excinfo:
        x((2,))
    assert excinfo.value.payload["value"] == "e1"


def test_oracle_must_be_coherent(o2):
    E = o2.domain
    values = {(1,): E.parse("e1"), (2,): E.parse("e2.e2")}
    x = PathOracle(o2, "v", values.__getitem__)

    x((1,))
    with pytest.raises(IncoherentOracle):
        x((2,))


def test_path_equal_reports_first_difference(o2):
    constant = oracle_from_spec(o2, "constant:e1")
    periodic = oracle_from_spec(o2, "periodic:e1,e2")

    comparison = path_equal(constant, periodic, depth=3)
    assert comparison.to_dict() == {"equal": False, "depth": 3, "distinguished_at": "2"}
    assert path_equal(constant, oracle_from_spec(o2, "min", "v"), depth=3).equal


def test_res_strips_a_prefix(o2):
    E = o2.domain
    x = oracle_from_spec(o2, "periodic:e1,e2")

    y = res(o2, E.parse("e1"), x)
    assert E.format(y((2,))) == "e2.e1"
    with pytest.raises(PathNotInCylinder):
        res(o2, E.parse("e2"), x)


def test_restrict_induce_on_o2(o2, rng):
    E = o2.domain
    short = E.morphisms(2)

    for _ in range(20):
        word = ",".join(rng.choice(["e1", "e2"]) for _ in range(rng.randint(1, 3)))
        x = oracle_from_spec(o2, f"periodic:{word}")
        nu = x((rng.randint(0, 2),))
        mu = rng.choice(short)
        report = verify_restrict_induce(o2, mu, nu, x, depth=3)
        assert report.passed, (E.format(mu), E.format(nu), word)
        assert len(report.checks) == 6
        assert all(check.depth == 3 for check in report.checks)


def test_restrict_induce_on_two_graph(two_graph, rng):
    E = two_graph.domain
    short = E.morphisms(1)
    squares = [E.format(p) for p in E.paths_of_degree("v", (1, 1))]
    degrees = [(0, 0), (1, 0), (0, 1), (1, 1)]

    x = canonical_splitting(two_graph, "v", depth=2)
    assert verify_restrict_induce(two_graph, E.parse("e2"), x((1, 0)), x, depth=2).passed
    for _ in range(20):
        word = ",".join(rng.choice(squares) for _ in range(rng.randint(1, 2)))
        x = oracle_from_spec(two_graph, f"periodic:{word}")
        nu = x(rng.choice(degrees))
        mu = rng.choice(short)
        report = verify_restrict_induce(two_graph, mu, nu, x, depth=2)
        assert report.passed, (E.format(mu), E.format(nu), word)


def test_restrict_induce_on_a_group(s3):
    x = canonical_splitting(s3, "*")
    elements = s3.domain.morphisms()

    for mu, nu in itertools.product(elements, repeat=2):
        report = verify_restrict_induce(s3, mu, nu, x)
        assert report.passed, (mu, nu)
        assert all(check.exhaustive for check in report.checks)


def test_restrict_induce_needs_the_cylinder(o2):
    E = o2.domain
    x = oracle_from_spec(o2, "constant:e1")

    with pytest.raises(PathNotInCylinder):
        verify_restrict_induce(o2, E.parse("e1"), E.parse("e2"), x)


def test_paths_over_finite_bases(z3, chain_sections):
    assert len(enumerate_paths(z3, "*")) == 1

    paths = enumerate_paths(chain_sections, "c:t")
    assert len(paths) == 1
    assert paths[0]("a<=c") == "a:s<=c:t"
    assert paths[0]("b<=c") == "b:t<=c:t"


def test_paths_over_infinite_bases_are_not_enumerated(o2):
    with pytest.raises(PathSpaceNotFinite):
        enumerate_paths(o2, "v")


def test_constant_path_is_periodic(o2):
    witness = aperiodicity_scan(o2, oracle_from_spec(o2, "constant:e1"), depth=1)

    assert witness is not None
    assert witness.to_dict() == {"later": "e1", "earlier": "v", "depth": 1}


def test_staircase_path_shows_no_period(o2):
    x = oracle_from_spec(o2, "staircase:e1,e2")

    assert aperiodicity_scan(o2, x, depth=6) is None


def test_lifts_partition_a_cylinder(o2):
    cells = partition_by_lifts(o2, "v", (2,))
    x = oracle_from_spec(o2, "periodic:e2,e1")

    assert [cell.format() for cell in cells] == ["Z(e1.e1)", "Z(e1.e2)", "Z(e2.e1)", "Z(e2.e2)"]
    assert [cell.format() for cell in cells if cell.contains(x)] == ["Z(e2.e1)"]
    assert CylinderSet.of_object(o2, "v").contains(x)


def passes_through(cat, degree, path, alpha) -> bool:
    rest = (degree(path)[0] - degree(alpha)[0],)
    if rest[0] < 0:
        return False
    return any(cat.compose(alpha, t) == path for t in cat.paths_of_degree(cat.source(alpha), rest))


@pytest.mark.parametrize("name", sorted(ONE_GRAPHS))
def test_cylinder_intersection_matches_brute_force(name: str):
    vertices, edges = ONE_GRAPHS[name]
    cat, degree = build_kgraph(vertices, edges)
    short = cat.morphisms(2)

    for alpha, beta in itertools.product(short, repeat=2):
        cells = cylinder_intersection(degree, alpha, beta)
        if cat.target(alpha) != cat.target(beta):
            assert cells == []
            continue
        for n in range(6):
            for path in cat.paths_of_degree(cat.target(alpha), (n,)):
                inside = [mu for mu in cells if passes_through(cat, degree, path, mu)]
                assert len(inside) <= 1
                if n < 2:
                    continue
                expected = passes_through(cat, degree, path, alpha) and passes_through(cat, degree, path, beta)
                assert bool(inside) == expected, (cat.format(alpha), cat.format(beta), cat.format(path))


def test_cylinder_intersection_in_o2(o2):
    E = o2.domain

    cells = cylinder_intersection(o2, E.parse("e1"), E.parse("e1.e2"))
    assert [E.format(mu) for mu in cells] == ["e1.e2"]
    assert cylinder_intersection(o2, E.parse("e1"), E.parse("e2")) == []


@pytest.mark.parametrize("name,target", [("o2", "v"), ("two_graph", "v"), ("z3", "*"), ("s3", "*")])
def test_restrict_induce_does_not_depend_on_the_completion(request, shifted_completer, name: str, target: str):
    F = request.getfixturevalue(name)
    E, B = F.domain, F.codomain
    alt = shifted_completer(B)
    x = canonical_splitting(F, target, depth=2)

    for b in B.morphisms_into(F.obj(target), 1):
        nu = x(b)
        for mu in E.morphisms(1):
            if E.source(mu) != E.source(nu):
                continue
            report = verify_restrict_induce(F, mu, nu, x, depth=2, completer=alt)
            assert report.passed, (E.format(mu), E.format(nu))
