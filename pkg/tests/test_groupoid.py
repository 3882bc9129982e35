"""Test cell arithmetic, convolution and germs."""

import itertools

import pytest

from conduche.bundle import load_fibration
from conduche.exceptions import NotASpan, NotComposable, OrbitBudgetExceeded, PathSpaceNotFinite
from conduche.groupoid import (
    GermBasisSet,
    GermElement,
    GroupoidFunction,
    basis_inclusion,
    check_etale,
    enumerate_germs,
    equal_germ,
    germ_lag,
    germ_of_morphism,
    germ_range,
    intersect_basis,
    invert_basis,
    invert_germ,
    multiply_germs,
    product_basis,
    refine_cell,
    regular_representation,
)
from conduche.paths import enumerate_paths, oracle_from_spec
from conduche.report import Inclusion, Verdict

from .samples import IDEMPOTENT_FIBRATION


def cell(F, mu: str, nu: str) -> GermBasisSet:
    E = F.domain
    return GermBasisSet(F, E.parse(mu), E.parse(nu))


def formatted(cells: list[GermBasisSet]) -> list[str]:
    return [c.format() for c in cells]


@pytest.mark.parametrize("name,size,units,products", [("z2", 2, 1, 4), ("z3", 3, 1, 9), ("pair_groupoid", 9, 3, 27)])
def test_germs_recover_the_groupoid(request, name: str, size: int, units: int, products: int):
    F = request.getfixturevalue(name)
    E = F.domain
    groupoid = enumerate_germs(F)

    def phi(i: int):
        g = groupoid.germs[i]
        return E.compose(g.mu, E.inverse(g.nu))

    assert len(groupoid.germs) == size
    assert len(groupoid.units) == units
    assert len(groupoid.products) == products
    assert sorted(phi(i) for i in range(size)) == sorted(E.morphisms())
    for (i, j), k in groupoid.products.items():
        assert phi(k) == E.compose(phi(i), phi(j))
    for i, k in groupoid.inverses.items():
        assert phi(k) == E.inverse(phi(i))


def test_germ_table_of_s3(s3):
    E = s3.domain
    groupoid = enumerate_germs(s3)

    def phi(i: int):
        g = groupoid.germs[i]
        return E.compose(g.mu, E.inverse(g.nu))

    assert len(groupoid.germs) == 6
    assert all(phi(k) == E.compose(phi(i), phi(j)) for (i, j), k in groupoid.products.items())
    assert groupoid.to_dict()["units"] == [0]


def test_germs_need_a_finite_path_space(o2):
    with pytest.raises(PathSpaceNotFinite):
        enumerate_germs(o2)


def test_cell_needs_a_span(pair_groupoid):
    with pytest.raises(NotASpan):
        GermBasisSet(pair_groupoid, "x<-y", "x<-z")


def test_cell_inverse_and_refinement(o2):
    c = cell(o2, "e1", "v")

    assert invert_basis(c).format() == "Z(v,e1)"
    assert formatted(refine_cell(c, (1,))) == ["Z(e1.e1,e1)", "Z(e1.e2,e2)"]
    assert check_etale(c, (2,)).passed


def test_basis_inclusion(o2):
    outer = cell(o2, "e1", "v")

    assert basis_inclusion(cell(o2, "e1.e2", "e2"), outer) is Inclusion.SUBSET
    assert basis_inclusion(cell(o2, "e2", "v"), outer) is Inclusion.DISJOINT
    assert basis_inclusion(outer, cell(o2, "e1.e2", "e2")) is Inclusion.UNKNOWN


def test_intersection_of_cells(o2):
    assert formatted(intersect_basis(cell(o2, "e1", "v"), cell(o2, "e1.e2", "e2"))) == ["Z(e1.e2,e2)"]
    assert intersect_basis(cell(o2, "e1", "v"), cell(o2, "v", "e1")) == []


def test_product_of_cells(o2):
    assert formatted(product_basis(cell(o2, "e1", "v"), cell(o2, "v", "e2"))) == ["Z(e1,e2)"]
    assert formatted(product_basis(cell(o2, "v", "e1"), cell(o2, "e1.e2", "v"))) == ["Z(e2,v)"]
    assert product_basis(cell(o2, "v", "e1"), cell(o2, "e2", "v")) == []


def test_refined_cover_is_equal(o2):
    whole = GroupoidFunction(o2, {cell(o2, "v", "v"): 1})
    halves = GroupoidFunction(o2, {cell(o2, "e1", "e1"): 1, cell(o2, "e2", "e2"): 1})

    assert whole.equals(halves) is Verdict.EQUAL
    assert whole.equals(GroupoidFunction(o2, {cell(o2, "e1", "e1"): 1})) is Verdict.NOT_EQUAL
    assert (whole - halves).terms == {}


def random_function(F, cells: list[GermBasisSet], rng) -> GroupoidFunction:
    return GroupoidFunction(F, {rng.choice(cells): rng.randint(-2, 3) for _ in range(2)})


def test_convolution_is_associative(o2, rng):
    E = o2.domain
    short = E.morphisms(1)
    cells = [GermBasisSet(o2, mu, nu) for mu, nu in itertools.product(short, repeat=2)]

    for _ in range(10):
        f, g, h = (random_function(o2, cells, rng) for _ in range(3))
        assert ((f * g) * h).equals(f * (g * h)) is Verdict.EQUAL
        assert (f * g).star().equals(g.star() * f.star()) is Verdict.EQUAL


def test_unit_space_indicator_is_a_unit(o2):
    unit = GroupoidFunction.indicator(o2, GermBasisSet.unit(o2, "v"))
    f = GroupoidFunction(o2, {cell(o2, "e1.e2", "e2"): 2, cell(o2, "v", "e1"): -1})

    assert (unit * f).equals(f) is Verdict.EQUAL
    assert (f * unit).equals(f) is Verdict.EQUAL


def test_germ_inverse_and_product(o2):
    E = o2.domain
    x = oracle_from_spec(o2, "constant:e1")
    g = GermElement(E.parse("e2"), E.parse("e1"), x)

    y = germ_range(g)
    assert E.format(y((2,))) == "e2.e1"
    h = invert_germ(g)
    unit_at_y = GermElement(E.parse("v"), E.parse("v"), y)
    assert equal_germ(multiply_germs(g, h), unit_at_y).verdict is Verdict.EQUAL
    unit_at_x = GermElement(E.parse("v"), E.parse("v"), x)
    assert equal_germ(multiply_germs(h, g), unit_at_x).verdict is Verdict.EQUAL
    with pytest.raises(NotComposable):
        multiply_germs(g, g)


def test_germ_equality(o2):
    E = o2.domain
    x = oracle_from_spec(o2, "constant:e1")
    unit = GermElement(E.parse("v"), E.parse("v"), x)

    assert equal_germ(GermElement(E.parse("e1"), E.parse("e1"), x), unit).verdict is Verdict.EQUAL
    shifted = equal_germ(GermElement(E.parse("e1"), E.parse("v"), x), unit)
    assert shifted.verdict is Verdict.NOT_EQUAL
    assert shifted.conditions["common_degree"] is False
    other = GermElement(E.parse("v"), E.parse("v"), oracle_from_spec(o2, "constant:e2"))
    assert equal_germ(other, unit).to_dict()["conditions"] == {"same_path": False}


def test_germ_equality_searches_every_square_on_a_base_that_does_not_cancel():
    F = load_fibration(IDEMPOTENT_FIBRATION)
    (x,) = enumerate_paths(F, "x0")
    unit = GermElement("1x0", "1x0", x)

    assert equal_germ(GermElement("a", "1x0", x), unit).verdict is Verdict.EQUAL
    parallel = equal_germ(GermElement("c1", "1x0", x), GermElement("c2", "1x0", x))
    assert parallel.verdict is Verdict.NOT_EQUAL
    assert parallel.depth is None
    assert parallel.squares == 2
    assert parallel.conditions["same_local_map"] is False

    flagged = F.with_flags(left_cancellative=True)
    (y,) = enumerate_paths(flagged, "x0")
    shortcut = equal_germ(GermElement("c1", "1x0", y), GermElement("c2", "1x0", y))
    assert shortcut.verdict is Verdict.NOT_EQUAL
    assert shortcut.squares == 1


def test_germ_equality_is_unknown_when_the_square_search_is_bounded(o2):
    F = o2.with_flags(left_cancellative=None)
    E = F.domain
    x = oracle_from_spec(F, "constant:e1")

    result = equal_germ(GermElement(E.parse("e1"), E.parse("v"), x), GermElement(E.parse("e2"), E.parse("v"), x), 2)
    assert result.verdict is Verdict.UNKNOWN
    assert result.depth == 2
    assert result.squares == 3
    assert result.conditions["same_local_map"] is None
    y = oracle_from_spec(o2, "constant:e1")
    certified = equal_germ(GermElement(E.parse("e1"), E.parse("v"), y), GermElement(E.parse("e2"), E.parse("v"), y), 2)
    assert certified.verdict is Verdict.NOT_EQUAL
    assert certified.squares == 1


def test_germ_needs_the_cylinder(o2):
    E = o2.domain

    with pytest.raises(NotComposable):
        GermElement(E.parse("e1"), E.parse("e2"), oracle_from_spec(o2, "constant:e1"))


def test_germ_lag(o2, s3):
    germ = germ_of_morphism(o2, o2.domain.parse("e1.e2"))

    assert germ.format() == "[e1.e2,v,canonical path to v]"
    assert germ_lag(o2, germ) == (2,)
    assert germ_lag(o2, cell(o2, "v", "e2.e2")) == (-2,)
    with pytest.raises(ValueError):
        germ_lag(s3, germ_of_morphism(s3, "213"))


@pytest.mark.parametrize("name", ["z3", "pair_groupoid"])
def test_regular_representation_is_multiplicative(request, name: str):
    F = request.getfixturevalue(name)
    E = F.domain
    u = enumerate_paths(F, E.objects[0])[0]
    rep = regular_representation(F, u)
    cells = [
        GermBasisSet(F, mu, nu)
        for mu, nu in itertools.product(E.morphisms(), repeat=2)
        if E.source(mu) == E.source(nu)
    ]
    matrices = {c: rep.cell_matrix(c) for c in cells}

    assert len(rep.orbit) == len(E.objects)
    for a, b in itertools.product(cells, repeat=2):
        product = GroupoidFunction.indicator(F, a) * GroupoidFunction.indicator(F, b)
        total = sum((value * matrices[c] for c, value in product.terms.items()), rep.matrix(GroupoidFunction(F)))
        assert total == matrices[a] * matrices[b], (a.format(), b.format())


def test_regular_representation_needs_a_finite_base(o2):
    with pytest.raises(OrbitBudgetExceeded):
        regular_representation(o2, oracle_from_spec(o2, "constant:e1"))
