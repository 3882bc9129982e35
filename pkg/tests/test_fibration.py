"""Test functors, lifting, Ore checks and fibration validation."""

import pytest

from conduche.bundle import bundle_from_document, load_category
from conduche.category import (
    build_group_category,
    build_nk,
    build_pair_groupoid,
    build_trivial_category,
    cyclic_group_table,
)
from conduche.exceptions import (
    BadFactorization,
    FiberInfinite,
    MissingFlags,
    MultipleLifts,
    NotACospan,
    UnknownMorphism,
)
from conduche.fibration import (
    Fibration,
    ImageCategory,
    check_dcf,
    check_identities_lift,
    check_ore,
    check_row_finite,
    check_strong_surjectivity,
    compose_fibrations,
    identity_fibration,
    lift_factorization,
    morphism_properties,
    ore_match,
    restrict_to_image,
    validate_functor,
)
from conduche.validation import validate_fibration

from .samples import (
    ANTICHAIN_CATEGORY,
    CHAIN_CATEGORY,
    DIAMOND_CATEGORY,
    EXPLICIT_BUNDLE,
    V_CATEGORY,
)


def collapse_pair_groupoid() -> Fibration:
    """Every morphism of the pair groupoid onto the single identity."""
    return Fibration(
        build_pair_groupoid(["x", "y", "z"]),
        build_trivial_category(),
        object_map=lambda x: "*",
        morphism_map=lambda m: "1_*",
    )


def test_fiber_of_degree_functor(o2):
    lifts = o2.fiber("v", (2,))

    assert [o2.domain.format(m) for m in lifts] == ["e1.e1", "e1.e2", "e2.e1", "e2.e2"]
    with pytest.raises(UnknownMorphism):
        o2.fiber("v", (1, 0))


def test_fiber_budget_is_enforced():
    F = collapse_pair_groupoid()

    assert len(F.fiber("x", "1_*")) == 3
    with pytest.raises(FiberInfinite):
        F.fiber("y", "1_*", budget=0)


def test_collapse_is_not_a_dcf():
    counterexample = check_dcf(collapse_pair_groupoid())

    assert counterexample is not None
    assert counterexample.lifts == 3


def test_lift_factorization_on_two_graph(two_graph):
    E = two_graph.domain
    phi = E.parse("f1.f2.e1")

    parts = lift_factorization(two_graph, phi, [(0, 1), (2, 0)])
    assert len(parts) == 2
    assert E.compose(parts[0], parts[1]) == phi
    assert [two_graph(p) for p in parts] == [(0, 1), (2, 0)]


def test_lift_factorization_into_three_parts(o2):
    E = o2.domain
    phi = E.parse("e1.e2.e2")

    parts = lift_factorization(o2, phi, [(1,), (1,), (1,)])
    assert [E.format(p) for p in parts] == ["e1", "e2", "e2"]


def test_lift_factorization_checks_parts(o2):
    with pytest.raises(BadFactorization):
        lift_factorization(o2, o2.domain.parse("e1.e2"), [(1,), (2,)])
    with pytest.raises(BadFactorization):
        lift_factorization(o2, o2.domain.parse("e1.e2"), [])


def test_multiple_lifts_are_reported():
    F = collapse_pair_groupoid()

    with pytest.raises(MultipleLifts) as excinfo:
        lift_factorization(F, "x<-y", ["1_*", "1_*"])
    assert len(excinfo.value.payload["lifts"]) == 3


def test_identity_fibration_lifts_trivially(s3):
    assert s3.fiber("*", "213") == ["213"]
    assert lift_factorization(s3, "231", ["213", "132"]) == ["213", "132"]
    assert check_identities_lift(s3).passed


def test_validate_functor_catches_broken_maps():
    document = {**EXPLICIT_BUNDLE, "fibration": {**EXPLICIT_BUNDLE["fibration"]}}
    document["fibration"]["morphism_map"] = {"1a": "10", "1b": "10", "f": "u"}
    F = bundle_from_document(document).fibration

    report = validate_functor(F)
    assert not report.passed
    assert report.check("identities").payload["bad_objects"] == ["b"]


def test_explicit_bundle_is_a_dcf():
    F = bundle_from_document(EXPLICIT_BUNDLE).fibration

    assert validate_functor(F).passed
    assert check_dcf(F) is None
    assert check_strong_surjectivity(F).passed
    assert check_row_finite(F).passed


def test_strong_surjectivity_reports_empty_fiber():
    elements, table = cyclic_group_table(2)
    z2 = build_group_category(elements, table)
    constant = Fibration(
        build_trivial_category(), z2, object_map=lambda x: "*", morphism_map=lambda m: "e"
    )

    check = check_strong_surjectivity(constant)
    assert check.passed is False
    assert check.payload["base"] == "g"


@pytest.mark.parametrize(
    "document",
    [
        CHAIN_CATEGORY,
        DIAMOND_CATEGORY,
        ANTICHAIN_CATEGORY,
        {"backend": "group", "cyclic": 2},
        {"backend": "group", "cyclic": 3},
        {"backend": "group", "symmetric": 3},
        {"backend": "pair", "points": ["x", "y", "z"]},
    ],
)
def test_ore_fast_paths_agree_with_exhaustive_search(document: dict):
    report = check_ore(load_category(document))

    assert report.right_ore is True
    assert report.strongly_right_ore is True
    assert report.exhaustive
    assert "pullbacks" in report.fast_paths
    assert report.agrees is True


def test_v_poset_is_not_ore():
    report = check_ore(load_category(V_CATEGORY))

    assert report.right_ore is False
    assert report.strongly_right_ore is False
    assert report.fast_paths == []
    assert report.agrees is None
    assert report.counterexample["cospan"] == ["a<=c", "b<=c"]


def test_nk_is_ore_by_cancellation():
    from conduche.category import build_nk

    report = check_ore(build_nk(2), depth=2)

    assert report.right_ore is True
    assert report.strongly_right_ore is True
    assert report.via == "left_cancellative"
    assert report.exhaustive is False


def test_morphism_properties_of_a_poset():
    properties = morphism_properties(load_category(DIAMOND_CATEGORY))

    assert properties.left_cancellative
    assert properties.right_cancellative
    assert properties.exhaustive


def test_ore_match_in_o2(o2):
    E = o2.domain
    e1, e2 = E.parse("e1"), E.parse("e2")

    assert ore_match(o2, e1, e2) == []
    matches = ore_match(o2, e1, E.parse("e1.e2"))
    assert [(E.format(a), E.format(b)) for a, b in matches] == [("e2", "v")]


def test_ore_match_needs_a_cospan(pair_groupoid):
    with pytest.raises(NotACospan):
        ore_match(pair_groupoid, "x<-y", "y<-x")


def test_restrict_to_image_needs_kp_flags():
    arrow = load_category(EXPLICIT_BUNDLE["fibration"]["codomain"])
    at_source = Fibration(
        build_trivial_category(), arrow, object_map=lambda x: "0", morphism_map=lambda m: "10"
    )
    with pytest.raises(MissingFlags) as excinfo:
        restrict_to_image(at_source)
    assert excinfo.value.payload == {"missing": ["dcf", "strongly_right_ore", "locally_split"]}
    with pytest.raises(MissingFlags) as excinfo:
        restrict_to_image(at_source.with_flags(dcf=True))
    assert excinfo.value.payload == {"missing": ["strongly_right_ore", "locally_split"]}

    _, flagged = validate_fibration(at_source)
    assert flagged.flags.is_kp
    assert flagged.flags.strongly_surjective is False
    image = restrict_to_image(flagged)
    assert image.codomain.objects == ["0"]
    assert image.codomain.morphisms() == ["10"]
    assert image.flags.strongly_surjective is True
    assert check_strong_surjectivity(image).passed


def test_image_of_a_one_graph_embedded_in_the_plane(o2):
    plane = build_nk(2)
    embed = Fibration(o2.codomain, plane, object_map=lambda x: x, morphism_map=lambda n: (n[0], 0))
    composite = compose_fibrations(embed, o2)

    assert check_dcf(composite, 2) is None
    assert not check_strong_surjectivity(composite, 2).passed
    image = ImageCategory(composite)
    line = [embed(n) for n in o2.codomain.morphisms_into("*", 3)]
    assert image.morphisms_into("*", 3) == line
    assert [image.level(m) for m in line] == [0, 1, 2, 3]
    # (0,1) has no lift, so no path to v splits the plane
    with pytest.raises(MissingFlags) as excinfo:
        restrict_to_image(composite.with_flags(dcf=True, strongly_right_ore=True))
    assert excinfo.value.payload == {"missing": ["locally_split"]}


def test_compose_with_identity(s3):
    composite = compose_fibrations(s3, s3)

    assert composite("213") == "213"
    assert composite.flags.functor_valid is True
    assert composite.flags.dcf is None


@pytest.mark.parametrize("name", ["s3", "z3", "pair_groupoid", "chain_sections"])
def test_bundled_finite_fibrations_are_kp(name: str):
    from conduche.bundle import load_bundle

    report, flagged = validate_fibration(load_bundle(f"catalog:{name}").fibration)

    assert report.passed
    assert flagged.flags.is_kp
    assert flagged.flags.functor_valid is True


def test_two_graph_validates_to_depth(two_graph):
    report, flagged = validate_fibration(two_graph, depth=1)

    assert report.passed
    assert report.check("dcf").depth == 1
    assert report.check("dcf").exhaustive is False
    assert flagged.flags.depth == 1
