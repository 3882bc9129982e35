"""Test bundle documents, the catalog and presheaf sections."""

import json

import pytest

from conduche.bundle import (
    bundle_from_document,
    catalog_names,
    dump_bundle,
    load_bundle,
    load_category_document,
    read_document,
)
from conduche.category import build_poset_category
from conduche.exceptions import BaseNotOre, NonFunctorialRestriction, NotAGroup, SchemaError
from conduche.sections import build_presheaf_sections

from .samples import EXPLICIT_BUNDLE, V_CATEGORY, Z2_BUNDLE, Z3_TABLE_BUNDLE

CATALOG = [
    "broken_two_graph",
    "chain_sections",
    "o2",
    "o3",
    "pair_groupoid",
    "s3",
    "two_graph",
    "z2",
    "z3",
]


def test_catalog_lists_every_example():
    assert catalog_names() == CATALOG


@pytest.mark.parametrize("name", CATALOG)
def test_catalog_examples_load(name: str):
    bundle = load_bundle(f"catalog:{name}")

    assert bundle.name == name
    assert bundle.description
    assert dump_bundle(bundle) == read_document(f"catalog:{name}")


def test_unknown_catalog_entry():
    with pytest.raises(SchemaError) as excinfo:
        load_bundle("catalog:o7")
    assert "o2" in excinfo.value.payload["known"]


def test_group_bundles():
    z2 = bundle_from_document(Z2_BUNDLE).fibration
    z3 = bundle_from_document(Z3_TABLE_BUNDLE).fibration

    assert z2.domain.morphisms() == ["e", "g"]
    assert z2.flags.dcf
    assert z3.domain.unit == "0"
    assert z3.domain.compose("1", "2") == "0"


def test_explicit_bundle_maps():
    F = bundle_from_document(EXPLICIT_BUNDLE).fibration

    assert F.name == "arrow onto a point"
    assert F.obj("a") == "0"
    assert F("f") == "u"
    assert F.domain.source("f") == "a"
    assert F.codomain.target("u") == "1"


def test_named_oracles(o2_bundle):
    x = o2_bundle.oracle("aperiodic")
    y = o2_bundle.oracle("constant:e2")

    assert o2_bundle.oracles["aperiodic"] == "staircase:e1,e2"
    assert o2_bundle.fibration.domain.format(x((4,))) == "e1.e2.e1.e2"
    assert o2_bundle.fibration.domain.format(y((2,))) == "e2.e2"


@pytest.mark.parametrize(
    "document,field",
    [
        ({}, "bundle"),
        ({"fibration": {"kind": "spiral"}}, "fibration.kind"),
        ({"fibration": {"kind": "identity", "category": {"backend": "lattice"}}}, "fibration.category.backend"),
        ({"fibration": {"kind": "degree", "category": V_CATEGORY}}, "fibration.category.backend"),
        (
            {
                "fibration": {
                    "kind": "degree",
                    "category": {"backend": "kgraph", "vertices": ["v"], "edges": [{"id": "a", "tgt": "v"}]},
                }
            },
            "fibration.category.edges[0]",
        ),
        (
            {
                "fibration": {
                    "kind": "identity",
                    "category": {"backend": "explicit", "objects": ["*"], "morphisms": {"1": ["*"]}, "identities": {}},
                }
            },
            "fibration.category.morphisms.1",
        ),
        ({"fibration": {"kind": "identity", "category": {"backend": "pair", "points": "xyz"}}}, "fibration.category.points"),
        ({"fibration": {"kind": "sections", "base": {"backend": "group", "cyclic": 2}}}, "fibration.base.backend"),
    ],
)
def test_schema_errors_name_the_field(document: dict, field: str):
    with pytest.raises(SchemaError) as excinfo:
        bundle_from_document(document)
    assert excinfo.value.payload["field"] == field


def test_invalid_structures_propagate():
    document = {"fibration": {"kind": "identity", "category": {"backend": "group", "table": [["a", "a"], ["a", "b"]]}}}

    with pytest.raises(NotAGroup):
        bundle_from_document(document)


def test_json_errors_carry_a_line(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{\n  "name": \n}\n')

    with pytest.raises(SchemaError) as excinfo:
        load_bundle(path)
    assert excinfo.value.payload["line"] == 3


def test_top_level_must_be_an_object(tmp_path):
    path = tmp_path / "list.json"
    path.write_text("[1, 2]")

    with pytest.raises(SchemaError):
        read_document(path)


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_bundle(tmp_path / "absent.json")


def test_bundle_round_trips_through_a_file(tmp_path):
    path = tmp_path / "explicit.json"
    path.write_text(json.dumps(EXPLICIT_BUNDLE))

    bundle = load_bundle(path)
    assert dump_bundle(bundle) == EXPLICIT_BUNDLE
    assert bundle_from_document(dump_bundle(bundle)).fibration("f") == "u"


def test_category_documents(tmp_path):
    path = tmp_path / "v.json"
    path.write_text(json.dumps({"category": V_CATEGORY}))

    assert load_category_document(path).objects == ["a", "b", "c"]
    assert load_category_document("catalog:z3").morphisms() == ["e", "g", "g2"]


def chain():
    return build_poset_category(["a", "b", "c"], [("a", "b"), ("b", "c")])


def test_sections_compose_missing_restrictions():
    total, projection = build_presheaf_sections(
        chain(),
        {"a": ["s"], "b": ["s", "t"], "c": ["s", "t"]},
        {("b", "c"): {"s": "s", "t": "t"}, ("a", "b"): {"s": "s", "t": "s"}},
    )

    assert sorted(total.objects) == ["a:s", "b:s", "b:t", "c:s", "c:t"]
    assert total.le("a:s", "c:t")
    assert not total.le("b:s", "c:t")
    assert projection("a:s<=c:t") == "a<=c"
    assert projection.flags.is_kp


def test_sections_must_compose():
    with pytest.raises(NonFunctorialRestriction) as excinfo:
        build_presheaf_sections(
            chain(),
            {"a": ["s", "t"], "b": ["s", "t"], "c": ["s", "t"]},
            {
                ("b", "c"): {"s": "s", "t": "t"},
                ("a", "b"): {"s": "s", "t": "t"},
                ("a", "c"): {"s": "t", "t": "s"},
            },
        )
    assert excinfo.value.payload["chain"] == ["a", "b", "c"]


def test_sections_need_every_restriction():
    with pytest.raises(NonFunctorialRestriction) as excinfo:
        build_presheaf_sections(chain(), {"a": ["s"], "b": ["s"], "c": ["s"]}, {("b", "c"): {"s": "s"}})
    assert ["a", "b"] in excinfo.value.payload["missing"]


def test_sections_need_an_ore_base():
    v_shape = build_poset_category(["a", "b", "c"], [("a", "c"), ("b", "c")])

    with pytest.raises(BaseNotOre):
        build_presheaf_sections(
            v_shape, {"a": ["s"], "b": ["s"], "c": ["s"]}, {("a", "c"): {"s": "s"}, ("b", "c"): {"s": "s"}}
        )
