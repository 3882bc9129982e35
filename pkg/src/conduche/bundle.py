"""JSON bundles: categories, fibrations and named paths in one document.

A bundle looks like

    {
      "name": "o2",
      "description": "...",
      "fibration": {"kind": "degree", "category": {"backend": "kgraph", ...}},
      "oracles": {"aperiodic": "staircase:e1,e2"}
    }

`catalog:NAME` refers to a bundle shipped with the package.
"""

from __future__ import annotations

import copy
import json
import logging
from collections.abc import Mapping
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

from conduche.category import (
    Category,
    ExplicitCategory,
    PosetCategory,
    build_discrete_category,
    build_group_category,
    build_nk,
    build_pair_groupoid,
    build_poset_category,
    build_trivial_category,
    cyclic_group_table,
    product,
    symmetric_group_table,
)
from conduche.exceptions import ConducheException, SchemaError
from conduche.fibration import Fibration, identity_fibration
from conduche.kgraph import build_kgraph
from conduche.paths import PathOracle, oracle_from_spec
from conduche.sections import build_presheaf_sections
from conduche.settings import DEFAULT_DEPTH

logger = logging.getLogger("conduche")

CATALOG_PREFIX = "catalog:"


@dataclass
class Bundle:
    name: str
    description: str
    fibration: Fibration
    oracles: dict[str, str] = field(default_factory=dict)
    document: dict[str, Any] = field(default_factory=dict)

    def oracle(self, name_or_spec: str, target: Any = None, depth: int = DEFAULT_DEPTH) -> PathOracle:
        """A named path of the bundle, or an oracle spec string."""
        spec = self.oracles.get(name_or_spec, name_or_spec)
        return oracle_from_spec(self.fibration, spec, target, depth)


def _schema_error(message: str, where: str) -> SchemaError:
    logger.error(f"{where}: {message}")
    return SchemaError(f"{where}: {message}", {"field": where})


def _field(doc: Mapping[str, Any], key: str, where: str, kind: type | tuple[type, ...] = object) -> Any:
    if not isinstance(doc, Mapping):
        raise _schema_error("expected an object", where)
    if key not in doc:
        raise _schema_error(f"missing field {key!r}", where)
    value = doc[key]
    if not isinstance(value, kind):
        name = kind.__name__ if isinstance(kind, type) else " or ".join(k.__name__ for k in kind)
        raise _schema_error(f"field {key!r} must be {name}", f"{where}.{key}")
    return value


# -- categories --------------------------------------------------------------------


def _explicit(doc: Mapping[str, Any], where: str) -> Category:
    objects = _field(doc, "objects", where, list)
    morphisms = _field(doc, "morphisms", where, (list, dict))
    identities = _field(doc, "identities", where, dict)
    composition = {}
    for i, row in enumerate(doc.get("composition", [])):
        if not isinstance(row, list) or len(row) != 3:
            raise _schema_error("composition rows are [a, b, a.b]", f"{where}.composition[{i}]")
        composition[(row[0], row[1])] = row[2]
    ends: dict[str, tuple[str, str]] = {}
    if isinstance(morphisms, dict):
        for m, pair in morphisms.items():
            if not isinstance(pair, list) or len(pair) != 2:
                raise _schema_error("morphisms map ids to [source, target]", f"{where}.morphisms.{m}")
            ends[m] = (pair[0], pair[1])
    else:
        for i, entry in enumerate(morphisms):
            at = f"{where}.morphisms[{i}]"
            ends[_field(entry, "id", at, str)] = (_field(entry, "src", at, str), _field(entry, "tgt", at, str))
    return ExplicitCategory(objects, ends, composition, identities, name=doc.get("name", ""))


def _group(doc: Mapping[str, Any], where: str) -> Category:
    if "cyclic" in doc:
        elements, table = cyclic_group_table(_field(doc, "cyclic", where, int))
        name = f"Z/{doc['cyclic']}"
    elif "symmetric" in doc:
        elements, table = symmetric_group_table(_field(doc, "symmetric", where, int))
        name = f"S{doc['symmetric']}"
    else:
        table = _field(doc, "table", where, list)
        # without names the first row lists the elements, unit first
        elements = doc.get("elements") or (list(table[0]) if table else [])
        name = ""
    return build_group_category(elements, table, name=doc.get("name", name))


def _kgraph(doc: Mapping[str, Any], where: str) -> tuple[Category, Fibration]:
    edges = _field(doc, "edges", where, list)
    for i, edge in enumerate(edges):
        for key in ("id", "src", "tgt"):
            _field(edge, key, f"{where}.edges[{i}]", str)
    return build_kgraph(
        _field(doc, "vertices", where, list),
        edges,
        doc.get("squares", []),
        k=doc.get("k"),
        strict=doc.get("strict", True),
        name=doc.get("name", ""),
    )


def load_category(doc: Mapping[str, Any], where: str = "category") -> Category:
    """Build a category from its document.

    Raises:
        SchemaError: If the document is malformed
    """
    backend = _field(doc, "backend", where, str)
    if backend == "explicit":
        return _explicit(doc, where)
    if backend == "nk":
        return build_nk(_field(doc, "k", where, int))
    if backend == "group":
        return _group(doc, where)
    if backend == "poset":
        return build_poset_category(doc.get("elements"), _field(doc, "leq", where, list), name=doc.get("name", ""))
    if backend == "pair":
        return build_pair_groupoid(_field(doc, "points", where, list), name=doc.get("name", ""))
    if backend == "discrete":
        return build_discrete_category(_field(doc, "objects", where, list), name=doc.get("name", ""))
    if backend == "trivial":
        return build_trivial_category()
    if backend == "kgraph":
        return _kgraph(doc, where)[0]
    if backend == "product":
        factors = _field(doc, "factors", where, list)
        return product([load_category(f, f"{where}.factors[{i}]") for i, f in enumerate(factors)])
    raise _schema_error(f"unknown backend {backend!r}", f"{where}.backend")


# -- fibrations -----------------------------------------------------------------------


def _restrictions(doc: Mapping[str, Any], where: str) -> dict[tuple[str, str], dict[str, str]]:
    maps: dict[tuple[str, str], dict[str, str]] = {}
    for i, entry in enumerate(doc.get("restrictions", [])):
        at = f"{where}.restrictions[{i}]"
        maps[(_field(entry, "to", at, str), _field(entry, "from", at, str))] = dict(_field(entry, "map", at, dict))
    return maps


def load_fibration(doc: Mapping[str, Any], where: str = "fibration") -> Fibration:
    """Build a fibration from its document.

    Kinds: `explicit` (two categories and the maps), `identity`, `degree`
    (a k-graph over ℕᵏ) and `sections` (a presheaf on a poset).

    Raises:
        SchemaError: If the document is malformed
    """
    kind = doc.get("kind", "explicit")
    if kind == "identity":
        F = identity_fibration(load_category(_field(doc, "category", where, dict), f"{where}.category"))
    elif kind == "degree":
        category = _field(doc, "category", where, dict)
        if category.get("backend") != "kgraph":
            raise _schema_error("degree fibrations need a kgraph category", f"{where}.category.backend")
        F = _kgraph(category, f"{where}.category")[1]
    elif kind == "sections":
        base = load_category(_field(doc, "base", where, dict), f"{where}.base")
        if not isinstance(base, PosetCategory):
            raise _schema_error("sections need a poset base", f"{where}.base.backend")
        sections = _field(doc, "sections", where, dict)
        F = build_presheaf_sections(base, sections, _restrictions(doc, where))[1]
    elif kind == "explicit":
        F = Fibration(
            load_category(_field(doc, "domain", where, dict), f"{where}.domain"),
            load_category(_field(doc, "codomain", where, dict), f"{where}.codomain"),
            object_map=dict(_field(doc, "object_map", where, dict)),
            morphism_map=dict(_field(doc, "morphism_map", where, dict)),
        )
    else:
        raise _schema_error(f"unknown fibration kind {kind!r}", f"{where}.kind")
    if "name" in doc:
        F.name = doc["name"]
    F.document = copy.deepcopy(dict(doc))
    return F


# -- documents and the catalog -------------------------------------------------------


def _catalog_dir() -> Any:
    return resources.files("conduche").joinpath("catalog")


def catalog_names() -> list[str]:
    return sorted(p.name.removesuffix(".json") for p in _catalog_dir().iterdir() if p.name.endswith(".json"))


def catalog_document(name: str) -> dict[str, Any]:
    """The raw document of a bundled example.

    Raises:
        SchemaError: If no such example exists
    """
    entry = _catalog_dir().joinpath(f"{name}.json")
    if not entry.is_file():
        raise SchemaError(f"no bundled example named {name!r}", {"known": catalog_names()})
    return _parse(entry.read_text(encoding="utf-8"), f"{CATALOG_PREFIX}{name}")


def _parse(text: str, origin: str) -> dict[str, Any]:
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        logger.error(f"{origin}: invalid JSON at line {e.lineno}")
        raise SchemaError(
            f"{origin}: invalid JSON at line {e.lineno} column {e.colno}: {e.msg}",
            {"line": e.lineno, "column": e.colno},
        ) from e
    if not isinstance(document, dict):
        raise SchemaError(f"{origin}: top level must be an object", {"line": 1})
    return document


def read_document(source: str | Path) -> dict[str, Any]:
    """Read a JSON document from a path or `catalog:NAME`.

    Raises:
        FileNotFoundError: If the path does not exist
        SchemaError: If the text is not a JSON object
    """
    text = str(source)
    if text.startswith(CATALOG_PREFIX):
        return catalog_document(text[len(CATALOG_PREFIX) :])
    return _parse(Path(text).read_text(encoding="utf-8"), text)


def bundle_from_document(document: Mapping[str, Any], origin: str = "bundle") -> Bundle:
    """Build a Bundle from a parsed document.

    Raises:
        SchemaError: If the document is malformed
        ConducheException: If the described structures are invalid
    """
    try:
        F = load_fibration(_field(document, "fibration", origin, dict))
    except SchemaError:
        raise
    except ConducheException as e:
        logger.error(f"{origin}: {e.message}")
        raise
    oracles = dict(document.get("oracles", {}))
    name = document.get("name", origin)
    if "name" not in document["fibration"]:
        F.name = name
    return Bundle(name, document.get("description", ""), F, oracles, copy.deepcopy(dict(document)))


def load_bundle(source: str | Path) -> Bundle:
    return bundle_from_document(read_document(source), str(source))


def load_category_document(source: str | Path) -> Category:
    """A bare category document, or the `category` member of one or of its fibration."""
    document = read_document(source)
    if "category" in document:
        return load_category(document["category"], "category")
    fibration = document.get("fibration")
    if isinstance(fibration, Mapping) and "category" in fibration:
        return load_category(fibration["category"], "fibration.category")
    return load_category(document, "category")


def dump_bundle(bundle: Bundle) -> dict[str, Any]:
    return copy.deepcopy(bundle.document)
