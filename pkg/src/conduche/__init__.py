"""
conduche - discrete Conduché fibrations, their path spaces, groupoids and
Cuntz-Krieger algebras, made computable

Published under the MIT license
"""

from .exceptions import ConducheException, LiftError, NoLift, MultipleLifts, SchemaError
from .category import (
    Category,
    ExplicitCategory,
    GroupCategory,
    PosetCategory,
    NkMonoid,
    ProductCategory,
    build_group_category,
    build_poset_category,
    build_pair_groupoid,
    build_nk,
    validate_category,
)
from .kgraph import KGraphCategory, build_kgraph
from .fibration import Fibration, FibrationFlags, check_dcf, check_ore, identity_fibration, ore_match
from .sections import build_presheaf_sections
from .paths import PathOracle, CylinderSet, res, ind, oracle_from_spec, canonical_splitting
from .groupoid import GermBasisSet, GermElement, GroupoidFunction
from .algebra import AlgebraElement, multiply, involute, refine, upsilon
from .representation import RepAssignment, check_ck_relations
from .validation import validate_fibration
from .bundle import Bundle, load_bundle
from .report import Check, ValidationReport, Verdict, Inclusion
from ._internal.console import console

import logging

logger = logging.getLogger("conduche")


__all__ = [
    "AlgebraElement",
    "Bundle",
    "Category",
    "Check",
    "ConducheException",
    "CylinderSet",
    "ExplicitCategory",
    "Fibration",
    "FibrationFlags",
    "GermBasisSet",
    "GermElement",
    "GroupCategory",
    "GroupoidFunction",
    "Inclusion",
    "KGraphCategory",
    "LiftError",
    "MultipleLifts",
    "NkMonoid",
    "NoLift",
    "PathOracle",
    "PosetCategory",
    "ProductCategory",
    "RepAssignment",
    "SchemaError",
    "ValidationReport",
    "Verdict",
    "build_group_category",
    "build_kgraph",
    "build_nk",
    "build_pair_groupoid",
    "build_poset_category",
    "build_presheaf_sections",
    "canonical_splitting",
    "check_ck_relations",
    "check_dcf",
    "check_ore",
    "console",
    "identity_fibration",
    "ind",
    "involute",
    "load_bundle",
    "multiply",
    "oracle_from_spec",
    "ore_match",
    "refine",
    "res",
    "upsilon",
    "validate_category",
    "validate_fibration",
]
