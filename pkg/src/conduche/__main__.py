"""Command-line interface for the conduche library."""

import argparse
import json
import logging
import re
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

from conduche import algebra as ck
from conduche._internal.console import (
    BOLD,
    CYAN,
    GREEN,
    RED,
    YELLOW,
    console,
    styled_text,
)
from conduche.bundle import (
    Bundle,
    catalog_document,
    catalog_names,
    load_bundle,
    load_category_document,
    read_document,
)
from conduche.category import GroupCategory, validate_category
from conduche.exceptions import ConducheException
from conduche.fibration import check_ore
from conduche.groupoid import (
    GermBasisSet,
    basis_inclusion,
    enumerate_germs,
    intersect_basis,
    product_basis,
)
from conduche.paths import (
    aperiodicity_scan,
    cylinder_intersection,
    enumerate_paths,
    partition_by_lifts,
)
from conduche.report import Check
from conduche.representation import (
    check_ck_relations,
    load_rep_assignment,
    path_representation,
    regular_group_representation,
)
from conduche.settings import DEFAULT_BUDGET, DEFAULT_DEPTH, DEFAULT_TOLERANCE, Settings
from conduche.validation import validate_fibration

DISABLE_STYLING = False

EXIT_OK = 0
EXIT_PROPERTY_FAILED = 1
EXIT_INPUT_ERROR = 2

_CELL = re.compile(r"Z\(\s*([^,]+?)\s*,\s*([^)]+?)\s*\)")
_LIST_ITEM = re.compile(r"\([^)]*\)|[^,]+")


def styled_for_cli(text: str, style: str) -> str:
    """Apply styling if enabled, otherwise return plain text.

    This helper makes tests less brittle by allowing them to match
    on the plain text content.

    Args:
        text: Text to style
        style: Style to apply

    Returns:
        Styled text if styling is enabled, otherwise plain text
    """
    if DISABLE_STYLING:
        return text
    return styled_text(text, style)


def parse_args(
    argv: list[str] | None = None,
) -> tuple[argparse.ArgumentParser, argparse.Namespace]:
    """Parse command line arguments.

    Args:
        argv: Command line arguments (defaults to sys.argv[1:])

    Returns:
        Tuple of (parser, parsed_args)
    """
    parser = argparse.ArgumentParser(
        description="Validate discrete Conduché fibrations and compute with their paths, groupoids and algebras"
    )
    parser.add_argument("--debug", action="store_true", help="Enable debug logging")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--depth", type=int, default=DEFAULT_DEPTH, help="Level bound for graded searches")
    common.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="Candidate budget for searches")
    common.add_argument("--tolerance", type=float, default=DEFAULT_TOLERANCE, help="Float tolerance for matrices")
    common.add_argument("--output", help="Write the report to this file")
    common.add_argument("--format", choices=["json", "text"], default="json", help="Report format")
    common.add_argument("--seed", type=int, help="Sampling seed (defaults to CONDUCHE_SEED)")

    subparsers = parser.add_subparsers(dest="command", help="Command to execute")

    validate_parser = subparsers.add_parser("validate", parents=[common], help="Validate a fibration or category")
    target = validate_parser.add_mutually_exclusive_group(required=True)
    target.add_argument("--fibration", help="Bundle file or catalog:NAME")
    target.add_argument("--category", help="Category document or catalog:NAME")

    fiber_parser = subparsers.add_parser("fiber", parents=[common], help="List the lifts of a base morphism")
    fiber_parser.add_argument("--fibration", required=True, help="Bundle file or catalog:NAME")
    fiber_parser.add_argument("--object", required=True, help="Object of the total category")
    fiber_parser.add_argument("--base", required=True, help="Base morphism ending at F(object)")

    paths_parser = subparsers.add_parser("paths", parents=[common], help="Evaluate infinite paths")
    paths_parser.add_argument("--fibration", required=True, help="Bundle file or catalog:NAME")
    paths_parser.add_argument("--oracle", help="Named bundle path or spec such as constant:e1")
    paths_parser.add_argument("--target", help="Object the path ends at")
    paths_parser.add_argument("--eval", action="append", default=[], help="Base morphism to evaluate at")
    paths_parser.add_argument("--aperiodicity", action="store_true", help="Search for a periodicity witness")
    paths_parser.add_argument("--enumerate", action="store_true", help="List every path (finite bases)")

    cylinder_parser = subparsers.add_parser("cylinder", parents=[common], help="Cylinder set arithmetic")
    cylinder_parser.add_argument("--fibration", required=True, help="Bundle file or catalog:NAME")
    mode = cylinder_parser.add_mutually_exclusive_group(required=True)
    mode.add_argument("--intersect", nargs=2, metavar=("ALPHA", "BETA"), help="Cells of Z(alpha) ∩ Z(beta)")
    mode.add_argument("--partition", nargs=2, metavar=("OBJECT", "BASE"), help="Z(object) split by lifts")

    germ_parser = subparsers.add_parser("germ", parents=[common], help="Germ basis arithmetic")
    germ_parser.add_argument("--fibration", required=True, help="Bundle file or catalog:NAME")
    germ_mode = germ_parser.add_mutually_exclusive_group(required=True)
    germ_mode.add_argument("--product", help='Two cells, e.g. "Z(a,b) Z(c,d)"')
    germ_mode.add_argument("--intersect", help='Two cells, e.g. "Z(a,b) Z(c,d)"')
    germ_mode.add_argument("--inclusion", help='Two cells; is the first inside the second?')
    germ_mode.add_argument("--enumerate", action="store_true", help="All germs (finite path spaces)")

    algebra_parser = subparsers.add_parser("algebra", parents=[common], help="Symbolic Cuntz-Krieger algebra")
    algebra_parser.add_argument("--fibration", required=True, help="Bundle file or catalog:NAME")
    algebra_parser.add_argument("--expr", required=True, help="Expression such as s(e1)*s(e2)^'")
    algebra_parser.add_argument("--equal", help="Compare against a second expression")
    algebra_parser.add_argument("--upsilon", action="store_true", help="Also show the groupoid function")

    rep_parser = subparsers.add_parser("rep-check", parents=[common], help="Check Cuntz-Krieger relations")
    rep_parser.add_argument("--fibration", required=True, help="Bundle file or catalog:NAME")
    source = rep_parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--matrices", help="JSON file of projections and isometries")
    source.add_argument("--regular", action="store_true", help="Left regular representation of a group")
    source.add_argument("--paths", action="store_true", help="Representation on the path space")
    rep_parser.add_argument("--degrees", help="Comma separated base morphisms for relation 6")
    rep_parser.add_argument("--truncation", type=int, help="Degree for the truncated path representation")
    rep_parser.add_argument("--exact", action="store_true", help="Compare matrices exactly")

    examples_parser = subparsers.add_parser("examples", parents=[common], help="Bundled examples")
    examples_mode = examples_parser.add_mutually_exclusive_group(required=True)
    examples_mode.add_argument("--list", action="store_true", help="List the bundled examples")
    examples_mode.add_argument("--show", metavar="NAME", help="Describe a bundled example")
    examples_mode.add_argument("--export", metavar="NAME", help="Write a bundled example to --output")

    return parser, parser.parse_args(argv)


def _split_list(text: str) -> list[str]:
    return [item.strip() for item in _LIST_ITEM.findall(text) if item.strip()]


def _cells(bundle: Bundle, text: str) -> list[GermBasisSet]:
    E = bundle.fibration.domain
    cells = [GermBasisSet(bundle.fibration, E.parse(a), E.parse(b)) for a, b in _CELL.findall(text)]
    if len(cells) != 2:
        raise ValueError(f"expected two cells like Z(a,b) in {text!r}")
    return cells


def run_validate(args: argparse.Namespace, settings: Settings) -> tuple[dict[str, Any], int]:
    if args.category:
        cat = load_category_document(args.category)
        report = validate_category(cat, settings.depth, settings.budget, settings.seed)
        ore = check_ore(cat, settings.depth, settings.budget)
        report.add(Check("right_ore", ore.right_ore, ore.depth, ore.exhaustive, payload=ore.counterexample))
        report.add(
            Check("strongly_right_ore", ore.strongly_right_ore, ore.depth, ore.exhaustive, detail=f"via {ore.via}")
        )
        return report.to_dict(), EXIT_OK if report.passed else EXIT_PROPERTY_FAILED
    bundle = load_bundle(args.fibration)
    report, flagged = validate_fibration(bundle.fibration, settings.depth, settings.budget, settings.seed)
    payload = {**report.to_dict(), "flags": flagged.flags.to_dict()}
    return payload, EXIT_OK if report.passed else EXIT_PROPERTY_FAILED


def run_fiber(args: argparse.Namespace, settings: Settings) -> tuple[dict[str, Any], int]:
    F = load_bundle(args.fibration).fibration
    E, B = F.domain, F.codomain
    x = E.parse_object(args.object)
    b = B.parse(args.base)
    lifts = F.fiber(x, b, settings.budget)
    return {"object": E.format_object(x), "base": B.format(b), "lifts": [E.format(m) for m in lifts]}, EXIT_OK


def run_paths(args: argparse.Namespace, settings: Settings) -> tuple[dict[str, Any], int]:
    bundle = load_bundle(args.fibration)
    F = bundle.fibration
    E, B = F.domain, F.codomain
    target = E.parse_object(args.target) if args.target else None
    if args.enumerate:
        if target is None:
            raise ValueError("--enumerate needs --target")
        paths = enumerate_paths(F, target, settings.budget)
        listing = [
            {"name": p.name, "values": {B.format(b): E.format(p.evaluate(b)) for b in p.slice_objects(settings.depth)}}
            for p in paths
        ]
        return {"target": E.format_object(target), "paths": listing}, EXIT_OK
    if not args.oracle:
        raise ValueError("paths needs --oracle or --enumerate")
    path = bundle.oracle(args.oracle, target, settings.depth)
    points = [B.parse(text) for text in args.eval] or path.slice_objects(settings.depth)
    result: dict[str, Any] = {
        "path": path.name,
        "target": E.format_object(path.target),
        "values": {B.format(b): E.format(path.evaluate(b)) for b in points},
    }
    if args.aperiodicity:
        witness = aperiodicity_scan(F, path, settings.depth)
        result["aperiodicity"] = {
            "witness": witness.to_dict() if witness else None,
            "depth": None if B.is_finite else settings.depth,
        }
    return result, EXIT_OK


def run_cylinder(args: argparse.Namespace, settings: Settings) -> tuple[dict[str, Any], int]:
    F = load_bundle(args.fibration).fibration
    E, B = F.domain, F.codomain
    if args.intersect:
        alpha, beta = (E.parse(text) for text in args.intersect)
        cells = cylinder_intersection(F, alpha, beta, settings.budget)
        return {"intersect": [E.format(alpha), E.format(beta)], "cells": [E.format(m) for m in cells]}, EXIT_OK
    x = E.parse_object(args.partition[0])
    b = B.parse(args.partition[1])
    cylinders = partition_by_lifts(F, x, b, settings.budget)
    return {"object": E.format_object(x), "base": B.format(b), "cells": [c.format() for c in cylinders]}, EXIT_OK


def run_germ(args: argparse.Namespace, settings: Settings) -> tuple[dict[str, Any], int]:
    bundle = load_bundle(args.fibration)
    if args.enumerate:
        return enumerate_germs(bundle.fibration, settings.budget).to_dict(), EXIT_OK
    if args.inclusion:
        first, second = _cells(bundle, args.inclusion)
        verdict = basis_inclusion(first, second, settings.budget)
        return {"cells": [first.format(), second.format()], "inclusion": verdict.value}, EXIT_OK
    if args.product:
        first, second = _cells(bundle, args.product)
        cells = product_basis(first, second, settings.budget)
    else:
        first, second = _cells(bundle, args.intersect)
        cells = intersect_basis(first, second, settings.budget)
    return {"cells": [first.format(), second.format()], "result": [c.format() for c in cells]}, EXIT_OK


def run_algebra(args: argparse.Namespace, settings: Settings) -> tuple[dict[str, Any], int]:
    F = load_bundle(args.fibration).fibration
    element = ck.parse_expression(F, args.expr)
    result: dict[str, Any] = {"expression": args.expr, "element": element.to_dict(), "text": element.format()}
    if args.equal:
        other = ck.parse_expression(F, args.equal)
        result["equal"] = ck.equal(element, other, settings.budget).value
    if args.upsilon:
        result["upsilon"] = ck.upsilon(element, settings.budget).to_dict()
    return result, EXIT_OK


def run_rep_check(args: argparse.Namespace, settings: Settings) -> tuple[dict[str, Any], int]:
    F = load_bundle(args.fibration).fibration
    B = F.codomain
    if args.matrices:
        tolerance = 0.0 if args.exact else settings.tolerance
        rep = load_rep_assignment(F, read_document(args.matrices), tolerance)
    elif args.regular:
        if not isinstance(F.domain, GroupCategory):
            raise ValueError("--regular needs a fibration on a group")
        rep = regular_group_representation(F.domain)
    else:
        rep = path_representation(F, settings.budget, args.truncation)
    degrees = [B.parse(text) for text in _split_list(args.degrees)] if args.degrees else None
    report = check_ck_relations(F, rep, degrees)
    payload = {
        **report.to_dict(),
        "dimension": rep.dimension,
        "exact": rep.exact,
        "approximate": rep.approximate,
    }
    return payload, EXIT_OK if report.passed else EXIT_PROPERTY_FAILED


def run_examples(args: argparse.Namespace, settings: Settings) -> tuple[dict[str, Any], int]:
    if args.list:
        names = catalog_names()
        return {"examples": [{"name": n, "description": catalog_document(n).get("description", "")} for n in names]}, EXIT_OK
    name = args.show or args.export
    document = catalog_document(name)
    if args.export:
        if not args.output:
            raise ValueError("--export needs --output")
        return document, EXIT_OK
    return {"name": name, "document": document}, EXIT_OK


COMMANDS = {
    "validate": run_validate,
    "fiber": run_fiber,
    "paths": run_paths,
    "cylinder": run_cylinder,
    "germ": run_germ,
    "algebra": run_algebra,
    "rep-check": run_rep_check,
    "examples": run_examples,
}


def _render_text(payload: dict[str, Any]) -> None:
    if "checks" in payload:
        console.header(payload.get("subject", "report"))

        def row(check: dict[str, Any]) -> str:
            status = {True: ("PASS", GREEN), False: ("FAIL", RED), None: ("----", YELLOW)}[check["passed"]]
            return f"{styled_for_cli(status[0], status[1])} {check['name']:<28} {check['detail']}"

        console.table(payload["checks"], row, title="Checks")
        for check in payload["checks"]:
            if check["passed"] is False and check["payload"]:
                lines = [f"{key}: {json.dumps(value, sort_keys=True)}" for key, value in sorted(check["payload"].items())]
                console.box(check["name"], lines, RED)
        return
    if "examples" in payload:
        console.section("Bundled examples")
        for entry in payload["examples"]:
            console.info(f"  {styled_for_cli(entry['name'], CYAN + BOLD):<20} {entry['description']}")
        return
    for key, value in sorted(payload.items()):
        if key in ("config", "timestamp", "command"):
            continue
        console.info(f"{styled_for_cli(key + ':', YELLOW)} {json.dumps(value, sort_keys=True)}")


def emit(payload: dict[str, Any], args: argparse.Namespace, settings: Settings) -> None:
    """Write the report as JSON, or as text to the terminal."""
    if args.command == "examples" and args.export:
        Path(args.output).write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")
        console.success(f"Exported {args.export} to {args.output}")
        return
    report = {
        **payload,
        "command": args.command,
        "config": settings.to_dict(),
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    text = json.dumps(report, sort_keys=True, indent=2)
    if args.output:
        Path(args.output).write_text(text + "\n", encoding="utf-8")
    if settings.output_format == "text":
        _render_text(report)
    elif not args.output:
        print(text)


def main(argv: list[str] | None = None) -> int:
    """Run the conduche command-line interface.

    Args:
        argv: Command line arguments (defaults to sys.argv[1:])

    Returns:
        Exit code: 0 on success, 1 when a checked property fails, 2 on bad input
    """
    parser, args = parse_args(argv)

    log_level = logging.DEBUG if args.debug else logging.WARNING
    logging.basicConfig(level=log_level)

    if not args.command:
        console.error("No command given")
        parser.print_help()
        return EXIT_INPUT_ERROR

    settings = Settings.from_args(args)
    try:
        payload, code = COMMANDS[args.command](args, settings)
    except FileNotFoundError as e:
        console.error(f"File not found: {e.filename}")
        return EXIT_INPUT_ERROR
    except ConducheException as e:
        console.error(str(e))
        return EXIT_INPUT_ERROR
    except ValueError as e:
        console.error(f"Invalid input: {e}")
        return EXIT_INPUT_ERROR

    emit(payload, args, settings)
    if code == EXIT_PROPERTY_FAILED and settings.output_format == "text":
        console.warning(styled_for_cli("Some checks failed", YELLOW))
    return code


if __name__ == "__main__":
    sys.exit(main())
