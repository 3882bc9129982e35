"""One-stop validation of a fibration."""

from __future__ import annotations

import logging

from conduche.exceptions import ConducheException
from conduche.fibration import (
    Fibration,
    check_dcf,
    check_identities_lift,
    check_ore,
    check_row_finite,
    check_strong_surjectivity,
    morphism_properties,
    validate_functor,
)
from conduche.paths import canonical_splitting
from conduche.report import Check, ValidationReport
from conduche.settings import DEFAULT_BUDGET, DEFAULT_DEPTH, DEFAULT_SEED

logger = logging.getLogger("conduche")


def validate_fibration(
    F: Fibration,
    depth: int = DEFAULT_DEPTH,
    budget: int = DEFAULT_BUDGET,
    seed: int = DEFAULT_SEED,
) -> tuple[ValidationReport, Fibration]:
    """Run every validator on F.

    Returns:
        The combined report and a copy of F whose flags record the results
    """
    E, B = F.domain, F.codomain
    report = ValidationReport(subject=F.name)
    base_depth = None if B.is_finite else depth

    functor = validate_functor(F, depth, budget, seed)
    report.extend(functor)
    if not functor.passed:
        logger.warning(f"{F.name} is not a functor; skipping the remaining checks")
        return report, F.with_flags(functor_valid=False, depth=depth)

    counterexample = check_dcf(F, depth, budget)
    report.add(
        Check(
            "dcf",
            counterexample is None,
            base_depth,
            exhaustive=B.is_finite,
            payload=counterexample.to_dict() if counterexample else {},
        )
    )
    report.add(check_identities_lift(F, depth, budget))
    row_finite = report.add(check_row_finite(F, depth, budget))
    surjective = report.add(check_strong_surjectivity(F, depth, budget))

    ore = check_ore(B, depth, budget)
    report.add(Check("base_right_ore", ore.right_ore, ore.depth, ore.exhaustive, payload=ore.counterexample))
    report.add(
        Check(
            "base_strongly_right_ore",
            ore.strongly_right_ore,
            ore.depth,
            ore.exhaustive,
            detail=f"via {ore.via}",
            payload={"fast_paths": ore.fast_paths, "agrees": ore.agrees},
        )
    )
    properties = morphism_properties(B, depth)

    split: bool | None = True
    unsplit: list[str] = []
    for x in E.objects:
        try:
            canonical_splitting(F, x, depth)
        except ConducheException as e:
            logger.warning(f"No splitting found at {E.format_object(x)}: {e.message}")
            split = None
            unsplit.append(E.format_object(x))
    # a failed bounded search is never reported as a negative
    report.add(Check("locally_split", split, base_depth, exhaustive=False, payload={"unsplit": unsplit}))

    flagged = F.with_flags(
        functor_valid=True,
        dcf=counterexample is None,
        row_finite=row_finite.passed,
        strongly_surjective=surjective.passed,
        right_ore=ore.right_ore,
        strongly_right_ore=ore.strongly_right_ore,
        left_cancellative=properties.left_cancellative,
        right_cancellative=properties.right_cancellative,
        locally_split=split,
        depth=depth,
    )
    return report, flagged
