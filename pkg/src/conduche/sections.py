"""Sections of a set valued presheaf on a poset, fibred over the poset."""

from __future__ import annotations

import logging
from collections.abc import Mapping, Sequence

from conduche.category import PosetCategory
from conduche.exceptions import BaseNotOre, NonFunctorialRestriction
from conduche.fibration import Evaluator, Fibration, FibrationFlags, check_ore

logger = logging.getLogger("conduche")

Restrictions = dict[tuple[str, str], dict[str, str]]


def section_object(u: str, a: str) -> str:
    return f"{u}:{a}"


def _close_restrictions(
    base: PosetCategory, sections: Mapping[str, Sequence[str]], given: Restrictions
) -> Restrictions:
    maps: Restrictions = {key: dict(value) for key, value in given.items()}
    for u in base.elements:
        identity = {a: a for a in sections[u]}
        if maps.setdefault((u, u), identity) != identity:
            raise NonFunctorialRestriction(f"restriction from {u} to itself is not the identity")
    changed = True
    while changed:
        changed = False
        for v, w in sorted(base.leq):
            for w2, u in sorted(base.leq):
                if w2 != w or (v, u) in maps or (v, w) not in maps or (w, u) not in maps:
                    continue
                maps[(v, u)] = {a: maps[(v, w)][b] for a, b in maps[(w, u)].items()}
                changed = True
    missing = sorted(pair for pair in base.leq if pair not in maps)
    if missing:
        v, u = missing[0]
        raise NonFunctorialRestriction(f"no restriction from {u} to {v}", {"missing": [list(p) for p in missing]})
    return maps


def _check_functorial(
    base: PosetCategory, sections: Mapping[str, Sequence[str]], maps: Restrictions
) -> None:
    for (v, u), table in maps.items():
        if set(table) != set(sections[u]) or not set(table.values()) <= set(sections[v]):
            raise NonFunctorialRestriction(
                f"restriction from {u} to {v} is not a map of sections",
                {"from": u, "to": v},
            )
    for v, w in base.leq:
        for w2, u in base.leq:
            if w2 != w:
                continue
            direct = maps[(v, u)]
            through = {a: maps[(v, w)][maps[(w, u)][a]] for a in sections[u]}
            if direct != through:
                raise NonFunctorialRestriction(
                    f"restricting {u} to {v} directly and through {w} disagree",
                    {"chain": [v, w, u]},
                )


def build_presheaf_sections(
    base: PosetCategory,
    sections: Mapping[str, Sequence[str]],
    restrictions: Mapping[tuple[str, str], Mapping[str, str]],
) -> tuple[PosetCategory, Fibration]:
    """Build the poset of sections and its projection to the base.

    (V, b) <= (U, a) iff V <= U and b = a|V. Restrictions are keyed by
    (V, U) and send sections over U to sections over V. Missing ones are
    composed from given ones.

    Raises:
        NonFunctorialRestriction: If restrictions are missing or do not compose
        BaseNotOre: If the base poset is not right Ore
    """
    ore = check_ore(base)
    if ore.right_ore is not True:
        raise BaseNotOre(f"{base.name} is not right Ore", ore.counterexample)
    maps = _close_restrictions(base, sections, {k: dict(v) for k, v in restrictions.items()})
    _check_functorial(base, sections, maps)

    elements = [section_object(u, a) for u in base.elements for a in sections[u]]
    pairs = {
        (section_object(v, maps[(v, u)][a]), section_object(u, a))
        for v, u in base.leq
        for a in sections[u]
    }
    total = PosetCategory(elements, pairs, name=f"sections over {base.name}")
    owner = {section_object(u, a): (u, a) for u in base.elements for a in sections[u]}

    def project_morphism(m: str) -> str:
        low, high = m.split("<=")
        return base.arrow(owner[low][0], owner[high][0])

    def splitting(x: str) -> Evaluator:
        u, a = owner[x]

        def evaluate(b: str) -> str:
            v = base.source(b)
            return total.arrow(section_object(v, maps[(v, u)][a]), x)  # type: ignore[index]

        return evaluate

    flags = FibrationFlags(
        functor_valid=True,
        dcf=True,
        row_finite=True,
        strongly_surjective=all(sections[u] for u in base.elements),
        right_ore=True,
        strongly_right_ore=ore.strongly_right_ore,
        left_cancellative=True,
        right_cancellative=True,
        locally_split=True,
    )
    projection = Fibration(
        total,
        base,
        object_map=lambda x: owner[x][0],
        morphism_map=project_morphism,
        name=f"projection of {total.name}",
        flags=flags,
        splitting=splitting,
        fiber_enumerator=lambda x, b: [splitting(x)(b)],
    )
    logger.info(f"Built {total.name} with {len(elements)} sections")
    return total, projection
