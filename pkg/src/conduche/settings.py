"""Defaults and resolved run settings."""

from __future__ import annotations

import argparse
import logging
import os
from dataclasses import asdict, dataclass
from typing import Any

logger = logging.getLogger("conduche")

DEFAULT_DEPTH = 4
DEFAULT_BUDGET = 10_000
DEFAULT_TOLERANCE = 1e-9
DEFAULT_SEED = 0
SEED_ENV_VAR = "CONDUCHE_SEED"
# graded bases check relation 6 on every base morphism up to this level
RELATION6_DEFAULT_LEVEL = 2
# level bound for generic completion searches on graded categories
SEARCH_LEVEL = 8


def seed_from_env() -> int:
    """Read the sampling seed from the environment.

    Returns:
        The integer in CONDUCHE_SEED, or DEFAULT_SEED when unset or invalid
    """
    raw = os.environ.get(SEED_ENV_VAR)
    if raw is None or raw.strip() == "":
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError:
        logger.warning(f"Ignoring non-integer {SEED_ENV_VAR}={raw!r}")
        return DEFAULT_SEED


@dataclass(frozen=True)
class Settings:
    depth: int = DEFAULT_DEPTH
    budget: int = DEFAULT_BUDGET
    tolerance: float = DEFAULT_TOLERANCE
    seed: int = DEFAULT_SEED
    output_format: str = "json"

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> Settings:
        seed = getattr(args, "seed", None)
        return cls(
            depth=getattr(args, "depth", DEFAULT_DEPTH),
            budget=getattr(args, "budget", DEFAULT_BUDGET),
            tolerance=getattr(args, "tolerance", DEFAULT_TOLERANCE),
            seed=seed_from_env() if seed is None else seed,
            output_format=getattr(args, "format", "json"),
        )

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)
