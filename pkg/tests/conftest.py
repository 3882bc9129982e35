import random
from collections.abc import Callable

import pytest

from conduche.bundle import Bundle, load_bundle
from conduche.category import Category, Morphism
from conduche.fibration import Fibration, ore_complete
from conduche.settings import seed_from_env


@pytest.fixture(autouse=True)
def disable_styling(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setattr("conduche.__main__.DISABLE_STYLING", True)


@pytest.fixture
def rng() -> random.Random:
    """Seeded from CONDUCHE_SEED so failures reproduce."""
    return random.Random(seed_from_env())


@pytest.fixture(scope="session")
def o2_bundle() -> Bundle:
    return load_bundle("catalog:o2")


@pytest.fixture(scope="session")
def o2(o2_bundle: Bundle) -> Fibration:
    return o2_bundle.fibration


@pytest.fixture(scope="session")
def o3() -> Fibration:
    return load_bundle("catalog:o3").fibration


@pytest.fixture(scope="session")
def two_graph() -> Fibration:
    return load_bundle("catalog:two_graph").fibration


@pytest.fixture(scope="session")
def s3() -> Fibration:
    return load_bundle("catalog:s3").fibration


@pytest.fixture(scope="session")
def z2() -> Fibration:
    return load_bundle("catalog:z2").fibration


@pytest.fixture(scope="session")
def z3() -> Fibration:
    return load_bundle("catalog:z3").fibration


@pytest.fixture(scope="session")
def pair_groupoid() -> Fibration:
    return load_bundle("catalog:pair_groupoid").fibration


@pytest.fixture(scope="session")
def chain_sections() -> Fibration:
    return load_bundle("catalog:chain_sections").fibration


@pytest.fixture
def shifted_completer() -> Callable[[Category], Callable[[Morphism, Morphism], tuple[Morphism, Morphism]]]:
    """The canonical square of (m, n) followed by a non-identity c: (pc, qc)."""

    def for_base(B: Category) -> Callable[[Morphism, Morphism], tuple[Morphism, Morphism]]:
        def complete(m: Morphism, n: Morphism) -> tuple[Morphism, Morphism]:
            p, q = ore_complete(B, m, n)
            c = next(c for c in B.morphisms_into(B.source(p), 1) if not B.is_identity(c))
            return B.compose(p, c), B.compose(q, c)

        return complete

    return for_base
