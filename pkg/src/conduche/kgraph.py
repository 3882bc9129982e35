"""k-graphs: path categories of coloured graphs modulo factorization squares.

A path is stored in normal form, colours nondecreasing from the range end,
so colour 0 edges sit nearest the range. A square ``[e, f, f2, e2]``
identifies the two-edge paths ``e f`` and ``f2 e2``.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from typing import Any

import networkx as nx

from conduche.category import Category, Morphism, NkMonoid, Obj
from conduche.exceptions import (
    DanglingEdge,
    InconsistentSquares,
    NoLift,
    NotComposable,
    UnknownMorphism,
    UnknownObject,
)
from conduche.fibration import Fibration, FibrationFlags, check_dcf

logger = logging.getLogger("conduche")


@dataclass(frozen=True)
class KPath:
    """A path ending at `vertex`; `edges[0]` is the edge nearest the range."""

    vertex: str
    edges: tuple[str, ...] = ()


class KGraphCategory(Category):
    """The category of paths of a k-graph, graded by the largest degree entry."""

    def __init__(
        self,
        skeleton: nx.MultiDiGraph,
        k: int,
        forward: Mapping[tuple[str, str], tuple[str, str]],
        name: str = "",
    ):
        super().__init__(name or f"{k}-graph")
        self.skeleton = skeleton
        self.k = k
        self.forward = dict(forward)
        self.backward = {v: key for key, v in self.forward.items()}
        self._edges: dict[str, tuple[str, str, int]] = {
            key: (src, tgt, data["color"])
            for src, tgt, key, data in skeleton.edges(keys=True, data=True)
        }
        self._vertices = sorted(skeleton.nodes)

    # -- edges -------------------------------------------------------------

    def color(self, edge: str) -> int:
        return self._edge(edge)[2]

    def edge_source(self, edge: str) -> str:
        return self._edge(edge)[0]

    def edge_target(self, edge: str) -> str:
        return self._edge(edge)[1]

    @property
    def edge_ids(self) -> list[str]:
        return sorted(self._edges)

    def _edge(self, edge: str) -> tuple[str, str, int]:
        try:
            return self._edges[edge]
        except KeyError:
            raise UnknownMorphism(f"{edge!r} is not an edge of {self.name}") from None

    def _path(self, m: Morphism) -> KPath:
        if not isinstance(m, KPath):
            raise UnknownMorphism(f"{m!r} is not a path of {self.name}")
        if m.vertex not in self.skeleton:
            raise UnknownMorphism(f"{m!r} ends at an unknown vertex")
        return m

    def _chain_source(self, vertex: str, edges: Sequence[str]) -> str:
        current = vertex
        for e in edges:
            src, tgt, _ = self._edge(e)
            if tgt != current:
                raise NotComposable(f"edge {e} does not end at {current}")
            current = src
        return current

    # -- normal forms ------------------------------------------------------

    def normalize(self, edges: Sequence[str]) -> tuple[str, ...]:
        """Sort colours by leftmost square swaps.

        A pair with no square rule is left in place.
        """
        word = list(edges)
        changed = True
        while changed:
            changed = False
            for i in range(len(word) - 1):
                x, y = word[i], word[i + 1]
                if self.color(x) > self.color(y) and (x, y) in self.forward:
                    word[i], word[i + 1] = self.forward[(x, y)]
                    changed = True
                    break
        return tuple(word)

    def make_path(self, vertex: str, edges: Sequence[str] = ()) -> KPath:
        """Build the normal form path with range `vertex`.

        Raises:
            NotComposable: If consecutive edges do not meet
        """
        if vertex not in self.skeleton:
            raise UnknownObject(f"{vertex!r} is not a vertex of {self.name}")
        self._chain_source(vertex, edges)
        return KPath(vertex, self.normalize(edges))

    def degree(self, m: Morphism) -> tuple[int, ...]:
        counts = [0] * self.k
        for e in self._path(m).edges:
            counts[self.color(e)] += 1
        return tuple(counts)

    # -- category interface -------------------------------------------------

    @property
    def objects(self) -> list[Obj]:
        return list(self._vertices)

    def source(self, m: Morphism) -> Obj:
        path = self._path(m)
        return self._chain_source(path.vertex, path.edges)

    def target(self, m: Morphism) -> Obj:
        return self._path(m).vertex

    def identity(self, x: Obj) -> Morphism:
        if x not in self.skeleton:
            raise UnknownObject(f"{x!r} is not a vertex of {self.name}")
        return KPath(x)  # type: ignore[arg-type]

    def is_identity(self, m: Morphism) -> bool:
        return not self._path(m).edges

    def compose(self, a: Morphism, b: Morphism) -> Morphism:
        pa, pb = self._path(a), self._path(b)
        if self.source(pa) != pb.vertex:
            raise NotComposable(f"{self.format(a)} and {self.format(b)} do not meet")
        return KPath(pa.vertex, self.normalize(pa.edges + pb.edges))

    def level(self, m: Morphism) -> int:
        return max(self.degree(m), default=0)

    def paths_of_degree(self, v: Obj, d: Sequence[int]) -> list[KPath]:
        """Normal form paths with range v and degree d."""
        if v not in self.skeleton:
            raise UnknownObject(f"{v!r} is not a vertex of {self.name}")
        colors = [c for c in range(self.k) for _ in range(d[c])]

        def compute() -> list[KPath]:
            found: list[KPath] = []

            def extend(current: str, prefix: tuple[str, ...]) -> None:
                if len(prefix) == len(colors):
                    found.append(KPath(v, prefix))  # type: ignore[arg-type]
                    return
                wanted = colors[len(prefix)]
                for src, _, key, color in self.skeleton.in_edges(current, keys=True, data="color"):
                    if color == wanted:
                        extend(src, prefix + (key,))

            extend(v, ())  # type: ignore[arg-type]
            return sorted(found, key=lambda p: p.edges)

        return self._cached(("degree", v, tuple(d)), compute)

    def morphisms_into(self, x: Obj, max_level: int = 0) -> list[Morphism]:
        def compute() -> list[Morphism]:
            base = NkMonoid(self.k)
            found: list[Morphism] = []
            for d in base.morphisms_into(base.OBJECT, max_level):
                found.extend(self.paths_of_degree(x, d))  # type: ignore[arg-type]
            return sorted(found, key=self.sort_key)

        return self._cached(("into", x, max_level), compute)

    def format(self, m: Morphism) -> str:
        path = self._path(m)
        return ".".join(path.edges) if path.edges else path.vertex

    def parse(self, text: str) -> Morphism:
        text = text.strip()
        if text in self.skeleton:
            return KPath(text)
        edges = [part.strip() for part in text.split(".") if part.strip()]
        if not edges:
            raise UnknownMorphism(f"{text!r} is not a path of {self.name}")
        return self.make_path(self.edge_target(edges[0]), edges)

    # -- factorization ------------------------------------------------------

    def factor(self, m: Morphism, degrees: Sequence[Sequence[int]]) -> list[KPath]:
        """Split a path into consecutive parts of the given degrees.

        Edges are moved to their slot by adjacent square swaps, then each
        part is put in normal form.

        Raises:
            NoLift: If the degrees do not add up or a swap has no square
        """
        path = self._path(m)
        total = tuple(sum(d[c] for d in degrees) for c in range(self.k))
        if total != self.degree(path):
            raise NoLift(
                f"degrees {[list(d) for d in degrees]} do not add up to {list(self.degree(path))}"
            )
        # slot of the j-th edge of colour c: which part it goes to
        slots: dict[int, list[int]] = {c: [] for c in range(self.k)}
        for index, d in enumerate(degrees):
            for c in range(self.k):
                slots[c].extend([index] * d[c])

        word = list(path.edges)

        def targets() -> list[tuple[int, int]]:
            seen = [0] * self.k
            keys: list[tuple[int, int]] = []
            for position, e in enumerate(word):
                c = self.color(e)
                keys.append((slots[c][seen[c]], position))
                seen[c] += 1
            return keys

        changed = True
        while changed:
            changed = False
            keys = targets()
            for i in range(len(word) - 1):
                if keys[i][0] > keys[i + 1][0]:
                    pair = (word[i], word[i + 1])
                    swapped = self.forward.get(pair) or self.backward.get(pair)
                    if swapped is None:
                        raise NoLift(f"no square rewrites {pair[0]}.{pair[1]}")
                    word[i], word[i + 1] = swapped
                    changed = True
                    break

        parts: list[KPath] = []
        vertex = path.vertex
        start = 0
        for d in degrees:
            length = sum(d)
            chunk = word[start : start + length]
            parts.append(KPath(vertex, self.normalize(chunk)))
            vertex = self._chain_source(vertex, chunk)
            start += length
        return parts

    def factorizations(self, m: Morphism) -> list[tuple[Morphism, Morphism]]:
        base = NkMonoid(self.k)
        pairs: list[tuple[Morphism, Morphism]] = []
        for p, q in base.factorizations(self.degree(m)):
            try:
                a, b = self.factor(m, [p, q])  # type: ignore[list-item]
            except NoLift:
                continue
            pairs.append((a, b))
        return pairs


def _square_rules(
    cat_edges: Mapping[str, tuple[str, str, int]],
    squares: Iterable[Sequence[str]],
    strict: bool,
) -> dict[tuple[str, str], tuple[str, str]]:
    forward: dict[tuple[str, str], tuple[str, str]] = {}
    for square in squares:
        if len(square) != 4:
            raise InconsistentSquares(f"square {list(square)!r} needs four edges")
        for e in square:
            if e not in cat_edges:
                raise DanglingEdge(f"square {list(square)!r} uses unknown edge {e!r}")
        e, f, f2, e2 = square
        color = {x: cat_edges[x][2] for x in square}
        if strict:
            if color[e] != color[e2] or color[f] != color[f2] or color[e] == color[f]:
                raise InconsistentSquares(
                    f"square {list(square)!r} does not pair two colours", {"square": list(square)}
                )
            # e f and f2 e2 must be paths with the same ends
            if cat_edges[e][0] != cat_edges[f][1] or cat_edges[f2][0] != cat_edges[e2][1]:
                raise InconsistentSquares(
                    f"square {list(square)!r} is not made of paths", {"square": list(square)}
                )
            if cat_edges[e][1] != cat_edges[f2][1] or cat_edges[f][0] != cat_edges[e2][0]:
                raise InconsistentSquares(
                    f"square {list(square)!r} has mismatched ends", {"square": list(square)}
                )
        if color[e] > color[f]:
            key, value = (e, f), (f2, e2)
        else:
            key, value = (f2, e2), (e, f)
        if key in forward and strict:
            raise InconsistentSquares(
                f"two squares rewrite {key[0]}.{key[1]}", {"pair": list(key)}
            )
        forward[key] = value
    return forward


def _check_bijective(
    skeleton: nx.MultiDiGraph,
    edges: Mapping[str, tuple[str, str, int]],
    forward: Mapping[tuple[str, str], tuple[str, str]],
) -> None:
    unsorted: set[tuple[str, str]] = set()
    sorted_pairs: set[tuple[str, str]] = set()
    for x, (x_src, _, x_color) in edges.items():
        for _, _, y, y_color in skeleton.in_edges(x_src, keys=True, data="color"):
            if x_color > y_color:
                unsorted.add((x, y))
            elif x_color < y_color:
                sorted_pairs.add((x, y))
    missing = sorted(unsorted - set(forward))
    if missing:
        raise InconsistentSquares(
            f"no square rewrites {missing[0][0]}.{missing[0][1]}",
            {"missing": [list(pair) for pair in missing]},
        )
    images = list(forward.values())
    if len(set(images)) != len(images) or set(images) != sorted_pairs:
        uncovered = sorted(sorted_pairs - set(images))
        raise InconsistentSquares(
            "factorization squares are not a bijection",
            {"uncovered": [list(pair) for pair in uncovered]},
        )


def build_kgraph(
    vertices: Sequence[str],
    edges: Sequence[Mapping[str, Any]],
    squares: Iterable[Sequence[str]] = (),
    k: int | None = None,
    strict: bool = True,
    name: str = "",
) -> tuple[KGraphCategory, Fibration]:
    """Build a k-graph and its degree functor to ℕᵏ.

    Args:
        vertices: Vertex names
        edges: Dicts with "id", "src", "tgt" and "color" (0 based)
        squares: Lists [e, f, f2, e2] identifying e f with f2 e2
        k: Number of colours (defaults to the largest colour + 1)
        strict: Check that squares form bijections; when False the last
            square wins and no check runs
        name: Display name

    Returns:
        The path category and the degree fibration

    Raises:
        DanglingEdge: If an edge or square refers to something unknown
        InconsistentSquares: If strict and the squares do not define a k-graph
    """
    skeleton = nx.MultiDiGraph()
    skeleton.add_nodes_from(vertices)
    table: dict[str, tuple[str, str, int]] = {}
    for edge in edges:
        eid, src, tgt, color = edge["id"], edge["src"], edge["tgt"], int(edge.get("color", 0))
        if src not in skeleton or tgt not in skeleton:
            raise DanglingEdge(f"edge {eid!r} joins unknown vertices {src!r} -> {tgt!r}")
        if eid in table or eid in skeleton:
            raise DanglingEdge(f"edge id {eid!r} is used twice")
        skeleton.add_edge(src, tgt, key=eid, color=color)
        table[eid] = (src, tgt, color)
    if k is None:
        k = max((c for _, _, c in table.values()), default=0) + 1
    if any(not 0 <= c < k for _, _, c in table.values()):
        raise InconsistentSquares(f"edge colours must lie in 0..{k - 1}")

    squares = [list(s) for s in squares]
    forward = _square_rules(table, squares, strict)
    if strict:
        _check_bijective(skeleton, table, forward)

    cat = KGraphCategory(skeleton, k, forward, name=name or f"{k}-graph")
    base = NkMonoid(k)

    strongly_surjective = bool(vertices) and all(
        {color for _, _, color in skeleton.in_edges(v, data="color")} >= set(range(k))
        for v in vertices
    )
    flags = FibrationFlags(
        functor_valid=True if strict else None,
        dcf=True if strict else None,
        row_finite=True,
        strongly_surjective=strongly_surjective,
        right_ore=True,
        strongly_right_ore=True,
        left_cancellative=True,
        right_cancellative=True,
        locally_split=strongly_surjective or None,
    )
    degree = Fibration(
        cat,
        base,
        object_map=lambda v: NkMonoid.OBJECT,
        morphism_map=cat.degree,
        name=f"degree functor of {cat.name}",
        flags=flags,
        factorizer=lambda phi, parts: cat.factor(phi, parts),
        fiber_enumerator=lambda x, b: cat.paths_of_degree(x, b),
    )

    if strict and k >= 3:
        counterexample = check_dcf(degree, depth=1)
        if counterexample is not None:
            raise InconsistentSquares(
                "factorization squares are not associative", counterexample.to_dict()
            )
    logger.info(f"Built {cat.name} with {len(table)} edges and {len(squares)} squares")
    return cat, degree
