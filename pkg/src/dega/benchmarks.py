"""Pseudo-Boolean benchmark functions and graph input for MIVS."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import _kernels as K
from .bitcore import BitString

_EMPTY = np.zeros(0, dtype=np.int64)


class GraphFormatError(ValueError):
    """Malformed edge-list input; ``line`` is 1-based."""

    def __init__(self, line: int, message: str) -> None:
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph on vertices 1..vertex_count."""

    vertex_count: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        if self.vertex_count < 1:
            raise ValueError("a graph needs at least one vertex")
        seen = set()
        for i, j in self.edges:
            if i == j:
                raise ValueError(f"self-loop at vertex {i}")
            if not (1 <= i <= self.vertex_count and 1 <= j <= self.vertex_count):
                raise ValueError(f"edge ({i}, {j}) out of range")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            seen.add(key)
        object.__setattr__(self, "edges", tuple(sorted(seen)))

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """0-based adjacency as ``(indptr, indices)``."""
        n = self.vertex_count
        nbrs: list[list[int]] = [[] for _ in range(n)]
        for i, j in self.edges:
            nbrs[i - 1].append(j - 1)
            nbrs[j - 1].append(i - 1)
        indptr = np.zeros(n + 1, dtype=np.int64)
        indptr[1:] = np.cumsum([len(a) for a in nbrs])
        indices = np.array([u for a in nbrs for u in sorted(a)], dtype=np.int64)
        return indptr, indices

    def is_independent(self, vertices) -> bool:
        chosen = set(vertices)
        return not any(i in chosen and j in chosen for i, j in self.edges)


def load_graph(source: str) -> Graph:
    """Parse the edge-list format.

    The first non-comment line holds the vertex count; every later line holds
    one edge ``i j`` with ``1 <= i < j <= n``.  Lines starting with ``#`` and
    blank lines are skipped.
    """
    n = None
    edges: list[tuple[int, int]] = []
    seen: dict[tuple[int, int], int] = {}
    for lineno, raw in enumerate(source.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if n is None:
            if len(parts) != 1 or not parts[0].isdigit() or int(parts[0]) < 1:
                raise GraphFormatError(lineno, f"expected a positive vertex count, got {line!r}")
            n = int(parts[0])
            continue
        if len(parts) != 2 or not all(p.isdigit() for p in parts):
            raise GraphFormatError(lineno, f"expected 'i j', got {line!r}")
        i, j = int(parts[0]), int(parts[1])
        if i == j:
            raise GraphFormatError(lineno, f"self-loop at vertex {i}")
        if not (1 <= i <= n and 1 <= j <= n):
            raise GraphFormatError(lineno, f"endpoint out of range 1..{n}")
        key = (min(i, j), max(i, j))
        if key in seen:
            raise GraphFormatError(lineno, f"duplicate edge {key} (first at line {seen[key]})")
        seen[key] = lineno
        edges.append(key)
    if n is None:
        raise GraphFormatError(1, "missing vertex count")
    return Graph(n, tuple(edges))


def pbo_f22_graph(n: int) -> Graph:
    """MIVS instance F22 of the IOHprofiler PBO suite.

    Vertices 1..n/2 and n/2+1..n form two paths; vertex i is further joined
    to i+n/2+1 (for i < n/2) and to i+n/2-1 (for 2 <= i <= n/2).
    """
    if n < 4 or n % 2:
        raise ValueError(f"F22 needs an even n >= 4, got {n}")
    half = n // 2
    edges = []
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            if (
                (i != half and j == i + 1)
                or (i <= half - 1 and j == i + half + 1)
                or (2 <= i <= half and j == i + half - 1)
            ):
                edges.append((i, j))
    return Graph(n, tuple(edges))


def f22_optimum(n: int) -> int:
    """Maximum independent set size of :func:`pbo_f22_graph` (IOHprofiler value)."""
    return n // 2 + 1 if n % 4 == 2 else n // 2


def leading_ones(x: BitString) -> int:
    return int(K.full_fitness(K.LO, x.bits, _EMPTY, _EMPTY))


def one_max(x: BitString) -> int:
    return int(K.full_fitness(K.OM, x.bits, _EMPTY, _EMPTY))


def lfhw(x: BitString) -> float:
    return K.full_fitness(K.LFHW, x.bits, _EMPTY, _EMPTY)


def mivs_fitness(x: BitString, g: Graph) -> float:
    """Selected vertices minus n for every edge with both ends selected."""
    if len(x) != g.vertex_count:
        raise ValueError(f"dimension {len(x)} does not match graph with {g.vertex_count} vertices")
    indptr, indices = g.csr
    return K.full_fitness(K.MIVS, x.bits, indptr, indices)


BENCHMARKS = ("lo", "om", "lfhw", "mivs")
_KIND = {"lo": K.LO, "om": K.OM, "lfhw": K.LFHW, "mivs": K.MIVS}


@dataclass
class FitnessFunction:
    """A benchmark bound to a dimension, counting its own evaluations."""

    name: str
    dimension: int
    graph: Graph | None = None
    known_optimum: float | None = None
    evaluation_count: int = field(default=0, init=False)

    def __post_init__(self) -> None:
        if self.name not in _KIND:
            raise ValueError(f"unknown benchmark {self.name!r}; choose from {', '.join(BENCHMARKS)}")
        if self.dimension < 1:
            raise ValueError("dimension must be positive")
        if self.name == "mivs":
            if self.graph is None:
                raise ValueError("mivs needs a graph")
            if self.graph.vertex_count != self.dimension:
                raise ValueError("graph size does not match dimension")
        elif self.graph is not None:
            raise ValueError(f"{self.name} takes no graph")

    @property
    def kind(self) -> int:
        return _KIND[self.name]

    @property
    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        return self.graph.csr if self.graph is not None else (_EMPTY, _EMPTY)

    def evaluate(self, x: BitString) -> float:
        if len(x) != self.dimension:
            raise ValueError(f"expected {self.dimension} bits, got {len(x)}")
        self.evaluation_count += 1
        indptr, indices = self.csr
        return K.full_fitness(self.kind, x.bits, indptr, indices)

    __call__ = evaluate


def make_benchmark(name: str, n: int, graph: Graph | None = None) -> FitnessFunction:
    """Build a benchmark with its known optimum filled in.

    For ``mivs`` without an explicit graph the F22 instance is used; a
    user-supplied graph has no known optimum.
    """
    if name == "lo" or name == "om":
        return FitnessFunction(name, n, known_optimum=float(n))
    if name == "lfhw":
        return FitnessFunction(name, n, known_optimum=n * (n + 1) / 2)
    if name == "mivs":
        if graph is None:
            return FitnessFunction(name, n, pbo_f22_graph(n), known_optimum=float(f22_optimum(n)))
        return FitnessFunction(name, n, graph)
    raise ValueError(f"unknown benchmark {name!r}; choose from {', '.join(BENCHMARKS)}")
