"""Sampling graphs from the equitable (block-regular) ensemble.

Vertices are indexed globally ``0..N-1`` and each block occupies a
contiguous range in declaration order. Every sub-graph between a pair of
blocks is drawn by stub pairing; see :func:`generate_regular` and
:func:`generate_biregular`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path

import numpy as np

from .errors import InfeasibleError, SamplingError, StructureError

DEFAULT_MAX_RESTARTS = 1000


@dataclass(frozen=True)
class BlockStructure:
    """Parameters of an equitable ensemble.

    ``connectivity[a][b]`` is the number of neighbours every vertex of
    block ``a`` has in block ``b``.
    """

    sizes: tuple
    connectivity: tuple

    def __post_init__(self):
        object.__setattr__(self, "sizes", tuple(int(n) for n in self.sizes))
        object.__setattr__(
            self,
            "connectivity",
            tuple(tuple(int(c) for c in row) for row in self.connectivity),
        )

    @property
    def m(self) -> int:
        return len(self.sizes)

    @property
    def n_vertices(self) -> int:
        return sum(self.sizes)

    @property
    def offsets(self) -> tuple:
        """Index of the first vertex of each block."""
        return tuple(int(x) for x in np.concatenate([[0], np.cumsum(self.sizes)[:-1]]))

    def block_vertices(self, a: int) -> range:
        start = self.offsets[a]
        return range(start, start + self.sizes[a])

    def matrix(self) -> np.ndarray:
        return np.array(self.connectivity, dtype=float).reshape(self.m, self.m)

    def to_dict(self) -> dict:
        return {"sizes": list(self.sizes), "connectivity": [list(r) for r in self.connectivity]}

    @classmethod
    def from_dict(cls, data: dict) -> "BlockStructure":
        return cls(data["sizes"], data["connectivity"])

    @classmethod
    def core_periphery(cls, n_core: int, k: int, kp: int) -> "BlockStructure":
        """Two-block structure ``[[k, kp], [1, 0]]`` with ``kp * n_core`` periphery vertices."""
        return cls((n_core, kp * n_core), ((k, kp), (1, 0)))


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok


def validate_structure(s: BlockStructure) -> ValidationReport:
    """Check equitability and simple-graph feasibility of ``s``.

    Every violated constraint is listed; nothing is raised.
    """
    problems = []
    m = s.m
    if m == 0:
        return ValidationReport(("structure has no blocks",))
    for a, n in enumerate(s.sizes):
        if n <= 0:
            problems.append(f"block {a} has non-positive size {n}")
    if len(s.connectivity) != m or any(len(row) != m for row in s.connectivity):
        problems.append(f"connectivity is not {m}x{m}")
        return ValidationReport(tuple(problems))
    c = s.connectivity
    N = s.sizes
    for a in range(m):
        for b in range(m):
            if c[a][b] < 0:
                problems.append(f"c[{a}][{b}]={c[a][b]} is negative")
    for a in range(m):
        for b in range(a + 1, m):
            if N[a] * c[a][b] != N[b] * c[b][a]:
                problems.append(
                    f"N[{a}]*c[{a}][{b}]={N[a] * c[a][b]} != "
                    f"N[{b}]*c[{b}][{a}]={N[b] * c[b][a]}"
                )
    for a in range(m):
        if c[a][a] > N[a] - 1:
            problems.append(f"c[{a}][{a}]={c[a][a]} exceeds N[{a}]-1={N[a] - 1}")
        if (N[a] * c[a][a]) % 2:
            problems.append(
                f"N[{a}]*c[{a}][{a}]={N[a] * c[a][a]} is odd, no regular graph exists"
            )
        for b in range(m):
            if a != b and c[a][b] > N[b]:
                problems.append(f"c[{a}][{b}]={c[a][b]} exceeds N[{b}]={N[b]}")
    return ValidationReport(tuple(problems))


def _has_suitable_pair(stubs, edges):
    nodes = sorted(set(stubs))
    for u, v in combinations(nodes, 2):
        if (u, v) not in edges:
            return True
    return False


def _pair_regular(stubs, rng, max_rounds):
    edges = set()
    stubs = np.asarray(stubs)
    rounds = 0
    while stubs.size:
        rounds += 1
        if rounds > max_rounds:
            return None
        perm = rng.permutation(stubs).tolist()
        leftover = []
        for u, v in zip(perm[0::2], perm[1::2]):
            if u > v:
                u, v = v, u
            if u != v and (u, v) not in edges:
                edges.add((u, v))
            else:
                leftover.extend((u, v))
        if leftover and not _has_suitable_pair(leftover, edges):
            return None
        stubs = np.array(leftover, dtype=np.int64)
    return edges


def generate_regular(k: int, vertices, rng, max_restarts: int = DEFAULT_MAX_RESTARTS) -> frozenset:
    """Sample a simple ``k``-regular graph on ``vertices``.

    Stubs are shuffled and paired; self-loops and repeated pairs are set
    aside and re-paired among themselves. If the set-aside stubs admit no
    valid pair the whole matching is discarded and sampling restarts.

    Returns a frozenset of ``(i, j)`` tuples with ``i < j``.
    """
    vertices = [int(v) for v in vertices]
    n = len(vertices)
    if k < 0 or k > max(n - 1, 0) or (k * n) % 2:
        raise InfeasibleError(f"no simple {k}-regular graph on {n} vertices")
    if k == 0:
        return frozenset()
    rng = np.random.default_rng(rng)
    stubs = np.repeat(np.array(vertices, dtype=np.int64), k)
    attempt = 0
    for attempt in range(1, max_restarts + 1):
        edges = _pair_regular(stubs, rng, max_rounds=10 * stubs.size)
        if edges is not None:
            return frozenset(edges)
    raise SamplingError(f"{k}-regular pairing on {n} vertices failed", attempt)


def _pair_bipartite(left_stubs, right_stubs, rng, max_rounds):
    edges = set()
    left = np.asarray(left_stubs)
    right = np.asarray(right_stubs)
    rounds = 0
    while left.size:
        rounds += 1
        if rounds > max_rounds:
            return None
        perm = rng.permutation(right).tolist()
        rest_l, rest_r = [], []
        for u, v in zip(left.tolist(), perm):
            if (u, v) not in edges:
                edges.add((u, v))
            else:
                rest_l.append(u)
                rest_r.append(v)
        if rest_l:
            if not any((u, v) not in edges for u in set(rest_l) for v in set(rest_r)):
                return None
        left = np.array(rest_l, dtype=np.int64)
        right = np.array(rest_r, dtype=np.int64)
    return edges


def generate_biregular(k: int, left, right, rng, max_restarts: int = DEFAULT_MAX_RESTARTS) -> frozenset:
    """Sample a simple bipartite graph with left degree ``k``.

    Right vertices receive degree ``k * len(left) / len(right)``, which
    must be an integer not exceeding ``len(left)``.
    """
    left = [int(v) for v in left]
    right = [int(v) for v in right]
    nl, nr = len(left), len(right)
    if k <= 0 or nr == 0:
        raise InfeasibleError(f"biregular graph needs k >= 1 and a non-empty right side (k={k})")
    if (k * nl) % nr:
        raise InfeasibleError(f"right degree {k}*{nl}/{nr} is not an integer")
    kr = k * nl // nr
    if k > nr or kr > nl:
        raise InfeasibleError(f"degrees ({k}, {kr}) exceed side sizes ({nr}, {nl})")
    rng = np.random.default_rng(rng)
    left_stubs = np.repeat(np.array(left, dtype=np.int64), k)
    right_stubs = np.repeat(np.array(right, dtype=np.int64), kr)
    attempt = 0
    for attempt in range(1, max_restarts + 1):
        pairs = _pair_bipartite(left_stubs, right_stubs, rng, max_rounds=10 * left_stubs.size)
        if pairs is not None:
            return frozenset((min(u, v), max(u, v)) for u, v in pairs)
    raise SamplingError(f"({k},{kr})-biregular pairing on {nl}+{nr} vertices failed", attempt)


@dataclass(frozen=True)
class EquitableGraph:
    block_of: tuple
    edges: frozenset
    structure: BlockStructure = field(repr=False)

    @property
    def n_vertices(self) -> int:
        return len(self.block_of)

    def sorted_edges(self) -> list:
        return sorted(self.edges)

    def adjacency_matrix(self, dtype=float) -> np.ndarray:
        n = self.n_vertices
        A = np.zeros((n, n), dtype=dtype)
        if self.edges:
            ij = np.array(self.sorted_edges(), dtype=np.int64)
            A[ij[:, 0], ij[:, 1]] = 1
            A[ij[:, 1], ij[:, 0]] = 1
        return A

    def block_degrees(self) -> np.ndarray:
        """``(N, m)`` array: number of neighbours of each vertex in each block."""
        n, m = self.n_vertices, self.structure.m
        counts = np.zeros((n, m), dtype=np.int64)
        if self.edges:
            ij = np.array(self.sorted_edges(), dtype=np.int64)
            blocks = np.asarray(self.block_of, dtype=np.int64)
            np.add.at(counts, (ij[:, 0], blocks[ij[:, 1]]), 1)
            np.add.at(counts, (ij[:, 1], blocks[ij[:, 0]]), 1)
        return counts


def _block_assignment(s: BlockStructure) -> tuple:
    return tuple(a for a, n in enumerate(s.sizes) for _ in range(n))


def generate_equitable(s: BlockStructure, rng, max_restarts: int = DEFAULT_MAX_RESTARTS) -> EquitableGraph:
    """Assemble an equitable graph from independent regular and biregular pieces.

    One child stream is spawned from ``rng`` per block pair ``(a, b)``,
    ``a <= b``, in lexicographic order, so the result depends only on the
    seed and the structure.
    """
    report = validate_structure(s)
    if not report.ok:
        raise StructureError(report.violations)
    rng = np.random.default_rng(rng)
    pairs = [(a, b) for a in range(s.m) for b in range(a, s.m)]
    streams = rng.spawn(len(pairs))
    edges = set()
    for (a, b), stream in zip(pairs, streams):
        k = s.connectivity[a][b]
        if k == 0:
            continue
        if a == b:
            part = generate_regular(k, s.block_vertices(a), stream, max_restarts)
        else:
            part = generate_biregular(k, s.block_vertices(a), s.block_vertices(b), stream, max_restarts)
        edges.update(part)
    return EquitableGraph(_block_assignment(s), frozenset(edges), s)


def verify_regularity(g: EquitableGraph) -> bool:
    """True iff every vertex has exactly ``c[a][b]`` neighbours in block ``b``."""
    if any(i == j for i, j in g.edges):
        return False
    expected = g.structure.matrix().astype(np.int64)[np.asarray(g.block_of, dtype=np.int64)]
    if g.n_vertices == 0:
        return True
    return bool(np.array_equal(g.block_degrees(), expected))


def load_structure(path) -> BlockStructure:
    """Read a ``{"sizes": [...], "connectivity": [[...]]}`` JSON file."""
    with open(path) as fh:
        return BlockStructure.from_dict(json.load(fh))


def write_edge_list(g: EquitableGraph, path, seed=None) -> None:
    sizes = ",".join(str(n) for n in g.structure.sizes)
    lines = [f"# equitable m={g.structure.m} sizes={sizes} seed={seed}"]
    lines += [f"{i} {j}" for i, j in g.sorted_edges()]
    Path(path).write_text("\n".join(lines) + "\n")


def write_blocks(g: EquitableGraph, path) -> None:
    Path(path).write_text("".join(f"{v} {a}\n" for v, a in enumerate(g.block_of)))


def read_edge_list(path):
    """Parse an edge-list file; returns ``(header, edges)``.

    ``header`` is a dict with keys ``m``, ``sizes`` and ``seed``.
    """
    header = {}
    edges = []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            for token in line[1:].split()[1:]:
                key, _, value = token.partition("=")
                header[key] = value
            continue
        if line.strip():
            i, j = line.split()
            edges.append((int(i), int(j)))
    header["m"] = int(header["m"])
    header["sizes"] = tuple(int(x) for x in header["sizes"].split(","))
    return header, edges


def read_blocks(path) -> tuple:
    pairs = [tuple(int(x) for x in line.split()) for line in Path(path).read_text().splitlines() if line.strip()]
    pairs.sort()
    return tuple(b for _, b in pairs)
