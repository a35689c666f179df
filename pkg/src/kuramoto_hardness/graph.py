"""Weighted graphs, phase states and their text file formats.

Node indices are 0-based. Angles are stored in [0, 2*pi) and every
comparison between angles goes through circular differences in (-pi, pi].
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

TWO_PI = 2.0 * math.pi

GRAPH_HEADER = "kuramoto-graph v1"
STATE_HEADER = "kuramoto-state v1"


class FormatError(ValueError):
    """Malformed graph or state text. Carries the offending 1-based line."""

    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


def wrap_angle(x):
    """Map angles into [0, 2*pi)."""
    y = np.mod(x, TWO_PI)
    # np.mod can return exactly 2*pi for tiny negative inputs
    return np.where(y >= TWO_PI, 0.0, y)


def circular_difference(x):
    """Map angle differences into (-pi, pi]."""
    y = np.pi - np.mod(np.pi - np.asarray(x, dtype=float), TWO_PI)
    return y


@dataclass(frozen=True)
class WeightedGraph:
    """Symmetric graph with strictly positive edge weights.

    ``edges`` holds ``(i, j, w)`` triples with ``i < j``, sorted by ``(i, j)``.
    """

    n: int
    edges: tuple[tuple[int, int, float], ...] = ()

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise ValueError(f"node count must be a positive integer, got {self.n!r}")
        cleaned = []
        seen = set()
        for e in self.edges:
            i, j, w = int(e[0]), int(e[1]), float(e[2])
            if i > j:
                i, j = j, i
            if i == j:
                raise ValueError(f"self-loop at node {i}")
            if not (0 <= i and j < self.n):
                raise ValueError(f"edge ({i}, {j}) out of range for n={self.n}")
            if not (w > 0.0 and math.isfinite(w)):
                raise ValueError(f"edge ({i}, {j}) has non-positive weight {w!r}")
            if (i, j) in seen:
                raise ValueError(f"duplicate edge ({i}, {j})")
            seen.add((i, j))
            cleaned.append((i, j, w))
        cleaned.sort(key=lambda e: (e[0], e[1]))
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "edges", tuple(cleaned))

    @property
    def m(self) -> int:
        return len(self.edges)

    @cached_property
    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Edge endpoints and weights as parallel arrays ``(I, J, W)``."""
        if not self.edges:
            return (np.zeros(0, dtype=np.intp), np.zeros(0, dtype=np.intp), np.zeros(0))
        arr = np.array(self.edges, dtype=float)
        return arr[:, 0].astype(np.intp), arr[:, 1].astype(np.intp), arr[:, 2].copy()

    @cached_property
    def incidence(self) -> np.ndarray:
        """Signed incidence matrix, shape (m, n): +1 at i, -1 at j."""
        I, J, _ = self.edge_arrays
        B = np.zeros((self.m, self.n))
        B[np.arange(self.m), I] = 1.0
        B[np.arange(self.m), J] = -1.0
        return B

    @cached_property
    def adjacency(self) -> np.ndarray:
        A = np.zeros((self.n, self.n))
        I, J, W = self.edge_arrays
        A[I, J] = W
        A[J, I] = W
        return A

    @cached_property
    def weighted_degree(self) -> np.ndarray:
        return self.adjacency.sum(axis=1)

    def neighbors(self, i: int) -> list[int]:
        return [int(j) for j in np.nonzero(self.adjacency[i])[0]]


@dataclass(frozen=True, eq=False)
class PhaseState:
    """One phase angle per node, normalized into [0, 2*pi)."""

    theta: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.array(self.theta, dtype=float).reshape(-1)
        if not np.all(np.isfinite(arr)):
            raise ValueError("phase angles must be finite")
        arr = wrap_angle(arr)
        arr.flags.writeable = False
        object.__setattr__(self, "theta", arr)

    def __len__(self) -> int:
        return len(self.theta)

    def __getitem__(self, i):
        return self.theta[i]

    def __iter__(self):
        return iter(self.theta.tolist())

    def __array__(self, dtype=None, copy=None):
        return self.theta if dtype is None else self.theta.astype(dtype)

    def __eq__(self, other):
        if not isinstance(other, PhaseState):
            return NotImplemented
        return np.array_equal(self.theta, other.theta)

    def __repr__(self):
        return f"PhaseState({np.array2string(self.theta, precision=6)})"


@dataclass(frozen=True)
class GadgetDescriptor:
    """Maps gadget roles to node indices of the companion graph.

    ``cliques`` is empty for the weighted gadget. ``values`` echoes the
    instance (padded for the unweighted gadget); ``param`` is ``t`` for the
    weighted gadget and ``n`` for the unweighted one.
    """

    variant: str
    x: int
    y: int
    u: tuple[int, ...]
    v: tuple[int, ...]
    cliques: tuple[tuple[int, ...], ...]
    values: tuple[int, ...]
    param: float
    factor: float | None = None

    @property
    def node_count(self) -> int:
        return 2 + len(self.u) + len(self.v) + sum(len(c) for c in self.cliques)

    def roles(self) -> list[tuple[int, str, int | None]]:
        """``(node, role, instance position)`` rows sorted by node."""
        rows = [(self.x, "x", None), (self.y, "y", None)]
        rows += [(node, "u", i) for i, node in enumerate(self.u)]
        rows += [(node, "v", i) for i, node in enumerate(self.v)]
        for i, clique in enumerate(self.cliques):
            rows += [(node, "C", i) for node in clique]
        rows.sort()
        return rows

    def role_names(self) -> list[str]:
        names = [""] * self.node_count
        for node, role, pos in self.roles():
            names[node] = role if pos is None else f"{role}_{pos}"
        return names

    def check_cover(self, n: int) -> None:
        nodes = [node for node, _, _ in self.roles()]
        if sorted(nodes) != list(range(n)):
            raise ValueError("gadget roles must partition the node set")


def as_theta(s) -> np.ndarray:
    if isinstance(s, PhaseState):
        return s.theta
    return np.asarray(s, dtype=float)


def _check_lengths(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ValueError(f"state length mismatch: {a.shape[0]} vs {b.shape[0]}")


def is_connected(g: WeightedGraph) -> bool:
    seen = {0}
    queue = deque([0])
    adj = [[] for _ in range(g.n)]
    for i, j, _ in g.edges:
        adj[i].append(j)
        adj[j].append(i)
    while queue:
        i = queue.popleft()
        for j in adj[i]:
            if j not in seen:
                seen.add(j)
                queue.append(j)
    return len(seen) == g.n


def canonical_rotation(s, anchor: int = 0) -> PhaseState:
    """Rotate every angle by the same amount so that ``anchor`` sits at 0."""
    theta = as_theta(s)
    if not 0 <= anchor < len(theta):
        raise IndexError(f"anchor {anchor} out of range for {len(theta)} nodes")
    return PhaseState(theta - theta[anchor])


def rotate(s, phi: float) -> PhaseState:
    return PhaseState(as_theta(s) + phi)


def state_distance(s1, s2) -> float:
    """Sup-norm circular distance between two states modulo a global rotation.

    The per-node offsets ``s2 - s1`` are points on the circle; the best
    rotation is the centre of the shortest arc covering all of them, and the
    distance is half that arc's length.
    """
    a, b = as_theta(s1), as_theta(s2)
    _check_lengths(a, b)
    return _arc_radius(b - a)


def _arc_radius(points: np.ndarray) -> float:
    if len(points) == 0:
        return 0.0
    p = np.sort(wrap_angle(points))
    gaps = np.diff(np.concatenate([p, [p[0] + TWO_PI]]))
    return float(max(0.0, (TWO_PI - gaps.max()) / 2.0))


def spread(s) -> float:
    """Largest circular deviation of the angles from their best common value."""
    return _arc_radius(as_theta(s))


# ---------------------------------------------------------------- file I/O

def format_real(x: float) -> str:
    """17 significant digits; integral values keep a trailing ``.0``."""
    text = f"{x:.17g}"
    if all(c not in text for c in ".eninf"):
        text += ".0"
    return text


def _content_lines(text: str) -> Iterable[tuple[int, str]]:
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        yield lineno, line


def _parse_count(line: str, lineno: int, keys: Sequence[str]) -> dict[str, int]:
    out = {}
    parts = line.split()
    if len(parts) != len(keys):
        raise FormatError(f"expected '{' '.join(k + '=<int>' for k in keys)}'", lineno)
    for part, key in zip(parts, keys):
        name, sep, value = part.partition("=")
        if name != key or not sep:
            raise FormatError(f"expected '{key}=<int>', got {part!r}", lineno)
        try:
            out[key] = int(value)
        except ValueError:
            raise FormatError(f"{key} is not an integer: {value!r}", lineno) from None
        if out[key] < 0:
            raise FormatError(f"{key} must be non-negative", lineno)
    return out


def parse_graph(text: str) -> WeightedGraph:
    lines = list(_content_lines(text))
    if not lines or lines[0][1] != GRAPH_HEADER:
        raise FormatError(f"missing header {GRAPH_HEADER!r}", lines[0][0] if lines else 1)
    if len(lines) < 2:
        raise FormatError("missing 'n=<N> m=<M>' line", lines[0][0] + 1)
    counts = _parse_count(lines[1][1], lines[1][0], ("n", "m"))
    n, m = counts["n"], counts["m"]
    if n < 1:
        raise FormatError("n must be positive", lines[1][0])
    body = lines[2:]
    if len(body) != m:
        where = body[-1][0] if body else lines[1][0]
        raise FormatError(f"expected {m} edge lines, found {len(body)}", where)
    edges = []
    seen = set()
    for lineno, line in body:
        parts = line.split()
        if len(parts) != 3:
            raise FormatError("edge line must be '<i> <j> <w>'", lineno)
        try:
            i, j = int(parts[0]), int(parts[1])
            w = float(parts[2])
        except ValueError:
            raise FormatError(f"cannot parse edge {line!r}", lineno) from None
        if not (0 <= i < j < n):
            raise FormatError(f"edge ({i}, {j}) violates 0 <= i < j < {n}", lineno)
        if not (w > 0.0 and math.isfinite(w)):
            raise FormatError(f"non-positive weight {parts[2]}", lineno)
        if (i, j) in seen:
            raise FormatError(f"duplicate edge ({i}, {j})", lineno)
        seen.add((i, j))
        edges.append((i, j, w))
    return WeightedGraph(n, tuple(edges))


def serialize_graph(g: WeightedGraph, comments: Sequence[str] = ()) -> str:
    out = [GRAPH_HEADER, f"n={g.n} m={g.m}"]
    out += [f"# {c}" for c in comments]
    out += [f"{i} {j} {format_real(w)}" for i, j, w in g.edges]
    return "\n".join(out) + "\n"


def descriptor_comments(desc: GadgetDescriptor) -> list[str]:
    """Role annotations written as ``role <name> <node> [<position>]``."""
    rows = []
    for node, role, pos in desc.roles():
        rows.append(f"role {role} {node}" if pos is None else f"role {role} {node} {pos}")
    return rows


def parse_state(text: str, header: str = STATE_HEADER, normalize: bool = True):
    lines = list(_content_lines(text))
    if not lines or lines[0][1] != header:
        raise FormatError(f"missing header {header!r}", lines[0][0] if lines else 1)
    if len(lines) < 2:
        raise FormatError("missing 'n=<N>' line", lines[0][0] + 1)
    n = _parse_count(lines[1][1], lines[1][0], ("n",))["n"]
    body = lines[2:]
    if len(body) != n:
        where = body[-1][0] if body else lines[1][0]
        raise FormatError(f"expected {n} value lines, found {len(body)}", where)
    values = np.full(n, np.nan)
    for lineno, line in body:
        parts = line.split()
        if len(parts) != 2:
            raise FormatError("value line must be '<i> <value>'", lineno)
        try:
            i, x = int(parts[0]), float(parts[1])
        except ValueError:
            raise FormatError(f"cannot parse {line!r}", lineno) from None
        if not 0 <= i < n:
            raise FormatError(f"index {i} out of range", lineno)
        if not math.isnan(values[i]):
            raise FormatError(f"duplicate index {i}", lineno)
        if not math.isfinite(x):
            raise FormatError("value must be finite", lineno)
        values[i] = x
    return PhaseState(values) if normalize else values


def serialize_state(s, header: str = STATE_HEADER) -> str:
    theta = as_theta(s)
    out = [header, f"n={len(theta)}"]
    out += [f"{i} {format_real(float(x))}" for i, x in enumerate(theta)]
    return "\n".join(out) + "\n"
