"""Graph model, text file format, structural operations and exact oracles.

Nodes are the integers ``0..n-1``; the file format uses 1-based indices.
Labels are cosmetic and survive the structural operations where it makes
sense (complement, contraction, induced subgraphs).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import networkx as nx
import numpy as np

from .errors import (
    EmptyNeighborhoodError,
    GraphParseError,
    GraphValidationError,
    InvalidEdgeError,
    InvalidWeightError,
    SizeCapError,
)

Edge = tuple[int, int]

BRUTE_FORCE_CAP = 12


def _edge(i: int, j: int) -> Edge:
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class Graph:
    """Immutable simple undirected graph on nodes ``0..n-1``."""

    n: int
    edges: tuple[Edge, ...] = ()
    labels: tuple[str, ...] | None = None
    weights: tuple[float, ...] | None = None
    _index: dict = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 0:
            raise GraphValidationError(f"node count must be a nonnegative integer, got {self.n}")
        seen = set()
        for e in self.edges:
            i, j = (int(v) for v in e)
            if i == j:
                raise GraphValidationError(f"loop at node {i}")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise GraphValidationError(f"edge {(i, j)} has an endpoint outside [0, {self.n})")
            ij = _edge(i, j)
            if ij in seen:
                raise GraphValidationError(f"duplicate edge {ij}")
            seen.add(ij)
        edges = tuple(sorted(seen))
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "_index", {e: k for k, e in enumerate(edges)})
        if self.labels is not None:
            if len(self.labels) != self.n:
                raise GraphValidationError("labels must have one entry per node")
            object.__setattr__(self, "labels", tuple(str(s) for s in self.labels))
        if self.weights is not None:
            w = tuple(float(x) for x in self.weights)
            if len(w) != self.n:
                raise GraphValidationError("weights must have one entry per node")
            if any(not np.isfinite(x) or x < 0 for x in w):
                raise InvalidWeightError("node weights must be finite and nonnegative")
            object.__setattr__(self, "weights", w)

    @property
    def m(self) -> int:
        return len(self.edges)

    def edge_index(self, i: int, j: int) -> int:
        """Position of edge {i, j} in ``self.edges``."""
        try:
            return self._index[_edge(i, j)]
        except KeyError:
            raise InvalidEdgeError(f"{(i, j)} is not an edge") from None

    def has_edge(self, i: int, j: int) -> bool:
        return _edge(i, j) in self._index

    def label(self, i: int) -> str:
        return self.labels[i] if self.labels is not None else str(i + 1)

    def find(self, label: str) -> int:
        """Node carrying ``label``."""
        for i in range(self.n):
            if self.label(i) == label:
                return i
        raise KeyError(label)

    def neighbors(self, i: int) -> list[int]:
        return [b if a == i else a for a, b in self.edges if i in (a, b)]

    def degrees(self) -> np.ndarray:
        d = np.zeros(self.n, dtype=int)
        for i, j in self.edges:
            d[i] += 1
            d[j] += 1
        return d

    def adjacency(self) -> np.ndarray:
        A = np.zeros((self.n, self.n))
        for i, j in self.edges:
            A[i, j] = A[j, i] = 1.0
        return A

    def non_edges(self) -> list[Edge]:
        return [e for e in itertools.combinations(range(self.n), 2) if e not in self._index]

    def is_complete(self) -> bool:
        return self.m == self.n * (self.n - 1) // 2

    def to_networkx(self) -> nx.Graph:
        H = nx.Graph()
        H.add_nodes_from(range(self.n))
        H.add_edges_from(self.edges)
        return H


# ---------------------------------------------------------------- file format


def parse_graph(text: str) -> Graph:
    """Parse the line-oriented graph format.

    ``p <n> <m>`` header (``p edge <n> <m>`` is accepted too), ``e <i> <j>``
    edge lines with 1-based endpoints, ``n <i> <w>`` node weights and ``c``
    comment lines. Nodes without a weight line get weight 1 when any weight
    line is present.
    """
    n = m = None
    edges: list[Edge] = []
    seen: dict[Edge, int] = {}
    weights: dict[int, float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        tokens = raw.split()
        if not tokens or tokens[0].startswith("c"):
            continue
        tag = tokens[0]
        if tag == "p":
            if n is not None:
                raise GraphParseError("second header line", lineno)
            args = tokens[1:]
            if len(args) == 3 and not args[0].lstrip("-").isdigit():
                args = args[1:]
            if len(args) != 2:
                raise GraphParseError("header must read 'p <n> <m>'", lineno)
            n, m = _parse_int(args[0], lineno), _parse_int(args[1], lineno)
            if n < 0 or m < 0:
                raise GraphParseError("negative node or edge count", lineno)
        elif tag == "e":
            if n is None:
                raise GraphParseError("edge line before header", lineno)
            if len(tokens) != 3:
                raise GraphParseError("edge line must read 'e <i> <j>'", lineno)
            i, j = _parse_int(tokens[1], lineno), _parse_int(tokens[2], lineno)
            if not (1 <= i <= n and 1 <= j <= n):
                raise GraphParseError(f"endpoint outside 1..{n}", lineno)
            if i == j:
                raise GraphValidationError(f"line {lineno}: loop at node {i}")
            e = _edge(i - 1, j - 1)
            if e in seen:
                raise GraphValidationError(
                    f"line {lineno}: duplicate edge {i} {j} (first on line {seen[e]})"
                )
            seen[e] = lineno
            edges.append(e)
        elif tag == "n":
            if n is None:
                raise GraphParseError("weight line before header", lineno)
            if len(tokens) != 3:
                raise GraphParseError("weight line must read 'n <i> <w>'", lineno)
            i = _parse_int(tokens[1], lineno)
            if not 1 <= i <= n:
                raise GraphParseError(f"node outside 1..{n}", lineno)
            try:
                w = float(tokens[2])
            except ValueError:
                raise GraphParseError(f"bad weight {tokens[2]!r}", lineno) from None
            if not np.isfinite(w) or w < 0:
                raise GraphParseError("weights must be finite and nonnegative", lineno)
            weights[i - 1] = w
        else:
            raise GraphParseError(f"unknown line type {tag!r}", lineno)
    if n is None:
        raise GraphParseError("missing 'p <n> <m>' header")
    if len(edges) != m:
        raise GraphParseError(f"header announces {m} edges, found {len(edges)}")
    w = tuple(weights.get(i, 1.0) for i in range(n)) if weights else None
    return Graph(n, edges, weights=w)


def _parse_int(token: str, lineno: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise GraphParseError(f"expected an integer, got {token!r}", lineno) from None


def format_graph(G: Graph) -> str:
    lines = [f"p {G.n} {G.m}"]
    lines += [f"e {i + 1} {j + 1}" for i, j in G.edges]
    if G.weights is not None:
        lines += [f"n {i + 1} {w!r}" for i, w in enumerate(G.weights)]
    return "\n".join(lines) + "\n"


def read_graph(path) -> Graph:
    with open(path, encoding="utf-8") as fh:
        return parse_graph(fh.read())


# ------------------------------------------------------ structural operations


def complement(G: Graph) -> Graph:
    return Graph(G.n, G.non_edges(), labels=G.labels, weights=G.weights)


def induced_subgraph(G: Graph, nodes: Iterable[int]) -> Graph:
    """Subgraph on ``nodes`` (kept in the given order), labels inherited."""
    nodes = list(nodes)
    pos = {v: k for k, v in enumerate(nodes)}
    if len(pos) != len(nodes):
        raise ValueError("repeated node in induced subgraph")
    edges = [(pos[i], pos[j]) for i, j in G.edges if i in pos and j in pos]
    labels = tuple(G.label(v) for v in nodes)
    weights = tuple(G.weights[v] for v in nodes) if G.weights is not None else None
    return Graph(len(nodes), edges, labels=labels, weights=weights)


@dataclass(frozen=True)
class EdgeMergeMap:
    """How the edges of G survive a contraction of edge ``e = (a, b)``.

    ``image`` sends every edge of G other than ``e`` to its edge in G/e;
    ``merged`` lists the edges of G/e that absorbed two parallel edges.
    """

    contracted: Edge
    image: dict
    merged: dict

    def preimage(self, f: Edge) -> list[Edge]:
        return sorted(e for e, g in self.image.items() if g == f)


def contract(G: Graph, e: Sequence[int]) -> tuple[Graph, EdgeMergeMap]:
    """Contract edge ``e``; the merged node keeps the smaller index and its label."""
    a, b = _edge(*e)
    if not G.has_edge(a, b):
        raise InvalidEdgeError(f"{(a, b)} is not an edge")

    def relabel(v):
        if v == b:
            v = a
        return v - 1 if v > b else v

    image = {}
    for f in G.edges:
        if f == (a, b):
            continue
        image[f] = _edge(relabel(f[0]), relabel(f[1]))
    new_edges = sorted(set(image.values()))
    merged = {}
    for f, g in image.items():
        merged.setdefault(g, []).append(f)
    merged = {g: tuple(sorted(fs)) for g, fs in merged.items() if len(fs) > 1}
    keep = [v for v in range(G.n) if v != b]
    labels = tuple(G.label(v) for v in keep) if G.labels is not None else None
    H = Graph(G.n - 1, new_edges, labels=labels)
    return H, EdgeMergeMap((a, b), image, merged)


def blow_up_owner(w: Sequence[int]) -> list[int]:
    """Original node of each node of the blow-up, in order."""
    return [i for i, wi in enumerate(w) for _ in range(int(wi))]


def blow_up(G: Graph, w: Sequence[int]) -> Graph:
    """Replace node i by a clique on ``w[i]`` nodes, joined across edges of G."""
    if len(w) != G.n:
        raise InvalidWeightError("one weight per node required")
    for wi in w:
        if int(wi) != wi or wi < 1:
            raise InvalidWeightError(f"blow-up weights must be positive integers, got {wi}")
    owner = blow_up_owner(w)
    edges = []
    for p, q in itertools.combinations(range(len(owner)), 2):
        i, j = owner[p], owner[q]
        if i == j or G.has_edge(i, j):
            edges.append((p, q))
    labels = []
    for i, wi in enumerate(w):
        labels += [f"{G.label(i)}.{k + 1}" if wi > 1 else G.label(i) for k in range(int(wi))]
    return Graph(len(owner), edges, labels=tuple(labels))


def direct_sum(G: Graph, H: Graph) -> Graph:
    edges = list(G.edges) + [(i + G.n, j + G.n) for i, j in H.edges]
    labels = None
    if G.labels is not None or H.labels is not None:
        labels = tuple(G.label(i) for i in range(G.n)) + tuple(H.label(i) for i in range(H.n))
    return Graph(G.n + H.n, edges, labels=labels)


def clique_sum(G1: Graph, S1: Sequence[int], G2: Graph, S2: Sequence[int]) -> tuple[Graph, list[int]]:
    """Glue G1 and G2 along cliques, identifying ``S2[k]`` with ``S1[k]``.

    Returns the glued graph and the position of every node of G2 in it.
    Nodes of G1 keep their indices.
    """
    if len(S1) != len(S2):
        raise ValueError("shared node lists must have equal length")
    for S, G in ((S1, G1), (S2, G2)):
        if len(set(S)) != len(S) or any(not G.has_edge(i, j) for i, j in itertools.combinations(S, 2)):
            raise GraphValidationError("shared nodes must induce a clique")
    where = {}
    nxt = G1.n
    for v in range(G2.n):
        if v in S2:
            where[v] = S1[list(S2).index(v)]
        else:
            where[v] = nxt
            nxt += 1
    edges = set(G1.edges)
    for i, j in G2.edges:
        edges.add(_edge(where[i], where[j]))
    return Graph(nxt, sorted(edges)), [where[v] for v in range(G2.n)]


def components(G: Graph) -> list[tuple[int, ...]]:
    return sorted(tuple(sorted(c)) for c in nx.connected_components(G.to_networkx()))


def is_connected(G: Graph) -> bool:
    return G.n > 0 and len(components(G)) == 1


def cut_nodes(G: Graph) -> list[int]:
    return sorted(nx.articulation_points(G.to_networkx()))


def block_nodes(G: Graph) -> list[tuple[int, ...]]:
    """Node sets of the blocks; isolated nodes form single-node blocks."""
    H = G.to_networkx()
    out = [tuple(sorted(c)) for c in nx.biconnected_components(H)]
    out += [(v,) for v in range(G.n) if H.degree(v) == 0]
    return sorted(out)


def blocks(G: Graph) -> list[Graph]:
    return [induced_subgraph(G, S) for S in block_nodes(G)]


def neighborhood(G: Graph, i: int) -> Graph:
    """Subgraph induced by the neighbours of ``i``."""
    if not 0 <= i < G.n:
        raise ValueError(f"node {i} not in graph")
    nb = sorted(G.neighbors(i))
    if not nb:
        raise EmptyNeighborhoodError(f"node {i} is isolated")
    return induced_subgraph(G, nb)


# ------------------------------------------------------------------ generators

_MOSER_EDGES = [
    (0, 2), (0, 3), (2, 3), (1, 2), (1, 3),  # rhombus with tips a, b
    (0, 4), (0, 5), (4, 5), (6, 4), (6, 5),  # rhombus with tips a, g
    (1, 6),
]


def moser_spindle() -> Graph:
    return Graph(7, _MOSER_EDGES, labels=tuple("abcdefg"))


def gadget_h() -> Graph:
    """Two Moser spindles sharing the triangle {x, y, z}.

    In the first copy the rhombus tips are ``i`` and ``y`` over the edge
    ``xz``; in the second they are ``j`` and ``x`` over ``yz``. Any planar
    unit-distance drawing reflects ``y`` across ``xz`` and ``x`` across
    ``yz``, which puts ``i`` and ``j`` at distance 2.
    """
    names = ["i", "x", "y", "z", "e1", "f1", "g1", "j", "e2", "f2", "g2"]
    idx = {s: k for k, s in enumerate(names)}
    copies = [
        dict(a="i", b="y", c="x", d="z", e="e1", f="f1", g="g1"),
        dict(a="j", b="x", c="y", d="z", e="e2", f="f2", g="g2"),
    ]
    spindle_labels = "abcdefg"
    edges = set()
    for cp in copies:
        for u, v in _MOSER_EDGES:
            edges.add(_edge(idx[cp[spindle_labels[u]]], idx[cp[spindle_labels[v]]]))
    return Graph(len(names), sorted(edges), labels=tuple(names))


def petersen() -> Graph:
    outer = [(k, (k + 1) % 5) for k in range(5)]
    spokes = [(k, k + 5) for k in range(5)]
    inner = [(5 + k, 5 + (k + 2) % 5) for k in range(5)]
    return Graph(10, outer + spokes + inner)


def generate(family: str, n: int | None = None) -> Graph:
    """Named graph families: complete, cycle, path, empty (need ``n``),
    petersen, moser_spindle, gadget_h."""
    if family in ("complete", "cycle", "path", "empty"):
        if n is None or int(n) != n or n < 1:
            raise ValueError(f"{family} needs a positive integer n")
        n = int(n)
        if family == "complete":
            return Graph(n, list(itertools.combinations(range(n), 2)))
        if family == "cycle":
            if n < 3:
                raise ValueError("cycles need n >= 3")
            return Graph(n, [(k, (k + 1) % n) for k in range(n)])
        if family == "path":
            return Graph(n, [(k, k + 1) for k in range(n - 1)])
        return Graph(n)
    if family == "petersen":
        return petersen()
    if family == "moser_spindle":
        return moser_spindle()
    if family == "gadget_h":
        return gadget_h()
    raise ValueError(f"unknown graph family {family!r}")


def random_graph(n: int, p: float, seed: int | None = None) -> Graph:
    """Erdos-Renyi G(n, p)."""
    rng = np.random.default_rng(seed)
    pairs = list(itertools.combinations(range(n), 2))
    keep = rng.random(len(pairs)) < p
    return Graph(n, [e for e, k in zip(pairs, keep) if k])


def random_subgraph(G: Graph, keep: float, seed: int | None = None) -> Graph:
    """Spanning subgraph keeping each edge with probability ``keep``."""
    rng = np.random.default_rng(seed)
    mask = rng.random(G.m) < keep
    return Graph(G.n, [e for e, k in zip(G.edges, mask) if k])


# --------------------------------------------------------------- exact oracles


@dataclass(frozen=True)
class Combinatorics:
    omega: int
    chi: int
    is_bipartite: bool
    alpha: int
    max_stable_sets: tuple[tuple[int, ...], ...]


def is_bipartite(G: Graph) -> bool:
    return nx.is_bipartite(G.to_networkx())


def _clique_masks(n: int, adj_masks: list[int]) -> list[bool]:
    ok = [False] * (1 << n)
    ok[0] = True
    for mask in range(1, 1 << n):
        low = (mask & -mask).bit_length() - 1
        rest = mask & (mask - 1)
        ok[mask] = ok[rest] and (rest & ~adj_masks[low]) == 0
    return ok


def clique_number(G: Graph, cap: int = BRUTE_FORCE_CAP) -> int:
    _check_cap(G, cap)
    adj = [sum(1 << j for j in G.neighbors(i)) for i in range(G.n)]
    ok = _clique_masks(G.n, adj)
    return max(bin(mask).count("1") for mask in range(1 << G.n) if ok[mask])


def chromatic_number(G: Graph, cap: int = BRUTE_FORCE_CAP) -> int:
    _check_cap(G, cap)
    if G.n == 0:
        return 0
    nbrs = [G.neighbors(i) for i in range(G.n)]
    order = sorted(range(G.n), key=lambda v: -len(nbrs[v]))

    def colorable(k):
        color = [-1] * G.n

        def place(pos):
            if pos == G.n:
                return True
            v = order[pos]
            used = {color[u] for u in nbrs[v]}
            # symmetry breaking: never open more than one fresh colour
            top = max(color) + 1
            for c in range(min(k, top + 1)):
                if c not in used:
                    color[v] = c
                    if place(pos + 1):
                        return True
            color[v] = -1
            return False

        return place(0)

    k = 1
    while not colorable(k):
        k += 1
    return k


def exact_combinatorics(G: Graph, cap: int = BRUTE_FORCE_CAP) -> Combinatorics:
    """Clique number, chromatic number, bipartiteness and the maximum stable
    sets, all by exhaustive search."""
    _check_cap(G, cap)
    n = G.n
    adj = [sum(1 << j for j in G.neighbors(i)) for i in range(n)]
    non_adj = [((1 << n) - 1) & ~adj[i] & ~(1 << i) for i in range(n)]
    stable = _clique_masks(n, non_adj)
    alpha = max(bin(mask).count("1") for mask in range(1 << n) if stable[mask])
    best = tuple(
        tuple(i for i in range(n) if mask >> i & 1)
        for mask in range(1 << n)
        if stable[mask] and bin(mask).count("1") == alpha
    )
    return Combinatorics(
        omega=clique_number(G, cap),
        chi=chromatic_number(G, cap),
        is_bipartite=is_bipartite(G),
        alpha=alpha,
        max_stable_sets=tuple(sorted(best)),
    )


def _check_cap(G: Graph, cap: int):
    if G.n > cap:
        raise SizeCapError(f"graph has {G.n} nodes, exhaustive search is capped at {cap}")
