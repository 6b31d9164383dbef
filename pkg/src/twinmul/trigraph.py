"""Labeled trigraphs and contraction sequences.

A pair of vertices is black (carries a nonzero label), red, or absent
(uniform label 0).  Labels are stored oriented: ``adj[u][w] = (f, r)``
means nu(u -> w) = f and nu(w -> u) = r.  Undirected graphs simply have
f == r everywhere; directed structures (used for matrix products) reuse
the same code.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Iterable, Iterator

import numpy as np

from .field import PrimeField

ZERO = (0, 0)


class TrigraphError(ValueError):
    pass


class SequenceError(TrigraphError):
    """A contraction sequence cannot be replayed."""


def flip(lab):
    return (lab[1], lab[0])


class Trigraph:
    def __init__(self, field: PrimeField, vertices: Iterable[int] = ()):
        self.field = field
        self.adj: dict[int, dict[int, tuple[int, int]]] = {}
        self.red: dict[int, set[int]] = {}
        for v in vertices:
            self.add_vertex(v)

    # construction -------------------------------------------------------
    def add_vertex(self, v: int) -> None:
        if v in self.adj:
            raise TrigraphError(f"vertex {v} already present")
        self.adj[v] = {}
        self.red[v] = set()

    def _need(self, *vs):
        for v in vs:
            if v not in self.adj:
                raise TrigraphError(f"unknown vertex {v}")

    def set_arcs(self, u: int, v: int, f: int, r: int) -> None:
        """Set nu(u->v) = f and nu(v->u) = r (both 0 removes the edge)."""
        self._need(u, v)
        if u == v:
            raise TrigraphError("self-loops are not allowed")
        p = self.field.p
        f %= p
        r %= p
        self.red[u].discard(v)
        self.red[v].discard(u)
        if f == 0 and r == 0:
            self.adj[u].pop(v, None)
            self.adj[v].pop(u, None)
        else:
            self.adj[u][v] = (f, r)
            self.adj[v][u] = (r, f)

    def set_edge(self, u: int, v: int, c: int) -> None:
        self.set_arcs(u, v, c, c)

    def add_red(self, u: int, v: int) -> None:
        self._need(u, v)
        if u == v:
            raise TrigraphError("self-loops are not allowed")
        self.adj[u].pop(v, None)
        self.adj[v].pop(u, None)
        self.red[u].add(v)
        self.red[v].add(u)

    @classmethod
    def from_dense(cls, M, field: PrimeField) -> "Trigraph":
        """Build from a square matrix with M[u][v] = nu(u -> v); the diagonal is ignored."""
        A = np.asarray(M, dtype=np.int64) % field.p
        n = A.shape[0]
        if A.shape != (n, n):
            raise TrigraphError("adjacency matrix must be square")
        G = cls(field, range(n))
        us, vs = np.nonzero(A + A.T)
        for u, v in zip(us.tolist(), vs.tolist()):
            if u < v:
                f, r = int(A[u, v]), int(A[v, u])
                G.adj[u][v] = (f, r)
                G.adj[v][u] = (r, f)
        return G

    def copy(self) -> "Trigraph":
        G = Trigraph(self.field)
        G.adj = {v: dict(nb) for v, nb in self.adj.items()}
        G.red = {v: set(nb) for v, nb in self.red.items()}
        return G

    # queries ------------------------------------------------------------
    @property
    def vertices(self) -> set[int]:
        return set(self.adj)

    def __len__(self):
        return len(self.adj)

    def __contains__(self, v):
        return v in self.adj

    def is_red(self, u: int, v: int) -> bool:
        return v in self.red.get(u, ())

    def label(self, u: int, v: int) -> int | None:
        """nu(u -> v), 0 for a non-edge, None for a red pair."""
        self._need(u, v)
        if v in self.red[u]:
            return None
        return self.adj[u].get(v, ZERO)[0]

    def red_degree(self, v: int) -> int:
        return len(self.red[v])

    def max_red_degree(self) -> int:
        return max((len(s) for s in self.red.values()), default=0)

    @property
    def directed(self) -> bool:
        return any(f != r for nb in self.adj.values() for f, r in nb.values())

    def black_edges(self) -> Iterator[tuple[int, int, tuple[int, int]]]:
        for u, nb in self.adj.items():
            for v, lab in nb.items():
                if u < v:
                    yield u, v, lab

    def red_edges(self) -> Iterator[tuple[int, int]]:
        for u, nb in self.red.items():
            for v in nb:
                if u < v:
                    yield u, v

    def edge_count(self) -> int:
        return sum(len(nb) for nb in self.adj.values()) // 2

    def next_id(self) -> int:
        return max(self.adj, default=-1) + 1

    def to_dense(self, order: list[int] | None = None) -> np.ndarray:
        """M[i][j] = nu(order[i] -> order[j]); red pairs raise."""
        if any(self.red.values()):
            raise TrigraphError("a trigraph with red edges has no dense form")
        order = sorted(self.adj) if order is None else order
        pos = {v: i for i, v in enumerate(order)}
        M = np.zeros((len(order), len(order)), dtype=np.int64)
        for u, v, (f, r) in self.black_edges():
            M[pos[u], pos[v]] = f
            M[pos[v], pos[u]] = r
        return M

    def __eq__(self, other):
        if not isinstance(other, Trigraph):
            return NotImplemented
        return (self.field == other.field and self.adj == other.adj
                and self.red == other.red)

    def __repr__(self):
        return (f"Trigraph(n={len(self)}, black={self.edge_count()}, "
                f"red={sum(len(s) for s in self.red.values()) // 2}, p={self.field.p})")


def contract_inplace(G: Trigraph, u: int, v: int, z: int) -> set[int]:
    """Merge u and v into the fresh vertex z; returns the vertices whose red
    neighbourhood changed (z included)."""
    if u == v:
        raise SequenceError(f"cannot contract {u} with itself")
    if u not in G.adj or v not in G.adj:
        missing = u if u not in G.adj else v
        raise SequenceError(f"vertex {missing} is not alive")
    if z in G.adj:
        raise SequenceError(f"new id {z} collides with an existing vertex")
    au, av = G.adj.pop(u), G.adj.pop(v)
    ru, rv = G.red.pop(u), G.red.pop(v)
    az: dict[int, tuple[int, int]] = {}
    rz: set[int] = set()
    for w in ru:
        if w != v:
            rz.add(w)
    for w in rv:
        if w != u:
            rz.add(w)
    for w, lab in au.items():
        if w == v or w in rz:
            continue
        if av.get(w) == lab:
            az[w] = lab
        else:
            rz.add(w)
    for w in av:
        if w != u and w not in rz and w not in az:
            rz.add(w)
    touched = {z}
    for w in au:
        if w != v:
            del G.adj[w][u]
    for w in av:
        if w != u:
            del G.adj[w][v]
    for w in ru:
        if w != v:
            G.red[w].discard(u)
            touched.add(w)
    for w in rv:
        if w != u:
            G.red[w].discard(v)
            touched.add(w)
    for w, lab in az.items():
        G.adj[w][z] = flip(lab)
    for w in rz:
        G.red[w].add(z)
        touched.add(w)
    G.adj[z] = az
    G.red[z] = rz
    return touched


def contract(G: Trigraph, u: int, v: int, z: int) -> Trigraph:
    H = G.copy()
    contract_inplace(H, u, v, z)
    return H


@dataclass
class ContractionSequence:
    triples: list[tuple[int, int, int]]
    vertexCount: int

    def __post_init__(self):
        self.triples = [tuple(int(x) for x in t) for t in self.triples]
        if len(self.triples) != max(self.vertexCount - 1, 0):
            raise SequenceError(
                f"{self.vertexCount} vertices need {max(self.vertexCount - 1, 0)} contractions, "
                f"got {len(self.triples)}")

    def __len__(self):
        return len(self.triples)

    def __iter__(self):
        return iter(self.triples)

    def partitions(self, vertices: Iterable[int]) -> Iterator[frozenset[frozenset[int]]]:
        """Yield the partition of the original vertices after each step (the
        initial singleton partition first)."""
        parts = {v: frozenset([v]) for v in vertices}
        yield frozenset(parts.values())
        for u, v, z in self.triples:
            parts[z] = parts.pop(u) | parts.pop(v)
            yield frozenset(parts.values())


@dataclass
class SequenceReport:
    maxRedDegree: int
    perStepRedDegree: list[int] = dc_field(default_factory=list)


class _DegreeTracker:
    """Histogram of red degrees with an O(1) amortised maximum."""

    def __init__(self, degrees: Iterable[int]):
        self.hist: dict[int, int] = {}
        self.deg: dict[int, int] = {}
        self.top = 0
        for v, d in degrees:
            self.deg[v] = d
            self.hist[d] = self.hist.get(d, 0) + 1
            self.top = max(self.top, d)

    def drop(self, v):
        d = self.deg.pop(v, None)
        if d is not None:
            self.hist[d] -= 1

    def set(self, v, d):
        self.drop(v)
        self.deg[v] = d
        self.hist[d] = self.hist.get(d, 0) + 1
        if d > self.top:
            self.top = d

    def max(self) -> int:
        while self.top > 0 and not self.hist.get(self.top):
            self.top -= 1
        return self.top


def validate_sequence(G: Trigraph, S: ContractionSequence) -> SequenceReport:
    if S.vertexCount != len(G):
        raise SequenceError(f"sequence is for {S.vertexCount} vertices, graph has {len(G)}")
    H = G.copy()
    track = _DegreeTracker((v, len(r)) for v, r in H.red.items())
    best = track.max()
    steps = []
    for i, (u, v, z) in enumerate(S.triples):
        try:
            touched = contract_inplace(H, u, v, z)
        except SequenceError as e:
            raise SequenceError(f"step {i}: {e}") from None
        track.drop(u)
        track.drop(v)
        for w in touched:
            track.set(w, len(H.red[w]))
        m = track.max()
        steps.append(m)
        best = max(best, m)
    if len(H) != 1:
        raise SequenceError(f"replay ends with {len(H)} vertices")
    return SequenceReport(best, steps)


# CTR text format ----------------------------------------------------------

def dump_ctr(S: ContractionSequence) -> str:
    lines = ["CTR 1"]
    lines += [f"{u} {v} {z}" for u, v, z in S.triples]
    return "\n".join(lines) + "\n"


def parse_ctr(text: str) -> ContractionSequence:
    rows = [(i + 1, ln.split()) for i, ln in enumerate(text.splitlines())]
    rows = [(i, t) for i, t in rows if t and not t[0].startswith("#")]
    if not rows or rows[0][1] != ["CTR", "1"]:
        raise SequenceError("line 1: expected header 'CTR 1'")
    triples = []
    for lineno, toks in rows[1:]:
        if len(toks) != 3:
            raise SequenceError(f"line {lineno}: expected 'u v z'")
        try:
            triples.append(tuple(int(t) for t in toks))
        except ValueError:
            raise SequenceError(f"line {lineno}: ids must be integers") from None
    return ContractionSequence(triples, len(triples) + 1)
