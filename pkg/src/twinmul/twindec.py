"""Twin-decompositions: a ranked binary tree plus labeled transversal edges.

Node ids are fixed: leaves are ``0..n-1`` (equal to the vertex ids of the
represented graph) and the internal node carrying label ``i`` lives at id
``n + i - 1``, so the root is always ``n``.  A transversal edge ("bedge")
``(x, y)`` with label ``(f, r)`` stands for the biclique between the leaves
below ``x`` and the leaves below ``y`` where every arc ``leaf(x) -> leaf(y)``
carries ``f`` and every reverse arc carries ``r``.
"""

from __future__ import annotations

from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping

import numpy as np

from .field import PrimeField, FieldError
from .trigraph import (ContractionSequence, SequenceError, Trigraph, ZERO,
                       _DegreeTracker, flip)


class DecompositionError(ValueError):
    code = "invalid"


class TreeError(DecompositionError):
    code = "bad-tree"


class NotRankedError(TreeError):
    code = "not-ranked"


class AncestorEdgeError(DecompositionError):
    code = "ancestor-edge"


class DoubleCoverError(DecompositionError):
    code = "double-cover"


class CrossingError(DecompositionError):
    code = "crosses-border"

    def __init__(self, edge, borders):
        self.edge = edge
        self.borders = sorted(borders, reverse=True)
        super().__init__(
            f"bedge {edge[0]}-{edge[1]} crosses border "
            + ", ".join(str(b) for b in self.borders))


class TWDFormatError(DecompositionError):
    code = "format"


# ---------------------------------------------------------------------------
# ranked trees

class RankedTree:
    """Rooted binary tree on 2n-1 nodes with internal labels 1..n-1.

    ``children[i - 1]`` holds the two child ids of the node labeled ``i``.
    """

    def __init__(self, n: int, children: Iterable[tuple[int, int]]):
        if n < 1:
            raise TreeError("a tree needs at least one leaf")
        self.n = n
        self.kids: list[tuple[int, int]] = [(int(a), int(b)) for a, b in children]
        if len(self.kids) != n - 1:
            raise TreeError(f"{n} leaves need {n - 1} internal nodes, got {len(self.kids)}")
        total = 2 * n - 1
        self.parent = [-1] * total
        for i, (a, b) in enumerate(self.kids, start=1):
            z = n + i - 1
            for c in (a, b):
                if not 0 <= c < total:
                    raise TreeError(f"node {z}: child id {c} out of range")
                if self.parent[c] != -1:
                    raise TreeError(f"node {c} has two parents")
                if c >= n and c - n + 1 <= i:
                    raise NotRankedError(
                        f"node labeled {c - n + 1} is a child of the node labeled {i}")
                self.parent[c] = z
            if a == b:
                raise TreeError(f"node {z} has a repeated child")
        if n > 1 and self.parent[n] != -1:
            raise NotRankedError("the root must carry label 1")
        for v in range(total):
            if v != self.root and self.parent[v] == -1:
                raise TreeError(f"node {v} has no parent")
        self._layout()

    @property
    def root(self) -> int:
        return self.n if self.n > 1 else 0

    @property
    def node_count(self) -> int:
        return 2 * self.n - 1

    def is_leaf(self, v: int) -> bool:
        return v < self.n

    def label(self, v: int) -> int:
        """Label of an internal node; leaves count as n."""
        return self.n if v < self.n else v - self.n + 1

    def node_of_label(self, i: int) -> int:
        return self.n + i - 1

    def children(self, v: int) -> tuple[int, int]:
        return self.kids[v - self.n]

    def parent_label(self, v: int) -> int:
        p = self.parent[v]
        return 0 if p < 0 else p - self.n + 1

    def _layout(self):
        total = self.node_count
        self.lo = [0] * total
        self.hi = [0] * total
        self.depth = [0] * total
        order: list[int] = []
        stack = [(self.root, False)]
        while stack:
            v, done = stack.pop()
            if done:
                self.hi[v] = len(order)
                continue
            self.lo[v] = len(order)
            if v < self.n:
                order.append(v)
                self.hi[v] = len(order)
                continue
            stack.append((v, True))
            a, b = self.kids[v - self.n]
            self.depth[a] = self.depth[b] = self.depth[v] + 1
            stack.append((b, False))
            stack.append((a, False))
        self.order = order
        self.pos = [0] * self.n
        for i, v in enumerate(order):
            self.pos[v] = i

    def size(self, v: int) -> int:
        return self.hi[v] - self.lo[v]

    def is_ancestor(self, a: int, b: int) -> bool:
        """True when a is b or an ancestor of b."""
        return self.lo[a] <= self.lo[b] and self.hi[b] <= self.hi[a]

    def leaves_under(self, v: int) -> list[int]:
        return self.order[self.lo[v]:self.hi[v]]

    def ancestors(self, v: int) -> Iterator[int]:
        while v != -1:
            yield v
            v = self.parent[v]

    @property
    def height(self) -> int:
        return max(self.depth)

    def __eq__(self, other):
        return isinstance(other, RankedTree) and self.n == other.n and self.kids == other.kids

    def __repr__(self):
        return f"RankedTree(n={self.n}, height={self.height})"

    @classmethod
    def from_records(cls, n: int, records) -> tuple["RankedTree", dict[int, int]]:
        """Build from ``(id, label, childA, childB)`` records with arbitrary
        internal ids; returns the tree and the id remapping."""
        records = list(records)
        remap = {v: v for v in range(n)}
        seen_labels = set()
        for nid, lab, _, _ in records:
            if nid in remap:
                raise TreeError(f"duplicate node id {nid}")
            if not 1 <= lab <= n - 1 or lab in seen_labels:
                raise NotRankedError(f"labels must be a bijection onto 1..{n - 1}; bad label {lab}")
            seen_labels.add(lab)
            remap[nid] = n + lab - 1
        kids = [None] * (n - 1)
        for nid, lab, a, b in records:
            if a not in remap or b not in remap:
                raise TreeError(f"node {nid} has an unknown child")
            kids[lab - 1] = (remap[a], remap[b])
        return cls(n, kids), remap

    @classmethod
    def from_sequence(cls, S: ContractionSequence,
                      vertices: Iterable[int] | None = None) -> tuple["RankedTree", dict[int, int]]:
        """The tree of a contraction sequence: the t-th triple becomes the node
        labeled n-1-t.  Returns the tree and the map from sequence ids to node ids."""
        n = S.vertexCount
        verts = sorted(vertices) if vertices is not None else list(range(n))
        if len(verts) != n:
            raise SequenceError(f"sequence is for {n} vertices, got {len(verts)}")
        ids = {v: i for i, v in enumerate(verts)}
        kids = [None] * (n - 1)
        for t, (u, v, z) in enumerate(S.triples):
            if u not in ids or v not in ids:
                raise SequenceError(f"step {t}: vertex not alive")
            if z in ids:
                raise SequenceError(f"step {t}: new id {z} collides")
            node = 2 * n - 2 - t
            kids[n - 2 - t] = (ids.pop(u), ids.pop(v))
            ids[z] = node
        mapping = {v: i for i, v in enumerate(verts)}
        for t, (_, _, z) in enumerate(S.triples):
            mapping[z] = 2 * n - 2 - t
        return cls(n, kids), mapping


# ---------------------------------------------------------------------------
# decompositions

def _normalize_lab(lab, p):
    if isinstance(lab, tuple):
        f, r = lab
    else:
        f = r = lab
    return (int(f) % p, int(r) % p)


class TwinDecomposition:
    """Ranked tree plus transversal edges.

    ``bedges`` maps ``(x, y)`` with ``x < y`` to ``(nu(x->y), nu(y->x))``.
    ``diag`` optionally holds loop values per leaf (used for matrix products,
    whose diagonal is not a pair of distinct vertices).
    """

    def __init__(self, tree: RankedTree, bedges=(), field: PrimeField | None = None,
                 diag: Mapping[int, int] | None = None):
        if field is None:
            raise FieldError("a decomposition needs a field")
        self.tree = tree
        self.field = field
        p = field.p
        items = bedges.items() if isinstance(bedges, Mapping) else (
            ((e[0], e[1]), e[2] if len(e) == 3 else (e[2], e[3])) for e in bedges)
        store: dict[tuple[int, int], tuple[int, int]] = {}
        total = tree.node_count
        for (x, y), lab in items:
            x, y = int(x), int(y)
            if not (0 <= x < total and 0 <= y < total):
                raise DecompositionError(f"bedge {x}-{y} names an unknown node")
            if x == y:
                raise AncestorEdgeError(f"bedge {x}-{x} is a loop")
            f, r = _normalize_lab(lab, p)
            if x > y:
                x, y, f, r = y, x, r, f
            if f == 0 and r == 0:
                raise DecompositionError(f"bedge {x}-{y} carries label 0")
            if (x, y) in store:
                raise DoubleCoverError(f"bedge {x}-{y} listed twice")
            store[(x, y)] = (f, r)
        self.bedges = store
        self.diag = {int(k): int(v) % p for k, v in (diag or {}).items() if int(v) % p}
        for k in self.diag:
            if not 0 <= k < tree.n:
                raise DecompositionError(f"diagonal entry for non-leaf {k}")
        self._inc = None

    @property
    def n(self) -> int:
        return self.tree.n

    @property
    def directed(self) -> bool:
        return any(f != r for f, r in self.bedges.values())

    def __len__(self):
        return len(self.bedges)

    def items(self) -> Iterator[tuple[int, int, tuple[int, int]]]:
        for (x, y), lab in self.bedges.items():
            yield x, y, lab

    def incidence(self) -> list[dict[int, tuple[int, int]]]:
        """Per node: partner -> label oriented from that node (cached)."""
        if self._inc is None:
            inc: list[dict[int, tuple[int, int]]] = [{} for _ in range(self.tree.node_count)]
            for (x, y), lab in self.bedges.items():
                inc[x][y] = lab
                inc[y][x] = flip(lab)
            self._inc = inc
        return self._inc

    def with_bedges(self, bedges, diag=None) -> "TwinDecomposition":
        return TwinDecomposition(self.tree, bedges, self.field,
                                 self.diag if diag is None else diag)

    def __eq__(self, other):
        if not isinstance(other, TwinDecomposition):
            return NotImplemented
        return (self.tree == other.tree and self.field == other.field
                and self.bedges == other.bedges and self.diag == other.diag)

    def __repr__(self):
        return (f"TwinDecomposition(n={self.n}, bedges={len(self.bedges)}, "
                f"p={self.field.p}{', directed' if self.directed else ''})")


# ---------------------------------------------------------------------------
# frame engine

@dataclass
class StepInfo:
    label: int
    U: int
    V: int
    Z: int
    bedU: dict
    bedV: dict
    redU: set
    redV: set
    redZ: set


class FrameEngine:
    """Replays the trigraph frames of a decomposition bottom-up.

    ``bed[X][Y]`` is the label of a bedge joining two alive nodes, oriented
    from X; ``red[X]`` is the red neighbourhood of X in the current frame.
    When both children of a node carry the same label to some partner (a
    placement that is not lifted up) the merged pair is recorded as a
    virtual bedge so frames stay exact.
    """

    def __init__(self, D: TwinDecomposition):
        self.D = D
        self.tree = D.tree
        n = D.n
        self.inc = D.incidence()
        self.bed: dict[int, dict[int, tuple[int, int]]] = {v: {} for v in range(n)}
        self.red: dict[int, set[int]] = {v: set() for v in range(n)}
        self.alive: set[int] = set(range(n))
        self.label = n
        for v in range(n):
            for w, lab in self.inc[v].items():
                if w < n:
                    self.bed[v][w] = lab
        self.track = _DegreeTracker((v, 0) for v in range(n))
        self.width = 0

    def _crossing(self, x, y):
        tree = self.tree
        if tree.is_ancestor(x, y) or tree.is_ancestor(y, x):
            return AncestorEdgeError(f"bedge {x}-{y} joins a node to its ancestor")
        return CrossingError((x, y), crossing_borders(tree, x, y))

    def step(self) -> StepInfo:
        i = self.label - 1
        if i < 1:
            raise StopIteration
        tree, bed, red = self.tree, self.bed, self.red
        Z = tree.n + i - 1
        U, V = tree.kids[i - 1]
        bedU, bedV = bed.pop(U), bed.pop(V)
        redU, redV = red.pop(U), red.pop(V)
        self.alive.discard(U)
        self.alive.discard(V)
        redZ = (redU | redV) - {U, V}
        bedZ: dict[int, tuple[int, int]] = {}
        for X, lab in bedU.items():
            if X == V or X in redZ:
                continue
            if bedV.get(X) == lab:
                bedZ[X] = lab
            else:
                redZ.add(X)
        for X in bedV:
            if X != U and X not in redZ and X not in bedZ:
                redZ.add(X)
        for X in bedU:
            if X != V:
                del bed[X][U]
        for X in bedV:
            if X != U:
                del bed[X][V]
        touched = set()
        for X in redU:
            if X != V:
                red[X].discard(U)
                touched.add(X)
        for X in redV:
            if X != U:
                red[X].discard(V)
                touched.add(X)
        for X in redZ:
            red[X].add(Z)
            touched.add(X)
        for X, lab in self.inc[Z].items():
            if X in self.alive:
                if X in redZ or X in bedZ:
                    raise DoubleCoverError(f"bedge {Z}-{X} covers pairs already covered below")
                bedZ[X] = lab
            elif X >= tree.n and X - tree.n + 1 < i:
                continue
            else:
                raise self._crossing(Z, X)
        for X, lab in bedZ.items():
            bed[X][Z] = flip(lab)
        bed[Z] = bedZ
        red[Z] = redZ
        self.alive.add(Z)
        self.label = i
        track = self.track
        track.drop(U)
        track.drop(V)
        track.set(Z, len(redZ))
        for X in touched:
            track.set(X, len(red[X]))
        m = track.max()
        if m > self.width:
            self.width = m
        return StepInfo(i, U, V, Z, bedU, bedV, redU, redV, redZ)

    def __iter__(self):
        return self

    def __next__(self) -> StepInfo:
        return self.step()

    def run(self) -> int:
        for _ in self:
            pass
        return self.width


def crossing_borders(tree: RankedTree, x: int, y: int) -> list[int]:
    """Borders i crossed by a bedge x-y (empty when it is admissible)."""
    lx, ly = tree.label(x), tree.label(y)
    px, py = tree.parent_label(x), tree.parent_label(y)
    out = set(range(ly + 1, px + 1)) | set(range(lx + 1, py + 1))
    return sorted(out, reverse=True)


# ---------------------------------------------------------------------------
# operations

def seq_to_twd(G: Trigraph, S: ContractionSequence) -> TwinDecomposition:
    """Record every black edge at the step where it disappears."""
    if any(G.red.values()):
        raise SequenceError("the input graph must not have red edges")
    verts = sorted(G.adj)
    if S.vertexCount != len(verts):
        raise SequenceError(f"sequence is for {S.vertexCount} vertices, graph has {len(verts)}")
    tree, node = RankedTree.from_sequence(S, verts)
    H = G.copy()
    found: dict[tuple[int, int], tuple[int, int]] = {}
    from .trigraph import contract_inplace

    def record(a, b, lab):
        x, y = node[a], node[b]
        if x > y:
            x, y, lab = y, x, flip(lab)
        found[(x, y)] = lab

    for t, (u, v, z) in enumerate(S.triples):
        if u not in H.adj or v not in H.adj:
            raise SequenceError(f"step {t}: vertex not alive")
        au, av = H.adj[u], H.adj[v]
        for w, lab in au.items():
            if w == v:
                record(u, v, lab)
            elif av.get(w) != lab:
                record(u, w, lab)
        for w, lab in av.items():
            if w != u and au.get(w) != lab:
                record(v, w, lab)
        contract_inplace(H, u, v, z)
    return TwinDecomposition(tree, found, G.field)


def twd_to_seq(D: TwinDecomposition) -> ContractionSequence:
    """Triples by descending label; the node labeled i gets sequence id 2n-1-i."""
    tree = D.tree
    n = tree.n

    def sid(v):
        return v if v < n else 2 * n - 1 - (v - n + 1)

    triples = []
    for i in range(n - 1, 0, -1):
        a, b = tree.kids[i - 1]
        triples.append((sid(a), sid(b), 2 * n - 1 - i))
    return ContractionSequence(triples, n)


def lift_up(D: TwinDecomposition) -> TwinDecomposition:
    """Merge sibling bedges with equal labels to a common partner into one
    bedge at the parent, whenever that bedge would not cross a border."""
    tree = D.tree
    n = tree.n
    inc = [dict(d) for d in D.incidence()]
    changed = False
    for i in range(n - 1, 0, -1):
        z = n + i - 1
        u, w = tree.kids[i - 1]
        small, big = (u, w) if len(inc[u]) <= len(inc[w]) else (w, u)
        ib = inc[big]
        for v, lab in list(inc[small].items()):
            if v == big or ib.get(v) != lab or tree.parent_label(v) >= i:
                continue
            if v in inc[z]:
                raise DoubleCoverError(f"bedges {u}-{v}, {w}-{v} and {z}-{v} overlap")
            del inc[small][v], inc[v][small], ib[v], inc[v][big]
            inc[z][v] = lab
            inc[v][z] = flip(lab)
            changed = True
    if not changed:
        return D
    out = {}
    for x, nb in enumerate(inc):
        for y, lab in nb.items():
            if x < y:
                out[(x, y)] = lab
    return D.with_bedges(out)


@dataclass
class RedListFrame:
    """One frame of the red-list stream.

    ``alive`` and ``lists`` are live read-only views that change when the
    stream advances; call ``snapshot`` to keep a frame.
    """
    step: int
    alive: frozenset | set
    lists: Mapping[int, set]

    def snapshot(self) -> "RedListFrame":
        return RedListFrame(self.step, frozenset(self.alive),
                            {u: frozenset(s) for u, s in self.lists.items()})


def red_lists_stream(D: TwinDecomposition) -> Iterator[RedListFrame]:
    eng = FrameEngine(D)
    view = MappingProxyType(eng.red)
    for info in eng:
        yield RedListFrame(info.label, eng.alive, view)


def check_structure(D: TwinDecomposition) -> None:
    """Ancestor and border checks (the tree itself is checked at construction)."""
    tree = D.tree
    for x, y, _ in D.items():
        if tree.is_ancestor(x, y) or tree.is_ancestor(y, x):
            raise AncestorEdgeError(f"bedge {x}-{y} joins a node to its ancestor")
        b = crossing_borders(tree, x, y)
        if b:
            raise CrossingError((x, y), b)


def materialize(D: TwinDecomposition, check: bool = True) -> np.ndarray:
    """Dense label matrix M[u, v] = nu(u -> v), diagonal from ``D.diag``."""
    tree = D.tree
    n = tree.n
    if check:
        for x, y, _ in D.items():
            if tree.is_ancestor(x, y) or tree.is_ancestor(y, x):
                raise AncestorEdgeError(f"bedge {x}-{y} joins a node to its ancestor")
    M = np.zeros((n, n), dtype=np.int64)
    cover = np.zeros((n, n), dtype=np.int32) if check else None
    lo, hi = tree.lo, tree.hi
    for x, y, (f, r) in D.items():
        a, b, c, d = lo[x], hi[x], lo[y], hi[y]
        M[a:b, c:d] = f
        M[c:d, a:b] = r
        if check:
            cover[a:b, c:d] += 1
            if cover[a:b, c:d].max() > 1:
                raise DoubleCoverError(f"bedge {x}-{y} covers a pair twice")
            cover[c:d, a:b] += 1
    perm = np.array(tree.pos, dtype=np.int64)
    out = M[np.ix_(perm, perm)]
    for v, val in D.diag.items():
        out[v, v] = val
    return out


def materialize_trigraph(D: TwinDecomposition) -> Trigraph:
    return Trigraph.from_dense(materialize(D), D.field)


def validate_twd(D: TwinDecomposition) -> int:
    """Full check; returns the width (the maximum red degree over all frames)."""
    check_structure(D)
    materialize(D)
    return FrameEngine(lift_up(D)).run()


def entry_query(D: TwinDecomposition, u: int, v: int) -> int:
    """nu(u -> v) by walking the ancestors of u and testing each partner
    against the leaf position of v."""
    tree = D.tree
    n = tree.n
    if not (0 <= u < n and 0 <= v < n):
        raise DecompositionError(f"leaves must lie in 0..{n - 1}")
    if u == v:
        return D.diag.get(u, 0)
    inc = D.incidence()
    pv = tree.pos[v]
    lo, hi = tree.lo, tree.hi
    hit = None
    a = u
    while a != -1:
        for b, lab in inc[a].items():
            if lo[b] <= pv < hi[b]:
                if hit is not None:
                    raise DoubleCoverError(f"pair {u},{v} is covered twice")
                hit = lab[0]
        a = tree.parent[a]
    return 0 if hit is None else hit


# ---------------------------------------------------------------------------
# TWD text format

def dump_twd(D: TwinDecomposition) -> str:
    tree = D.tree
    n = tree.n
    lines = ["TWD 1", f"p {D.field.p}", f"n {n}"]
    for i, (a, b) in enumerate(tree.kids, start=1):
        lines.append(f"node {n + i - 1} {i} {a} {b}")
    for (x, y), (f, r) in sorted(D.bedges.items()):
        lines.append(f"bedge {x} {y} {f}" if f == r else f"bedge {x} {y} {f} {r}")
    for v in sorted(D.diag):
        lines.append(f"diag {v} {D.diag[v]}")
    return "\n".join(lines) + "\n"


def parse_twd(text: str) -> TwinDecomposition:
    rows = [(i + 1, ln.split()) for i, ln in enumerate(text.splitlines())]
    rows = [(i, t) for i, t in rows if t and not t[0].startswith("#")]

    def fail(lineno, msg):
        raise TWDFormatError(f"line {lineno}: {msg}")

    def ints(lineno, toks):
        try:
            return [int(t) for t in toks]
        except ValueError:
            fail(lineno, "expected integers")

    if len(rows) < 3:
        raise TWDFormatError("truncated header")
    if rows[0][1] != ["TWD", "1"]:
        fail(rows[0][0], "expected header 'TWD 1'")
    if rows[1][1][0] != "p" or len(rows[1][1]) != 2:
        fail(rows[1][0], "expected 'p <prime>'")
    if rows[2][1][0] != "n" or len(rows[2][1]) != 2:
        fail(rows[2][0], "expected 'n <leafCount>'")
    try:
        field = PrimeField(ints(rows[1][0], rows[1][1][1:])[0])
    except FieldError as e:
        fail(rows[1][0], str(e))
    n = ints(rows[2][0], rows[2][1][1:])[0]
    if n < 1:
        fail(rows[2][0], "leaf count must be positive")
    p = field.p
    records, bedges, diag = [], [], {}
    ids, labels = set(range(n)), set()
    for lineno, toks in rows[3:]:
        kind = toks[0]
        if kind == "node":
            if len(toks) != 5:
                fail(lineno, "expected 'node <id> <label> <childA> <childB>'")
            nid, lab, a, b = ints(lineno, toks[1:])
            if nid in ids:
                fail(lineno, f"duplicate node id {nid}")
            if not 1 <= lab <= n - 1 or lab in labels:
                fail(lineno, f"label {lab} is not a fresh value in 1..{n - 1}")
            ids.add(nid)
            labels.add(lab)
            records.append((nid, lab, a, b, lineno))
        elif kind == "bedge":
            if len(toks) not in (4, 5):
                fail(lineno, "expected 'bedge <idU> <idV> <value>'")
            vals = ints(lineno, toks[1:])
            labs = vals[2:]
            if len(labs) == 1 and not 1 <= labs[0] < p:
                fail(lineno, f"value {labs[0]} not in [1, {p})")
            if len(labs) == 2 and (not all(0 <= c < p for c in labs) or labs == [0, 0]):
                fail(lineno, f"values {labs} not a nonzero pair of residues")
            bedges.append((vals[0], vals[1], tuple(labs), lineno))
        elif kind == "diag":
            if len(toks) != 3:
                fail(lineno, "expected 'diag <leaf> <value>'")
            v, c = ints(lineno, toks[1:])
            if not 0 <= v < n or not 0 <= c < p:
                fail(lineno, "diagonal entry out of range")
            diag[v] = c
        else:
            fail(lineno, f"unknown record '{kind}'")
    if len(records) != n - 1:
        raise TWDFormatError(f"expected {n - 1} node lines, got {len(records)}")
    byid = {r[0]: r for r in records}
    for nid, lab, a, b, lineno in records:
        for c in (a, b):
            if c not in ids:
                fail(lineno, f"unknown child {c}")
            if c in byid and byid[c][1] <= lab:
                fail(lineno, f"child {c} has label {byid[c][1]} <= {lab}: not ranked")
    try:
        tree, remap = RankedTree.from_records(n, [r[:4] for r in records])
    except DecompositionError as e:
        raise TWDFormatError(str(e)) from None
    out = []
    for x, y, labs, lineno in bedges:
        if x not in remap or y not in remap:
            fail(lineno, "bedge names an unknown node")
        lab = labs[0] if len(labs) == 1 else (labs[0], labs[1])
        out.append((remap[x], remap[y], lab))
    items = {}
    for x, y, lab in out:
        key = (min(x, y), max(x, y))
        if key in items:
            raise TWDFormatError(f"bedge {x}-{y} listed twice")
        items[key] = _normalize_lab(lab, p) if x < y else flip(_normalize_lab(lab, p))
    return TwinDecomposition(tree, items, field, diag)
