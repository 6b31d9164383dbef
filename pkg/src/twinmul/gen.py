"""Certified random inputs and a greedy contraction heuristic.

``random_twd`` runs the contraction process forwards and decides the
bedges while it goes, so the red degree of every frame is known at the
moment each edge is placed and the width budget is never exceeded.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .field import PrimeField, is_prime
from .trigraph import ContractionSequence, Trigraph, flip
from .twindec import RankedTree, TwinDecomposition, materialize


@dataclass(frozen=True)
class GenSpec:
    n: int
    d: int
    p: int = 2
    density: float = 0.5
    seed: int = 0
    directed: bool = False

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if self.d < 0:
            raise ValueError("width budget must be non-negative")
        if not is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")
        if not 0.0 <= self.density <= 1.0:
            raise ValueError("density must lie in [0, 1]")


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


class _Builder:
    """Forward simulation of a contraction process with live bedges.

    Red edges only vanish by contraction, so the components of the red
    graph only ever merge and a union-find tracks them.  Every component
    keeps at most ``d`` red edges; then any two nodes of one component can be
    merged within budget, and so can a red-free node with anything.  Block
    mode only merges inside a block, where components with one node per
    block could all be incompatible, so there the whole frame is capped at
    ``d`` red edges instead.
    """

    def __init__(self, n, d, p, density, rng, directed, blocks=None):
        self.n, self.d, self.p = n, d, p
        self.density = density
        self.rng = rng
        self.directed = directed
        self.bed = {v: {} for v in range(n)}
        self.red = {v: set() for v in range(n)}
        self.block = blocks  # vertex -> block id, or None
        self.alive = [[] for _ in range(1 if blocks is None else 2)]
        self.slot = {}
        for v in range(n):
            self._add_alive(v, self._blk(v))
        self.comp = list(range(2 * n - 1))
        self.comp_edges = [0] * (2 * n - 1)
        self.global_cap = blocks is not None
        self.total_red = 0
        self.out: dict[tuple[int, int], tuple[int, int]] = {}
        self.kids = [None] * (n - 1)

    # alive bookkeeping -------------------------------------------------
    def _add_alive(self, v, b):
        lst = self.alive[b]
        self.slot[v] = (b, len(lst))
        lst.append(v)

    def _drop_alive(self, v):
        b, i = self.slot.pop(v)
        lst = self.alive[b]
        last = lst.pop()
        if last != v:
            lst[i] = last
            self.slot[last] = (b, i)

    def _blk(self, v):
        return 0 if self.block is None else self.block[v]

    def _find(self, v):
        comp = self.comp
        root = v
        while comp[root] != root:
            root = comp[root]
        while comp[v] != root:
            comp[v], v = root, comp[v]
        return root

    def _rand_label(self):
        p = self.p
        if not self.directed:
            c = int(self.rng.integers(1, p))
            return (c, c)
        while True:
            f, r = (int(x) for x in self.rng.integers(0, p, size=2))
            if f or r:
                return (f, r)

    # bedge bookkeeping -------------------------------------------------
    def _link(self, x, y, lab):
        self.bed[x][y] = lab
        self.bed[y][x] = flip(lab)
        key, val = ((x, y), lab) if x < y else ((y, x), flip(lab))
        self.out[key] = val

    def _unlink(self, x, y):
        del self.bed[x][y], self.bed[y][x]
        del self.out[(min(x, y), max(x, y))]

    def _can_pair(self, x, y):
        return self.block is None or self.block[x] != self.block[y]

    # merge choice ------------------------------------------------------
    def _forced(self, u, v):
        s = self.red[u] | self.red[v]
        s.discard(u)
        s.discard(v)
        return s

    def _feasible(self, u, v):
        if len(self._forced(u, v)) > self.d:
            return False
        cu, cv = self._find(u), self._find(v)
        return cu == cv or self.comp_edges[cu] + self.comp_edges[cv] <= self.d

    def _pick(self, b):
        rng = self.rng
        lst = self.alive[b]
        for _ in range(8):
            u = lst[int(rng.integers(len(lst)))]
            ru = self.red[u]
            v = None
            if ru and rng.random() < 0.6:
                w = sorted(ru)[int(rng.integers(len(ru)))]
                if self._blk(w) == b:
                    v = w
                else:
                    rw = sorted(self.red[w] - {u})
                    if rw:
                        v = rw[int(rng.integers(len(rw)))]
            if v is None:
                v = lst[int(rng.integers(len(lst)))]
            if v != u and self._feasible(u, v):
                return u, v
        # deterministic fallback: a red-free pair, or two nodes of one component
        calm = None
        seen = {}
        for u in sorted(lst):
            if not self.red[u]:
                if calm is not None:
                    return calm, u
                calm = u
            c = self._find(u)
            if c in seen:
                return seen[c], u
            seen[c] = u
        if calm is not None:
            for u in sorted(lst):
                if u != calm:
                    return calm, u
        raise AssertionError("no mergeable pair; the component cap was violated")

    # one step ----------------------------------------------------------
    def merge(self, t, u, v):
        rng, d = self.rng, self.d
        red, bed = self.red, self.bed
        density = self.density
        forced = self._forced(u, v)
        cu, cv = self._find(u), self._find(v)
        lost = len(red[u]) + len(red[v]) - (v in red[u])
        base = self.comp_edges[cu] + (self.comp_edges[cv] if cv != cu else 0) - lost
        # the sibling pair becomes internal: adding it is always free
        if v not in bed[u] and v not in red[u] and self._can_pair(u, v) and rng.random() < density:
            self._link(u, v, self._rand_label())
        # a bedge from one side to a red neighbour of the other side is free
        for x in sorted(forced):
            for a, b in ((u, v), (v, u)):
                if x in red[b] and x not in red[a] and x not in bed[a] \
                        and self._can_pair(a, x) and rng.random() < density * 0.5:
                    self._link(a, x, self._rand_label())
        newred = set()
        joined = set()

        def room(x):
            if len(forced) + len(newred) >= d or len(red[x] - {u, v}) + 1 > d:
                return False
            cx = self._find(x)
            mine = base + len(forced) + len(newred) + sum(self.comp_edges[c] for c in joined)
            extra = 0 if cx in (cu, cv) or cx in joined else self.comp_edges[cx]
            if mine + extra + 1 > d:
                return False
            if self.global_cap and self.total_red - lost + len(forced) + len(newred) + 1 > d:
                return False
            if extra or cx not in (cu, cv):
                joined.add(cx)
            return True

        # sampled partners: shared label (black after the merge) or one-sided
        k = int(rng.poisson(2.0 * density))
        pool = self.alive[1 - self._blk(u)] if self.block is not None else self.alive[0]
        for _ in range(k):
            x = pool[int(rng.integers(len(pool)))]
            if x in (u, v) or x in forced or x in bed[u] or x in bed[v]:
                continue
            lab = self._rand_label()
            if rng.random() < 0.6:
                self._link(u, x, lab)
                self._link(v, x, lab)
            elif rng.random() < 0.5 and room(x):
                self._link(u if rng.random() < 0.5 else v, x, lab)
                newred.add(x)
        # existing mismatches either become red or are repaired
        for x in sorted((set(bed[u]) | set(bed[v])) - {u, v} - forced):
            lu, lv = bed[u].get(x), bed[v].get(x)
            if lu == lv or x in newred:
                continue
            if rng.random() < 0.7 and room(x):
                newred.add(x)
                continue
            if lu is not None and lv is not None:
                self._unlink(v, x)
                self._link(v, x, lu)
            else:
                a = u if lu is not None else v
                if rng.random() < 0.5:
                    self._unlink(a, x)
                else:
                    self._link(v if a == u else u, x, bed[a][x])
        # contract
        z = 2 * self.n - 2 - t
        self.kids[self.n - 2 - t] = (u, v)
        bu, bv = bed.pop(u), bed.pop(v)
        ru, rv = red.pop(u), red.pop(v)
        bz = {}
        for x, lab in bu.items():
            if x == v:
                continue
            del bed[x][u]
            if bv.get(x) == lab:
                bz[x] = lab
        for x in bv:
            if x != u:
                del bed[x][v]
        for x in bz:  # lift the shared pair to the new node
            del self.out[(min(u, x), max(u, x))]
            del self.out[(min(v, x), max(v, x))]
        rz = forced | newred
        for x in ru:
            if x != v:
                red[x].discard(u)
        for x in rv:
            if x != u:
                red[x].discard(v)
        for x in rz:
            red[x].add(z)
        bed[z] = {}
        red[z] = rz
        for x, lab in bz.items():
            self._link(z, x, lab)
        # union-find: z, u, v and every newly joined component
        total = base + len(rz) + sum(self.comp_edges[c] for c in joined)
        for c in {cu, cv} | joined:
            self.comp[c] = z
        self.comp_edges[z] = total
        self.total_red += len(rz) - lost
        b = self._blk(u)
        self._drop_alive(u)
        self._drop_alive(v)
        if self.block is not None:
            self.block[z] = b
        self._add_alive(z, b)
        return z

    def run(self):
        n = self.n
        if self.block is None:
            for t in range(n - 1):
                self.merge(t, *self._pick(0))
        else:
            for t in range(n - 2):
                weights = [max(len(a) - 1, 0) for a in self.alive]
                b = 0 if self.rng.random() * sum(weights) < weights[0] else 1
                self.merge(t, *self._pick(b))
            self.merge(n - 2, self.alive[0][0], self.alive[1][0])
        return RankedTree(n, self.kids), self.out


def _build(n, d, p, density, seed, directed, blocks=None):
    return _Builder(n, d, p, density, make_rng(seed), directed,
                    None if blocks is None else dict(blocks)).run()


def random_twd(spec: GenSpec, with_graph: bool = True):
    """A random decomposition of width at most ``spec.d`` and, unless
    disabled, its materialized trigraph."""
    field = PrimeField(spec.p)
    if spec.n == 1:
        tree, out = RankedTree(1, []), {}
    else:
        tree, out = _build(spec.n, spec.d, spec.p, spec.density, spec.seed, spec.directed)
    D = TwinDecomposition(tree, out, field)
    G = Trigraph.from_dense(materialize(D, check=False), field) if with_graph else None
    return D, G


def random_block_twd(m: int, d: int, p: int, density: float = 0.5, seed: int = 0):
    """Decomposition of the 2m-vertex structure [[0, A], [B, 0]].

    Merges stay inside the two index blocks until the final root, and
    bedges only join a node of the first block to a node of the second, so
    the matrices can be read back with ``A = M[:m, m:]`` and ``B = M[m:, :m]``.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    n = 2 * m
    blocks = {v: (0 if v < m else 1) for v in range(n)}
    tree, out = _build(n, d, p, density, seed, True, blocks)
    return TwinDecomposition(tree, out, PrimeField(p))


# ---------------------------------------------------------------------------
# greedy contraction

class GreedyFailure(ValueError):
    def __init__(self, budget, best):
        self.budget = budget
        self.best_width = best
        super().__init__(f"width budget {budget} exhausted: best achievable next step has "
                         f"red degree {best}")


def _merge_score(G: Trigraph, u: int, v: int) -> tuple[int, int]:
    """Red degree after merging u, v: (max over z and its red neighbours, |red(z)|)."""
    au, av = G.adj[u], G.adj[v]
    ru, rv = G.red[u], G.red[v]
    rz = (ru | rv) - {u, v}
    for w, lab in au.items():
        if w != v and w not in rz and av.get(w) != lab:
            rz.add(w)
    for w in av:
        if w != u and w not in rz and w not in au:
            rz.add(w)
    worst = len(rz)
    for w in rz:
        rw = G.red[w]
        deg = len(rw) + 1 - (u in rw) - (v in rw)
        if deg > worst:
            worst = deg
    return worst, len(rz)


def _twin_pairs(G: Trigraph) -> set[tuple[int, int]]:
    """Pairs whose neighbourhoods coincide outside the pair, found by
    hashing: equal hashes for non-adjacent twins, hashes corrected by the
    joining edge for adjacent ones."""
    def item(w, lab):
        return hash((w, lab))

    sig = {}
    for u, nb in G.adj.items():
        h = 0
        for w, lab in nb.items():
            h ^= item(w, lab)
        for w in G.red[u]:
            h ^= item(w, None)
        sig[u] = h
    out = set()
    buckets: dict[int, list[int]] = {}
    for u, h in sig.items():
        buckets.setdefault(h, []).append(u)
    for grp in buckets.values():
        if len(grp) > 1:
            grp.sort()
            out.add((grp[0], grp[1]))
    for u, nb in G.adj.items():
        for w, lab in nb.items():
            if u < w and sig[u] ^ item(w, lab) == sig[w] ^ item(u, flip(lab)):
                out.add((u, w))
    return out


def greedy_contract(G: Trigraph, budget: int, pool: int = 64, seed: int = 0) -> ContractionSequence:
    """Merge the best pair among sampled, twin and red-adjacent candidates
    until one vertex is left; fails when every candidate exceeds ``budget``."""
    from .trigraph import contract_inplace
    H = G.copy()
    rng = make_rng(seed)
    nid = H.next_id()
    triples = []
    n = len(H)
    while len(H) > 1:
        alive = sorted(H.adj)
        m = len(alive)
        if m * (m - 1) // 2 <= 4 * pool:
            cands = [(alive[i], alive[j]) for i in range(m) for j in range(i + 1, m)]
        else:
            cands = set()
            for u in alive:
                for w in H.red[u]:
                    if u < w:
                        cands.add((u, w))
            cands |= _twin_pairs(H)
            idx = rng.integers(0, m, size=(pool, 2))
            for a, b in idx.tolist():
                if a != b:
                    cands.add((min(alive[a], alive[b]), max(alive[a], alive[b])))
            cands = sorted(cands)
        best, key = None, None
        for u, v in cands:
            k = _merge_score(H, u, v)
            if key is None or k < key:
                best, key = (u, v), k
        if key[0] > budget:
            raise GreedyFailure(budget, key[0])
        u, v = best
        contract_inplace(H, u, v, nid)
        triples.append((u, v, nid))
        nid += 1
    return ContractionSequence(triples, n)


def _full_rank_block(rng, k: int, p: int) -> np.ndarray:
    from .minors import _rank_mod
    while True:
        B = rng.integers(0, p, size=(k, k))
        if _rank_mod(B, p) == k:
            return B


def random_latin_host(n: int, p: int = 2, seed: int = 0, k: int = 2):
    """A random k n^2 x k n^2 matrix with a rank-k Latin n-division.

    Returns (matrix, coarse division, refinement).  In each coarse row I
    a random permutation picks which refined row serves which coarse
    column, and symmetrically for columns, so every refined row and
    column holds exactly one full-rank cell.
    """
    from .matprod import DenseMatrix
    from .minors import Division
    if n < 1 or k < 2:
        raise ValueError("need n >= 1 and k >= 2")
    F = PrimeField(p)
    rng = make_rng(seed)
    t = n * n
    A = np.zeros((k * t, k * t), dtype=np.int64)
    for a in range(t):
        for b in range(t):
            A[k * a:k * a + k, k * b:k * b + k] = rng.integers(0, p)
    row_pick = [rng.permutation(n) for _ in range(n)]
    col_pick = [rng.permutation(n) for _ in range(n)]
    for I in range(n):
        for J in range(n):
            a = I * n + int(row_pick[I][J])
            b = J * n + int(col_pick[J][I])
            A[k * a:k * a + k, k * b:k * b + k] = _full_rank_block(rng, k, p)
    size = k * t
    return (DenseMatrix(F, A), Division.regular(size, size, n),
            Division.regular(size, size, t))
