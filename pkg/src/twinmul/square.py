"""Squaring a graph (or pair-labeled structure) directly on its twin-decomposition.

The modular square over F_q has lambda(u -> v) = sum_{w != u, v} nu(u -> w) nu(w -> v).
The pipeline runs in four passes:

* ``refine_tree`` splits every frame part by its degree signature and
  records the refined partitions as a new ranked tree;
* ``build_partial_certificate`` charges every 2-path to the step at which
  the later of its two edges disappears, giving node values ``alpha`` and
  transversal edges ``b1`` whose ancestor sums evaluate the square;
* ``resolve_certificate`` walks the new tree bottom-up, lifting equal
  information and parking the rest at the places where pairs disappear;
* ``finalize`` walks it top-down and pushes node values and leftover edges
  onto those places.

The distance square reuses the same passes over the Boolean semiring.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Callable

import numpy as np

from .field import PrimeField
from .trigraph import ZERO, flip
from .twindec import (DecompositionError, FrameEngine, RankedTree,
                      TwinDecomposition, check_structure, lift_up)


class SquareError(DecompositionError):
    pass


class CertificateError(SquareError):
    """An internal invariant of the pipeline failed (an upstream bug)."""

    code = 3


class Ring:
    """Arithmetic of the labels: F_q, or the saturating Boolean semiring."""

    def __init__(self, q: int, saturating: bool = False):
        self.q = q
        self.saturating = saturating

    def add(self, a, b):
        if self.saturating:
            return a | b
        return (a + b) % self.q

    def mul(self, a, b):
        if self.saturating:
            return a & b
        return a * b % self.q

    def scale(self, k, a):
        """a added to itself k times."""
        if self.saturating:
            return a if k else 0
        return k * a % self.q

    def add2(self, x, y):
        return (self.add(x[0], y[0]), self.add(x[1], y[1]))

    def scale2(self, k, x):
        return (self.scale(k, x[0]), self.scale(k, x[1]))


def _ring_for(D: TwinDecomposition, distance: bool) -> Ring:
    if distance:
        if D.field.p != 2:
            raise SquareError("the distance square is only defined over F_2")
        if D.directed:
            raise SquareError("the distance square needs an undirected graph")
        return Ring(2, saturating=True)
    return Ring(D.field.p)


# ---------------------------------------------------------------------------
# refinement

class _Part:
    __slots__ = ("node", "p", "b")

    def __init__(self, node, p, b):
        self.node = node
        self.p = p      # (sum out, sum in) inside the host
        self.b = b      # red neighbour W -> (sum out, sum in) towards W

    def key(self):
        return (self.p, tuple(sorted(self.b.items())))


@dataclass
class RefinedTree:
    """The ranked tree of refined parts.

    ``part_meta[node]`` is ``(host, signature)`` for nodes that are parts of
    some frame, and ``(host, None)`` for the inner nodes of the combs built
    when several parts merge at once.  ``step_marks[t]`` counts the nodes
    created once the t-th source contraction has been refined, so the frames
    right after those counts are exactly the refined partitions.
    """
    tree: RankedTree
    part_meta: dict
    sizes: list
    modulus: int
    step_marks: list = dc_field(default_factory=list)

    @property
    def parity_counts(self) -> list[int]:
        return [s % self.modulus for s in self.sizes]


@dataclass
class PartialCertificate:
    tree: RefinedTree
    alpha: list
    b1: list
    ring: Ring
    distance: bool = False

    def edge_count(self) -> int:
        return sum(len(nb) for nb in self.b1) // 2


@dataclass
class ResolvedCertificate:
    tree: RefinedTree
    alpha: list
    alpha_prime: list
    b1: list
    b2: list
    ring: Ring
    width: int = 0
    distance: bool = False

    def b2_count(self) -> int:
        return sum(len(nb) for nb in self.b2) // 2


class _Combs:
    """Allocates new internal nodes in creation order (labels n-1, n-2, ...)."""

    def __init__(self, n):
        self.n = n
        self.made: list[tuple[int, int]] = []

    def join(self, a, b):
        k = len(self.made)
        self.made.append((a, b))
        return 2 * self.n - 2 - k

    def tree(self) -> RankedTree:
        kids = self.made[::-1]
        return RankedTree(self.n, kids)


def _add_edge(adj, ring, P, Q, fw, bw):
    if not (fw or bw):
        return
    cur = adj[P].get(Q)
    if cur is not None:
        fw = ring.add(cur[0], fw)
        bw = ring.add(cur[1], bw)
    adj[P][Q] = (fw, bw)
    adj[Q][P] = (bw, fw)


class _Sweep:
    def __init__(self, D: TwinDecomposition, ring: Ring, certify: bool, distance: bool):
        self.D = D
        self.tree = D.tree
        self.ring = ring
        self.certify = certify
        self.distance = distance
        n = D.n
        self.n = n
        total = 2 * n - 1
        self.parts: dict[int, list[_Part]] = {v: [_Part(v, ZERO, {})] for v in range(n)}
        self.combs = _Combs(n)
        self.marks: list[int] = []
        self.meta: dict[int, tuple] = {v: (v, (ZERO, ())) for v in range(n)}
        self.alpha = [0] * total
        self.b1: list[dict] = [{} for _ in range(total)]
        self.size = [0] * total
        self.size[:n] = [1] * n

    def run(self):
        tree, n = self.tree, self.n
        eng = FrameEngine(self.D)
        inc = self.D.incidence()
        for i in range(n - 1, 0, -1):
            U, V = tree.kids[i - 1]
            if self.certify:
                self._charge(eng, U, V)
            info = eng.step()
            for X in eng.bed[info.Z]:
                if X not in inc[info.Z]:
                    raise CertificateError("the input decomposition is not lifted up")
            self._refine(info)
            self.marks.append(len(self.combs.made))
        root = tree.root
        self._regroup(root, self.parts.pop(root))
        # the root keeps one part per residue class; join them in class order
        last = self.parts.pop(root)
        node = last[0].node
        for P in last[1:]:
            z = self.combs.join(node, P.node)
            self.size[z] = self.size[node] + self.size[P.node]
            self.meta[z] = (root, None)
            node = z
        return self

    def host_size(self, X):
        return self.tree.size(X)

    # charging ------------------------------------------------------------
    def _charge(self, eng, U, V):
        ring, parts, alpha, b1 = self.ring, self.parts, self.alpha, self.b1
        add, mul, scale = ring.add, ring.mul, ring.scale
        size = self.host_size
        gone = [(U, X, lab) for X, lab in eng.bed[U].items()]
        gone += [(V, X, lab) for X, lab in eng.bed[V].items() if X != U]
        for A, C, (f, r) in gone:
            PA, PC = parts[A], parts[C]
            prod = mul(f, r)
            for host, others, other_size in ((PA, PC, size(C)), (PC, PA, size(A))):
                val = scale(other_size, prod)
                if val:
                    for j, P in enumerate(host):
                        alpha[P.node] = add(alpha[P.node], val)
                        for Q in host[j + 1:]:
                            _add_edge(b1, ring, P.node, Q.node, val, val)
            for P in PA:
                for Q in PC:
                    fw = add(mul(f, Q.p[1]), mul(P.p[0], f))
                    bw = add(mul(Q.p[0], r), mul(r, P.p[1]))
                    if self.distance:
                        fw, bw = add(fw, f), add(bw, r)
                    _add_edge(b1, ring, P.node, Q.node, fw, bw)
            for near, far, lab in ((PA, C, (f, r)), (PC, A, (r, f))):
                for Y in eng.red[far]:
                    for R in parts[Y]:
                        out, into = R.b[far]
                        fw, bw = mul(lab[0], into), mul(out, lab[1])
                        if fw or bw:
                            for P in near:
                                _add_edge(b1, ring, P.node, R.node, fw, bw)
        at: dict[int, list] = {}
        for A, C, lab in gone:
            at.setdefault(A, []).append((C, lab))
            at.setdefault(C, []).append((A, flip(lab)))
        for Q, lst in at.items():
            if len(lst) < 2:
                continue
            sq = size(Q)
            for j, (P, lp) in enumerate(lst):
                for Y, ly in lst[j + 1:]:
                    fw = scale(sq, mul(lp[1], ly[0]))
                    bw = scale(sq, mul(ly[1], lp[0]))
                    if fw or bw:
                        for R in parts[P]:
                            for S in parts[Y]:
                                _add_edge(b1, ring, R.node, S.node, fw, bw)

    # refinement ----------------------------------------------------------
    def _refine(self, info):
        ring, parts = self.ring, self.parts
        size = self.host_size
        U, V, Z = info.U, info.V, info.Z
        redZ = info.redZ
        merged = []
        for H, other, redH, bedH in ((U, V, info.redU, info.bedU), (V, U, info.redV, info.bedV)):
            for P in parts.pop(H):
                if other in redH:
                    rel = P.b[other]
                else:
                    rel = ring.scale2(size(other), bedH.get(other, ZERO))
                b = {}
                for W in redZ:
                    if W in redH:
                        b[W] = P.b[W]
                    else:
                        b[W] = ring.scale2(size(W), bedH.get(W, ZERO))
                P.p = ring.add2(P.p, rel)
                P.b = b
                merged.append(P)
        self._regroup(Z, merged)
        for X in sorted(redZ):
            inU, inV = X in info.redU, X in info.redV
            toU = ZERO if inU else ring.scale2(size(U), flip(info.bedU.get(X, ZERO)))
            toV = ZERO if inV else ring.scale2(size(V), flip(info.bedV.get(X, ZERO)))
            lst = parts.pop(X)
            for R in lst:
                cu = R.b.pop(U) if inU else toU
                cv = R.b.pop(V) if inV else toV
                R.b[Z] = ring.add2(cu, cv)
            self._regroup(X, lst)

    def _regroup(self, host, members):
        groups: dict = {}
        for P in members:
            groups.setdefault(P.key(), []).append(P)
        out = []
        for key in sorted(groups):
            grp = sorted(groups[key], key=lambda P: P.node)
            node = grp[0].node
            for P in grp[1:]:
                z = self.combs.join(node, P.node)
                self.size[z] = self.size[node] + self.size[P.node]
                self.meta[z] = (host, None)
                node = z
            head = grp[0]
            head.node = node
            self.meta[node] = (host, key)
            out.append(head)
        self.parts[host] = out


def _prepare(D: TwinDecomposition) -> TwinDecomposition:
    if D.diag:
        raise SquareError("squaring works on loopless structures (diagonal must be zero)")
    check_structure(D)
    return lift_up(D)


def _sweep(D, distance=False, certify=True):
    ring = _ring_for(D, distance)
    sw = _Sweep(_prepare(D), ring, certify, distance).run()
    rt = RefinedTree(sw.combs.tree(), sw.meta, sw.size, D.field.p, sw.marks)
    return sw, rt


def refine_tree(D: TwinDecomposition, distance: bool = False) -> RefinedTree:
    return _sweep(D, distance, certify=False)[1]


def build_partial_certificate(D: TwinDecomposition, refined: RefinedTree | None = None,
                              distance: bool = False) -> PartialCertificate:
    sw, rt = _sweep(D, distance, certify=True)
    if refined is not None and refined.tree != rt.tree:
        raise SquareError("refined tree does not belong to this decomposition")
    return PartialCertificate(refined or rt, sw.alpha, sw.b1, sw.ring, distance)


# ---------------------------------------------------------------------------
# resolve and finalize

@dataclass
class ResolveState:
    """What a step hook sees: the frame label just processed and the
    running structures (live, do not mutate)."""
    label: int
    alpha: list
    b1: list
    b2: list
    red: dict = dc_field(default_factory=dict)


def resolve_certificate(C: PartialCertificate,
                        on_step: Callable[[ResolveState], None] | None = None
                        ) -> ResolvedCertificate:
    ring = C.ring
    tree = C.tree.tree
    n = tree.n
    total = 2 * n - 1
    b1 = [dict(nb) for nb in C.b1]
    b2: list[dict] = [{} for _ in range(total)]
    J: dict[int, set] = {v: set() for v in range(n)}
    alpha_prime = [0] * total
    width = 0

    def park(P, Q, lab):
        b2[P][Q] = lab
        b2[Q][P] = flip(lab)

    for i in range(n - 1, 0, -1):
        Z = n + i - 1
        U, V = tree.kids[i - 1]
        JU, JV = J.pop(U), J.pop(V)
        JZ = (JU | JV) - {U, V}
        for W in JU:
            if W != V:
                J[W].discard(U)
        for W in JV:
            if W != U:
                J[W].discard(V)
        if V in JU:
            alpha_prime[Z] = 1
        else:
            lab = b1[U].pop(V, ZERO)
            b1[V].pop(U, None)
            park(U, V, lab)
        cand = (set(b1[U]) | set(b1[V]) | JU | JV) - {U, V}
        for W in sorted(cand):
            if W not in J:
                continue
            inU, inV = W in JU, W in JV
            if inU and inV:
                continue
            if not inU and not inV:
                e1 = b1[U].pop(W, ZERO)
                e2 = b1[V].pop(W, ZERO)
                b1[W].pop(U, None)
                b1[W].pop(V, None)
                if e1 == e2:
                    _add_edge(b1, ring, Z, W, e1[0], e1[1])
                else:
                    park(U, W, e1)
                    park(V, W, e2)
                    JZ.add(W)
            else:
                side = V if inU else U
                e = b1[side].pop(W, ZERO)
                b1[W].pop(side, None)
                park(side, W, e)
        for W in JZ:
            J[W].add(Z)
        J[Z] = JZ
        for W in JZ:
            if len(J[W]) > width:
                width = len(J[W])
        if len(JZ) > width:
            width = len(JZ)
        if on_step is not None:
            on_step(ResolveState(i, C.alpha, b1, b2, J))
    return ResolvedCertificate(C.tree, list(C.alpha), alpha_prime, b1, b2, ring,
                               width, C.distance)


def finalize(R: ResolvedCertificate, field: PrimeField | None = None,
             on_step: Callable[[ResolveState], None] | None = None) -> TwinDecomposition:
    ring = R.ring
    tree = R.tree.tree
    n = tree.n
    alpha = list(R.alpha)
    b1 = [dict(nb) for nb in R.b1]
    b2 = [dict(nb) for nb in R.b2]
    add = ring.add
    for i in range(1, n):
        Z = n + i - 1
        U, V = tree.kids[i - 1]
        a = alpha[Z]
        alpha[Z] = 0
        alpha[U] = add(alpha[U], a)
        alpha[V] = add(alpha[V], a)
        if V in b2[U]:
            f, r = b2[U][V]
            b2[U][V] = (add(f, a), add(r, a))
            b2[V][U] = (add(r, a), add(f, a))
        elif R.alpha_prime[Z] == 0:
            b2[U][V] = b2[V][U] = (a, a)
        else:
            _add_edge(b1, ring, U, V, a, a)
        for W, lab in list(b1[Z].items()):
            del b1[W][Z]
            for X in (U, V):
                if W in b2[X]:
                    cur = b2[X][W]
                    new = (add(cur[0], lab[0]), add(cur[1], lab[1]))
                    b2[X][W] = new
                    b2[W][X] = flip(new)
                else:
                    _add_edge(b1, ring, X, W, lab[0], lab[1])
        b1[Z] = {}
        if on_step is not None:
            on_step(ResolveState(i, alpha, b1, b2))
    for x, nb in enumerate(b1):
        for y, lab in nb.items():
            if lab != ZERO:
                raise CertificateError(f"residual edge {x}-{y} survived the final pass")
    out = {}
    for x, nb in enumerate(b2):
        for y, lab in nb.items():
            if x < y and lab != ZERO:
                out[(x, y)] = lab
    F = field or PrimeField(2 if R.distance else ring.q)
    return lift_up(TwinDecomposition(tree, out, F))


# ---------------------------------------------------------------------------
# evaluation and the full pipeline

def evaluate_sums(tree: RankedTree, ring: Ring, alpha, *edge_sets) -> np.ndarray:
    """Dense S[u, v]: node values of common ancestors plus labels of the
    given edges joining an ancestor of u to an ancestor of v.  Diagonal 0."""
    n = tree.n
    total = tree.node_count
    M = np.zeros((n, n), dtype=np.int64)
    lo, hi = tree.lo, tree.hi
    sat = ring.saturating
    q = ring.q

    def put(a, b, c, d, val):
        if sat:
            M[a:b, c:d] |= val
        else:
            M[a:b, c:d] = (M[a:b, c:d] + val) % q

    for W in range(total):
        if alpha[W]:
            put(lo[W], hi[W], lo[W], hi[W], alpha[W])
    for adj in edge_sets:
        for P, nb in enumerate(adj):
            for Q, (fw, _) in nb.items():
                if fw:
                    put(lo[P], hi[P], lo[Q], hi[Q], fw)
    perm = np.array(tree.pos, dtype=np.int64)
    out = M[np.ix_(perm, perm)]
    np.fill_diagonal(out, 0)
    return out


def evaluate_pair(tree: RankedTree, ring: Ring, alpha, u: int, v: int, *edge_sets) -> int:
    """S[u, v] for one pair by walking both ancestor chains."""
    anc_u = list(tree.ancestors(u))
    anc_v = set(tree.ancestors(v))
    s = 0
    for W in anc_u:
        if W in anc_v and alpha[W]:
            s = ring.add(s, alpha[W])
    for adj in edge_sets:
        for P in anc_u:
            for Q, (fw, _) in adj[P].items():
                if Q in anc_v and fw:
                    s = ring.add(s, fw)
    return s


def square_diagonal(D: TwinDecomposition) -> dict[int, int]:
    """sum_w nu(u -> w) nu(w -> u) per leaf u (the diagonal of the square)."""
    tree = D.tree
    p = D.field.p
    acc = [0] * tree.node_count
    for x, y, (f, r) in D.items():
        v = f * r % p
        if v:
            acc[x] = (acc[x] + tree.size(y) * v) % p
            acc[y] = (acc[y] + tree.size(x) * v) % p
    for i in range(1, tree.n):
        z = tree.n + i - 1
        for c in tree.kids[i - 1]:
            acc[c] = (acc[c] + acc[z]) % p
    return {u: acc[u] for u in range(tree.n) if acc[u]}


def _pipeline(D, distance, with_diag):
    C = build_partial_certificate(D, distance=distance)
    out = finalize(resolve_certificate(C), D.field)
    if with_diag:
        out = out.with_bedges(out.bedges, square_diagonal(D))
    return out


def modular_square_twd(D: TwinDecomposition, with_diag: bool = False) -> TwinDecomposition:
    """Decomposition of the modular square.  With ``with_diag`` the output
    also carries the diagonal of the matrix square (needed for products)."""
    return _pipeline(D, False, with_diag)


def distance_square_twd(D: TwinDecomposition) -> TwinDecomposition:
    return _pipeline(D, True, False)


def width_bound(d: int, q: int) -> int:
    return (d * d + d + 1) * q ** (d + 1) - 1


def modular_square_naive(M, F: PrimeField) -> np.ndarray:
    """lambda(u -> v) = sum over w other than u, v of M[u, w] M[w, v]."""
    A = np.array(M, dtype=np.int64) % F.p
    np.fill_diagonal(A, 0)
    S = (A @ A) % F.p
    np.fill_diagonal(S, 0)
    return S


def distance_square_naive(M) -> np.ndarray:
    A = (np.array(M, dtype=np.int64) != 0).astype(np.int64)
    np.fill_diagonal(A, 0)
    S = ((A @ A) > 0) | (A > 0)
    out = S.astype(np.int64)
    np.fill_diagonal(out, 0)
    return out
