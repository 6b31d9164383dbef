"""Parity and linear minors, division statistics and rank Latin divisions."""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .field import PrimeField
from .matprod import DenseMatrix, MatrixError


class MinorError(MatrixError):
    pass


class ScriptError(MinorError):
    pass


class GuardrailError(MinorError):
    pass


class LatinError(MinorError):
    pass


def guardrails_on() -> bool:
    return os.environ.get("TWINMUL_GUARDRAILS", "on").lower() != "off"


def _guard(ok: bool, what: str):
    if not ok and guardrails_on():
        raise GuardrailError(f"{what} (set TWINMUL_GUARDRAILS=off to force)")


# ---------------------------------------------------------------------------
# scripts

@dataclass(frozen=True)
class DeleteRow:
    i: int


@dataclass(frozen=True)
class DeleteCol:
    j: int


@dataclass(frozen=True)
class WeightedSumRows:
    i: int
    alpha: int = 1
    beta: int = 1


@dataclass(frozen=True)
class WeightedSumCols:
    j: int
    alpha: int = 1
    beta: int = 1


Op = DeleteRow | DeleteCol | WeightedSumRows | WeightedSumCols


@dataclass
class MinorScript:
    ops: list

    def __len__(self):
        return len(self.ops)

    def __iter__(self):
        return iter(self.ops)

    def deletions_first(self) -> bool:
        seen_sum = False
        for op in self.ops:
            if isinstance(op, (DeleteRow, DeleteCol)):
                if seen_sum:
                    return False
            else:
                seen_sum = True
        return True


def _apply_op(A: np.ndarray, op, p: int) -> np.ndarray:
    rows, cols = A.shape
    if isinstance(op, DeleteRow):
        if not 0 <= op.i < rows:
            raise ScriptError(f"dr {op.i}: only {rows} rows")
        return np.delete(A, op.i, axis=0)
    if isinstance(op, DeleteCol):
        if not 0 <= op.j < cols:
            raise ScriptError(f"dc {op.j}: only {cols} columns")
        return np.delete(A, op.j, axis=1)
    if isinstance(op, WeightedSumRows):
        if not 0 <= op.i < rows - 1:
            raise ScriptError(f"wr {op.i}: row {op.i} has no next row")
        A = A.copy()
        A[op.i] = (op.alpha * A[op.i] + op.beta * A[op.i + 1]) % p
        return np.delete(A, op.i + 1, axis=0)
    if isinstance(op, WeightedSumCols):
        if not 0 <= op.j < cols - 1:
            raise ScriptError(f"wc {op.j}: column {op.j} has no next column")
        A = A.copy()
        A[:, op.j] = (op.alpha * A[:, op.j] + op.beta * A[:, op.j + 1]) % p
        return np.delete(A, op.j + 1, axis=1)
    raise ScriptError(f"unknown operation {op!r}")


def apply_script(M: DenseMatrix, S: MinorScript | Iterable) -> DenseMatrix:
    p = M.field.p
    A = M.entries.copy()
    for k, op in enumerate(S):
        try:
            A = _apply_op(A, op, p)
        except ScriptError as e:
            raise ScriptError(f"step {k}: {e}") from None
    return DenseMatrix(M.field, A)


def dump_msc(S: MinorScript) -> str:
    lines = ["MSC 1"]
    for op in S:
        if isinstance(op, DeleteRow):
            lines.append(f"dr {op.i}")
        elif isinstance(op, DeleteCol):
            lines.append(f"dc {op.j}")
        elif isinstance(op, WeightedSumRows):
            lines.append(f"wr {op.i} {op.alpha} {op.beta}")
        else:
            lines.append(f"wc {op.j} {op.alpha} {op.beta}")
    return "\n".join(lines) + "\n"


def parse_msc(text: str) -> MinorScript:
    rows = [(k + 1, ln.split()) for k, ln in enumerate(text.splitlines())]
    rows = [(k, t) for k, t in rows if t and not t[0].startswith("#")]
    if not rows or rows[0][1] != ["MSC", "1"]:
        raise ScriptError("line 1: expected header 'MSC 1'")
    arity = {"dr": 1, "dc": 1, "wr": 3, "wc": 3}
    ops = []
    for k, toks in rows[1:]:
        tag, args = toks[0], toks[1:]
        if tag not in arity or len(args) != arity[tag]:
            raise ScriptError(f"line {k}: cannot parse {' '.join(toks)!r}")
        try:
            vals = [int(a) for a in args]
        except ValueError:
            raise ScriptError(f"line {k}: arguments must be integers") from None
        if vals[0] < 0:
            raise ScriptError(f"line {k}: negative index")
        ops.append({"dr": DeleteRow, "dc": DeleteCol,
                    "wr": WeightedSumRows, "wc": WeightedSumCols}[tag](*vals))
    return MinorScript(ops)


# ---------------------------------------------------------------------------
# divisions and weightings

@dataclass(frozen=True)
class Division:
    """Interior cut positions: rows split at ``row_cuts`` (each cut is the
    first index of a new part), columns likewise."""
    rows: int
    cols: int
    row_cuts: tuple = ()
    col_cuts: tuple = ()

    def __post_init__(self):
        for cuts, size, what in ((self.row_cuts, self.rows, "row"),
                                 (self.col_cuts, self.cols, "column")):
            prev = 0
            for c in cuts:
                if not prev < c < size:
                    raise MinorError(f"{what} cuts {cuts} do not split 0..{size} into nonempty intervals")
                prev = c
        if self.rows < 1 or self.cols < 1:
            raise MinorError("a division needs at least one row and one column")

    @classmethod
    def regular(cls, rows: int, cols: int, k: int, l: int | None = None) -> "Division":
        l = k if l is None else l
        if k < 1 or l < 1 or rows % k or cols % l:
            raise MinorError(f"{rows}x{cols} has no regular ({k},{l})-division")
        return cls(rows, cols, tuple(range(rows // k, rows, rows // k)),
                   tuple(range(cols // l, cols, cols // l)))

    @staticmethod
    def _parts(cuts, size):
        b = (0,) + tuple(cuts) + (size,)
        return [range(b[t], b[t + 1]) for t in range(len(b) - 1)]

    def row_parts(self) -> list[range]:
        return self._parts(self.row_cuts, self.rows)

    def col_parts(self) -> list[range]:
        return self._parts(self.col_cuts, self.cols)

    @property
    def shape(self):
        return (len(self.row_cuts) + 1, len(self.col_cuts) + 1)

    def refines(self, other: "Division") -> bool:
        return (set(other.row_cuts) <= set(self.row_cuts)
                and set(other.col_cuts) <= set(self.col_cuts))


@dataclass(frozen=True)
class Weighting:
    rows: tuple
    cols: tuple

    @classmethod
    def ones(cls, M: DenseMatrix) -> "Weighting":
        return cls((1,) * M.rows, (1,) * M.cols)


def minor_by_division(M: DenseMatrix, D: Division, w: Weighting | None = None) -> DenseMatrix:
    if (D.rows, D.cols) != M.shape:
        raise MinorError(f"division is for {D.rows}x{D.cols}, matrix is {M.rows}x{M.cols}")
    w = w or Weighting.ones(M)
    if len(w.rows) != M.rows or len(w.cols) != M.cols:
        raise MinorError("weighting does not match the matrix")
    p = M.field.p
    A = (np.array(w.rows, dtype=np.int64)[:, None] * M.entries % p
         * np.array(w.cols, dtype=np.int64)[None, :]) % p
    rp, cp = D.row_parts(), D.col_parts()
    out = np.zeros((len(rp), len(cp)), dtype=np.int64)
    for a, R in enumerate(rp):
        for b, C in enumerate(cp):
            out[a, b] = int(A[R.start:R.stop, C.start:C.stop].sum()) % p
    return DenseMatrix(M.field, out)


def _script_groups(M: DenseMatrix, S: MinorScript):
    """Replay a script on line ids.  Returns, per axis, the surviving groups
    as lists of (original line, weight) and the deleted original lines."""
    p = M.field.p
    axes = {"r": ([[(x, 1)] for x in range(M.rows)], []),
            "c": ([[(x, 1)] for x in range(M.cols)], [])}
    for k, op in enumerate(S):
        is_row = isinstance(op, (DeleteRow, WeightedSumRows))
        groups, dead = axes["r" if is_row else "c"]
        idx = op.i if is_row else op.j
        if isinstance(op, (DeleteRow, DeleteCol)):
            if not 0 <= idx < len(groups):
                raise ScriptError(f"step {k}: index {idx} out of range")
            dead.extend(x for x, _ in groups.pop(idx))
        else:
            if not 0 <= idx < len(groups) - 1:
                raise ScriptError(f"step {k}: index {idx} has no next line")
            a, b = groups[idx], groups.pop(idx + 1)
            groups[idx] = ([(x, op.alpha * v % p) for x, v in a]
                           + [(x, op.beta * v % p) for x, v in b])
    if not axes["r"][0] or not axes["c"][0]:
        raise ScriptError("the script deletes every row or every column")
    return axes["r"], axes["c"]


def _cuts_and_weights(groups, size):
    weight = [0] * size
    owner = [0] * size
    for t, g in enumerate(groups):
        for x, v in g:
            weight[x] = v
            owner[x] = t
    first = {min(x for x, _ in g): t for t, g in enumerate(groups)}
    # deleted lines join the part on their left (or the first part)
    cur = 0
    alive = {x for g in groups for x, _ in g}
    for x in range(size):
        if x in first:
            cur = first[x]
        if x not in alive:
            owner[x] = cur
    cuts = tuple(x for x in range(1, size) if owner[x] != owner[x - 1])
    return cuts, tuple(weight)


def script_as_division(M: DenseMatrix, S: MinorScript) -> tuple[Division, Weighting]:
    """The division and weighting a script realizes; deleted lines get weight 0."""
    (rg, _), (cg, _) = _script_groups(M, S)
    rc, rw = _cuts_and_weights(rg, M.rows)
    cc, cw = _cuts_and_weights(cg, M.cols)
    return Division(M.rows, M.cols, rc, cc), Weighting(rw, cw)


def _axis_ops(groups, dead, Del, Sum):
    dels = [Del(x) for x in sorted(dead, reverse=True)]
    sums = []
    for t, g in enumerate(groups):
        g = sorted(g)
        for s in range(1, len(g)):
            sums.append(Sum(t, g[0][1] if s == 1 else 1, g[s][1]))
    return dels, sums


def normalize_script(M: DenseMatrix, S: MinorScript) -> MinorScript:
    """An equivalent script that performs every deletion before any sum."""
    (rg, rdead), (cg, cdead) = _script_groups(M, S)
    rd, rs = _axis_ops(rg, rdead, DeleteRow, WeightedSumRows)
    cd, cs = _axis_ops(cg, cdead, DeleteCol, WeightedSumCols)
    return MinorScript(rd + cd + rs + cs)


# ---------------------------------------------------------------------------
# exhaustive minor test

def _compositions(size: int, parts: int):
    """All interior cut tuples splitting 0..size into ``parts`` intervals."""
    if parts < 1 or parts > size:
        return
    for cuts in itertools.combinations(range(1, size), parts - 1):
        yield cuts


def is_minor_bruteforce(N: DenseMatrix, M: DenseMatrix, mode: str = "parity") -> bool:
    """Exhaustive test of N <= M.

    ``linear``: some division of M and some weighting give N.
    ``parity``: the same with 0/1 weights and at least one kept line in
    every part (deletions plus plain sums).
    """
    if mode not in ("parity", "linear"):
        raise MinorError(f"unknown mode {mode!r}")
    if N.field != M.field:
        raise MinorError("N and M live over different fields")
    p = M.field.p
    limit = 8 if p == 2 else 6
    _guard(max(M.shape) <= limit and p <= 3, f"host {M.rows}x{M.cols} over F_{p} is beyond the enumeration limit")
    n, m = N.shape
    if n > M.rows or m > M.cols or n == 0 or m == 0:
        return False
    weights = [1] if mode == "parity" else list(range(p))
    col_weights = [0, 1] if mode == "parity" else list(range(p))
    A = M.entries
    target = [tuple(int(x) for x in row) for row in N.entries]
    for cuts in _compositions(M.cols, m):
        bounds = (0,) + cuts + (M.cols,)
        parts = [range(bounds[t], bounds[t + 1]) for t in range(m)]
        for w in itertools.product(col_weights, repeat=M.cols):
            if mode == "parity" and any(not any(w[c] for c in C) for C in parts):
                continue
            Mp = np.zeros((M.rows, m), dtype=np.int64)
            for t, C in enumerate(parts):
                for c in C:
                    if w[c]:
                        Mp[:, t] += w[c] * A[:, c]
            Mp %= p
            if _rows_reach(Mp, target, weights, p, mode == "parity"):
                return True
    return False


def _rows_reach(Mp, target, weights, p, need_kept):
    """Can the rows of Mp be divided and weighted into ``target``?"""
    n = len(target)
    m = Mp.shape[1]
    zero = (0,) * m
    rows = [tuple(int(x) for x in r) for r in Mp]
    # state: (part index, partial sum, part has a kept line)
    states = {(0, zero, False)}
    for r in rows:
        nxt = set()
        for part, s, kept in states:
            opts = [0] + weights if need_kept else weights
            for w in set(opts):
                add = tuple((a + w * b) % p for a, b in zip(s, r))
                nxt.add((part, add, kept or (w != 0)))
            if (s == target[part] and (kept or not need_kept)) and part + 1 < n:
                for w in set(opts):
                    nxt.add((part + 1, tuple(w * b % p for b in r), w != 0))
        states = nxt
    return any(part == n - 1 and s == target[-1] and (kept or not need_kept)
               for part, s, kept in states)


# ---------------------------------------------------------------------------
# division statistics

class _CellStats:
    """Memoized (nonzero, distinct rows, distinct columns, rank) per cell."""

    def __init__(self, A: np.ndarray, p: int, rank_variant: bool):
        self.A = A
        self.rows = [tuple(r) for r in A.tolist()]
        self.p = p
        self.rank_variant = rank_variant
        self.cache: dict = {}

    def get(self, r0, r1, c0, c1):
        key = (r0, r1, c0, c1)
        hit = self.cache.get(key)
        if hit is None:
            cell = [r[c0:c1] for r in self.rows[r0:r1]]
            rk = _rank_mod(self.A[r0:r1, c0:c1], self.p) if self.rank_variant else None
            hit = (any(any(r) for r in cell), len(set(cell)), len(set(zip(*cell))), rk)
            self.cache[key] = hit
        return hit


def _predicates(k, rank_variant):
    def grid(s):
        return s[0]

    def mixed(s):
        return s[1] >= 2 and s[2] >= 2

    def rich(s):
        if rank_variant:
            return s[3] >= k
        return s[1] >= k or s[2] >= k

    return grid, mixed, rich


def _has_division(stats: _CellStats, rows, cols, k, pred) -> bool:
    for rc in _compositions(rows, k):
        rb = (0,) + rc + (rows,)
        for cc in _compositions(cols, k):
            cb = (0,) + cc + (cols,)
            ok = True
            for a in range(k):
                for b in range(k):
                    if not pred(stats.get(rb[a], rb[a + 1], cb[b], cb[b + 1])):
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                return True
    return False


def division_stats(M: DenseMatrix, rank_variant: bool = False) -> tuple[int, int, int]:
    """(grid number, mixed number, grid rank) by exhaustive cut enumeration.

    An all-zero matrix reports (0, 0, 0).  With ``rank_variant`` the grid
    rank asks for rank >= k in every cell instead of k distinct lines.
    """
    _guard(max(M.shape, default=0) <= 12, f"{M.rows}x{M.cols} is beyond the 12x12 limit")
    A = M.entries
    if A.size == 0 or not A.any():
        return (0, 0, 0)
    rows, cols = A.shape
    stats = _CellStats(A, M.field.p, rank_variant)
    out = []
    for which in range(3):
        best = 0
        for k in range(1, min(rows, cols) + 1):
            pred = _predicates(k, rank_variant)[which]
            # each statistic is monotone: a k-division yields a (k-1)-division
            if _has_division(stats, rows, cols, k, pred):
                best = k
            else:
                break
        out.append(best)
    return tuple(out)


def mt_bound(k: int) -> int:
    """ceil(8/3 (k+1)^2 2^(4k)), exact."""
    if not isinstance(k, int) or k < 1:
        raise MinorError("k must be a positive integer")
    return -(-8 * (k + 1) ** 2 * 2 ** (4 * k) // 3)


# ---------------------------------------------------------------------------
# rank and rank Latin divisions

def _rank_mod(A: np.ndarray, p: int) -> int:
    A = np.array(A, dtype=np.int64) % p
    rows, cols = A.shape
    r = 0
    for c in range(cols):
        if r == rows:
            break
        piv = next((i for i in range(r, rows) if A[i, c]), None)
        if piv is None:
            continue
        if piv != r:
            A[[r, piv]] = A[[piv, r]]
        inv = pow(int(A[r, c]), p - 2, p)
        A[r] = A[r] * inv % p
        others = [i for i in range(rows) if i != r and A[i, c]]
        for i in others:
            A[i] = (A[i] - A[i, c] * A[r]) % p
        r += 1
    return r


def rank_fp(M: DenseMatrix) -> int:
    return _rank_mod(M.entries, M.field.p) if M.entries.size else 0


def _is_constant(cell: np.ndarray) -> bool:
    return cell.size == 0 or bool((cell == cell.flat[0]).all())


def latin_cells(M: DenseMatrix, refinement: Division, k: int) -> list[tuple[int, int]]:
    """Refined cells that have rank k."""
    rp, cp = refinement.row_parts(), refinement.col_parts()
    out = []
    for a, R in enumerate(rp):
        for b, C in enumerate(cp):
            cell = M.entries[R.start:R.stop, C.start:C.stop]
            if _rank_mod(cell, M.field.p) == k:
                out.append((a, b))
    return out


def validate_rank_latin(M: DenseMatrix, D: Division, refinement: Division, k: int) -> bool:
    if k < 2:
        raise LatinError("rank Latin divisions need k >= 2")
    nd = D.shape[0]
    if D.shape != (nd, nd) or nd < 1:
        raise LatinError("the coarse division must be a d-division")
    size = k * nd * nd
    if M.shape != (size, size):
        raise LatinError(f"a rank-{k} Latin {nd}-division needs a {size}x{size} matrix")
    if D != Division.regular(size, size, nd):
        raise LatinError("the coarse division is not regular")
    if refinement != Division.regular(size, size, nd * nd):
        raise LatinError("the refinement is not a regular d^2-division")
    rp, cp = refinement.row_parts(), refinement.col_parts()
    p = M.field.p
    full = set()
    for a, R in enumerate(rp):
        for b, C in enumerate(cp):
            cell = M.entries[R.start:R.stop, C.start:C.stop]
            if _is_constant(cell):
                continue
            if _rank_mod(cell, p) != k:
                return False
            full.add((a, b))
    t = nd * nd
    if sorted(a for a, _ in full) != list(range(t)):
        return False
    if sorted(b for _, b in full) != list(range(t)):
        return False
    coarse = sorted((a // nd, b // nd) for a, b in full)
    return coarse == [(i, j) for i in range(nd) for j in range(nd)]


class _Tracker:
    """Emits script operations by original line ids while tracking positions."""

    def __init__(self, rows, cols):
        self.rows = list(range(rows))
        self.cols = list(range(cols))
        self.ops: list = []

    def del_row(self, r):
        i = self.rows.index(r)
        self.ops.append(DeleteRow(i))
        self.rows.pop(i)

    def sum_rows(self, r, s, alpha=1, beta=1):
        i = self.rows.index(r)
        if self.rows[i + 1] != s:
            raise LatinError("rows to sum are not consecutive")
        self.ops.append(WeightedSumRows(i, alpha, beta))
        self.rows.pop(i + 1)

    def sum_cols(self, c, e, alpha=1, beta=1):
        j = self.cols.index(c)
        if self.cols[j + 1] != e:
            raise LatinError("columns to sum are not consecutive")
        self.ops.append(WeightedSumCols(j, alpha, beta))
        self.cols.pop(j + 1)


def extract_from_latin(M: DenseMatrix, N: DenseMatrix, D: Division | None = None,
                       refinement: Division | None = None) -> MinorScript:
    """A script turning a host with a rank-2 Latin n-division into N (n x n).

    Over F_2 the script only deletes and plainly sums; over other prime
    fields it uses the weighted sums c' - c'' and (N x^-1) r + 0 r'.
    """
    if N.field != M.field:
        raise LatinError("host and target live over different fields")
    n = N.rows
    if N.shape != (n, n) or n < 1:
        raise LatinError("the target must be a nonempty square matrix")
    size = 2 * n * n
    D = D or Division.regular(size, size, n)
    refinement = refinement or Division.regular(size, size, n * n)
    if not validate_rank_latin(M, D, refinement, 2):
        raise LatinError("the host has no rank-2 Latin division of that shape")
    F = M.field
    p = F.p
    A = M.entries
    t = n * n
    col_minus = (1, 1) if p == 2 else (1, p - 1)
    # column c_j := c'_j - c''_j (a plain sum over F_2)
    Mp = (A[:, 0::2] * col_minus[0] + A[:, 1::2] * col_minus[1]) % p
    tr = _Tracker(size, size)
    for j in range(t):
        tr.sum_cols(2 * j, 2 * j + 1, *col_minus)
    box = {}
    for a, b in latin_cells(M, refinement, 2):
        box[(a // n, b // n)] = (a, b)
    for (I, J), (a, b) in sorted(box.items()):
        r, r2 = 2 * a, 2 * a + 1
        x, y = int(Mp[r, b]), int(Mp[r2, b])
        want = int(N.entries[I, J])
        if p == 2:
            if (x + y) % 2 != want:
                tr.del_row(r if x else r2)
        else:
            if x:
                tr.sum_rows(r, r2, want * pow(x, p - 2, p) % p, 0)
            else:
                tr.sum_rows(r, r2, 0, want * pow(y, p - 2, p) % p)
    block = 2 * n
    for I in range(n):
        kept = [r for r in tr.rows if I * block <= r < (I + 1) * block]
        for r in kept[1:]:
            tr.sum_rows(kept[0], r)
    for J in range(n):
        kept = [c for c in tr.cols if J * block <= c < (J + 1) * block]
        for c in kept[1:]:
            tr.sum_cols(kept[0], c)
    return MinorScript(tr.ops)
