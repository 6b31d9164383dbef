"""Matrix products through the square of a block structure.

For square matrices A and B of size n, the structure C = [[0, A], [B, 0]]
squares to [[AB, 0], [0, BA]].  C is stored as a pair-labeled structure on
2n vertices with nu(i -> n + j) = A[i, j] and nu(n + j -> i) = B[j, i], so
one call to the squaring pipeline yields both products.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .field import FieldError, ModulusMismatch, PrimeField
from .gen import GreedyFailure, greedy_contract
from .square import modular_square_twd
from .trigraph import Trigraph
from .twindec import (DecompositionError, TwinDecomposition, entry_query,
                      materialize, seq_to_twd)


class MatrixError(ValueError):
    pass


class FQMFormatError(MatrixError):
    pass


class MultiplyError(MatrixError):
    pass


@dataclass(eq=False)
class DenseMatrix:
    field: PrimeField
    entries: np.ndarray

    def __post_init__(self):
        a = np.array(self.entries, dtype=np.int64)
        if a.ndim != 2:
            if a.size == 0:
                a = a.reshape(0, 0)
            else:
                raise MatrixError("a matrix needs two dimensions")
        if a.size and (a.min() < 0 or a.max() >= self.field.p):
            raise MatrixError(f"entries must be residues mod {self.field.p}")
        self.entries = a

    @classmethod
    def from_rows(cls, rows, p: int | PrimeField) -> "DenseMatrix":
        F = p if isinstance(p, PrimeField) else PrimeField(p)
        return cls(F, np.array(rows, dtype=np.int64).reshape(len(rows), -1) % F.p
                   if len(rows) else np.zeros((0, 0), dtype=np.int64))

    @classmethod
    def zeros(cls, rows: int, cols: int, p: int | PrimeField) -> "DenseMatrix":
        F = p if isinstance(p, PrimeField) else PrimeField(p)
        return cls(F, np.zeros((rows, cols), dtype=np.int64))

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    @property
    def shape(self):
        return self.entries.shape

    def __getitem__(self, ij):
        return int(self.entries[ij])

    def __eq__(self, other):
        if not isinstance(other, DenseMatrix):
            return NotImplemented
        return (self.field == other.field and self.shape == other.shape
                and bool((self.entries == other.entries).all()))

    def __repr__(self):
        return f"DenseMatrix({self.rows}x{self.cols}, p={self.field.p})"

    def transpose(self) -> "DenseMatrix":
        return DenseMatrix(self.field, self.entries.T.copy())


# FQM text format ------------------------------------------------------------

def dump_fqm(M: DenseMatrix) -> str:
    lines = ["FQM 1", f"p {M.field.p}", f"rows {M.rows}", f"cols {M.cols}"]
    lines += [" ".join(str(int(x)) for x in row) for row in M.entries]
    return "\n".join(lines) + "\n"


def parse_fqm(text: str) -> DenseMatrix:
    lines = text.splitlines()
    if not lines or lines[0].split() != ["FQM", "1"]:
        raise FQMFormatError("line 1: expected header 'FQM 1'")

    def header(k, key):
        toks = lines[k].split() if k < len(lines) else []
        if len(toks) != 2 or toks[0] != key:
            raise FQMFormatError(f"line {k + 1}: expected '{key} <int>'")
        try:
            return int(toks[1])
        except ValueError:
            raise FQMFormatError(f"line {k + 1}: '{toks[1]}' is not an integer") from None

    p, n, m = header(1, "p"), header(2, "rows"), header(3, "cols")
    try:
        F = PrimeField(p)
    except FieldError as e:
        raise FQMFormatError(f"line 2: {e}") from None
    if n < 0 or m < 0:
        raise FQMFormatError("dimensions must be non-negative")
    body = [ln for ln in lines[4:] if ln.strip()]
    if len(body) != n:
        raise FQMFormatError(f"expected {n} rows, found {len(body)}")
    out = np.zeros((n, m), dtype=np.int64)
    for i, ln in enumerate(body):
        toks = ln.split()
        if len(toks) != m:
            raise FQMFormatError(f"line {i + 5}: expected {m} entries, found {len(toks)}")
        for j, t in enumerate(toks):
            try:
                v = int(t)
            except ValueError:
                raise FQMFormatError(f"line {i + 5}: '{t}' is not an integer") from None
            if not 0 <= v < p:
                raise FQMFormatError(f"line {i + 5}: {v} is not a residue mod {p}")
            out[i, j] = v
    return DenseMatrix(F, out)


# block structure -------------------------------------------------------------

@dataclass
class BlockStructure:
    """Dense pair-labeled structure [[0, A], [B, 0]] on 2n vertices."""
    field: PrimeField
    matrix: np.ndarray
    n: int
    a_shape: tuple
    b_shape: tuple

    def trigraph(self) -> Trigraph:
        return Trigraph.from_dense(self.matrix, self.field)


def encode_block(A: DenseMatrix, B: DenseMatrix) -> BlockStructure:
    if A.field != B.field:
        raise ModulusMismatch(f"A is over F_{A.field.p}, B over F_{B.field.p}")
    n = max(A.rows, A.cols, B.rows, B.cols, 1)
    C = np.zeros((2 * n, 2 * n), dtype=np.int64)
    C[:A.rows, n:n + A.cols] = A.entries
    C[n:n + B.rows, :B.cols] = B.entries
    return BlockStructure(A.field, C, n, A.shape, B.shape)


def block_decomposition(S: BlockStructure, budget: int = 16, pool: int = 64,
                        seed: int = 0) -> TwinDecomposition:
    """Decomposition of a block structure found by the greedy heuristic."""
    G = S.trigraph()
    try:
        seq = greedy_contract(G, budget, pool=pool, seed=seed)
    except GreedyFailure as e:
        raise MultiplyError(f"no decomposition within width {budget}: {e}") from e
    return seq_to_twd(G, seq)


@dataclass
class MatrixProduct:
    """Compressed square of a block structure; ``n`` is the block size."""
    decomposition: TwinDecomposition
    n: int
    a_shape: tuple
    b_shape: tuple

    @property
    def field(self) -> PrimeField:
        return self.decomposition.field

    def product(self) -> DenseMatrix:
        """The top-left block, AB."""
        r, c = self.a_shape[0], self.b_shape[1]
        return read_block(self.decomposition, (0, r), (0, c))

    def reverse_product(self) -> DenseMatrix:
        """The bottom-right block, BA."""
        r, c = self.b_shape[0], self.a_shape[1]
        n = self.n
        return read_block(self.decomposition, (n, n + r), (n, n + c))


def _as_block_twd(X, Y, budget, pool, seed):
    if isinstance(X, TwinDecomposition) and Y is None:
        if X.n % 2:
            raise MultiplyError("a block decomposition needs an even number of leaves")
        n = X.n // 2
        return X, n, (n, n), (n, n)
    if isinstance(X, TwinDecomposition) or isinstance(Y, TwinDecomposition):
        # Two separate decompositions do not share a tree on the inner
        # index, so the combined block structure is decomposed afresh.
        A = X if isinstance(X, DenseMatrix) else decode_matrix(X)
        B = Y if isinstance(Y, DenseMatrix) else decode_matrix(Y)
        X, Y = A, B
    if not isinstance(X, DenseMatrix) or not isinstance(Y, DenseMatrix):
        raise MultiplyError("operands must be dense matrices or decompositions")
    if X.cols != Y.rows:
        raise MatrixError(f"cannot multiply {X.rows}x{X.cols} by {Y.rows}x{Y.cols}")
    S = encode_block(X, Y)
    return block_decomposition(S, budget, pool, seed), S.n, X.shape, Y.shape


def multiply_twd(X, Y=None, budget: int = 16, pool: int = 64, seed: int = 0) -> MatrixProduct:
    """Product AB on compressed form.

    ``X`` alone may be a decomposition of a block structure (the linear
    route).  Dense operands are decomposed greedily first; a failure there
    raises ``MultiplyError`` instead of falling back to the naive product.
    """
    D, n, ashape, bshape = _as_block_twd(X, Y, budget, pool, seed)
    sq = modular_square_twd(D, with_diag=True)
    return MatrixProduct(sq, n, ashape, bshape)


def multiply_naive(A: DenseMatrix, B: DenseMatrix) -> DenseMatrix:
    if A.field != B.field:
        raise ModulusMismatch(f"A is over F_{A.field.p}, B over F_{B.field.p}")
    if A.cols != B.rows:
        raise MatrixError(f"cannot multiply {A.rows}x{A.cols} by {B.rows}x{B.cols}")
    p = A.field.p
    out = np.zeros((A.rows, B.cols), dtype=np.int64)
    # accumulate one inner index at a time so int64 never overflows
    for k in range(A.cols):
        out = (out + np.outer(A.entries[:, k], B.entries[k, :])) % p
    return DenseMatrix(A.field, out)


def split_blocks(D: TwinDecomposition) -> tuple[DenseMatrix, DenseMatrix]:
    """(A, B) from a decomposition of [[0, A], [B, 0]]."""
    n = D.n // 2
    M = materialize(D)
    return DenseMatrix(D.field, M[:n, n:].copy()), DenseMatrix(D.field, M[n:, :n].copy())


def decode_matrix(D: TwinDecomposition, rows: int | None = None) -> DenseMatrix:
    """A from a decomposition of the bipartite structure of an r x c matrix
    (leaves 0..r-1 are rows, the rest columns).  Without ``rows`` the two
    halves are assumed equal."""
    r = D.n // 2 if rows is None else rows
    M = materialize(D)
    return DenseMatrix(D.field, M[:r, r:].copy())


def read_block(D: TwinDecomposition, row_range, col_range, small: int = 256) -> DenseMatrix:
    r0, r1 = row_range
    c0, c1 = col_range
    n = D.n
    for a, b in ((r0, r1), (c0, c1)):
        if not (0 <= a <= b <= n):
            raise DecompositionError(f"range {a}..{b} outside 0..{n}")
    if (r1 - r0) * (c1 - c0) <= small:
        out = np.zeros((r1 - r0, c1 - c0), dtype=np.int64)
        for i in range(r0, r1):
            for j in range(c0, c1):
                out[i - r0, j - c0] = entry_query(D, i, j)
        return DenseMatrix(D.field, out)
    return DenseMatrix(D.field, materialize(D, check=False)[r0:r1, c0:c1].copy())
