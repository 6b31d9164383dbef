"""Frozen figure data, transcribed by hand from the drawings."""

import numpy as np

# seven-vertex graph squared in the G^[2] figure (vertices 1..7 -> 0..6)
SQUARE_FIG_EDGES = ["12", "13", "15", "16", "17", "24", "25", "34", "35", "67"]
SQUARE_FIG_RESULT = ["12", "13", "16", "17", "23", "25", "26", "27", "35", "36", "37", "56", "57", "67"]

# decomposition drawn for the same graph: leaves 1..7, internal nodes by label
#   6 = (6, 7), 5 = (1, 5), 4 = (2, 3), 3 = (node5, node4), 2 = (node3, 4), 1 = (node6, node2)
SQUARE_FIG_TREE = {6: ("6", "7"), 5: ("1", "5"), 4: ("2", "3"), 3: (5, 4), 2: (3, "4"), 1: (6, 2)}
SQUARE_FIG_BEDGES = [("6", "7"), ("1", "5"), (6, "1"), (4, "4"), (5, 4)]

# seven-vertex graph with the drawn 2-sequence
SEQ_FIG_EDGES = ["ab", "ad", "af", "bc", "bd", "be", "bf", "ce", "cf", "de", "dg", "eg", "fg"]
SEQ_FIG_STEPS = [("e", "f"), ("a", "d"), ("b", "ef"), ("ad", "g"), ("bef", "c"), ("adg", "bcef")]

# six-vertex twin-decomposition figure: leaves a..f, internal nodes by label
TWD_FIG_EDGES = ["bc", "bd", "de", "df", "fa", "fb"]
TWD_FIG_TREE = {5: ("a", "b"), 3: ("c", "d"), 4: ("e", "f"), 2: (5, 3), 1: (2, 4)}
TWD_FIG_BEDGES = [("b", "c"), ("b", "d"), ("d", 4), ("f", 5)]
TWD_FIG_BAD_BEDGES = [("b", 3), ("d", 4), ("f", 5)]

# parity minor figure: host 7 x 8 over F_2, drawn deletions and division
MINOR_FIG_HOST = [
    [1, 0, 1, 1, 0, 0, 1, 1],
    [0, 1, 1, 0, 0, 1, 0, 1],
    [0, 0, 0, 0, 0, 0, 0, 1],
    [1, 1, 0, 0, 1, 0, 1, 1],
    [1, 0, 0, 1, 1, 0, 1, 0],
    [0, 0, 1, 1, 1, 1, 0, 0],
    [0, 0, 1, 1, 0, 0, 0, 1],
]
MINOR_FIG_DELETED_ROWS = [1, 4]
MINOR_FIG_DELETED_COLS = [2, 4]
MINOR_FIG_ROW_PARTS = [[0], [1, 2], [3, 4], [5, 6]]
MINOR_FIG_COL_PARTS = [[0, 1], [2, 3, 4, 5], [6, 7]]
MINOR_FIG_TARGET = [[1, 1, 0], [0, 0, 1], [0, 0, 0], [0, 1, 1]]

# rank-2 Latin 3-division figure: ones at (x, y), x = column, y = row from the bottom
LATIN_FIG_ONES = [(0, 1), (1, 0), (2, 6), (3, 6), (3, 7), (4, 12), (5, 13), (6, 2), (7, 3),
                  (8, 8), (9, 8), (9, 9), (10, 15), (11, 14), (11, 15), (12, 4), (12, 5),
                  (13, 5), (14, 10), (15, 11), (16, 16), (16, 17), (17, 16)]
LATIN_FIG_TARGET = [[0, 1, 0], [0, 1, 1], [1, 0, 0]]


def adjacency(edges, names):
    idx = {c: i for i, c in enumerate(names)}
    A = np.zeros((len(names), len(names)), dtype=np.int64)
    for e in edges:
        u, v = idx[e[0]], idx[e[1]]
        A[u, v] = A[v, u] = 1
    return A


def latin_fig_host(fill=None):
    """The drawn 18 x 18 host.  Constant cells are drawn without values, so
    they are 0 unless ``fill`` maps (row block, column block) to a bit."""
    A = np.zeros((18, 18), dtype=np.int64)
    if fill is not None:
        for (a, b), bit in fill.items():
            A[2 * a:2 * a + 2, 2 * b:2 * b + 2] = bit
    boxes = set()
    for x, y in LATIN_FIG_ONES:
        boxes.add(((17 - y) // 2, x // 2))
    for a, b in boxes:
        A[2 * a:2 * a + 2, 2 * b:2 * b + 2] = 0
    for x, y in LATIN_FIG_ONES:
        A[17 - y, x] = 1
    return A, boxes


def named_decomposition(tree, bedges, names, p=2):
    """Build a decomposition from a figure: leaves are names, internal nodes
    are referred to by their label."""
    from twinmul.field import PrimeField
    from twinmul.twindec import RankedTree, TwinDecomposition
    n = len(names)

    def node(x):
        return names.index(x) if isinstance(x, str) else n + x - 1

    kids = [(node(tree[i][0]), node(tree[i][1])) for i in range(1, n)]
    T = RankedTree(n, kids)
    B = {}
    for x, y in bedges:
        a, b = sorted((node(x), node(y)))
        B[(a, b)] = (1, 1)
    return TwinDecomposition(T, B, PrimeField(p))
