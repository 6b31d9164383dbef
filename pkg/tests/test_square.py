import numpy as np
import pytest
from hypothesis import given, strategies as st

from golden import (SQUARE_FIG_BEDGES, SQUARE_FIG_EDGES, SQUARE_FIG_RESULT, SQUARE_FIG_TREE,
                    adjacency, named_decomposition)
from oracles import distance_square_bfs, square_loops
from twinmul.field import PrimeField
from twinmul.gen import GenSpec, greedy_contract, random_twd
from twinmul.square import (CertificateError, Ring, SquareError, build_partial_certificate,
                            distance_square_naive, distance_square_twd, evaluate_pair,
                            evaluate_sums, finalize, modular_square_naive, modular_square_twd,
                            refine_tree, resolve_certificate, square_diagonal, width_bound)
from twinmul.trigraph import Trigraph, contract_inplace
from twinmul.twindec import (FrameEngine, TwinDecomposition, lift_up, materialize, seq_to_twd,
                             twd_to_seq, validate_twd)

NAMES = "1234567"


def fig_decomposition():
    return named_decomposition(SQUARE_FIG_TREE, SQUARE_FIG_BEDGES, NAMES)


def edges_of(M):
    return sorted(f"{NAMES[a]}{NAMES[b]}" for a in range(7) for b in range(a + 1, 7) if M[a, b])


def case(seed, n_max=60, d_max=5):
    n = 1 + seed % n_max
    d = seed % (d_max + 1)
    p = [2, 3, 5][seed % 3]
    D, _ = random_twd(GenSpec(n, d, p, seed=seed, directed=seed % 4 == 3))
    return D


def test_drawn_decomposition_is_the_drawn_graph():
    D = fig_decomposition()
    assert (materialize(D) == adjacency(SQUARE_FIG_EDGES, NAMES)).all()
    assert validate_twd(D) <= 2


def test_figure_square_from_drawn_decomposition():
    out = modular_square_twd(fig_decomposition())
    assert edges_of(materialize(out)) == SQUARE_FIG_RESULT
    validate_twd(out)


def test_figure_square_from_greedy_decomposition():
    A = adjacency(SQUARE_FIG_EDGES, NAMES)
    G = Trigraph.from_dense(A, PrimeField(2))
    D = seq_to_twd(G, greedy_contract(G, 3))
    M = materialize(modular_square_twd(D))
    assert edges_of(M) == SQUARE_FIG_RESULT
    assert not M[3].any()


def test_naive_helpers_agree_with_loops():
    for seed in range(20):
        D = case(seed, 20)
        A = materialize(D)
        assert (modular_square_naive(A, D.field) == square_loops(A, D.field.p)).all()
        if D.field.p == 2 and not D.directed:
            assert (distance_square_naive(A) == distance_square_bfs(A)).all()


@pytest.mark.parametrize("seed", range(120))
def test_square_matches_loop_oracle(seed):
    D = case(seed)
    out = modular_square_twd(D)
    assert (materialize(out) == square_loops(materialize(D), D.field.p)).all()
    assert out.field == D.field


@pytest.mark.parametrize("seed", range(0, 120, 3))
def test_distance_square_matches_bfs(seed):
    D, _ = random_twd(GenSpec(1 + seed % 50, seed % 5, 2, seed=seed))
    out = distance_square_twd(D)
    assert (materialize(out) == distance_square_bfs(materialize(D))).all()


@pytest.mark.parametrize("seed", range(40))
def test_square_diagonal(seed):
    D = case(seed)
    A = materialize(D)
    p = D.field.p
    full = (A @ A) % p
    assert square_diagonal(D) == {u: int(full[u, u]) for u in range(D.n) if full[u, u]}


@pytest.mark.parametrize("seed", range(60))
def test_partial_certificate_evaluates_the_square(seed):
    D = case(seed, 50)
    C = build_partial_certificate(D)
    S = evaluate_sums(C.tree.tree, C.ring, C.alpha, C.b1)
    assert (S == square_loops(materialize(D), D.field.p)).all()


@pytest.mark.parametrize("seed", range(0, 60, 4))
def test_distance_certificate(seed):
    D, _ = random_twd(GenSpec(2 + seed % 30, seed % 4, 2, seed=seed))
    C = build_partial_certificate(D, distance=True)
    S = evaluate_sums(C.tree.tree, C.ring, C.alpha, C.b1)
    assert (S == distance_square_bfs(materialize(D))).all()


@pytest.mark.parametrize("seed", range(30))
def test_certificate_invariant_through_resolve_and_finalize(seed):
    D = case(seed, 40)
    want = square_loops(materialize(D), D.field.p)
    C = build_partial_certificate(D)
    tree = C.tree.tree
    rng = np.random.default_rng(seed)
    seen = []

    def check(state):
        S = evaluate_sums(tree, C.ring, state.alpha, state.b1, state.b2)
        seen.append(state.label)
        assert (S == want).all(), state.label
        if tree.n >= 2:
            u, v = rng.choice(tree.n, 2, replace=False)
            assert evaluate_pair(tree, C.ring, state.alpha, u, v, state.b1, state.b2) == want[u, v]

    R = resolve_certificate(C, on_step=check)
    finalize(R, D.field, on_step=check)
    assert len(seen) == 2 * (tree.n - 1)


@pytest.mark.parametrize("seed", range(25))
def test_resolve_red_lists_are_those_of_the_square(seed):
    D = case(seed, 40)
    A = materialize(D)
    C = build_partial_certificate(D)
    tree = C.tree.tree
    n = tree.n
    G2 = Trigraph.from_dense(square_loops(A, D.field.p), D.field)
    S = twd_to_seq(TwinDecomposition(tree, {}, D.field))
    frames = []
    for u, v, z in S.triples:
        contract_inplace(G2, u, v, z)
        to_node = {w: (w if w < n else 3 * n - 2 - w) for w in G2.adj}
        frames.append({to_node[w]: {to_node[x] for x in G2.red[w]} for w in G2.adj})
    got = []
    resolve_certificate(C, on_step=lambda st: got.append({k: set(v) for k, v in st.red.items()}))
    assert got == frames


@pytest.mark.parametrize("seed", range(80))
def test_refined_frames_respect_width_bound(seed):
    D = case(seed, 80)
    d = validate_twd(D)
    rt = refine_tree(D)
    out = modular_square_twd(D)
    marks = set(rt.step_marks)
    eng = FrameEngine(lift_up(out))
    worst = 0
    for k, _ in enumerate(eng, start=1):
        if k in marks:
            worst = max(worst, eng.track.max())
    assert worst <= width_bound(d, D.field.p)


@pytest.mark.parametrize("seed", range(60))
def test_output_width_bound_for_positive_width(seed):
    D, _ = random_twd(GenSpec(2 + seed % 120, 1 + seed % 5, 2, seed=seed))
    d = validate_twd(D)
    if d == 0:
        pytest.skip("generator produced a width-0 input")
    assert validate_twd(modular_square_twd(D)) <= width_bound(d, 2)


def test_refined_tree_parts():
    D = case(7, 30)
    rt = refine_tree(D)
    assert rt.tree.n == D.n
    assert len(rt.step_marks) == D.n - 1
    assert rt.step_marks == sorted(rt.step_marks)
    assert rt.sizes[rt.tree.root] == D.n
    assert all(0 <= c < D.field.p for c in rt.parity_counts)


def test_width_bound_values():
    assert width_bound(0, 2) == 1
    assert width_bound(1, 2) == 11
    assert width_bound(2, 3) == 188


def test_ring():
    R = Ring(5)
    assert R.add(3, 4) == 2 and R.mul(3, 4) == 2 and R.scale(7, 2) == 4
    B = Ring(2, saturating=True)
    assert B.add(1, 1) == 1 and B.scale(6, 1) == 1 and B.scale(0, 1) == 0


def test_errors():
    D = case(5, 20)
    with pytest.raises(SquareError):
        modular_square_twd(D.with_bedges(D.bedges, {0: 1}))
    D3, _ = random_twd(GenSpec(10, 2, 3, seed=1))
    with pytest.raises(SquareError):
        distance_square_twd(D3)
    C = build_partial_certificate(fig_decomposition())
    R = resolve_certificate(C)
    R.b1[0][1] = (1, 1)
    R.b1[1][0] = (1, 1)
    with pytest.raises(CertificateError):
        finalize(R)


@given(st.integers(0, 10**6))
def test_square_property(seed):
    D = case(seed, 30)
    out = modular_square_twd(D)
    assert (materialize(out) == modular_square_naive(materialize(D), D.field)).all()
    assert lift_up(out) == out
