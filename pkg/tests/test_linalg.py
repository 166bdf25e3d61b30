from __future__ import annotations

import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geplab import linalg, pauli
from geplab.linalg import EigenPair


def random_complex(rng, n):
    return rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))


def multiset_distance(a, b) -> float:
    """Greedy matching distance between two eigenvalue lists."""
    b = list(b)
    worst = 0.0
    for x in sorted(a, key=lambda z: (z.real, z.imag)):
        k = min(range(len(b)), key=lambda j: abs(b[j] - x))
        worst = max(worst, abs(b.pop(k) - x))
    return worst


def test_diagonal_example():
    pairs = linalg.eig(np.diag([1, 2j, -3]))
    vals = [p.value for p in pairs]
    assert np.allclose(vals, [-3, 2j, 1])
    for p in pairs:
        k = int(np.argmax(np.abs(p.right)))
        e = np.zeros(3)
        e[k] = 1
        assert np.allclose(np.abs(p.right), e) and np.allclose(np.abs(p.left), e)
        assert np.vdot(p.left, p.right) == pytest.approx(1.0)


def test_one_by_one():
    (p,) = linalg.eig([[2 - 1j]])
    assert p.value == 2 - 1j and p.right[0] == 1


def test_zero_matrix():
    pairs = linalg.eig(np.zeros((3, 3)))
    assert all(p.value == 0 for p in pairs)


def test_rejects_bad_input():
    with pytest.raises(ValueError):
        linalg.eig(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        linalg.eig([[np.nan, 0], [0, 1]])


def test_hessenberg_is_similar():
    rng = np.random.default_rng(7)
    a = random_complex(rng, 12)
    h = linalg.hessenberg(a)
    assert np.allclose(np.tril(h, -2), 0)
    assert multiset_distance(np.linalg.eigvals(h), np.linalg.eigvals(a)) < 1e-10 * np.linalg.norm(a)


def test_convergence_error_carries_index():
    with pytest.raises(linalg.ConvergenceError) as info:
        linalg.hessenberg_eigenvalues(linalg.hessenberg(np.random.default_rng(3).normal(size=(6, 6))), max_iter=0)
    assert info.value.index >= 0


def test_pauli_matrices_match_energies():
    rng = np.random.default_rng(11)
    for _ in range(200):
        c = rng.normal(size=8)
        h = pauli.PauliVector(complex(c[0], c[1]), (complex(c[2], c[3]), complex(c[4], c[5]), complex(c[6], c[7])))
        got = [p.value for p in linalg.eig(h.matrix())]
        assert multiset_distance(got, pauli.energies(h)) <= 1e-10 * max(1.0, h.norm())


def test_residuals_random_matrices():
    rng = np.random.default_rng(2024)
    sizes = [2] * 80 + [5] * 60 + [20] * 50 + [100] * 10
    for n in sizes:
        a = random_complex(rng, n)
        pairs = linalg.eig(a)
        assert len(pairs) == n
        right, left = linalg.residuals(a, pairs)
        anorm = np.linalg.norm(a)
        assert right <= 1e-10 * anorm and left <= 1e-10 * anorm


def test_similarity_invariance():
    rng = np.random.default_rng(99)
    for n in (2, 5, 20):
        for _ in range(10):
            a = random_complex(rng, n)
            u, _, vh = np.linalg.svd(random_complex(rng, n))
            s = u @ np.diag(np.logspace(0, 3, n)) @ vh  # condition number 1e3
            b = np.linalg.solve(s, a @ s)
            va = [p.value for p in linalg.eig(a)]
            vb = [p.value for p in linalg.eig(b)]
            assert multiset_distance(va, vb) <= 1e-9 * max(abs(x) for x in va)


def test_trace_and_determinant():
    rng = np.random.default_rng(5)
    for n in (2, 5, 10, 20):
        a = random_complex(rng, n)
        vals = np.array([p.value for p in linalg.eig(a)])
        assert abs(vals.sum() - np.trace(a)) <= 1e-9 * np.sum(np.abs(vals))
        det = np.linalg.det(a)
        assert abs(np.prod(vals) - det) <= 1e-8 * abs(det)


def test_full_biorthogonality():
    rng = np.random.default_rng(8)
    for n in (3, 8, 30):
        a = random_complex(rng, n)
        pairs = linalg.eig(a)
        l = np.column_stack([p.left for p in pairs])
        r = np.column_stack([p.right for p in pairs])
        assert np.max(np.abs(l.conj().T @ r - np.eye(n))) <= 1e-8
        assert not any(p.near_ep for p in pairs)


def test_hermitian_left_equals_right():
    rng = np.random.default_rng(4)
    a = random_complex(rng, 6)
    a = a + a.conj().T
    pairs = linalg.eig(a)
    r = np.column_stack([p.right for p in pairs])
    assert np.allclose(r.conj().T @ r, np.eye(6), atol=1e-10)
    for p in pairs:
        assert np.allclose(p.left, p.right, atol=1e-10)


def test_degenerate_cluster_biorthogonalised():
    rng = np.random.default_rng(6)
    s = random_complex(rng, 4)
    a = s @ np.diag([1.0, 1.0, 2j, -1]) @ np.linalg.inv(s)
    pairs = linalg.eig(a)
    l = np.column_stack([p.left for p in pairs])
    r = np.column_stack([p.right for p in pairs])
    assert np.max(np.abs(l.conj().T @ r - np.eye(4))) <= 1e-8


def test_ep_is_flagged():
    pairs = linalg.eig([[1j, 1], [1, -1j]])
    assert all(p.near_ep for p in pairs)
    assert abs(pairs[0].value) < 1e-6


def test_biorthonormalize_manual_pairs():
    r = np.array([1.0, 1.0], dtype=complex)
    l = np.array([2.0, 0.0], dtype=complex)
    (p,) = linalg.biorthonormalize([EigenPair(1.0, r, l)])
    assert np.linalg.norm(p.right) == pytest.approx(1.0)
    assert np.vdot(p.left, p.right) == pytest.approx(1.0)
    (q,) = linalg.biorthonormalize([EigenPair(0.0, np.array([1, 0j]), np.array([0, 1j]))])
    assert q.near_ep


def test_projection_full_set_is_diagonal():
    rng = np.random.default_rng(1)
    a = random_complex(rng, 7)
    pairs = linalg.eig(a)
    h = linalg.project_effective_hamiltonian(a, pairs)
    assert np.allclose(h.matrix, np.diag([p.value for p in pairs]), atol=1e-9)
    assert not h.near_ep


def test_projection_single_pair():
    rng = np.random.default_rng(2)
    a = random_complex(rng, 5)
    p = linalg.eig(a)[2]
    h = linalg.project_effective_hamiltonian(a, [p])
    assert h.matrix.shape == (1, 1)
    assert h.matrix[0, 0] == pytest.approx(p.value, abs=1e-10)
    with pytest.raises(ValueError):
        h.to_pauli()


def test_projection_two_pairs_to_pauli():
    a = np.diag([1.0, -1.0, 5.0]).astype(complex)
    pairs = linalg.eig(a)
    h = linalg.project_effective_hamiltonian(a, pairs[:2]).to_pauli()
    assert np.allclose(h.vec, [0, 0, -1])


def test_projection_warns_near_ep():
    m = np.array([[1j, 1], [1, -1j]])
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        h = linalg.project_effective_hamiltonian(m, linalg.eig(m))
    assert h.near_ep
    assert any(issubclass(w.category, RuntimeWarning) for w in caught)


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 12), st.integers(0, 2**32 - 1))
def test_residual_property(n, seed):
    a = random_complex(np.random.default_rng(seed), n)
    right, left = linalg.residuals(a, linalg.eig(a))
    assert max(right, left) <= 1e-10 * np.linalg.norm(a)
