import numpy as np
from hypothesis import given, settings, strategies as st

from frobcheck.eigen import eig, schur
from frobcheck.numeric import DD


def residual(A, values, vectors):
    A = np.array(A, dtype=complex)
    V = np.array(vectors, dtype=complex)
    return np.abs(A @ V - V @ np.diag(np.array(values, dtype=complex))).max() / max(1.0, np.abs(A).max())


def test_diagonal_matrix():
    values, _ = eig([[2, 0], [0, -1]])
    assert sorted(complex(v).real for v in values) == [-1, 2]


def test_real_matrix_with_complex_pair():
    values, vectors = eig([[0, -1], [1, 0]])
    assert np.allclose(sorted(complex(v).imag for v in values), [-1, 1], atol=1e-13)
    assert residual([[0, -1], [1, 0]], values, vectors) < 1e-13


def test_schur_is_unitary_similarity():
    rng = np.random.default_rng(4)
    A = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    T, Q = schur(A.tolist())
    T, Q = np.array(T, dtype=complex), np.array(Q, dtype=complex)
    assert np.abs(Q.conj().T @ Q - np.eye(4)).max() < 1e-12
    assert np.abs(Q @ T @ Q.conj().T - A).max() < 1e-12
    assert np.abs(np.tril(T, -1)).max() < 1e-12


def test_dd_eigenpairs():
    A = [[1, 2, 0], [0.5, -1, 1j], [0, 3, 0.25]]
    values, vectors = eig(A, DD)
    Am = DD.array(A)
    V = np.array(vectors, dtype=object)
    for k in range(3):
        col = V[:, k]
        r = Am.dot(col) - values[k] * col
        assert max(abs(x) for x in r) < 1e-28


finite = st.floats(-5, 5, allow_nan=False)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 5).flatmap(lambda n: st.lists(st.tuples(finite, finite), min_size=n * n, max_size=n * n)))
def test_random_eigenpairs(entries):
    n = int(round(len(entries) ** 0.5))
    A = np.array([complex(a, b) for a, b in entries]).reshape(n, n)
    values, vectors = eig(A.tolist())
    assert residual(A, values, vectors) < 1e-9
