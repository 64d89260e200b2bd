"""Eigen-decomposition of small dense complex nonsymmetric matrices.

Householder reduction to Hessenberg form followed by Wilkinson-shifted
QR sweeps with Givens rotations, working on plain Python scalars so the
same code runs on ``complex`` and on mpmath ``mpc`` values.  Eigenvectors
come from back substitution on the resulting Schur form.
"""
from __future__ import annotations

from .errors import EigensolverFailure
from .numeric import DOUBLE, Precision


def _conj(z):
    return z.conjugate()


def _hessenberg(H, Q, prec: Precision):
    n = len(H)
    for k in range(n - 2):
        x = [H[i][k] for i in range(k + 1, n)]
        alpha = prec.sqrt(sum(abs(xi) ** 2 for xi in x))
        if abs(alpha) == 0:
            continue
        phase = x[0] / abs(x[0]) if abs(x[0]) != 0 else prec.scalar(1)
        v = list(x)
        v[0] = v[0] + phase * alpha
        vn2 = sum(abs(vi) ** 2 for vi in v)
        if vn2 == 0:
            continue
        off = k + 1
        for j in range(n):
            s = sum(_conj(v[i]) * H[off + i][j] for i in range(len(v)))
            f = 2 * s / vn2
            for i in range(len(v)):
                H[off + i][j] = H[off + i][j] - f * v[i]
        for M in (H, Q):
            for i in range(n):
                s = sum(M[i][off + l] * v[l] for l in range(len(v)))
                f = 2 * s / vn2
                for l in range(len(v)):
                    M[i][off + l] = M[i][off + l] - f * _conj(v[l])
        for i in range(k + 2, n):
            H[i][k] = prec.scalar(0)


def _givens(x, y, prec: Precision):
    r = prec.sqrt(abs(x) ** 2 + abs(y) ** 2)
    if abs(r) == 0:
        return prec.scalar(1), prec.scalar(0)
    return x / r, y / r


def schur(A, precision: Precision = DOUBLE, tol: float | None = None, max_iter: int = 500):
    """Return ``(T, Q)`` with ``A = Q T Q^*`` and ``T`` upper triangular (lists of lists)."""
    prec = precision
    tol = prec.eig_tol if tol is None else tol
    n = len(A)
    H = [[prec.scalar(A[i][j]) for j in range(n)] for i in range(n)]
    Q = [[prec.scalar(1 if i == j else 0) for j in range(n)] for i in range(n)]
    _hessenberg(H, Q, prec)
    zero = prec.scalar(0)
    hi = n - 1
    total = 0
    since_deflation = 0
    while hi > 0:
        lo = hi
        while lo > 0:
            scale = abs(H[lo - 1][lo - 1]) + abs(H[lo][lo])
            if scale == 0:
                scale = max(abs(H[i][j]) for i in range(n) for j in range(n))
            if abs(H[lo][lo - 1]) <= tol * scale:
                H[lo][lo - 1] = zero
                break
            lo -= 1
        if lo == hi:
            hi -= 1
            since_deflation = 0
            continue
        total += 1
        since_deflation += 1
        if total > max_iter:
            raise EigensolverFailure(f"QR iteration did not converge in {max_iter} iterations")
        a, b = H[hi - 1][hi - 1], H[hi - 1][hi]
        c, d = H[hi][hi - 1], H[hi][hi]
        if since_deflation % 11 == 0:
            mu = d + abs(c)
        else:
            half = (a - d) / 2
            disc = prec.sqrt(half * half + b * c)
            m1, m2 = (a + d) / 2 + disc, (a + d) / 2 - disc
            mu = m1 if abs(m1 - d) <= abs(m2 - d) else m2
        for k in range(lo, hi + 1):
            H[k][k] = H[k][k] - mu
        rots = []
        for k in range(lo, hi):
            cs, sn = _givens(H[k][k], H[k + 1][k], prec)
            rots.append((cs, sn))
            for j in range(k, n):
                x, y = H[k][j], H[k + 1][j]
                H[k][j] = _conj(cs) * x + _conj(sn) * y
                H[k + 1][j] = -sn * x + cs * y
            H[k + 1][k] = zero
        for idx, k in enumerate(range(lo, hi)):
            cs, sn = rots[idx]
            for i in range(0, min(k + 2, hi) + 1):
                x, y = H[i][k], H[i][k + 1]
                H[i][k] = cs * x + sn * y
                H[i][k + 1] = -_conj(sn) * x + _conj(cs) * y
            for i in range(n):
                x, y = Q[i][k], Q[i][k + 1]
                Q[i][k] = cs * x + sn * y
                Q[i][k + 1] = -_conj(sn) * x + _conj(cs) * y
        for k in range(lo, hi + 1):
            H[k][k] = H[k][k] + mu
    for i in range(n):
        for j in range(i):
            H[i][j] = zero
    return H, Q


def eig(A, precision: Precision = DOUBLE, tol: float | None = None, max_iter: int = 500):
    """Eigenvalues and unit eigenvectors (as columns of a list-of-lists) of ``A``."""
    prec = precision
    T, Q = schur(A, prec, tol, max_iter)
    n = len(T)
    values = [T[k][k] for k in range(n)]
    tiny = prec.eps * max([abs(v) for v in values] + [1.0])
    vectors = [[prec.scalar(0)] * n for _ in range(n)]
    for k in range(n):
        y = [prec.scalar(0)] * n
        y[k] = prec.scalar(1)
        for i in range(k - 1, -1, -1):
            s = sum(T[i][j] * y[j] for j in range(i + 1, k + 1))
            den = T[i][i] - values[k]
            if abs(den) < tiny:
                den = prec.scalar(tiny)
            y[i] = -s / den
        x = [sum(Q[i][j] * y[j] for j in range(k + 1)) for i in range(n)]
        norm = prec.sqrt(sum(abs(xi) ** 2 for xi in x))
        for i in range(n):
            vectors[i][k] = x[i] / norm
    return values, vectors
