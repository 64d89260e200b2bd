"""Frobenius manifold core: metric, quantum product, canonical frame."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from . import eigen
from .errors import (
    BranchMismatch,
    DegenerateMetric,
    NonConstantEta,
    NonSemisimplePoint,
    ValidationFailed,
)
from .expr import Expression
from .numeric import DOUBLE, Precision, get_precision

# -- exact complex-rational linear algebra (for the metric) ----------------

Q2 = tuple[Fraction, Fraction]


def _qmul(a: Q2, b: Q2) -> Q2:
    return a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0]


def _qsub(a: Q2, b: Q2) -> Q2:
    return a[0] - b[0], a[1] - b[1]


def _qinv(a: Q2) -> Q2:
    n = a[0] * a[0] + a[1] * a[1]
    return a[0] / n, -a[1] / n


def exact_inverse(M: Sequence[Sequence[Q2]]) -> list[list[Q2]]:
    """Gauss-Jordan inverse over Q(i); raises DegenerateMetric if singular."""
    n = len(M)
    zero, one = (Fraction(0), Fraction(0)), (Fraction(1), Fraction(0))
    aug = [list(M[i]) + [one if i == j else zero for j in range(n)] for i in range(n)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col] != zero), None)
        if piv is None:
            raise DegenerateMetric("metric eta is singular")
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = _qinv(aug[col][col])
        aug[col] = [_qmul(inv, x) for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != zero:
                f = aug[r][col]
                aug[r] = [_qsub(x, _qmul(f, y)) for x, y in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


def _sorted_indices(n: int, k: int):
    return itertools.combinations_with_replacement(range(n), k)


def _to_complex(q: Q2) -> complex:
    return complex(float(q[0]), float(q[1]))


# -- manifold data ---------------------------------------------------------------


@dataclass(frozen=True)
class FrobeniusSpec:
    """Prepotential plus affine Euler field ``E^a = sum_b A[a][b] t^b + b[a]``.

    The first flat coordinate is the unit direction.
    """

    name: str
    nvars: int
    F: Expression
    euler_matrix: tuple[tuple[Fraction, ...], ...]
    euler_shift: tuple[Fraction, ...]
    charge_d: Fraction
    metadata: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        if self.F.nvars != self.nvars:
            raise ValidationFailed("prepotential has the wrong number of variables")
        object.__setattr__(self, "euler_matrix",
                           tuple(tuple(Fraction(x) for x in row) for row in self.euler_matrix))
        object.__setattr__(self, "euler_shift", tuple(Fraction(x) for x in self.euler_shift))
        object.__setattr__(self, "charge_d", Fraction(self.charge_d))
        if len(self.euler_matrix) != self.nvars or any(len(r) != self.nvars for r in self.euler_matrix):
            raise ValidationFailed("euler_matrix must be nvars x nvars")
        if len(self.euler_shift) != self.nvars:
            raise ValidationFailed("euler_shift must have length nvars")

    # exact derivative tables keyed by sorted index tuples

    def derivatives(self, order: int) -> dict[tuple[int, ...], Expression]:
        return self._derivative_table(order)

    def _derivative_table(self, order: int):
        cache = self.__dict__.setdefault("_dcache", {})
        if order not in cache:
            if order == 0:
                cache[0] = {(): self.F}
            else:
                prev = self._derivative_table(order - 1)
                cache[order] = {
                    idx: prev[idx[:-1]].differentiate(idx[-1])
                    for idx in _sorted_indices(self.nvars, order)
                }
        return cache[order]

    @cached_property
    def eta_exact(self) -> list[list[Q2]]:
        n = self.nvars
        third = self.derivatives(3)
        eta = [[None] * n for _ in range(n)]
        for a in range(n):
            for b in range(n):
                e = third[tuple(sorted((0, a, b)))]
                if not e.is_constant():
                    raise NonConstantEta(f"d1 d{a + 1} d{b + 1} F is not constant")
                eta[a][b] = e.constant_value()
        return eta

    @cached_property
    def eta_inv_exact(self) -> list[list[Q2]]:
        return exact_inverse(self.eta_exact)

    def eta(self, precision: Precision = DOUBLE) -> np.ndarray:
        return precision.array([[precision.scalar(x) for x in row] for row in self.eta_exact])

    def eta_inv(self, precision: Precision = DOUBLE) -> np.ndarray:
        return precision.array([[precision.scalar(x) for x in row] for row in self.eta_inv_exact])

    def tensor(self, order: int, point, precision: Precision = DOUBLE) -> np.ndarray:
        """Fully symmetric array of order-th partial derivatives of F at ``point``."""
        n = self.nvars
        point = [precision.scalar(x) for x in point]
        out = precision.zeros((n,) * order)
        for idx, e in self.derivatives(order).items():
            val = e.evaluate(point, precision)
            for perm in set(itertools.permutations(idx)):
                out[perm] = val
        return out

    def euler_vector(self, point, precision: Precision = DOUBLE) -> list:
        return [
            sum((precision.scalar(self.euler_matrix[a][b]) * precision.scalar(point[b])
                 for b in range(self.nvars)), precision.scalar(self.euler_shift[a]))
            for a in range(self.nvars)
        ]

    def structure_constants(self, point, precision: Precision = DOUBLE) -> np.ndarray:
        """c[a, b, g] = sum_d eta^{g d} F_{a b d}."""
        c3 = self.tensor(3, point, precision)
        return np.einsum("abd,gd->abg", c3, self.eta_inv(precision))


# -- quantum product ------------------------------------------------------------


def multiplication_matrix(c: np.ndarray, X) -> np.ndarray:
    """Matrix L with (X o Y)^g = sum_b L[g, b] Y^b."""
    return np.einsum("a,abg->gb", np.asarray(X, dtype=c.dtype), c)


def quantum_product(spec: FrobeniusSpec, point, X, Y, precision: Precision = DOUBLE) -> np.ndarray:
    c = spec.structure_constants(point, precision)
    return np.einsum("a,b,abg->g", precision.array(X), precision.array(Y), c)


# -- validation ---------------------------------------------------------------------


@dataclass
class ValidationReport:
    name: str
    eta: list
    wdvv_residual: float
    homogeneity_residual: float
    tolerance: float
    points: list

    @property
    def passed(self) -> bool:
        return self.wdvv_residual < self.tolerance and self.homogeneity_residual < self.tolerance

    def as_dict(self) -> dict:
        return {
            "manifold": self.name,
            "eta": [[str(x[0]) if x[1] == 0 else f"{x[0]}+{x[1]}i" for x in row] for row in self.eta],
            "wdvv_residual": self.wdvv_residual,
            "homogeneity_residual": self.homogeneity_residual,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


def homogeneity_defect(spec: FrobeniusSpec) -> Expression:
    """E F - (3 - d) F with quadratic-and-lower terms removed.

    Quasi-homogeneity holds up to a polynomial of degree at most two, which
    drops out of every third derivative; the defect is therefore measured
    on ``E F - (3 - d) F`` after discarding monomials of total degree <= 2
    that carry no exponential.
    """
    n = spec.nvars
    EF = Expression.zero(n)
    for a in range(n):
        comp = Expression.constant(n, spec.euler_shift[a])
        for b in range(n):
            if spec.euler_matrix[a][b]:
                comp = comp + Expression.constant(n, spec.euler_matrix[a][b]) * Expression.variable(n, b)
        EF = EF + comp * spec.F.differentiate(a)
    defect = EF - Expression.constant(n, 3 - spec.charge_d) * spec.F
    return Expression(n, {
        k: c for k, c in defect.terms.items() if any(k[1]) or sum(k[0]) > 2
    })


def validate_spec(spec: FrobeniusSpec, samples: int = 10, seed: int = 0,
                  tolerance: float = 1e-10, precision: Precision = DOUBLE,
                  radius: float = 1.0) -> ValidationReport:
    """Check eta constancy and nondegeneracy, WDVV at random points and quasi-homogeneity."""
    if spec.nvars < 2:
        raise ValidationFailed("validate_spec needs N >= 2")
    eta = spec.eta_exact
    for a in range(spec.nvars):
        for b in range(a):
            if eta[a][b] != eta[b][a]:
                raise ValidationFailed("eta is not symmetric")
    spec.eta_inv_exact  # raises DegenerateMetric
    rng = np.random.default_rng(seed)
    center = spec.metadata.get("base_point", [0] * spec.nvars)
    wdvv = 0.0
    homog = 0.0
    pts = []
    defect = homogeneity_defect(spec)
    for _ in range(samples):
        z = rng.uniform(-radius, radius, spec.nvars) + 1j * rng.uniform(-radius, radius, spec.nvars)
        pt = [complex(c) + complex(zi) for c, zi in zip(center, z)]
        pts.append(pt)
        wdvv = max(wdvv, associativity_residual(spec, pt, precision))
        d3 = spec.tensor(3, pt, precision)
        scale = max(1.0, float(np.max(np.abs(d3.astype(complex)))))
        for idx, e in homogeneity_defect_third(spec, defect).items():
            homog = max(homog, float(abs(e.evaluate(pt, precision))) / scale)
    report = ValidationReport(spec.name, eta, wdvv, homog, tolerance, pts)
    return report


def homogeneity_defect_third(spec: FrobeniusSpec, defect: Expression) -> dict:
    if defect.is_zero():
        return {}
    return {idx: defect.derivative(*idx) for idx in _sorted_indices(spec.nvars, 3)}


def associativity_residual(spec: FrobeniusSpec, point, precision: Precision = DOUBLE) -> float:
    """max |(e_a o e_b) o e_c - e_a o (e_b o e_c)|, relative to the product scale."""
    c = spec.structure_constants(point, precision)
    lhs = np.einsum("abm,mcg->abcg", c, c)
    rhs = np.einsum("bcm,amg->abcg", c, c)
    diff = np.abs((lhs - rhs).astype(complex)).max()
    scale = max(1.0, float(np.abs(lhs.astype(complex)).max()))
    return float(diff) / scale


# -- semisimple frame -----------------------------------------------------------


@dataclass(frozen=True)
class SemisimpleFrame:
    """Canonical data at one point. Rows of ``idem`` are the idempotents in the flat basis."""

    point: tuple
    u: np.ndarray
    idem: np.ndarray
    g: np.ndarray
    h: np.ndarray
    gap: float
    precision: Precision = field(default=DOUBLE, compare=False)

    @property
    def n(self) -> int:
        return len(self.u)

    def with_signs(self, signs) -> "SemisimpleFrame":
        """Same frame with h_i multiplied by signs[i] (a square-root branch change)."""
        h = self.h * np.asarray(signs)
        return SemisimpleFrame(self.point, self.u, self.idem, self.g, _frozen(h), self.gap, self.precision)

    def permuted(self, perm) -> "SemisimpleFrame":
        perm = list(perm)
        return SemisimpleFrame(self.point, _frozen(self.u[perm]), _frozen(self.idem[perm]),
                               _frozen(self.g[perm]), _frozen(self.h[perm]), self.gap, self.precision)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a)
    a.flags.writeable = False
    return a


def default_gap_tolerance(u) -> float:
    return 1e-6 * max(float(abs(x)) for x in u)


def _sort_key(z):
    return (z.real, z.imag)


def semisimple_frame(spec: FrobeniusSpec, point, precision: Precision | str = DOUBLE,
                     eps_gap: float | None = None, signs=None) -> SemisimpleFrame:
    prec = get_precision(precision)
    point = [prec.scalar(x) for x in point]
    c = spec.structure_constants(point, prec)
    L = multiplication_matrix(c, spec.euler_vector(point, prec))
    values, vectors = eigen.eig(L.tolist(), prec)
    n = spec.nvars
    order = sorted(range(n), key=lambda k: _sort_key(values[k]))
    u = [values[k] for k in order]
    gap = min((float(abs(u[i] - u[j])) for i in range(n) for j in range(i)), default=float("inf"))
    tol = default_gap_tolerance(u) if eps_gap is None else eps_gap
    if gap <= tol:
        raise NonSemisimplePoint(f"canonical values collide: gap {gap:.3e} <= {tol:.3e}")
    idem = prec.zeros((n, n))
    for row, k in enumerate(order):
        x = prec.array([vectors[a][k] for a in range(n)])
        xx = np.einsum("a,b,abg->g", x, x, c)
        m = max(range(n), key=lambda a: abs(x[a]))
        mu = xx[m] / x[m]
        if abs(mu) <= 1e3 * prec.eps * max(1.0, float(np.max(np.abs(xx.astype(complex))))):
            raise NonSemisimplePoint("nilpotent direction in the quantum product")
        idem[row] = x / mu
    eta = spec.eta(prec)
    g = [np.einsum("a,ab,b->", idem[i], eta, idem[i]) for i in range(n)]
    h = [prec.sqrt(gi) for gi in g]
    if signs is not None:
        h = [hi * int(s) for hi, s in zip(h, signs)]
    return SemisimpleFrame(tuple(point), _frozen(prec.array(u)), _frozen(idem),
                           _frozen(prec.array(g)), _frozen(prec.array(h)), gap, prec)


def frame_residuals(spec: FrobeniusSpec, frame: SemisimpleFrame) -> dict[str, float]:
    """Relative residuals of the frame invariants."""
    prec = frame.precision
    n = frame.n
    c = spec.structure_constants(frame.point, prec)
    eta = spec.eta(prec)
    E = frame.idem
    scale = max(1.0, float(np.max(np.abs(E.astype(complex)))))
    prod = np.einsum("ia,jb,abg->ijg", E, E, c)
    target = prec.zeros((n, n, n))
    for i in range(n):
        target[i, i] = E[i]
    idem_res = float(np.abs((prod - target).astype(complex)).max()) / scale ** 2
    unit = prec.zeros(n)
    unit[0] = prec.scalar(1)
    sum_res = float(np.abs((E.sum(axis=0) - unit).astype(complex)).max()) / scale
    G = np.einsum("ia,ab,jb->ij", E, eta, E).astype(complex)
    off = G - np.diag(np.diag(G))
    orth_res = float(np.abs(off).max()) / max(1.0, float(np.abs(np.diag(G)).max()))
    hg = float(max(abs(frame.h[i] ** 2 - frame.g[i]) / max(abs(frame.g[i]), 1e-300) for i in range(n)))
    return {"idempotent": idem_res, "unit": sum_res, "orthogonal": orth_res, "h_squared": hg}


# -- finite differences along flat directions ------------------------------------------


def align_frame(frame: SemisimpleFrame, reference: SemisimpleFrame) -> SemisimpleFrame:
    """Re-pair canonical indices of ``frame`` with ``reference`` by nearest u and match h signs."""
    n = frame.n
    uref = [complex(x) for x in reference.u]
    unew = [complex(x) for x in frame.u]
    perm = []
    for i in range(n):
        d = sorted((abs(unew[j] - uref[i]), j) for j in range(n))
        if n > 1 and d[1][0] <= 2 * d[0][0] + 1e-300:
            raise BranchMismatch(f"nearest-u pairing of index {i} is ambiguous")
        perm.append(d[0][1])
    if sorted(perm) != list(range(n)):
        raise BranchMismatch("nearest-u pairing is not a permutation")
    out = frame.permuted(perm)
    signs = [1 if (complex(out.h[i]) * complex(reference.h[i]).conjugate()).real >= 0 else -1
             for i in range(n)]
    return out.with_signs(signs)


def frame_quantity(name: str, *indices: int) -> Callable:
    """Selector for directional_derivative: u, g, h from the frame; r, theta from rotation data."""
    if name in ("u", "g", "h"):
        (i,) = indices
        return lambda spec, frame: getattr(frame, name)[i]
    if name in ("r", "theta"):
        from .rotation import rotation_data

        i, j = indices

        def f(spec, frame):
            rd = rotation_data(spec, frame)
            return rd.r[i, j] if name == "r" else rd.theta[i, j]

        return f
    raise ValueError(f"unknown frame quantity {name!r}")


def directional_derivative(spec: FrobeniusSpec, base, direction, f: Callable | str,
                           step: float = 2e-3, precision: Precision | str | None = None,
                           eps_gap: float | None = None):
    """Richardson-extrapolated central difference of ``f(spec, frame)`` along ``direction``.

    ``base`` is either a flat point or a SemisimpleFrame to which the stencil
    frames are aligned.  ``f`` may be a callable or one of the strings
    accepted by :func:`frame_quantity` given as ``"r:0,1"``.
    """
    if isinstance(f, str):
        name, _, idx = f.partition(":")
        f = frame_quantity(name, *(int(x) for x in idx.split(",") if x))
    if isinstance(base, SemisimpleFrame):
        frame = base
        prec = frame.precision if precision is None else get_precision(precision)
    else:
        prec = get_precision(precision or DOUBLE)
        frame = semisimple_frame(spec, base, prec, eps_gap)
    d = [prec.scalar(x) for x in direction]
    norm = float(max(abs(x) for x in d)) if d else 0.0
    if norm == 0:
        return prec.scalar(0)
    s = step / norm

    def at(t):
        pt = [p + t * di for p, di in zip(frame.point, d)]
        other = semisimple_frame(spec, pt, prec, eps_gap)
        return f(spec, align_frame(other, frame))

    def central(hh):
        return (at(hh) - at(-hh)) / (2 * hh)

    d1, d2 = central(s), central(s / 2)
    return (4 * d2 - d1) / 3
