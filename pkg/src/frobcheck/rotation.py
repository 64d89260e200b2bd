"""Rotation coefficients and their derivative calculus at a point."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UndefinedEntry
from .frobenius import FrobeniusSpec, SemisimpleFrame, directional_derivative
from .numeric import relative_residual


class OffDiagonal:
    """Square matrix whose diagonal is undefined; reading it raises UndefinedEntry."""

    __slots__ = ("_values",)

    def __init__(self, values: np.ndarray):
        values = np.array(values)
        values.flags.writeable = False
        self._values = values

    def __getitem__(self, key):
        i, j = key
        if i == j:
            raise UndefinedEntry(f"diagonal entry ({i}, {j}) is undefined")
        return self._values[i, j]

    @property
    def shape(self):
        return self._values.shape

    def masked(self) -> np.ndarray:
        """Complex copy with NaN on the diagonal."""
        out = self._values.astype(complex)
        np.fill_diagonal(out, np.nan)
        return out


def idempotent_contraction(tensor: np.ndarray, idem: np.ndarray) -> np.ndarray:
    """Contract every slot of a symmetric flat tensor with the idempotent rows."""
    out = tensor
    for _ in range(tensor.ndim):
        out = np.tensordot(out, idem, axes=([0], [1]))
    return out


@dataclass(frozen=True)
class RotationData:
    r: np.ndarray
    v: np.ndarray
    theta: OffDiagonal
    omega: OffDiagonal
    frame: SemisimpleFrame
    z4: np.ndarray

    @property
    def n(self) -> int:
        return self.frame.n

    def gamma(self, i: int, j: int):
        """Rotation coefficient with the zero-diagonal convention."""
        return 0 * self.r[i, j] if i == j else self.r[i, j]

    def gamma_matrix(self) -> np.ndarray:
        g = np.array(self.r)
        for i in range(self.n):
            g[i, i] = 0 * g[i, i]
        return g


def rotation_data(spec: FrobeniusSpec, frame: SemisimpleFrame) -> RotationData:
    prec = frame.precision
    n = frame.n
    E, h, g, u = frame.idem, frame.h, frame.g, frame.u
    z4 = idempotent_contraction(spec.tensor(4, frame.point, prec), E)
    r = prec.zeros((n, n))
    for i in range(n):
        for j in range(n):
            # z_{jiii} = -h_i h_j r_ij; z_{iiii} = -g_i r_ii
            r[i, j] = -z4[i, i, i, i] / g[i] if i == j else -z4[j, i, i, i] / (h[i] * h[j])
    v = prec.zeros((n, n))
    for i in range(n):
        for j in range(n):
            v[i, j] = (u[j] - u[i]) * r[i, j]
    nan = prec.scalar(complex("nan"))
    theta = prec.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if i == j:
                theta[i, j] = nan
                continue
            s = r[i, j] + sum(r[i, k] * v[j, k] for k in range(n))
            theta[i, j] = s / (u[j] - u[i])
    omega = prec.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if i == j:
                omega[i, j] = nan
                continue
            s = theta[i, j] - theta[j, i]
            s = s + sum(r[i, l] * r[j, k] * v[k, l] for k in range(n) for l in range(n))
            omega[i, j] = s / (u[j] - u[i])
    for a in (r, v):
        a.flags.writeable = False
    z4.flags.writeable = False
    return RotationData(r, v, OffDiagonal(theta), OffDiagonal(omega), frame, z4)


# -- invariants -----------------------------------------------------------------------


def invariant_residuals(rd: RotationData) -> dict[str, float]:
    """Relative residuals of symmetry, v_ii = 0, theta and Omega relations.

    Each relation is measured against the largest entry of the quantities it
    involves, so structurally vanishing entries do not amplify round-off.
    """
    n = rd.n
    r = rd.r
    out = {"r_symmetry": 0.0, "v_diagonal": 0.0, "theta_sum": 0.0, "omega_symmetry": 0.0}
    # symmetry of r is judged against the largest entry: off-block entries of a
    # direct sum are pure round-off
    rscale = float(np.abs(np.array(r, dtype=complex)).max())
    off = ~np.eye(n, dtype=bool)
    tscale = max(rscale ** 2, float(np.abs(rd.theta.masked()[off]).max(initial=0)))
    oscale = float(np.abs(rd.omega.masked()[off]).max(initial=0))
    for i in range(n):
        out["v_diagonal"] = max(out["v_diagonal"], float(abs(rd.v[i, i])))
        for j in range(n):
            res, _ = relative_residual(r[i, j], r[j, i], rscale)
            out["r_symmetry"] = max(out["r_symmetry"], res)
            if i == j:
                continue
            res, _ = relative_residual(rd.theta[i, j] + rd.theta[j, i],
                                       -sum(r[i, k] * r[j, k] for k in range(n)), tscale)
            out["theta_sum"] = max(out["theta_sum"], res)
            res, _ = relative_residual(rd.omega[i, j], rd.omega[j, i], oscale)
            out["omega_symmetry"] = max(out["omega_symmetry"], res)
    return out


def string_equation_residual(rd: RotationData) -> float:
    """max_i |sum_j r_ij h_j| relative to the largest summand."""
    worst = 0.0
    n = rd.n
    for i in range(n):
        terms = [rd.r[i, j] * rd.frame.h[j] for j in range(n)]
        scale = max(float(abs(t)) for t in terms)
        res, _ = relative_residual(sum(terms), 0, scale)
        worst = max(worst, res)
    return worst


def four_point_pattern_residuals(rd: RotationData) -> dict[str, float]:
    """Residuals of the genus-0 four-point structure in the idempotent frame."""
    n = rd.n
    z = rd.z4.astype(complex)
    scale = max(float(np.abs(z).max()), 1e-300)
    distinct3 = 0.0
    mixed = 0.0
    for idx in np.ndindex(*z.shape):
        if len(set(idx)) >= 3:
            distinct3 = max(distinct3, abs(z[idx]) / scale)
    for i in range(n):
        for j in range(n):
            if i != j:
                mixed = max(mixed, abs(z[j, i, i, i] + z[j, j, i, i]) / scale)
    return {"three_distinct": float(distinct3), "jiii_plus_jjii": float(mixed)}


def theta_v_identity(rd: RotationData) -> float:
    """max_{i != j} relative |theta_ij v_ij - r_ij (r_ij + sum_k r_ik v_jk)|."""
    n = rd.n
    worst = 0.0
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            lhs = rd.theta[i, j] * rd.v[i, j]
            parts = [rd.r[i, j] * rd.r[i, j]] + [rd.r[i, j] * rd.r[i, k] * rd.v[j, k] for k in range(n)]
            scale = max(float(abs(p)) for p in parts)
            res, _ = relative_residual(lhs, sum(parts), scale)
            worst = max(worst, res)
    return worst


# -- derivative rules ---------------------------------------------------------------------


def predicted_derivative_r(rd: RotationData, k: int, i: int, j: int):
    """Closed-form E_k r_ij on the small phase space."""
    r, h, n = rd.r, rd.frame.h, rd.n
    base = r[i, k] * r[j, k]
    if i != j and k != i and k != j:
        return base
    if i != j and k == i:
        return base + rd.theta[i, j]
    if i != j and k == j:
        return base + rd.theta[j, i]
    if i == j and k != i:
        return base + h[k] / h[i] * rd.theta[i, k]
    extra = -2 * sum(r[i, l] ** 2 for l in range(n))
    extra = extra + sum(h[p] / h[i] * rd.theta[p, i] for p in range(n) if p != i)
    return base + extra


def predicted_derivative_theta(rd: RotationData, i: int, j: int):
    """Closed-form E_j theta_ij for i != j."""
    r, h = rd.r, rd.frame.h
    return (r[j, j] - h[j] / h[i] * r[i, j]) * rd.theta[i, j] - rd.omega[i, j]


def _case(i, j, k):
    if i != j and k not in (i, j):
        return "distinct"
    if i != j:
        return "k=i"
    if k != i:
        return "i=j"
    return "i=j=k"


@dataclass(frozen=True)
class RuleRow:
    case: str
    pattern: tuple
    lhs: complex
    rhs: complex
    residual: float
    scale: float


def check_derivative_rules(spec: FrobeniusSpec, frame: SemisimpleFrame, step: float = 2e-3) -> list[RuleRow]:
    """Finite-difference E_k r_ij and E_j theta_ij against their closed forms.

    Residuals of the r rules are relative to the largest |r|^2 together with the
    largest |theta|; the theta rule uses the largest |Omega| and |r theta|.
    """
    rd = rotation_data(spec, frame)
    n = rd.n
    ra = np.abs(np.array(rd.r, dtype=complex))
    off = ~np.eye(n, dtype=bool)
    tmax = float(np.abs(rd.theta.masked()[off]).max(initial=0))
    omax = float(np.abs(rd.omega.masked()[off]).max(initial=0))
    hr = np.abs(np.array(rd.frame.h, dtype=complex))
    r_scale = max(float(ra.max()) ** 2, tmax * float(hr.max() / hr.min()))
    t_scale = max(omax, tmax * float(ra.max()) * float(hr.max() / hr.min()))
    rows = []
    for k in range(n):
        for i in range(n):
            for j in range(i, n):
                case = _case(i, j, k)
                if case == "k=i" and k != i:
                    continue  # k = j is the same rule with i, j swapped
                lhs = directional_derivative(spec, frame, frame.idem[k], f"r:{i},{j}", step)
                rhs = predicted_derivative_r(rd, k, i, j)
                res, s = relative_residual(lhs, rhs, r_scale)
                rows.append(RuleRow(case, (i, j, k), complex(lhs), complex(rhs), res, s))
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            lhs = directional_derivative(spec, frame, frame.idem[j], f"theta:{i},{j}", step)
            rhs = predicted_derivative_theta(rd, i, j)
            res, s = relative_residual(lhs, rhs, t_scale)
            rows.append(RuleRow("E_j theta_ij", (i, j), complex(lhs), complex(rhs), res, s))
    return rows
