"""Components of the genus-2 G-function on the jet space.

Every partial derivative is replaced by its closed form:

    d_k h_i      = r_ik h_k
    d_k gamma_ij = r_ik r_jk              (k not in {i, j})
                 = r_ii r_ij + theta_ij   (k = i)
                 = r_ij r_jj + theta_ji   (k = j)
    d_x f        = sum_k u_{k,x} d_k f

Standalone rotation coefficients use the zero-diagonal convention
``gamma_ii = 0`` while derivatives of h use the full ``r_ii``.  Sums skip
exactly those indices at which a literal denominator ``u_ik`` vanishes.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import JetDegenerate
from .frobenius import SemisimpleFrame
from .numeric import Terms
from .rotation import RotationData


@dataclass(frozen=True)
class JetPoint:
    frame: SemisimpleFrame
    ux: np.ndarray
    uxx: np.ndarray

    def __post_init__(self):
        if len(self.ux) != self.frame.n or len(self.uxx) != self.frame.n:
            raise ValueError("jet vectors must have one entry per canonical coordinate")
        if any(abs(x) == 0 for x in self.ux):
            raise JetDegenerate("some u_{i,x} vanishes")


# Denominator of h_l gamma_ik d_i gamma_il / (h_i^2 h_k) in the double sum of Q_i.
# The commonly printed value 1/144 leaves Q_i + P_ii/2 nonzero on every ADE
# seed; 1/1440 makes it vanish and agrees with the pole-reduced form of
# P_ii/2 + Q_i.  "printed" is kept for audits.
Q_POLE_FREE_DENOM = {"corrected": 1440, "printed": 144}


class Calculus:
    """Closed-form derivatives of h and gamma at a point."""

    def __init__(self, rd: RotationData, h_mode: str = "definition", q_variant: str = "corrected"):
        if h_mode not in ("definition", "reduced"):
            raise ValueError("h_mode must be 'definition' or 'reduced'")
        if q_variant not in Q_POLE_FREE_DENOM:
            raise ValueError(f"q_variant must be one of {sorted(Q_POLE_FREE_DENOM)}")
        self.q_variant = q_variant
        self.rd = rd
        self.n = rd.n
        self.h = rd.frame.h
        self.u = rd.frame.u
        self.r = rd.r
        self.theta = rd.theta
        self.H = H_vector(rd, h_mode)
        n = self.n
        zero = 0 * self.r[0, 0]
        self.g = [[zero if i == j else self.r[i, j] for j in range(n)] for i in range(n)]
        self._dg = [[[self._dgamma(k, i, j) for j in range(n)] for i in range(n)] for k in range(n)]

    def dh(self, k, i):
        """d_k h_i."""
        return self.r[i, k] * self.h[k]

    def _dgamma(self, k, i, j):
        r = self.r
        if i == j:
            return 0 * r[0, 0]
        if k == i:
            return r[i, i] * r[i, j] + self.theta[i, j]
        if k == j:
            return r[i, j] * r[j, j] + self.theta[j, i]
        return r[i, k] * r[j, k]

    def dg(self, k, i, j):
        """d_k gamma_ij."""
        return self._dg[k][i][j]

    def d_hinv_gamma(self, k, i):
        """d_k (gamma_ik / h_k)."""
        h = self.h
        return self.dg(k, i, k) / h[k] - self.g[i][k] * self.dh(k, k) / h[k] ** 2

    def d_h_gamma(self, i, k):
        """d_i (h_i gamma_ik)."""
        return self.dh(i, i) * self.g[i][k] + self.h[i] * self.dg(i, i, k)

    def dx_h(self, i, ux):
        return sum(ux[m] * self.dh(m, i) for m in range(self.n))

    def dx_g(self, i, k, ux):
        return sum(ux[m] * self.dg(m, i, k) for m in range(self.n))


def H_vector(rd: RotationData, h_mode: str = "definition") -> list:
    """H_i = 1/2 sum_{j != i} (u_i - u_j) gamma_ij^2, or its reduced r/h form."""
    n, r, h, u = rd.n, rd.r, rd.frame.h, rd.frame.u
    if h_mode == "reduced":
        return [sum(r[i, k] * h[i] / h[k] for k in range(n)) / 24 for i in range(n)]
    return [sum((u[i] - u[j]) * r[i, j] ** 2 for j in range(n) if j != i) / 2 for i in range(n)]


# -- individual components ------------------------------------------------------------------


def G_i1(c: Calculus, i: int, ux) -> Terms:
    n, h, H, g = c.n, c.h, c.H, c.g
    uix = ux[i]
    dxhi = c.dx_h(i, ux)
    dii = c.dh(i, i)
    t = Terms()
    t += dxhi * H[i] / (60 * uix * h[i] ** 3)
    t -= 7 * dii * dxhi / (5760 * uix * h[i] ** 4)
    for k in range(n):
        t += g[i][k] * H[k] / (120 * h[i] * h[k]) * ux[k] / uix
        t -= g[i][k] * dxhi / (5760 * h[i] ** 2 * h[k] * uix)
        t -= g[i][k] * c.dh(k, k) * ux[k] / (1152 * h[i] * h[k] ** 2 * uix)
        t += c.dg(i, i, k) * h[k] * ux[k] / (1920 * uix * h[i] ** 3)
        t += c.dx_g(i, k, ux) / (5760 * uix * h[i] * h[k])
        t += c.dg(k, i, k) * ux[k] / (2880 * h[i] * h[k] * uix)
        t -= 7 * g[i][k] ** 2 * ux[k] / (1152 * h[i] ** 2 * uix)
    for k in range(n):
        for l in range(n):
            t -= ux[k] * h[k] * g[i][l] * g[k][l] / (1920 * uix * h[i] * h[l] ** 2)
    return t


def G_i2(c: Calculus, i: int) -> Terms:
    n, h, H, g = c.n, c.h, c.H, c.g
    dii = c.dh(i, i)
    t = Terms()
    t -= 3 * dii * H[i] / (40 * h[i] ** 3)
    t += 19 * dii ** 2 / (2880 * h[i] ** 4)
    for k in range(n):
        dkk = c.dh(k, k)
        t += g[i][k] * H[i] / (120 * h[i] * h[k])
        t += 7 * g[i][k] * H[k] / (120 * h[i] * h[k])
        t -= 4 * g[i][k] * dii / (5760 * h[i] ** 2 * h[k])
        t -= 7 * g[i][k] * dkk / (2880 * h[i] * h[k] ** 2)
        t += g[i][k] * dkk / (384 * h[i] ** 3)
        t -= c.dg(k, i, k) * h[k] / (384 * h[i] ** 3)
        t += c.dg(i, i, k) / (2880 * h[i] * h[k])
        t += 7 * c.dg(k, i, k) / (2880 * h[i] * h[k])
        t += g[i][k] * h[i] * dkk / (2880 * h[k] ** 4)
        t -= 19 * g[i][k] ** 2 / (720 * h[i] ** 2)
        t += g[i][k] ** 2 / (1440 * h[k] ** 2)
    for k in range(n):
        for l in range(n):
            t -= h[i] * g[i][l] * g[k][l] / (2880 * h[k] * h[l] ** 2)
    return t


def G_ij(c: Calculus, i: int, j: int) -> Terms:
    n, h, H, g = c.n, c.h, c.H, c.g
    gij = g[i][j]
    t = Terms()
    t -= gij ** 2 * H[j] / (120 * h[j] ** 2)
    t += gij ** 3 / (480 * h[i] * h[j])
    t -= gij / 5760 * c.dg(i, i, j) / h[i] ** 2
    t -= gij / 5760 * c.dg(j, i, j) / h[j] ** 2
    t += gij ** 2 / 5760 * c.dh(i, i) / h[i] ** 3
    t += gij ** 2 / 5760 * 3 * c.dh(j, j) / h[j] ** 3
    for k in range(n):
        t += gij * g[i][k] * g[j][k] / (5760 * h[k] ** 2)
        t += gij ** 2 / (5760 * h[k]) * g[j][k] / h[j]
        t -= gij ** 2 / (5760 * h[k]) * g[i][k] / h[i]
    return t


def P_ij(c: Calculus, i: int, j: int) -> Terms:
    n, h, H, g = c.n, c.h, c.H, c.g
    gij = g[i][j]
    dii, djj = c.dh(i, i), c.dh(j, j)
    di_gij = c.dg(i, i, j)
    t = Terms()
    t -= 2 * gij * H[i] * H[j] / (5 * h[i] * h[j])
    t += gij * djj * H[i] / (20 * h[i] * h[j] ** 2)
    t += gij * h[i] * djj * H[j] / (20 * h[j] ** 4)
    t -= 19 * gij ** 2 * H[j] / (30 * h[j] ** 2)
    t -= di_gij * H[j] / (60 * h[i] * h[j])
    t += 41 * gij ** 3 / (240 * h[i] * h[j])
    t -= 41 * gij * di_gij / (1440 * h[i] ** 2)
    t += di_gij * djj / (1440 * h[i] * h[j] ** 2)
    t += 79 * gij ** 2 * djj / (1440 * h[j] ** 3)
    t -= gij * dii * djj / (720 * h[i] ** 2 * h[j] ** 2)
    t -= gij * h[i] * djj ** 2 / (288 * h[j] ** 5)
    for k in range(n):
        gik, gjk = g[i][k], g[j][k]
        dkk = c.dh(k, k)
        di_gik = c.dg(i, i, k)
        t += gij * gik * H[j] / (60 * h[j] * h[k])
        t -= gik * gjk * h[i] * h[j] * H[k] / (30 * h[k] ** 4)
        t -= gij * gjk * h[i] * H[j] / (60 * h[j] ** 2 * h[k])
        t += gik * gjk * h[i] * H[j] / (60 * h[j] * h[k] ** 2)
        t -= 7 * gij * gjk * h[i] * H[k] / (60 * h[j] ** 2 * h[k])
        t -= gij * gik * djj / (720 * h[j] ** 2 * h[k])
        t += gij * gjk * h[i] * djj / (240 * h[j] ** 3 * h[k])
        t -= gik * gjk * h[i] * djj / (1440 * h[j] ** 2 * h[k] ** 2)
        t += gij * gjk * h[i] * dkk / (720 * h[k] ** 4)
        t += gik * gjk * h[i] * h[j] * dkk / (288 * h[k] ** 5)
        t += gjk * di_gij / (1440 * h[i] * h[k])
        t -= h[j] * h[k] * gij * di_gik / (360 * h[i] ** 4)
        t -= h[j] * 3 * gik * di_gij / (1440 * h[i] ** 2 * h[k])
        t -= h[j] * 2 * gij * di_gik / (1440 * h[i] ** 2 * h[k])
        t -= 7 * h[j] * gij * c.d_hinv_gamma(k, i) / (1440 * h[i] ** 2)
        t -= h[i] * h[j] * gik * c.dg(k, j, k) / (480 * h[k] ** 4)
        t += gij ** 2 * gjk / (120 * h[j] * h[k])
        t += 7 * h[i] * gij * gjk ** 2 / (160 * h[j] ** 3)
        t += 11 * gij * gik * gjk / (2880 * h[k] ** 2)
        t += h[j] * gik ** 2 * gjk / (96 * h[k] ** 3)
    for k in range(n):
        for l in range(n):
            base = h[i] * h[j] * g[i][l] * g[j][l] / (720 * h[k] * h[l] ** 2)
            t += base * g[k][l] / h[l]
            t -= base * g[j][k] / (2 * h[j])
            t -= h[i] * gij * g[j][l] * g[k][l] / (720 * h[k] * h[l] ** 2)
    return t


def Q_i(c: Calculus, i: int) -> Terms:
    n, h, H, g, u = c.n, c.h, c.H, c.g, c.u
    dii = c.dh(i, i)
    t = Terms()
    t += 4 * H[i] ** 3 / (5 * h[i] ** 2)
    t -= 7 * dii * H[i] ** 2 / (10 * h[i] ** 3)
    t += 7 * dii ** 2 * H[i] / (48 * h[i] ** 4)
    t -= dii ** 3 / (120 * h[i] ** 5)
    for k in range(n):
        gik = g[i][k]
        dkk = c.dh(k, k)
        di_gik = c.dg(i, i, k)
        dk_gik = c.dg(k, i, k)
        dk_hg = c.d_hinv_gamma(k, i)
        t += 7 * gik * H[i] * H[k] / (10 * h[i] * h[k])
        t -= gik * dii * H[i] / (120 * h[i] ** 2 * h[k])
        t += 7 * dk_hg * H[i] / (240 * h[i])
        t -= 7 * gik * dii * H[k] / (80 * h[i] ** 2 * h[k])
        t += (2 * H[i] + 7 * H[k]) * di_gik / (240 * h[i] * h[k])
        t -= 31 * gik ** 2 * H[i] / (144 * h[i] ** 2)
        t += gik * dii ** 2 / (720 * h[i] ** 3 * h[k])
        t += 253 * gik ** 2 * dii / (5760 * h[i] ** 3)
        t -= di_gik * dii / (960 * h[i] ** 2 * h[k])
        t -= gik ** 2 * dkk / (2880 * h[k] ** 3)
        t -= 7 * dk_hg * dii / (1920 * h[i] ** 2)
        t -= 7 * di_gik * dkk / (5760 * h[i] * h[k] ** 2)
        t -= 41 * di_gik * dii * h[k] / (5760 * h[i] ** 4)
        t += c.d_h_gamma(i, k) * dkk / (2880 * h[k] ** 4)
        t -= 113 * gik * di_gik / (5760 * h[i] ** 2)
        t += (3 * di_gik + dk_gik) * gik / (1440 * h[k] ** 2)
        t -= gik ** 3 / (240 * h[i] * h[k])
        if k != i:
            uik = u[i] - u[k]
            t += gik * H[k] / (576 * uik * h[i] * h[k])
            t += gik * h[k] * H[i] / (576 * uik * h[i] ** 3)
            t -= di_gik * h[k] / (576 * uik * h[i] ** 3)
            t -= dk_gik / (576 * uik * h[i] * h[k])
    for k in range(n):
        for l in range(n):
            gkl, gik, gil = g[k][l], g[i][k], g[i][l]
            di_gil = c.dg(i, i, l)
            ukl = u[k] - u[l]
            t -= gkl * c.d_h_gamma(i, l) / (2880 * h[k] * h[l] ** 2)
            t += gil ** 2 * gkl / (2880 * h[k] * h[l])
            t -= gik * gil ** 2 / (240 * h[i] * h[k])
            t -= gkl * c.dg(i, i, k) / (2880 * h[i] * h[l])
            if l != i:
                t += (u[l] - u[k]) * gik * c.dg(l, k, l) / (1152 * (u[i] - u[l]) * h[i] * h[l])
            t += ukl * gik * gkl * di_gil / (144 * h[i] ** 2)
            t += h[l] * gik * di_gil / (Q_POLE_FREE_DENOM[c.q_variant] * h[i] ** 2 * h[k])
            if k != i:
                t += h[k] * ukl * gkl * di_gil / (1152 * (u[i] - u[k]) * h[i] ** 3)
            t += h[l] * (u[i] - u[k]) * gik ** 2 * di_gil / (40 * h[i] ** 3)
    return t


# -- assembled report -------------------------------------------------------------------------


@dataclass
class G2Report:
    Gi: np.ndarray
    Gij: np.ndarray
    Pij: np.ndarray
    Qi: np.ndarray
    combos: dict
    total: complex
    scales: dict = field(default_factory=dict)
    jets: JetPoint | None = None
    h_mode: str = "definition"

    def max_combo_residuals(self) -> dict[str, float]:
        return {name: max((row[2] for row in rows), default=0.0) for name, rows in self.combos.items()}


def appendixA_components(rd: RotationData, jets: JetPoint, h_mode: str = "definition",
                         q_variant: str = "corrected") -> G2Report:
    """Every G-function component and the four vanishing combinations.

    ``combos`` maps each combination name to rows ``(pattern, value, relative, scale)``
    where ``relative = |value| / scale`` and ``scale`` is the largest summand entering
    that family of components.
    """
    c = Calculus(rd, h_mode, q_variant)
    n = rd.n
    prec = rd.frame.precision
    ux = [prec.scalar(x) for x in jets.ux]
    uxx = [prec.scalar(x) for x in jets.uxx]
    Gi, Gij, Pij, Qi = prec.zeros(n), prec.zeros((n, n)), prec.zeros((n, n)), prec.zeros(n)
    sGi, sGij, sP, sQ = np.zeros(n), np.zeros((n, n)), np.zeros((n, n)), np.zeros(n)
    for i in range(n):
        t = G_i1(c, i, ux)
        t.merge(G_i2(c, i))
        Gi[i], sGi[i] = t.value, t.scale
        t = Q_i(c, i)
        Qi[i], sQ[i] = t.value, t.scale
        for j in range(n):
            t = P_ij(c, i, j)
            Pij[i, j], sP[i, j] = t.value, t.scale
            if i != j:
                t = G_ij(c, i, j)
                Gij[i, j], sGij[i, j] = t.value, t.scale
    # residuals are relative to the largest summand across each index family, so
    # entries that vanish term by term (e.g. across blocks of a direct sum) read as 0
    fam = {
        "G_i": float(sGi.max(initial=0)), "G_ij": float(sGij.max(initial=0)),
        "P_ij+P_ji": float(sP.max(initial=0)),
        "Q_i+P_ii/2": max(float(sQ.max(initial=0)), float(np.diag(sP).max(initial=0)) / 2),
    }
    combos = {k: [] for k in fam}

    def add(name, pattern, value):
        combos[name].append((pattern, complex(value), float(abs(value)) / max(fam[name], 1e-300), fam[name]))

    for i in range(n):
        add("G_i", (i,), Gi[i])
        add("Q_i+P_ii/2", (i,), Qi[i] + Pij[i, i] / 2)
        for j in range(n):
            if i == j:
                continue
            add("G_ij", (i, j), Gij[i, j])
            if i < j:
                add("P_ij+P_ji", (i, j), Pij[i, j] + Pij[j, i])
    total = g2_assemble(Gi, Gij, Pij, Qi, ux, uxx)
    # the assembled value is judged against the component summands weighted by
    # their jet factors; the component values themselves have already cancelled
    tscale = g2_assemble(sGi, sGij, sP, sQ, np.abs(np.array(ux, dtype=complex)),
                         np.abs(np.array(uxx, dtype=complex))).scale
    return G2Report(Gi, Gij, Pij, Qi, combos, complex(total.value),
                    {"Gi": sGi, "Gij": sGij, "Pij": sP, "Qi": sQ, "total": tscale, **fam},
                    jets, h_mode)


def g2_assemble(Gi, Gij, Pij, Qi, ux, uxx) -> Terms:
    n = len(Gi)
    t = Terms()
    for i in range(n):
        t += Gi[i] * uxx[i]
        t += Qi[i] * ux[i] ** 2
        for j in range(n):
            if i != j:
                t += Gij[i, j] * ux[j] ** 3 / ux[i]
            t += Pij[i, j] * ux[i] * ux[j] / 2
    return t


def g2_total(rd: RotationData, jets: JetPoint, h_mode: str = "definition") -> complex:
    return appendixA_components(rd, jets, h_mode).total


# -- reduced forms used as cross-checks ----------------------------------------------------------


def two_point_brace(rd: RotationData, i: int, j: int) -> Terms:
    """theta_ij h_j/h_i + theta_ji h_i/h_j - 12 r_ij^2 - sum_l (...), zero when phi_ij and phi_i vanish."""
    r, h, n = rd.r, rd.frame.h, rd.n
    t = Terms()
    t += rd.theta[i, j] * h[j] / h[i]
    t += rd.theta[j, i] * h[i] / h[j]
    t -= 12 * r[i, j] ** 2
    for l in range(n):
        t -= r[i, l] * r[j, l] * h[i] * h[j] / h[l] ** 2
        t += r[i, j] * r[i, l] * h[j] / h[l]
        t += r[i, j] * r[j, l] * h[i] / h[l]
    return t


def section2_reduced_Gij(rd: RotationData) -> np.ndarray:
    """G_ij after substituting derivatives and the reduced H; diagonal left at zero."""
    n, r, h = rd.n, rd.r, rd.frame.h
    out = rd.frame.precision.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if i != j:
                out[i, j] = -r[i, j] / (5760 * h[i] * h[j]) * two_point_brace(rd, i, j).value
    return out


def reduced_G_i1(rd: RotationData, i: int, ux) -> Terms:
    """G_{i,1} with the reduced H, written with the two-point brace."""
    r, h, n = rd.r, rd.frame.h, rd.n
    t = Terms()
    for k in range(n):
        if k != i:
            t.merge(two_point_brace(rd, i, k), ux[k] / (1920 * h[i] ** 2 * ux[i]))
            t += rd.theta[i, k] / (5760 * h[i] * h[k])
    t -= r[i, i] ** 2 / (1440 * h[i] ** 2)
    for k in range(n):
        t -= r[i, k] ** 2 / (1920 * h[k] ** 2)
        t += r[i, i] * r[i, k] / (1440 * h[i] * h[k])
    return t


def reduced_G_i2(rd: RotationData, i: int) -> Terms:
    """G_{i,2} with the reduced H and explicit poles."""
    r, h, n = rd.r, rd.frame.h, rd.n
    th = rd.theta
    t = Terms()
    for k in range(n):
        if k != i:
            t += th[i, k] / (2880 * h[i] * h[k])
            t -= th[k, i] * h[k] / (384 * h[i] ** 3)
            t += 7 * th[k, i] / (2880 * h[i] * h[k])
    for k in range(n):
        t -= 17 * r[i, i] * r[i, k] / (2880 * h[i] * h[k])
        t += r[i, k] * r[k, k] * h[i] / (1440 * h[k] ** 3)
        t -= 19 * r[i, k] ** 2 / (720 * h[i] ** 2)
        t += r[i, k] ** 2 / (1440 * h[k] ** 2)
    for j in range(n):
        for k in range(n):
            t += r[i, k] * r[i, j] / (2880 * h[j] * h[k])
            t += 7 * r[i, k] * r[j, k] / (2880 * h[i] * h[j])
            t -= h[i] * r[i, j] * r[k, j] / (2880 * h[k] * h[j] ** 2)
    t += 23 * r[i, i] ** 2 / (720 * h[i] ** 2)
    return t
