"""Identity suite on the small phase space.

Every identity is evaluated as two separately coded sides so a transcription
error cannot cancel against itself.  Rows report ``|lhs - rhs| / scale`` with
``scale`` the largest summand on either side.  Identities that rely on the
vanishing of genus-1 or genus-2 primary correlators are *conditional*: they are
asserted only when the manifold satisfies those conditions and reported
otherwise.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .correlators import genus1_closed_forms, omega_tilde, theta_triple, theta_triple_rh
from .errors import SingularM
from .frobenius import FrobeniusSpec, SemisimpleFrame
from .g2 import Calculus, H_vector, P_ij, Q_i
from .numeric import Terms
from .rotation import RotationData, four_point_pattern_residuals, invariant_residuals, rotation_data


@dataclass(frozen=True)
class IdentityRow:
    id: str
    anchor: str
    pattern: str
    residual: float
    scale: float
    tolerance: float
    asserted: bool
    conditional: bool

    @property
    def passed(self) -> bool:
        return self.residual < self.tolerance

    def as_dict(self) -> dict:
        return {
            "identity": self.id, "anchor": self.anchor, "pattern": self.pattern,
            "residual": self.residual, "scale": self.scale, "tolerance": self.tolerance,
            "passed": self.passed, "asserted": self.asserted, "conditional": self.conditional,
        }


@dataclass
class IdentityReport:
    manifold: str
    point_seed: int | None = None
    entries: list[IdentityRow] = field(default_factory=list)

    def extend(self, other: "IdentityReport") -> "IdentityReport":
        self.entries.extend(other.entries)
        return self

    @property
    def passed(self) -> bool:
        """All asserted rows pass."""
        return all(e.passed for e in self.entries if e.asserted)

    def failures(self) -> list[IdentityRow]:
        return [e for e in self.entries if e.asserted and not e.passed]

    def by_id(self) -> dict[str, list[IdentityRow]]:
        out: dict[str, list[IdentityRow]] = {}
        for e in self.entries:
            out.setdefault(e.id, []).append(e)
        return out

    def worst(self, identity: str) -> float:
        return max((e.residual for e in self.entries if e.id == identity), default=0.0)


ANCHORS = {
    "r-symmetry": "r_ij = r_ji",
    "genus0-three-distinct": "z_ijkl = 0 with three distinct indices",
    "genus0-jiii-jjii": "z_jiii = -z_jjii",
    "string": "sum_j r_ij h_j = 0",
    "theta-symmetry": "theta_ij + theta_ji = -sum_k r_ik r_jk",
    "genus1-one-point": "sum_j r_ij v_ij = -1/12 sum_j r_ij h_i/h_j",
    "genus1-two-point": "theta_ij h_j/h_i + theta_ji h_i/h_j = 12 r_ij^2 + sum_l (...)",
    "H-reduction": "1/2 sum_j u_ij gamma_ij^2 = 1/24 sum_k r_ik h_i/h_k",
    "sum-theta": "2 sum_{i!=k} theta_ki/h_i = r/h polynomial",
    "P-reduced": "P_ij in r, h, theta",
    "QP-reduced": "5760 (P_ii/2 + Q_i) in r, h, v, theta, Omega",
    "three-point-distinct": "six-term theta combination for distinct i, j, k",
    "theta-rv": "80 sum theta_ij r_ik v_jk / h_i^2 in theta, Omega, r, h",
    "omega-three-point": "Omega~_ij + theta terms = r/h polynomial",
    "theta-three-sum": "theta sums over k != i = r/h polynomial",
    "O1-O2-contraction": "O_1 - O_2 = <<g_a g^a g_b g^b>> (flat route vs idempotent route)",
    "O1-O2-closed-form": "O_1 - O_2 = sum_{i<j} r_ij (h_i^2 + h_j^2)^2 / (h_i^3 h_j^3)",
    "dF1": "<<g_mu>>_1 = 1/24 F_{1 a b mu} (M^-1)^{ab}",
    "ddF1": "<<g_mu g_s>>_1 = log-det second derivative",
    "Q16-Q15": "Q_16 - Q_15 / 24 = 0",
}

TOLERANCES = {
    "r-symmetry": 1e-9, "genus0-three-distinct": 1e-9, "genus0-jiii-jjii": 1e-9,
    "string": 1e-9, "theta-symmetry": 1e-10, "genus1-one-point": 1e-7, "genus1-two-point": 1e-7,
    "H-reduction": 1e-8, "sum-theta": 1e-6, "P-reduced": 1e-7, "QP-reduced": 1e-7,
    "three-point-distinct": 1e-7, "theta-rv": 1e-6, "omega-three-point": 1e-6,
    "theta-three-sum": 1e-6, "O1-O2-contraction": 1e-8, "O1-O2-closed-form": 1e-8,
    "dF1": 1e-6, "ddF1": 1e-6, "Q16-Q15": 1e-8,
}

CONDITIONAL = {
    "genus1-one-point", "genus1-two-point", "H-reduction", "sum-theta", "QP-reduced",
    "three-point-distinct", "theta-rv", "omega-three-point", "theta-three-sum",
    "dF1", "ddF1", "Q16-Q15",
}


def _row(ident: str, pattern, lhs: Terms, rhs: Terms, conditions_hold: bool,
         tolerances: dict | None = None) -> IdentityRow:
    scale = max(lhs.scale, rhs.scale, float(abs(lhs.value)), float(abs(rhs.value)))
    res = float(abs(lhs.value - rhs.value)) / max(scale, 1e-300)
    conditional = ident in CONDITIONAL
    tol = (tolerances or {}).get(ident, TOLERANCES[ident])
    pat = ",".join(str(x) for x in pattern) if isinstance(pattern, tuple) else str(pattern)
    return IdentityRow(ident, ANCHORS[ident], pat, res, scale, tol,
                       conditions_hold or not conditional, conditional)


def family_normalized(rows: list[IdentityRow], floors: dict | None = None) -> list[IdentityRow]:
    """Rescale each row by the largest summand among rows of the same identity.

    All index patterns of one identity are built from the same r, h and theta,
    so their common magnitude is the meaningful yardstick.  On reducible
    manifolds the cross-block rows are pure round-off and would otherwise be
    judged against their own vanishing scale.
    """
    top: dict[str, float] = dict(floors or {})
    for e in rows:
        top[e.id] = max(top.get(e.id, 0.0), e.scale)
    out = []
    for e in rows:
        s = max(top[e.id], 1e-300)
        out.append(replace(e, residual=e.residual * e.scale / s, scale=s))
    return out


def _terms(value=0, scale=0.0) -> Terms:
    t = Terms(value)
    t.scale = float(scale)
    return t


# -- reduced forms of the P and Q components ---------------------------------------------


def reduced_P(rd: RotationData, i: int, j: int) -> Terms:
    """P_ij (i != j) after eliminating H, derivatives of h and r, written in r, h, theta."""
    r, h, n, th = rd.r, rd.frame.h, rd.n, rd.theta
    t = Terms()
    for k in range(n):
        if k != j:
            t -= h[i] * h[j] * r[i, k] * th[k, j] / (480 * h[k] ** 4)
    t -= 41 * r[i, j] * th[i, j] / (1440 * h[i] ** 2)
    t += r[i, i] * h[j] * th[i, j] / (240 * h[i] ** 3)
    for k in range(n):
        t -= r[i, k] * h[j] * th[i, j] / (480 * h[i] ** 2 * h[k])
    for k in range(n):
        if k != i:
            t -= r[i, j] * h[j] * h[k] * th[i, k] / (360 * h[i] ** 4)
            t -= r[i, j] * h[j] * th[k, i] / (288 * h[i] ** 2 * h[k])
    t += 41 * r[i, j] ** 3 / (240 * h[i] * h[j])
    t -= 13 * r[i, j] * r[j, j] ** 2 * h[i] / (240 * h[j] ** 3)
    t -= r[i, j] * r[i, i] ** 2 * h[j] / (240 * h[i] ** 3)
    t -= 93 * r[i, i] * r[i, j] ** 2 / (2880 * h[i] ** 2)
    t += 93 * r[j, j] * r[i, j] ** 2 / (2880 * h[j] ** 2)
    for k in range(n):
        t -= r[i, j] * r[i, k] ** 2 * h[j] / (720 * h[i] ** 3)
        t += r[i, j] * r[j, j] * r[i, k] / (1440 * h[j] * h[k])
        t -= 13 * r[i, j] ** 2 * r[j, k] / (720 * h[j] * h[k])
        t -= r[i, i] * r[i, j] * r[j, k] / (1440 * h[i] * h[k])
        t += 19 * r[i, j] * r[j, j] * r[j, k] * h[i] / (1440 * h[j] ** 2 * h[k])
        t -= r[i, j] * r[i, i] * r[i, k] * h[j] / (288 * h[i] ** 2 * h[k])
        t += 7 * h[i] * r[i, j] * r[j, k] ** 2 / (160 * h[j] ** 3)
        t += 11 * r[i, j] * r[i, k] * r[j, k] / (2880 * h[k] ** 2)
        t += r[i, k] ** 2 * r[j, k] * h[j] / (96 * h[k] ** 3)
        t += r[i, j] * r[j, k] * r[k, k] * h[i] / (360 * h[k] ** 3)
    for k in range(n):
        for l in range(n):
            t += r[i, j] * r[i, l] * r[k, l] * h[j] / (720 * h[i] ** 2 * h[k])
            t -= r[i, j] * r[j, k] * r[j, l] * h[i] / (1440 * h[j] * h[k] * h[l])
            t -= 7 * r[i, j] * r[j, k] * r[k, l] * h[i] / (1440 * h[j] ** 2 * h[l])
            t -= r[i, j] * r[j, l] * r[k, l] * h[i] / (720 * h[k] * h[l] ** 2)
    return t


def reduced_QP(rd: RotationData, i: int) -> Terms:
    """5760 (P_ii/2 + Q_i) after eliminating H, derivatives and explicit u differences."""
    r, h, n, th, v = rd.r, rd.frame.h, rd.n, rd.theta, rd.v
    t = Terms()
    rng = range(n)
    for j in rng:
        if j != i:
            t -= 5 * omega_tilde(rd, i, j) / h[i] ** 2
    for k in rng:
        if k == i:
            continue
        t -= 108 * r[i, k] * th[i, k] / h[i] ** 2
        t -= 8 * r[i, k] * th[k, i] / h[k] ** 2
        t += 4 * r[k, k] * h[i] * th[i, k] / h[k] ** 3
        t -= 6 * h[i] ** 2 * r[i, k] * th[k, i] / h[k] ** 4
        t -= 40 * r[i, i] * h[k] * th[i, k] / h[i] ** 3
        t -= 10 * r[i, i] * th[k, i] / (h[i] * h[k])
        for l in rng:
            t += 5 * r[k, l] * th[i, k] / (h[i] * h[l])
            t += 5 * r[i, l] * th[k, i] / (h[l] * h[k])
    for l in rng:
        if l == i:
            continue
        for k in rng:
            t -= 2 * r[k, l] * h[i] * th[i, l] / (h[k] * h[l] ** 2)
            t += 40 * r[i, k] * v[l, k] * th[i, l] / h[i] ** 2
            t += 16 * r[i, k] * h[l] * th[i, l] / (h[i] ** 2 * h[k])
    t -= 240 * r[i, i] ** 3 / h[i] ** 2
    for k in rng:
        t += 210 * r[i, k] ** 2 * r[i, i] / h[i] ** 2
        t += 8 * r[k, k] * r[i, i] * r[i, k] * h[i] / h[k] ** 3
        t -= 24 * r[i, k] ** 3 / (h[i] * h[k])
        t += 12 * r[i, i] * r[i, k] ** 2 / h[k] ** 2
        t += 118 * r[i, i] ** 2 * r[i, k] / (h[i] * h[k])
        t += 30 * r[i, k] ** 3 * h[i] / h[k] ** 3
    for k in rng:
        for l in rng:
            t -= 14 * r[i, i] * r[i, k] * r[i, l] / (h[k] * h[l])
            t -= 10 * r[i, k] * r[i, i] * r[k, l] / (h[i] * h[l])
            t -= 4 * r[k, l] * r[i, i] * r[i, l] * h[i] / (h[k] * h[l] ** 2)
            t -= 12 * r[i, k] * r[i, l] * r[k, l] / h[k] ** 2
            t += 2 * r[i, l] ** 2 * r[k, l] / (h[k] * h[l])
            t -= 221 * r[i, k] ** 2 * r[i, l] / (3 * h[i] * h[l])
    for j in rng:
        for k in rng:
            for l in rng:
                t += r[i, k] * r[i, l] * r[i, j] * h[i] / (3 * h[j] * h[k] * h[l])
                t += 5 * r[i, k] * r[i, j] * r[k, l] / (h[j] * h[l])
    return t


def check_genus0(rd: RotationData, manifold: str = "", tolerances: dict | None = None) -> IdentityReport:
    """Symmetry of r and the genus-0 four-point pattern in the idempotent frame."""
    tol = dict(TOLERANCES, **(tolerances or {}))
    inv = invariant_residuals(rd)
    pat = four_point_pattern_residuals(rd)
    scale = float(np.abs(np.array(rd.z4, dtype=complex)).max())
    rep = IdentityReport(manifold)
    for ident, res in (("r-symmetry", inv["r_symmetry"]), ("genus0-three-distinct", pat["three_distinct"]),
                       ("genus0-jiii-jjii", pat["jiii_plus_jjii"])):
        rep.entries.append(IdentityRow(ident, ANCHORS[ident], "all", float(res), scale, tol[ident], True, False))
    return rep


# -- lemmas on the small phase space -------------------------------------------------------


def check_small_lemmas(rd: RotationData, conditions_hold: bool = True, manifold: str = "",
                       tolerances: dict | None = None) -> IdentityReport:
    r, v, h, n, th = rd.r, rd.v, rd.frame.h, rd.n, rd.theta
    rep = IdentityReport(manifold)
    add = rep.entries.append
    Hdef, Hred = H_vector(rd, "definition"), H_vector(rd, "reduced")
    for i in range(n):
        lhs = Terms()
        for j in range(n):
            lhs += r[i, j] * h[j]
        add(_row("string", (i,), lhs, Terms(), conditions_hold, tolerances))
        lhs, rhs = Terms(), Terms()
        for j in range(n):
            lhs += r[i, j] * v[i, j]
            rhs -= r[i, j] * h[i] / h[j] / 12
        add(_row("genus1-one-point", (i,), lhs, rhs, conditions_hold, tolerances))
        lhs, rhs = Terms(), Terms()
        for j in range(n):
            if j != i:
                lhs += (rd.frame.u[i] - rd.frame.u[j]) * r[i, j] ** 2 / 2
            rhs += r[i, j] * h[i] / h[j] / 24
        add(_row("H-reduction", (i,), lhs, rhs, conditions_hold, tolerances))
        for j in range(n):
            if j == i:
                continue
            lhs, rhs = Terms(), Terms()
            lhs += th[i, j]
            lhs += th[j, i]
            for k in range(n):
                rhs -= r[i, k] * r[j, k]
            add(_row("theta-symmetry", (i, j), lhs, rhs, conditions_hold, tolerances))
            if j < i:
                continue
            lhs, rhs = Terms(), Terms()
            lhs += th[i, j] * h[j] / h[i]
            lhs += th[j, i] * h[i] / h[j]
            rhs += 12 * r[i, j] ** 2
            for l in range(n):
                rhs += r[i, l] * r[j, l] * h[i] * h[j] / h[l] ** 2
                rhs -= r[i, j] * r[i, l] * h[j] / h[l]
                rhs -= r[i, j] * r[j, l] * h[i] / h[l]
            add(_row("genus1-two-point", (i, j), lhs, rhs, conditions_hold, tolerances))
    rep.entries = family_normalized(rep.entries)
    return rep


def sum_theta_sides(rd: RotationData, k: int) -> tuple[Terms, Terms]:
    r, h, n, th = rd.r, rd.frame.h, rd.n, rd.theta
    lhs, rhs = Terms(), Terms()
    for i in range(n):
        if i != k:
            lhs += 2 * th[k, i] / h[i]
    for i in range(n):
        rhs += 7 * h[k] * r[i, k] ** 2 / h[i] ** 2
        rhs -= 6 * r[i, k] ** 2 / h[k]
        rhs -= 2 * h[k] ** 2 * r[i, i] * r[i, k] / h[i] ** 3
        for j in range(n):
            rhs += h[k] ** 2 * r[i, j] * r[j, k] / (h[i] * h[j] ** 2)
            rhs -= h[k] * r[i, k] * r[j, k] / (h[i] * h[j])
    return lhs, rhs


def check_lemma_sumtheta(rd: RotationData, conditions_hold: bool = True, manifold: str = "",
                         tolerances: dict | None = None) -> IdentityReport:
    rep = IdentityReport(manifold)
    for k in range(rd.n):
        lhs, rhs = sum_theta_sides(rd, k)
        rep.entries.append(_row("sum-theta", (k,), lhs, rhs, conditions_hold, tolerances))
    rep.entries = family_normalized(rep.entries)
    return rep


# -- reduced forms of the correlator identities ---------------------------------------------


def theta_rv_sides(rd: RotationData, i: int) -> tuple[Terms, Terms]:
    """The v-weighted theta sum and its expression through theta, Omega, r and h."""
    r, h, n, th, v = rd.r, rd.frame.h, rd.n, rd.theta, rd.v
    R = range(n)
    lhs, rhs = Terms(), Terms()
    for j in R:
        if j == i:
            continue
        for k in R:
            lhs += 80 * th[i, j] * r[i, k] * v[j, k] / h[i] ** 2
    for j in R:
        if j == i:
            continue
        rhs -= 15 * omega_tilde(rd, j, i) / h[i] ** 2
        rhs -= 5 * omega_tilde(rd, j, i) / h[j] ** 2
        rhs -= 24 * th[j, i] * r[j, j] * h[i] / h[j] ** 3
        rhs -= 400 * th[j, i] * r[j, i] / h[i] ** 2
        for k in R:
            rhs += 22 * th[j, i] * r[j, k] / (h[k] * h[i])
    rhs += 288 * r[i, i] ** 3 / h[i] ** 2
    for j in R:
        rhs += 792 * r[i, i] * r[i, j] ** 2 / h[i] ** 2
        rhs += 180 * r[i, i] * r[i, j] ** 2 / h[j] ** 2
        rhs += 144 * r[i, j] * r[i, i] ** 2 / (h[i] * h[j])
        rhs -= 72 * r[j, j] * r[i, j] * r[i, i] * h[i] / h[j] ** 3
        rhs -= 960 * r[i, j] ** 3 / (h[i] * h[j])
    for j in R:
        for k in R:
            rhs -= 284 * r[i, k] * r[i, j] ** 2 / (3 * h[i] * h[k])
            rhs += 144 * r[j, k] * r[i, j] ** 2 / (h[j] * h[k])
            rhs -= 60 * r[i, j] * r[i, i] * r[i, k] / (h[j] * h[k])
            rhs -= 67 * r[i, j] ** 2 * r[i, k] * h[i] / (h[k] * h[j] ** 2)
            rhs -= 24 * r[k, k] * r[j, k] * r[i, j] * h[i] / h[k] ** 3
            rhs += 36 * r[j, k] * r[i, j] * r[i, i] * h[i] / (h[k] * h[j] ** 2)
            rhs += 26 * r[j, j] * r[i, j] * r[i, k] * h[i] ** 2 / (h[k] * h[j] ** 3)
            rhs -= 400 * r[i, j] * r[i, k] * r[j, k] / h[i] ** 2
    for j in R:
        for k in R:
            for l in R:
                rhs += 12 * r[l, j] * r[i, j] * r[l, k] * h[i] / (h[k] * h[j] ** 2)
                rhs += 12 * r[l, i] * r[k, j] * r[j, l] * h[i] / (h[k] * h[j] ** 2)
                rhs -= 12 * r[l, i] * r[l, k] * r[l, j] * h[i] / (h[l] * h[j] * h[k])
                rhs += 22 * r[j, k] * r[i, k] * r[j, l] / (h[i] * h[l])
                rhs -= 12 * r[i, j] * r[i, l] * r[j, k] / (h[k] * h[l])
                rhs -= 13 * r[i, j] * r[i, k] * r[j, l] * h[i] ** 2 / (h[j] ** 2 * h[k] * h[l])
                rhs += 37 * r[i, j] * r[i, k] * r[i, l] * h[i] / (3 * h[j] * h[k] * h[l])
    return lhs, rhs


def omega_three_point_sides(rd: RotationData, i: int, j: int) -> tuple[Terms, Terms]:
    """Omega~_ij plus its theta companions, against the negated r/h remainder."""
    r, h, n, th = rd.r, rd.frame.h, rd.n, rd.theta
    R = range(n)
    lhs, rest = Terms(), Terms()
    lhs += omega_tilde(rd, i, j)
    lhs += th[i, j] * 20 * r[i, j]
    lhs += th[i, j] * 4 * r[i, i] * h[j] / h[i]
    for k in R:
        lhs -= th[i, j] * r[i, k] * h[j] / h[k]
        lhs -= th[i, j] * r[j, k] * h[i] / h[k]
        if k != i:
            lhs += 2 * th[i, k] * r[j, k] * h[j] / h[i]
    rest += 24 * r[i, i] ** 2 * r[i, j] * h[j] / h[i]
    rest += 24 * r[i, j] ** 3 * h[i] / h[j]
    for k in R:
        rest -= 12 * r[i, k] ** 2 * r[j, k] * h[j] / h[k]
        rest += 4 * r[i, j] * r[i, k] * r[j, k] * h[i] ** 2 / h[k] ** 2
        rest -= 4 * r[i, j] ** 2 * r[i, k] * h[i] / h[k]
        rest -= 4 * r[i, i] * r[i, j] * r[i, k] * h[j] / h[k]
        rest -= 3 * r[i, j] * r[i, k] ** 2 * h[i] * h[j] / h[k] ** 2
        rest -= 4 * r[i, k] ** 2 * r[i, j] * h[j] / h[i]
        rest += 2 * r[i, j] * r[k, k] * r[i, k] * h[i] ** 2 * h[j] / h[k] ** 3
        rest -= 2 * r[i, j] ** 2 * r[j, k] * h[i] ** 2 / (h[k] * h[j])
        rest -= 2 * r[i, k] ** 2 * r[j, k] * h[i] ** 2 * h[j] / h[k] ** 3
    for k in R:
        for l in R:
            rest -= h[i] ** 2 * h[j] * r[i, j] * r[k, l] * r[l, i] / (h[k] * h[l] ** 2)
            rest += h[i] * h[j] * r[i, j] * r[i, k] * r[l, i] / (h[k] * h[l])
            rest -= r[k, l] * r[j, l] * r[i, k] * h[i] * h[j] / h[l] ** 2
            rest -= r[i, l] * r[k, l] * r[j, k] * h[i] * h[j] / h[l] ** 2
            rest += r[i, k] * r[i, l] * r[j, k] * h[j] / h[l]
            rest += r[i, k] * r[k, l] * r[j, k] * h[i] * h[j] / (h[k] * h[l])
    return lhs, _terms(-rest.value, rest.scale)


def theta_three_sum_sides(rd: RotationData, i: int) -> tuple[Terms, Terms]:
    r, h, n, th = rd.r, rd.frame.h, rd.n, rd.theta
    R = range(n)
    lhs, rhs = Terms(), Terms()
    for k in R:
        if k == i:
            continue
        lhs += 4 * th[i, k] * r[i, k] / h[i] ** 2
        lhs += 4 * th[i, k] * r[k, k] * h[i] / h[k] ** 3
        for j in R:
            lhs -= 2 * th[i, k] * r[j, k] / (h[i] * h[j])
    rhs -= 96 * r[i, i] ** 3 / h[i] ** 2
    for k in R:
        rhs += 48 * r[i, k] ** 3 / (h[i] * h[k])
        rhs += 44 * r[i, i] ** 2 * r[i, k] / (h[i] * h[k])
        rhs += 12 * r[i, k] ** 2 * r[i, i] / h[k] ** 2
        rhs -= 8 * r[i, i] * r[k, k] * r[i, k] * h[i] / h[k] ** 3
        rhs += 20 * r[i, k] ** 2 * r[i, i] / h[i] ** 2
        rhs += 28 * r[i, k] ** 3 * h[i] / h[k] ** 3
    for j in R:
        for k in R:
            rhs -= 12 * r[i, j] * r[i, k] * r[j, k] / h[k] ** 2
            rhs -= 10 * r[i, j] ** 2 * r[i, k] / (h[i] * h[k])
            rhs -= 18 * r[i, j] ** 2 * r[j, k] / (h[j] * h[k])
            rhs -= 8 * r[i, i] * r[i, j] * r[i, k] / (h[j] * h[k])
            rhs -= 7 * r[i, j] * r[i, k] ** 2 * h[i] / (h[k] ** 2 * h[j])
            rhs += 4 * r[i, i] * r[j, k] * r[i, j] * h[i] / (h[k] * h[j] ** 2)
            rhs += 2 * r[i, k] * r[k, k] * r[i, j] * h[i] ** 2 / (h[k] ** 3 * h[j])
            rhs += 4 * r[i, k] * r[i, j] * r[k, j] * h[i] ** 2 / (h[k] ** 2 * h[j] ** 2)
            rhs -= 4 * r[i, k] ** 2 * r[j, k] * h[i] ** 2 / (h[k] ** 3 * h[j])
    for j in R:
        for k in R:
            for l in R:
                rhs += 2 * r[i, j] * r[i, k] * r[j, l] / (h[k] * h[l])
                rhs -= 2 * r[i, k] * r[j, k] * r[j, l] * h[i] / (h[l] * h[k] ** 2)
                rhs -= 2 * r[j, k] * r[k, l] * r[i, j] * h[i] / (h[k] ** 2 * h[l])
                rhs += 2 * r[i, j] * r[j, k] * r[j, l] * h[i] / (h[j] * h[k] * h[l])
                rhs += r[i, j] * r[i, l] * r[i, k] * h[i] / (h[k] * h[j] * h[l])
                rhs -= r[i, l] * r[j, k] * r[i, j] * h[i] ** 2 / (h[k] * h[j] ** 2 * h[l])
    return lhs, rhs


def check_appendixB(rd: RotationData, conditions_hold: bool = True, manifold: str = "",
                    tolerances: dict | None = None) -> IdentityReport:
    """Pole-reduced forms of P, P/2 + Q and the genus-1 three-point consequences.

    The P and P/2 + Q rows compare against the G-function components evaluated
    with H in its reduced form, matching the substitutions made in the reduction.
    """
    n = rd.n
    rep = IdentityReport(manifold)
    add = rep.entries.append
    c = Calculus(rd, "reduced")
    for i in range(n):
        for j in range(n):
            if i != j:
                add(_row("P-reduced", (i, j), P_ij(c, i, j), reduced_P(rd, i, j), conditions_hold, tolerances))
        a = Q_i(c, i)
        a.merge(P_ij(c, i, i), 0.5)
        red = reduced_QP(rd, i)
        add(_row("QP-reduced", (i,), a, _terms(red.value / 5760, red.scale / 5760), conditions_hold, tolerances))
        add(_row("theta-rv", (i,), *theta_rv_sides(rd, i), conditions_hold, tolerances))
        add(_row("theta-three-sum", (i,), *theta_three_sum_sides(rd, i), conditions_hold, tolerances))
        for j in range(n):
            if i != j:
                add(_row("omega-three-point", (i, j), *omega_three_point_sides(rd, i, j), conditions_hold, tolerances))
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                add(_row("three-point-distinct", (i, j, k), theta_triple(rd, i, j, k),
                         theta_triple_rh(rd, i, j, k), conditions_hold, tolerances))
    # every distinct triple of a two-by-two direct sum crosses the blocks, so
    # the family itself can be pure round-off; r^3 times the h spread is the
    # natural size of each term
    hh = np.abs(np.array(rd.frame.h, dtype=complex))
    cubic = float(np.abs(np.array(rd.r, dtype=complex)).max()) ** 3 * float(hh.max() / hh.min())
    rep.entries = family_normalized(rep.entries, {"three-point-distinct": cubic})
    return rep


# -- flat-coordinate relations --------------------------------------------------------------


def _inverse(M: np.ndarray, prec) -> np.ndarray:
    if prec._mp is None:
        return np.linalg.inv(M)
    mp = prec._mp
    inv = mp.matrix(M.tolist()) ** -1
    return prec.array([[inv[a, b] for b in range(M.shape[1])] for a in range(M.shape[0])])


def _det(M: np.ndarray, prec):
    if prec._mp is None:
        return np.linalg.det(M)
    return prec._mp.det(prec._mp.matrix(M.tolist()))


def M_matrix(spec: FrobeniusSpec, point, prec) -> tuple[np.ndarray, np.ndarray]:
    """M_{mu rho} = F_{1 mu rho} and its inverse; raises SingularM if det M = 0."""
    F3 = spec.tensor(3, point, prec)
    M = np.array(F3[0])
    scale = max(float(np.abs(M.astype(complex)).max()), 1e-300)
    if float(abs(_det(M, prec))) <= 1e3 * prec.eps * scale ** M.shape[0]:
        raise SingularM("det M vanishes at this point")
    return M, _inverse(M, prec)


def section_quantities(spec: FrobeniusSpec, frame: SemisimpleFrame) -> dict:
    """O_1, O_2 and the genus-1 log-det derivatives in flat coordinates."""
    prec = frame.precision
    F3 = spec.tensor(3, frame.point, prec)
    F4 = spec.tensor(4, frame.point, prec)
    F5 = spec.tensor(5, frame.point, prec)
    M, Mi = M_matrix(spec, frame.point, prec)
    O1 = np.einsum("abcd,ab,cd->", F4, Mi, Mi)
    O2 = np.einsum("abr,xyz,ax,by,rz->", F3, F4[0], Mi, Mi, Mi)
    d1 = np.einsum("abm,ab->m", F4[0], Mi) / 24
    d2 = (-np.einsum("abm,xys,ax,by->ms", F4[0], F4[0], Mi, Mi)
          + np.einsum("abms,ab->ms", F5[0], Mi)) / 24
    return {"M": M, "Minv": Mi, "O1": O1, "O2": O2, "dF1": d1, "ddF1": d2, "F4": F4, "F5": F5}


def _log_det_hessian(q: dict, mu: int, s: int) -> Terms:
    """Second derivative of (1/24) log det M written out summand by summand."""
    F4, F5, Mi = q["F4"], q["F5"], q["Minv"]
    n = Mi.shape[0]
    R = range(n)
    t = Terms()
    for a in R:
        for b in R:
            t += F5[0, a, b, mu, s] * Mi[a, b] / 24
            for x in R:
                for y in R:
                    t -= F4[0, a, b, mu] * F4[0, x, y, s] * Mi[a, x] * Mi[b, y] / 24
    return t


def flat_coefficients(spec: FrobeniusSpec, frame: SemisimpleFrame) -> np.ndarray:
    """c[mu, i] with the flat basis vector gamma_mu = sum_i c[mu, i] E_i."""
    eta = spec.eta(frame.precision)
    n = frame.n
    c = frame.precision.zeros((n, n))
    for mu in range(n):
        for i in range(n):
            c[mu, i] = sum(eta[mu, b] * frame.idem[i, b] for b in range(n)) / frame.g[i]
    return c


def check_section4(spec: FrobeniusSpec, frames, conditions_hold: bool = True,
                   tolerances: dict | None = None) -> IdentityReport:
    rep = IdentityReport(spec.name)
    add = rep.entries.append
    for p, frame in enumerate(frames):
        start = len(rep.entries)
        rd = rotation_data(spec, frame)
        q = section_quantities(spec, frame)
        r, h, g, n = rd.r, frame.h, frame.g, rd.n
        flat = Terms()
        flat += q["O1"]
        flat -= q["O2"]
        canon = Terms()
        for i in range(n):
            for j in range(n):
                canon += rd.z4[i, i, j, j] / (g[i] * g[j])
        add(_row("O1-O2-contraction", (p,), flat, canon, conditions_hold, tolerances))
        closed = Terms()
        for i in range(n):
            for j in range(i + 1, n):
                closed += r[i, j] * (h[i] ** 2 + h[j] ** 2) ** 2 / (h[i] ** 3 * h[j] ** 3)
        # both sides vanish identically on the small phase space, so the
        # canonical summands set the scale as well
        closed.scale = max(closed.scale, canon.scale)
        add(_row("O1-O2-closed-form", (p,), flat, closed, conditions_hold, tolerances))

        tab = genus1_closed_forms(rd, three_point=False)
        c = flat_coefficients(spec, frame)
        one, one_scale = [], []
        for mu in range(n):
            lhs = Terms()
            for i in range(n):
                lhs.merge(_terms(tab.phi1[i], tab.scale1[i]), c[mu, i])
            rhs = Terms()
            for a in range(n):
                for b in range(n):
                    rhs += q["F4"][0, a, b, mu] * q["Minv"][a, b] / 24
            add(_row("dF1", (p, mu), lhs, rhs, conditions_hold, tolerances))
            one.append(lhs.value)
            one_scale.append(lhs.scale)
        two = frame.precision.zeros((n, n))
        two_scale = np.zeros((n, n))
        for mu in range(n):
            for s in range(mu, n):
                lhs = Terms()
                for i in range(n):
                    for j in range(n):
                        lhs.merge(_terms(tab.phi2[i, j], tab.scale2[i, j]), c[mu, i] * c[s, j])
                two[mu, s] = two[s, mu] = lhs.value
                two_scale[mu, s] = two_scale[s, mu] = lhs.scale
                add(_row("ddF1", (p, mu, s), lhs, _log_det_hessian(q, mu, s), conditions_hold, tolerances))
        Mi, F4 = q["Minv"], q["F4"]
        q16, q15 = Terms(), Terms()
        for b in range(n):
            for bp in range(n):
                q16.merge(_terms(one[b] * two[0, bp], one_scale[b] * two_scale[0, bp]), Mi[b, bp])
                for a in range(n):
                    for ap in range(n):
                        q15 += F4[0, a, ap, b] * two[0, bp] * Mi[a, ap] * Mi[b, bp] / 24
        add(_row("Q16-Q15", (p,), q16, q15, conditions_hold, tolerances))
        rep.entries[start:] = family_normalized(rep.entries[start:])
    return rep


# -- genus-2 free energy restricted to the small phase space ----------------------------------


def evaluate_F2_small(rd: RotationData) -> complex:
    """The genus-2 free energy formula with every tau_- term dropped."""
    return F2_small_terms(rd).value


def F2_small_terms(rd: RotationData) -> Terms:
    """Loop evaluation of the small-phase F_2 formula; the scale tracks every summand."""
    r, v, h, g, n = rd.r, rd.v, rd.frame.h, rd.frame.g, rd.n
    om, th = rd.omega, rd.theta
    R = range(n)
    t = Terms()
    for i in R:
        for j in R:
            if j == i:
                continue
            t += 5 * om[i, j] * (h[i] / h[j] ** 3 - 1 / (h[i] * h[j]))
            brace = -24 * r[i, i] * h[j] / h[i] ** 3 + 200 * r[i, j] / g[j]
            for k in R:
                brace += r[i, k] * v[i, k] * (120 / (h[i] * h[j]) - 144 * h[j] / h[i] ** 3)
                brace += r[j, k] * v[i, k] * (85 / g[i] + 45 / g[j])
            t += th[i, j] * brace
    for i in R:
        t -= 576 * r[i, i] ** 3 / g[i]
        t -= 576 * sum(r[i, j] * v[i, j] for j in R) ** 3 / g[i]
        for j in R:
            t += 480 * r[i, j] ** 3 / (h[i] * h[j])
            t -= 23 * r[i, i] * r[i, j] ** 2 / g[i]
            t -= 1728 * r[i, i] ** 2 * r[i, j] * v[i, j] / g[i]
            for k in R:
                t -= 24 * r[i, i] * r[i, k] * r[j, k] * h[j] / h[i] ** 3
                t += 115 * r[i, j] * r[i, k] * r[j, k] / g[i]
                t += 1452 * r[i, k] ** 2 * r[i, j] * v[i, j] / g[i]
                t -= 1728 * r[i, i] * r[i, j] * v[i, j] * r[i, k] * v[i, k] / g[i]
                for l in R:
                    t += 120 * r[i, k] * r[j, k] * r[i, l] * v[i, l] / (h[i] * h[j])
                    t -= 144 * r[i, j] * r[i, l] * r[j, k] * v[j, k] * h[l] / h[j] ** 3
                    t -= 40 * r[i, k] * r[j, k] * r[i, l] * v[j, l] / g[i]
                    t += 720 * r[i, j] * r[i, k] * v[i, k] * r[j, l] * v[j, l] / (h[i] * h[j])
    return _terms(t.value / 5760, t.scale / 5760)


def evaluate_F2_small_vectorized(rd: RotationData) -> complex:
    """Same quantity as :func:`evaluate_F2_small`, summed group by group with einsum in reverse order."""
    n = rd.n
    r, v = np.array(rd.r), np.array(rd.v)
    h, g = np.array(rd.frame.h), np.array(rd.frame.g)
    zero = 0 * r[0, 0]
    th, om = _zero_diagonal(rd.theta, n, zero, r.dtype), _zero_diagonal(rd.omega, n, zero, r.dtype)
    ih, ig = 1 / h, 1 / g
    ih3 = ih ** 3
    d = np.diagonal(r).copy()
    rv = r * v
    s = rv.sum(axis=1)
    e = np.einsum
    brace = (-24 * np.outer(d * ih3, h) + 200 * r * ig[None, :]
             + 120 * np.outer(s * ih, ih) - 144 * np.outer(s * ih3, h)
             + e("jk,ik->ij", r, v) * (85 * ig[:, None] + 45 * ig[None, :]))
    groups = [
        5 * e("ij,ij->", om, np.outer(h, ih3) - np.outer(ih, ih)),
        e("ij,ij->", th, brace),
        -576 * e("i,i->", d ** 3, ig) - 576 * e("i,i->", s ** 3, ig),
        480 * e("ij,ij,ij,i,j->", r, r, r, ih, ih),
        -23 * e("i,ij,ij,i->", d, r, r, ig),
        -1728 * e("i,i,ij,i->", d, d, rv, ig),
        -24 * e("i,ik,jk,j,i->", d, r, r, h, ih3),
        115 * e("ij,ik,jk,i->", r, r, r, ig),
        1452 * e("ik,ik,ij,i->", r, r, rv, ig),
        -1728 * e("i,ij,ik,i->", d, rv, rv, ig),
        120 * e("ik,jk,il,i,j->", r, r, rv, ih, ih),
        -144 * e("ij,il,jk,l,j->", r, r, rv, h, ih3),
        -40 * e("ik,jk,il,jl,i->", r, r, r, v, ig),
        720 * e("ij,ik,jl,i,j->", r, rv, rv, ih, ih),
    ]
    total = zero
    for part in reversed(groups):
        total = total + part
    return total / 5760


def _zero_diagonal(od, n, zero, dtype):
    out = np.empty((n, n), dtype=dtype)
    for i in range(n):
        for j in range(n):
            out[i, j] = zero if i == j else od[i, j]
    return out


def check_all(spec: FrobeniusSpec, frame: SemisimpleFrame, conditions_hold: bool,
              tolerances: dict | None = None, point_seed: int | None = None) -> IdentityReport:
    rd = rotation_data(spec, frame)
    rep = IdentityReport(spec.name, point_seed)
    rep.extend(check_genus0(rd, spec.name, tolerances))
    rep.extend(check_small_lemmas(rd, conditions_hold, spec.name, tolerances))
    rep.extend(check_lemma_sumtheta(rd, conditions_hold, spec.name, tolerances))
    rep.extend(check_appendixB(rd, conditions_hold, spec.name, tolerances))
    rep.extend(check_section4(spec, [frame], conditions_hold, tolerances))
    return rep
