"""Genus-0 and genus-1 k-point functions in the idempotent frame.

Closed forms are the production path; :func:`recursion_step` rebuilds
(k+1)-point functions from k-point ones with finite differences along
idempotent directions and serves as their oracle.  Every closed-form value
is returned together with the magnitude of its largest summand so that
vanishing statements can be judged relative to the cancellation scale.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import RecursionDepthExceeded
from .frobenius import FrobeniusSpec, SemisimpleFrame, directional_derivative
from .numeric import Terms, relative_residual
from .rotation import RotationData, idempotent_contraction, rotation_data

K_MAX = 4


# -- genus-1 closed forms ---------------------------------------------------------


def phi1(rd: RotationData, i: int) -> Terms:
    """Genus-1 one-point function phi_i."""
    r, v, h, n = rd.r, rd.v, rd.frame.h, rd.n
    t = Terms()
    for j in range(n):
        t -= 12 * r[i, j] * v[i, j] / 24
        t -= h[i] / h[j] * r[i, j] / 24
    return t


def phi2(rd: RotationData, i: int, j: int, p1: Sequence) -> Terms:
    """Genus-1 two-point function phi_ij; ``p1`` holds the phi_i values."""
    r, h, n = rd.r, rd.frame.h, rd.n
    th = rd.theta
    t = Terms()
    if i != j:
        t += 12 * r[i, j] ** 2
        for l in range(n):
            t += r[i, l] * r[j, l] * h[i] * h[j] / h[l] ** 2
            t -= r[i, j] * r[i, l] * h[j] / h[l]
            t -= r[i, j] * r[j, l] * h[i] / h[l]
        t -= th[i, j] * h[j] / h[i]
        t -= th[j, i] * h[i] / h[j]
        t -= 24 * r[i, j] * h[j] / h[i] * p1[i]
        t -= 24 * r[i, j] * h[i] / h[j] * p1[j]
    else:
        t += 12 * r[i, i] ** 2
        for k in range(n):
            t += r[i, k] ** 2 * (-10 + h[i] ** 2 / h[k] ** 2)
            t -= 2 * r[i, i] * r[i, k] * h[i] / h[k]
        for k in range(n):
            if k != i:
                t -= th[i, k] * h[i] / h[k]
                t -= th[k, i] * h[k] / h[i]
        t -= 48 * r[i, i] * p1[i]
        for k in range(n):
            t += 24 * r[i, k] * h[i] / h[k] * p1[k]
    t.value = t.value / 24
    t.scale /= 24
    return t


def phi3_distinct(rd: RotationData, i: int, j: int, k: int, p1: Sequence, p2) -> Terms:
    """Genus-1 three-point function phi_ijk for distinct i, j, k."""
    r, h, n = rd.r, rd.frame.h, rd.n
    th = rd.theta
    t = Terms()
    t -= 24 * r[i, k] * r[j, k] * h[j] / h[i] * p1[i]
    t -= 24 * r[i, k] * r[j, k] * h[i] / h[j] * p1[j]
    t -= 24 * r[i, j] * r[i, k] * h[k] / h[j] * p1[j]
    t -= 24 * r[i, j] * r[j, k] * h[k] / h[i] * p1[i]
    t -= 24 * r[i, k] * r[i, j] * h[j] / h[k] * p1[k]
    t -= 24 * r[i, j] * r[j, k] * h[i] / h[k] * p1[k]
    t -= 24 * r[i, k] * r[j, k] * h[j] / h[k] * h[i] / h[k] * p1[k]
    t -= 24 * r[i, j] * r[j, k] * h[k] / h[j] * h[i] / h[j] * p1[j]
    t -= 24 * r[i, k] * r[j, i] * h[k] / h[i] * h[j] / h[i] * p1[i]
    t -= 24 * r[i, j] * h[i] / h[j] * p2[j, k]
    t -= 24 * r[i, k] * h[i] / h[k] * p2[j, k]
    t -= 24 * r[i, j] * h[j] / h[i] * p2[i, k]
    t -= 24 * r[j, k] * h[j] / h[k] * p2[i, k]
    t -= 24 * r[i, k] * h[k] / h[i] * p2[i, j]
    t -= 24 * r[j, k] * h[k] / h[j] * p2[i, j]
    t.merge(theta_triple(rd, i, j, k), -1)
    t.merge(theta_triple_rh(rd, i, j, k), 1)
    t.value = t.value / 12
    t.scale /= 12
    return t


def theta_triple(rd: RotationData, i: int, j: int, k: int) -> Terms:
    """The six-term theta combination appearing in phi_ijk."""
    r, h = rd.r, rd.frame.h
    th = rd.theta
    t = Terms()
    t += th[i, k] * r[j, k] * h[j] / h[i]
    t += th[k, i] * r[i, j] * h[j] / h[k]
    t += th[j, k] * r[i, k] * h[i] / h[j]
    t += th[k, j] * r[i, j] * h[i] / h[k]
    t += th[i, j] * r[j, k] * h[k] / h[i]
    t += th[j, i] * r[i, k] * h[k] / h[j]
    return t


def theta_triple_rh(rd: RotationData, i: int, j: int, k: int) -> Terms:
    """Pole-free r/h part of phi_ijk (equal to the theta combination when phi vanishes)."""
    r, h, n = rd.r, rd.frame.h, rd.n
    t = Terms()
    t += 6 * r[i, j] ** 2 * r[i, k] * h[k] / h[i]
    t += 6 * r[i, j] ** 2 * r[j, k] * h[k] / h[j]
    t += 6 * r[i, k] ** 2 * r[i, j] * h[j] / h[i]
    t += 6 * r[j, k] ** 2 * r[i, j] * h[i] / h[j]
    t += 6 * r[i, k] ** 2 * r[j, k] * h[j] / h[k]
    t += 6 * r[j, k] ** 2 * r[i, k] * h[i] / h[k]
    t += 12 * r[i, j] * r[i, k] * r[j, k]
    for l in range(n):
        t += r[i, l] * r[j, k] * r[k, l] * h[i] * h[j] / h[l] ** 2
        t += r[i, k] * r[j, l] * r[k, l] * h[i] * h[j] / h[l] ** 2
        t += r[i, k] * r[i, l] * r[j, l] * h[j] * h[k] / h[l] ** 2
        t += r[i, j] * r[i, l] * r[k, l] * h[j] * h[k] / h[l] ** 2
        t += r[i, j] * r[j, l] * r[k, l] * h[i] * h[k] / h[l] ** 2
        t += r[i, l] * r[j, k] * r[j, l] * h[i] * h[k] / h[l] ** 2
        t -= r[i, l] * r[j, l] * r[k, l] * h[i] * h[j] * h[k] / h[l] ** 3
        t -= r[i, k] * r[j, k] * r[k, l] * h[i] * h[j] / (h[k] * h[l])
        t -= r[i, j] * r[i, k] * r[i, l] * h[j] * h[k] / (h[i] * h[l])
        t -= r[i, j] * r[j, k] * r[j, l] * h[i] * h[k] / (h[j] * h[l])
        t -= r[i, j] * r[j, k] * r[k, l] * h[i] / h[l]
        t -= r[i, k] * r[j, k] * r[j, l] * h[i] / h[l]
        t -= r[i, k] * r[j, k] * r[i, l] * h[j] / h[l]
        t -= r[i, j] * r[i, k] * r[k, l] * h[j] / h[l]
        t -= r[i, j] * r[i, l] * r[j, k] * h[k] / h[l]
        t -= r[i, j] * r[i, k] * r[j, l] * h[k] / h[l]
    return t


def omega_tilde(rd: RotationData, i: int, j: int):
    h = rd.frame.h
    return rd.omega[i, j] * (h[i] / h[j] - h[j] / h[i])


def phi3_iij(rd: RotationData, i: int, j: int, p1: Sequence, p2) -> Terms:
    """Genus-1 three-point function phi_iij for i != j."""
    r, h, n = rd.r, rd.frame.h, rd.n
    th = rd.theta
    t = Terms()
    t += omega_tilde(rd, i, j)
    t += th[i, j] * 24 * r[i, j]
    t += th[i, j] * 4 * r[i, i] * h[j] / h[i]
    for k in range(n):
        t -= th[i, j] * r[i, k] * h[j] / h[k]
        t -= th[i, j] * r[j, k] * h[i] / h[k]
    t += th[j, i] * 4 * r[i, j] * h[i] ** 2 / h[j] ** 2
    for k in range(n):
        if k == i:
            continue
        t += th[i, k] * r[j, k] * h[j] / h[i]
        t += th[k, i] * 3 * r[i, j] * h[j] * h[k] / h[i] ** 2
        t -= th[k, i] * r[i, j] * h[j] / h[k]
        t -= th[k, i] * r[j, k] * h[i] * h[j] / h[k] ** 2
    t -= 24 * r[i, i] ** 2 * r[i, j] * h[j] / h[i]
    t -= 24 * r[i, j] ** 3 * h[i] / h[j]
    for k in range(n):
        t += 21 * r[i, j] * r[i, k] ** 2 * h[j] / h[i]
        t -= 2 * r[i, k] ** 2 * r[j, k] * h[i] ** 2 * h[j] / h[k] ** 3
        t += 4 * r[i, i] * r[i, j] * r[i, k] * h[j] / h[k]
        t += 2 * r[j, k] * r[i, j] ** 2 * h[i] ** 2 / (h[j] * h[k])
    for k in range(n):
        for l in range(n):
            t -= r[i, k] * r[j, l] * r[k, l] * h[i] * h[j] / h[l] ** 2
            t -= r[i, j] * r[i, k] * r[k, l] * h[j] / h[l]
    t += 96 * r[i, i] * r[i, j] * h[j] / h[i] * p1[i]
    t -= 24 * th[i, j] * (p1[i] * h[j] / h[i] + p1[j] * h[i] / h[j])
    t += 48 * r[i, j] ** 2 * h[i] ** 2 / h[j] ** 2 * p1[j]
    for k in range(n):
        t -= 24 * r[i, j] * r[i, k] * h[j] / h[k] * p1[k]
        t += 24 * r[i, k] * h[i] / h[k] * p2[j, k]
    t.value = t.value / 24
    t.scale /= 24
    return t


@dataclass(frozen=True)
class CorrelatorTables:
    z4: np.ndarray
    phi1: np.ndarray
    phi2: np.ndarray
    phi3: dict = field(default_factory=dict)
    scale1: np.ndarray | None = None
    scale2: np.ndarray | None = None
    scale3: dict = field(default_factory=dict)


def genus1_closed_forms(rd: RotationData, three_point: bool = True) -> CorrelatorTables:
    n = rd.n
    prec = rd.frame.precision
    t1 = [phi1(rd, i) for i in range(n)]
    p1 = [t.value for t in t1]
    p2 = prec.zeros((n, n))
    s2 = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            t = phi2(rd, i, j, p1)
            p2[i, j], s2[i, j] = t.value, t.scale
    phi3, s3 = {}, {}
    if three_point:
        for i, j, k in itertools.combinations(range(n), 3):
            t = phi3_distinct(rd, i, j, k, p1, p2)
            phi3[(i, j, k)], s3[(i, j, k)] = t.value, t.scale
        for i in range(n):
            for j in range(n):
                if i != j:
                    t = phi3_iij(rd, i, j, p1, p2)
                    phi3[(i, i, j)], s3[(i, i, j)] = t.value, t.scale
    return CorrelatorTables(rd.z4, prec.array(p1), p2, phi3,
                            np.array([t.scale for t in t1]), s2, s3)


# -- k-point evaluators -----------------------------------------------------------------
# An evaluator maps (spec, frame, index tuple) to a value; frames handed to it
# are already aligned with the reference frame of the enclosing computation.

Evaluator = Callable[[FrobeniusSpec, SemisimpleFrame, tuple], complex]


def genus0_evaluator(order: int) -> Evaluator:
    """Exact genus-0 order-point function from the prepotential."""

    def z(spec, frame, idx):
        T = spec.tensor(order, frame.point, frame.precision)
        return idempotent_contraction(T, frame.idem)[tuple(idx)]

    return z


def genus1_evaluator() -> Evaluator:
    """Closed-form genus-1 one-, two- and three-point functions."""

    def phi(spec, frame, idx):
        rd = rotation_data(spec, frame)
        n = rd.n
        idx = tuple(idx)
        p1 = [phi1(rd, a).value for a in range(n)]
        if len(idx) == 1:
            return p1[idx[0]]
        p2 = frame.precision.zeros((n, n))
        for a in range(n):
            for b in range(n):
                p2[a, b] = phi2(rd, a, b, p1).value
        if len(idx) == 2:
            return p2[idx]
        if len(idx) == 3:
            s = sorted(idx)
            if len(set(s)) == 3:
                return phi3_distinct(rd, *s, p1, p2).value
            if len(set(s)) == 2:
                i = s[1] if s[0] != s[1] else s[0]
                j = s[0] if s[0] != s[1] else s[2]
                return phi3_iij(rd, i, j, p1, p2).value
        raise ValueError(f"no closed form for genus-1 index pattern {idx}")

    return phi


def recursion_step(spec: FrobeniusSpec, frame: SemisimpleFrame, base: Evaluator, indices: Sequence[int],
                   step: float = 2e-3, k_max: int = K_MAX):
    """(k+1)-point function from k-point ones by differentiating along the last idempotent."""
    *I, new = indices
    k = len(I)
    if k < 1:
        raise ValueError("recursion needs at least one base index")
    if k > k_max:
        raise RecursionDepthExceeded(f"base arity {k} exceeds k_max = {k_max}")
    r, h, n = None, frame.h, frame.n
    rd = rotation_data(spec, frame)
    r = rd.r
    I = tuple(I)
    value = directional_derivative(spec, frame, frame.idem[new], lambda s, fr: base(s, fr, I), step)
    here = base(spec, frame, I)
    value = value - sum(r[a, new] * h[new] / h[a] for a in I) * here
    for pos, a in enumerate(I):
        rest = I[:pos] + I[pos + 1:]
        value = value - r[a, new] * h[a] / h[new] * base(spec, frame, rest + (new,))
        if a == new:
            for p in range(n):
                value = value + r[p, new] * h[new] / h[p] * base(spec, frame, rest + (p,))
    return value


def recursive_evaluator(base: Evaluator, step: float = 2e-3, k_max: int = K_MAX) -> Evaluator:
    """Evaluator for one more insertion, built from ``base`` by recursion."""

    def ev(spec, frame, idx):
        return recursion_step(spec, frame, base, idx, step, k_max)

    return ev


def recursion_residuals(spec: FrobeniusSpec, frame: SemisimpleFrame, step: float = 2e-3) -> dict[str, float]:
    """Recursion path against closed forms: phi_ij, phi_ijk, phi_iij and z_iiiii.

    Each family is compared relative to its largest closed-form summand; z_5
    also admits the size of the correction terms, r z_4, as scale since the
    fifth derivatives vanish identically for low-degree prepotentials.
    """
    rd = rotation_data(spec, frame)
    n = rd.n
    g1 = genus1_evaluator()
    tab = genus1_closed_forms(rd)
    out = {}
    s2 = float(np.max(tab.scale2))
    out["phi_ij"] = max(relative_residual(recursion_step(spec, frame, g1, (i, j), step), tab.phi2[i, j], s2)[0]
                        for i in range(n) for j in range(n))
    for name, keys in (("phi_ijk", [k for k in tab.phi3 if len(set(k)) == 3]),
                       ("phi_iij", [k for k in tab.phi3 if len(set(k)) == 2])):
        if not keys:
            continue
        s3 = max(tab.scale3[k] for k in tab.phi3)
        out[name] = max(relative_residual(recursion_step(spec, frame, g1, k, step), tab.phi3[k], s3)[0]
                        for k in keys)
    z5 = idempotent_contraction(spec.tensor(5, frame.point, frame.precision), frame.idem)
    z4 = np.abs(np.array(rd.z4, dtype=complex))
    ra = np.abs(np.array(rd.r, dtype=complex))
    hh = np.abs(np.array(frame.h, dtype=complex))
    s5 = max(float(np.abs(np.array(z5, dtype=complex)).max()), float(z4.max() * ra.max() * hh.max() / hh.min()))
    g0 = genus0_evaluator(4)
    out["z_iiiii"] = max(relative_residual(recursion_step(spec, frame, g0, (i,) * 5, step), z5[(i,) * 5], s5)[0]
                         for i in range(n))
    return out


# -- conditions ------------------------------------------------------------------------


def flat_contraction_eta(spec: FrobeniusSpec, frame: SemisimpleFrame):
    """sum eta^{a a'} eta^{b b'} F_{a a' b b'} in flat coordinates."""
    prec = frame.precision
    F4 = spec.tensor(4, frame.point, prec)
    ei = spec.eta_inv(prec)
    return np.einsum("abcd,ab,cd->", F4, ei, ei)


def canonical_contraction(rd: RotationData) -> Terms:
    """sum_ij r_ij / (h_i h_j) - 2 sum_i r_ii / h_i^2."""
    r, h, n = rd.r, rd.frame.h, rd.n
    t = Terms()
    for i in range(n):
        for j in range(n):
            t += r[i, j] / (h[i] * h[j])
        t -= 2 * r[i, i] / h[i] ** 2
    return t


@dataclass
class ConditionReport:
    condition: str
    values: list
    residual: float
    spread: float
    tolerance: float
    passed: bool
    details: dict = field(default_factory=dict)


def check_condition_C1(spec: FrobeniusSpec, frames: Sequence[SemisimpleFrame],
                       pointwise_tol: float = 1e-9, spread_tol: float = 1e-8) -> ConditionReport:
    values = []
    pointwise = 0.0
    scale = 0.0
    for fr in frames:
        rd = rotation_data(spec, fr)
        c = canonical_contraction(rd)
        d = flat_contraction_eta(spec, fr)
        res, s = relative_residual(c.value, d, c.scale)
        pointwise = max(pointwise, res)
        scale = max(scale, s)
        values.append(complex(c.value))
    spread = max(abs(a - b) for a in values for b in values) / scale if len(values) > 1 else 0.0
    passed = pointwise < pointwise_tol and spread < spread_tol
    return ConditionReport("C1", values, pointwise, float(spread), spread_tol, passed,
                           {"pointwise_tolerance": pointwise_tol, "reference_value": values[0] if values else None})


def check_condition_C2(spec: FrobeniusSpec, frames: Sequence[SemisimpleFrame], tol: float = 1e-7) -> ConditionReport:
    """Largest relative genus-1 value over one-, two- and three-point patterns.

    Each k-point family is judged against its largest summand so that entries
    which vanish structurally (cross-block entries of a direct sum) are not
    measured against their own round-off.
    """
    worst = 0.0
    per_point = []
    for fr in frames:
        rd = rotation_data(spec, fr)
        tab = genus1_closed_forms(rd)
        families = [
            (list(tab.phi1), list(tab.scale1)),
            (list(np.ravel(tab.phi2)), list(np.ravel(tab.scale2))),
            (list(tab.phi3.values()), [tab.scale3[k] for k in tab.phi3]),
        ]
        m = 0.0
        for values, scales in families:
            if not values:
                continue
            s = max(scales)
            m = max(m, max(relative_residual(x, 0, s)[0] for x in values))
        per_point.append(m)
        worst = max(worst, m)
    return ConditionReport("C2", per_point, worst, 0.0, tol, worst < tol)
