"""Scalar arithmetic contexts.

Everything downstream of :mod:`frobcheck.expr` is written against a
:class:`Precision` object so the same code runs in complex double precision
or in a ~32 digit mpmath context (``"dd"``).  Per-point quantities are small
(N <= 10), so formulas are evaluated with plain Python scalars and loops.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from mpmath.ctx_mp import MPContext

_DD_DIGITS = 32


@dataclass(frozen=True)
class Precision:
    name: str
    eps: float
    eig_tol: float
    _mp: MPContext | None = field(default=None, repr=False, compare=False)

    @property
    def dtype(self):
        return complex if self._mp is None else object

    def scalar(self, value) -> complex:
        """Convert an int, Fraction, float or complex (or a (re, im) pair) to a context scalar."""
        if self._mp is not None and isinstance(value, (self._mp.mpc, self._mp.mpf)):
            return self._mp.mpc(value)
        if isinstance(value, tuple):
            re, im = value
        elif isinstance(value, complex):
            re, im = value.real, value.imag
        else:
            re, im = value, 0
        if self._mp is None:
            return complex(float(re), float(im))
        mp = self._mp
        return mp.mpc(_mpf(mp, re), _mpf(mp, im))

    def sqrt(self, z):
        if self._mp is None:
            return cmath.sqrt(z)
        return self._mp.sqrt(z)

    def exp(self, z):
        if self._mp is None:
            return cmath.exp(z)
        return self._mp.exp(z)

    def log(self, z):
        if self._mp is None:
            return cmath.log(z)
        return self._mp.log(z)

    def array(self, values) -> np.ndarray:
        if self._mp is None:
            return np.array(values, dtype=complex)
        arr = np.empty(np.shape(values), dtype=object)
        flat = np.asarray(values, dtype=object).ravel()
        arr.ravel()[:] = [self.scalar(v) if not isinstance(v, self._mp.mpc) else v for v in flat]
        return arr

    def zeros(self, shape) -> np.ndarray:
        if self._mp is None:
            return np.zeros(shape, dtype=complex)
        arr = np.empty(shape, dtype=object)
        arr.ravel()[:] = [self._mp.mpc(0)] * arr.size
        return arr


def _mpf(mp: MPContext, x):
    if isinstance(x, Fraction):
        return mp.mpf(x.numerator) / x.denominator
    return mp.mpf(x)


def _make_dd() -> MPContext:
    ctx = MPContext()
    ctx.dps = _DD_DIGITS
    return ctx


DOUBLE = Precision("double", eps=2.220446049250313e-16, eig_tol=1e-13)
DD = Precision("dd", eps=1e-32, eig_tol=1e-28, _mp=_make_dd())

PRECISIONS = {"double": DOUBLE, "dd": DD}


def get_precision(name: str | Precision) -> Precision:
    if isinstance(name, Precision):
        return name
    try:
        return PRECISIONS[name]
    except KeyError:
        raise ValueError(f"unknown precision {name!r}; expected one of {sorted(PRECISIONS)}") from None


class Terms:
    """Running sum that also tracks the largest summand magnitude.

    Identity residuals are judged relative to ``scale`` because the
    formulas involved cancel heavily.
    """

    __slots__ = ("value", "scale")

    def __init__(self, value=0):
        self.value = value
        self.scale = 0.0

    def __iadd__(self, x):
        self.value = self.value + x
        a = float(abs(x))
        if a > self.scale:
            self.scale = a
        return self

    def __isub__(self, x):
        return self.__iadd__(-x)

    def merge(self, other: "Terms", factor=1) -> "Terms":
        """Add ``factor * other`` keeping the scale of the original summands."""
        self.value = self.value + factor * other.value
        self.scale = max(self.scale, float(abs(factor)) * other.scale)
        return self


def relative_residual(lhs, rhs, scale: float = 0.0, floor: float = 1e-300) -> tuple[float, float]:
    """Return ``(|lhs - rhs| / s, s)`` with ``s = max(|lhs|, |rhs|, scale)``."""
    s = max(float(abs(lhs)), float(abs(rhs)), float(scale), floor)
    return float(abs(lhs - rhs)) / s, s
