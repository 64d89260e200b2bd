"""Exact exponential-polynomial expressions in flat coordinates.

An :class:`Expression` is a finite sum

    c * t_1**p_1 * ... * t_N**p_N * exp(k_1 t_1 + ... + k_N t_N)

with complex-rational coefficients ``c`` (stored as a pair of
:class:`~fractions.Fraction`) and rational exponent weights ``k``.  This is
closed under partial differentiation, which is all the prepotential
machinery needs.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping

from .errors import ParseError
from .numeric import DOUBLE, Precision

Key = tuple[tuple[int, ...], tuple[Fraction, ...]]
Coeff = tuple[Fraction, Fraction]

_ZERO: Coeff = (Fraction(0), Fraction(0))


def as_coeff(value) -> Coeff:
    if isinstance(value, tuple):
        re, im = value
        return Fraction(re), Fraction(im)
    if isinstance(value, complex):
        return Fraction(value.real), Fraction(value.imag)
    return Fraction(value), Fraction(0)


def _cadd(a: Coeff, b: Coeff) -> Coeff:
    return a[0] + b[0], a[1] + b[1]


def _cmul(a: Coeff, b: Coeff) -> Coeff:
    return a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0]


class Expression:
    """Immutable canonical sum of coefficient * monomial * exponential terms."""

    __slots__ = ("_terms", "nvars", "_hash")

    def __init__(self, nvars: int, terms: Mapping[Key, Coeff] | Iterable[tuple[Coeff, Iterable[int], Iterable]] = ()):
        if nvars < 1:
            raise ValueError("nvars must be positive")
        self.nvars = nvars
        merged: dict[Key, Coeff] = {}
        items = terms.items() if isinstance(terms, Mapping) else ((None, t) for t in terms)
        for key, val in items:
            if key is None:
                coeff, powers, weights = val
                key = (tuple(int(p) for p in powers), tuple(Fraction(k) for k in weights))
                coeff = as_coeff(coeff)
            else:
                coeff = as_coeff(val)
            powers, weights = key
            if len(powers) != nvars or len(weights) != nvars:
                raise ValueError(f"term {key} does not have {nvars} variables")
            if any(p < 0 for p in powers):
                raise ValueError(f"negative power in term {key}")
            merged[key] = _cadd(merged.get(key, _ZERO), coeff)
        self._terms = {k: c for k, c in sorted(merged.items()) if c != _ZERO}
        self._hash = None

    # -- construction helpers --------------------------------------------

    @classmethod
    def zero(cls, nvars: int) -> "Expression":
        return cls(nvars)

    @classmethod
    def constant(cls, nvars: int, value) -> "Expression":
        return cls(nvars, [(value, [0] * nvars, [0] * nvars)])

    @classmethod
    def variable(cls, nvars: int, index: int) -> "Expression":
        powers = [0] * nvars
        powers[index] = 1
        return cls(nvars, [(1, powers, [0] * nvars)])

    @classmethod
    def exponential(cls, nvars: int, weights) -> "Expression":
        return cls(nvars, [(1, [0] * nvars, weights)])

    # -- algebra ------------------------------------------------------------

    @property
    def terms(self) -> dict[Key, Coeff]:
        return dict(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def _check(self, other: "Expression"):
        if other.nvars != self.nvars:
            raise ValueError("expressions have different numbers of variables")

    def _coerce(self, other) -> "Expression":
        if isinstance(other, Expression):
            self._check(other)
            return other
        return Expression.constant(self.nvars, other)

    def __add__(self, other) -> "Expression":
        other = self._coerce(other)
        out = dict(self._terms)
        for k, c in other._terms.items():
            out[k] = _cadd(out.get(k, _ZERO), c)
        return Expression(self.nvars, out)

    __radd__ = __add__

    def __neg__(self) -> "Expression":
        return Expression(self.nvars, {k: (-c[0], -c[1]) for k, c in self._terms.items()})

    def __sub__(self, other) -> "Expression":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Expression":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Expression":
        other = self._coerce(other)
        out: dict[Key, Coeff] = {}
        for (p1, k1), c1 in self._terms.items():
            for (p2, k2), c2 in other._terms.items():
                key = (tuple(a + b for a, b in zip(p1, p2)), tuple(a + b for a, b in zip(k1, k2)))
                out[key] = _cadd(out.get(key, _ZERO), _cmul(c1, c2))
        return Expression(self.nvars, out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Expression":
        if n < 0:
            raise ValueError("negative powers are not expressions")
        out = Expression.constant(self.nvars, 1)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, Expression):
            return NotImplemented
        return self.nvars == other.nvars and self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.nvars, tuple(self._terms.items())))
        return self._hash

    def __repr__(self) -> str:
        return f"Expression(nvars={self.nvars}, terms={len(self._terms)})"

    # -- calculus -----------------------------------------------------------

    def differentiate(self, var_index: int) -> "Expression":
        if not 0 <= var_index < self.nvars:
            raise IndexError(f"variable index {var_index} out of range for {self.nvars} variables")
        out: dict[Key, Coeff] = {}
        for (powers, weights), c in self._terms.items():
            p = powers[var_index]
            if p:
                lowered = powers[:var_index] + (p - 1,) + powers[var_index + 1:]
                key = (lowered, weights)
                out[key] = _cadd(out.get(key, _ZERO), (c[0] * p, c[1] * p))
            k = weights[var_index]
            if k:
                key = (powers, weights)
                out[key] = _cadd(out.get(key, _ZERO), (c[0] * k, c[1] * k))
        return Expression(self.nvars, out)

    def derivative(self, *indices: int) -> "Expression":
        e = self
        for i in indices:
            e = e.differentiate(i)
        return e

    def is_constant(self) -> bool:
        return all(not any(p) and not any(k) for p, k in self._terms)

    def constant_value(self) -> Coeff:
        """Exact value of a constant expression."""
        if not self.is_constant():
            raise ValueError("expression is not constant")
        return next(iter(self._terms.values()), _ZERO)

    def evaluate(self, point, precision: Precision = DOUBLE):
        if len(point) != self.nvars:
            raise ValueError(f"point has length {len(point)}, expected {self.nvars}")
        pt = [precision.scalar(x) if not _is_scalar_of(precision, x) else x for x in point]
        total = precision.scalar(0)
        for (powers, weights), c in self._terms.items():
            term = precision.scalar(c)
            for x, p in zip(pt, powers):
                if p:
                    term = term * x**p
            if any(weights):
                arg = precision.scalar(0)
                for x, k in zip(pt, weights):
                    if k:
                        arg = arg + precision.scalar(k) * x
                term = term * precision.exp(arg)
            total = total + term
        return total

    # -- text format --------------------------------------------------------

    def to_text(self) -> str:
        """One ``re im | powers | weights`` line per term."""
        lines = []
        for (powers, weights), (re, im) in self._terms.items():
            lines.append(
                f"{re} {im} | {' '.join(map(str, powers))} | {' '.join(map(str, weights))}"
            )
        return "\n".join(lines)

    @classmethod
    def from_text(cls, text: str, nvars: int | None = None) -> "Expression":
        terms = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = [p.split() for p in line.split("|")]
            if len(parts) != 3 or len(parts[0]) != 2:
                raise ParseError(f"line {lineno}: expected 're im | p1 .. pN | k1 .. kN', got {raw!r}")
            try:
                coeff = (Fraction(parts[0][0]), Fraction(parts[0][1]))
                powers = [int(p) for p in parts[1]]
                weights = [Fraction(k) for k in parts[2]]
            except (ValueError, ZeroDivisionError) as exc:
                raise ParseError(f"line {lineno}: {exc}") from exc
            if len(powers) != len(weights):
                raise ParseError(f"line {lineno}: power and weight vectors differ in length")
            if nvars is None:
                nvars = len(powers)
            if len(powers) != nvars:
                raise ParseError(f"line {lineno}: expected {nvars} variables, got {len(powers)}")
            if any(p < 0 for p in powers):
                raise ParseError(f"line {lineno}: negative power")
            terms.append((coeff, powers, weights))
        if nvars is None:
            raise ParseError("empty term list and no variable count given")
        return cls(nvars, terms)


def _is_scalar_of(precision: Precision, x) -> bool:
    if precision._mp is None:
        return isinstance(x, complex)
    return isinstance(x, precision._mp.mpc)


def polynomial(nvars: int, terms: Iterable[tuple[object, Iterable[int]]]) -> Expression:
    """Shorthand for exponential-free expressions: ``[(coeff, powers), ...]``."""
    return Expression(nvars, [(c, p, [0] * nvars) for c, p in terms])
