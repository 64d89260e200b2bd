"""Builtin manifolds, manifold spec files and the ADE dimension-count certifier."""
from __future__ import annotations

import itertools
import os
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import yaml

from .errors import ParseError, ValidationFailed
from .expr import Expression, polynomial
from .frobenius import FrobeniusSpec, validate_spec

REGISTRY_ENV = "FROBCHECK_REGISTRY"

F = Fraction


def _diag(*entries):
    n = len(entries)
    return tuple(tuple(F(entries[i]) if i == j else F(0) for j in range(n)) for i in range(n))


def _a2(n_total=2, x=0, y=1):
    """Terms of 1/2 t_x^2 t_y + t_y^4/72 embedded in n_total variables."""
    sq, quart = [0] * n_total, [0] * n_total
    sq[x], sq[y], quart[y] = 2, 1, 4
    return [(F(1, 2), sq), (F(1, 72), quart)]


def _builtin_A2():
    return FrobeniusSpec("A2", 2, polynomial(2, _a2()), _diag(1, F(2, 3)), (0, 0), F(1, 3),
                         {"base_point": [0.1, 1.0], "family": "ADE", "ade": ("A", 2)})


def _builtin_A3():
    F_ = polynomial(3, [
        (F(1, 2), [2, 0, 1]), (F(1, 2), [1, 2, 0]), (F(1, 4), [0, 2, 2]), (F(1, 60), [0, 0, 5]),
    ])
    return FrobeniusSpec("A3", 3, F_, _diag(1, F(3, 4), F(1, 2)), (0, 0, 0), F(1, 2),
                         {"base_point": [0.1, 0.6, 1.0], "family": "ADE", "ade": ("A", 3)})


def _builtin_A4():
    F_ = polynomial(4, [
        (F(1, 2), [2, 0, 0, 1]), (1, [1, 1, 1, 0]), (1, [0, 2, 0, 2]), (1, [0, 1, 2, 1]),
        (F(1, 3), [0, 3, 0, 0]), (F(1, 12), [0, 0, 4, 0]), (F(2, 3), [0, 0, 2, 3]),
        (F(2, 15), [0, 0, 0, 6]),
    ])
    return FrobeniusSpec("A4", 4, F_, _diag(1, F(4, 5), F(3, 5), F(2, 5)), (0,) * 4, F(3, 5),
                         {"base_point": [0.1, 0.3, 0.5, 0.8], "family": "ADE", "ade": ("A", 4)})


def _builtin_D4():
    F_ = polynomial(4, [
        (F(1, 2), [2, 0, 0, 1]), (F(1, 2), [1, 2, 0, 0]), (F(1, 2), [1, 0, 2, 0]),
        (1, [0, 2, 1, 1]), (F(-1, 3), [0, 0, 3, 1]), (F(2, 3), [0, 2, 0, 3]),
        (F(2, 3), [0, 0, 2, 3]), (F(8, 105), [0, 0, 0, 7]),
    ])
    return FrobeniusSpec("D4", 4, F_, _diag(1, F(2, 3), F(2, 3), F(1, 3)), (0,) * 4, F(2, 3),
                         {"base_point": [0.1, 0.4, 0.3, 0.9], "family": "ADE", "ade": ("D", 4)})


def _builtin_P1():
    F_ = polynomial(2, [(F(1, 2), [2, 1])]) + Expression.exponential(2, [0, 1])
    return FrobeniusSpec("P1", 2, F_, _diag(1, 0), (0, 2), 1,
                         {"base_point": [0.1, 0.3], "family": "exploratory"})


def _builtin_A2A2():
    # F_A2(x1, x2) + F_A2(x1 + x3, x4); the shared unit direction is x1
    terms = _a2(4, 0, 1)
    block = polynomial(4, [(F(1, 2), [2, 0, 0, 1]), (1, [1, 0, 1, 1]), (F(1, 2), [0, 0, 2, 1]),
                           (F(1, 72), [0, 0, 0, 4])])
    F_ = polynomial(4, terms) + block
    return FrobeniusSpec("A2+A2", 4, F_, _diag(1, F(2, 3), 1, F(2, 3)), (0,) * 4, F(1, 3),
                         {"base_point": [0.1, 1.0, 0.2, -0.7], "family": "reducible"})


def _builtin_B3():
    F_ = polynomial(3, [
        (F(1, 2), [2, 0, 1]), (F(1, 2), [1, 2, 0]), (1, [0, 3, 1]), (6, [0, 2, 3]), (F(216, 35), [0, 0, 7]),
    ])
    return FrobeniusSpec("B3", 3, F_, _diag(1, F(2, 3), F(1, 3)), (0, 0, 0), F(2, 3),
                         {"base_point": [0.1, 0.5, 0.7], "family": "exploratory"})


def _builtin_EAW3():
    F_ = polynomial(3, [(F(1, 2), [2, 0, 1]), (F(1, 2), [1, 2, 0]), (F(-1, 24), [0, 4, 0])])
    F_ = F_ + Expression.variable(3, 1) * Expression.exponential(3, [0, 0, 1])
    return FrobeniusSpec("EAW3", 3, F_, _diag(1, F(1, 2), 0), (0, 0, F(3, 2)), 1,
                         {"base_point": [0.1, 0.8, 0.3], "family": "exploratory"})


_BUILTINS = {
    "A2": _builtin_A2, "A3": _builtin_A3, "A4": _builtin_A4, "D4": _builtin_D4,
    "P1": _builtin_P1, "A2+A2": _builtin_A2A2, "B3": _builtin_B3, "EAW3": _builtin_EAW3,
}
_ALIASES = {"A2⊕A2": "A2+A2", "A2xA2": "A2+A2", "CP1": "P1", "ℙ¹": "P1"}

ADE_BUILTINS = ("A2", "A3", "A4", "D4")
ALL_BUILTINS = tuple(_BUILTINS)


def builtin_names() -> tuple[str, ...]:
    return ALL_BUILTINS


def is_asserted(spec: FrobeniusSpec) -> bool:
    """Whether conditions C1-C3 hold, so the vanishing claims are asserted rather than reported."""
    return spec.metadata.get("family") in ("ADE", "reducible")


def is_ade(spec: FrobeniusSpec) -> bool:
    return spec.metadata.get("family") == "ADE"


# -- spec files ---------------------------------------------------------------------------


def _rational(x, what: str) -> Fraction:
    if isinstance(x, bool):
        raise ParseError(f"{what}: expected a rational, got {x!r}")
    try:
        if isinstance(x, float):
            return Fraction(x).limit_denominator(10**12)
        return Fraction(str(x).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"{what}: cannot parse rational {x!r}") from exc


def parse_manifold(text: str) -> FrobeniusSpec:
    """Parse a manifold spec document (YAML key-value syntax)."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ParseError(f"malformed manifold file: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError("manifold file must be a key-value document")
    missing = [k for k in ("name", "nvars", "prepotential", "euler_matrix", "euler_shift", "charge_d")
               if k not in doc]
    if missing:
        raise ParseError(f"missing fields: {', '.join(missing)}")
    try:
        n = int(doc["nvars"])
    except (TypeError, ValueError) as exc:
        raise ParseError("nvars must be an integer") from exc
    if not isinstance(doc["prepotential"], str):
        raise ParseError("prepotential must be a term-list string")
    Fx = Expression.from_text(doc["prepotential"], n)
    A = doc["euler_matrix"]
    if not isinstance(A, list) or not all(isinstance(r, list) for r in A):
        raise ParseError("euler_matrix must be a list of rows")
    A = tuple(tuple(_rational(x, "euler_matrix") for x in row) for row in A)
    b = doc["euler_shift"]
    if not isinstance(b, list):
        raise ParseError("euler_shift must be a list")
    b = tuple(_rational(x, "euler_shift") for x in b)
    meta = {"family": str(doc.get("family", "exploratory"))}
    if "base_point" in doc:
        try:
            meta["base_point"] = [complex(str(x).replace(" ", "").replace("i", "j")) for x in doc["base_point"]]
        except (TypeError, ValueError) as exc:
            raise ParseError("base_point must be a list of numbers") from exc
    return FrobeniusSpec(str(doc["name"]), n, Fx, A, b, _rational(doc["charge_d"], "charge_d"), meta)


def dump_manifold(spec: FrobeniusSpec) -> str:
    doc = {
        "name": spec.name,
        "nvars": spec.nvars,
        "prepotential": spec.F.to_text(),
        "euler_matrix": [[str(x) for x in row] for row in spec.euler_matrix],
        "euler_shift": [str(x) for x in spec.euler_shift],
        "charge_d": str(spec.charge_d),
        "family": spec.metadata.get("family", "exploratory"),
    }
    if "base_point" in spec.metadata:
        doc["base_point"] = [repr(complex(x)) if complex(x).imag else float(complex(x).real)
                             for x in spec.metadata["base_point"]]
    return yaml.safe_dump(doc, sort_keys=False, allow_unicode=True)


def _resolve_path(name: str) -> Path | None:
    p = Path(name)
    if p.exists():
        return p
    root = os.environ.get(REGISTRY_ENV)
    if root:
        for cand in (Path(root) / name, Path(root) / f"{name}.fm", Path(root) / f"{name}.yaml"):
            if cand.exists():
                return cand
    return None


def load_manifold(name_or_path: str, validate: bool = True, tolerance: float = 1e-10) -> FrobeniusSpec:
    """Resolve a builtin name or spec file and validate it.

    File lookups also search the directory named by ``FROBCHECK_REGISTRY``.
    """
    key = _ALIASES.get(name_or_path, name_or_path)
    if key in _BUILTINS:
        spec = _BUILTINS[key]()
    else:
        path = _resolve_path(name_or_path)
        if path is None:
            raise ParseError(f"unknown manifold {name_or_path!r}")
        spec = parse_manifold(path.read_text())
    if validate:
        report = validate_spec(spec, tolerance=tolerance)
        if not report.passed:
            raise ValidationFailed(
                f"{spec.name}: WDVV residual {report.wdvv_residual:.3g}, "
                f"homogeneity residual {report.homogeneity_residual:.3g} (tolerance {tolerance:g})")
    return spec


# -- ADE weights and the dimension condition ---------------------------------------------------


@dataclass(frozen=True)
class ADEWeightData:
    type: str
    q: tuple[Fraction, ...]
    basis: tuple[tuple[int, ...], ...]

    @property
    def c_hat(self) -> Fraction:
        return sum(1 - 2 * qi for qi in self.q)

    @property
    def degrees(self) -> tuple[Fraction, ...]:
        return tuple(2 * sum(qi * a for qi, a in zip(self.q, mono)) for mono in self.basis)


def ade_weights(kind: str, n: int | None = None) -> ADEWeightData:
    """Weights and Milnor-ring monomial basis of the standard ADE polynomial.

    A_n: x^{n+1}; D_n: x^{n-1} + x y^2; E6: x^3 + y^4; E7: x^3 + x y^3; E8: x^3 + y^5.
    """
    if kind.startswith(("A", "D")) and n is None and len(kind) > 1:
        kind, n = kind[0], int(kind[1:])
    if kind == "A":
        if n < 1:
            raise ValueError("A_n needs n >= 1")
        return ADEWeightData(f"A{n}", (F(1, n + 1),), tuple((a,) for a in range(n)))
    if kind == "D":
        if n < 4:
            raise ValueError("D_n needs n >= 4")
        basis = tuple((a, 0) for a in range(n - 1)) + ((0, 1),)
        return ADEWeightData(f"D{n}", (F(1, n - 1), F(n - 2, 2 * n - 2)), basis)
    if kind == "E6":
        return ADEWeightData("E6", (F(1, 3), F(1, 4)), tuple((a, b) for a in range(2) for b in range(3)))
    if kind == "E7":
        basis = ((0, 0), (1, 0), (2, 0), (0, 1), (1, 1), (0, 2), (2, 1))
        return ADEWeightData("E7", (F(1, 3), F(2, 9)), basis)
    if kind == "E8":
        return ADEWeightData("E8", (F(1, 3), F(1, 5)), tuple((a, b) for a in range(2) for b in range(4)))
    raise ValueError(f"unknown ADE type {kind!r}")


ADE_TABLE = ("A2", "A3", "A4", "A5", "D4", "D5", "D6", "E6", "E7", "E8")


@dataclass(frozen=True)
class Pattern:
    """Insertions ``(level, basis index)`` of one correlator, sorted."""
    genus: int
    insertions: tuple[tuple[int, int], ...]

    def label(self) -> str:
        parts = [f"tau{l}(g{k + 1})" if l else f"g{k + 1}" for l, k in self.insertions]
        return f"<{' '.join(parts)}>_{self.genus}"


def dimension_count(w: ADEWeightData, g: int, s_max: int, desc_max: int = 0,
                    descendant_slots: int = 1) -> list[Pattern]:
    """All stable insertion multisets with s <= s_max satisfying the dimension condition.

    At most ``descendant_slots`` insertions carry a descendant level, each at most
    ``desc_max``.  An empty list certifies that all such correlators vanish.
    """
    if s_max < 1:
        raise ValueError("s_max must be >= 1")
    deg = w.degrees
    chat = w.c_hat
    N = len(deg)
    found = set()
    s_min = max(1, 3 - 2 * g)
    for s in range(s_min, s_max + 1):
        lhs = 2 * ((chat - 3) * (1 - g) + s)
        for ks in itertools.combinations_with_replacement(range(N), s):
            base = sum(deg[k] for k in ks)
            nd = min(descendant_slots, s) if desc_max > 0 else 0
            gap = lhs - base
            # descendant levels contribute an even integer between 0 and 2 nd desc_max
            if gap < 0 or gap > 2 * nd * desc_max or gap.denominator != 1 or gap % 2:
                continue
            for slots in itertools.combinations(range(s), nd):
                for levels in itertools.product(range(desc_max + 1), repeat=nd):
                    if base + 2 * sum(levels) == lhs:
                        lv = [0] * s
                        for slot, l in zip(slots, levels):
                            lv[slot] = l
                        found.add(Pattern(g, tuple(sorted(zip(lv, ks)))))
            if nd == 0 and base == lhs:
                found.add(Pattern(g, tuple((0, k) for k in ks)))
    return sorted(found, key=lambda p: (len(p.insertions), p.insertions))


def analytic_extension(w: ADEWeightData, g: int, desc_max: int = 0, descendant_slots: int = 1) -> bool:
    """True if the dimension defect is positive for every s, not just s <= s_max.

    The defect 2((c-3)(1-g) + s) - sum(2 l + deg) gains 2 - deg > 0 from every primary
    insertion; it is bounded below by its value at the smallest admissible s.
    """
    deg = w.degrees
    maxdeg, mindeficit = max(deg), min(2 - d for d in deg)
    if maxdeg >= 2 or w.c_hat >= 1 or g < 1:
        return False
    base = 2 * (3 - w.c_hat) * (g - 1)
    slots = descendant_slots if desc_max > 0 else 0
    if slots == 0:
        bound = base + mindeficit
    else:
        worst_slot = 2 - 2 * desc_max - maxdeg
        bound = base + (slots * worst_slot if worst_slot <= 0 else min(worst_slot, mindeficit))
    return bound > 0


@dataclass
class Certification:
    type: str
    s_max: int
    C2: bool
    C3: bool
    C2_patterns: list
    C3_patterns: list
    analytic_C2: bool
    analytic_C3: bool
    max_degree: Fraction
    c_hat: Fraction

    def as_dict(self) -> dict:
        return {
            "type": self.type, "s_max": self.s_max, "C2_certified": self.C2, "C3_certified": self.C3,
            "C2_patterns": [p.label() for p in self.C2_patterns],
            "C3_patterns": [p.label() for p in self.C3_patterns],
            "analytic_extension_C2": self.analytic_C2, "analytic_extension_C3": self.analytic_C3,
            "max_degree": str(self.max_degree), "c_hat": str(self.c_hat),
        }


def certify_conditions(w: ADEWeightData, s_max: int = 12, desc_max: int = 2) -> Certification:
    """C2 from genus-1 primaries, C3 from genus 2 with one descendant up to ``desc_max``."""
    p2 = dimension_count(w, 1, s_max, 0)
    p3 = dimension_count(w, 2, s_max, desc_max)
    a2 = analytic_extension(w, 1, 0)
    a3 = analytic_extension(w, 2, desc_max)
    return Certification(w.type, s_max, not p2 and a2, not p3 and a3, p2, p3, a2, a3,
                         max(w.degrees), w.c_hat)
