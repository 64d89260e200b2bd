from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from frobcheck.errors import DegenerateMetric, NonConstantEta, NonSemisimplePoint
from frobcheck.expr import polynomial
from frobcheck.frobenius import (FrobeniusSpec, associativity_residual, directional_derivative,
                                 frame_residuals, quantum_product, semisimple_frame, validate_spec)
from frobcheck.numeric import DD
from frobcheck.rotation import rotation_data

from conftest import frames_of, spec_of

S3 = np.sqrt(3)


def spec_with(F, nvars=2):
    eye = [[Fraction(int(i == j)) for j in range(nvars)] for i in range(nvars)]
    return FrobeniusSpec("test", nvars, F, eye, [0] * nvars, 0)


def test_a2_metric():
    rep = validate_spec(spec_of("A2"))
    assert rep.passed
    assert np.array_equal(spec_of("A2").eta(), np.array([[0, 1], [1, 0]]))
    assert rep.wdvv_residual == 0


def test_degenerate_metric():
    with pytest.raises(DegenerateMetric):
        validate_spec(spec_with(polynomial(2, [(1, [3, 0])])))


def test_non_constant_metric():
    with pytest.raises(NonConstantEta):
        validate_spec(spec_with(polynomial(2, [(1, [2, 2])])))


def test_a3_wdvv():
    assert validate_spec(spec_of("A3")).wdvv_residual < 1e-12


def test_all_builtins_validate(manifold):
    assert validate_spec(spec_of(manifold)).passed


def test_a2_product_at_0_1():
    prod = quantum_product(spec_of("A2"), [0, 1], [0, 1], [0, 1])
    assert np.allclose(prod, [1 / 3, 0], atol=1e-15)


def test_unit_and_commutativity(manifold):
    spec = spec_of(manifold)
    rng = np.random.default_rng(2)
    pt = frames_of(manifold)[0].point
    X = rng.normal(size=spec.nvars) + 1j * rng.normal(size=spec.nvars)
    Y = rng.normal(size=spec.nvars) + 1j * rng.normal(size=spec.nvars)
    unit = np.eye(spec.nvars)[0]
    assert np.allclose(quantum_product(spec, pt, unit, X), X, atol=1e-13)
    assert np.allclose(quantum_product(spec, pt, X, Y), quantum_product(spec, pt, Y, X), atol=1e-12)


def test_a2_canonical_values():
    f = semisimple_frame(spec_of("A2"), [0, 1])
    assert np.allclose(f.u, [-2 * S3 / 9, 2 * S3 / 9], atol=1e-14)
    assert np.allclose(f.g, [-S3 / 2, S3 / 2], atol=1e-14)
    assert abs(f.h[0].real) < 1e-15 and abs(f.h[0].imag) > 0.9


def test_non_semisimple_origin():
    with pytest.raises(NonSemisimplePoint):
        semisimple_frame(spec_of("A2"), [0, 0])


def test_frame_invariants(manifold):
    for f in frames_of(manifold):
        res = frame_residuals(spec_of(manifold), f)
        assert max(res.values()) < 1e-10, res
        assert f.gap > 0
        keys = [(z.real, z.imag) for z in f.u.astype(complex)]
        assert keys == sorted(keys)


def test_idempotent_derivative_of_u(manifold):
    spec = spec_of(manifold)
    f = frames_of(manifold)[0]
    for i in range(f.n):
        for j in range(f.n):
            d = directional_derivative(spec, f, f.idem[i], f"u:{j}")
            assert abs(d - (i == j)) < 1e-6


def test_idempotent_derivative_of_h(manifold):
    spec = spec_of(manifold)
    f = frames_of(manifold)[0]
    r = rotation_data(spec, f).r
    for k in range(f.n):
        for i in range(f.n):
            d = directional_derivative(spec, f, f.idem[k], f"h:{i}")
            assert abs(d - r[i, k] * f.h[k]) < 1e-5 * max(1.0, abs(f.h[k]))


def test_zero_direction():
    spec = spec_of("A2")
    assert directional_derivative(spec, [0.1, 1.0], [0, 0], "u:0") == 0


def test_associativity_at_many_points(manifold):
    spec = spec_of(manifold)
    rng = np.random.default_rng(9)
    base = np.array(spec.metadata["base_point"], dtype=complex)
    for _ in range(50):
        pt = base + 0.5 * (rng.normal(size=spec.nvars) + 1j * rng.normal(size=spec.nvars))
        assert associativity_residual(spec, list(pt)) < 1e-10


def test_frames_are_deterministic():
    a = semisimple_frame(spec_of("A4"), [0.1, 0.3, 0.5, 0.8])
    b = semisimple_frame(spec_of("A4"), [0.1, 0.3, 0.5, 0.8])
    assert np.array_equal(a.u, b.u) and np.array_equal(a.h, b.h)


def test_dd_frame_agrees_with_double():
    pt = [0.1, 0.6, 1.0]
    fd = semisimple_frame(spec_of("A3"), pt, DD)
    f = semisimple_frame(spec_of("A3"), pt)
    assert np.allclose(fd.u.astype(complex), f.u, atol=1e-13)
    res = frame_residuals(spec_of("A3"), fd)
    assert max(res.values()) < 1e-28


def test_branch_signs_square_to_g():
    f = frames_of("D4")[0].with_signs([1, -1, -1, 1])
    assert np.allclose(f.h ** 2, f.g, atol=1e-14)


@settings(max_examples=30, deadline=None)
@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1))
def test_unit_shift_moves_u_uniformly(a, b, c, s):
    spec = spec_of("A2")
    pt = [complex(a, b), 1 + complex(c, 0.1)]
    try:
        f0 = semisimple_frame(spec, pt)
        f1 = semisimple_frame(spec, [pt[0] + s, pt[1]])
    except NonSemisimplePoint:
        return
    assert np.allclose(f1.u - f0.u, s, atol=1e-9)
