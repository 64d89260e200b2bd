"""Frozen reference values, each derived independently of the package's own code paths."""
import numpy as np
import pytest

from frobcheck.correlators import check_condition_C1, flat_contraction_eta
from frobcheck.expr import polynomial
from frobcheck.frobenius import multiplication_matrix, semisimple_frame
from frobcheck.registry import ade_weights

from conftest import spec_of

S3 = np.sqrt(3)

# hand-derived: for F = t1^2 t2 / 2 + t2^4 / 72, gamma_2 o gamma_2 = (t2 / 3) gamma_1, so
# u = t1 +- (2/3) t2 sqrt(t2 / 3) and g = +- sqrt(3 / t2) / 2
A2_POINTS = [(0, 1), (0.1 + 0.2j, 0.9 - 0.1j), (-0.3, 1.7 + 0.4j)]


@pytest.mark.parametrize("pt", A2_POINTS)
def test_a2_closed_form_frame(pt):
    t1, t2 = map(complex, pt)
    q = np.sqrt(t2 / 3)
    f = semisimple_frame(spec_of("A2"), pt)
    expect_u = sorted([t1 - 2 / 3 * t2 * q, t1 + 2 / 3 * t2 * q], key=lambda z: (z.real, z.imag))
    assert np.allclose(f.u, expect_u, atol=1e-13)
    expect_g = [1 / (2 * q) if abs(u - (t1 + 2 / 3 * t2 * q)) < 1e-9 else -1 / (2 * q) for u in f.u]
    assert np.allclose(f.g, expect_g, atol=1e-13)


def test_a2_frozen_numbers():
    f = semisimple_frame(spec_of("A2"), [0, 1])
    assert np.allclose(f.u, [-0.384900179459750, 0.384900179459750], atol=1e-14)
    assert np.allclose(f.u, [-2 * S3 / 9, 2 * S3 / 9], atol=1e-15)
    assert np.allclose(f.g, [-S3 / 2, S3 / 2], atol=1e-15)


def test_a2_prepotential_value():
    F = polynomial(2, [(0.5, [2, 1]), (1 / 72, [0, 4])])
    assert F.evaluate([0, 1]) == pytest.approx(0.0138888888888889, rel=1e-13)


@pytest.mark.parametrize("pt", [(0.2 + 0.1j, 0.3 - 0.2j), (0.0, 1.0)])
def test_p1_closed_form_frame(pt):
    # gamma_2 o gamma_2 = e^{t2} gamma_1: u = t1 +- 2 e^{t2/2}, g = +- e^{-t2/2} / 2
    t1, t2 = map(complex, pt)
    e = np.exp(t2 / 2)
    f = semisimple_frame(spec_of("P1"), pt)
    plus = int(np.argmin(np.abs(f.u - (t1 + 2 * e))))
    assert abs(f.u[plus] - (t1 + 2 * e)) < 1e-13
    assert abs(f.u[1 - plus] - (t1 - 2 * e)) < 1e-13
    assert abs(f.g[plus] - 1 / (2 * e)) < 1e-13
    assert abs(f.g[1 - plus] + 1 / (2 * e)) < 1e-13


def test_a3_canonical_values_against_numpy():
    spec = spec_of("A3")
    pt = [0.1, 0.6, 1.0]
    L = multiplication_matrix(spec.structure_constants(pt), spec.euler_vector(pt))
    ref = np.sort_complex(np.linalg.eigvals(L.astype(complex)))
    f = semisimple_frame(spec, pt)
    assert np.allclose(f.u, ref, atol=1e-12)
    assert np.allclose(f.u, [-0.49223686, -0.19731645, 1.48955332], atol=5e-9)


def test_a2_flat_contraction_is_zero():
    # only F_2222 = 1/3 is nonzero among fourth derivatives and eta^{22} = 0
    spec = spec_of("A2")
    for pt in A2_POINTS:
        assert flat_contraction_eta(spec, semisimple_frame(spec, pt)) == 0
    frames = [semisimple_frame(spec, pt) for pt in A2_POINTS]
    assert abs(check_condition_C1(spec, frames).details["reference_value"]) < 1e-13


def test_ade_degree_tables():
    assert ade_weights("A2").degrees == (0, pytest.approx(2 / 3))
    assert [str(d) for d in ade_weights("D4").degrees] == ["0", "2/3", "4/3", "2/3"]
    assert str(ade_weights("E6").c_hat) == "5/6"
    assert str(ade_weights("E8").c_hat) == "14/15"
    assert str(max(ade_weights("E8").degrees)) == "28/15"
