import numpy as np
import pytest

from frobcheck.errors import UndefinedEntry
from frobcheck.frobenius import directional_derivative, semisimple_frame
from frobcheck.rotation import (check_derivative_rules, four_point_pattern_residuals, invariant_residuals,
                                rotation_data, string_equation_residual, theta_v_identity)

from conftest import frames_of, rot_of, spec_of


def test_invariants(manifold):
    for rd in rot_of(manifold):
        res = invariant_residuals(rd)
        assert max(res.values()) < 1e-9, res


def test_string_equation(manifold):
    for rd in rot_of(manifold):
        assert string_equation_residual(rd) < 1e-9


def test_four_point_pattern(manifold):
    for rd in rot_of(manifold):
        res = four_point_pattern_residuals(rd)
        assert res["three_distinct"] < 1e-9 and res["jiii_plus_jjii"] < 1e-10


def test_z4_symmetric(manifold):
    z = rot_of(manifold)[0].z4.astype(complex)
    for perm in [(1, 0, 2, 3), (0, 2, 1, 3), (3, 1, 2, 0)]:
        assert np.allclose(z, z.transpose(perm), atol=1e-12 * np.abs(z).max())


def test_a2_theta_wiring():
    rd = rotation_data(spec_of("A2"), semisimple_frame(spec_of("A2"), [0, 1]))
    lhs = rd.theta[0, 1] + rd.theta[1, 0]
    rhs = -sum(rd.r[0, k] * rd.r[1, k] for k in range(2))
    assert abs(lhs - rhs) < 1e-12 * max(1, abs(rhs))


def test_theta_v(manifold):
    for rd in rot_of(manifold):
        assert theta_v_identity(rd) < 1e-10


def test_theta_v_reducible_cross_block():
    rd = rot_of("A2+A2")[0]
    # blocks are {0,1} and {2,3} up to ordering; find a vanishing cross entry
    r = np.abs(rd.r.astype(complex))
    i, j = np.unravel_index(np.argmin(r + np.eye(4) * 1e9), r.shape)
    assert r[i, j] < 1e-12 * r.max()
    lhs = rd.theta[i, j] * rd.v[i, j]
    assert abs(lhs) < 1e-12 * r.max() ** 2


def test_theta_v_unit_shift_invariance():
    spec = spec_of("A3")
    pt = [0.1, 0.6, 1.0]
    a = theta_v_identity(rotation_data(spec, semisimple_frame(spec, pt)))
    b = theta_v_identity(rotation_data(spec, semisimple_frame(spec, [pt[0] + 0.7, pt[1], pt[2]])))
    assert a < 1e-10 and b < 1e-10
    ra = rotation_data(spec, semisimple_frame(spec, pt)).r
    rb = rotation_data(spec, semisimple_frame(spec, [pt[0] + 0.7, pt[1], pt[2]])).r
    assert np.allclose(ra, rb, atol=1e-12)


def test_diagonal_theta_undefined():
    rd = rot_of("A2")[0]
    with pytest.raises(UndefinedEntry):
        rd.theta[0, 0]
    with pytest.raises(UndefinedEntry):
        rd.omega[1, 1]
    assert np.isnan(rd.theta.masked()[0, 0])


def test_gamma_convention():
    rd = rot_of("A3")[0]
    g = rd.gamma_matrix()
    assert np.all(np.diag(g) == 0)
    assert rd.gamma(0, 1) == rd.r[0, 1]
    assert rd.r[0, 0] != 0


def test_r_from_finite_differences(manifold):
    spec = spec_of(manifold)
    f = frames_of(manifold)[0]
    rd = rot_of(manifold)[0]
    scale = np.abs(rd.r.astype(complex)).max()
    for i in range(f.n):
        for j in range(f.n):
            if i == j:
                continue
            d = directional_derivative(spec, f, f.idem[j], f"h:{i}") / f.h[j]
            assert abs(d - rd.r[i, j]) < 1e-5 * max(1.0, scale)


def test_derivative_rules(manifold):
    spec = spec_of(manifold)
    rows = check_derivative_rules(spec, frames_of(manifold)[0])
    cases = {r.case for r in rows}
    assert {"i=j", "i=j=k", "E_j theta_ij"} <= cases
    if spec.nvars >= 3:
        assert "distinct" in cases
    worst = max(r.residual for r in rows)
    assert worst < 1e-4


def test_derivative_rules_by_case():
    a3 = check_derivative_rules(spec_of("A3"), frames_of("A3")[1])
    assert max(r.residual for r in a3 if r.case == "distinct") < 1e-5
    a2 = check_derivative_rules(spec_of("A2"), frames_of("A2")[1])
    assert max(r.residual for r in a2 if r.case == "i=j=k") < 1e-5
    assert max(r.residual for r in a2 if r.case == "i=j") < 1e-5
