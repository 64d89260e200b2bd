import numpy as np
import pytest

from frobcheck.correlators import (canonical_contraction, check_condition_C1, check_condition_C2,
                                   flat_contraction_eta, genus0_evaluator, genus1_closed_forms,
                                   genus1_evaluator, recursion_residuals, recursion_step)
from frobcheck.errors import RecursionDepthExceeded
from frobcheck.registry import is_asserted
from frobcheck.rotation import rotation_data
from frobcheck.sampling import sample_frames

from conftest import frames_of, rot_of, spec_of


def test_a2_phi1_vanishes():
    frames = [s.frame for s in sample_frames(spec_of("A2"), 10, seed=4)]
    for f in frames:
        tab = genus1_closed_forms(rotation_data(spec_of("A2"), f), three_point=False)
        assert np.abs(tab.phi1.astype(complex)).max() < 1e-8 * max(1.0, tab.scale1.max())


def test_a3_phi2_vanishes():
    for rd in rot_of("A3"):
        tab = genus1_closed_forms(rd)
        off = ~np.eye(3, dtype=bool)
        assert np.abs(tab.phi2.astype(complex)[off]).max() < 1e-7 * tab.scale2.max()


def test_phi2_symmetric(manifold):
    tab = genus1_closed_forms(rot_of(manifold)[0])
    p = tab.phi2.astype(complex)
    assert np.allclose(p, p.T, atol=1e-10 * max(1.0, tab.scale2.max()))


def test_p1_phi1_nonzero():
    for rd in rot_of("P1"):
        tab = genus1_closed_forms(rd)
        assert np.abs(tab.phi1.astype(complex)).max() > 1e-3 * tab.scale1.max()


def test_condition_C1(manifold):
    rep = check_condition_C1(spec_of(manifold), frames_of(manifold))
    assert rep.residual < 1e-9
    if is_asserted(spec_of(manifold)):
        assert rep.passed


def test_C1_pointwise_a3():
    for rd in rot_of("A3"):
        c = canonical_contraction(rd)
        d = flat_contraction_eta(spec_of("A3"), rd.frame)
        assert abs(c.value - d) < 1e-9 * c.scale


def test_C1_a2_spread_over_20_points():
    frames = [s.frame for s in sample_frames(spec_of("A2"), 20, seed=8)]
    assert check_condition_C1(spec_of("A2"), frames).spread < 1e-8


def test_C1_single_point_spread_is_zero():
    assert check_condition_C1(spec_of("A2"), frames_of("A2")[:1]).spread == 0


def test_condition_C2_on_asserted(asserted_manifold):
    assert check_condition_C2(spec_of(asserted_manifold), frames_of(asserted_manifold)).passed


def test_condition_C2_fails_on_p1():
    rep = check_condition_C2(spec_of("P1"), frames_of("P1"))
    assert not rep.passed


def test_recursion_agrees_with_closed_forms(manifold):
    res = recursion_residuals(spec_of(manifold), frames_of(manifold)[0])
    assert "phi_ij" in res and "z_iiiii" in res
    assert res["phi_ij"] < 1e-5
    assert res["z_iiiii"] < 1e-5
    for key in ("phi_ijk", "phi_iij"):
        if key in res:
            assert res[key] < 1e-4


def test_recursion_genus0_four_from_three(manifold):
    spec = spec_of(manifold)
    f = frames_of(manifold)[0]
    z4 = rot_of(manifold)[0].z4
    scale = np.abs(z4.astype(complex)).max()
    idx = (0, 1, 1, 0)
    val = recursion_step(spec, f, genus0_evaluator(3), idx)
    assert abs(val - z4[idx]) < 1e-5 * scale


def test_recursion_depth_limit():
    with pytest.raises(RecursionDepthExceeded):
        recursion_step(spec_of("A2"), frames_of("A2")[0], genus0_evaluator(5), (0, 0, 0, 0, 0, 1))


def test_genus1_evaluator_rejects_unknown_pattern():
    with pytest.raises(ValueError):
        genus1_evaluator()(spec_of("A3"), frames_of("A3")[0], (0, 0, 0, 0))
