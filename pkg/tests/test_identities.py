import itertools
from fractions import Fraction

import numpy as np
import pytest

from frobcheck.expr import polynomial
from frobcheck.frobenius import FrobeniusSpec, semisimple_frame
from frobcheck.identities import (ANCHORS, CONDITIONAL, TOLERANCES, F2_small_terms, IdentityReport,
                                  check_all, check_appendixB, check_lemma_sumtheta, check_section4,
                                  check_small_lemmas, evaluate_F2_small, evaluate_F2_small_vectorized)
from frobcheck.registry import is_asserted
from frobcheck.rotation import rotation_data
from frobcheck.sampling import random_signs

from conftest import frames_of, rot_of, spec_of

UNCONDITIONAL = sorted(set(TOLERANCES) - CONDITIONAL - {"QP-reduced"})


def full_report(name):
    spec = spec_of(name)
    rep = IdentityReport(name)
    for k, f in enumerate(frames_of(name)):
        rep.extend(check_all(spec, f, is_asserted(spec), point_seed=k))
    return rep


def test_every_identity_present(manifold):
    rep = full_report(manifold)
    expected = set(ANCHORS) if spec_of(manifold).nvars >= 3 else set(ANCHORS) - {"three-point-distinct"}
    assert set(rep.by_id()) == expected
    for e in rep.entries:
        assert e.anchor == ANCHORS[e.id]


def test_asserted_manifolds_pass_everything(asserted_manifold):
    rep = full_report(asserted_manifold)
    assert rep.passed, [(e.id, e.pattern, e.residual) for e in rep.failures()]
    assert all(e.asserted for e in rep.entries)


def test_unconditional_rows_pass_everywhere(manifold):
    rep = full_report(manifold)
    for ident in UNCONDITIONAL:
        assert rep.worst(ident) < TOLERANCES[ident], ident


def test_conditional_rows_informational_off_ade():
    rep = full_report("P1")
    assert rep.passed
    assert not all(e.passed for e in rep.entries if e.conditional)
    assert all(not e.asserted for e in rep.entries if e.conditional)


def test_a2_string_and_a3_two_point():
    assert max(e.residual for e in check_small_lemmas(rot_of("A2")[0]).entries if e.id == "string") < 1e-9
    rows = [e for e in check_small_lemmas(rot_of("A3")[0]).entries if e.id == "genus1-two-point"]
    assert rows and max(e.residual for e in rows) < 1e-7


def test_sum_theta_small_cases():
    assert max(e.residual for e in check_lemma_sumtheta(rot_of("A2")[0]).entries) < 1e-7
    rep = check_lemma_sumtheta(rot_of("A4")[1])
    assert len(rep.entries) == 4 and max(e.residual for e in rep.entries) < 1e-6


def test_sum_theta_one_dimensional():
    spec = FrobeniusSpec("line", 1, polynomial(1, [(Fraction(1, 6), [3])]), [[1]], [0], 0)
    rd = rotation_data(spec, semisimple_frame(spec, [0.5]))
    rep = check_lemma_sumtheta(rd)
    assert [e.residual for e in rep.entries] == [0.0]


def test_reduced_form_examples():
    rows = check_appendixB(rot_of("A3")[0]).by_id()
    assert max(e.residual for e in rows["P-reduced"]) < 1e-7
    assert max(e.residual for e in rows["three-point-distinct"]) < 1e-7
    rows = check_appendixB(rot_of("A2")[0]).by_id()
    assert max(e.residual for e in rows["theta-rv"]) < 1e-6


def test_P_reduced_every_manifold(manifold):
    for rd in rot_of(manifold):
        assert max(e.residual for e in check_appendixB(rd).entries if e.id == "P-reduced") < 1e-7


def test_flat_relation_examples():
    rep = check_section4(spec_of("P1"), frames_of("P1"), conditions_hold=False)
    assert rep.worst("O1-O2-contraction") < 1e-8
    rep = check_section4(spec_of("A3"), frames_of("A3"))
    assert rep.worst("O1-O2-closed-form") < 1e-8
    rep = check_section4(spec_of("A2"), frames_of("A2"))
    assert rep.worst("Q16-Q15") < 1e-8


def test_F2_dual_route(manifold):
    for rd in rot_of(manifold):
        t = F2_small_terms(rd)
        assert np.isfinite(complex(t.value))
        assert abs(t.value - evaluate_F2_small_vectorized(rd)) < 1e-10 * t.scale


def test_F2_permutation_invariance():
    spec = spec_of("A3")
    f = frames_of("A3")[0]
    t = F2_small_terms(rotation_data(spec, f))
    for perm in itertools.permutations(range(3)):
        val = evaluate_F2_small(rotation_data(spec, f.permuted(perm)))
        assert abs(val - t.value) < 1e-12 * t.scale


def test_branch_flip_keeps_passes(manifold):
    spec = spec_of(manifold)
    rng = np.random.default_rng(12)
    asserted = is_asserted(spec)
    for f in frames_of(manifold)[:2]:
        before = {(e.id, e.pattern): e.passed for e in check_all(spec, f, asserted).entries}
        flipped = f.with_signs(random_signs(spec.nvars, rng))
        after = check_all(spec, flipped, asserted).entries
        for e in after:
            if before[(e.id, e.pattern)]:
                assert e.passed, (e.id, e.pattern, e.residual)


def test_tolerance_override():
    spec = spec_of("A2")
    rep = check_all(spec, frames_of("A2")[0], True, {"string": 0.0})
    rows = [e for e in rep.entries if e.id == "string"]
    assert rows and all(e.tolerance == 0.0 and not e.passed for e in rows)
