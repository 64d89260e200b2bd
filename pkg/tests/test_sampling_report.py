import json

import numpy as np
import pytest

from frobcheck.report import SCHEMA_VERSION, Document, plain
from frobcheck.sampling import random_signs, sample_frames, sample_points_and_jets

from conftest import spec_of


def test_sampling_is_deterministic():
    a = sample_points_and_jets(spec_of("A3"), 4, seed=5)
    b = sample_points_and_jets(spec_of("A3"), 4, seed=5)
    for (sa, ja), (sb, jb) in zip(a, b):
        assert sa.frame.point == sb.frame.point
        assert np.array_equal(ja.ux, jb.ux) and np.array_equal(ja.uxx, jb.uxx)


def test_points_inside_box():
    spec = spec_of("D4")
    base = np.array(spec.metadata["base_point"])
    for s in sample_frames(spec, 10, seed=1, box=0.05):
        assert np.abs(np.array(s.frame.point, dtype=complex) - base).max() <= 0.05 + 1e-15


def test_prefix_stability():
    short = sample_points_and_jets(spec_of("A2"), 2, seed=3)
    long = sample_points_and_jets(spec_of("A2"), 5, seed=3)
    for (sa, ja), (sb, jb) in zip(short, long):
        assert sa.frame.point == sb.frame.point and np.array_equal(ja.ux, jb.ux)


def test_jet_ranges():
    for _, j in sample_points_and_jets(spec_of("A4"), 6, seed=2):
        assert np.all((np.abs(j.ux) >= 0.5) & (np.abs(j.ux) <= 2))
        assert np.all(np.abs(j.uxx) <= 1)


def test_bad_sampling_config():
    with pytest.raises(ValueError):
        sample_frames(spec_of("A2"), 0)
    with pytest.raises(ValueError):
        sample_frames(spec_of("A2"), 1, box=0)


def test_random_signs_flip_something():
    rng = np.random.default_rng(0)
    for _ in range(20):
        s = random_signs(3, rng)
        assert set(s) <= {-1, 1} and (s < 0).any()


def test_plain_conversion():
    out = plain({"z": 1 + 2j, "a": np.arange(2), "b": np.float64(0.5), "t": (1, True)})
    assert out == {"z": {"re": 1.0, "im": 2.0}, "a": [0, 1], "b": 0.5, "t": [1, True]}


def test_document_formats():
    doc = Document("g2", "A2", {"seed": 1}, [{"sample": 0, "r": 1e-17}], {"passed": True, "worst": {"G_i": 0.0}})
    data = json.loads(doc.to_json())
    assert data["schema_version"] == SCHEMA_VERSION and data["rows"][0]["sample"] == 0
    csv = doc.render("table").splitlines()
    assert csv[0].startswith("# schema_version=")
    assert csv[1] == "sample,r" and csv[2] == "0,1e-17"
    assert "# worst.G_i=0.0" in csv
    with pytest.raises(ValueError):
        doc.render("xml")
