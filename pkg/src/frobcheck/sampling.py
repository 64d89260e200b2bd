"""Seeded sample points and jets.

Points come from a complex polydisc of radius ``box`` around the manifold's
base point; points whose canonical values nearly collide are redrawn.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonSemisimplePoint
from .frobenius import FrobeniusSpec, SemisimpleFrame, semisimple_frame
from .g2 import JetPoint
from .numeric import Precision

MAX_REJECTIONS = 100


@dataclass(frozen=True)
class Sample:
    index: int
    frame: SemisimpleFrame
    rejections: int


def base_point(spec: FrobeniusSpec) -> list[complex]:
    return [complex(x) for x in spec.metadata.get("base_point", [0] * spec.nvars)]


def sample_frames(spec: FrobeniusSpec, num_points: int, seed: int = 0, box: float = 0.1,
                  precision: Precision | str = "double", eps_gap: float | None = None) -> list[Sample]:
    """``num_points`` semisimple frames drawn deterministically from ``seed``."""
    if num_points < 1:
        raise ValueError("num_points must be at least 1")
    if box <= 0:
        raise ValueError("box must be positive")
    rng = np.random.default_rng(seed)
    center = np.array(base_point(spec))
    out = []
    for k in range(num_points):
        for attempt in range(MAX_REJECTIONS + 1):
            radius = box * np.sqrt(rng.uniform(0, 1, spec.nvars))
            phase = np.exp(2j * np.pi * rng.uniform(0, 1, spec.nvars))
            pt = center + radius * phase
            try:
                frame = semisimple_frame(spec, [complex(z) for z in pt], precision, eps_gap)
            except NonSemisimplePoint:
                continue
            out.append(Sample(k, frame, attempt))
            break
        else:
            raise NonSemisimplePoint(f"no semisimple point after {MAX_REJECTIONS} rejections")
    return out


def sample_jets(frame: SemisimpleFrame, rng: np.random.Generator) -> JetPoint:
    """Jets with |u_{i,x}| in [0.5, 2] and u_{i,xx} in the unit polydisc."""
    n = frame.n
    ux = rng.uniform(0.5, 2.0, n) * np.exp(2j * np.pi * rng.uniform(0, 1, n))
    uxx = rng.uniform(0, 1, n) * np.exp(2j * np.pi * rng.uniform(0, 1, n))
    return JetPoint(frame, ux, uxx)


def sample_points_and_jets(spec: FrobeniusSpec, num_points: int, seed: int = 0, box: float = 0.1,
                           precision: Precision | str = "double") -> list[tuple[Sample, JetPoint]]:
    samples = sample_frames(spec, num_points, seed, box, precision)
    # jets use their own stream so adding points never changes earlier jets
    rng = np.random.default_rng([seed, 1])
    return [(s, sample_jets(s.frame, rng)) for s in samples]


def random_signs(n: int, rng: np.random.Generator) -> np.ndarray:
    """A random square-root branch assignment that is not identically +1."""
    while True:
        s = rng.choice([-1, 1], n)
        if (s < 0).any():
            return s
