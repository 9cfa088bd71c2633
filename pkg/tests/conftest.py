"""Shared fixtures and helpers for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from hullwalk import WalkConfig, run
from hullwalk.rng import stream


def legal_windows(n: int, k: int = 1, seed: int = 0, steps: int = 60):
    """Sample legal (k+1)-point windows by running short walks.

    Returns a list of (window, n_index) pairs taken from strictly positive
    times, so every window is a reachable trajectory segment.
    """
    out = []
    for rep in range(n):
        cfg = WalkConfig(d=2, k=k, steps=steps, seed=seed, replica=rep,
                         trace_thin=1)
        r = run(cfg)
        pos = r.trace_x
        idx = steps - 1
        window = [pos[idx - k + j] for j in range(k + 1)]
        out.append((window, idx))
    return out


def rng(seed: int = 0) -> np.random.Generator:
    return stream(seed, 0, purpose=99)


@pytest.fixture(scope="session")
def short_run():
    """One fully traced planar run shared by self-consistency tests."""
    cfg = WalkConfig(d=2, k=1, steps=4000, seed=101, trace_thin=1)
    return run(cfg)
