"""Shared simulation fixtures.

The long solver runs are session-scoped so that unit tests and the
acceptance suite reuse one integration each.
"""

from __future__ import annotations

import math
import time

import numpy as np
import pytest

from stationary_light import mbe, scenarios
from stationary_light.params import Grid, PhysicalParams
from stationary_light.profiles import HomogeneousProfile, TanhRamp
from stationary_light.scenarios import ScenarioConfig


def run_canned(name: str):
    config = scenarios.load_config(scenarios.canned_scenario_path(name))
    started = time.perf_counter()
    result = mbe.run(config)
    return config, result, time.perf_counter() - started


@pytest.fixture(scope="session")
def fig3_run():
    """Stored Gaussian retrieved by equal homogeneous beams (ramp at t=30)."""
    return run_canned("fig3")


@pytest.fixture(scope="session")
def matching_run():
    """Equal-beam retrieval sized so the matched difference mode sits below
    the 5% threshold as soon as its absorption transient has died.

    The slaved difference mode of a width-w Gaussian is 1/(sqrt(2) w) in
    relative norm, so w = 15 puts the matched state at 0.047 < 0.05.
    """
    config = ScenarioConfig(
        name="matching",
        description="pulse-matching acceptance run",
        params=PhysicalParams(gamma=1.0),
        grid=Grid(-150.0, 150.0, 2000),
        profile=HomogeneousProfile(
            1.0 / math.sqrt(2.0), 1.0 / math.sqrt(2.0), ramp=TanhRamp(30.0, 0.1)
        ),
        initial_kind="stored_gaussian",
        initial_width=15.0,
        duration=250.0,
        snapshot_every=2.0,
    )
    started = time.perf_counter()
    result = mbe.run(config)
    return config, result, time.perf_counter() - started


@pytest.fixture(scope="session")
def fig4_run():
    """Static separated foci: trapped mode regime."""
    return run_canned("fig4")


@pytest.fixture(scope="session")
def fig5_run():
    """Moving foci compression at gamma = 0.05."""
    return run_canned("fig5")


def drift_config(cos_2phi: float) -> ScenarioConfig:
    omega_plus = math.sqrt((1.0 + cos_2phi) / 2.0)
    omega_minus = math.sqrt((1.0 - cos_2phi) / 2.0)
    return ScenarioConfig(
        name=f"drift_{cos_2phi:+.1f}",
        description="drift run",
        params=PhysicalParams(gamma=1.0),
        grid=Grid(-160.0, 160.0, 2200),
        profile=HomogeneousProfile(omega_plus, omega_minus, ramp=TanhRamp(20.0, 0.1)),
        initial_kind="stored_gaussian",
        initial_width=10.0,
        duration=220.0,
        snapshot_every=2.0,
    )


@pytest.fixture(scope="session")
def drift_runs():
    """Unequal-beam runs keyed by cos(2 phi)."""
    out = {}
    for q in (0.2, -0.2, 0.5, -0.5):
        config = drift_config(q)
        out[q] = (config, mbe.run(config))
    return out


def variance_series(result: mbe.SimulationResult):
    """(t, center-of-mass, variance) for snapshots with defined moments."""
    ts, coms, variances = [], [], []
    for t, obs in zip(result.times, result.observables):
        if not obs.moments_defined:
            continue
        ts.append(t)
        coms.append(obs.first_moment_sum)
        variances.append(obs.width_sq - obs.first_moment_sum**2)
    return np.asarray(ts), np.asarray(coms), np.asarray(variances)
