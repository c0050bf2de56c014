"""Session-scoped fixtures shared by the acceptance suite.

The full-scale batches are expensive (tens of seconds), so every acceptance
criterion that needs them shares one computation.
"""

from dataclasses import replace

import pytest

from regionsim.checks import random_suite
from regionsim.scenario import ScenarioConfig
from regionsim.sim import run, run_batch

ACCEPT_SUITE_SEED = 20260810
SCALE_NODE_COUNTS = (35, 70, 105, 140)


@pytest.fixture(scope="session")
def suite200():
    """The 200-graph random connected unit-disk suite (10-50 nodes, 1-5 seeds)."""
    return list(random_suite(200, seed=ACCEPT_SUITE_SEED))


@pytest.fixture(scope="session")
def default_config():
    return ScenarioConfig()  # the desk-scale default scenario


@pytest.fixture(scope="session")
def res_scale_batches(default_config):
    """Ten-seed batches of the default scenario at 35/70/105/140 nodes."""
    return {
        n: run_batch(replace(default_config, node_count=n, run_count=10))
        for n in SCALE_NODE_COUNTS
    }


@pytest.fixture(scope="session")
def res_batch_140(res_scale_batches):
    return res_scale_batches[140]


@pytest.fixture(scope="session")
def dt_batch_140(default_config):
    return run_batch(replace(default_config, protocol="dt", run_count=10))


@pytest.fixture(scope="session")
def mte_batch_140(default_config):
    return run_batch(replace(default_config, protocol="mte", run_count=10))


@pytest.fixture(scope="session")
def single_runs_all_protocols(default_config):
    """One run per protocol on the same instance (same seed, same sources)."""
    seed = 5
    return {
        proto: run(replace(default_config, protocol=proto), seed)
        for proto in ("res", "dt", "mte", "merr", "or")
    }
