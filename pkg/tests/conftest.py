import pytest

from aebresim.aebs import AebsConfig, simulate_recording
from aebresim.synthetic import generate_synthetic_suite


@pytest.fixture(scope="session")
def aebs_cfg() -> AebsConfig:
    return AebsConfig()


@pytest.fixture(scope="session")
def suite():
    return {s.name: s for s in generate_synthetic_suite(seed=1)}


@pytest.fixture(scope="session")
def suite_events(suite, aebs_cfg):
    """Simulated events per scenario name (computed once per session)."""
    return {
        name: simulate_recording(s.recording, aebs_cfg, dataset="synthetic")
        for name, s in suite.items()
    }
