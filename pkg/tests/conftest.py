import time

import pytest

from ptreach import SimConfig, derive_constants, make_example, simulate


@pytest.fixture(scope="session")
def example():
    """Benchmark bundle with the default parameters (u_max=7, mu=0.05, T=5)."""
    bundle, cfg = make_example()
    return bundle, cfg, derive_constants(cfg)


@pytest.fixture(scope="session")
def wall_times():
    return {}


def _run(example, x0, **kw):
    bundle, cfg, _ = example
    sim = SimConfig(x0=x0, t_end=kw.pop("t_end", 20.0), **kw)
    return simulate(sim, cfg, bundle.model, bundle.clf, bundle.target)


@pytest.fixture(scope="session")
def run_dm(example, wall_times):
    """Start inside the terminal region: x0 = (1.4, 0)."""
    start = time.perf_counter()
    traj = _run(example, (1.4, 0.0))
    wall_times["run_dm"] = time.perf_counter() - start
    return traj


@pytest.fixture(scope="session")
def run_out(example, wall_times):
    """Start in the unsaturated region above the terminal level: x0 = (1, 1.5)."""
    start = time.perf_counter()
    traj = _run(example, (1.0, 1.5))
    wall_times["run_out"] = time.perf_counter() - start
    return traj


@pytest.fixture(scope="session")
def run_far(example):
    """Start where the unsaturated command exceeds the bound: x0 = (2.5, 0)."""
    return _run(example, (2.5, 0.0))
