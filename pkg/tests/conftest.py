import numpy as np
import pytest

from ridge_solver import SolverConfig, builtin_problem, run_stonr


@pytest.fixture(scope="session")
def default_cfg():
    return SolverConfig()


@pytest.fixture(scope="session")
def problems():
    return {name: builtin_problem(name)
            for name in ("bilinear", "f1", "f2", "neg_square")}


@pytest.fixture(scope="session")
def golden_runs(problems, default_cfg):
    """One solver run per golden problem, shared across the suite."""
    return {name: run_stonr(problems[name], default_cfg)
            for name in ("bilinear", "f1", "f2")}


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
