import numpy as np
import pytest

import cscoherent as cs
from cscoherent import kernels


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    # Compile the jit kernels once so per-test timings stay honest.
    kernels.warmup()


@pytest.fixture(scope="session")
def modulated_schedule():
    """M = 1, w^2(t) = 1 + 0.5 sin(0.7 t)."""
    return cs.ParameterSchedule(
        mass=cs.Constant(1.0),
        frequency=cs.Sinusoid(1.0, 0.5, 0.7, 0.0, "sin"),
        frequency_is_squared=True,
    )


@pytest.fixture(scope="session")
def modulated_solution(modulated_schedule):
    return cs.solve_classical(modulated_schedule, (1.0, 0.0, 0.0, 1.0), (0.0, 5.0))


@pytest.fixture(scope="session")
def constant_solution():
    return cs.solve_classical(cs.constant_schedule(1.0, 1.0),
                              (1.0, 0.0, 0.0, 1.0), (0.0, 8.0))


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
