import pytest

from mlg import kernels


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    # compile the jit kernels once so timed checks measure steady-state
    # numerical work rather than compilation
    kernels.warmup()
