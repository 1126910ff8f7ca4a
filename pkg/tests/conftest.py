import numpy as np
import pytest

from bnprune import kernels


@pytest.fixture
def rng():
    return np.random.default_rng(20260822)


@pytest.fixture
def restore_backend():
    """Put the kernel backend back however a test leaves it."""
    before = kernels.backend_name()
    yield
    kernels.set_backend(before)
