import numpy as np
import pytest

from ghostsim import Kernel, edge_detect_kernel, identity_kernel


@pytest.fixture
def edge_kernel() -> Kernel:
    return edge_detect_kernel()


@pytest.fixture
def unit_kernel() -> Kernel:
    return identity_kernel()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260810)
