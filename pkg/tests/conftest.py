import numpy as np
import pytest

from plastic_qca.lattice import LatticeSpec, TruncationMode


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_spec():
    return LatticeSpec(num_sites=2, cutoff=1)


@pytest.fixture
def chain4():
    return LatticeSpec(num_sites=4, cutoff=1, mass=1.0, coupling=1.0)


@pytest.fixture
def hard4():
    return LatticeSpec(num_sites=4, cutoff=2, truncation=TruncationMode.HARD_CUTOFF, mass=1.0, coupling=1.0)
