import numpy as np
import pytest

from lightlink.impairments import ChainConfig
from lightlink.mcs import Bandwidth, GuardInterval, PpduConfig, mcs


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def default_chain():
    return ChainConfig()


@pytest.fixture
def mcs3_cfg():
    return PpduConfig(mcs(3), Bandwidth.MHZ20, GuardInterval.LONG, psdu_length=300)


def make_psdu(rng, n):
    return rng.integers(0, 256, n, dtype=np.uint8).tobytes()
