import numpy as np
import pytest

import htplus


@pytest.fixture(scope="session")
def code_6_4_a4():
    """The canonical (6,4) code over GF(16), base sub-packetization 4."""
    return htplus.make_code(6, 4, 4, field_w=4, poly=0b11001)


@pytest.fixture(scope="session")
def code_6_4_a2():
    """The small-alpha (6,4) code over GF(16), base sub-packetization 2."""
    return htplus.make_code(6, 4, 2, field_w=4, poly=0b11001)


@pytest.fixture(scope="session")
def code_9_6_a3():
    return htplus.make_code(9, 6, 3, field_w=8)


@pytest.fixture(scope="session")
def code_24_18_a8():
    """Beyond desk scale: MDS verification falls back to sampling."""
    return htplus.make_code(24, 18, 8, field_w=16)


@pytest.fixture()
def rng():
    return np.random.default_rng(0xBEEF)
