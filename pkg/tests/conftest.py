import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from markov_recovery import qstate


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def rqe_layout():
    return qstate.SystemLayout((2, 2, 2), ("R", "Q", "E"))


@pytest.fixture
def ghz(rqe_layout):
    amps = np.zeros((2, 2, 2), dtype=complex)
    amps[0, 0, 0] = amps[1, 1, 1] = 1.0 / np.sqrt(2.0)
    return qstate.PureState(rqe_layout, amps)
