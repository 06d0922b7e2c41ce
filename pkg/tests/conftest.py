import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from nthbound.lattice import validate_lattice

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
CURVE_GRAM = [[2.116, -0.913], [-0.913, 3.324]]


@pytest.fixture
def curve_lattice():
    return validate_lattice(CURVE_GRAM)


@pytest.fixture
def unit_lattice():
    return validate_lattice(np.eye(2))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
