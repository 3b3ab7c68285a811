import random
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

import pytest

from ltk.rings import make_ring
from ltk.series import TruncSeries


@pytest.fixture
def rng():
    return random.Random(20260808)


def random_series(spec, cap, rng, unit=True, terms=None):
    """A random series, unit constant term by default."""
    coeffs = []
    n = terms or cap
    for i in range(min(n, cap)):
        coeffs.append(spec.elem([rng.randrange(spec.modulus)
                                 for _ in range(spec.rank)]))
    if unit:
        while not coeffs[0].is_unit():
            coeffs[0] = spec.elem([rng.randrange(spec.modulus)
                                   for _ in range(spec.rank)])
    return TruncSeries(spec, cap, coeffs)


@pytest.fixture
def z3():
    return make_ring(3, 8, "zp")


@pytest.fixture
def q2():
    return make_ring(2, 8, "ramified_quad", quad=(0, 2))


@pytest.fixture
def q3():
    return make_ring(3, 7, "ramified_quad", quad=(0, 3))


@pytest.fixture
def u2():
    return make_ring(2, 7, "unramified_quad", quad=(1, 1))
