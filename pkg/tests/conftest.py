import numpy as np
import pytest

from qaoa_calc import oracle
from qaoa_calc.cost import CostFunction
from qaoa_calc.pauli import PauliSum


def oracle_expectation(cost: CostFunction, schedule) -> float:
    return oracle.expectation(oracle.simulate(cost, schedule), cost)


def random_dyadic_sum(n: int, terms: int, rng: np.random.Generator,
                      diagonal: bool = False) -> PauliSum:
    """Random Pauli sum with dyadic coefficients (exact float arithmetic)."""
    tl = []
    for _ in range(terms):
        xm = 0 if diagonal else int(rng.integers(0, 1 << n))
        zm = int(rng.integers(0, 1 << n))
        if xm == 0 and zm == 0:
            zm = 1
        c = int(rng.integers(1, 9)) / 8.0 * (1 if rng.integers(0, 2) else -1)
        tl.append((xm, zm, c))
    return PauliSum.from_terms(n, tl, tol=0.0)


def angle_grid(lo: float, hi: float, count: int) -> np.ndarray:
    return np.linspace(lo, hi, count)


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(key=20240601))
