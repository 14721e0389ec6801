import pytest

from bectension import solver


@pytest.fixture(scope="session")
def beta1_result():
    """Converged default solve at beta=1, shared across the suite."""
    return solver.solve(1.0)


@pytest.fixture(scope="session")
def solve_cache():
    """Memoized default solves keyed by beta (acceptance reuses many)."""
    cache = {}

    def get(beta):
        if beta not in cache:
            cache[beta] = solver.solve(beta)
        return cache[beta]

    return get
