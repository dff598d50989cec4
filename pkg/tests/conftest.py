import numpy as np
import pytest

from mcdirac.symcalc import build_a_symbols, build_b_symbols


@pytest.fixture(scope="session")
def symbols_with_A():
    a = build_a_symbols(include_A=True)
    return a, build_b_symbols(*a)


@pytest.fixture(scope="session")
def symbols_without_A():
    a = build_a_symbols(include_A=False)
    return a, build_b_symbols(*a)


@pytest.fixture(scope="session")
def b2_parts():
    from mcdirac.xi_integrate import build_b2_parts

    return build_b2_parts(include_A=True)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20230817)
