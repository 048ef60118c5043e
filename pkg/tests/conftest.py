import numpy as np
import pytest

from twochan import TwoChannelHamiltonian, generate_instance


@pytest.fixture
def scalar_h():
    return TwoChannelHamiltonian(a1=[[0.0]], a2=[[2.0]], b12=[[0.5]])


@pytest.fixture
def uncoupled_h():
    return TwoChannelHamiltonian(
        a1=np.diag([-1.0, 0.0]), a2=np.diag([2.0, 3.0]), b12=np.zeros((2, 2))
    )


@pytest.fixture
def degenerate_h():
    # channel spectra are exactly degenerate multiples of the identity, so the
    # solution and every derived object are scalar multiples of eye(2)
    return TwoChannelHamiltonian(
        a1=np.zeros((2, 2)), a2=2.0 * np.eye(2), b12=0.5 * np.eye(2)
    )


@pytest.fixture
def random_h():
    return generate_instance(6, 5, 1.0, 0.6, 314)


@pytest.fixture(scope="session")
def small_ensemble():
    cases = [
        generate_instance(4, 4, 1.0, 0.3, 100),
        generate_instance(5, 6, 0.5, 0.7, 101),
        generate_instance(6, 4, 2.0, 0.9, 102),
        generate_instance(3, 5, 1.0, 0.1, 103),
    ]
    return cases
