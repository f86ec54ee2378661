import pytest

from qiopa import (
    GainParams,
    LossSpec,
    PolarizationQubit,
    build_m_qubit,
    reduce_three_qubit,
    reduce_two_qubit,
)

OPERATING_GAIN = 1.19
OPERATING_ETA1 = 0.049
OPERATING_ETA2 = 0.042


@pytest.fixture(scope="session")
def paper_gain():
    return GainParams(OPERATING_GAIN)


@pytest.fixture(scope="session")
def paper_loss():
    return LossSpec(OPERATING_ETA1, OPERATING_ETA2)


@pytest.fixture(scope="session")
def minus_state(paper_gain):
    return build_m_qubit(paper_gain, PolarizationQubit.minus())


@pytest.fixture(scope="session")
def rho_paper(minus_state, paper_loss):
    return reduce_two_qubit(minus_state, paper_loss)


@pytest.fixture(scope="session")
def rho_prime_paper(paper_gain, paper_loss):
    return reduce_three_qubit(paper_gain, paper_loss)
