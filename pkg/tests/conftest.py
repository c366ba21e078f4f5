import pytest

from scramblab import qcore


@pytest.fixture(scope="session")
def chaotic_chain_6():
    return qcore.build_hamiltonian(6, 1.05, 0.5)


@pytest.fixture(scope="session")
def doubled_chain_12(chaotic_chain_6):
    # one shared instance so the 4096-dim eigendecomposition happens once
    return qcore.doubled_hamiltonian(chaotic_chain_6)


@pytest.fixture(scope="session")
def tfd_beta1(chaotic_chain_6):
    return qcore.tfd_state(chaotic_chain_6, 1.0)
