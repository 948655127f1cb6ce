import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "ci", derandomize=True, deadline=None, max_examples=25,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("ci")


@pytest.fixture(scope="session")
def eigenpair():
    from critwave import spectral
    return spectral.solve_eigenpair()


@pytest.fixture(scope="session")
def inversions(eigenpair):
    from critwave import coercivity, groundstate as gs
    binv_psi = coercivity.invert_B(eigenpair.psi, "inverse_square")
    binv_phi = coercivity.invert_B(gs.phi, "log_inverse_square")
    return binv_psi, binv_phi


@pytest.fixture(scope="session")
def extractor(eigenpair):
    from critwave import wave_sim
    return wave_sim.ModulationExtractor(0.02, n=5000, psi=eigenpair)
