import numpy as np
import pytest

from etmvol.sv.model import McmcSettings, SvSpec
from etmvol.sv.sampler import sample_posterior
from etmvol.sv.simulate import simulate_sv

SV1_TRUTH = dict(mu=0.2, phi0=1.0, phi1=0.9, omega2=0.05)


@pytest.fixture(scope="session")
def sv1_returns():
    r, _ = simulate_sv("SV1", SV1_TRUTH, 300, seed=314)
    return r


@pytest.fixture(scope="session")
def sv1_posterior(sv1_returns):
    spec = SvSpec("SV1", mcmc=McmcSettings(burn_in=1000, retained=4000, seed=99))
    return sample_posterior(spec, sv1_returns)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240801)
