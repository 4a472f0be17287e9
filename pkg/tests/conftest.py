import pytest

from casimirlab import CavityParams, FilmParams, NoiseModel
from casimirlab.config import default_config


@pytest.fixture
def film():
    return FilmParams(
        thickness_nm=14.0,
        lambda0_nm=280.0,
        h0_mT=10.0,
        tc0_K=1.5,
        rn_ohm=300.0,
        width_mK=1.0,
    )


@pytest.fixture
def cavity(film):
    return CavityParams(film=film)


@pytest.fixture
def quiet_noise():
    return NoiseModel(sigma_fast_uK=0.0, drift_uK_per_hr=0.0, seed=1)


@pytest.fixture
def noiseless_config(quiet_noise):
    return default_config(noise=quiet_noise, fields_mT=(7.2,), replications=1)
