import numpy as np
import pytest

from quantum_tof.model import CatConfig, Gravity, Particle, as_validated, sodium


@pytest.fixture
def cat():
    """Sodium, sigma0 = 1 um, d = 50 um, detector 1 cm below, g = 9.8."""
    return as_validated(CatConfig())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_config(rng):
    return as_validated(
        CatConfig(
            particle=Particle(sodium().mass * rng.uniform(0.5, 4.0), "random"),
            sigma0=rng.uniform(0.5e-6, 3e-6),
            d=rng.uniform(0.0, 60e-6),
            c1=complex(rng.normal(), rng.normal()),
            c2=complex(rng.normal(), rng.normal()),
            gravity=Gravity(float(rng.choice([0.0, 9.8]))),
            detector_H=-rng.uniform(1e-3, 5e-2),
        )
    )
