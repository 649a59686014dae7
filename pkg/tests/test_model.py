import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from quantum_tof import constants
from quantum_tof.model import (
    CatConfig,
    Gravity,
    InvalidTimeGrid,
    NegativeGravity,
    NegativeSeparation,
    NonPositiveMass,
    NonPositiveWidth,
    Particle,
    TimeGrid,
    ZeroAmplitudes,
    as_validated,
    cat_norm,
    sodium,
)


def test_sodium_mass():
    m = sodium().mass
    assert m == pytest.approx(3.8175e-26, rel=1e-4)
    assert m == pytest.approx(22.98977 * 1.660539e-27, rel=1e-6)
    assert math.isfinite(m / constants.HBAR) and m / constants.HBAR > 0


def test_constants_provenance_recorded():
    notes = constants.provenance()
    assert notes
    for value, source in notes.values():
        assert float(value) > 0 and source


def test_reference_config_is_valid_with_unit_norm(cat):
    assert cat.norm == pytest.approx(1.0, abs=1e-15)


def test_zero_separation_norm():
    assert as_validated(CatConfig(d=0.0)).norm == pytest.approx(1 / math.sqrt(2), rel=1e-15)


@pytest.mark.parametrize(
    "changes, error",
    [
        (dict(sigma0=-1e-6), NonPositiveWidth),
        (dict(sigma0=0.0), NonPositiveWidth),
        (dict(d=-1e-6), NegativeSeparation),
        (dict(c1=0.0, c2=0.0), ZeroAmplitudes),
    ],
)
def test_invalid_configs(changes, error):
    with pytest.raises(error):
        as_validated(CatConfig(**changes))


def test_invalid_particle_and_gravity():
    with pytest.raises(NonPositiveMass):
        Particle(0.0)
    with pytest.raises(NegativeGravity):
        Gravity(-1.0)
    assert Gravity(0.0).g == 0.0


def test_error_codes_are_machine_readable():
    with pytest.raises(NonPositiveWidth) as info:
        as_validated(CatConfig(sigma0=-1e-6))
    assert info.value.code == "NonPositiveWidth"


def test_norm_tracks_replacement(cat):
    closer = cat.replace(d=1e-6)
    assert closer.norm == pytest.approx(1 / math.sqrt(1 + math.exp(-1 / 8)), rel=1e-14)


@given(
    sigma0=st.floats(1e-7, 1e-5),
    d=st.floats(0.0, 1e-4),
    a=st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
    b=st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
)
def test_cat_norm_matches_quadrature(sigma0, d, a, b):
    if abs(a) < 1e-3 and abs(b) < 1e-3:
        return
    try:
        n = cat_norm(sigma0, d, a, b)
    except ZeroAmplitudes:
        return
    z = np.linspace(-d - 12 * sigma0, 12 * sigma0, 20001)
    g = lambda c: (2 * np.pi * sigma0**2) ** -0.25 * np.exp(-((z - c) ** 2) / (4 * sigma0**2))
    psi = n * (a * g(0.0) + b * g(-d))
    total = np.trapezoid(np.abs(psi) ** 2, z)
    if abs(a + b) < 1e-3 * (abs(a) + abs(b)) and d < sigma0:
        return  # near-cancelling superposition; quadrature loses accuracy
    assert total == pytest.approx(1.0, rel=1e-6)


def test_time_grid():
    g = TimeGrid(0.0, 1.0, 11)
    assert g.dt == pytest.approx(0.1)
    assert np.allclose(np.diff(g.times), 0.1)
    for bad in ((1.0, 0.5, 10), (-1.0, 1.0, 10), (0.0, 1.0, 1)):
        with pytest.raises(InvalidTimeGrid):
            TimeGrid(*bad)
