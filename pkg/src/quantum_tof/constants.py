"""Physical constants in SI units, loaded from the bundled ``constants.json``.

The JSON file records where each number comes from; this module only exposes
the values as floats.
"""
import json
from importlib import resources

_TABLE = json.loads(resources.files(__package__).joinpath("constants.json").read_text())


def provenance():
    """Return ``{name: (value, source)}`` for every tabulated constant."""
    return {key: (entry["value"], entry["source"]) for key, entry in _TABLE.items()}


HBAR = float(_TABLE["hbar_J_s"]["value"])
K_B = float(_TABLE["boltzmann_J_per_K"]["value"])
AMU = float(_TABLE["atomic_mass_unit_kg"]["value"])
SODIUM23_MASS_U = float(_TABLE["sodium23_mass_u"]["value"])
SODIUM23_MASS = SODIUM23_MASS_U * AMU
G_EARTH = float(_TABLE["standard_gravity_m_s2"]["value"])
