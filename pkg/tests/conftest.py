import dataclasses

import pytest

from foilfem import config, decks
from foilfem.materials import MaterialSpec
from foilfem.foil_winding import FoilWindingSpec

COPPER = MaterialSpec(sigma=60e6, lam=385.0, c_v=3.45e6)
INSULATION = MaterialSpec(sigma=0.0, lam=0.09, c_v=1.03e6)


@pytest.fixture(scope="session")
def validation_cfg():
    return config.from_dict(decks.validation_deck())


@pytest.fixture(scope="session")
def validation_cfg_coarse():
    """Validation deck on a coarse mesh for tests that only need the physics."""
    cfg = config.from_dict(decks.validation_deck())
    return dataclasses.replace(cfg, mesh_h=0.0025)


@pytest.fixture(scope="session")
def pot_cfg():
    return config.from_dict(decks.pot_transformer_deck())


@pytest.fixture(scope="session")
def winding_spec():
    """The validation winding: 30 turns over [3, 13] mm, 20 mm tall."""
    return FoilWindingSpec(region="winding", rho=(0.003, 0.013), z=(-0.01, 0.01),
                           turns=30, fill_factor=0.8,
                           conductor=COPPER, insulator=INSULATION, n_u=7)
