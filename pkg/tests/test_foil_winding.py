import math

import numpy as np
import pytest

from foilfem.foil_winding import (FoilWindingSpec, build_voltage_basis,
                                  coupling_vector, dc_resistance,
                                  winding_function_at)
from foilfem.materials import MaterialSpec

COPPER = MaterialSpec(sigma=60e6, lam=385.0, c_v=3.45e6)
INSULATION = MaterialSpec(sigma=0.0, lam=0.09, c_v=1.03e6)


def make_spec(**kw):
    args = dict(region="w", rho=(0.003, 0.013), z=(-0.01, 0.01), turns=30,
                fill_factor=0.8, conductor=COPPER, insulator=INSULATION, n_u=7)
    args.update(kw)
    return FoilWindingSpec(**args)


def test_winding_function_normalization():
    spec = make_spec(rho=(0.05, 1.0), z=(-1.0, 1.0))
    rho_unit = 1.0 / (2 * math.pi)
    chi = winding_function_at((rho_unit, 0.0), spec)
    assert np.linalg.norm(chi) == pytest.approx(1.0, rel=1e-14)
    # 1/rho law
    chi2 = winding_function_at((2 * rho_unit, 0.0), spec)
    assert np.linalg.norm(chi2) == pytest.approx(0.5, rel=1e-14)
    # closed-loop integral 2 pi rho * chi_phi = 1 at any rho
    for rho in (0.06, 0.3, 0.77):
        chi = winding_function_at((rho, 0.0), spec)
        assert 2 * math.pi * rho * chi[1] == pytest.approx(1.0, rel=1e-14)
    with pytest.raises(ValueError):
        winding_function_at((2.0, 0.0), spec)


def test_voltage_basis_partition_of_unity():
    spec = make_spec()
    for n_u in (2, 3, 7, 20):
        basis = build_voltage_basis(spec, n_u)
        rho = np.linspace(spec.rho[0], spec.rho[1], 101)
        vals = basis.eval(rho)
        assert vals.shape == (101, n_u)
        assert np.all(vals >= 0)
        assert np.allclose(vals.sum(axis=1), 1.0, atol=1e-12)
    # nodal interpolation property
    basis = build_voltage_basis(spec, 7)
    at_nodes = basis.eval(basis.nodes)
    assert np.allclose(at_nodes, np.eye(7), atol=1e-12)
    # spacing for the 7-function basis
    assert basis.spacing == pytest.approx((spec.rho[1] - spec.rho[0]) / 6, rel=1e-12)


def test_voltage_basis_needs_two_functions():
    spec = make_spec()
    with pytest.raises(ValueError):
        build_voltage_basis(spec, 1)
    with pytest.raises(ValueError):
        make_spec(n_u=1)


def test_coupling_vector_sums_to_turn_count():
    spec = make_spec()
    for n_u in (2, 3, 7, 20):
        basis = build_voltage_basis(spec, n_u)
        c = coupling_vector(basis, spec)
        assert c.sum() == pytest.approx(spec.turns, rel=1e-12)
    basis = build_voltage_basis(spec, 2)
    c = coupling_vector(basis, spec)
    assert np.allclose(c, [15.0, 15.0], rtol=1e-12)


def test_constant_voltage_function_gives_N_u0():
    # winding voltage for a spatially constant voltage function u0
    spec = make_spec()
    basis = build_voltage_basis(spec, 7)
    c = coupling_vector(basis, spec)
    u0 = 0.37
    assert c @ (u0 * np.ones(7)) == pytest.approx(spec.turns * u0, rel=1e-12)


def test_dc_resistance_single_turn_hand_value():
    # one turn centered at 10 mm, 0.1 mm conductor, 20 mm tall
    spec = FoilWindingSpec(region="w", rho=(0.01 - 5e-5, 0.01 + 5e-5),
                           z=(-0.01, 0.01), turns=1, fill_factor=1.0,
                           conductor=COPPER, insulator=INSULATION, n_u=2)
    disc, cont = dc_resistance(spec)
    expected = 2 * math.pi * 0.01 / (60e6 * 1e-4 * 0.02)
    assert disc == pytest.approx(expected, rel=1e-12)
    assert expected == pytest.approx(523.6e-6, rel=1e-3)


def test_dc_resistance_height_scaling():
    s1 = make_spec()
    s2 = make_spec(z=(-0.02, 0.02))
    assert dc_resistance(s2)[0] == pytest.approx(dc_resistance(s1)[0] / 2, rel=1e-12)


def test_dc_resistance_discrete_vs_continuous():
    for turns in (1, 3, 10, 30):
        spec = make_spec(turns=turns)
        disc, cont = dc_resistance(spec)
        assert abs(disc - cont) / cont <= 1.0 / (2 * turns ** 2) + 1e-12


def test_geometry_helpers_and_warnings():
    spec = make_spec()
    assert spec.turn_width == pytest.approx(0.01 / 30, rel=1e-12)
    assert spec.conductor_width == pytest.approx(0.8 * 0.01 / 30, rel=1e-12)
    centers = spec.turn_centers()
    assert len(centers) == 30
    assert centers[0] == pytest.approx(0.003 + 0.5 * 0.01 / 30, rel=1e-12)
    assert centers.sum() == pytest.approx(30 * 0.008, rel=1e-12)
    # a winding only a few turn-widths tall trips the aspect warning
    squat = make_spec(turns=4, rho=(0.003, 0.013), z=(0.0, 0.005))
    with pytest.warns(UserWarning, match="10 turn"):
        squat.check_assumptions()
    # conductor thicker than the skin depth trips the skin warning
    thick = FoilWindingSpec(region="w", rho=(0.01, 0.05), z=(0.0, 0.5), turns=2,
                            fill_factor=1.0, conductor=COPPER,
                            insulator=INSULATION, n_u=2)
    with pytest.warns(UserWarning, match="skin depth"):
        thick.check_assumptions(f=5000.0)
