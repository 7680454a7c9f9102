import math

import numpy as np
import pytest
import scipy.integrate

from foilfem import coupling, mqs
from foilfem.foil_winding import FoilWindingSpec, dc_resistance, foil_cut_current, foil_cut_currents
from foilfem.materials import MaterialSpec, TemperatureModel, homogenize
from foilfem.mesh import RegionRect, generate

COPPER = MaterialSpec(sigma=60e6, lam=385.0, c_v=3.45e6)
INSULATION = MaterialSpec(sigma=0.0, lam=0.09, c_v=1.03e6)
AIR = MaterialSpec(sigma=0.0, lam=0.026, c_v=1e3)


def make_setup(h=0.001, n_u=7, turns=30):
    spec = FoilWindingSpec(region="winding", rho=(0.003, 0.013), z=(-0.01, 0.01),
                           turns=turns, fill_factor=0.8,
                           conductor=COPPER, insulator=INSULATION, n_u=n_u)
    msh = generate([RegionRect("winding", spec.rho, spec.z)], h=h,
                   background="air", domain=((0.0, 0.023), (-0.02, 0.02)))
    props = {"air": AIR, "winding": homogenize(COPPER, INSULATION, 0.8)}
    asm = mqs.MagneticAssembler(msh, props, foil_windings=[spec])
    return msh, spec, asm


@pytest.fixture(scope="module")
def setup():
    msh, spec, asm = make_setup()
    return msh, spec, asm, asm.assemble()


def test_stiffness_annihilates_operator_kernel(setup):
    # the kernel field (constant rho*A_phi) is in the discrete space exactly
    _, _, _, system = setup
    ones = np.ones(system.num_nodes)
    resid = system.K @ ones
    scale = np.abs(system.K.data).max()
    assert np.abs(resid).max() <= 1e-12 * scale


def test_coupling_block_sparsity_confined_to_winding(setup):
    msh, _, _, system = setup
    X = system.windings[0].X.tocoo()
    winding_nodes = set(np.unique(msh.triangles[msh.triangles_in("winding")]))
    assert set(X.row[X.data != 0]) <= winding_nodes


def test_assembled_matrices_symmetric(setup):
    _, _, _, system = setup
    assert abs(system.K - system.K.T).max() == 0.0
    assert abs(system.M - system.M.T).max() == 0.0
    G = system.windings[0].G
    assert np.abs(G - G.T).max() == 0.0


def test_sigma_mass_total_against_volume_integral(setup):
    # p = rho represents constant A_phi = 1; the quadratic form then equals
    # the conductivity volume integral, which is analytic for the shell
    msh, spec, _, system = setup
    v = msh.nodes[:, 0].copy()
    total = v @ (system.M @ v)
    sigma_par = 0.8 * 60e6
    rho_avg = 0.5 * (spec.rho[0] + spec.rho[1])
    exact = sigma_par * 2 * math.pi * rho_avg * spec.width * spec.height
    assert total == pytest.approx(exact, rel=1e-12)


def test_gram_matrix_against_1d_quadrature():
    # G for n_u = 2 and constant sigma has a closed 1D integral
    msh, spec, asm = make_setup(h=0.0005, n_u=2)
    system = asm.assemble()
    sigma_par = 0.8 * 60e6
    rho0, rho1 = spec.rho
    W = rho1 - rho0

    def entry(i, j):
        def f(rho):
            xi = [(rho1 - rho) / W, (rho - rho0) / W]
            return xi[i] * xi[j] / rho
        val, _ = scipy.integrate.quad(f, rho0, rho1, epsabs=1e-14, epsrel=1e-13)
        return sigma_par * spec.height / (2 * math.pi) * val

    G = system.windings[0].G
    exact = np.array([[entry(0, 0), entry(0, 1)], [entry(1, 0), entry(1, 1)]])
    # element quadrature approximates the 1/rho weight
    assert np.allclose(G, exact, rtol=5e-6)


def test_dc_limit_matches_series_resistance(setup):
    _, spec, _, system = setup
    state = mqs.solve_frequency(system, 0.0, {"kind": "current", "I": 1.0})
    _, R_cont = dc_resistance(spec)
    assert abs(state.v[0]) == pytest.approx(R_cont, rel=0.01)


def test_zero_drive_gives_zero_state(setup):
    _, _, _, system = setup
    state = mqs.solve_frequency(system, 2 * math.pi * 50, {"kind": "current", "I": 0.0})
    assert np.abs(state.p).max() == 0.0
    assert np.abs(state.u[0]).max() == 0.0


def test_foil_cut_currents_uniform(setup):
    _, spec, _, system = setup
    for omega in (0.0, 2 * math.pi * 50):
        state = mqs.solve_frequency(system, omega, {"kind": "current", "I": 20.0})
        cuts = foil_cut_currents(system, state)
        assert np.abs(cuts - 20.0).max() / 20.0 < 1e-8
        # interpolated cut current at arbitrary stations
        for rho in np.linspace(spec.rho[0], spec.rho[1], 5):
            cut = foil_cut_current(system, state, spec, rho)
            assert abs(cut - 20.0) / 20.0 < 1e-8
    with pytest.raises(ValueError):
        foil_cut_current(system, state, spec, spec.rho[1] * 1.5)


def test_energy_identity_harmonic(setup):
    _, _, _, system = setup
    state = mqs.solve_frequency(system, 2 * math.pi * 50, {"kind": "current", "I": 15.0})
    h_e = coupling.losses_harmonic(system, state)
    P_joule = coupling.total_losses(system, h_e)
    P_in = mqs.input_power_harmonic(state)
    assert P_joule == pytest.approx(P_in, rel=1e-6)


def test_backward_euler_decay_dissipative(setup):
    _, _, _, system = setup
    st0 = mqs.solve_frequency(system, 2 * math.pi * 50, {"kind": "current", "I": 15.0})
    state = mqs.MagneticState(p=st0.p.real, u=[st0.u[0].real], i=[0.0], v=[0.0])
    stepper = mqs.TimeStepper(system, 1e-3, {"kind": "current", "I": 0.0})
    energy = [state.p @ (system.K @ state.p)]
    for _ in range(8):
        state = stepper.step(state, lambda t: 0.0)
        energy.append(state.p @ (system.K @ state.p))
    diffs = np.diff(energy)
    assert np.all(diffs <= 1e-12 * energy[0])


def test_time_domain_matches_frequency_domain(setup):
    _, _, _, system = setup
    omega = 2 * math.pi * 50
    amp = 15.0
    ref = mqs.solve_frequency(system, omega, {"kind": "current", "I": amp})
    spp = 200
    dt = 1.0 / (50.0 * spp)
    stepper = mqs.TimeStepper(system, dt, {"kind": "current", "I": amp})
    state = mqs.initial_state(system)
    window = []
    for k in range(5 * spp):
        state = stepper.step(state, lambda t: amp * math.cos(omega * t))
        if k >= 4 * spp:
            window.append(state)
    ts = np.array([s.t for s in window])
    v_hat = 2.0 * np.mean(np.array([s.v[0] for s in window]) * np.exp(-1j * omega * ts))
    assert abs(v_hat - ref.v[0]) / abs(ref.v[0]) < 0.03
    h_time = coupling.losses_time_domain(system, window)
    h_harm = coupling.losses_harmonic(system, ref)
    P_t = coupling.total_losses(system, h_time)
    P_h = coupling.total_losses(system, h_harm)
    assert abs(P_t - P_h) / P_h < 0.03


def pot_setup():
    from foilfem import config, decks, runner
    cfg = config.from_dict(decks.pot_transformer_deck())
    msh, asm, tsys, options, probes = runner.build_problem(cfg)
    return cfg, msh, asm


def test_open_secondary_and_turn_ratio():
    cfg, msh, asm = pot_setup()
    system = asm.assemble()
    cir = mqs.CircuitSpec(V_s=50.0, R1=1.0, R2=1e12)
    state = mqs.solve_frequency(system, cfg.omega, {"kind": "circuit", "circuit": cir})
    assert abs(state.i[1]) < 1e-6 * abs(state.i[0])
    ratio = abs(state.v[1]) / abs(state.v[0])
    assert ratio == pytest.approx(500 / 100, rel=0.05)


def test_circuit_cut_condition_and_ampere_turns():
    cfg, msh, asm = pot_setup()
    system = asm.assemble()
    state = mqs.solve_frequency(system, cfg.omega,
                                {"kind": "circuit", "circuit": cfg.drive.circuit})
    cuts = foil_cut_currents(system, state)
    assert np.abs(cuts - state.i[0]).max() / abs(state.i[0]) < 1e-8
    # the stranded source vector represents turns/area ampere-turns exactly
    blk = system.stranded[0]
    dens = blk.turns / blk.area
    assert dens * blk.area == pytest.approx(500, rel=1e-12)


def test_stranded_resistance_hand_value():
    # one turn of uniform current over a small rectangle: R = 2 pi rho_avg N^2/(ff sigma S)
    msh = generate([RegionRect("coil", (0.02, 0.026), (-0.02, 0.02))],
                   h=0.001, background="air", domain=((0.0, 0.04), (-0.04, 0.04)))
    spec = mqs.StrandedWindingSpec(region="coil", turns=500, fill_factor=0.8,
                                   conductor=COPPER, insulator=INSULATION)
    s, R = mqs.assemble_stranded(msh, spec)
    S = 0.006 * 0.04
    expected = 500 ** 2 * 2 * math.pi * 0.023 / (0.8 * 60e6 * S)
    assert R == pytest.approx(expected, rel=1e-12)
    # total source integral: s . p with p = rho equals N * volume-normalized flux weight
    rho = msh.nodes[:, 0]
    assert s @ rho == pytest.approx(2 * math.pi * 500 / S * 0.023 * S, rel=1e-9)


def resolved_ring_setup(omega, turns=1, h=0.0004):
    rho0, rho1 = 0.0095, 0.0105
    b = (rho1 - rho0) / turns
    regions = []
    tags = []
    for k in range(turns):
        tag = f"turn_{k:03d}"
        tags.append(tag)
        regions.append(RegionRect(tag, (rho0 + k * b, rho0 + (k + 1) * b),
                                  (-0.01, 0.01), h=(b / 2, None)))
    msh = generate(regions, h=h, background="air",
                   domain=((0.0, 0.02), (-0.02, 0.02)))
    spec = mqs.ResolvedWindingSpec(turn_regions=tuple(tags), conductor=COPPER)
    return mqs.solve_resolved_reference(msh, spec, omega, 1.0)


def test_resolved_single_turn_dc_resistance():
    state, system = resolved_ring_setup(0.0)
    # ln-formula for the azimuthal resistance of a solid ring
    R_exact = 2 * math.pi / (60e6 * 0.02 * math.log(0.0105 / 0.0095))
    assert abs(state.v[0]) == pytest.approx(R_exact, rel=0.01)
    # also within 1% of the thin-ring hand formula
    R_mid = 2 * math.pi * 0.01 / (60e6 * 0.001 * 0.02)
    assert abs(state.v[0]) == pytest.approx(R_mid, rel=0.01)


def test_resolved_turns_share_the_current():
    state, system = resolved_ring_setup(2 * math.pi * 50, turns=10)
    cuts = foil_cut_currents(system, state)
    assert np.abs(cuts - 1.0).max() < 1e-10
    assert len(cuts) == 10


def test_resolved_requires_two_elements_across():
    rho0, rho1 = 0.0095, 0.0105
    regions = [RegionRect("turn_000", (rho0, rho1), (-0.01, 0.01),
                          h=(rho1 - rho0, None))]
    msh = generate(regions, h=0.002, background="air",
                   domain=((0.0, 0.02), (-0.02, 0.02)))
    spec = mqs.ResolvedWindingSpec(turn_regions=("turn_000",), conductor=COPPER)
    with pytest.raises(ValueError, match="fewer than 2 elements"):
        mqs.solve_resolved_reference(msh, spec, 0.0, 1.0)


def test_singular_system_reports_failure():
    # a winding without conductivity makes the voltage block singular
    bad = MaterialSpec(sigma=0.0, lam=1.0, c_v=1.0)
    spec = FoilWindingSpec(region="winding", rho=(0.003, 0.013), z=(-0.01, 0.01),
                           turns=30, fill_factor=0.8, conductor=bad,
                           insulator=INSULATION, n_u=7)
    msh = generate([RegionRect("winding", spec.rho, spec.z)], h=0.002,
                   background="air", domain=((0.0, 0.023), (-0.02, 0.02)))
    props = {"air": AIR, "winding": homogenize(bad, INSULATION, 0.8)}
    asm = mqs.MagneticAssembler(msh, props, foil_windings=[spec])
    system = asm.assemble()
    with pytest.raises(RuntimeError, match="singular"):
        mqs.solve_frequency(system, 0.0, {"kind": "current", "I": 1.0})


def test_region_without_material_rejected():
    msh = generate([RegionRect("winding", (0.003, 0.013), (-0.01, 0.01))],
                   h=0.002, background="air", domain=((0.0, 0.023), (-0.02, 0.02)))
    with pytest.raises(ValueError, match="without material"):
        mqs.MagneticAssembler(msh, {"air": AIR})


def test_source_vector_matches_stranded_construction():
    # a uniform source density turns/area reproduces the stranded vector
    msh = generate([RegionRect("coil", (0.02, 0.026), (-0.02, 0.02))],
                   h=0.001, background="air", domain=((0.0, 0.04), (-0.04, 0.04)))
    spec = mqs.StrandedWindingSpec(region="coil", turns=500, fill_factor=0.8,
                                   conductor=COPPER, insulator=INSULATION)
    s, _ = mqs.assemble_stranded(msh, spec)
    props = {"air": AIR, "coil": AIR}
    system = mqs.MagneticAssembler(msh, props).assemble()
    area = msh.triangle_areas()[msh.triangles_in("coil")].sum()
    q = mqs.source_vector(system, {"coil": 500 / area})
    assert np.allclose(q, s, rtol=1e-12, atol=1e-15)
    # no source means a zero vector
    assert np.all(mqs.source_vector(system, {}) == 0.0)


def test_sigma_update_with_temperature():
    msh, spec, asm = make_setup(h=0.002)
    model = TemperatureModel(sigma_ref=60e6, alpha_ref=3.93e-3, T_ref=293.15)
    hot_cu = MaterialSpec(sigma=60e6, lam=385.0, c_v=3.45e6, temperature_model=model)
    spec_T = FoilWindingSpec(region="winding", rho=spec.rho, z=spec.z, turns=30,
                             fill_factor=0.8, conductor=hot_cu,
                             insulator=INSULATION, n_u=7)
    asm = mqs.MagneticAssembler(msh, {"air": AIR,
                                      "winding": homogenize(hot_cu, INSULATION, 0.8)},
                                foil_windings=[spec_T])
    T_cold = np.full(msh.num_triangles, 293.15)
    T_hot = np.full(msh.num_triangles, 393.15)
    sig_cold = asm.sigma_at(T_cold)
    sig_hot = asm.sigma_at(T_hot)
    w = msh.triangles_in("winding")
    assert sig_cold[w].max() == pytest.approx(0.8 * 60e6, rel=1e-12)
    assert sig_hot[w].max() == pytest.approx(0.8 * 60e6 / 1.393, rel=1e-12)
    air = msh.triangles_in("air")
    assert np.all(sig_cold[air] == 0.0)
