"""Master-equation dissipators, time evolution, and steady-state detection."""

import numpy as np
import pytest

from rabispec.constants import from_ghz, from_mhz
from rabispec.dynamics import (
    BathChannel,
    ConfigurationError,
    DriveSpec,
    SteadyStateCriteria,
    SteadyStateTimeoutError,
    _Generator,
    bose_occupation,
    build_dissipators,
    default_dt,
    evolve,
    steady_state,
    tcpom_rhs,
    thermal_state,
    trace_distance,
)
from rabispec.models import SystemParams, eigensystem, label_dressed, rabi_hamiltonian
from rabispec.operators import fock_space

PAPER = SystemParams(omega_r=from_ghz(8.13), delta_gap=from_ghz(4.2),
                     i_p=500e-9, flux_offset=0.0, g=from_ghz(0.82))
SPACE = fock_space(6)


def paper_system(n_max=2):
    es = label_dressed(eigensystem(rabi_hamiltonian(PAPER, SPACE)), PAPER, SPACE,
                       n_max=n_max)
    return es


def paper_channels(temperature, gamma_r_mhz=1.0, gamma_qb_mhz=15.0):
    return (BathChannel("resonator_x", from_mhz(gamma_r_mhz), temperature),
            BathChannel("qubit_x", from_mhz(gamma_qb_mhz), temperature))


# ----------------------------------------------------------- occupation
def test_bose_occupation_zero_temperature():
    assert bose_occupation(from_ghz(8.13), 0.0) == 0.0


def test_bose_occupation_frozen_oracle():
    # direct high-precision evaluation with CODATA constants
    assert bose_occupation(from_ghz(8.13), 0.090) == pytest.approx(0.01327155866, rel=1e-8)
    assert bose_occupation(from_ghz(4.2), 0.090) == pytest.approx(0.1191893147, rel=1e-8)


def test_bose_occupation_domain():
    with pytest.raises(ValueError):
        bose_occupation(0.0, 0.1)
    with pytest.raises(ValueError):
        bose_occupation(-from_ghz(1.0), 0.1)
    assert bose_occupation(from_ghz(10000.0), 1e-6) == 0.0   # overflow guard


# ----------------------------------------------------------- validation
def test_channel_validation():
    with pytest.raises(ValueError):
        BathChannel("resonator_y", 1.0, 0.1)
    with pytest.raises(ValueError):
        BathChannel("qubit_x", -1.0, 0.1)
    with pytest.raises(ValueError):
        BathChannel("qubit_x", 1.0, -0.1)


def test_drive_validation_and_guard():
    with pytest.raises(ValueError):
        DriveSpec(omega_d=from_ghz(8.0), a_qb=-1.0)
    strong = DriveSpec(omega_d=from_ghz(8.0), a_qb=0.5 * PAPER.g)
    with pytest.warns(UserWarning):
        strong.warn_if_strong(PAPER)


# ----------------------------------------------------------- dissipators
def test_dissipators_zero_temperature_absorption_vanishes():
    es = paper_system()
    diss = build_dissipators(es, SPACE, paper_channels(0.0))
    for _, _, u in diss.channels:
        # columns below rows in energy are upward (absorbing) elements
        for i in range(es.dim):
            for j in range(es.dim):
                if es.energies[j] < es.energies[i]:
                    assert abs(u[i, j]) == 0.0


def test_dissipators_zero_rate_is_unitary():
    es = paper_system()
    diss = build_dissipators(es, SPACE, (BathChannel("qubit_x", 0.0, 0.1),))
    assert all(np.abs(u).max() == 0.0 for _, _, u in diss.channels)


def test_dissipators_drop_degenerate_elements():
    es = paper_system()
    diss = build_dissipators(es, SPACE, paper_channels(0.09))
    for _, _, u in diss.channels:
        assert np.abs(np.diag(u)).max() == 0.0


def test_damped_cavity_matches_closed_form():
    # g = 0, T = 0, single resonator channel: photon population decays at
    # exactly Gamma_r, matching the two-level Fock ladder closed form
    params = SystemParams(omega_r=from_ghz(8.13), delta_gap=from_ghz(4.2),
                          i_p=500e-9, flux_offset=0.0, g=0.0)
    space = fock_space(2)
    es = label_dressed(eigensystem(rabi_hamiltonian(params, space)), params, space,
                       n_max=0)
    gamma_r = from_mhz(5.0)
    diss = build_dissipators(es, space, (BathChannel("resonator_x", gamma_r, 0.0),))
    drive = DriveSpec(omega_d=from_ghz(8.13))
    # initial state |g,1>: eigenstate index by energy (g=0, delta<0: |e,0> below |g,1>)
    rho0 = np.zeros((4, 4), dtype=complex)
    idx = int(np.argmin(np.abs(es.energies - params.omega_r + params.omega_q / 2)))
    rho0[idx, idx] = 1.0
    t_end = 3.0 / gamma_r
    times, rhos = evolve(rho0, drive, diss, es, space, t_end=t_end, n_samples=60)
    n_of_t = np.array([r[idx, idx].real for r in rhos])
    expected = np.exp(-gamma_r * times)
    assert np.abs(n_of_t - expected).max() < 1e-6
    # fitted decay constant within 1% of Gamma_r
    fit = np.polyfit(times, np.log(n_of_t), 1)[0]
    assert abs(-fit / gamma_r - 1.0) < 0.01


# ------------------------------------------------------------------- rhs
def test_rhs_stationary_eigenstate():
    es = paper_system()
    diss = build_dissipators(es, SPACE, (BathChannel("qubit_x", 0.0, 0.0),))
    drive = DriveSpec(omega_d=from_ghz(8.0))
    rho = np.zeros((es.dim, es.dim), dtype=complex)
    rho[3, 3] = 1.0
    out = tcpom_rhs(rho, 1e-9, es, drive, diss, SPACE)
    assert np.abs(out).max() < 1e-6 * np.abs(es.energies).max()


def test_rhs_trace_free_and_hermiticity_preserving():
    es = paper_system()
    diss = build_dissipators(es, SPACE, paper_channels(0.09))
    drive = DriveSpec(omega_d=from_ghz(8.2), a_qb=from_mhz(12), a_r=from_mhz(12))
    rng = np.random.default_rng(7)
    m = rng.normal(size=(es.dim, es.dim)) + 1j * rng.normal(size=(es.dim, es.dim))
    rho = m @ m.conj().T
    rho /= np.trace(rho)
    out = tcpom_rhs(rho, 0.3e-9, es, drive, diss, SPACE)
    scale = np.linalg.norm(out)
    assert abs(np.trace(out)) / scale < 1e-12
    assert np.abs(out - out.conj().T).max() / scale < 1e-12


def test_rhs_matches_vectorized_generator():
    es = paper_system()
    diss = build_dissipators(es, SPACE, paper_channels(0.09))
    drive = DriveSpec(omega_d=from_ghz(8.2), a_qb=from_mhz(12), a_r=from_mhz(12))
    gen = _Generator(es, drive, diss, SPACE)
    rng = np.random.default_rng(11)
    m = rng.normal(size=(es.dim, es.dim)) + 1j * rng.normal(size=(es.dim, es.dim))
    rho = m @ m.conj().T
    rho /= np.trace(rho)
    t = 0.17e-9
    direct = tcpom_rhs(rho, t, es, drive, diss, SPACE)
    vectorized = gen.apply(t, rho.reshape(-1)).reshape(es.dim, es.dim)
    assert np.abs(direct - vectorized).max() / np.linalg.norm(direct) < 1e-12


def test_rhs_dimension_mismatch():
    es = paper_system()
    diss = build_dissipators(es, SPACE, paper_channels(0.09))
    drive = DriveSpec(omega_d=from_ghz(8.0))
    with pytest.raises(ValueError):
        tcpom_rhs(np.eye(4, dtype=complex), 0.0, es, drive, diss, SPACE)


# ----------------------------------------------------------------- evolve
def test_evolve_trace_and_hermiticity_preservation():
    es = paper_system()
    diss = build_dissipators(es, SPACE, paper_channels(0.09))
    drive = DriveSpec(omega_d=from_ghz(8.24), a_qb=from_mhz(12), a_r=from_mhz(12))
    rho0 = thermal_state(es, 0.09)
    t_end = 10e-9
    times, rhos = evolve(rho0, drive, diss, es, SPACE, t_end=t_end, n_samples=20)
    drift = abs(np.trace(rhos[-1]).real - 1.0)
    assert drift <= 1e-9 * (t_end / 1e-9)
    assert max(np.abs(r - r.conj().T).max() for r in rhos) <= 1e-10


def test_evolve_rejects_coarse_step():
    es = paper_system()
    diss = build_dissipators(es, SPACE, paper_channels(0.09))
    drive = DriveSpec(omega_d=from_ghz(8.0))
    with pytest.raises(ConfigurationError):
        evolve(thermal_state(es, 0.09), drive, diss, es, SPACE,
               t_end=1e-9, dt=10 * default_dt(es, drive))


def test_evolve_thermal_state_is_stationary():
    es = paper_system()
    diss = build_dissipators(es, SPACE, paper_channels(0.09))
    drive = DriveSpec(omega_d=from_ghz(8.0))   # zero amplitudes
    rho0 = thermal_state(es, 0.09)
    _, rhos = evolve(rho0, drive, diss, es, SPACE, t_end=5e-9, n_samples=10)
    assert trace_distance(rhos[-1], rho0) < 1e-6


def test_rk4_convergence_order():
    # halving dt must shrink the endpoint error by >= 12x (4th order gives 16)
    es = paper_system()
    diss = build_dissipators(es, SPACE, paper_channels(0.09))
    drive = DriveSpec(omega_d=from_ghz(8.24), a_qb=from_mhz(12), a_r=from_mhz(12))
    rho0 = thermal_state(es, 0.09)
    t_end = 1.0e-9
    dt0 = default_dt(es, drive)
    ends = {}
    for factor in (1, 2, 8):
        dt = dt0 / factor
        steps = int(round(t_end / dt0)) * factor
        _, rhos = evolve(rho0, drive, diss, es, SPACE, t_end=steps * dt, dt=dt,
                         n_samples=2)
        ends[factor] = rhos[-1]
    err_coarse = trace_distance(ends[1], ends[8])
    err_fine = trace_distance(ends[2], ends[8])
    assert err_coarse / err_fine >= 12.0


def test_driven_population_transfer_regimes():
    # resonant drive on the ground-to-first-doublet transition starting from
    # the qubit-like excited state: strong drive shows Rabi-style population
    # oscillations, weak drive relaxes smoothly (dissipation dominates)
    es = paper_system()
    diss = build_dissipators(es, SPACE, paper_channels(0.09, gamma_r_mhz=0.1))
    rho0 = np.zeros((es.dim, es.dim), dtype=complex)
    rho0[es.label_index("1-"), es.label_index("1-")] = 1.0
    omega_d = from_ghz(4.12)   # near the ground-to-(1,-) transition
    amplitudes = {}
    for a_mhz in (90.0, 12.0):
        drive = DriveSpec(omega_d=omega_d, a_qb=from_mhz(a_mhz), a_r=from_mhz(a_mhz))
        times, rhos = evolve(rho0, drive, diss, es, SPACE, t_end=150e-9,
                             n_samples=600)
        pg = np.array([r[0, 0].real for r in rhos])
        # oscillation amplitude = residual range after removing a 20 ns trend
        win = max(1, int(20e-9 / (times[1] - times[0])))
        trend = np.convolve(pg, np.ones(win) / win, mode="same")
        resid = (pg - trend)[win:-win]
        amplitudes[a_mhz] = resid.max() - resid.min()
    assert amplitudes[90.0] > 0.05
    assert amplitudes[12.0] < 0.03
    assert amplitudes[90.0] > 3.0 * amplitudes[12.0]


def test_longitudinal_drive_activates_same_parity_transition():
    # sigma_z driving commutes with the parity operator, so it connects
    # same-parity states: resonant with (1,-)->(1,+) it moves population
    # where transverse driving at the same frequency cannot
    es = paper_system()
    diss = build_dissipators(es, SPACE, paper_channels(0.0, gamma_r_mhz=0.0,
                                                       gamma_qb_mhz=0.0))
    i_lo, i_hi = es.label_index("1-"), es.label_index("1+")
    omega_d = es.energies[i_hi] - es.energies[i_lo]
    rho0 = np.zeros((es.dim, es.dim), dtype=complex)
    rho0[i_lo, i_lo] = 1.0
    t_end = 60e-9
    long_drive = DriveSpec(omega_d=omega_d, a_z=from_mhz(40))
    _, rhos = evolve(rho0, long_drive, diss, es, SPACE, t_end=t_end, n_samples=40)
    transferred = max(r[i_hi, i_hi].real for r in rhos)
    assert transferred > 0.5

    trans_drive = DriveSpec(omega_d=omega_d, a_qb=from_mhz(40), a_r=from_mhz(40))
    _, rhos_t = evolve(rho0, trans_drive, diss, es, SPACE, t_end=t_end, n_samples=40)
    assert max(r[i_hi, i_hi].real for r in rhos_t) < 1e-3


def test_ohmic_channel_scales_linearly():
    es = paper_system()
    gap = es.energies[2] - es.energies[0]
    flat = BathChannel("qubit_x", from_mhz(5.0), 0.05)
    ohmic_at_gap = BathChannel("qubit_x", from_mhz(5.0), 0.05,
                               spectral_shape="ohmic", ohmic_reference=gap)
    u_flat = build_dissipators(es, SPACE, (flat,)).channels[0][2]
    u_ohm = build_dissipators(es, SPACE, (ohmic_at_gap,)).channels[0][2]
    # matches the flat rate exactly at the reference transition
    assert u_ohm[0, 2] == pytest.approx(u_flat[0, 2], rel=1e-12)
    # and scales linearly elsewhere
    gap_01 = es.energies[1] - es.energies[0]
    assert abs(u_ohm[0, 1]) == pytest.approx(abs(u_flat[0, 1]) * gap_01 / gap,
                                             rel=1e-12)
    with pytest.raises(ValueError):
        BathChannel("qubit_x", 1.0, 0.0, spectral_shape="ohmic")


# ---------------------------------------------------------- thermal state
def test_thermal_state_zero_temperature():
    es = paper_system()
    rho = thermal_state(es, 0.0)
    assert rho[0, 0].real == 1.0
    assert np.abs(rho).sum() == 1.0


def test_thermal_state_boltzmann_ratio():
    # decoupled system: first excited state sits exactly Delta above ground
    params = SystemParams(omega_r=from_ghz(8.13), delta_gap=from_ghz(4.2),
                          i_p=500e-9, flux_offset=0.0, g=0.0)
    es = eigensystem(rabi_hamiltonian(params, SPACE))
    rho = thermal_state(es, 0.090)
    ratio = rho[1, 1].real / rho[0, 0].real
    assert ratio == pytest.approx(0.1064961156, rel=1e-8)   # exp(-h 4.2GHz/kB 90mK)


def test_thermal_state_high_temperature_is_uniform():
    es = paper_system()
    rho = thermal_state(es, 1e6)
    pops = np.diag(rho).real
    assert pops.max() / pops.min() < 1.01


# ----------------------------------------------------------- steady state
def test_steady_state_zero_drive_reaches_gibbs():
    # detailed balance: the flat-rate generator holds the Gibbs state exactly;
    # faster-than-paper rates keep the attraction test quick
    es = paper_system()
    temperature = 0.09
    diss = build_dissipators(es, SPACE, paper_channels(temperature,
                                                       gamma_r_mhz=10.0))
    drive = DriveSpec(omega_d=from_ghz(8.0))
    rho0 = thermal_state(es, 0.0)   # start far from the target
    rho, diag = steady_state(rho0, drive, diss, es, SPACE,
                             SteadyStateCriteria(window=50, rel_tol=1e-7))
    assert diag.converged
    assert trace_distance(rho, thermal_state(es, temperature)) < 1e-4


def test_steady_state_requires_positive_drive_frequency():
    es = paper_system()
    diss = build_dissipators(es, SPACE, paper_channels(0.09))
    with pytest.raises(ConfigurationError):
        steady_state(thermal_state(es, 0.09), DriveSpec(omega_d=0.0), diss,
                     es, SPACE)


def test_steady_state_timeout_carries_diagnostics():
    es = paper_system()
    diss = build_dissipators(es, SPACE, paper_channels(0.09))
    drive = DriveSpec(omega_d=from_ghz(8.24), a_qb=from_mhz(12), a_r=from_mhz(12))
    rho0 = thermal_state(es, 0.0)
    criteria = SteadyStateCriteria(window=10, rel_tol=1e-12, max_time=50e-9)
    with pytest.raises(SteadyStateTimeoutError) as info:
        steady_state(rho0, drive, diss, es, SPACE, criteria)
    assert not info.value.diagnostics.converged
    assert info.value.diagnostics.windows_used > 0


def test_steady_state_diagnostics_fields():
    es = paper_system()
    diss = build_dissipators(es, SPACE, paper_channels(0.09))
    drive = DriveSpec(omega_d=from_ghz(8.24), a_qb=from_mhz(12), a_r=from_mhz(12))
    rho, diag = steady_state(thermal_state(es, 0.09), drive, diss, es, SPACE,
                             SteadyStateCriteria(rel_tol=1e-5))
    assert diag.converged
    assert diag.steps_per_period >= 20
    assert abs(np.trace(rho).real - 1.0) < 1e-9
    # TCL2 does not guarantee positivity; the defect is reported, not asserted
    assert diag.min_eigenvalue > -1e-3
