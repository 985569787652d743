"""Observables, sweeps, transduction, and grid-search calibration."""

import numpy as np
import pytest

from rabispec.constants import PHI_0, from_ghz, from_mhz
from rabispec.dynamics import BathChannel, DriveSpec, SteadyStateCriteria, thermal_state
from rabispec.models import SystemParams, eigensystem, label_dressed, rabi_hamiltonian
from rabispec.operators import fock_space
from rabispec.spectroscopy import (
    CSV_HEADER,
    SweepConfig,
    TransductionMap,
    calibrate,
    excited_probability,
    ground_population,
    line_trace,
    observable_sigma_z,
    qubit_excited_population,
    sweep,
    transduce,
)

PAPER = SystemParams(omega_r=from_ghz(8.13), delta_gap=from_ghz(4.2),
                     i_p=500e-9, flux_offset=0.0, g=from_ghz(0.82))
SPACE = fock_space(6)


def labeled(params=PAPER, space=SPACE, n_max=2):
    return label_dressed(eigensystem(rabi_hamiltonian(params, space)), params,
                         space, n_max=n_max, enforce_validity=False)


# ------------------------------------------------------------- observables
def test_sigma_z_pure_ground_sweet_spot():
    es = labeled()
    rho = thermal_state(es, 0.0)
    assert observable_sigma_z(rho, es, PAPER, SPACE) == pytest.approx(0.0, abs=1e-6)


def test_sigma_z_pure_ground_far_detuned():
    params = PAPER.at_flux(50e-3 * PHI_0)   # large positive bias: theta_q -> 0
    es = labeled(params, n_max=1)
    rho = thermal_state(es, 0.0)
    assert observable_sigma_z(rho, es, params, SPACE) == pytest.approx(-1.0, abs=1e-2)


def test_sigma_z_mixed_state_formula():
    # decoupled qubit mixture: Tr(rho sigma_z_flux) = cos(theta)(p1 - p0)
    params = SystemParams(omega_r=from_ghz(8.13), delta_gap=from_ghz(4.2),
                          i_p=500e-9, flux_offset=0.7e-3 * PHI_0, g=0.0)
    es = eigensystem(rabi_hamiltonian(params, SPACE))
    p0, p1 = 0.8, 0.2
    rho = np.zeros((es.dim, es.dim), dtype=complex)
    rho[0, 0] = p0
    rho[1, 1] = p1   # first excited at g=0, delta<0 is the qubit state
    value = observable_sigma_z(rho, es, params, SPACE)
    assert value == pytest.approx(np.cos(params.theta_q) * (p1 - p0), abs=1e-9)


def test_excited_probability_limits():
    es = labeled()
    rho_g = thermal_state(es, 0.0)
    assert excited_probability(rho_g) == pytest.approx(0.0)
    rho_1m = np.zeros_like(rho_g)
    rho_1m[1, 1] = 1.0
    assert excited_probability(rho_1m) == pytest.approx(1.0)
    rho_th = thermal_state(es, 0.09)
    assert excited_probability(rho_th) == pytest.approx(
        1.0 - ground_population(rho_th) ** 2, abs=1e-12)


def test_qubit_excited_population_bare_states():
    params = SystemParams(omega_r=from_ghz(8.13), delta_gap=from_ghz(4.2),
                          i_p=500e-9, flux_offset=0.0, g=0.0)
    es = eigensystem(rabi_hamiltonian(params, SPACE))
    rho = np.zeros((es.dim, es.dim), dtype=complex)
    rho[1, 1] = 1.0   # |e,0> at g = 0
    assert qubit_excited_population(rho, es, SPACE) == pytest.approx(1.0, abs=1e-9)


# ------------------------------------------------------------- transduction
def test_transduce_affine():
    tmap = TransductionMap(scale=-120.0, offset=50.0)
    assert transduce(0.0, tmap) == 50.0
    assert transduce(0.1, TransductionMap(scale=0.0, offset=50.0)) == 50.0
    assert transduce(0.1, tmap) == pytest.approx(38.0)


# ------------------------------------------------------------------ sweeps
def fast_sweep_config(drive_points=2, flux_mphi0=(0.0,), a_mhz=10.0,
                      temperature=0.09, n_fock=4):
    freqs = tuple(from_ghz(f) for f in np.linspace(8.1, 8.4, max(drive_points, 1)))
    return SweepConfig(
        params=PAPER, n_fock=n_fock,
        flux_offsets=tuple(x * 1e-3 * PHI_0 for x in flux_mphi0),
        drive_freqs=freqs[:drive_points] if drive_points else (),
        channels=(BathChannel("resonator_x", from_mhz(10.0), temperature),
                  BathChannel("qubit_x", from_mhz(40.0), temperature)),
        drive=DriveSpec(omega_d=freqs[0], a_qb=from_mhz(a_mhz), a_r=from_mhz(a_mhz)),
        criteria=SteadyStateCriteria(window=20, rel_tol=1e-5, max_time=5e-6),
        n_labeled=min(2, n_fock - 2),
    )


def test_sweep_axis_validation():
    with pytest.raises(ValueError):
        fast_sweep_config(drive_points=0)
    cfg = fast_sweep_config(drive_points=3)
    bad = tuple(reversed(cfg.drive_freqs[:2])) + (cfg.drive_freqs[2],)
    with pytest.raises(ValueError):
        SweepConfig(params=cfg.params, n_fock=cfg.n_fock,
                    flux_offsets=cfg.flux_offsets, drive_freqs=bad,
                    channels=cfg.channels, drive=cfg.drive)


def test_zero_drive_point_returns_thermal_observables():
    cfg = fast_sweep_config(drive_points=1, a_mhz=0.0)
    result = sweep(cfg)
    rec = result.records[0]
    space = fock_space(cfg.n_fock)
    es = labeled(PAPER, space=space)
    rho_th = thermal_state(es, 0.09)
    assert rec.converged
    assert rec.pop_g == pytest.approx(ground_population(rho_th), abs=1e-6)
    assert rec.excited_prob == pytest.approx(excited_probability(rho_th), abs=1e-6)
    assert rec.pop_1m == pytest.approx(rho_th[1, 1].real, abs=1e-6)


def test_sweep_deterministic_and_thread_invariant():
    cfg = fast_sweep_config(drive_points=2, a_mhz=10.0)
    r1 = sweep(cfg)
    r2 = sweep(cfg)
    r4 = sweep(cfg, threads=2)
    for a, b in ((r1, r2), (r1, r4)):
        for ra, rb in zip(a.records, b.records):
            assert ra.sigma_z == rb.sigma_z
            assert ra.pop_g == rb.pop_g
            assert ra.p_switch == rb.p_switch


def test_sweep_records_failures_in_place():
    cfg = fast_sweep_config(drive_points=2)
    starved = SweepConfig(params=cfg.params, n_fock=cfg.n_fock,
                          flux_offsets=cfg.flux_offsets,
                          drive_freqs=cfg.drive_freqs, channels=cfg.channels,
                          drive=cfg.drive,
                          criteria=SteadyStateCriteria(window=10, rel_tol=1e-14,
                                                       max_time=20e-9),
                          n_labeled=2)
    result = sweep(starved)
    assert len(result.records) == 2
    assert all(not r.converged and r.error for r in result.records)


def test_line_trace_requires_single_flux():
    cfg = fast_sweep_config(flux_mphi0=(0.0, 0.5))
    with pytest.raises(ValueError):
        line_trace(cfg)


def test_csv_schema(tmp_path):
    cfg = fast_sweep_config(drive_points=2)
    result = sweep(cfg)
    out = tmp_path / "trace.csv"
    result.to_csv(out)
    lines = out.read_text().splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    assert len(lines) == 1 + len(result.records)
    result.write_metadata(tmp_path / "trace.meta.json")
    assert (tmp_path / "trace.meta.json").exists()


# -------------------------------------------------------------- calibration
def synthetic_setup():
    cfg = fast_sweep_config(drive_points=3, a_mhz=10.0, n_fock=3)
    truth = {"gamma_qb": from_mhz(40.0), "temperature": 0.09}
    base = sweep(cfg)
    tmap = cfg.transduction
    freqs = np.array([w / (2 * np.pi * 1e9) for w in cfg.drive_freqs])
    values = np.array([transduce(r.qubit_excited, tmap) for r in base.records])
    grids = {"gamma_qb": [from_mhz(20.0), from_mhz(40.0), from_mhz(80.0)],
             "temperature": [0.06, 0.09, 0.14]}
    return cfg, truth, freqs, values, grids


def test_calibrate_recovers_generating_parameters():
    cfg, truth, freqs, values, grids = synthetic_setup()
    result = calibrate(cfg, freqs, values, grids)
    assert result.best["gamma_qb"] == pytest.approx(truth["gamma_qb"])
    assert result.best["temperature"] == pytest.approx(truth["temperature"])
    assert result.residual == pytest.approx(0.0, abs=1e-18)
    assert len(result.landscape) == 9


def test_calibrate_noise_recovery_within_one_step():
    # 1% additive noise (of the trace span), ten seeds: the recovered pair
    # stays within one grid step of the truth
    cfg, truth, freqs, values, grids = synthetic_setup()
    span = values.max() - values.min()
    qb_grid = grids["gamma_qb"]
    t_grid = grids["temperature"]
    for seed in range(10):
        rng = np.random.default_rng(seed)
        noisy = values + 0.01 * span * rng.standard_normal(values.shape)
        best = calibrate(cfg, freqs, noisy, grids).best
        i_qb = qb_grid.index(best["gamma_qb"])
        i_t = t_grid.index(best["temperature"])
        assert abs(i_qb - qb_grid.index(truth["gamma_qb"])) <= 1
        assert abs(i_t - t_grid.index(truth["temperature"])) <= 1


def test_calibrate_scale_offset_grids():
    cfg, truth, freqs, values, grids = synthetic_setup()
    grids = {"gamma_qb": [truth["gamma_qb"]],
             "scale": [-100.0, -50.0], "offset": [50.0, 40.0]}
    result = calibrate(cfg, freqs, values, grids)
    assert result.best["scale"] == -100.0
    assert result.best["offset"] == 50.0


def test_calibrate_rejects_bad_grids():
    cfg, _, freqs, values, _ = synthetic_setup()
    with pytest.raises(ValueError):
        calibrate(cfg, freqs, values, {"gamma_qb": []})
    with pytest.raises(ValueError):
        calibrate(cfg, freqs, values, {"flux": [1.0]})
