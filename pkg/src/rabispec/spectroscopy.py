"""Steady-state spectroscopy over (flux, drive frequency) grids.

Per grid point: rebuild the system at that flux, diagonalize, label dressed
states, build dissipators, relax the driven system to its period-averaged
steady state, and record experiment-facing observables.  Failed points are
recorded in place (error marker), never dropped.
"""

import csv
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from ._version import __version__ as _version
from .constants import to_ghz, to_mphi0
from .dynamics import (
    BathChannel,
    DriveSpec,
    SteadyStateCriteria,
    SteadyStateTimeoutError,
    build_dissipators,
    steady_state,
    thermal_state,
)
from .models import SystemParams, eigensystem, label_dressed, rabi_hamiltonian
from .operators import HilbertSpace, pauli

__all__ = [
    "TransductionMap",
    "transduce",
    "observable_sigma_z",
    "ground_population",
    "excited_probability",
    "qubit_excited_population",
    "SweepConfig",
    "PointRecord",
    "SweepResult",
    "sweep",
    "line_trace",
    "CalibrationResult",
    "calibrate",
    "CSV_HEADER",
]

CSV_HEADER = ("flux_mPhi0", "omega_d_GHz", "sigma_z", "excited_prob",
              "pop_g", "pop_1m", "pop_1p", "pop_2m", "pop_2p",
              "p_switch", "converged", "windows", "residual")


@dataclass(frozen=True)
class TransductionMap:
    """Affine map from a qubit observable to SQUID switching probability (%).

    The readout transfers eigenstate populations adiabatically away from the
    symmetry point, so the transduced value is the qubit excitation measure;
    a negative scale makes qubit cooling raise the switching probability.
    """

    scale: float = -100.0
    offset: float = 50.0


def transduce(value: float, tmap: TransductionMap) -> float:
    """P_switch = offset + scale * value, in percent."""
    return tmap.offset + tmap.scale * value


def _eigenbasis_op(op_lab: np.ndarray, es) -> np.ndarray:
    return es.states.conj().T @ op_lab @ es.states


def observable_sigma_z(rho: np.ndarray, es, params: SystemParams,
                       space: HilbertSpace) -> float:
    """Persistent-current expectation Tr(rho sigma_z^flux).

    sigma_z in the flux basis is the energy-basis combination
    cos(theta_q) sigma_z - sin(theta_q) sigma_x (the same combination that
    couples to the resonator), so a pure qubit energy eigenstate gives
    -+cos(theta_q) and a diagonal qubit mixture gives cos(theta_q)(p1 - p0).
    """
    th = params.theta_q
    op = np.cos(th) * pauli(space, "z") - np.sin(th) * pauli(space, "x")
    return float(np.trace(rho @ _eigenbasis_op(op, es)).real)


def ground_population(rho: np.ndarray) -> float:
    """<0,g|rho|0,g>: population of the dressed ground state (eigenbasis)."""
    return float(rho[0, 0].real)


def excited_probability(rho: np.ndarray) -> float:
    """1 - <0,g|rho|0,g>^2, the squared-population convention of the z-maps.

    The unsquared population is exported alongside (pop_g column) so either
    convention can be plotted.
    """
    return float(1.0 - ground_population(rho) ** 2)


def qubit_excited_population(rho: np.ndarray, es, space: HilbertSpace) -> float:
    """Population of the bare-qubit excited manifold, Tr(rho |e><e| x I)."""
    proj = 0.5 * (np.eye(space.dim, dtype=complex) + pauli(space, "z"))
    return float(np.trace(rho @ _eigenbasis_op(proj, es)).real)


@dataclass(frozen=True)
class SweepConfig:
    """Grid specification for steady-state spectroscopy."""

    params: SystemParams                  # template; flux_offset overridden per point
    n_fock: int
    flux_offsets: tuple                   # Wb
    drive_freqs: tuple                    # rad/s
    channels: tuple                       # BathChannel, temperature shared
    drive: DriveSpec                      # omega_d overridden per point
    criteria: SteadyStateCriteria = SteadyStateCriteria()
    transduction: TransductionMap = TransductionMap()
    n_labeled: int = 2

    def __post_init__(self):
        if len(self.flux_offsets) == 0 or len(self.drive_freqs) == 0:
            raise ValueError("sweep axes must be non-empty")
        for name, axis in (("flux_offsets", self.flux_offsets),
                           ("drive_freqs", self.drive_freqs)):
            diffs = np.diff(np.asarray(axis, dtype=float))
            if len(diffs) and not (np.all(diffs > 0) or np.all(diffs < 0)):
                raise ValueError(f"{name} must be monotone")


@dataclass(frozen=True)
class PointRecord:
    flux_offset: float
    omega_d: float
    sigma_z: float = np.nan
    excited_prob: float = np.nan
    pop_g: float = np.nan
    pop_1m: float = np.nan
    pop_1p: float = np.nan
    pop_2m: float = np.nan
    pop_2p: float = np.nan
    qubit_excited: float = np.nan
    p_switch: float = np.nan
    converged: bool = False
    windows: int = 0
    residual: float = np.nan
    error: str = ""


@dataclass
class SweepResult:
    records: list
    metadata: dict = field(default_factory=dict)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_HEADER)
            for r in self.records:
                writer.writerow([
                    f"{to_mphi0(r.flux_offset):.9g}",
                    f"{to_ghz(r.omega_d):.9g}",
                    f"{r.sigma_z:.9g}", f"{r.excited_prob:.9g}",
                    f"{r.pop_g:.9g}", f"{r.pop_1m:.9g}", f"{r.pop_1p:.9g}",
                    f"{r.pop_2m:.9g}", f"{r.pop_2p:.9g}",
                    f"{r.p_switch:.9g}",
                    "true" if r.converged else "false",
                    r.windows, f"{r.residual:.9g}",
                ])

    def write_metadata(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.metadata, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _solve_point(config: SweepConfig, flux: float, omega_d: float) -> PointRecord:
    space = HilbertSpace(n_fock=config.n_fock)
    params = config.params.at_flux(flux)
    es = label_dressed(eigensystem(rabi_hamiltonian(params, space)), params, space,
                       n_max=config.n_labeled, enforce_validity=False)
    diss = build_dissipators(es, space, config.channels)
    drive = replace(config.drive, omega_d=omega_d)
    drive.warn_if_strong(params)
    temperature = config.channels[0].temperature if config.channels else 0.0
    rho0 = thermal_state(es, temperature)
    try:
        rho, diag = steady_state(rho0, drive, diss, es, space, config.criteria)
    except SteadyStateTimeoutError as exc:
        d = exc.diagnostics
        return PointRecord(flux_offset=flux, omega_d=omega_d, converged=False,
                           windows=d.windows_used, residual=d.residual,
                           error=str(exc))
    pops = {lbl: float(rho[es.label_index(lbl), es.label_index(lbl)].real)
            for lbl in ("1-", "1+", "2-", "2+") if lbl in (es.labels or [])}
    qe = qubit_excited_population(rho, es, space)
    return PointRecord(
        flux_offset=flux, omega_d=omega_d,
        sigma_z=observable_sigma_z(rho, es, params, space),
        excited_prob=excited_probability(rho),
        pop_g=ground_population(rho),
        pop_1m=pops.get("1-", np.nan), pop_1p=pops.get("1+", np.nan),
        pop_2m=pops.get("2-", np.nan), pop_2p=pops.get("2+", np.nan),
        qubit_excited=qe,
        p_switch=transduce(qe, config.transduction),
        converged=diag.converged, windows=diag.windows_used,
        residual=diag.residual)


def sweep(config: SweepConfig, threads: int = 1) -> SweepResult:
    """Steady-state observables over the (flux, drive frequency) grid.

    Deterministic: identical configs produce identical results regardless of
    the thread count (points are independent; output is sorted by
    (flux, omega_d)).  Per-point failures are recorded, not raised.
    """
    t0 = time.time()
    points = [(flux, wd) for flux in config.flux_offsets for wd in config.drive_freqs]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(lambda p: _solve_point(config, *p), points))
    else:
        records = [_solve_point(config, *p) for p in points]
    records.sort(key=lambda r: (r.flux_offset, r.omega_d))
    meta = {
        "version": _version,
        "wall_time_s": time.time() - t0,
        "n_flux": len(config.flux_offsets),
        "n_freq": len(config.drive_freqs),
        "threads": threads,
    }
    return SweepResult(records=records, metadata=meta)


def line_trace(config: SweepConfig, threads: int = 1) -> SweepResult:
    """Sweep specialization for a single flux: a 1D (omega_d, observable) trace."""
    if len(config.flux_offsets) != 1:
        raise ValueError("line_trace needs exactly one flux offset")
    return sweep(config, threads=threads)


@dataclass
class CalibrationResult:
    best: dict
    residual: float
    landscape: list        # [(params dict, residual)] over the full grid


def calibrate(config: SweepConfig, measured_freqs, measured_values,
              grids: dict, threads: int = 1) -> CalibrationResult:
    """Exhaustive grid search of unknown parameters against a measured trace.

    grids maps any of {'gamma_r', 'gamma_qb', 'a', 'temperature', 'scale',
    'offset'} to candidate arrays (SI units; 'a' sets both drive amplitudes).
    The measured trace is linearly resampled onto the simulation axis; the
    figure of merit is the sum of squared residuals of the transduced trace.
    Physical combinations are simulated once; scale/offset are swept on top.
    """
    for key in grids:
        if key not in ("gamma_r", "gamma_qb", "a", "temperature", "scale", "offset"):
            raise ValueError(f"unknown calibration parameter {key!r}")
    for key, values in grids.items():
        if len(values) == 0:
            raise ValueError(f"empty calibration grid for {key!r}")

    sim_freqs = np.array([to_ghz(w) for w in config.drive_freqs])
    target = np.interp(sim_freqs, np.asarray(measured_freqs, dtype=float),
                       np.asarray(measured_values, dtype=float))

    gamma_r_grid = grids.get("gamma_r", [None])
    gamma_qb_grid = grids.get("gamma_qb", [None])
    a_grid = grids.get("a", [None])
    t_grid = grids.get("temperature", [None])
    scale_grid = grids.get("scale", [config.transduction.scale])
    offset_grid = grids.get("offset", [config.transduction.offset])

    best = None
    landscape = []
    for gamma_r in gamma_r_grid:
        for gamma_qb in gamma_qb_grid:
            for a in a_grid:
                for temperature in t_grid:
                    cfg = _override_config(config, gamma_r, gamma_qb, a, temperature)
                    result = sweep(cfg, threads=threads)
                    base = np.array([r.qubit_excited for r in result.records])
                    for scale in scale_grid:
                        for offset in offset_grid:
                            sim = offset + scale * base
                            residual = float(np.sum((sim - target) ** 2))
                            point = {"gamma_r": gamma_r, "gamma_qb": gamma_qb,
                                     "a": a, "temperature": temperature,
                                     "scale": scale, "offset": offset}
                            landscape.append((point, residual))
                            if best is None or residual < best[1]:
                                best = (point, residual)
    return CalibrationResult(best=best[0], residual=best[1], landscape=landscape)


def _override_config(config: SweepConfig, gamma_r, gamma_qb, a, temperature) -> SweepConfig:
    channels = []
    for ch in config.channels:
        rate = ch.rate
        if gamma_r is not None and ch.kind == "resonator_x":
            rate = gamma_r
        if gamma_qb is not None and ch.kind == "qubit_x":
            rate = gamma_qb
        temp = temperature if temperature is not None else ch.temperature
        channels.append(BathChannel(kind=ch.kind, rate=rate, temperature=temp))
    drive = config.drive
    if a is not None:
        drive = replace(drive, a_qb=a, a_r=a)
    return replace(config, channels=tuple(channels), drive=drive)
