"""Second-order time-convolutionless master equation with thermal baths.

The equation of motion, with S_r the bare coupling operator of channel r and
U_r its bath-weighted counterpart built in the eigenbasis of H0, is

    drho/dt = -i [H0 + H_d(t), rho]
              + sum_r (U_r rho S_r + S_r rho U_r^dag - S_r U_r rho - rho U_r^dag S_r).

Normalization: U_r[l,l'] = (Gamma_r/2) * w * S_r[l,l'], with w = n(|w_ll'|)+1
for downward (emitting) elements, n(|w_ll'|) for upward ones, 0 below the
degeneracy cutoff.  With this constant a channel whose coupling element has
unit modulus relaxes at rate Gamma_r at zero temperature: photon loss at
Gamma_a, qubit T1 = 1/Gamma_x.  Lamb shifts (the Cauchy principal-value part
of the resolvent) are dropped.

All density matrices handled here live in the eigenbasis of the H0 that the
Dissipators were built from; the diagonal of rho is the population of the
(labeled) eigenstates.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .constants import HBAR, K_B, TWO_PI
from .models import EigenSystem, SystemParams
from .operators import HilbertSpace, pauli, quadrature_x

__all__ = [
    "BathChannel",
    "DriveSpec",
    "Dissipators",
    "SteadyStateCriteria",
    "SteadyStateDiagnostics",
    "SteadyStateTimeoutError",
    "ConfigurationError",
    "bose_occupation",
    "build_dissipators",
    "channel_operator",
    "drive_operator",
    "tcpom_rhs",
    "evolve",
    "thermal_state",
    "steady_state",
    "trace_distance",
    "default_dt",
]

# transitions closer in frequency than this are treated as degenerate and
# dropped (the Bose factor diverges at zero frequency under a flat spectrum)
DEGENERACY_CUTOFF = TWO_PI * 1e3   # rad/s

# integration rule: at least this many RK4 steps per fastest period
STEPS_PER_FAST_PERIOD = 20

_CHANNEL_KINDS = ("resonator_x", "qubit_x", "qubit_z")


class ConfigurationError(ValueError):
    """Inconsistent integration or drive configuration."""


class SteadyStateTimeoutError(RuntimeError):
    """Steady state not reached within the allotted simulated time."""

    def __init__(self, message: str, diagnostics: "SteadyStateDiagnostics"):
        super().__init__(message)
        self.diagnostics = diagnostics


@dataclass(frozen=True)
class BathChannel:
    """One dissipative channel: coupling operator kind, rate, temperature.

    kind:        'resonator_x' (S = a+a^dag), 'qubit_x' (S = sigma_x) or
                 'qubit_z' (S = sigma_z)
    rate:        Gamma (rad/s); frequency-independent by default
    temperature: bath temperature (K), shared across channels in practice

    spectral_shape 'flat' (default) applies `rate` at every transition;
    'ohmic' scales it linearly, rate * |w| / ohmic_reference, so the channel
    reproduces `rate` exactly at the reference frequency.
    """

    kind: str
    rate: float
    temperature: float
    spectral_shape: str = "flat"
    ohmic_reference: float = 0.0     # rad/s, required for the ohmic shape

    def __post_init__(self):
        if self.kind not in _CHANNEL_KINDS:
            raise ValueError(f"unknown channel kind {self.kind!r}; use one of {_CHANNEL_KINDS}")
        if self.rate < 0:
            raise ValueError("channel rate must be >= 0")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.spectral_shape not in ("flat", "ohmic"):
            raise ValueError(f"unknown spectral shape {self.spectral_shape!r}")
        if self.spectral_shape == "ohmic" and self.ohmic_reference <= 0:
            raise ValueError("ohmic channels need a positive ohmic_reference")

    def rate_at(self, omega: float) -> float:
        if self.spectral_shape == "ohmic":
            return self.rate * abs(omega) / self.ohmic_reference
        return self.rate


@dataclass(frozen=True)
class DriveSpec:
    """Classical drive H_d = cos(omega_d t) (a_qb sigma_x + a_r (a+a^dag) + a_z sigma_z)."""

    omega_d: float
    a_qb: float = 0.0
    a_r: float = 0.0
    a_z: float = 0.0

    def __post_init__(self):
        if min(self.a_qb, self.a_r, self.a_z) < 0:
            raise ValueError("drive amplitudes must be >= 0")

    @property
    def max_amplitude(self) -> float:
        return max(self.a_qb, self.a_r, self.a_z)

    def warn_if_strong(self, params: SystemParams) -> None:
        # perturbative-drive guard: amplitudes must stay well below g
        if params.g > 0 and self.max_amplitude > 0.2 * params.g:
            warnings.warn(
                f"drive amplitude {self.max_amplitude:.3e} rad/s exceeds 0.2*g; "
                "the weak-drive treatment may not hold", stacklevel=2)


@dataclass
class Dissipators:
    """Per-channel (S, U) operator pairs in the eigenbasis of `es`.

    Rebuild whenever the flux point (and hence the eigensystem) changes.
    """

    es: EigenSystem
    channels: list = field(default_factory=list)   # [(BathChannel, S_eig, U_eig)]


def bose_occupation(omega: float, temperature: float) -> float:
    """Thermal occupation 1/(exp(hbar w / kB T) - 1); 0 at T = 0."""
    if omega <= 0:
        raise ValueError(f"bose_occupation needs omega > 0, got {omega}")
    if temperature == 0.0:
        return 0.0
    x = HBAR * omega / (K_B * temperature)
    if x > 700.0:   # exp overflow guard; occupation is zero to double precision
        return 0.0
    return float(1.0 / np.expm1(x))


def channel_operator(space: HilbertSpace, kind: str) -> np.ndarray:
    if kind == "resonator_x":
        return quadrature_x(space)
    if kind == "qubit_x":
        return pauli(space, "x")
    if kind == "qubit_z":
        return pauli(space, "z")
    raise ValueError(f"unknown channel kind {kind!r}")


def build_dissipators(es: EigenSystem, space: HilbertSpace, channels,
                      degeneracy_cutoff: float = DEGENERACY_CUTOFF) -> Dissipators:
    """Project channel operators into the eigenbasis and attach Bose weights.

    U[l,l'] = (Gamma/2) S[l,l'] w(w_l' - w_l) with w = n+1 for emission
    (column above row), n for absorption, 0 within the degeneracy cutoff;
    diagonal elements always fall below the cutoff and drop out, so a flat
    bath contributes no pure dephasing.
    """
    omega = es.energies
    dw = omega[None, :] - omega[:, None]        # dw[l, l'] = w_l' - w_l
    built = []
    for ch in channels:
        s_eig = es.states.conj().T @ channel_operator(space, ch.kind) @ es.states
        w = np.zeros_like(dw)
        for i in range(len(omega)):
            for j in range(len(omega)):
                gap = dw[i, j]
                if abs(gap) < degeneracy_cutoff:
                    continue
                n_th = bose_occupation(abs(gap), ch.temperature)
                w[i, j] = ch.rate_at(gap) * (n_th + 1.0 if gap > 0 else n_th)
        u_eig = 0.5 * s_eig * w
        built.append((ch, s_eig, u_eig))
    return Dissipators(es=es, channels=built)


def drive_operator(space: HilbertSpace, drive: DriveSpec) -> np.ndarray:
    """Time-independent part of the drive Hamiltonian, lab basis."""
    op = np.zeros((space.dim, space.dim), dtype=complex)
    if drive.a_qb:
        op += drive.a_qb * pauli(space, "x")
    if drive.a_r:
        op += drive.a_r * quadrature_x(space)
    if drive.a_z:
        op += drive.a_z * pauli(space, "z")
    return op


def tcpom_rhs(rho: np.ndarray, t: float, es: EigenSystem, drive: DriveSpec,
              diss: Dissipators, space: HilbertSpace) -> np.ndarray:
    """Reference right-hand side of the master equation (eigenbasis).

    The generator is trace-free and Hermiticity-preserving for any rho.
    Used directly in tests; evolution uses the equivalent vectorized form.
    """
    if rho.shape != (es.dim, es.dim):
        raise ValueError(f"rho shape {rho.shape} does not match eigensystem dim {es.dim}")
    h = np.diag(es.energies).astype(complex)
    h_d = es.states.conj().T @ drive_operator(space, drive) @ es.states
    h = h + np.cos(drive.omega_d * t) * h_d
    out = -1j * (h @ rho - rho @ h)
    for _, s, u in diss.channels:
        out += u @ rho @ s + s @ rho @ u.conj().T - s @ (u @ rho) - rho @ (u.conj().T @ s)
    return out


class _Generator:
    """Vectorized Liouvillian: d vec(rho)/dt = (L0 + cos(w_d t) Ld) vec(rho).

    vec is C-order flattening, so vec(A rho B) = kron(A, B.T) vec(rho).
    """

    def __init__(self, es: EigenSystem, drive: DriveSpec, diss: Dissipators,
                 space: HilbertSpace):
        d = es.dim
        eye = np.eye(d, dtype=complex)
        h0 = np.diag(es.energies).astype(complex)
        l0 = -1j * (np.kron(h0, eye) - np.kron(eye, h0.T))
        for _, s, u in diss.channels:
            l0 += (np.kron(u, s.T) + np.kron(s, u.conj())
                   - np.kron(s @ u, eye) - np.kron(eye, (u.conj().T @ s).T))
        h_d = es.states.conj().T @ drive_operator(space, drive) @ es.states
        self.l0 = l0
        self.ld = -1j * (np.kron(h_d, eye) - np.kron(eye, h_d.T))
        self.omega_d = drive.omega_d
        self.dim = d

    def apply(self, t: float, vec: np.ndarray) -> np.ndarray:
        return self.l0 @ vec + np.cos(self.omega_d * t) * (self.ld @ vec)

    def rk4_step(self, t: float, vec: np.ndarray, dt: float) -> np.ndarray:
        k1 = self.apply(t, vec)
        k2 = self.apply(t + dt / 2, vec + (dt / 2) * k1)
        k3 = self.apply(t + dt / 2, vec + (dt / 2) * k2)
        k4 = self.apply(t + dt, vec + dt * k3)
        return vec + (dt / 6) * (k1 + 2 * k2 + 2 * k3 + k4)

    def step_map(self, t: float, dt: float) -> np.ndarray:
        """Matrix of one RK4 step starting at t (the step is a linear map)."""
        eye = np.eye(self.dim**2, dtype=complex)
        c0 = np.cos(self.omega_d * t)
        cm = np.cos(self.omega_d * (t + dt / 2))
        c1 = np.cos(self.omega_d * (t + dt))
        l_t = self.l0 + c0 * self.ld
        l_m = self.l0 + cm * self.ld
        l_e = self.l0 + c1 * self.ld
        k1 = l_t
        k2 = l_m @ (eye + (dt / 2) * k1)
        k3 = l_m @ (eye + (dt / 2) * k2)
        k4 = l_e @ (eye + dt * k3)
        return eye + (dt / 6) * (k1 + 2 * k2 + 2 * k3 + k4)

    def period_step_maps(self, steps_per_period: int) -> list:
        """Per-step RK4 maps over one drive period (reusable every period)."""
        dt = (TWO_PI / self.omega_d) / steps_per_period
        return [self.step_map(i * dt, dt) for i in range(steps_per_period)]

    def period_maps(self, steps_per_period: int):
        """One-period propagator P and left-rule time-average map A.

        The drive is periodic so the same pair serves every period; built by
        composing the per-step RK4 maps applied to the identity.
        """
        n = steps_per_period
        dt = (TWO_PI / self.omega_d) / n
        eye = np.eye(self.dim**2, dtype=complex)
        prop = eye.copy()
        avg = np.zeros_like(eye)
        for i in range(n):
            avg += prop
            prop = self.step_map(i * dt, dt) @ prop
        avg /= n
        return prop, avg, dt


def default_dt(es: EigenSystem, drive: DriveSpec) -> float:
    """Largest step obeying the resolution rule dt <= (2 pi / w_max)/20."""
    span = float(es.energies[-1] - es.energies[0])
    w_max = max(span, drive.omega_d)
    if w_max <= 0:
        raise ConfigurationError("cannot choose a step size: no frequency scale")
    return (TWO_PI / w_max) / STEPS_PER_FAST_PERIOD


def _check_dt(dt: float, es: EigenSystem, drive: DriveSpec) -> None:
    limit = default_dt(es, drive)
    if dt > limit * (1 + 1e-12):
        raise ConfigurationError(
            f"dt = {dt:.3e} s exceeds the resolution limit {limit:.3e} s "
            f"({STEPS_PER_FAST_PERIOD} steps per fastest period)")


def evolve(rho0: np.ndarray, drive: DriveSpec, diss: Dissipators,
           es: EigenSystem, space: HilbertSpace, t_end: float,
           dt: float | None = None, n_samples: int = 400):
    """Fixed-step RK4 trajectory of the master equation from t = 0.

    Returns (times, rhos): sample instants and density matrices (eigenbasis),
    roughly `n_samples` points including t = 0 and the endpoint.

    With the default step the grid is aligned to the drive period, the
    per-step linear maps are composed into a one-period propagator (the same
    fixed-step RK4 update, reorganized), and samples land on period
    boundaries.  An explicit `dt` is honored verbatim by direct stage
    evaluation with samples on the step grid.
    """
    gen = _Generator(es, drive, diss, space)
    vec = rho0.reshape(-1).astype(complex)
    times = [0.0]
    rhos = [vec.reshape(es.dim, es.dim).copy()]

    period = TWO_PI / drive.omega_d if drive.omega_d > 0 else np.inf
    if dt is None and np.isfinite(period) and t_end >= 2 * period:
        steps_per_period = max(1, int(np.ceil(period / default_dt(es, drive))))
        prop, _, dt = gen.period_maps(steps_per_period)
        total_steps = max(1, int(np.ceil(t_end / dt - 1e-9)))
        n_periods = total_steps // steps_per_period
        tail_steps = total_steps - n_periods * steps_per_period
        every = max(1, n_periods // max(1, n_samples - 1))
        for p in range(n_periods):
            vec = prop @ vec
            if (p + 1) % every == 0 or p == n_periods - 1:
                times.append((p + 1) * period)
                rhos.append(vec.reshape(es.dim, es.dim).copy())
        t0 = n_periods * period
    else:
        if dt is None:
            dt = default_dt(es, drive)
        else:
            _check_dt(dt, es, drive)
        t0 = 0.0
        tail_steps = max(1, int(np.ceil(t_end / dt - 1e-9)))

    if tail_steps > 0:
        sample_every = max(1, tail_steps // max(1, n_samples - 1))
        for i in range(tail_steps):
            vec = gen.rk4_step(t0 + i * dt, vec, dt)
            if (i + 1) % sample_every == 0 or i == tail_steps - 1:
                times.append(t0 + (i + 1) * dt)
                rhos.append(vec.reshape(es.dim, es.dim).copy())
    return np.array(times), np.array(rhos)


def thermal_state(es: EigenSystem, temperature: float) -> np.ndarray:
    """Gibbs state over the retained eigenstates, diagonal in the eigenbasis."""
    if temperature < 0:
        raise ValueError("temperature must be >= 0")
    if temperature == 0.0:
        rho = np.zeros((es.dim, es.dim), dtype=complex)
        rho[0, 0] = 1.0
        return rho
    x = -(es.energies - es.energies[0]) * HBAR / (K_B * temperature)
    weights = np.exp(x)
    return np.diag(weights / weights.sum()).astype(complex)


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    """(1/2) * trace norm of the Hermitian difference a - b."""
    return float(0.5 * np.abs(np.linalg.eigvalsh(a - b)).sum())


@dataclass(frozen=True)
class SteadyStateCriteria:
    """Convergence control for the period-averaged steady-state search."""

    window: int = 50            # drive periods per averaging window
    rel_tol: float = 1e-4       # trace distance between consecutive window averages
    max_time: float = 50e-6     # simulated seconds before giving up


@dataclass
class SteadyStateDiagnostics:
    converged: bool
    windows_used: int
    periods: int
    residual: float
    min_eigenvalue: float       # most-negative eigenvalue of the returned rho
    dt: float
    steps_per_period: int
    sim_time: float


def steady_state(rho0: np.ndarray, drive: DriveSpec, diss: Dissipators,
                 es: EigenSystem, space: HilbertSpace,
                 criteria: SteadyStateCriteria = SteadyStateCriteria()):
    """Drive to steady state and return the period-averaged density matrix.

    Evolves under fixed-step RK4 (reorganized as one-period linear maps) and
    averages rho over successive windows of `criteria.window` drive periods;
    steady is declared when the trace distance between consecutive window
    averages stays below rel_tol for three windows in a row.  TCL2 does not
    guarantee positivity: the most-negative eigenvalue of the result is
    reported in the diagnostics, not asserted.

    Raises SteadyStateTimeoutError (carrying diagnostics) on non-convergence
    within criteria.max_time of simulated time.
    """
    if drive.omega_d <= 0:
        raise ConfigurationError("steady_state needs drive.omega_d > 0 "
                                 "(defines the averaging period)")
    gen = _Generator(es, drive, diss, space)
    period = TWO_PI / drive.omega_d
    steps_per_period = max(1, int(np.ceil(period / default_dt(es, drive))))
    prop, avg, dt = gen.period_maps(steps_per_period)

    vec = rho0.reshape(-1).astype(complex)
    d = es.dim
    prev_avg = None
    streak = 0
    periods_done = 0
    windows = 0
    residual = np.inf
    max_periods = int(np.ceil(criteria.max_time / period))

    while periods_done < max_periods:
        acc = np.zeros_like(vec)
        for _ in range(criteria.window):
            acc += avg @ vec
            vec = prop @ vec
        periods_done += criteria.window
        windows += 1
        window_avg = (acc / criteria.window).reshape(d, d)
        if prev_avg is not None:
            residual = trace_distance(window_avg, prev_avg)
            streak = streak + 1 if residual < criteria.rel_tol else 0
            if streak >= 3:
                diag = SteadyStateDiagnostics(
                    converged=True, windows_used=windows, periods=periods_done,
                    residual=residual,
                    min_eigenvalue=float(np.linalg.eigvalsh(window_avg).min()),
                    dt=dt, steps_per_period=steps_per_period,
                    sim_time=periods_done * period)
                return window_avg, diag
        prev_avg = window_avg

    diag = SteadyStateDiagnostics(
        converged=False, windows_used=windows, periods=periods_done,
        residual=float(residual),
        min_eigenvalue=float(np.linalg.eigvalsh(prev_avg).min()) if prev_avg is not None else np.nan,
        dt=dt, steps_per_period=steps_per_period, sim_time=periods_done * period)
    raise SteadyStateTimeoutError(
        f"no steady state within {criteria.max_time:.2e} s of simulated time "
        f"(last residual {residual:.2e}, rel_tol {criteria.rel_tol:.1e})", diag)
