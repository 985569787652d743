"""System Hamiltonians and their eigensystems.

Builds the full dipolar-coupling Hamiltonian

    H0/hbar = omega_q/2 sigma_z + omega_r a^dag a
              + g (cos(theta_q) sigma_z - sin(theta_q) sigma_x)(a + a^dag),

its rotating-wave truncation, and the dispersive (Bloch-Siegert) Hamiltonian
obtained by second-order treatment of the counter-rotating terms, together
with the analytic dressed doublets used to label numeric eigenstates.

The dispersive Hamiltonian is standardized to the sigma_z |e> = +|e> sign
convention of the full model; its analytic spectrum carries the resonator
zero-point offset omega_r/2 relative to H0.
"""

import warnings
from dataclasses import dataclass, replace

import numpy as np

from .constants import HBAR
from .operators import (
    HilbertSpace,
    TruncationError,
    annihilation,
    number_operator,
    parity_operator,
    pauli,
    quadrature_x,
    require_hermitian,
)

__all__ = [
    "LAMBDA_MAX",
    "PerturbativeValidityError",
    "LabelingError",
    "SystemParams",
    "DoubletParams",
    "EigenSystem",
    "qubit_from_flux",
    "rabi_hamiltonian",
    "jc_hamiltonian",
    "bs_hamiltonian",
    "bs_eigenvalues",
    "bs_ground_energy",
    "doublet_params",
    "bs_dressed_states",
    "bs_ground_state",
    "eigensystem",
    "label_dressed",
]

# validity guard for the dispersive expansion; advisory, callers may override
LAMBDA_MAX = 0.2

# |cos(theta_q)| below this counts as the symmetry point (parity conserved)
_SWEET_SPOT_TOL = 1e-10


class PerturbativeValidityError(ValueError):
    """lambda = g sin(theta_q)/(omega_q+omega_r) too large for the dispersive picture."""


class LabelingError(RuntimeError):
    """Dressed-state labels could not be assigned unambiguously."""


def qubit_from_flux(delta_gap: float, i_p: float, flux_offset: float):
    """Map flux bias to qubit splitting and mixing angle.

    Parameters
    ----------
    delta_gap : tunnel splitting Delta (rad/s), > 0.
    i_p : persistent current (A).
    flux_offset : Phi - Phi_0/2 (Wb, signed).

    Returns
    -------
    (omega_q, theta_q, epsilon) with omega_q = sqrt(Delta^2 + eps^2),
    tan(theta_q) = Delta/eps, theta_q in (0, pi), eps = 2 i_p flux_offset/hbar.
    """
    if delta_gap <= 0:
        raise ValueError("delta_gap must be positive")
    epsilon = 2.0 * i_p * flux_offset / HBAR
    omega_q = float(np.hypot(delta_gap, epsilon))
    theta_q = float(np.arctan2(delta_gap, epsilon))
    return omega_q, theta_q, epsilon


@dataclass(frozen=True)
class SystemParams:
    """Physical constants of the coupled system, SI angular frequencies.

    Derived quantities (detuning, mixing angle, dispersive shift) are exposed
    as properties so they always reflect the stored fields.
    """

    omega_r: float            # resonator frequency (rad/s)
    delta_gap: float          # qubit tunnel splitting Delta (rad/s)
    i_p: float                # persistent current (A)
    flux_offset: float        # Phi - Phi_0/2 (Wb)
    g: float                  # bare coupling (rad/s)

    def __post_init__(self):
        if self.omega_r <= 0:
            raise ValueError("omega_r must be positive")
        if self.delta_gap <= 0:
            raise ValueError("delta_gap must be positive")
        if self.g < 0:
            raise ValueError("g must be non-negative")

    @property
    def epsilon(self) -> float:
        return 2.0 * self.i_p * self.flux_offset / HBAR

    @property
    def omega_q(self) -> float:
        return float(np.hypot(self.delta_gap, self.epsilon))

    @property
    def theta_q(self) -> float:
        return float(np.arctan2(self.delta_gap, self.epsilon))

    @property
    def delta(self) -> float:
        """Qubit-resonator detuning omega_q - omega_r."""
        return self.omega_q - self.omega_r

    @property
    def lam(self) -> float:
        """Counter-rotating expansion parameter g sin(theta_q)/(omega_r + omega_q)."""
        return self.g * np.sin(self.theta_q) / (self.omega_r + self.omega_q)

    @property
    def omega_bs(self) -> float:
        """Dispersive shift g^2 sin^2(theta_q)/(omega_q + omega_r)."""
        return self.g**2 * np.sin(self.theta_q) ** 2 / (self.omega_q + self.omega_r)

    def at_flux(self, flux_offset: float) -> "SystemParams":
        return replace(self, flux_offset=flux_offset)

    def check_perturbative(self, enforce: bool = True) -> None:
        if self.lam >= LAMBDA_MAX:
            msg = (f"lambda = {self.lam:.3f} >= {LAMBDA_MAX}: dispersive "
                   f"(Bloch-Siegert) formulas are unreliable here")
            if enforce:
                raise PerturbativeValidityError(msg)
            warnings.warn(msg, stacklevel=3)


def rabi_hamiltonian(params: SystemParams, space: HilbertSpace) -> np.ndarray:
    """Full dipolar-coupling Hamiltonian (units of rad/s)."""
    sz = pauli(space, "z")
    sx = pauli(space, "x")
    x = quadrature_x(space)
    n = number_operator(space)
    th = params.theta_q
    h = (0.5 * params.omega_q * sz
         + params.omega_r * n
         + params.g * (np.cos(th) * sz - np.sin(th) * sx) @ x)
    return h


def jc_hamiltonian(params: SystemParams, space: HilbertSpace) -> np.ndarray:
    """Rotating-wave truncation: keeps only the excitation-conserving coupling.

    The longitudinal cos(theta_q) sigma_z (a+a^dag) term is dropped entirely;
    the transverse term keeps its co-rotating half, so the result is block
    diagonal in the total excitation number.
    """
    sz = pauli(space, "z")
    sx = pauli(space, "x")
    sy = pauli(space, "y")
    sp = 0.5 * (sx + 1j * sy)       # |e><g|
    sm = sp.conj().T
    a = annihilation(space)
    n = number_operator(space)
    h = (0.5 * params.omega_q * sz
         + params.omega_r * n
         - params.g * np.sin(params.theta_q) * (sp @ a + sm @ a.conj().T))
    return h


def bs_hamiltonian(params: SystemParams, space: HilbertSpace,
                   enforce_validity: bool = True) -> np.ndarray:
    """Dispersive Hamiltonian with photon-number dependent coupling.

    Box-diagonal in the {|g,n>, |e,n-1>} doublets; eigenvalues of box n match
    :func:`bs_eigenvalues`.  Carries the zero-point terms omega_r/2 and
    -omega_bs/2, so its spectrum is offset from rabi_hamiltonian's by
    +omega_r/2 at g = 0.
    """
    params.check_perturbative(enforce=enforce_validity)
    sz = pauli(space, "z")
    sx = pauli(space, "x")
    sy = pauli(space, "y")
    sm = 0.5 * (sx - 1j * sy)       # |g><e|
    a = annihilation(space)
    n = number_operator(space)
    eye = np.eye(space.dim, dtype=complex)
    wbs = params.omega_bs
    sigma = params.omega_q + params.omega_r
    # g(n) applied on the |g,n> side of the doublet so the box off-diagonal
    # is g(n)*sqrt(n); hermitize explicitly
    g_of_n = params.g * np.sin(params.theta_q) * (eye - n * (wbs / sigma))
    coupling = g_of_n @ (a.conj().T @ sm)
    h = (0.5 * params.omega_q * sz
         + params.omega_r * (n + 0.5 * eye)
         + wbs * (sz @ (n + 0.5 * eye) - 0.5 * eye)
         + coupling + coupling.conj().T)
    return h


def doublet_params(params: SystemParams, n: int,
                   variant: str = "consistent") -> "DoubletParams":
    """Per-doublet detuning, coupling, and mixing angle.

    variant='consistent' uses tan(phi_n) = 2 g_n / delta_n, the angle that
    diagonalizes the dispersive 2x2 box (g_n already carries sqrt(n)).
    variant='verbatim' keeps an extra sqrt(n), i.e. tan(phi_n) =
    2 g_n sqrt(n)/delta_n; the two agree at n = 1.  The consistent form is
    the default because it maximizes overlap with exact eigenvectors
    (see tests).
    """
    if n < 1:
        raise ValueError("doublet index n must be >= 1")
    if variant not in ("consistent", "verbatim"):
        raise ValueError(f"unknown mixing-angle variant {variant!r}")
    sigma = params.omega_q + params.omega_r
    wbs = params.omega_bs
    delta_n = params.delta + 2.0 * n * wbs
    g_n = params.g * np.sin(params.theta_q) * np.sqrt(n) * (1.0 - n * wbs / sigma)
    numerator = 2.0 * g_n * (np.sqrt(n) if variant == "verbatim" else 1.0)
    phi_n = float(np.arctan2(numerator, delta_n))   # branch (0, pi); pi at g=0, delta<0
    return DoubletParams(n=n, delta_n=float(delta_n), g_n=float(g_n), phi_n=phi_n)


@dataclass(frozen=True)
class DoubletParams:
    n: int
    delta_n: float
    g_n: float
    phi_n: float


def bs_eigenvalues(params: SystemParams, n: int,
                   enforce_validity: bool = True):
    """Doublet energies (E_plus, E_minus) of the dispersive model, n >= 1."""
    if n < 1:
        raise ValueError("doublet index n must be >= 1")
    params.check_perturbative(enforce=enforce_validity)
    d = doublet_params(params, n)
    omega_rn = n * params.omega_r - params.omega_bs
    half_split = 0.5 * np.hypot(d.delta_n, 2.0 * d.g_n)
    return float(omega_rn + half_split), float(omega_rn - half_split)


def bs_ground_energy(params: SystemParams, enforce_validity: bool = True) -> float:
    """Dispersive ground-state energy -delta/2 - omega_bs."""
    params.check_perturbative(enforce=enforce_validity)
    return float(-0.5 * params.delta - params.omega_bs)


def bs_dressed_states(params: SystemParams, n: int, space: HilbertSpace,
                      variant: str = "consistent",
                      enforce_validity: bool = True):
    """Analytic dressed doublet (|n,+>, |n,->) with counter-rotating admixture.

    Expressed in the sign convention of :func:`rabi_hamiltonian`, whose
    transverse coupling is -g sin(theta_q) sigma_x (a+a^dag); relative to the
    +g convention of the textbook doublets this flips every qubit-excited
    amplitude (a sigma_z relabel of the qubit), leaving element moduli alone.

    The lambda-order corrections reach into the n+-2 excitation manifolds, so
    |e, n+1> must exist: requires n + 1 < n_fock.  The analytic expressions
    are not normalized at O(lambda^2); both states are renormalized here.
    """
    if n < 1:
        raise ValueError("doublet index n must be >= 1")
    if n + 1 >= space.n_fock:
        raise TruncationError(
            f"doublet n={n} needs Fock level {n + 1}; space has n_fock={space.n_fock}")
    params.check_perturbative(enforce=enforce_validity)
    d = doublet_params(params, n, variant=variant)
    lam = params.lam
    c, s = np.cos(d.phi_n / 2.0), np.sin(d.phi_n / 2.0)

    upper = np.zeros(space.dim, dtype=complex)   # |e,n-1> - lam sqrt(n-1)|g,n-2>
    upper[space.index(1, n - 1)] = 1.0
    if n >= 2:
        upper[space.index(0, n - 2)] = -lam * np.sqrt(n - 1)
    lower = np.zeros(space.dim, dtype=complex)   # |g,n> + lam sqrt(n+1)|e,n+1>
    lower[space.index(0, n)] = 1.0
    lower[space.index(1, n + 1)] = lam * np.sqrt(n + 1)

    plus = c * upper - s * lower
    minus = s * upper + c * lower
    plus /= np.linalg.norm(plus)
    minus /= np.linalg.norm(minus)
    return plus, minus


def bs_ground_state(params: SystemParams, space: HilbertSpace,
                    enforce_validity: bool = True) -> np.ndarray:
    """Analytic dressed ground state |g,0> + lam |e,1> (sign-mapped), normalized."""
    params.check_perturbative(enforce=enforce_validity)
    ket = space.basis_ket(0, 0) + params.lam * space.basis_ket(1, 1)
    return ket / np.linalg.norm(ket)


@dataclass
class EigenSystem:
    """Sorted eigenvalues and phase-fixed eigenvectors of a Hamiltonian.

    states[:, k] is the eigenvector of energies[k].  labels / parities stay
    None until :func:`label_dressed` fills them.
    """

    energies: np.ndarray
    states: np.ndarray
    labels: list | None = None
    parities: np.ndarray | None = None

    @property
    def dim(self) -> int:
        return len(self.energies)

    def state(self, k: int) -> np.ndarray:
        return self.states[:, k]

    def label_index(self, label: str) -> int:
        if self.labels is None:
            raise LabelingError("eigensystem has no labels; run label_dressed first")
        try:
            return self.labels.index(label)
        except ValueError:
            raise LabelingError(f"no eigenstate labeled {label!r}") from None

    def energy_of(self, label: str) -> float:
        return float(self.energies[self.label_index(label)])

    def state_of(self, label: str) -> np.ndarray:
        return self.state(self.label_index(label))


def eigensystem(h: np.ndarray, hermitian_tol: float = 1e-10) -> EigenSystem:
    """Diagonalize a Hermitian operator.

    Energies ascend; each eigenvector's largest-magnitude amplitude is made
    real and positive so results are reproducible across BLAS backends.
    """
    require_hermitian(h, tol=hermitian_tol, what="Hamiltonian")
    energies, states = np.linalg.eigh(h)
    states = states.copy()
    for k in range(states.shape[1]):
        col = states[:, k]
        i = int(np.argmax(np.abs(col)))
        phase = col[i] / abs(col[i])
        states[:, k] = col * phase.conjugate()
    return EigenSystem(energies=energies, states=states)


def label_dressed(es: EigenSystem, params: SystemParams, space: HilbertSpace,
                  n_max: int | None = None,
                  variant: str = "consistent",
                  overlap_tie_tol: float = 1e-6,
                  parity_tol: float = 1e-8,
                  enforce_validity: bool = True) -> EigenSystem:
    """Assign dressed-doublet labels to numeric eigenstates by overlap.

    Each analytic doublet state from :func:`bs_dressed_states` claims the
    numeric eigenstate of largest squared overlap; assignment by overlap
    rather than energy order stays correct when levels cross as flux varies.
    The lowest state is labeled 'ground'.  At the flux symmetry point each
    eigenstate is also assigned its excitation parity +-1.

    Raises LabelingError when two labels claim the same eigenstate or a
    claim is ambiguous (top two overlaps within `overlap_tie_tol`).
    """
    params.check_perturbative(enforce=enforce_validity)
    if n_max is None:
        n_max = space.n_fock - 2
    if n_max > space.n_fock - 2:
        raise TruncationError(
            f"labeling up to n={n_max} needs n_fock >= {n_max + 2}")

    labels: list = [""] * es.dim
    labels[0] = "ground"
    claimed = {0: "ground"}
    for n in range(1, n_max + 1):
        plus, minus = bs_dressed_states(params, n, space, variant=variant,
                                        enforce_validity=enforce_validity)
        for sign, ket in (("+", plus), ("-", minus)):
            label = f"{n}{sign}"
            overlaps = np.abs(ket.conj() @ es.states) ** 2
            order = np.argsort(overlaps)[::-1]
            best, runner_up = int(order[0]), int(order[1])
            if overlaps[best] - overlaps[runner_up] < overlap_tie_tol:
                raise LabelingError(
                    f"label {label}: overlap tie between eigenstates {best} and "
                    f"{runner_up} ({overlaps[best]:.6f} vs {overlaps[runner_up]:.6f})")
            if best in claimed:
                raise LabelingError(
                    f"label {label} and {claimed[best]} both claim eigenstate {best}")
            claimed[best] = label
            labels[best] = label

    parities = None
    if abs(np.cos(params.theta_q)) < _SWEET_SPOT_TOL:
        p_op = parity_operator(space)
        vals = np.real(np.einsum("ik,ij,jk->k", es.states.conj(), p_op, es.states))
        if np.max(np.abs(np.abs(vals) - 1.0)) > parity_tol:
            raise LabelingError(
                "parity expectation not +-1 at the symmetry point; "
                f"worst deviation {np.max(np.abs(np.abs(vals) - 1.0)):.2e}")
        parities = np.where(vals > 0, 1, -1)

    return EigenSystem(energies=es.energies, states=es.states,
                       labels=labels, parities=parities)
