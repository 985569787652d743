"""Truncated qubit x resonator Hilbert space and the elementary dense operators.

Conventions, fixed globally:

* basis ordering is qubit-major: linear index = qubit*n_fock + n, with
  qubit 0 = ground |g>, 1 = excited |e> (qubit energy basis) and n the Fock
  index of the resonator;
* sigma_z |e> = +|e>, sigma_z |g> = -|g>, so +omega_q/2 * sigma_z puts the
  excited state above the ground state.

All operators are dense complex numpy arrays; at dimension 2*n_fock <= 24
there is nothing to gain from sparsity.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "TruncationError",
    "HilbertSpace",
    "fock_space",
    "annihilation",
    "number_operator",
    "quadrature_x",
    "pauli",
    "parity_operator",
    "expectation",
    "hermiticity_defect",
    "require_hermitian",
]


class TruncationError(ValueError):
    """Fock truncation too small for the requested object."""


@dataclass(frozen=True)
class HilbertSpace:
    """Composite space of a two-level qubit and n_fock resonator levels."""

    n_fock: int

    @property
    def dim(self) -> int:
        return 2 * self.n_fock

    def index(self, qubit: int, n: int) -> int:
        if qubit not in (0, 1):
            raise ValueError(f"qubit index must be 0 or 1, got {qubit}")
        if not 0 <= n < self.n_fock:
            raise ValueError(f"Fock index {n} outside [0, {self.n_fock})")
        return qubit * self.n_fock + n

    def basis_ket(self, qubit: int, n: int) -> np.ndarray:
        ket = np.zeros(self.dim, dtype=complex)
        ket[self.index(qubit, n)] = 1.0
        return ket


def fock_space(n_fock: int) -> HilbertSpace:
    """Build the composite space with `n_fock` retained Fock states.

    Raises TruncationError for n_fock < 2 (a single Fock level cannot
    represent a + a^dagger).
    """
    if n_fock < 2:
        raise TruncationError(f"n_fock must be >= 2, got {n_fock}")
    return HilbertSpace(n_fock=int(n_fock))


def _fock_annihilation(n_fock: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n_fock, dtype=float)), 1).astype(complex)


def annihilation(space: HilbertSpace) -> np.ndarray:
    """Resonator annihilation operator a, identity on the qubit factor."""
    return np.kron(np.eye(2, dtype=complex), _fock_annihilation(space.n_fock))


def number_operator(space: HilbertSpace) -> np.ndarray:
    a = annihilation(space)
    return a.conj().T @ a


def quadrature_x(space: HilbertSpace) -> np.ndarray:
    """a + a^dagger, the resonator coupling/drive operator."""
    a = annihilation(space)
    return a + a.conj().T


_PAULI = {
    # (g, e) block order; sigma_z|e> = +|e>
    "x": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    "y": np.array([[0.0, 1.0j], [-1.0j, 0.0]], dtype=complex),
    "z": np.array([[-1.0, 0.0], [0.0, 1.0]], dtype=complex),
}


def pauli(space: HilbertSpace, axis: str) -> np.ndarray:
    """Qubit Pauli operator tensored with the Fock identity."""
    try:
        q = _PAULI[axis]
    except KeyError:
        raise ValueError(f"axis must be one of 'x','y','z', got {axis!r}") from None
    return np.kron(q, np.eye(space.n_fock, dtype=complex))


def parity_operator(space: HilbertSpace) -> np.ndarray:
    """Excitation parity exp(i*pi*((sigma_z+1)/2 + n)): +1 for even, -1 for odd."""
    diag = np.empty(space.dim)
    for qubit in (0, 1):
        for n in range(space.n_fock):
            diag[space.index(qubit, n)] = (-1.0) ** (qubit + n)
    return np.diag(diag).astype(complex)


def expectation(op: np.ndarray, state: np.ndarray) -> complex:
    """<psi|O|psi> for a ket, Tr(rho O) for a density matrix.

    The caller asserts a small imaginary part when O is Hermitian.
    """
    op = np.asarray(op)
    state = np.asarray(state)
    if state.ndim == 1:
        if op.shape != (state.size, state.size):
            raise ValueError(f"dimension mismatch: op {op.shape}, ket {state.shape}")
        return complex(state.conj() @ op @ state)
    if state.ndim == 2:
        if op.shape != state.shape:
            raise ValueError(f"dimension mismatch: op {op.shape}, rho {state.shape}")
        return complex(np.trace(state @ op))
    raise ValueError(f"state must be a ket or a density matrix, got ndim={state.ndim}")


def hermiticity_defect(op: np.ndarray) -> float:
    """Relative Frobenius asymmetry ||O - O^dag|| / ||O|| (0 for O = 0)."""
    norm = np.linalg.norm(op)
    if norm == 0.0:
        return 0.0
    return float(np.linalg.norm(op - op.conj().T) / norm)


def require_hermitian(op: np.ndarray, tol: float = 1e-10, what: str = "operator") -> None:
    defect = hermiticity_defect(op)
    if defect > tol:
        raise ValueError(f"{what} is not Hermitian: relative asymmetry {defect:.3e} > {tol:.1e}")
