"""Truncated Fock-space core: operators, states, and Hermitian matrix exponentials.

Unit convention used throughout the package: hbar = 2, i.e. the amplitude
quadrature is x = a + a^dag and the vacuum state has quadrature variance 1.
The phase quadrature is p = i(a^dag - a), so [x, p] = 2i and a coherent state
|alpha> sits at (<x>, <p>) = (2 Re alpha, 2 Im alpha).

All value types are immutable after construction (their numpy buffers are
marked read-only), so they can be shared freely between threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class TruncationError(ValueError):
    """Raised when a requested truncation dimension cannot represent a state.

    Carries ``min_dim``, the smallest dimension estimated to be adequate.
    """

    def __init__(self, message: str, min_dim: int | None = None):
        super().__init__(message)
        self.min_dim = min_dim


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class StateVector:
    """Pure state as complex amplitudes over the Fock basis |0>..|dim-1>."""

    amps: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amps, dtype=complex)
        if a.ndim != 1 or a.size < 1:
            raise ValueError("state vector must be a non-empty 1-d array")
        object.__setattr__(self, "amps", _readonly(a.copy()))

    @property
    def dim(self) -> int:
        return self.amps.size

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))


@dataclass(frozen=True)
class FockOperator:
    """Dense operator on the truncated Fock space."""

    mat: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.mat, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("operator must be a square matrix")
        object.__setattr__(self, "mat", _readonly(m.copy()))

    @property
    def dim(self) -> int:
        return self.mat.shape[0]


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, positive semi-definite, unit-trace operator."""

    mat: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.mat, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("density matrix must be square")
        object.__setattr__(self, "mat", _readonly(m.copy()))

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    @classmethod
    def from_state(cls, state: StateVector) -> "DensityMatrix":
        return cls(np.outer(state.amps, state.amps.conj()))

    def validate(self, herm_tol: float = 1e-10, trace_tol: float = 1e-9,
                 eig_tol: float = 1e-9) -> None:
        """Check the density-matrix invariants, raising ValueError on failure."""
        m = self.mat
        if np.abs(m - m.conj().T).max() > herm_tol:
            raise ValueError("density matrix is not Hermitian within tolerance")
        if abs(np.trace(m).real - 1.0) > trace_tol or abs(np.trace(m).imag) > trace_tol:
            raise ValueError("density matrix trace is not 1 within tolerance")
        w = np.linalg.eigvalsh((m + m.conj().T) / 2)
        if w.min() < -eig_tol:
            raise ValueError(f"density matrix has negative eigenvalue {w.min():.3e}")


def _check_dim(dim: int, minimum: int = 2) -> None:
    if not isinstance(dim, (int, np.integer)) or dim < minimum:
        raise ValueError(f"dimension must be an integer >= {minimum}, got {dim!r}")


def annihilation(dim: int) -> FockOperator:
    """Ladder operator a with <n-1|a|n> = sqrt(n)."""
    _check_dim(dim)
    m = np.zeros((dim, dim), dtype=complex)
    idx = np.arange(1, dim)
    m[idx - 1, idx] = np.sqrt(idx)
    return FockOperator(m)


def creation(dim: int) -> FockOperator:
    """Ladder operator a^dag with <n+1|a^dag|n> = sqrt(n+1)."""
    return dagger(annihilation(dim))


def number_operator(dim: int) -> FockOperator:
    """Photon number operator n = a^dag a (diagonal 0..dim-1)."""
    _check_dim(dim)
    return FockOperator(np.diag(np.arange(dim, dtype=complex)))


def quadrature(theta: float, dim: int) -> FockOperator:
    """Rotated quadrature x_theta = a e^{-i theta} + a^dag e^{+i theta}.

    theta = 0 gives x, theta = pi/2 gives p. Hermitian by construction.
    """
    _check_dim(dim)
    b = annihilation(dim).mat * np.exp(-1j * theta)
    return FockOperator(b + b.conj().T)


def dagger(op: FockOperator) -> FockOperator:
    return FockOperator(op.mat.conj().T)


def expm_hermitian(gen: FockOperator, scale: float) -> FockOperator:
    """Unitary exp(i * scale * gen) for a Hermitian generator.

    Computed by eigendecomposition of the generator, which keeps the result
    unitary to round-off. Raises ValueError if gen is not Hermitian within
    a tolerance scaled by its magnitude.
    """
    m = gen.mat
    tol = 1e-10 * max(1.0, float(np.abs(m).max()))
    if np.abs(m - m.conj().T).max() > tol:
        raise ValueError("expm_hermitian requires a Hermitian generator")
    h = (m + m.conj().T) / 2
    w, v = np.linalg.eigh(h)
    return FockOperator((v * np.exp(1j * scale * w)) @ v.conj().T)


def inner(a: StateVector, b: StateVector) -> complex:
    """<a|b> with the left argument conjugated."""
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    return complex(np.vdot(a.amps, b.amps))


def apply(op: FockOperator, state: StateVector) -> StateVector:
    if op.dim != state.dim:
        raise ValueError(f"dimension mismatch: {op.dim} vs {state.dim}")
    return StateVector(op.mat @ state.amps)


def expect(state_or_rho: StateVector | DensityMatrix, op: FockOperator) -> complex:
    """<psi|O|psi> for a StateVector, Tr(rho O) for a DensityMatrix."""
    if state_or_rho.dim != op.dim:
        raise ValueError(f"dimension mismatch: {state_or_rho.dim} vs {op.dim}")
    if isinstance(state_or_rho, StateVector):
        v = state_or_rho.amps
        return complex(np.vdot(v, op.mat @ v))
    return complex(np.trace(state_or_rho.mat @ op.mat))


def normalize(state: StateVector) -> StateVector:
    n = state.norm()
    if n < 1e-14:
        raise ValueError("cannot normalize a (numerically) zero state vector")
    return StateVector(state.amps / n)


def position_wavefunctions(dim: int, xs: np.ndarray) -> np.ndarray:
    """Harmonic-oscillator eigenfunctions psi_n(x) for n < dim, shape (dim, len(xs)).

    hbar = 2 normalization: psi_0(x) = (2 pi)^(-1/4) exp(-x^2/4), and the
    recurrence psi_{n+1} = (x psi_n - sqrt(n) psi_{n-1}) / sqrt(n+1), which is
    stable upward. The vacuum marginal |psi_0|^2 has variance 1.
    """
    _check_dim(dim, minimum=1)
    xs = np.asarray(xs, dtype=float)
    out = np.zeros((dim, xs.size))
    out[0] = (2 * np.pi) ** (-0.25) * np.exp(-xs * xs / 4)
    if dim > 1:
        out[1] = xs * out[0]
    for n in range(1, dim - 1):
        out[n + 1] = (xs * out[n] - np.sqrt(n) * out[n - 1]) / np.sqrt(n + 1)
    return out
