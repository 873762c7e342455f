"""Constructors for the states used across the package.

Vacuum, Fock and coherent states, photon-added coherent states, the cubic
phase state exp(i gamma x_theta^3)|0>, and its weak-interaction three-term
approximation. All amplitudes are in the ladder-operator convention of
:mod:`cubicsim.fock` (hbar = 2).
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
from scipy.special import gammainc, gammaln

from .fock import (
    FockOperator,
    StateVector,
    TruncationError,
    expm_hermitian,
    normalize,
    quadrature,
)

# The cubic state's photon-number tail decays slowly (roughly power-law), so
# percent-level tail mass above n ~ 40 is physical for gamma ~ 0.4.
DEFAULT_TAIL_BUDGET = 0.05


class CubicState(NamedTuple):
    """Cubic phase state truncated to the requested dimension.

    ``state`` is NOT renormalized; ``tail_mass`` is the probability discarded
    between the requested dimension and the internal working dimension.
    """

    state: StateVector
    tail_mass: float


def vacuum(dim: int) -> StateVector:
    return fock(0, dim)


def fock(n: int, dim: int) -> StateVector:
    if dim < 1:
        raise ValueError("dimension must be >= 1")
    if not 0 <= n < dim:
        raise ValueError(f"Fock index {n} out of range for dimension {dim}")
    amps = np.zeros(dim, dtype=complex)
    amps[n] = 1.0
    return StateVector(amps)


def coherent_tail_mass(alpha: complex, dim: int) -> float:
    """Probability of the untruncated coherent state beyond |dim-1>.

    The photon-number distribution is Poisson(|alpha|^2); the tail
    P(N >= dim) is the regularized lower incomplete gamma P(dim, mu).
    """
    mu = abs(alpha) ** 2
    if mu == 0.0:
        return 0.0
    return float(gammainc(dim, mu))


def minimum_coherent_dim(alpha: complex, tol: float = 1e-10) -> int:
    """Smallest dimension keeping the coherent tail mass below tol."""
    d = max(2, int(abs(alpha) ** 2) + 1)
    while coherent_tail_mass(alpha, d) >= tol:
        d += 1
    return d


def _coherent_amps(alpha: complex, dim: int) -> np.ndarray:
    if alpha == 0:
        amps = np.zeros(dim, dtype=complex)
        amps[0] = 1.0
        return amps
    n = np.arange(dim)
    return np.exp(-abs(alpha) ** 2 / 2 + n * np.log(complex(alpha))
                  - 0.5 * gammaln(n + 1))


def coherent(alpha: complex, dim: int, tail_tol: float = 1e-10) -> StateVector:
    """Coherent state |alpha> with amplitudes e^{-|a|^2/2} a^n / sqrt(n!).

    Raises TruncationError (naming the minimum adequate dimension) when the
    Poisson tail beyond the truncation exceeds ``tail_tol``.
    """
    if dim < 2:
        raise ValueError("dimension must be >= 2")
    tail = coherent_tail_mass(alpha, dim)
    if tail >= tail_tol:
        need = minimum_coherent_dim(alpha, tail_tol)
        raise TruncationError(
            f"coherent state alpha={alpha} needs dim >= {need} "
            f"(tail mass {tail:.2e} at dim={dim})", min_dim=need)
    return StateVector(_coherent_amps(alpha, dim))


def photon_added_coherent(alpha: complex, k: int, dim: int) -> StateVector:
    """Normalized (a^dag)^k |alpha>, truncated at dim.

    Requires the coherent expansion to fit in dim - k so that raising by k
    loses nothing at the top edge. For alpha = 0 this is the Fock state |k>.
    """
    if k < 0:
        raise ValueError("photon number k must be >= 0")
    if dim - k < 2:
        raise ValueError(f"dimension {dim} too small for k={k} added photons")
    tail = coherent_tail_mass(alpha, dim - k)
    if tail >= 1e-10:
        need = minimum_coherent_dim(alpha) + k
        raise TruncationError(
            f"photon_added_coherent(alpha={alpha}, k={k}) needs dim >= {need}",
            min_dim=need)
    amps = _coherent_amps(alpha, dim)
    for _ in range(k):
        raised = np.zeros_like(amps)
        raised[1:] = amps[:-1] * np.sqrt(np.arange(1, dim))
        amps = raised
    return normalize(StateVector(amps))


def cubic_phase_state(gamma: float, theta: float = 0.0, dim: int = 64,
                      tail_budget: float = DEFAULT_TAIL_BUDGET,
                      work_dim: int | None = None) -> CubicState:
    """Cubic phase state exp(i gamma x_theta^3)|0> truncated to dim.

    The state is built by eigendecomposition of x_theta^3 at a working
    dimension (default max(4*dim, 256); the cube's truncation error pollutes
    the deep photon-number minima unless the workspace is several times the
    output size) and then projected onto the first dim components without
    renormalization. The discarded probability is returned as ``tail_mass``
    and must not exceed ``tail_budget``.
    """
    if dim < 2:
        raise ValueError("dimension must be >= 2")
    if gamma == 0.0:
        return CubicState(vacuum(dim), 0.0)
    work = work_dim if work_dim is not None else max(4 * dim, 256)
    if work < 2 * dim:
        raise ValueError(f"work_dim must be at least 2*dim = {2 * dim}")
    xq = quadrature(theta, work).mat
    cube = xq @ xq @ xq
    cube = (cube + cube.conj().T) / 2
    u = expm_hermitian(FockOperator(cube), gamma)
    full = u.mat[:, 0]
    tail = float(np.sum(np.abs(full[dim:]) ** 2))
    if tail > tail_budget:
        # smallest truncation that would fit the budget, within this workspace
        mass_above = np.cumsum(np.abs(full[::-1]) ** 2)[::-1]
        fits = np.nonzero(mass_above <= tail_budget)[0]
        need = int(fits[0]) if fits.size else work
        raise TruncationError(
            f"cubic state gamma={gamma} at dim={dim} discards tail mass "
            f"{tail:.2e} > budget {tail_budget:.2e}; need dim >= {need}",
            min_dim=need)
    return CubicState(StateVector(full[:dim]), tail)


def perturbative_cubic(gamma: float, dim: int) -> StateVector:
    """Normalized weak-interaction cubic state |0> + 3i g |1> + sqrt(6) i g |3>.

    Squared norm before normalization is 1 + 15 gamma^2.
    """
    if dim < 4:
        raise ValueError("perturbative cubic state needs dimension >= 4")
    amps = np.zeros(dim, dtype=complex)
    amps[0] = 1.0
    amps[1] = 3j * gamma
    amps[3] = np.sqrt(6) * 1j * gamma
    return normalize(StateVector(amps))
