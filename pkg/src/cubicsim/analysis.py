"""Derived quantities: Wigner functions, fidelity, photon statistics, islands.

The Wigner function is evaluated on (x, p) grids in hbar = 2 units, where the
vacuum is W(x, p) = exp(-(x^2+p^2)/2)/(2 pi). The Fock-basis kernel for
|m><n| with m = n + a is

    w_{mn} = (1/2pi) (-1)^n sqrt(n!/m!) (x - ip)^a e^{-r^2/2} L_n^{(a)}(r^2),

summed diagonal by diagonal with the associated Laguerre upward recurrence;
the Gaussian factor is folded into the recurrence seed and the zeta powers are
scaled by 1/sqrt(a!) per step, which keeps every intermediate within double
range out to a few hundred photons.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import gammaln

from .fock import DensityMatrix, StateVector
from .gaussian import GaussianParams, SearchConfig, _OrbitSearcher
from .states import cubic_phase_state

DEFAULT_ISLAND_THRESHOLD = 1e-4  # relative to max(p_n); see islands()


@dataclass(frozen=True)
class WignerGrid:
    """W(x, p) sampled on a rectangular grid; values[i, j] = W(x_axis[i], p_axis[j])."""

    x_axis: np.ndarray
    p_axis: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x_axis, float)
        p = np.asarray(self.p_axis, float)
        v = np.asarray(self.values, float)
        if v.shape != (x.size, p.size):
            raise ValueError("values shape must be (len(x_axis), len(p_axis))")
        for name, arr in (("x_axis", x), ("p_axis", p), ("values", v)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def cell_area(self) -> float:
        dx = self.x_axis[1] - self.x_axis[0] if self.x_axis.size > 1 else 1.0
        dp = self.p_axis[1] - self.p_axis[0] if self.p_axis.size > 1 else 1.0
        return float(dx * dp)

    def total_mass(self) -> float:
        return float(self.values.sum() * self.cell_area)


def grid_axis(bound: float = 6.0, step: float = 0.06) -> np.ndarray:
    """Symmetric axis [-bound, bound] with the given step (default 201 points)."""
    n = int(round(2 * bound / step))
    return -bound + step * np.arange(n + 1)


def _as_density(state_or_rho) -> np.ndarray:
    if isinstance(state_or_rho, StateVector):
        return np.outer(state_or_rho.amps, state_or_rho.amps.conj())
    return state_or_rho.mat


def wigner(state_or_rho: StateVector | DensityMatrix,
           x_axis: np.ndarray | None = None,
           p_axis: np.ndarray | None = None) -> WignerGrid:
    """Evaluate the Wigner function on the given axes (default [-6, 6], step 0.06)."""
    xs = grid_axis() if x_axis is None else np.asarray(x_axis, float)
    ps = grid_axis() if p_axis is None else np.asarray(p_axis, float)
    if xs.size < 1 or ps.size < 1:
        raise ValueError("Wigner grid axes must be non-empty")
    rho = _as_density(state_or_rho)
    dim = rho.shape[0]

    grid_x, grid_p = np.meshgrid(xs, ps, indexing="ij")
    r2 = grid_x * grid_x + grid_p * grid_p
    zeta = grid_x - 1j * grid_p
    gauss = np.exp(-r2 / 2) / (2 * np.pi)
    lfact = gammaln(np.arange(dim + 1) + 1.0)

    w = np.zeros_like(r2)
    zt = np.ones_like(zeta)  # zeta^a / sqrt(a!)
    for a in range(dim):
        if a > 0:
            zt = zt * zeta / np.sqrt(a)
        diag = np.array([rho[n + a, n] for n in range(dim - a)])
        if not np.any(diag):
            continue
        acc = np.zeros_like(zeta)
        lag_prev = gauss                      # L~_0^{(a)} with Gaussian folded in
        lag = gauss * (1 + a - r2)            # L~_1^{(a)}
        for n in range(dim - a):
            if n == 0:
                lag_n = lag_prev
            elif n == 1:
                lag_n = lag
            else:
                lag_n = ((2 * (n - 1) + 1 + a - r2) * lag
                         - (n - 1 + a) * lag_prev) / n
                lag_prev, lag = lag, lag_n
            if diag[n] != 0:
                coef = np.exp(0.5 * (lfact[n] + lfact[a] - lfact[n + a]))
                term = ((-1.0) ** n) * coef * diag[n] * zt * lag_n
                acc += term if a == 0 else 2 * term
        w += acc.real
    return WignerGrid(xs, ps, w)


def fidelity(rho: DensityMatrix, psi: StateVector) -> float:
    """<psi|rho|psi>. If psi carries a truncation tail (norm < 1), the raw
    unnormalized overlap is returned, so the tail honestly lowers the value."""
    if rho.dim != psi.dim:
        raise ValueError(f"dimension mismatch: {rho.dim} vs {psi.dim}")
    return float(np.real(np.vdot(psi.amps, rho.mat @ psi.amps)))


def photon_statistics(state_or_rho, n_max: int) -> np.ndarray:
    """Probabilities p_n = rho_nn for n = 0..n_max, clipped at tiny negatives."""
    rho = _as_density(state_or_rho)
    if n_max >= rho.shape[0]:
        raise ValueError(f"n_max={n_max} outside dimension {rho.shape[0]}")
    p = np.diag(rho).real[:n_max + 1].copy()
    if p.min() < -1e-12:
        raise ValueError("diagonal has a significantly negative entry")
    return np.clip(p, 0.0, None)


def islands(probs: np.ndarray, threshold: float | None = None) -> list[tuple[int, int]]:
    """Maximal runs of probabilities above threshold, as inclusive (start, end).

    The default threshold is 1e-4 of the largest entry: the photon-number
    minima that separate the islands of a strong cubic state bottom out
    around 1e-5 of the peak, well below, while island members stay above.
    """
    probs = np.asarray(probs, dtype=float)
    if threshold is None:
        threshold = DEFAULT_ISLAND_THRESHOLD * probs.max()
    if threshold <= 0:
        raise ValueError("island threshold must be positive")
    out: list[tuple[int, int]] = []
    start: int | None = None
    for i, v in enumerate(probs):
        if v > threshold and start is None:
            start = i
        elif v <= threshold and start is not None:
            out.append((start, i - 1))
            start = None
    if start is not None:
        out.append((start, len(probs) - 1))
    return out


class Negativity(NamedTuple):
    min_value: float
    negative_volume: float


def negativity(grid: WignerGrid) -> Negativity:
    """Most negative grid value and the integrated absolute negative part."""
    v = grid.values
    neg = np.where(v < 0, -v, 0.0)
    return Negativity(float(v.min()), float(neg.sum() * grid.cell_area))


class PhaseFitResult(NamedTuple):
    theta: float
    sign: int
    fidelity: float
    params: GaussianParams


def phase_fit(rho: DensityMatrix, gamma: float,
              search: SearchConfig | None = None,
              theta_step: float = np.pi / 8) -> PhaseFitResult:
    """Best cubic reference angle and sign for a state, by orbit fidelity.

    Maximizes the Gaussian-orbit fidelity of exp(i sign gamma x_theta^3)|0>
    over theta in {0, theta_step, ...} and sign in {+1, -1}, with rotation
    excluded from the orbit: a free rotation would absorb theta entirely and
    make every angle tie. Displacement and squeezing remain free. Ties resolve
    to the first candidate scanned (sign +1 first, then ascending theta).
    """
    cfg = search or SearchConfig()
    cfg = SearchConfig(**{**cfg.to_dict(), "include_rotation": False})
    thetas = np.arange(0.0, 2 * np.pi - 1e-9, theta_step)
    best: tuple[float, float, int, GaussianParams] | None = None
    for sign in (1, -1):
        for theta in thetas:
            ref = cubic_phase_state(sign * gamma, theta, rho.dim).state
            fit = _OrbitSearcher(rho, ref, cfg).run()
            if best is None or fit.fidelity > best[0]:
                best = (fit.fidelity, float(theta), sign, fit.params)
    return PhaseFitResult(best[1], best[2], best[0], best[3])


def canonical_cubic_angle(theta: float, sign: int) -> float:
    """Fold (theta, sign) into the angle of the +gamma representative.

    exp(-i g x_theta^3) equals exp(+i g x_{theta+pi}^3), so sign = -1 maps to
    theta + pi. Returns an angle in [0, 2 pi).
    """
    t = theta if sign > 0 else theta + np.pi
    return float(t % (2 * np.pi))


def cubic_unitary_label(theta: float, sign: int, snap: float = np.pi / 16) -> str:
    """Human-readable generator for a fitted (theta, sign): one of the four
    quadrature cubes when within ``snap`` of it, else 'mixed(angle)'."""
    t = canonical_cubic_angle(theta, sign)
    names = {0.0: "+x^3", np.pi / 2: "+p^3", np.pi: "-x^3", 3 * np.pi / 2: "-p^3"}
    for angle, name in names.items():
        d = abs((t - angle + np.pi) % (2 * np.pi) - np.pi)
        if d <= snap:
            return name
    return f"mixed({t:.4f})"


def wigner_to_csv(grid: WignerGrid, path) -> None:
    """Rows ``x,p,w`` in row-major order over the grid."""
    nx, npts = grid.values.shape
    xs = np.repeat(grid.x_axis, npts)
    ps = np.tile(grid.p_axis, nx)
    data = np.column_stack([xs, ps, grid.values.ravel()])
    np.savetxt(path, data, fmt="%.17g", delimiter=",", header="x,p,w", comments="")


def photon_stats_to_csv(probs: np.ndarray, path) -> None:
    """Rows ``n,p``."""
    data = np.column_stack([np.arange(len(probs)), probs])
    np.savetxt(path, data, fmt=["%d", "%.17g"], delimiter=",", header="n,p",
               comments="")
