"""Two-coherent-state superpositions, their decoherence, and quantum halos.

A cat state is stored as amplitudes and phase-space centers of its two
branches; its density matrix is four Gaussian kernels, one per branch pair.
Stroboscopic snapshots (full periods, t = 2 n pi / Omega) are available in
closed form; general times go through the exact kernel propagation.  The halo
side quantifies which superpositions the environment fails to distinguish:
small phase-space separations survive, and a ground/first-excited
superposition serves as the canonical surviving example.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .core import PhaseSpacePoint, SimParams
from .grids import GridSpec
from .oracle import NumericDM, fock_coherence, fock_superposition_dm, propagate_numeric
from .propagate import GaussianKernel, coherent_kernel_pair, evolve_kernel


@dataclass(frozen=True)
class CatSpec:
    """Superposition c1 |s1> + c2 |s2> of two coherent states."""

    c1: complex
    c2: complex
    s1: PhaseSpacePoint
    s2: PhaseSpacePoint

    def __post_init__(self):
        if self.c1 == 0 and self.c2 == 0:
            raise ValueError("cat state needs at least one nonzero amplitude")

    def normalized_amplitudes(self, params: SimParams) -> tuple[complex, complex]:
        """Amplitudes rescaled so the state has unit norm, overlap included."""
        ov = coherent_overlap(self.s2, self.s1, params)
        norm_sq = (abs(self.c1) ** 2 + abs(self.c2) ** 2
                   + 2.0 * (self.c1 * self.c2.conjugate() * ov.conjugate()).real)
        if norm_sq <= 0:
            raise ValueError("cat state has zero norm")
        scale = 1.0 / math.sqrt(norm_sq)
        return self.c1 * scale, self.c2 * scale


def coherent_overlap(sa: PhaseSpacePoint, sb: PhaseSpacePoint, params: SimParams) -> complex:
    """<a|b> for coherent states; magnitude exp(-Delta^2/2)."""
    kap = params.kappa
    m_om = params.mass * params.omega
    dx = sb.x - sa.x
    dp = sb.p - sa.p
    delta_sq = 0.5 * kap * (dx * dx + (dp / m_om) ** 2)
    phase = (sb.p * sa.x - sa.p * sb.x) / (2.0 * params.hbar)
    return cmath.exp(-0.5 * delta_sq + 1j * phase)


def separation_sq(cat: CatSpec, params: SimParams) -> float:
    """Squared phase-space separation of the branches, in ground-state units."""
    kap = params.kappa
    m_om = params.mass * params.omega
    dx = cat.s1.x - cat.s2.x
    dp = cat.s1.p - cat.s2.p
    return float(0.5 * kap * (dx * dx + (dp / m_om) ** 2))


def decoherence_time(cat: CatSpec, params: SimParams) -> float:
    """Interference-suppression timescale t_D = [Omega D (Delta^2 - 1)]^{-1}.

    Returns inf when D = 0 or when the branches sit within Delta^2 <= 1 of each
    other (inside the halo, where the formula stops making sense).
    """
    delta_sq = separation_sq(cat, params)
    if params.D == 0.0 or delta_sq <= 1.0:
        return math.inf
    return float(1.0 / (params.omega * params.D * (delta_sq - 1.0)))


def halo_radius(t_max: float, params: SimParams) -> float:
    """Phase-space radius (in Delta units) the environment leaves coherent up to t_max.

    radius = 2 / sqrt(D Omega t_max); infinite when D = 0.  In the regime where
    decoherence still selects states (D Omega t << 1) this always exceeds 1, so
    the minimal halo around any coherent state covers Delta ~ 1.
    """
    if t_max <= 0:
        raise ValueError(f"t_max must be positive, got {t_max}")
    if params.D == 0.0:
        return math.inf
    return float(2.0 / math.sqrt(params.D * params.omega * t_max))


@dataclass(frozen=True)
class CatDM:
    """Four-kernel density matrix of an evolved cat state."""

    kernels: tuple[tuple[GaussianKernel, GaussianKernel], tuple[GaussianKernel, GaussianKernel]]
    t: float
    D: float
    params: SimParams

    def position_dm(self, grid: GridSpec) -> np.ndarray:
        q = grid.coords()
        Q, Qp = np.meshgrid(q, q, indexing="ij")
        total = np.zeros((grid.points, grid.points), dtype=complex)
        for row in self.kernels:
            for k in row:
                total += k.value(Q, Qp)
        return total

    def trace(self) -> float:
        return float(sum(k.trace() for row in self.kernels for k in row).real)


def _initial_kernels(cat: CatSpec, params: SimParams):
    c1, c2 = cat.normalized_amplitudes(params)
    amps = (c1, c2)
    pts = (cat.s1, cat.s2)
    kernels = []
    for i in range(2):
        row = []
        for j in range(2):
            k = coherent_kernel_pair(pts[i].x, pts[i].p, pts[j].x, pts[j].p, params)
            coeff = amps[i] * amps[j].conjugate()
            row.append(GaussianKernel(quad=k.quad, lin=k.lin,
                                      log_norm=k.log_norm + cmath.log(coeff)))
        kernels.append(tuple(row))
    return tuple(kernels)


def cat_dm_general(cat: CatSpec, t: float, params: SimParams) -> CatDM:
    """Evolve the cat to an arbitrary time, kernel by kernel."""
    if t < 0:
        raise ValueError(f"time must be non-negative, got {t}")
    rows = tuple(tuple(evolve_kernel(k, t, params) for k in row)
                 for row in _initial_kernels(cat, params))
    return CatDM(kernels=rows, t=float(t), D=params.D, params=params)


def cat_dm_stroboscopic(cat: CatSpec, n: int, params: SimParams) -> CatDM:
    """Cat state after n full periods, from the closed-form kernel blocks.

    Each branch pair (i, j) keeps its Gaussian shape with the spread factor
    Lambda = 1 + 2 n pi D, picks up a drifted relative-coordinate center, and
    the off-diagonal pairs are suppressed by the squared phase-space separation.
    """
    if n < 0 or int(n) != n:
        raise ValueError(f"period count must be a non-negative integer, got {n}")
    if n == 0:
        return CatDM(kernels=_initial_kernels(cat, params), t=0.0, D=params.D, params=params)

    kap = params.kappa
    hb = params.hbar
    m_om = params.mass * params.omega
    npd = n * np.pi * params.D
    lam = 1.0 + 2.0 * npd
    c1, c2 = cat.normalized_amplitudes(params)
    amps = (c1, c2)
    pts = (cat.s1, cat.s2)

    rows = []
    for i in range(2):
        row = []
        for j in range(2):
            xi, pi_ = pts[i].x, pts[i].p
            xj, pj = pts[j].x, pts[j].p
            X, dX = xi + xj, xi - xj
            dP = pi_ - pj
            quad = np.array([[0.5 * kap * (1.0 + lam**2) / lam, 0.5 * kap * (1.0 - lam**2) / lam],
                             [0.5 * kap * (1.0 - lam**2) / lam, 0.5 * kap * (1.0 + lam**2) / lam]],
                            dtype=complex)
            lin = np.array([
                0.5 * kap * (X + lam * dX) / lam + 1j * (pi_ * (1.0 + npd) + npd * pj) / (hb * lam),
                0.5 * kap * (X - lam * dX) / lam - 1j * (pj * (1.0 + npd) + npd * pi_) / (hb * lam),
            ], dtype=complex)
            log_norm = (cmath.log(amps[i] * amps[j].conjugate())
                        + 0.5 * np.log(kap / (np.pi * lam))
                        - 0.25 * kap * (X**2 + dX**2) / lam
                        - 0.5j * (xi * pi_ - xj * pj) / (hb * lam)
                        - 0.5 * kap * npd * (dX**2 + (dP / m_om) ** 2) / lam)
            row.append(GaussianKernel(quad=quad, lin=lin, log_norm=complex(log_norm)))
        rows.append(tuple(row))
    return CatDM(kernels=tuple(rows), t=2.0 * n * np.pi / params.omega, D=params.D, params=params)


def visibility(catdm: CatDM, grid: GridSpec | None = None) -> float:
    """Cross-peak magnitude over the geometric mean of the diagonal peaks.

    Equals 1 for the fresh cat and decays with accumulated decoherence.  Peaks
    are evaluated in closed form from the kernel parameters; pass a grid to use
    sampled maxima instead (slower, resolution-limited).
    """
    ks = catdm.kernels
    if grid is None:
        log_cross = ks[0][1].log_peak_magnitude()
        log_d1 = ks[0][0].log_peak_magnitude()
        log_d2 = ks[1][1].log_peak_magnitude()
    else:
        q = grid.coords()
        Q, Qp = np.meshgrid(q, q, indexing="ij")
        log_cross = float(np.log(np.abs(ks[0][1].value(Q, Qp)).max()))
        log_d1 = float(np.log(np.abs(ks[0][0].value(Q, Qp)).max()))
        log_d2 = float(np.log(np.abs(ks[1][1].value(Q, Qp)).max()))
    if not (np.isfinite(log_d1) and np.isfinite(log_d2)):
        raise ValueError("degenerate diagonal blocks")
    return float(np.exp(log_cross - 0.5 * (log_d1 + log_d2)))


def visibility_decay_rate(cat: CatSpec, params: SimParams, n_max: int = 5) -> float:
    """Decay rate of the interference weight, fitted over n = 1..n_max periods.

    The cross blocks carry weight |cross|^2 relative to the diagonal ones, so
    the rate is the through-origin least-squares slope of -2 ln(visibility)
    against time at the stroboscopic snapshots; it is the quantity the
    decoherence timescale 1/t_D = Omega D (Delta^2 - 1) estimates.
    """
    ns = np.arange(1, n_max + 1)
    ts = 2.0 * np.pi * ns / params.omega
    ys = np.array([-2.0 * np.log(visibility(cat_dm_stroboscopic(cat, int(n), params)))
                   for n in ns])
    return float(np.sum(ts * ys) / np.sum(ts * ts))


@dataclass(frozen=True)
class HaloDemo:
    """Before/after snapshot of the (|0>+|1>)/sqrt(2) state and its coherence retention."""

    initial: NumericDM
    final: NumericDM
    retention: float
    n_periods: int


def halo_demo_fock(n: int, D: float, params: SimParams,
                   grid: GridSpec | None = None) -> HaloDemo:
    """Evolve (|0> + |1>)/sqrt(2) for n full periods and measure what survives.

    Retention is |<0| rho |1>| relative to its initial value: the superposition
    sits inside the halo of the ground state, so for 2 n pi D of a few percent
    it should stay essentially coherent.  Evolution is numeric (the state is
    not Gaussian), via the quadrature oracle.
    """
    if n < 1 or int(n) != n:
        raise ValueError(f"period count must be a positive integer, got {n}")
    par = SimParams(omega=params.omega, mass=params.mass, hbar=params.hbar, D=D)
    if grid is None:
        grid = GridSpec(center=0.0, half_width=10.0 * par.ground_width, points=256)
    initial = fock_superposition_dm(grid, par)
    final = propagate_numeric(initial, 2.0 * np.pi * n / par.omega, par)
    c0 = fock_coherence(initial, par)
    ct = fock_coherence(final, par)
    return HaloDemo(initial=initial, final=final,
                    retention=float(abs(ct) / abs(c0)), n_periods=int(n))
