"""Independent brute-force verification tools.

Everything here works directly on position-grid samples: double trapezoid
quadrature of the exact one-period kernel for time evolution, dense Hermitian
eigendecomposition for spectra and entropy, and an analytic Lorentz-oscillator
dielectric pair for checking the dispersion-relation transform.  None of it
reuses the closed-form Gaussian algebra it is meant to check.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .core import GaussianDM, SimParams, position_dm
from .grids import GridSpec
from .propagate import split_steps

_EDGE_TAIL = 3e-8           # max |rho| allowed at the grid boundary, relative to peak
_PHASE_STEP_FAIL = 6.0      # rad per sample above which the quadrature is junk
_NEG_EIG_CLIP = 1e-10       # eigenvalues above -this are clipped silently to 0
_NEG_EIG_FAIL = 1e-6        # more negative than this signals a resolution failure


class ResolutionError(RuntimeError):
    """The grid cannot support the requested operation at useful accuracy."""


@dataclass(frozen=True)
class NumericDM:
    """Density matrix sampled on grid x grid, Hermitian with unit weighted trace."""

    matrix: np.ndarray
    grid: GridSpec

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        n = self.grid.points
        if m.shape != (n, n):
            raise ValueError(f"matrix shape {m.shape} does not match grid with {n} points")
        herm = np.max(np.abs(m - m.conj().T))
        scale = np.max(np.abs(m))
        if scale > 0 and herm > 1e-10 * scale:
            raise ValueError(f"matrix is not Hermitian: deviation {herm:.3e} vs scale {scale:.3e}")
        object.__setattr__(self, "matrix", m)

    def position_dm(self, grid: GridSpec) -> np.ndarray:
        if grid != self.grid:
            raise ValueError("NumericDM can only be sampled on its own grid")
        return self.matrix

    def trace(self) -> float:
        w = self.grid.weights()
        return float(np.real(np.sum(w * np.diag(self.matrix))))


def numeric_from_gaussian(dm: GaussianDM, grid: GridSpec) -> NumericDM:
    return NumericDM(matrix=position_dm(dm, grid), grid=grid)


def grid_trace(ndm: NumericDM) -> float:
    return ndm.trace()


def grid_purity(ndm: NumericDM) -> float:
    """Tr rho^2 by double quadrature."""
    w = ndm.grid.weights()
    return float(np.real(np.einsum("i,j,ij,ji->", w, w, ndm.matrix, ndm.matrix)))


def grid_eigenvalues(ndm: NumericDM) -> np.ndarray:
    """Spectrum of the weighted kernel, descending; approximates the state's weights."""
    sw = np.sqrt(ndm.grid.weights())
    B = sw[:, None] * ndm.matrix * sw[None, :]
    B = 0.5 * (B + B.conj().T)
    return np.linalg.eigvalsh(B)[::-1]


def grid_entropy(ndm: NumericDM) -> float:
    """Von Neumann entropy from grid diagonalization.

    Small negative eigenvalues (above -1e-10) are clipped with a warning count;
    anything more negative than -1e-6 means the grid failed to resolve the
    state and raises ResolutionError.
    """
    eig = grid_eigenvalues(ndm)
    most_negative = eig.min() if eig.size else 0.0
    if most_negative < -_NEG_EIG_FAIL:
        raise ResolutionError(
            f"grid diagonalization produced eigenvalue {most_negative:.3e}; "
            "the grid under-resolves the state")
    n_clipped = int(np.sum(eig < 0.0))
    if most_negative < -_NEG_EIG_CLIP:
        warnings.warn(f"clipped {n_clipped} slightly negative eigenvalues "
                      f"(most negative {most_negative:.3e})", stacklevel=2)
    lam = eig[eig > 0.0]
    return float(-np.sum(lam * np.log(lam)))


# ---------------------------------------------------------------------------
# Direct quadrature of the one-period kernel


def _one_step_blocks(t: float, params: SimParams):
    kap = params.kappa
    wt = params.omega * t
    s, co = np.sin(wt), np.cos(wt)
    d4 = kap * params.D / (4.0 * s * s)
    k1 = wt - s * co
    k2 = wt * co - s
    diag = 2.0 * d4 * k1
    off = 2.0 * d4 * k2
    P = np.array([[-1j * kap * co / s + diag, -diag],
                  [-diag, 1j * kap * co / s + diag]], dtype=complex)
    S = np.array([[-1j * kap / s + off, -off],
                  [-off, 1j * kap / s + off]], dtype=complex)
    pref = kap / (2.0 * np.pi * abs(s))
    return P, S, pref


def _state_bandwidth(rho: np.ndarray, spacing: float) -> float:
    """Largest significant spatial frequency of the sampled state, rad/length.

    Read off the 2D spectrum rather than finite-difference phases, which would
    mistake sign changes at wave-function zeros for fast oscillation.
    """
    spec = np.abs(np.fft.fft2(rho))
    freqs = 2.0 * np.pi * np.fft.fftfreq(rho.shape[0], d=spacing)
    significant = spec > 1e-7 * spec.max()
    fx = np.abs(freqs[np.any(significant, axis=1)]).max()
    fy = np.abs(freqs[np.any(significant, axis=0)]).max()
    return float(max(fx, fy))


def _check_resolution(rho: np.ndarray, grid: GridSpec, t: float, params: SimParams) -> None:
    peak = np.abs(rho).max()
    if peak == 0.0:
        raise ValueError("empty state")
    edge = max(np.abs(rho[0, :]).max(), np.abs(rho[-1, :]).max(),
               np.abs(rho[:, 0]).max(), np.abs(rho[:, -1]).max())
    if edge > _EDGE_TAIL * peak:
        raise ResolutionError(
            f"state tails at the grid edge are {edge / peak:.2e} of the peak; "
            "enlarge the grid")

    P, S, _ = _one_step_blocks(t, params)
    ext = np.abs(grid.coords()).max()
    omega_prop = (abs(S[0, 0]) + abs(S[0, 1]) + abs(P[0, 0]) + abs(P[0, 1])) * ext
    omega_state = _state_bandwidth(rho, grid.spacing)
    step_phase = grid.spacing * (omega_prop + omega_state)
    if step_phase > _PHASE_STEP_FAIL:
        raise ResolutionError(
            f"integrand advances {step_phase:.2f} rad per grid sample "
            f"(limit {_PHASE_STEP_FAIL}); refine the grid")


def _propagate_one_step(rho: np.ndarray, grid: GridSpec, t: float, params: SimParams,
                        q_out: np.ndarray | None = None, block: int = 16) -> np.ndarray:
    """Double trapezoid quadrature of the one-period kernel, one time step.

    The coupling exponent is separable, exp(Q (S00 qi + S01 qj)) *
    exp(Q' (S10 qi + S11 qj)), so the double sum runs as batched matrix
    products over blocks of output rows; summation order is fixed, results are
    deterministic.  `q_out` selects output positions (defaults to the input
    grid).
    """
    P, S, pref = _one_step_blocks(t, params)
    q = grid.coords()
    w = grid.weights()
    if q_out is None:
        q_out = q
    n_out = len(q_out)

    qi = q[:, None]
    qj = q[None, :]
    win = (w[:, None] * w[None, :] * rho
           * np.exp(-0.5 * (P[0, 0] * qi * qi + 2.0 * P[0, 1] * qi * qj + P[1, 1] * qj * qj)))

    e_row_i = np.exp(np.outer(q_out, S[0, 0] * q))   # [a, i] output row vs first input index
    e_row_j = np.exp(np.outer(q_out, S[0, 1] * q))   # [a, j] output row vs second input index
    f_col_i = np.exp(np.outer(q, S[1, 0] * q_out))   # [i, b] input index vs output column
    f_col_j = np.exp(np.outer(q, S[1, 1] * q_out))   # [j, b]

    out = np.empty((n_out, n_out), dtype=complex)
    for lo in range(0, n_out, block):
        hi = min(lo + block, n_out)
        t1 = win[None, :, :] * e_row_j[lo:hi, None, :]      # [a, i, j]
        inner = t1 @ f_col_j                                 # [a, i, b]
        out[lo:hi] = np.einsum("ai,aib,ib->ab", e_row_i[lo:hi], inner, f_col_i,
                               optimize=True)

    qo_i = q_out[:, None]
    qo_j = q_out[None, :]
    quad_out = np.exp(-0.5 * (P[0, 0] * qo_i * qo_i + 2.0 * P[0, 1] * qo_i * qo_j
                              + P[1, 1] * qo_j * qo_j))
    return pref * quad_out * out


def propagate_stencil(initial: NumericDM, t: float, params: SimParams,
                      h: float) -> np.ndarray:
    """Evolved rho on the 3x3 output stencil {-h, 0, h}^2, single-step times only.

    Cheap even on very fine input grids, because only nine output points are
    quadrated.  Combine with `fit_gaussian_abc` to read off evolved Gaussian
    parameters without representing the whole output state.
    """
    if t <= 0:
        raise ValueError(f"time must be positive, got {t}")
    if split_steps(t, params) != 1:
        raise ValueError("stencil propagation only supports single-step times "
                         f"(Omega t <= 1.5), got Omega t = {params.omega * t}")
    _check_resolution(initial.matrix, initial.grid, t, params)
    q_out = np.array([-h, 0.0, h])
    return _propagate_one_step(initial.matrix, initial.grid, t, params, q_out=q_out)


def fit_gaussian_abc(stencil: np.ndarray, h: float, params: SimParams) -> tuple[float, float, float]:
    """Read (a, b, c) off a centered 3x3 sample of a zero-centered Gaussian state.

    log rho is exactly quadratic in (Q, Q'), so central second differences
    recover the coefficients with no truncation error.
    """
    if stencil.shape != (3, 3):
        raise ValueError("expected a 3x3 stencil")
    kap = params.kappa
    lr = np.log(stencil)
    d2_diag = (lr[2, 2] - 2.0 * lr[1, 1] + lr[0, 0]) / h**2   # along Q = Q'
    d2_anti = (lr[2, 0] - 2.0 * lr[1, 1] + lr[0, 2]) / h**2   # along Q = -Q'
    d2_row = (lr[2, 1] - 2.0 * lr[1, 1] + lr[0, 1]) / h**2    # along Q at Q' = 0
    a = -d2_diag.real / (2.0 * kap)
    b = -d2_anti.real / (2.0 * kap)
    c = d2_row.imag / kap
    return float(a), float(b), float(c)


def propagate_numeric(initial: NumericDM, t: float, params: SimParams) -> NumericDM:
    """Evolve a sampled state by direct double quadrature of the exact kernel.

    Times near sin(Omega t) = 0 are composed from sub-steps (the white-noise
    kernel is a semigroup).  Raises ResolutionError when the grid cannot
    resolve the integrand or the state leaks off the grid edge.
    """
    if t < 0:
        raise ValueError(f"time must be non-negative, got {t}")
    if t == 0:
        return initial
    n_steps = split_steps(t, params)
    rho = initial.matrix
    for _ in range(n_steps):
        _check_resolution(rho, initial.grid, t / n_steps, params)
        rho = _propagate_one_step(rho, initial.grid, t / n_steps, params)
    rho = 0.5 * (rho + rho.conj().T)
    out = NumericDM(matrix=rho, grid=initial.grid)
    if abs(out.trace() - 1.0) > 1e-4:
        raise ResolutionError(f"propagated trace drifted to {out.trace():.6f}; refine the grid")
    return out


def orbit_width(C: complex, params: SimParams) -> float:
    """Largest 1-sigma position width a squeezed state C reaches over a free orbit.

    The width breathes between the position and momentum quadratures; the
    envelope is max_theta of cos^2 + |C|^2 sin^2 - 2 Im(C) sin cos, scaled by
    the initial variance.  The momentum-side envelope is the same by symmetry.
    """
    C = complex(C)
    if C.real <= 0:
        raise ValueError(f"need Re C > 0, got {C}")
    mod2 = abs(C) ** 2
    peak = 0.5 * (1.0 + mod2) + np.sqrt(0.25 * (1.0 - mod2) ** 2 + C.imag**2)
    return params.ground_width * float(np.sqrt(peak / (2.0 * C.real)))


def suggest_grid(C: complex, t: float, params: SimParams, span: float = 0.0,
                 n_sigma: float = 9.0, min_points: int = 128,
                 max_points: int = 1024) -> GridSpec:
    """Grid able to hold and propagate the squeezed state C up to time t.

    The extent covers the breathing orbit width inflated by the noise spread;
    nine sigmas keep even the slowly decaying off-diagonal corners of rho at
    the 1e-9 level.  The point count keeps the kernel phases near 4 rad per
    sample, which the Gaussian envelopes turn into grid-norm errors far below
    1e-4 (the hard failure guard sits at 6).
    """
    sigma = orbit_width(C, params) * np.sqrt(1.0 + params.D * params.omega * t)
    half = span + n_sigma * sigma
    n_steps = split_steps(t, params)
    wt_step = params.omega * t / n_steps
    s = abs(np.sin(wt_step)) if wt_step > 0 else 1.0
    s = max(s, 0.1)
    omega_prop = params.kappa * (1.0 + abs(np.cos(wt_step))) * half / s
    omega_state = 5.7 * params.kappa * sigma
    spacing = 4.0 / (omega_prop + omega_state)
    pts = int(2.0 * half / spacing) + 1
    pts = max(min_points, 64 * int(np.ceil(pts / 64)))
    if pts > max_points:
        raise ResolutionError(
            f"required grid of {pts} points exceeds the {max_points}-point budget")
    return GridSpec(center=0.0, half_width=float(half), points=pts)


# ---------------------------------------------------------------------------
# Non-Gaussian reference states


def oscillator_eigenfunction(n: int, q: np.ndarray, params: SimParams) -> np.ndarray:
    """Real Hermite-Gaussian phi_n(q) of the mode, n in {0, 1}."""
    kap = params.kappa
    g0 = (kap / np.pi) ** 0.25 * np.exp(-0.5 * kap * q * q)
    if n == 0:
        return g0
    if n == 1:
        return np.sqrt(2.0 * kap) * q * g0
    raise ValueError("only the ground and first excited states are needed here")


def fock_superposition_dm(grid: GridSpec, params: SimParams) -> NumericDM:
    """Density matrix of (|0> + |1>)/sqrt(2) sampled on the grid."""
    q = grid.coords()
    psi = (oscillator_eigenfunction(0, q, params) + oscillator_eigenfunction(1, q, params)) / np.sqrt(2.0)
    return NumericDM(matrix=np.outer(psi, psi).astype(complex), grid=grid)


def fock_coherence(ndm: NumericDM, params: SimParams) -> complex:
    """<0| rho |1> by quadrature; 1/2 for the fresh (|0>+|1>)/sqrt(2) state."""
    q = ndm.grid.coords()
    w = ndm.grid.weights()
    phi0 = oscillator_eigenfunction(0, q, params)
    phi1 = oscillator_eigenfunction(1, q, params)
    return complex((w * phi0) @ ndm.matrix @ (w * phi1))


# ---------------------------------------------------------------------------
# Analytic dielectric model for checking the dispersion transform


def lorentz_kk_oracle(omega_p2: float, omega_0: float, width: float,
                      omegas: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Lorentz-oscillator dielectric pair K = 1 + wp^2 / (w0^2 - w^2 - i g w).

    Returns (Im K, Re K) tables on `omegas`; the two sides are exact transforms
    of each other, so they validate any dispersion-relation implementation.
    """
    if not (omega_p2 > 0 and omega_0 > 0 and width > 0):
        raise ValueError("Lorentz oracle needs positive parameters")
    w = np.asarray(omegas, dtype=float)
    denom = (omega_0**2 - w**2) ** 2 + (width * w) ** 2
    imk = omega_p2 * width * w / denom
    rek = 1.0 + omega_p2 * (omega_0**2 - w**2) / denom
    return imk, rek
