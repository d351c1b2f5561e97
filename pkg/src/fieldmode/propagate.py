"""Closed-form time evolution under the weak-coupling, high-temperature propagator.

Two equivalent routes are provided.  `evolve_squeezed` / `evolve_coherent` use
the closed-form coefficient functions alpha(t), beta(t), lam(t) of an initial
squeezed state, which stay finite at all times.  `evolve_kernel` propagates an
arbitrary complex Gaussian two-point kernel by exact 2x2 complex Gaussian
integration of the one-period kernel; the white-noise kernel is an exact
semigroup, so times where sin(Omega t) vanishes are handled by composing
sub-steps.

Phase convention: the evolved phase coefficient is c(t) = alpha(t) * lam(t)
with lam as defined in `abc_coefficients`; it matches the exact kernel
propagation (and the numeric quadrature oracle) to machine precision.  The
diagonal-form route `evolve_special` quotes the same convention.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import GaussianDM, SimParams, make_squeezed

_SIN_SAFE = 0.15  # |sin(Omega t)| below this triggers sub-step composition


def abc_coefficients(C: complex, t: float, params: SimParams) -> tuple[float, float, float]:
    """Dimensionless coefficient functions (alpha, beta, lam) at time t.

    For an initial pure state psi ~ exp(-(M Omega/2 hbar) C Q^2) the evolved
    density matrix has a = alpha Re C, b = alpha beta, c = alpha lam.
    """
    C = complex(C)
    if not (C.real > 0):
        raise ValueError(f"need Re C > 0, got {C}")
    if t < 0:
        raise ValueError(f"time must be non-negative, got {t}")
    D = params.D
    wt = params.omega * t
    s, co = np.sin(wt), np.cos(wt)
    cr, ci = C.real, C.imag
    mod2 = cr * cr + ci * ci

    inv_alpha = cr**2 * s**2 + D * cr * (wt - s * co) + (ci * s - co) ** 2
    beta = (cr * (1.0 + D**2 * (wt**2 - s**2))
            + D * mod2 * (wt - s * co)
            + D * (wt + s * co)
            - 2.0 * D * ci * s**2)
    lam = (mod2 - 1.0) * s * co - ci * (co**2 - s**2) + D * cr * s**2
    return 1.0 / inv_alpha, beta, lam


def evolve_squeezed(C: complex, t: float, params: SimParams) -> GaussianDM:
    """Evolve the centered squeezed state with parameter C for time t."""
    alpha, beta, lam = abc_coefficients(C, t, params)
    cr = complex(C).real
    return GaussianDM(params=params, a=alpha * cr, b=alpha * beta, c=alpha * lam)


def classical_orbit(x: float, p: float, t: float, params: SimParams) -> tuple[float, float]:
    """Harmonic-oscillator trajectory of a phase-space point."""
    wt = params.omega * t
    s, co = np.sin(wt), np.cos(wt)
    m_om = params.mass * params.omega
    return x * co + (p / m_om) * s, p * co - m_om * x * s


def evolve_coherent(x: float, p: float, t: float, params: SimParams) -> GaussianDM:
    """Evolve a coherent state; its center follows the classical equations of motion."""
    if t < 0:
        raise ValueError(f"time must be non-negative, got {t}")
    dm = evolve_squeezed(1.0, t, params)
    xt, pt = classical_orbit(x, p, t, params)
    return GaussianDM(params=params, a=dm.a, b=dm.b, c=dm.c, x=xt, p=pt)


def sigma_squeezing(t: float, params: SimParams) -> complex:
    """The entropy-minimizing initial squeezing sigma(t); singular as t -> 0.

    |sigma|^2 = (2 w t + sin 2 w t) / (2 w t - sin 2 w t),
    Im sigma  = 2 sin^2(w t) / (2 w t - sin 2 w t),
    Re sigma  = +sqrt(|sigma|^2 - Im^2) (the normalizable root).
    """
    if t <= 0:
        raise ValueError(f"sigma(t) requires t > 0, got {t}")
    wt = params.omega * t
    denom = 2.0 * wt - np.sin(2.0 * wt)
    mod2 = (2.0 * wt + np.sin(2.0 * wt)) / denom
    im = 2.0 * np.sin(wt) ** 2 / denom
    re2 = mod2 - im * im
    return complex(np.sqrt(max(re2, 0.0)), im)


def mixing_factor(t: float, params: SimParams) -> float:
    """Lambda(t) = 1 + D sqrt((w t)^2 - sin^2 w t) >= 1, the b/a stretch of sigma-states."""
    wt = params.omega * t
    radicand = max(wt * wt - np.sin(wt) ** 2, 0.0)
    return 1.0 + params.D * np.sqrt(radicand)


@dataclass(frozen=True)
class EvolvedSpecial:
    """Diagonal-form snapshot of the state evolved from the sigma(t) squeezed state."""

    t: float
    Lam: float
    sigma: complex
    dm: GaussianDM


def evolve_special(t: float, params: SimParams) -> EvolvedSpecial:
    """State evolved from the time-matched squeezing sigma(t), in diagonal form.

    The density matrix has a = Re sigma / Lambda, b = Re sigma * Lambda; the
    phase coefficient follows the same convention as `evolve_squeezed`, with
    which this agrees identically.
    """
    if t <= 0:
        raise ValueError(f"evolve_special requires t > 0, got {t}")
    sig = sigma_squeezing(t, params)
    lam_fac = mixing_factor(t, params)
    dm = evolve_squeezed(sig, t, params)
    return EvolvedSpecial(t=float(t), Lam=lam_fac, sigma=sig, dm=dm)


# ---------------------------------------------------------------------------
# General complex Gaussian kernels and their exact propagation


@dataclass(frozen=True)
class GaussianKernel:
    """One complex Gaussian two-point kernel exp(-z.A.z/2 + h.z + c0), z = (Q, Q').

    `quad` is complex symmetric with positive-definite real part (integrable),
    `lin` the linear coefficients and `log_norm` the complex log-amplitude.
    A density matrix term psi_i(Q) psi_j*(Q') is one such kernel; the family is
    closed under the evolution implemented here.
    """

    quad: np.ndarray
    lin: np.ndarray
    log_norm: complex

    def __post_init__(self):
        q = np.asarray(self.quad, dtype=complex)
        if q.shape != (2, 2):
            raise ValueError("quad must be a 2x2 matrix")
        if abs(q[0, 1] - q[1, 0]) > 1e-12 * max(1.0, abs(q[0, 1])):
            raise ValueError("quad must be symmetric")
        object.__setattr__(self, "quad", q)
        object.__setattr__(self, "lin", np.asarray(self.lin, dtype=complex).reshape(2))
        object.__setattr__(self, "log_norm", complex(self.log_norm))

    def is_integrable(self) -> bool:
        re = self.quad.real
        return re[0, 0] > 0 and np.linalg.det(re) > 0

    def value(self, Q, Qp) -> np.ndarray:
        """Evaluate the kernel at broadcastable position pairs (Q, Q')."""
        Q = np.asarray(Q, dtype=float)
        Qp = np.asarray(Qp, dtype=float)
        A, h = self.quad, self.lin
        expo = (-0.5 * (A[0, 0] * Q * Q + 2.0 * A[0, 1] * Q * Qp + A[1, 1] * Qp * Qp)
                + h[0] * Q + h[1] * Qp + self.log_norm)
        return np.exp(expo)

    def hermitian_conjugate(self) -> "GaussianKernel":
        """Kernel of conj(k(Q', Q)); Hermitian pairs map to Hermitian pairs."""
        A = self.quad.conj()
        swapped = np.array([[A[1, 1], A[0, 1]], [A[0, 1], A[0, 0]]], dtype=complex)
        return GaussianKernel(quad=swapped, lin=self.lin.conj()[::-1], log_norm=self.log_norm.conjugate())

    def log_peak_magnitude(self) -> float:
        """log max |k| over (Q, Q'); closed form from the real parts."""
        re_a = self.quad.real
        re_h = self.lin.real
        z_star = np.linalg.solve(re_a, re_h)
        return float(0.5 * re_h @ z_star + self.log_norm.real)

    def trace(self) -> complex:
        """Integral of k(Q, Q) dQ, analytic."""
        A, h = self.quad, self.lin
        a_diag = A[0, 0] + A[1, 1] + 2.0 * A[0, 1]
        h_diag = h[0] + h[1]
        if a_diag.real <= 0:
            raise ValueError("kernel diagonal is not integrable")
        return complex(np.sqrt(2.0 * np.pi / a_diag)
                       * np.exp(0.5 * h_diag**2 / a_diag + self.log_norm))


def kernel_from_dm(dm: GaussianDM) -> GaussianKernel:
    """Express a Gaussian density matrix as a single Gaussian kernel."""
    kap = dm.params.kappa
    a, b, c = dm.a, dm.b, dm.c
    A = np.array([[0.5 * kap * (a + b - 2j * c), 0.5 * kap * (a - b)],
                  [0.5 * kap * (a - b), 0.5 * kap * (a + b + 2j * c)]], dtype=complex)
    center = np.array([dm.x, dm.x])
    mom = 1j * (dm.p / dm.params.hbar) * np.array([1.0, -1.0])
    lin = A @ center + mom
    log_norm = 0.5 * np.log(kap * a / np.pi) - 0.5 * center @ A @ center
    return GaussianKernel(quad=A, lin=lin, log_norm=complex(log_norm))


def dm_from_kernel(k: GaussianKernel, params: SimParams, atol: float = 1e-9) -> GaussianDM:
    """Recover the (a, b, c, x, p) parameters of a Hermitian unit-trace kernel.

    Raises if the kernel is not Hermitian within `atol` (relative to kappa) or
    if its analytic trace has drifted from 1 by more than 1e-6.
    """
    kap = params.kappa
    A, h = k.quad, k.lin
    herm_err = max(abs(A[0, 0] - A[1, 1].conjugate()), abs(A[0, 1].imag), abs(h[0] - h[1].conjugate()))
    if herm_err > atol * kap:
        raise ValueError(f"kernel is not Hermitian: deviation {herm_err:.3e}")
    tr = k.trace()
    if abs(tr - 1.0) > 1e-6:
        raise ValueError(f"kernel trace is {tr}, expected 1")
    a = (A[0, 0].real + A[0, 1].real) / kap
    b = (A[0, 0].real - A[0, 1].real) / kap
    c = -A[0, 0].imag / kap
    if a <= 0 or b < a * (1 - 1e-10):
        raise ValueError(f"kernel is not a physical Gaussian state: a={a}, b={b}")
    x = (h[0] + h[1]).real / (2.0 * kap * a)
    p = params.hbar * ((h[0] - h[1]) / 2j).real + params.hbar * kap * c * x
    return GaussianDM(params=params, a=a, b=max(a, b), c=c, x=x, p=p)


def coherent_kernel_pair(x_i: float, p_i: float, x_j: float, p_j: float,
                         params: SimParams) -> GaussianKernel:
    """Kernel psi_i(Q) psi_j*(Q') for coherent states at (x_i, p_i) and (x_j, p_j).

    Wave-function phase convention: psi(Q) ~ exp(-(kappa/2)(Q - x)^2
    + (i/hbar) p (Q - x/2)), which keeps Hermitian pairs exactly conjugate.
    """
    kap = params.kappa
    hb = params.hbar
    A = np.array([[kap, 0.0], [0.0, kap]], dtype=complex)
    lin = np.array([kap * x_i + 1j * p_i / hb, kap * x_j - 1j * p_j / hb], dtype=complex)
    log_norm = (0.5 * np.log(kap / np.pi)
                - 0.5 * kap * (x_i**2 + x_j**2)
                - 0.5j * (p_i * x_i - p_j * x_j) / hb)
    return GaussianKernel(quad=A, lin=lin, log_norm=complex(log_norm))


def _propagator_blocks(t: float, params: SimParams) -> tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    """2x2 blocks (P, S, T) of the one-shot kernel exponent and its log prefactor.

    Exponent as -w.P.w/2 + v.S.w - v.T.v/2 with v the output and w the input
    pair; only valid away from sin(Omega t) = 0.
    """
    kap = params.kappa
    wt = params.omega * t
    s, co = np.sin(wt), np.cos(wt)
    d4 = kap * params.D / (4.0 * s * s)
    k1 = wt - s * co
    k2 = wt * co - s
    diag = 2.0 * d4 * k1
    P = np.array([[-1j * kap * co / s + diag, -diag],
                  [-diag, 1j * kap * co / s + diag]], dtype=complex)
    off = 2.0 * d4 * k2
    S = np.array([[-1j * kap / s + off, -off],
                  [-off, 1j * kap / s + off]], dtype=complex)
    log_pref = np.log(kap / (2.0 * np.pi * abs(s)))
    return P, S, P.copy(), log_pref


def _evolve_kernel_once(k: GaussianKernel, t: float, params: SimParams) -> GaussianKernel:
    P, S, T, log_pref = _propagator_blocks(t, params)
    M = k.quad + P
    if np.linalg.det(M.real) <= 0 or M[0, 0].real <= 0:
        raise ValueError("kernel is not integrable against the propagator")
    G = np.linalg.inv(M)
    quad_new = T - S @ G @ S
    lin_new = S @ (G @ k.lin)
    log_norm_new = (k.log_norm + 0.5 * k.lin @ G @ k.lin
                    + log_pref + np.log(2.0 * np.pi) - 0.5 * np.log(np.linalg.det(M)))
    return GaussianKernel(quad=quad_new, lin=lin_new, log_norm=complex(log_norm_new))


def split_steps(t: float, params: SimParams) -> int:
    """Number of equal sub-steps keeping each step clear of sin(Omega t) = 0.

    Steps of at most 1.5 rad stay away from every multiple of pi.  A single
    step shorter than _SIN_SAFE is kept as-is: the algebra remains exact there
    and the growing prefactor only costs precision gradually as t -> 0.
    """
    wt = params.omega * t
    if wt <= 1.5:
        return 1
    return int(np.ceil(wt / 1.5))


def evolve_kernel(k: GaussianKernel, t: float, params: SimParams) -> GaussianKernel:
    """Propagate one Gaussian kernel for time t, exactly.

    The integration is a 2x2 complex symmetric solve, no quadrature.  At times
    with sin(Omega t) near zero the one-shot kernel's prefactor is singular;
    the step is then composed from shorter ones, which is exact because the
    white-noise kernel is a semigroup.
    """
    if t < 0:
        raise ValueError(f"time must be non-negative, got {t}")
    if t == 0:
        return k
    if not k.is_integrable():
        raise ValueError("initial kernel is not integrable")
    n = split_steps(t, params)
    out = k
    for _ in range(n):
        out = _evolve_kernel_once(out, t / n, params)
    return out


def evolve_gaussian(dm: GaussianDM, t: float, params: SimParams | None = None) -> GaussianDM:
    """Evolve any Gaussian density matrix (pure or mixed) via the kernel algebra."""
    par = params if params is not None else dm.params
    return dm_from_kernel(evolve_kernel(kernel_from_dm(dm), t, par), par)
