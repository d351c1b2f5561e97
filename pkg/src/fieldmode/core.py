"""Gaussian density matrices of a single harmonic field mode.

The state family used throughout the package is, in the position representation,

    rho(Q, Q') = N exp( -(M Omega / 4 hbar) [ a (Q + Q' - 2 x)^2 + b (Q - Q')^2
                                              - 2 i c ((Q - x)^2 - (Q' - x)^2) ]
                        + (i / hbar) p (Q - Q') )

with a > 0, b >= a and real c; (x, p) is the phase-space center and
N = sqrt(M Omega a / (pi hbar)) gives unit trace.  The family is closed under
harmonic evolution with white-noise decoherence and under phase-space
displacement.  Its spectrum is a thermal ladder with mean occupation
nbar = (sqrt(b/a) - 1) / 2, so purity and entropy are closed-form in (a, b);
b = a if and only if the state is pure.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .grids import GridSpec


@dataclass(frozen=True)
class SimParams:
    """Mode frequency, mass, action scale and decoherence strength of one run."""

    omega: float
    mass: float = 1.0
    hbar: float = 1.0
    D: float = 0.0

    def __post_init__(self):
        if not (self.omega > 0 and np.isfinite(self.omega)):
            raise ValueError(f"omega must be positive, got {self.omega}")
        if not (self.mass > 0 and np.isfinite(self.mass)):
            raise ValueError(f"mass must be positive, got {self.mass}")
        if not (self.hbar > 0 and np.isfinite(self.hbar)):
            raise ValueError(f"hbar must be positive, got {self.hbar}")
        if not (self.D >= 0 and np.isfinite(self.D)):
            raise ValueError(f"D must be non-negative, got {self.D}")

    @property
    def kappa(self) -> float:
        """Inverse squared ground-state width, M Omega / hbar."""
        return self.mass * self.omega / self.hbar

    @property
    def ground_width(self) -> float:
        """sqrt(hbar / (M Omega)), the length scale of the mode."""
        return 1.0 / np.sqrt(self.kappa)


@dataclass(frozen=True)
class PhaseSpacePoint:
    """Displacement (x, p) in raw position/momentum units."""

    x: float
    p: float

    def __post_init__(self):
        if not (np.isfinite(self.x) and np.isfinite(self.p)):
            raise ValueError("phase-space point must be finite")


@dataclass(frozen=True)
class GaussianDM:
    """Gaussian density matrix in (a, b, c) form with phase-space center (x, p).

    a is the sum-coordinate coefficient, b the difference-coordinate coefficient
    and c the real phase coefficient; all are dimensionless after scaling by
    M Omega / hbar.  Physicality requires b >= a > 0.
    """

    params: SimParams
    a: float
    b: float
    c: float = 0.0
    x: float = 0.0
    p: float = 0.0

    _B_SLACK = 1e-12

    def __post_init__(self):
        if not (self.a > 0 and np.isfinite(self.a)):
            raise ValueError(f"coefficient a must be positive, got {self.a}")
        if not np.isfinite(self.b) or self.b < self.a * (1.0 - self._B_SLACK):
            raise ValueError(f"coefficient b must satisfy b >= a, got a={self.a}, b={self.b}")
        if not np.isfinite(self.c):
            raise ValueError("coefficient c must be finite")
        if not (np.isfinite(self.x) and np.isfinite(self.p)):
            raise ValueError("center must be finite")

    @property
    def nbar(self) -> float:
        """Mean thermal occupation of the diagonalizing ladder."""
        return 0.5 * (np.sqrt(max(self.b / self.a, 1.0)) - 1.0)

    @property
    def center(self) -> PhaseSpacePoint:
        return PhaseSpacePoint(self.x, self.p)


def make_coherent(x: float, p: float, params: SimParams) -> GaussianDM:
    """Coherent state at phase-space point (x, p): a displaced ground state."""
    return GaussianDM(params=params, a=1.0, b=1.0, c=0.0, x=float(x), p=float(p))


def make_squeezed(C: complex, params: SimParams) -> GaussianDM:
    """Pure squeezed state psi(Q) ~ exp(-(M Omega / 2 hbar) C Q^2), Re C > 0.

    Maps to a = b = Re C, c = -Im C, centered at the origin.
    """
    C = complex(C)
    if not (C.real > 0):
        raise ValueError(f"squeezing parameter needs Re C > 0, got {C}")
    return GaussianDM(params=params, a=C.real, b=C.real, c=-C.imag)


def purity(dm: GaussianDM) -> float:
    """Tr rho^2 = sqrt(a/b); equals 1 exactly for pure states."""
    return float(np.sqrt(dm.a / dm.b))


def von_neumann_entropy(dm: GaussianDM) -> float:
    """-Tr rho ln rho via the thermal ladder: (nbar+1)ln(nbar+1) - nbar ln(nbar).

    The limit 0 ln 0 := 0 makes pure states return exactly zero.
    """
    nbar = dm.nbar
    if nbar <= 0.0:
        return 0.0
    return float((nbar + 1.0) * np.log1p(nbar) - nbar * np.log(nbar))


def linear_entropy(dm: GaussianDM) -> float:
    """1 - Tr rho^2."""
    return 1.0 - purity(dm)


def multimode_entropy(states: list[GaussianDM]) -> float:
    """Total entropy of independent modes: the sum of the per-mode entropies."""
    return float(sum(von_neumann_entropy(dm) for dm in states))


def translate(dm: GaussianDM, d: PhaseSpacePoint) -> GaussianDM:
    """Displace the state in phase space; the (a, b, c) shape is untouched."""
    return replace(dm, x=dm.x + d.x, p=dm.p + d.p)


def default_grid(dm: GaussianDM, n_widths: float = 8.0, points: int = 256) -> GridSpec:
    """Position grid spanning +-n_widths of the state's diagonal width around its center."""
    width = dm.params.ground_width / np.sqrt(dm.a)
    return GridSpec(center=dm.x, half_width=n_widths * width, points=points)


def position_dm(dm: GaussianDM, grid: GridSpec) -> np.ndarray:
    """Sample rho(Q, Q') of a Gaussian state on grid x grid; Hermitian by construction."""
    kap = dm.params.kappa
    q = grid.coords()
    u = q - dm.x
    U, V = np.meshgrid(u, u, indexing="ij")
    quad = dm.a * (U + V) ** 2 + dm.b * (U - V) ** 2
    phase = 0.5 * kap * dm.c * (U**2 - V**2) + (dm.p / dm.params.hbar) * (U - V)
    norm = np.sqrt(kap * dm.a / np.pi)
    return norm * np.exp(-0.25 * kap * quad + 1j * phase)


def position_dm_grid(state, grid: GridSpec) -> np.ndarray:
    """rho(Q, Q') samples for a GaussianDM, a CatDM, or a NumericDM.

    Dispatches on the state type; the result is a complex Hermitian matrix whose
    weighted trace approximates 1.
    """
    if isinstance(state, GaussianDM):
        return position_dm(state, grid)
    # CatDM and NumericDM both know how to sample themselves.
    sample = getattr(state, "position_dm", None)
    if sample is None:
        raise TypeError(f"cannot sample a position density matrix from {type(state).__name__}")
    return sample(grid)


def wigner(dm: GaussianDM, grid: GridSpec) -> np.ndarray:
    """Wigner function on grid x grid, indexed W[i, j] = W(x_i, p_j).

    Both axes reuse the same GridSpec: x on the first axis, p on the second in
    units where the grid coordinates are momenta divided by (M Omega).
    The field integrates to 1 over phase space (dx dp with p_j = M Omega q_j).
    """
    par = dm.params
    kap = par.kappa
    xs = grid.coords() - dm.x
    # Second axis holds p / (M Omega) so one grid serves both directions.
    ps = par.mass * par.omega * grid.coords() - dm.p
    X, P = np.meshgrid(xs, ps, indexing="ij")
    a, b, c = dm.a, dm.b, dm.c
    expo = (-kap * (a + c**2 / b) * X**2
            + (2.0 * c / (par.hbar * b)) * X * P
            - P**2 / (par.hbar**2 * kap * b))
    norm = np.sqrt(a / b) / (np.pi * par.hbar)
    return norm * np.exp(expo)
