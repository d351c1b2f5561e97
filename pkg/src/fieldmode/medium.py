"""Linear-dielectric environment: bath spectral density and dispersion relations.

A medium of fixed molecules with discrete levels and dipole matrix elements
acts on the field as a bath of independent oscillators.  Its spectral density
is a thermally weighted sum over spectral lines, each broadened from a delta
function into a normalized Lorentzian.  The imaginary part of the dielectric
function K follows directly; the real part is reconstructed from it by the
principal-value dispersion integral, and sqrt(K) gives the complex refractive
index.  The white-noise decoherence strength of the weak-coupling limit is a
separate one-liner in (gamma, k_B T, Omega).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.interpolate import PchipInterpolator

from .core import SimParams


@dataclass(frozen=True)
class MolecularSpectrum:
    """Internal levels of one molecular species and its dipole strengths.

    `dipole_sq` holds |J_lm|^2 (symmetric, non-negative); `widths` the
    Lorentzian half-width of each line, either one scalar for all lines or a
    symmetric matrix matching `dipole_sq`.
    """

    energies: np.ndarray
    dipole_sq: np.ndarray
    widths: np.ndarray | float

    def __post_init__(self):
        e = np.asarray(self.energies, dtype=float)
        j2 = np.asarray(self.dipole_sq, dtype=float)
        n = e.size
        if n == 0:
            raise ValueError("spectrum needs at least one level")
        if not np.all(np.isfinite(e)):
            raise ValueError("energies must be finite")
        if j2.shape != (n, n):
            raise ValueError(f"dipole matrix must be {n}x{n}, got {j2.shape}")
        if np.any(j2 < 0):
            raise ValueError("dipole strengths |J_lm|^2 must be non-negative")
        if not np.allclose(j2, j2.T):
            raise ValueError("dipole matrix must be symmetric")
        w = np.asarray(self.widths, dtype=float)
        if w.ndim == 0:
            w = np.full((n, n), float(w))
        if w.shape != (n, n):
            raise ValueError(f"widths must be scalar or {n}x{n}, got {w.shape}")
        if np.any(w[j2 > 0] <= 0):
            raise ValueError("line widths must be positive wherever |J_lm|^2 > 0")
        object.__setattr__(self, "energies", e)
        object.__setattr__(self, "dipole_sq", j2)
        object.__setattr__(self, "widths", w)

    def line_frequencies(self, hbar: float = 1.0) -> np.ndarray:
        """Positive transition frequencies carrying nonzero dipole strength."""
        om = (self.energies[:, None] - self.energies[None, :]) / hbar
        mask = (self.dipole_sq > 0) & (om > 0)
        return np.unique(om[mask])


def _as_constant(value, name: str) -> float:
    """Accept a scalar or a constant array; reject spatial variation."""
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        return float(arr)
    if arr.size == 0 or not np.all(arr == arr.flat[0]):
        raise ValueError(
            f"{name} varies across the sample; only homogeneous media are supported, "
            "pass a single constant value")
    return float(arr.flat[0])


@dataclass(frozen=True)
class MediumSpec:
    """Homogeneous medium: inverse temperature, number density, coupling, cutoff.

    `beta` and `density` also accept constant arrays (a sampled field); any
    actual spatial variation is rejected, only homogeneous media are modeled.
    """

    beta: float
    density: float
    coupling: float
    cutoff: float

    def __post_init__(self):
        object.__setattr__(self, "beta", _as_constant(self.beta, "beta"))
        object.__setattr__(self, "density", _as_constant(self.density, "density"))
        object.__setattr__(self, "coupling", float(self.coupling))
        object.__setattr__(self, "cutoff", float(self.cutoff))
        for name in ("beta", "density", "coupling", "cutoff"):
            if not (getattr(self, name) > 0):
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")

    def validity_warning(self) -> str | None:
        """Many molecules per cutoff volume are required; warn when d < cutoff^3."""
        if self.density < self.cutoff**3:
            return (f"density {self.density:g} is below cutoff^3 = {self.cutoff**3:g}; "
                    "the independent-oscillator description of the medium is unreliable")
        return None


def _lorentzian(x: np.ndarray, gamma: np.ndarray) -> np.ndarray:
    return (gamma / np.pi) / (x * x + gamma * gamma)


def spectral_density(spec: MolecularSpectrum, beta: float, omega, hbar: float = 1.0):
    """Effective bath spectral density I(beta, omega) of the molecular medium.

    Thermal sinh weighting times the Lorentzian-broadened line sum over all
    level pairs, divided by the partition sum; non-negative for omega > 0.
    """
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta}")
    om = np.asarray(omega, dtype=float)
    if np.any(om <= 0):
        raise ValueError("spectral density is defined for omega > 0")
    e = spec.energies
    om_lines = (e[:, None] - e[None, :]) / hbar
    j2 = spec.dipole_sq
    gam = spec.widths
    # Partition sum over levels; energies shifted for exponent stability.
    z = np.sum(np.exp(-beta * (e - e.min())))
    scale = np.exp(-beta * e.min())

    flat_w = om_lines.ravel()
    flat_j = j2.ravel()
    flat_g = gam.ravel()
    keep = flat_j > 0
    out = np.zeros_like(om, dtype=float)
    if np.any(keep):
        lor = _lorentzian(om[..., None] - flat_w[keep], flat_g[keep])
        out = np.sum(flat_j[keep] * lor, axis=-1)
    out *= 4.0 * om * np.sinh(0.5 * hbar * beta * om) / (hbar * z * scale)
    return out if out.ndim else float(out)


def im_K(spec: MolecularSpectrum, medium: MediumSpec, omega, hbar: float = 1.0):
    """Imaginary part of the dielectric function, (pi g^2 / 2 omega) I(beta, omega).

    The frequency dividing the coupling is the evaluation frequency omega (the
    alternative reading, the probe-mode frequency, would only rescale by a
    constant).
    """
    om = np.asarray(omega, dtype=float)
    i_eff = spectral_density(spec, medium.beta, om, hbar=hbar)
    out = 0.5 * np.pi * medium.coupling**2 * i_eff / om
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class DielectricFunction:
    """Tabulated Im K with the reconstructed Re K on the same frequency grid."""

    omega: np.ndarray
    imk: np.ndarray
    rek: np.ndarray

    def __post_init__(self):
        for name in ("omega", "imk", "rek"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        if not (self.omega.ndim == 1 and np.all(np.diff(self.omega) > 0)):
            raise ValueError("omega grid must be strictly increasing")
        if self.imk.shape != self.omega.shape or self.rek.shape != self.omega.shape:
            raise ValueError("imk/rek shapes must match the omega grid")
        if np.any(self.imk < -1e-12):
            raise ValueError("Im K must be non-negative for a passive medium")

    @property
    def n(self) -> np.ndarray:
        """Complex refractive index sqrt(K) along the grid."""
        return refractive_index(self.rek + 1j * self.imk)


def refractive_index(K):
    """Principal square root of K on the absorptive branch (Im n >= 0)."""
    n = np.sqrt(np.asarray(K, dtype=complex))
    n = np.where(n.imag < 0, -n, n)
    return n if n.ndim else complex(n)


def _pv_transform(omegas: np.ndarray, values: np.ndarray, at: float,
                  quad_pts: list[float]) -> float:
    """PV integral of values(w') / (w'^2 - at^2) over the tabulated support.

    The symmetric singular part values(at)/(w'^2 - at^2) is removed and
    integrated in closed form; the remainder is smooth through w' = at and
    integrates adaptively.
    """
    lo, hi = omegas[0], omegas[-1]
    if at >= hi * (1.0 - 1e-12):
        raise ValueError(
            f"cannot evaluate the transform at {at:g}, at or beyond the table edge {hi:g}; "
            "extend the table")
    interp = PchipInterpolator(omegas, values, extrapolate=False)
    f_at = float(interp(at)) if lo <= at <= hi else 0.0

    def regular(wp):
        num = np.nan_to_num(float(interp(wp)), nan=0.0) - f_at
        den = wp * wp - at * at
        if abs(den) < 1e-14 * max(at * at, 1.0):
            return float(interp.derivative()(wp)) / (2.0 * max(wp, 1e-300))
        return num / den

    pts = sorted(p for p in set(quad_pts) | {at} if lo < p < hi)
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", category=IntegrationWarning)
        total, _ = quad(regular, lo, hi, points=pts or None, limit=400)
    # Closed-form integral of the removed singular part over [lo, hi]; `at` is
    # always positive here, callers validate.
    if f_at != 0.0:
        total += f_at * np.log(abs((hi - at) * (lo + at) / ((hi + at) * (lo - at)))) / (2.0 * at)
    return total


def re_K(omegas: np.ndarray, imk: np.ndarray, at=None,
         refine_points: list[float] | None = None) -> np.ndarray:
    """Real part of K from its tabulated imaginary part, by the dispersion relation.

    Re K(w) = 1 + (2/pi) PV int_0^inf w' Im K(w') / (w'^2 - w^2) dw'.  The
    table must be dense around its peaks and decayed at the high edge; `at`
    selects evaluation frequencies (defaults to the table grid) and
    `refine_points` marks line centers for the adaptive integrator.
    """
    omegas = np.asarray(omegas, dtype=float)
    imk = np.asarray(imk, dtype=float)
    if at is None:
        at = omegas
    at_arr = np.atleast_1d(np.asarray(at, dtype=float))
    if np.any(at_arr <= 0):
        raise ValueError("evaluate Re K at positive frequencies")
    near_edge = at_arr > 0.9 * omegas[-1]
    if np.any(near_edge):
        warnings.warn(
            f"{int(near_edge.sum())} evaluation frequencies lie within 10% of the "
            "table edge; the transform is degraded there", stacklevel=2)
    pts = list(refine_points or [])
    weighted = omegas * imk
    out = np.array([1.0 + (2.0 / np.pi) * _pv_transform(omegas, weighted, w, pts)
                    for w in at_arr])
    return out if np.ndim(at) else float(out[0])


def im_K_from_re(omegas: np.ndarray, rek: np.ndarray, at=None,
                 refine_points: list[float] | None = None,
                 tail_power_coeff: float | None = None) -> np.ndarray:
    """Inverse dispersion relation: Im K(w) = -(2 w / pi) PV int (Re K - 1)/(w'^2 - w^2).

    Used for round-trip checks.  Re K - 1 decays only like w'^-2, so the
    integral beyond the table edge matters; `tail_power_coeff` A adds the
    closed-form tail of A / w'^2 (estimated from the table edge when None).
    """
    omegas = np.asarray(omegas, dtype=float)
    rek = np.asarray(rek, dtype=float)
    if at is None:
        at = omegas
    at_arr = np.atleast_1d(np.asarray(at, dtype=float))
    values = rek - 1.0
    if tail_power_coeff is None:
        tail_power_coeff = float(values[-1] * omegas[-1] ** 2)
    pts = list(refine_points or [])
    lo, hi = omegas[0], omegas[-1]
    static = float(values[0])
    out = []
    for w in at_arr:
        core = _pv_transform(omegas, values, w, pts)
        # Tail of A/w'^2 / (w'^2 - w^2) from the table edge to infinity.
        tail = (tail_power_coeff / w**2) * (np.log((hi + w) / (hi - w)) / (2.0 * w) - 1.0 / hi) \
            if w < hi else 0.0
        # Static piece below the table: Re K - 1 is flat there.
        head = static * np.log(abs((lo - w) / (lo + w))) / (2.0 * w) if w > lo else 0.0
        out.append(-(2.0 * w / np.pi) * (core + tail + head))
    out = np.array(out)
    return out if np.ndim(at) else float(out[0])


def dielectric_function(spec: MolecularSpectrum, medium: MediumSpec,
                        omegas: np.ndarray, hbar: float = 1.0) -> DielectricFunction:
    """Tabulate Im K on the given grid and reconstruct Re K from it."""
    imk = np.asarray(im_K(spec, medium, omegas, hbar=hbar))
    lines = list(spec.line_frequencies(hbar=hbar))
    rek = re_K(omegas, imk, refine_points=lines)
    return DielectricFunction(omega=np.asarray(omegas, float), imk=imk, rek=rek)


def line_frequency_grid(spec: MolecularSpectrum, lo: float, hi: float,
                        base_points: int = 200, per_line: int = 80,
                        hbar: float = 1.0) -> np.ndarray:
    """Log-spaced frequency grid with local refinement around every line."""
    if not (0 < lo < hi):
        raise ValueError("need 0 < lo < hi")
    grid = [np.geomspace(lo, hi, base_points)]
    for w0 in spec.line_frequencies(hbar=hbar):
        gam = float(np.max(spec.widths))
        local = w0 + gam * np.tan(np.linspace(-1.45, 1.45, per_line))
        grid.append(local[(local > lo) & (local < hi)])
    merged = np.unique(np.concatenate(grid))
    return merged


def ohmic_D(gamma: float, kBT: float, params: SimParams) -> float:
    """White-noise decoherence strength D = 8 gamma k_B T / (hbar Omega^2).

    The limit of vanishing dissipation at diverging temperature with gamma*T
    fixed keeps D finite.
    """
    if gamma < 0 or kBT < 0:
        raise ValueError("gamma and kBT must be non-negative")
    return float(8.0 * gamma * kBT / (params.hbar * params.omega**2))


# ---------------------------------------------------------------------------
# Spectrum file format: one record per line, two record types.
#
#   level  <index>  <energy>
#   line   <l>  <m>  <|J_lm|^2>  <half-width>
#
# '#' starts a comment; blank lines are skipped; separators are whitespace.


def parse_spectrum_file(path: str) -> MolecularSpectrum:
    """Read a molecular spectrum file; errors carry 1-based line numbers."""
    levels: dict[int, float] = {}
    lines: list[tuple[int, int, float, float]] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            text = raw.split("#", 1)[0].strip()
            if not text:
                continue
            tokens = text.split()
            kind = tokens[0].lower()
            try:
                if kind == "level":
                    if len(tokens) != 3:
                        raise ValueError("expected: level <index> <energy>")
                    idx = int(tokens[1])
                    if idx in levels:
                        raise ValueError(f"level {idx} defined twice")
                    levels[idx] = float(tokens[2])
                elif kind == "line":
                    if len(tokens) != 5:
                        raise ValueError("expected: line <l> <m> <|J|^2> <width>")
                    lines.append((int(tokens[1]), int(tokens[2]),
                                  float(tokens[3]), float(tokens[4])))
                else:
                    raise ValueError(f"unknown record type {tokens[0]!r}")
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None

    if not levels:
        raise ValueError(f"{path}: no levels defined")
    order = sorted(levels)
    index_of = {idx: k for k, idx in enumerate(order)}
    n = len(order)
    energies = np.array([levels[idx] for idx in order])
    j2 = np.zeros((n, n))
    widths = np.full((n, n), np.nan)
    for l, m, strength, width in lines:
        if l not in index_of or m not in index_of:
            raise ValueError(f"{path}: line references undefined level ({l}, {m})")
        a, b = index_of[l], index_of[m]
        j2[a, b] = j2[b, a] = strength
        widths[a, b] = widths[b, a] = width
    widths[np.isnan(widths)] = np.nanmin(widths) if np.any(~np.isnan(widths)) else 1.0
    return MolecularSpectrum(energies=energies, dipole_sq=j2, widths=widths)
