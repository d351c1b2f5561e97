"""Decoherence of a harmonic field mode in a weakly coupled, hot linear medium.

Gaussian density-matrix evolution in closed form, a predictability sieve that
recovers the least-entropy initial states, cat-state decoherence and
quantum-halo diagnostics, linear-dielectric response with dispersion-relation
reconstruction, and a brute-force quadrature oracle validating all of it.
"""

__version__ = "0.1.0"

from .cat import (CatDM, CatSpec, HaloDemo, cat_dm_general, cat_dm_stroboscopic,
                  coherent_overlap, decoherence_time, halo_demo_fock, halo_radius,
                  separation_sq, visibility, visibility_decay_rate)
from .core import (GaussianDM, PhaseSpacePoint, SimParams, default_grid,
                   linear_entropy, make_coherent, make_squeezed, multimode_entropy,
                   position_dm, position_dm_grid, purity, translate,
                   von_neumann_entropy, wigner)
from .grids import GridSpec
from .medium import (DielectricFunction, MediumSpec, MolecularSpectrum,
                     dielectric_function, im_K, im_K_from_re, line_frequency_grid,
                     ohmic_D, parse_spectrum_file, re_K, refractive_index,
                     spectral_density)
from .oracle import (NumericDM, ResolutionError, fit_gaussian_abc, fock_coherence,
                     fock_superposition_dm, grid_entropy, grid_eigenvalues,
                     grid_purity, grid_trace, lorentz_kk_oracle,
                     numeric_from_gaussian, orbit_width, propagate_numeric,
                     propagate_stencil, suggest_grid)
from .propagate import (EvolvedSpecial, GaussianKernel, abc_coefficients,
                        classical_orbit, coherent_kernel_pair, dm_from_kernel,
                        evolve_coherent, evolve_gaussian, evolve_kernel,
                        evolve_special, evolve_squeezed, kernel_from_dm,
                        mixing_factor, sigma_squeezing, split_steps)
from .sieve import (SieveResult, coherent_entropy, entropy_of_initial,
                    sieve_minimize, sieve_scan, superselection_valid,
                    time_averaged_entropy)
