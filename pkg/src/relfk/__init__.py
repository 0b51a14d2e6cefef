"""Simulation toolkit for the relativistic jump process.

Exact-law path sampling, radial transport coupling between masses,
probabilistic (jump-path functional) and spectral evaluations of the
semigroup generated by sqrt(-Laplacian + m^2) - m with magnetic and
electric potentials, plus the experiment drivers that compare them.
"""

from .errors import (ConfigError, DomainError, InvariantViolation, MapError,
                     QuadratureError)
from .experiments import (KINDS, RunConfig, RunManifest, ks_statistic,
                          make_config, read_config_file, run)
from .fields import FieldSpec, box_fields, bump_fields, with_constant_shift
from .feynman_kac import (ActionValue, CoupledEstimate, EpsilonCertificate,
                          MCEstimate, action, certify_epsilon,
                          epsilon_budget, estimate_u, estimate_u_coupled,
                          estimate_u_grid)
from .levy import (ModelParams, char_exponent, levy_density,
                   levy_khintchine_residual, radial_tail_inverse,
                   small_ball_second_moment, sphere_area, tail_mass,
                   transition_kernel)
from .radial_map import RadialMap, build_radial_map, get_radial_map
from .reference import (Grid, convolve_kernel, grid_for, grid_norms,
                        kernel_on_grid, sample_on_grid, save_grid_function,
                        split_step)
from .sampler import (JumpBatch, JumpPath, RngStream, sample_increment,
                      sample_path, sample_paths, sup_distance,
                      sup_distance_batch, transform_batch, transform_path)
from .specfun import (DEFAULT_QUAD, QuadratureSpec, adaptive_quad, bessel_k,
                      bessel_tail_integral, gamma_fn)

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "DomainError", "InvariantViolation", "MapError",
    "QuadratureError",
    "KINDS", "RunConfig", "RunManifest", "ks_statistic", "make_config",
    "read_config_file", "run",
    "FieldSpec", "box_fields", "bump_fields", "with_constant_shift",
    "ActionValue", "CoupledEstimate", "EpsilonCertificate", "MCEstimate",
    "action", "certify_epsilon", "epsilon_budget", "estimate_u",
    "estimate_u_coupled", "estimate_u_grid",
    "ModelParams", "char_exponent", "levy_density",
    "levy_khintchine_residual", "radial_tail_inverse",
    "small_ball_second_moment", "sphere_area", "tail_mass",
    "transition_kernel",
    "RadialMap", "build_radial_map", "get_radial_map",
    "Grid", "convolve_kernel", "grid_for", "grid_norms", "kernel_on_grid",
    "sample_on_grid", "save_grid_function", "split_step",
    "JumpBatch", "JumpPath", "RngStream", "sample_increment",
    "sample_path", "sample_paths", "sup_distance", "sup_distance_batch",
    "transform_batch", "transform_path",
    "DEFAULT_QUAD", "QuadratureSpec", "adaptive_quad", "bessel_k",
    "bessel_tail_integral", "gamma_fn",
    "__version__",
]
