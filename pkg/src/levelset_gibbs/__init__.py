"""Sampling and verification toolkit for Gibbs measures that concentrate
on the zero set of a smooth map as the temperature goes to zero."""

from .catalog import (GrowthCertificate, PotentialFamily, SmoothMap, Weight,
                      build_family, build_map, eval_family)
from .geometry import (CoareaReport, LevelSetIntegralSpec, coarea_residual,
                       conic_levelset_integral, generalized_jacobian,
                       grad_log_jacobian, normal_hessian_det)
from .jets import FdReport, fd_check, hessian, jacobian
from .limits import (BarrierSpec, ZeroFindingConfig, atomic_limit,
                     barrier_w1_mixture, barrier_w1_point,
                     conic_limit_density, find_zeros, prop10_mc,
                     s0_for_family)
from .measures import (AngleDensity, AtomicMeasure, EmpiricalMeasure, RateFit,
                       angle_pushforward, rate_fit, tv_histogram, w1_circular,
                       w1_line)
from .quadrature import (GibbsSpec, GridDensity, c_k_constant, gibbs_cdf,
                         gibbs_moment, gibbs_normalizer, integrate_1d,
                         truncation_radius)
from .samplers import (ChainConfig, SeededGenerator, SgldConfig,
                       corrected_ula_chain, sgld_chain, standard_normal,
                       ula_chain)

__version__ = "0.1.0"
