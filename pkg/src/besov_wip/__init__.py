"""Besov-space invariance principles for partial-sum processes.

Exact norms and moduli of polygonal paths, Faber-Schauder and Franklin
coefficients, increment generators, diagnostics, and scan tests for an
epidemic change in the mean.
"""

from .core import (BesovNorm, BesovParams, DegeneracyError, DomainError, DyadicCoeffs, FranklinBasis,
                   SampledPath, besov_norm, besov_seminorm, eval_path, franklin_basis, franklin_coeffs,
                   grid_modulus, level_norm, level_norms, lp_norm, modulus, q_of, schauder_coeffs,
                   schauder_reconstruct, sequential_norm)
from .processes import (GeneratorSpec, IncrementSeries, InvalidParameterError, brownian_path,
                        partial_sum_path, read_series_csv, sample_increments, tail_functional)
from .diagnostics import (MCEstimate, holder_discrete_statistic, level_statistic, lln_statistic,
                          max_partial_sum, necessity_statistic, tightness_summand)
from .changepoint import (DegenerateSeriesError, EpidemicModel, MCConfig, RegimeWarning, ScanResult,
                          ScanValue, epidemic_drift, epidemic_test, limit_distribution_mc,
                          limit_functional, power_prediction, scan_statistic, t_statistic)
from .mc import (EmpiricalDistribution, ReplicateError, derive_seed, ks_distance, make_rng, quantile,
                 replicate)

__version__ = "0.1.0"
