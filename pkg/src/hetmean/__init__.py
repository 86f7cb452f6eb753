"""Heteroskedastic Gaussian mean estimation via an empirical-Bayes profile
MLE over a nonparametric scale-mixing distribution, plus baselines, a seeded
simulation harness, and numerical verification suites."""

from .baselines import (IterTruncConfig, iterative_truncation, known_prior_mle,
                        oracle_linear, sample_median)
from .chebyshev import (ChebyshevApprox, SeparableExpansion, bernstein_bound,
                        chebyshev_coefficients, minimal_degree, predicted_degree,
                        separable_expansion, truncation_sup_error)
from .gauss import normal_quantile, standard_normal_cdf
from .mixture import (LocationScaleMixture, MixingDistribution,
                      log_mixture_density, total_log_likelihood)
from .npmle import (NpmleConfig, NpmleFitReport, find_best_atom, fit_npmle,
                    kkt_residual, kkt_score, optimize_weights)
from .profile import JointFitConfig, JointFitReport, estimate_mu_given_g, fit_joint
from .simulate import (EqualVariancePrior, EstimatorConfigs, ExperimentConfig,
                       ExperimentReport, PointMixturePrior, QuadraticVariancePrior,
                       SubsetOfSignalsPrior, render_error_plot_svg, run_experiment,
                       sample_sigmas, write_report_csv)
from .theory import (FunctionalIneqRow, HellingerResult, ModulusQuery,
                     check_functional_inequality, check_symmetrization,
                     hellinger_sq, modulus_of_continuity, variational_lb_terms)

__version__ = "0.1.0"

__all__ = [
    "IterTruncConfig", "iterative_truncation", "known_prior_mle", "oracle_linear",
    "sample_median",
    "ChebyshevApprox", "SeparableExpansion", "bernstein_bound",
    "chebyshev_coefficients", "minimal_degree", "predicted_degree",
    "separable_expansion", "truncation_sup_error",
    "normal_quantile", "standard_normal_cdf",
    "LocationScaleMixture", "MixingDistribution", "log_mixture_density",
    "total_log_likelihood",
    "NpmleConfig", "NpmleFitReport", "find_best_atom", "fit_npmle",
    "kkt_residual", "kkt_score", "optimize_weights",
    "JointFitConfig", "JointFitReport", "estimate_mu_given_g", "fit_joint",
    "EqualVariancePrior", "EstimatorConfigs", "ExperimentConfig",
    "ExperimentReport", "PointMixturePrior", "QuadraticVariancePrior",
    "SubsetOfSignalsPrior", "render_error_plot_svg", "run_experiment",
    "sample_sigmas", "write_report_csv",
    "FunctionalIneqRow", "HellingerResult", "ModulusQuery",
    "check_functional_inequality", "check_symmetrization", "hellinger_sq",
    "modulus_of_continuity", "variational_lb_terms",
]
