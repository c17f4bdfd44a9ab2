"""Single-photon indistinguishability of a cavity Raman source under
finite-memory spectral diffusion: stochastic amplitude simulations,
frequency-domain and closed-form comparators, and a sweep CLI."""

from .model import (DerivedRates, RegimeReport, SystemParams, derive_rates,
                    params_from_dict, params_from_json, params_hash,
                    params_to_dict, params_to_json, regime_check)
from .noise import (NoiseChannel, Trap, TrapEnsemble, estimate_autocovariance,
                    make_rng, sample_ou_path, sample_ou_paths,
                    sample_trap_path, sample_trap_paths)
from .dynamics import (BatchResult, GridPlan, IntegrationError, Trajectory,
                       adiabatic_solution, default_dt, default_t_max,
                       plan_grid, run_batch_binned, simulate_deterministic,
                       simulate_stochastic, simulate_two_level)
from .hom import (CoherenceAccumulator, HomResult, bin_envelope, bin_nodes,
                  bin_weights, pairwise_f, spectrum_from_coherence)
from .filtering import (FilterSpec, ResolvedFilter, apply_filter,
                        resolve_filter, step_coefficients,
                        transmitted_fraction)
from .perturbation import (PhasePath, indist_freq_domain, indist_smallphi,
                           linearized_phase_path, noise_psd, transfer_H,
                           transfer_matrix)
from .analytic import (AnalyticPrediction, ground_state, predict,
                       raman_filtered, raman_good_cavity, raman_large_kappa,
                       time_jitter, two_level)
from ._backend import backend_name

__version__ = "0.1.0"

__all__ = [
    "AnalyticPrediction", "BatchResult", "CoherenceAccumulator",
    "DerivedRates", "FilterSpec", "GridPlan", "HomResult",
    "IntegrationError", "NoiseChannel", "PhasePath", "RegimeReport",
    "ResolvedFilter", "SystemParams", "Trajectory", "Trap", "TrapEnsemble",
    "adiabatic_solution", "apply_filter", "backend_name", "bin_envelope",
    "bin_nodes", "bin_weights", "default_dt", "default_t_max", "derive_rates",
    "estimate_autocovariance", "ground_state", "indist_freq_domain",
    "indist_smallphi", "linearized_phase_path", "make_rng", "noise_psd",
    "pairwise_f", "params_from_dict", "params_from_json", "params_hash",
    "params_to_dict", "params_to_json", "plan_grid", "predict",
    "raman_filtered", "raman_good_cavity", "raman_large_kappa",
    "regime_check", "resolve_filter", "run_batch_binned", "sample_ou_path",
    "sample_ou_paths", "sample_trap_path", "sample_trap_paths",
    "simulate_deterministic", "simulate_stochastic", "simulate_two_level",
    "spectrum_from_coherence", "step_coefficients", "time_jitter",
    "transfer_H", "transfer_matrix", "transmitted_fraction", "two_level",
    "__version__",
]
