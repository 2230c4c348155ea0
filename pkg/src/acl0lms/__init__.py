"""Affine combinations of sparse (l0-penalised) LMS filters for estimating
sparse large-scale MIMO channels, with a seeded Monte-Carlo harness."""

__version__ = "0.1.0"

from .channel import (MimoChannel, NoiseModel, SparseChannel, TrainingSource,
                      gen_mimo_channel, gen_sparse_channel, load_channel, observe,
                      save_channel, sigma_from_snr)
from .filters import (AffineCombiner, CombinedFilter, DegenerateDifferential, L0lmsFilter,
                      LmsFilter, approx_l0_norm, combined_predict, combined_step,
                      equivalent_weights, l0lms_step, lms_step, optimal_lambda, predict,
                      zero_attractor)
from .harness import (ExperimentConfig, MseTrace, TrialResult, convergence_time, monte_carlo,
                      mse, run_trial, steady_state_mse, sweep, sweep_delta, to_db)
from .kernels import BACKEND
