"""Discretised market density matrices under Lindblad dynamics.

A market is a density matrix on a grid of price levels.  Three dissipators
drive it: a Gaussian (nearest-level hopping) generator and two non-Gaussian
extensions, one with second-order ladder terms and one with a convolution
kernel on the jump size.  The package integrates these generators and
tracks entropy, variance and kurtosis along the way.
"""
from .dynamics import (Checkpoint, IntegratorConfig, Method, RhsModel, Trajectory, evolve,
                       gaussian_rhs, ng1_rhs, ng2_rhs)
from .hermcore import TOL, NumericalFailure, Tolerances, eig_hermitian, validate_density
from .observables import (MomentSet, expectation, moments, paper_excess_kurtosis,
                          pinch_diagonal, purity, shannon_entropy, standard_excess_kurtosis,
                          von_neumann_entropy)
from .operators import (DissipatorSpec, EnvironmentState, LadderKernel, MarketState, Model,
                        PriceGrid, UnsupportedEnvironment, coefficients_from_env,
                        convolution_operator, dressed_ladders, ladder_down, ladder_up,
                        price_operator)
from .scenarios import (InitialStateSpec, SweepResult, build_initial_state, default_grid,
                        initial_entropy_curve, run_sim1, run_sim2, run_sim3)

__version__ = "0.1.0"

__all__ = [
    "Checkpoint", "IntegratorConfig", "Method", "RhsModel", "Trajectory", "evolve",
    "gaussian_rhs", "ng1_rhs", "ng2_rhs",
    "TOL", "NumericalFailure", "Tolerances", "eig_hermitian", "validate_density",
    "MomentSet", "expectation", "moments", "paper_excess_kurtosis", "pinch_diagonal", "purity",
    "shannon_entropy", "standard_excess_kurtosis", "von_neumann_entropy",
    "DissipatorSpec", "EnvironmentState", "LadderKernel", "MarketState", "Model", "PriceGrid",
    "UnsupportedEnvironment", "coefficients_from_env", "convolution_operator",
    "dressed_ladders", "ladder_down", "ladder_up", "price_operator",
    "InitialStateSpec", "SweepResult", "build_initial_state", "default_grid",
    "initial_entropy_curve", "run_sim1", "run_sim2", "run_sim3",
]
