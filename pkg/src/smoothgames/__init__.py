"""Spectral analysis and simulation of gradient dynamics in smooth two-player games."""

from .dynamics import (AugmentedState, MethodConfig, Scheme, Trajectory, exact_linear_operator,
                       gradient_step, project_equilibrium, run, step)
from .errors import (DegenerateEigenvalueError, DimensionError, GameSpecError, HypothesisError,
                     NoEquilibriumError, NumericalError, OutOfRangeError)
from .games import (AlphaGame, BilinearGame, GameClass, JointPoint, KappaAlphaGame, classify_game,
                    equilibrium, game_from_dict, jacobian, load_game, vector_field)
from .spectral import Polynomial, Spectrum, SvdResult, companion_matrix, eigenvalues, poly_roots, svd
from .theory import (alt_convergence_rate, benefit_interval, best_step_size, char_poly_alt,
                     char_poly_sim, momentum_eigenvalues, optimal_momentum, rho_derivative_at_zero,
                     sim_divergence_bound)

__version__ = "0.1.0"
