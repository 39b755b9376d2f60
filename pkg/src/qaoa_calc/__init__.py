"""Analysis toolkit for quantum alternating operator ansatze: cost-difference
calculus, gradient-operator algebra, order-truncated series for expectation
values and probabilities, exact per-problem closed forms, classical samplers
for the small-angle regime, and a dense statevector cross-check."""

from .cost import (BalancedMax2SatCost, CostFunction, Graph, GroverCost,
                   HammingRampCost, MaxCutCost, MaxKSatCost, QuboCost,
                   TruthTableCost, generate_instance)
from .grad import Gen, GradientWord, apply_word, norm_bound, qubo_nabla_power
from .hamop import DiagonalHam, divergence_ham, partial_diff_ham, projector_ham, to_hamiltonian
from .pauli import PauliSum, commutator, mul, star_seminorm
from .series import (QaoaSchedule, SeriesEstimate, beats_random_guessing,
                     error_bounds, fifth_order_qaoap, leading_order_qaoa1,
                     leading_order_qaoap, pade_1d, probability_series_qaoa1,
                     quench_leading, series_qaoap, word_expectation)
from .exact import (balanced_max2sat_p1, expectation_exact, hamming_ramp_p1,
                    level_p_delta, lightcone, maxcut_p1, qubo_p1,
                    small_beta_p1, small_gamma_p1)

__version__ = "0.1.0"
