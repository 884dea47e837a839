"""Coordination mechanisms for selfish scheduling on unrelated machines."""

from .core import (Assignment, CostReport, Instance, LowerBoundBundle, Policy, RandomBounds,
                   TreeVariant, dump_instance, gen_random, gen_smithrule_lowerbound,
                   gen_tree_lowerbound, lambda_term, load_instance)
from .dynamics import (DynamicsConfig, NoPotentialError, approx_schedule, basic_dynamics,
                       best_response, delta_gap, is_nash, potential)
from .geometry import (chung_ratio, cost_identity_report, kernel_inner, kernel_pd_check,
                       l2_inner, lemma_ineq_check, signature, step_profile)
from .oracle import brute_force_opt, enumerate_pure_nash, poa_report
from .policies import (DeviationQuery, deviation_cost, fluid_simulate_ps, policy_completion,
                       rand_exhaustive_expectation, rand_precedence_prob, rand_sample_order)
from .reduction import equivalence_check, routing_costs, to_priority_routing

__version__ = "0.1.0"
