"""Discrete optimal transport, martingale transport and weak transport on the real line.

Solvers are exact linear programs over finitely supported marginals; the
monotonicity checkers, competitor constructions and perturbation harness
build on them.
"""

from .competitors import (Decomposition, RepairTrace, build_competitors, build_mart_competitors, decompose,
                          repair_barycenters)
from .costs import Barycentric, GenericOracle, Pointwise, min_atom_mass
from .errors import (InfeasibleBarycenters, InfeasibleOrder, InfeasiblePooled, NonUniqueOptimizer, NotProbability,
                     NumericalFailure, RepairFailed, TooLarge, TransportError, ZeroMass)
from .lp import LinearProgram, LPSolution, Status, enumerate_vertices, solve_lp, vertex_minimum
from .measures import (DiscreteMeasure, bin, call_potential, convex_order, dilate, mean, monotone_coupling, pooled,
                       wasserstein)
from .monotone import (CandidateSet, check_C_monotone, check_C_monotone_linear, check_mart_C_monotone,
                       hunt_violation_generic, scan_plan_subsets)
from .mot import MartingalePlan, is_martingale, solve_mot
from .owt import barycentric_value, jensen_bound, solve_owt_barycentric, solve_owt_linear
from .report import Method, MonotonicityReport
from .stability import (PerturbationSchedule, StabilityRun, adapted_distance, plan_distance,
                        require_unique_optimizer, run_monotonicity_stability, run_plan_stability,
                        run_value_stability)
from .transport import TransportPlan, check_cyclical_monotone, solve_ot

__version__ = "0.1.0"
