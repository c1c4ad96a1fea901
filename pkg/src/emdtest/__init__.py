"""Sampling-based testers and estimators for Earth Mover's Distance.

Distributions live on ``[0, delta]^d`` with the l1 metric (or on the nodes
of a weighted tree). Algorithms see them only through budget-counting
sample sources; :func:`emd_exact` is the ground-truth oracle.
"""

from .cluster import (emd_test_clustered_known, emd_test_clustered_unknown,
                      find_representatives)
from .coarsening import coarsen, coarsening_bound
from .distributions import (DiscreteDistribution, from_arrays, l1_distance, new_distribution,
                            point_mass)
from .errors import EmdTestError
from .flow import discretize_epsilon_net, emd_bounds, emd_exact, optimal_flow
from .generators import gen_clustered, gen_grid_injection, gen_hard_pair_1d
from .harness import ExperimentConfig, TrialReport, run_experiment
from .l1 import L1TesterConfig, l1_estimate, l1_test_collision, l1_test_known, l1_test_plugin
from .results import Decision, EstimateReport, TestVerdict
from .sources import SampleSource, StreamSource
from .testers import (EmdTestConfig, Strategy, emd_closeness_test, emd_closeness_test_known,
                      emd_estimate)
from .tree import WeightedTree, tree_emd_estimate, tree_emd_exact

__version__ = "0.1.0"

__all__ = [
    "DiscreteDistribution", "Decision", "EmdTestConfig", "EmdTestError", "EstimateReport",
    "ExperimentConfig", "L1TesterConfig", "SampleSource", "Strategy", "StreamSource",
    "TestVerdict", "TrialReport", "WeightedTree", "coarsen", "coarsening_bound",
    "discretize_epsilon_net", "emd_bounds", "emd_closeness_test", "emd_closeness_test_known",
    "emd_estimate", "emd_exact", "emd_test_clustered_known", "emd_test_clustered_unknown",
    "find_representatives", "from_arrays", "gen_clustered", "gen_grid_injection",
    "gen_hard_pair_1d", "l1_distance", "l1_estimate", "l1_test_collision", "l1_test_known",
    "l1_test_plugin", "new_distribution", "optimal_flow", "point_mass", "run_experiment",
    "tree_emd_estimate", "tree_emd_exact",
]
