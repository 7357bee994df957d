"""Random-walk search for perfect matchings: hard instances and hitting-time bounds."""

from .graph import (
    Graph,
    QueryBudgetExceeded,
    QueryOracle,
    complete_graph,
    random_graph,
    unique_pm_bipartite,
)
from .markov import (
    MarkovChain,
    Distribution,
    ValidationReport,
    expected_hitting_time,
    random_walk_search,
    simulate_search,
    stationary_distribution,
    validate,
)
from .matching import (
    Matching,
    count_pm_complete,
    enumerate_perfect_matchings,
    is_unique_perfect_matching,
    maximum_matching_bipartite,
    pm_count_upper_bound,
)
from .walkmodel import BoundReport, WalkInstance, analyze, johnson_instance, johnson_pi_marked

__version__ = "0.1.0"
