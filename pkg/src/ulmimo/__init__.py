"""Multi-user MIMO uplink scheduling as constrained submodular maximization."""

__version__ = "0.1.0"

from .antenna import AntennaSelectionInstance, antenna_exact, antenna_greedy
from .constraints import (ConstraintSystem, KnapsackSystem, PartitionMatroid, assumptions_hold,
                          is_matroid_row, knapsack_feasible)
from .errors import CapacityError, InvalidArgument, NumericError, SchedulingError
from .ground_set import (AllocationVector, ChannelSet, Codebook, Element, GroundSet, UserProfile,
                         build_ground_set, element_psd, enumerate_allocations)
from .oracle import OracleBudget, exact_schedule, verify_rate_region_membership, verify_submodular
from .rank import CappedRank, FiniteAlphabetRank, GaussianRank, queue_capped_rank
from .sim import Scenario, ResultRow, generate_channels, run_experiment, update_pf_weights
from .scheduler import (ScheduleOutcome, data_dependent_upper_bound, greedy_schedule,
                        lazy_greedy_schedule, pruned_greedy_schedule)
from .utility import corner_point_rates, weighted_ordering, weighted_sum_rate_h

