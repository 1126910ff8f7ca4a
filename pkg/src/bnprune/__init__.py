"""Pruned BIC score caches for Bayesian-network structure learning.

Builds, for every variable of a complete categorical dataset, the list
of candidate parent sets a score-based structure learner needs, pruning
provably useless candidates with entropy-based tests and certifying the
result against brute force on demand.
"""

__version__ = "0.1.0"

from .cache import (
    CacheEntry,
    CandidateList,
    ScoreCache,
    filter_dominated,
    read_cache,
    write_cache,
)
from .dataset import Dataset, column_entropy_all, load_csv, read_arity_file
from .errors import BnpruneError, BudgetError, CacheFormatError, DataError, ParseError
from .kernels import backend_name, have_compiled, set_backend
from .oracle import (
    InstanceReport,
    OracleReport,
    certify,
    certify_campaign,
    exhaustive_scores,
    random_dataset,
)
from .pruning import (
    RULES,
    BoundsReport,
    PruneConfig,
    PruneStats,
    bounds_report,
    build_lists,
    global_indegree_bound,
    node_indegree_bound,
    rule_check,
    search_space_size,
    subset_reference_check,
)
from .scoring import (
    ParentSet,
    ScoreEntry,
    bic,
    cond_entropy,
    contingency,
    joint_entropy,
    log_likelihood,
    penalty,
    set_log_likelihood,
)

__all__ = [name for name in dir() if not name.startswith("_")]
