"""Random-walk node sampling with backward probability estimation.

The package simulates a local-neighbourhood query interface over a graph,
runs classic burn-in walkers against it, and implements WALK-ESTIMATE, which
replaces the burn-in with short walks whose end nodes are estimated and then
accepted or rejected against a target distribution.
"""

from .errors import (BudgetExhausted, ConfigError, DeadEnd, DegenerateChain,
                     DegenerateTarget, DomainError, InvalidNode, InvalidParameter,
                     NoConvergence, NotIrreducible, ParseError, WalkEstimateError)
from .graph import AccessOracle, Graph, QueryLedger, Restriction
from .generators import (balanced_tree, barabasi_albert, barbell, complete, cycle,
                         from_spec, hypercube, load_edge_list, path, star, write_edge_list)
from .transition import (MHRW, SRW, Design, burn_in_length, exact_step_distribution,
                         spectral_summary, stationary_distribution, step_distributions,
                         transition_matrix)
from .walkers import (GewekeMonitor, forward_walks, geweke_z, many_short_runs,
                      many_short_runs_batch, one_long_run, walk)
from .estimate import (CrawlFrontier, HistoricHits, ProbEstimate, backward_runs, estimate,
                       initial_crawl, unbiased_estimate, ws_bw)
from .records import ExperimentReport, SampleRecord
from .sampler import WEConfig, sample_batch, sample_one
from .metrics import avg_estimate, distribution_distance, relative_error

__version__ = "0.1.0"
