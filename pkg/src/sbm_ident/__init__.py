"""Identifiability tools for stochastic blockmodels.

Models, an exact enumeration oracle, motif moments, moment estimators for the
affiliation model, constructive recovery of weighted mixtures, and numerical
checks of the algebraic identifiability conditions.
"""

from ._threads import apply_thread_cap

apply_thread_cap()

from .errors import EstimationError, InvalidParamsError, SizeGuardError  # noqa: E402
from .models import (  # noqa: E402
    AffiliationParams,
    BinaryBlockParams,
    Family,
    FiniteStateParams,
    PowerSums,
    WeightedParams,
    affiliation_to_block,
    power_sums,
    validate,
)
from .sampler import SampledGraph, replicate_seed, sample_graph, sample_truncated_poisson  # noqa: E402
from .oracle import (  # noqa: E402
    ExactDistribution,
    exact_distribution,
    exact_motif_moment,
    identifiability_scan,
    marginalize_edge,
)
from .moments import (  # noqa: E402
    MOTIFS,
    MomentSet,
    empirical_moments,
    pool_moments,
    q1_statistic,
    theoretical_moments,
)
from .affiliation import (  # noqa: E402
    RecoveryResult,
    build_uq,
    build_vq,
    candidates_general_q,
    estimate_k3_q2,
    estimate_known_pi,
    estimate_q_uniform,
    q_raw,
)
from .mixture import (  # noqa: E402
    MixtureComponentSet,
    check_bin_independence,
    discretize,
    expand_k3_mixture,
    expand_kn_mixture,
    extract_power_sums_from_kn,
    recover_affiliation_priors,
    recover_affiliation_weighted,
    recover_from_k3,
    recover_pi_newton,
)
from .kruskal import (  # noqa: E402
    build_conditional_matrix,
    build_degree_family,
    build_kruskal_tensor,
    check_base_case,
    erdos_gallai,
    kruskal_condition,
    kruskal_rank,
    kruskal_report,
)

__version__ = "0.1.0"
