"""ERGM inference for partially observed networks.

Simulation, sampling designs (ego-centric and link-tracing), design-based
Horvitz-Thompson estimation and likelihood-based (MCMC) estimation for
exponential-family random graph models observed through adaptive network
sampling.
"""

from .graphs import (
    Network,
    ObservationPattern,
    PartialNetwork,
    NodeAttributes,
    make_network,
    restrict,
    overlay,
    completions_count,
    isolates,
)
from .stats import (
    Edges,
    Gwesp,
    NodalMain,
    HomophilyMatch,
    StatisticSet,
    compute_stats,
    change_stats,
    esp_histogram,
)
from .enumeration import (
    DegenerateMleError,
    all_graph_stats,
    enumeration_size,
    exact_distribution,
    exact_log_kappa,
    exact_mle,
    exact_missing_mle,
    exact_moments,
    graph_code,
)
from .sampler import ErgmModel, McmcConfig, SampleResult, sample_full, sample_constrained
from .designs import (
    SATURATED,
    AdaptivityWitness,
    BernoulliInitial,
    DesignRealization,
    DesignSpec,
    EgoCentricDesign,
    EnumerationBoundExceeded,
    FixedSeeds,
    LinkTracingDesign,
    all_seed_pair_samples,
    design_distribution,
    design_probability,
    design_probability_mc,
    draw_initial,
    is_adaptive,
    trace,
)
from .design_based import (
    InclusionProbs,
    ObservabilityReport,
    UnobservableProbabilityError,
    dyad_neighborhood,
    egocentric_dyad_prob,
    egocentric_pairwise_prob,
    ht_edge_total,
    ht_variance,
    ht_variance_estimate,
    inclusion_probs,
    observability_report,
    one_wave_dyad_prob,
    one_wave_nodal_prob,
    pairwise_inclusion_prob,
    saturated_nodal_prob,
)
from .likelihood import (
    AmenabilityReport,
    FitConfig,
    FitResult,
    KlEstimate,
    MeanValue,
    amenability_check,
    design_parameter_mle,
    exact_loglik,
    kl_divergence,
    mean_value_params,
    mle_complete,
    mle_missing,
    pseudolikelihood_eta,
)
from .study import (
    StudyRecord,
    StudySummary,
    complete_sampling_sd,
    figure2_data,
    run_study,
    summarize,
)
from .io import (
    DataFormatError,
    load_dataset,
    load_lazega,
    read_results,
    write_results,
)

__version__ = "0.1.0"

__all__ = [
    "Network",
    "ObservationPattern",
    "PartialNetwork",
    "NodeAttributes",
    "make_network",
    "restrict",
    "overlay",
    "completions_count",
    "isolates",
    "Edges",
    "Gwesp",
    "NodalMain",
    "HomophilyMatch",
    "StatisticSet",
    "compute_stats",
    "change_stats",
    "esp_histogram",
    "ErgmModel",
    "McmcConfig",
    "SampleResult",
    "sample_full",
    "sample_constrained",
    "SATURATED",
    "AdaptivityWitness",
    "EnumerationBoundExceeded",
    "BernoulliInitial",
    "FixedSeeds",
    "DesignSpec",
    "DesignRealization",
    "EgoCentricDesign",
    "LinkTracingDesign",
    "draw_initial",
    "trace",
    "design_distribution",
    "design_probability",
    "design_probability_mc",
    "is_adaptive",
    "all_seed_pair_samples",
    "UnobservableProbabilityError",
    "ObservabilityReport",
    "InclusionProbs",
    "inclusion_probs",
    "dyad_neighborhood",
    "egocentric_dyad_prob",
    "egocentric_pairwise_prob",
    "pairwise_inclusion_prob",
    "one_wave_dyad_prob",
    "one_wave_nodal_prob",
    "saturated_nodal_prob",
    "ht_edge_total",
    "ht_variance",
    "ht_variance_estimate",
    "observability_report",
    "FitConfig",
    "FitResult",
    "KlEstimate",
    "MeanValue",
    "exact_loglik",
    "DegenerateMleError",
    "all_graph_stats",
    "enumeration_size",
    "exact_distribution",
    "exact_log_kappa",
    "exact_mle",
    "exact_missing_mle",
    "exact_moments",
    "graph_code",
    "pseudolikelihood_eta",
    "mle_complete",
    "mle_missing",
    "mean_value_params",
    "kl_divergence",
    "amenability_check",
    "design_parameter_mle",
    "AmenabilityReport",
    "StudyRecord",
    "StudySummary",
    "run_study",
    "complete_sampling_sd",
    "summarize",
    "figure2_data",
    "DataFormatError",
    "load_dataset",
    "load_lazega",
    "read_results",
    "write_results",
]
