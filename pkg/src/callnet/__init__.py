"""Construction, statistical validation and analysis of mobile calling networks.

Pipeline: call records -> directed and mutual calling networks -> hypergeometric
validation of each link -> components, degree/strength/clustering statistics
and heavy-tailed fits.
"""
from .components import (
    ComponentPartition,
    SnowballCurves,
    component_size_distribution,
    connected_components,
    ego_ball,
    giant_component,
    snowball_growth,
    union_find_roots,
)
from .fitting import (
    EmpiricalPdf,
    FitError,
    FitResult,
    empirical_pdf,
    fit_bipowerlaw,
    fit_powerlaw_tail,
    fit_truncated_powerlaw,
)
from .hypergeom import hypergeom_pmf, log_hypergeom_pmf, pvalue_over, pvalues_over
from .ingest import (
    CallRecord,
    CallTable,
    IngestConfig,
    PairStats,
    ParseReport,
    aggregate_pairs,
    filter_valid,
    parse_records,
    read_cdr,
)
from .metrics import (
    BinnedCurve,
    Clustering,
    EdgeOverlap,
    avg_nearest_neighbor_degree,
    clustering_coefficient,
    conditional_average,
    degree_sequences,
    edge_overlap,
    knn,
    node_strengths,
    pearson,
    spearman,
    strength_nn,
    weighted_clustering,
    weighted_knn,
)
from .netbuild import DIRECTED, MUTUAL, CallNetwork, build_dcn, build_mcn, unreciprocated_fraction
from .synth import (
    SynthConfig,
    generate_null_cdr,
    generate_social_cdr,
    plant_random_ties,
    sample_bipowerlaw,
    sample_discrete_powerlaw,
    sample_truncated_powerlaw,
)
from .validate import ThresholdPolicy, ValidationReport, bonferroni_threshold, validate_dcn, validate_mcn

__version__ = "0.1.0"
