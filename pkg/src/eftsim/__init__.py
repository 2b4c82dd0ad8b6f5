"""Eternal family trees: samplers, re-rooting operators, vertex-shift dynamics and checks."""

from .dl_graph import (
    AgeDependentSampler, DLPairSampler, DLWindow, build_dl_window, dl_mtp_test, dl_offspring_check,
    dl_shift, sample_dl_windows,
)
from .dynamics import (
    IDENTITY, PARENT, SMALLEST_EDGE_MARK, SMALLEST_MARK, FGraph, FoliationResult, VertexShift,
    build_f_graph, compute_foliation, degree_increase, drainage_sim, random_functional_graph,
    royal_successor,
)
from .reroot import (
    GeometricPruneSampler, TreeMeasure, enumerate_rooted_trees, prune, prune_batch, prune_geometric,
    sigma_exact, sigma_mc,
)
from .samplers import (
    CanopySampler, EGWTSampler, EMGWTSampler, GWTSampler, JoinedSampler, MultiTypeOffspring,
    OffspringDistribution, canopy_params, comb_params, isolated_end_params, join_stationary,
    sample_canopy, sample_egwt, sample_emgwt, sample_gwt, size_biased,
)
from .tree_core import FamilyTree, Network, TreeBatch, TruncationError, canonicalize, parse_code
from .verify import (
    EstimatorReport, MeckeReport, TestFunction, egwt_independence_probe, generation_size_check,
    mecke_test, moment_check, mtp_test, offspring_mtp_test,
)

__version__ = "0.1.0"
