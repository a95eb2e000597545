"""Signed stochastic block model: EM fitting, MDL model selection,
membership analysis and signed benchmark networks."""
from .benchmark import (GeneratorConfig, LabeledNetwork, generate, generate_mixed_blocks, nmi,
                        recovery_nmi, sweep)
from .em import (DegenerateParametersError, EdgeResponsibilities, FitConfig, FitResult,
                 SsbmParams, e_step, em_update, expected_log_likelihood, fit, init_params,
                 log_likelihood, m_step, run_em, spectral_labels)
from .graph import (EdgeListError, Partition, SignedGraph, emit_edge_list, parse_edge_list,
                    read_edge_list, signed_degree_stats, write_edge_list)
from .membership import (SoftMembership, block_image, bridgeness, group_entropy, hard_partition,
                         soft_membership)
from .selection import MdlReport, description_length, select_groups

__version__ = "0.1.0"

__all__ = [
    "DegenerateParametersError", "EdgeListError", "EdgeResponsibilities", "FitConfig",
    "FitResult", "GeneratorConfig", "LabeledNetwork", "MdlReport", "Partition", "SignedGraph",
    "SoftMembership", "SsbmParams", "block_image", "bridgeness", "description_length", "e_step",
    "em_update", "emit_edge_list", "expected_log_likelihood", "fit", "generate",
    "generate_mixed_blocks", "group_entropy", "hard_partition", "init_params", "log_likelihood",
    "m_step", "nmi", "parse_edge_list", "read_edge_list", "recovery_nmi", "run_em",
    "select_groups", "signed_degree_stats", "soft_membership", "spectral_labels", "sweep",
    "write_edge_list",
]
