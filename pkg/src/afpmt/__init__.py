"""Metamorphic testing of automated protein function prediction tools."""

from .campaign import run_campaign
from .config import CampaignConfig, config_from_dict, load_config
from .mockbench import Behavior, MockSpec, mock_as_adapter, mock_predict
from .mr_engine import MrVerdict, Outcome, check_mr_change, diagnostic_difference, evaluate_pair
from .ontology import Namespace, Ontology, load_obo, parse_obo
from .predictions import AnnotationSet, Prediction, parse_predictions, to_annotation_set
from .report import TestReport, aggregate, emit, pass_percentage
from .runner import ToolAdapter, execute_campaign, run_tool
from .sequence import ProteinRecord, parse_fasta, read_fasta, write_fasta
from .variants import (
    FullSequence,
    PointSubstitution,
    TestCasePair,
    VariantSpec,
    allocate_variant_counts,
    apply_variant,
    generate_pairs,
    select_variants,
)

__version__ = "0.1.0"
