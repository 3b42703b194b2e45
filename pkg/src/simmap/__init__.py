"""Similarity maps of co-occurrence data by MDS and by the VOS mapping technique."""

from .corpus import CoOccurrenceMatrix, Corpus, Item, load_edge_list, load_items, parse_edge_list
from .diagnostics import (
    center_periphery_correlation,
    circularity,
    diagnose,
    procrustes_disparity,
    separation_ratio,
)
from .errors import ConfigError, DataError, NumericalError, SimmapError
from .layout import Layout, canonicalize
from .mapdoc import MapDocument, read_document, write_document
from .mds import MdsProblem, multi_start, normalized_stress, smacof_run
from .pipeline import RunConfig, compare, run_layout
from .similarity import Measure, SimilarityMatrix, association_strength, cosine_indirect
from .vos import VosProblem, proposition1_check, vos_multi_start, vos_run

__version__ = "0.1.0"
