"""Protein corpus ingestion, windowing, redundancy reduction and splitting."""
from src.corpus.types import (
    AMINO_ACIDS,
    PAD_TOKEN,
    WINDOW_LEN,
    TABLE1_COUNTS,
    Origin,
    PeptideWindow,
    ProteinRecord,
    SiteAnnotation,
    SiteLabel,
    Species,
    SpeciesDataset,
    SplitCounts,
)
from src.corpus.fasta import parse_fasta, serialize_fasta, read_fasta, parse_annotations, read_annotations
from src.corpus.windows import extract_windows, resolve_sites, lysine_positions
from src.corpus.redundancy import reduce_redundancy, sequence_identity
from src.corpus.split import split_train_independent
from src.corpus.validators import DatasetValidator

__all__ = [
    "AMINO_ACIDS",
    "PAD_TOKEN",
    "WINDOW_LEN",
    "TABLE1_COUNTS",
    "Origin",
    "PeptideWindow",
    "ProteinRecord",
    "SiteAnnotation",
    "SiteLabel",
    "Species",
    "SpeciesDataset",
    "SplitCounts",
    "parse_fasta",
    "serialize_fasta",
    "read_fasta",
    "parse_annotations",
    "read_annotations",
    "extract_windows",
    "resolve_sites",
    "lysine_positions",
    "reduce_redundancy",
    "sequence_identity",
    "split_train_independent",
    "DatasetValidator",
]
