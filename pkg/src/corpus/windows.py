"""Peptide window extraction around lysine sites."""
from typing import Iterable, Optional

from src.corpus.types import (
    CENTER_RESIDUE,
    PAD_TOKEN,
    WINDOW_LEN,
    Origin,
    PeptideWindow,
    ProteinRecord,
    SiteAnnotation,
    SiteLabel,
    Species,
)
from src.errors import DataError


def lysine_positions(protein: ProteinRecord) -> list[int]:
    """1-based positions of every K residue."""
    return [i + 1 for i, aa in enumerate(protein.residues) if aa == CENTER_RESIDUE]


def resolve_sites(
    protein: ProteinRecord,
    annotations: Iterable[SiteAnnotation],
    infer_negatives: bool,
) -> list[SiteAnnotation]:
    """Build the labelled site list for one protein.

    Annotated rows are taken as given. With ``infer_negatives`` every lysine
    that carries no annotation becomes a negative site.

    Args:
        protein: Protein the annotations refer to
        annotations: Annotation rows for this protein
        infer_negatives: Label unannotated lysines as negatives

    Returns:
        Sites sorted by position
    """
    by_position: dict[int, SiteAnnotation] = {}
    for annotation in annotations:
        previous = by_position.get(annotation.position)
        if previous is not None and previous.label is not annotation.label:
            raise DataError(f"conflicting labels for {protein.id}:{annotation.position}")
        by_position[annotation.position] = annotation
    if infer_negatives:
        for position in lysine_positions(protein):
            by_position.setdefault(position, SiteAnnotation(protein.id, position, SiteLabel.NEGATIVE))
    return [by_position[p] for p in sorted(by_position)]


def extract_windows(
    protein: ProteinRecord,
    sites: list[SiteAnnotation],
    window_len: int = WINDOW_LEN,
    species: Optional[Species] = None,
) -> list[PeptideWindow]:
    """Cut one window per site, padding past either terminus with ``X``.

    Args:
        protein: Source protein
        sites: Sites on this protein, each on a lysine
        window_len: Odd window length
        species: Species tag; defaults to the protein's own

    Returns:
        Windows in the order of ``sites``

    Raises:
        ValueError: If window_len is even
        DataError: If a site belongs to another protein, is out of range or is not a lysine,
            or no species is known
    """
    if window_len < 1 or window_len % 2 == 0:
        raise ValueError(f"window_len must be a positive odd integer, got {window_len}")
    species = species or protein.species
    if species is None:
        raise DataError(f"protein {protein.id!r} has no species tag")

    half = (window_len - 1) // 2
    padded = PAD_TOKEN * half + protein.residues + PAD_TOKEN * half
    windows = []
    for site in sites:
        if site.protein_id != protein.id:
            raise DataError(f"site {site.protein_id}:{site.position} does not belong to {protein.id}")
        if not 1 <= site.position <= len(protein):
            raise DataError(f"site {protein.id}:{site.position} is outside 1..{len(protein)}")
        if protein.residues[site.position - 1] != CENTER_RESIDUE:
            raise DataError(
                f"site {protein.id}:{site.position} is {protein.residues[site.position - 1]!r}, not K"
            )
        # padded index of residue p (1-based) is p - 1 + half
        start = site.position - 1
        windows.append(
            PeptideWindow(
                residues=padded[start:start + window_len],
                label=site.label,
                species=species,
                origin=Origin(protein.id, site.position),
            )
        )
    return windows
