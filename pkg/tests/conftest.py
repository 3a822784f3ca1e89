"""Shared synthetic data for the test suite."""
from pathlib import Path

import numpy as np
import pytest

from src.corpus.types import AMINO_ACIDS, Origin, PeptideWindow, ProteinRecord, SiteLabel, Species

MOTIF = "DEWRP"
BACKGROUND = "".join(aa for aa in AMINO_ACIDS if aa not in MOTIF + "K")


def background(rng: np.random.Generator, n: int) -> str:
    return "".join(rng.choice(list(BACKGROUND), size=n))


def motif_flank(rng: np.random.Generator, n: int, noise: float = 0.2) -> str:
    """Tiled motif with a fraction of positions replaced by background letters."""
    tiled = list((MOTIF * (n // len(MOTIF) + 1))[:n])
    for i in range(n):
        if rng.random() < noise:
            tiled[i] = rng.choice(list(BACKGROUND))
    return "".join(tiled)


def motif_window_residues(rng: np.random.Generator, positive: bool, window_len: int = 41) -> str:
    half = window_len // 2
    if positive:
        return motif_flank(rng, half) + "K" + motif_flank(rng, half)
    return background(rng, half) + "K" + background(rng, half)


def make_motif_windows(
    n_pos: int,
    n_neg: int,
    seed: int = 0,
    window_len: int = 41,
    species: Species = Species.E_COLI,
) -> list[PeptideWindow]:
    """Motif-flanked positives and background negatives, interleaved."""
    rng = np.random.default_rng(seed)
    labels = [True] * n_pos + [False] * n_neg
    rng.shuffle(labels)
    return [
        PeptideWindow(
            residues=motif_window_residues(rng, positive, window_len),
            label=SiteLabel.POSITIVE if positive else SiteLabel.NEGATIVE,
            species=species,
            origin=Origin(f"P{i}", 21),
        )
        for i, positive in enumerate(labels)
    ]


def make_motif_proteome(
    n_proteins: int = 100,
    blocks: int = 10,
    seed: int = 0,
    species: Species = Species.S_TYPHIMURIUM,
) -> tuple[list[ProteinRecord], list[tuple[str, int]]]:
    """Proteins of contiguous 41-residue blocks, each centred on a lysine.

    Protein ``i`` has its single positive block at index ``i % blocks``;
    every other block is background, so its lysine is an inferred negative.

    Returns:
        (proteins, positive sites as (protein_id, 1-based position))
    """
    rng = np.random.default_rng(seed)
    proteins, positives = [], []
    for i in range(n_proteins):
        protein_id = f"SYN{i:04d}"
        positive_block = i % blocks
        residues = "".join(motif_window_residues(rng, b == positive_block) for b in range(blocks))
        proteins.append(ProteinRecord(protein_id, residues, species))
        positives.append((protein_id, 41 * positive_block + 21))
    return proteins, positives


def write_corpus(directory: Path, proteins: list[ProteinRecord], positives: list[tuple[str, int]]) -> tuple[Path, Path]:
    from src.corpus.fasta import serialize_fasta

    fasta = directory / "proteins.fasta"
    annotations = directory / "sites.tsv"
    fasta.write_text(serialize_fasta(proteins), encoding="utf-8")
    annotations.write_text(
        "protein_id\tposition\tlabel\n" + "".join(f"{pid}\t{pos}\tpositive\n" for pid, pos in positives),
        encoding="utf-8",
    )
    return fasta, annotations


def separable_1d(n: int, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """One feature with a gap around zero; negative values are class 0."""
    rng = np.random.default_rng(seed)
    magnitude = rng.uniform(0.1, 1.0, size=n)
    sign = rng.choice([-1.0, 1.0], size=n)
    X = (magnitude * sign)[:, None]
    return X, (sign > 0).astype(int)


def gaussian_blobs(n: int, d: int = 64, shift: float = 1.0, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Two overlapping unit Gaussians whose means differ by ``shift`` in every coordinate."""
    rng = np.random.default_rng(seed)
    y = rng.integers(0, 2, size=n)
    X = rng.normal(size=(n, d)) + shift * y[:, None] / np.sqrt(d) * 4.0
    return X, y


@pytest.fixture
def motif_windows() -> list[PeptideWindow]:
    return make_motif_windows(100, 100, seed=1)


@pytest.fixture
def motif_corpus(tmp_path: Path) -> tuple[Path, Path]:
    proteins, positives = make_motif_proteome()
    return write_corpus(tmp_path, proteins, positives)
