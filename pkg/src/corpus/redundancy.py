"""Greedy identity clustering for redundancy reduction.

An approximation of CD-HIT: proteins are visited longest first and join the
first existing cluster whose representative they match at or above the
identity threshold; otherwise they found a new cluster. Identity is the best
ungapped sliding-alignment match count divided by the shorter length.
"""
import numpy as np
from scipy.signal import fftconvolve

from src.corpus.types import AMINO_ACIDS, ProteinRecord
from src.config.logging import get_logger
from src.errors import DataError

logger = get_logger(__name__)

_INDEX = np.full(256, -1, dtype=np.int64)
for _i, _aa in enumerate(AMINO_ACIDS):
    _INDEX[ord(_aa)] = _i


def _one_hot(residues: str) -> np.ndarray:
    codes = _INDEX[np.frombuffer(residues.encode("ascii", errors="replace"), dtype=np.uint8)]
    onehot = np.zeros((len(AMINO_ACIDS), len(residues)), dtype=np.float64)
    known = codes >= 0
    onehot[codes[known], np.flatnonzero(known)] = 1.0
    return onehot


def _best_matches(a: np.ndarray, b: np.ndarray) -> int:
    # correlation over the sequence axis; row sums count matches per offset
    counts = fftconvolve(a, b[:, ::-1], mode="full", axes=1).sum(axis=0)
    return int(np.rint(counts.max()))


def sequence_identity(a: str, b: str) -> float:
    """Ungapped sliding identity of two sequences.

    Only letters of the 20-letter alphabet can match.
    """
    if not a or not b:
        return 0.0
    return _best_matches(_one_hot(a), _one_hot(b)) / min(len(a), len(b))


def reduce_redundancy(proteins: list[ProteinRecord], identity_threshold: float = 0.30) -> list[ProteinRecord]:
    """Keep one representative per identity cluster.

    Args:
        proteins: Input proteins
        identity_threshold: Join a cluster at identity >= threshold, in (0, 1]

    Returns:
        Representatives, in input order

    Raises:
        ValueError: If the threshold is outside (0, 1]
        DataError: If no proteins are given
    """
    if not 0.0 < identity_threshold <= 1.0:
        raise ValueError(f"identity_threshold must be in (0, 1], got {identity_threshold}")
    if not proteins:
        raise DataError("no proteins to cluster")

    order = sorted(range(len(proteins)), key=lambda i: -len(proteins[i]))
    representatives: list[int] = []
    encoded: list[np.ndarray] = []
    members = 0

    for idx in order:
        protein = proteins[idx]
        onehot = _one_hot(protein.residues)
        joined = False
        for rep_idx, rep_onehot in zip(representatives, encoded):
            shorter = min(len(protein), len(proteins[rep_idx]))
            if _best_matches(rep_onehot, onehot) / shorter >= identity_threshold:
                joined = True
                members += 1
                break
        if not joined:
            representatives.append(idx)
            encoded.append(onehot)

    logger.info(
        "redundancy_reduced",
        proteins=len(proteins),
        clusters=len(representatives),
        removed=members,
        threshold=identity_threshold,
    )
    return [proteins[i] for i in sorted(representatives)]
