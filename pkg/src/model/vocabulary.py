"""Amino-acid tokenisation for the network input."""
from dataclasses import dataclass

import numpy as np

from src.corpus.types import AMINO_ACIDS, PAD_TOKEN, PeptideWindow

PAD_INDEX = 0


@dataclass(frozen=True)
class Vocabulary:
    """Maps residues to indices: alphabet letters to 1..20, everything else to 0."""

    alphabet: str = AMINO_ACIDS

    def __post_init__(self) -> None:
        if len(set(self.alphabet)) != len(self.alphabet) or PAD_TOKEN in self.alphabet:
            raise ValueError("alphabet letters must be unique and exclude the pad token")

    @property
    def size(self) -> int:
        return len(self.alphabet) + 1

    @property
    def _table(self) -> np.ndarray:
        table = np.full(256, PAD_INDEX, dtype=np.int64)
        for i, aa in enumerate(self.alphabet, start=1):
            table[ord(aa)] = i
        return table

    def index(self, token: str) -> int:
        return self.alphabet.find(token) + 1 if len(token) == 1 else PAD_INDEX

    def encode(self, residues: str) -> np.ndarray:
        """Token indices of a residue string."""
        raw = np.frombuffer(residues.encode("ascii", errors="replace"), dtype=np.uint8)
        return self._table[raw]

    def decode(self, indices: np.ndarray) -> str:
        """Residue string of token indices; index 0 decodes to the pad token."""
        letters = PAD_TOKEN + self.alphabet
        return "".join(letters[int(i)] for i in indices)


DEFAULT_VOCABULARY = Vocabulary()


def encode_window(window: PeptideWindow, vocab: Vocabulary = DEFAULT_VOCABULARY) -> np.ndarray:
    """Token indices of one window; pad and unknown letters map to 0."""
    return vocab.encode(window.residues)


def encode_windows(windows: list[PeptideWindow], vocab: Vocabulary = DEFAULT_VOCABULARY) -> np.ndarray:
    """Stack windows into an (n, window_len) index matrix."""
    if not windows:
        return np.zeros((0, 0), dtype=np.int64)
    return np.stack([vocab.encode(w.residues) for w in windows])
