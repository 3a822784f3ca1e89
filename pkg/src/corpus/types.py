"""Type definitions for protein corpora and peptide windows."""
import re
from enum import Enum
from typing import NamedTuple, Optional
from dataclasses import dataclass, field


AMINO_ACIDS = "ACDEFGHIKLMNPQRSTVWY"
PAD_TOKEN = "X"
WINDOW_LEN = 41
CENTER_RESIDUE = "K"


class Species(str, Enum):
    """The eight prokaryotic species of the benchmark."""
    E_COLI = "E. coli"
    C_GLUTAMICUM = "C. glutamicum"
    M_TUBERCULOSIS = "M. tuberculosis"
    B_SUBTILIS = "B. subtilis"
    S_TYPHIMURIUM = "S. typhimurium"
    G_KAUSTOPHILUS = "G. kaustophilus"
    B_VELEZENSIS = "B. velezensis"
    S_ERIOCHEIRIS = "S. eriocheiris"

    @property
    def slug(self) -> str:
        """File-name friendly identifier, e.g. ``e_coli``."""
        return self.name.lower()

    @classmethod
    def parse(cls, text: str) -> "Species":
        """Parse a species from its display name, enum name or slug.

        Matching ignores case, spaces, dots and underscores, so
        ``"E. coli"``, ``"E_COLI"`` and ``"ecoli"`` are equivalent.

        Raises:
            ValueError: If the text names none of the eight species
        """
        key = re.sub(r"[^a-z]", "", text.lower())
        for species in cls:
            if key in (re.sub(r"[^a-z]", "", species.value.lower()), species.name.lower().replace("_", "")):
                return species
        raise ValueError(f"unknown species: {text!r}")


class SiteLabel(str, Enum):
    """Binary site label."""
    POSITIVE = "K-Ace"
    NEGATIVE = "non-K-Ace"

    @property
    def y(self) -> int:
        return 1 if self is SiteLabel.POSITIVE else 0

    @classmethod
    def parse(cls, text: str) -> "SiteLabel":
        """Parse ``positive``/``negative``, ``1``/``0`` or the enum values."""
        key = text.strip().lower()
        if key in ("k-ace", "positive", "pos", "1", "+"):
            return cls.POSITIVE
        if key in ("non-k-ace", "negative", "neg", "0", "-"):
            return cls.NEGATIVE
        raise ValueError(f"unknown site label: {text!r}")

    @classmethod
    def from_y(cls, y: int) -> "SiteLabel":
        return cls.POSITIVE if y else cls.NEGATIVE


# Published benchmark sizes: (train positive, train negative, independent positive, independent negative)
TABLE1_COUNTS: dict[Species, tuple[int, int, int, int]] = {
    Species.E_COLI: (3393, 6698, 1454, 2872),
    Species.C_GLUTAMICUM: (701, 2685, 286, 1166),
    Species.M_TUBERCULOSIS: (604, 2607, 259, 1118),
    Species.B_SUBTILIS: (903, 3962, 405, 1681),
    Species.S_TYPHIMURIUM: (109, 883, 52, 374),
    Species.G_KAUSTOPHILUS: (135, 661, 56, 286),
    Species.B_VELEZENSIS: (1392, 6653, 579, 2869),
    Species.S_ERIOCHEIRIS: (951, 3070, 406, 1318),
}


@dataclass(frozen=True)
class ProteinRecord:
    """Protein sequence from a FASTA file."""
    id: str
    residues: str
    species: Optional[Species] = None
    description: str = ""

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("protein id must be non-empty")
        if not self.residues:
            raise ValueError(f"protein {self.id!r} has no residues")

    @property
    def unknown_positions(self) -> list[int]:
        """1-based positions holding letters outside the 20-letter alphabet."""
        return [i + 1 for i, aa in enumerate(self.residues) if aa not in AMINO_ACIDS]

    @property
    def has_unknown(self) -> bool:
        return any(aa not in AMINO_ACIDS for aa in self.residues)

    def __len__(self) -> int:
        return len(self.residues)


@dataclass(frozen=True)
class SiteAnnotation:
    """Annotated lysine site (1-based position)."""
    protein_id: str
    position: int
    label: SiteLabel


class Origin(NamedTuple):
    """Where a window was cut from."""
    protein_id: str
    position: int

    def __str__(self) -> str:
        return f"{self.protein_id}:{self.position}"

    @classmethod
    def parse(cls, text: str) -> "Origin":
        protein_id, _, position = text.rpartition(":")
        if not protein_id or not position.isdigit():
            raise ValueError(f"malformed origin: {text!r}")
        return cls(protein_id, int(position))


@dataclass(frozen=True)
class PeptideWindow:
    """Fixed-length fragment centred on a lysine."""
    residues: str
    label: SiteLabel
    species: Species
    origin: Origin

    def __post_init__(self) -> None:
        n = len(self.residues)
        if n % 2 == 0:
            raise ValueError(f"window length must be odd, got {n}")
        if self.residues[n // 2] != CENTER_RESIDUE:
            raise ValueError(f"window {self.origin} is not centred on K")

    @property
    def y(self) -> int:
        return self.label.y


@dataclass(frozen=True)
class SplitCounts:
    """Positive/negative counts of one split."""
    positives: int
    negatives: int

    @property
    def total(self) -> int:
        return self.positives + self.negatives

    @classmethod
    def of(cls, windows: list[PeptideWindow]) -> "SplitCounts":
        positives = sum(w.y for w in windows)
        return cls(positives, len(windows) - positives)


@dataclass
class SpeciesDataset:
    """Train/independent windows for one species."""
    species: Species
    train: list[PeptideWindow] = field(default_factory=list)
    independent: list[PeptideWindow] = field(default_factory=list)

    @property
    def train_counts(self) -> SplitCounts:
        return SplitCounts.of(self.train)

    @property
    def independent_counts(self) -> SplitCounts:
        return SplitCounts.of(self.independent)
