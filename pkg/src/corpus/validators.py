"""Validators for window datasets read back from disk."""
from typing import Collection

from src.corpus.types import CENTER_RESIDUE, PAD_TOKEN, PeptideWindow, SpeciesDataset


class DatasetValidator:
    """Checks the invariants every prepared dataset must satisfy."""

    @staticmethod
    def padding_is_terminal(residues: str, protein_has_x: bool = False) -> bool:
        """True when pad tokens form only a prefix and/or suffix.

        Args:
            residues: Window residues
            protein_has_x: The source protein itself contains ``X`` letters, so
                interior ``X`` may be real residues
        """
        if protein_has_x:
            return True
        stripped = residues.strip(PAD_TOKEN)
        return PAD_TOKEN not in stripped

    @classmethod
    def validate_window(cls, window: PeptideWindow, window_len: int, protein_has_x: bool = False) -> list[str]:
        """Violations for one window."""
        violations = []
        if len(window.residues) != window_len:
            violations.append(f"length:{window.origin}")
        if window.residues[len(window.residues) // 2] != CENTER_RESIDUE:
            violations.append(f"center:{window.origin}")
        if not cls.padding_is_terminal(window.residues, protein_has_x):
            violations.append(f"padding:{window.origin}")
        return violations

    @classmethod
    def validate(
        cls,
        dataset: SpeciesDataset,
        window_len: int,
        proteins_with_x: Collection[str] = (),
    ) -> tuple[bool, list[str]]:
        """Validate a species dataset.

        Args:
            dataset: Train/independent windows of one species
            window_len: Expected window length
            proteins_with_x: Ids of source proteins whose own sequence holds ``X``

        Returns:
            Tuple of (is_valid, violations)
        """
        violations = []
        for window in dataset.train + dataset.independent:
            has_x = window.origin.protein_id in proteins_with_x
            violations.extend(cls.validate_window(window, window_len, has_x))
            if window.species is not dataset.species:
                violations.append(f"species:{window.origin}")

        overlap = {w.origin for w in dataset.train} & {w.origin for w in dataset.independent}
        if overlap:
            violations.append(f"overlap:{len(overlap)}")

        for split_name, split in (("train", dataset.train), ("independent", dataset.independent)):
            if not split:
                violations.append(f"empty:{split_name}")

        return len(violations) == 0, violations
