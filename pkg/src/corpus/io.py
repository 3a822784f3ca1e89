"""Tab-separated window datasets and the dataset summary table."""
from pathlib import Path

from src.corpus.types import Origin, PeptideWindow, SiteLabel, Species, SpeciesDataset
from src.errors import DataError

SUMMARY_HEADER = ("Species", "Training Positive", "Training Negative", "Independent Positive", "Independent Negative")


def format_windows(windows: list[PeptideWindow]) -> str:
    """One ``species \\t origin \\t residues \\t label`` row per window."""
    return "".join(
        f"{w.species.value}\t{w.origin}\t{w.residues}\t{w.label.value}\n" for w in windows
    )


def parse_windows(text: str) -> list[PeptideWindow]:
    """Inverse of ``format_windows``.

    Raises:
        DataError: On malformed rows
    """
    windows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line:
            continue
        fields = line.split("\t")
        if len(fields) != 4:
            raise DataError(f"window row {lineno}: expected 4 fields, got {len(fields)}")
        species, origin, residues, label = fields
        try:
            windows.append(
                PeptideWindow(
                    residues=residues,
                    label=SiteLabel.parse(label),
                    species=Species.parse(species),
                    origin=Origin.parse(origin),
                )
            )
        except ValueError as e:
            raise DataError(f"window row {lineno}: {e}") from e
    return windows


def read_windows(path: Path) -> list[PeptideWindow]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise DataError(f"cannot read windows {path}: {e}") from e
    return parse_windows(text)


def format_summary(datasets: list[SpeciesDataset]) -> str:
    """Per-species positive/negative counts of both splits."""
    rows = ["\t".join(SUMMARY_HEADER)]
    for dataset in datasets:
        train, independent = dataset.train_counts, dataset.independent_counts
        rows.append(
            "\t".join(
                str(v)
                for v in (
                    dataset.species.value,
                    train.positives,
                    train.negatives,
                    independent.positives,
                    independent.negatives,
                )
            )
        )
    return "\n".join(rows) + "\n"
