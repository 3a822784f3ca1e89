"""Deep feature extraction and the feature TSV format."""
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from src.corpus.types import Origin, PeptideWindow, SiteLabel, Species
from src.errors import DataError, NumericalError
from src.model.trainer import SequenceModel


@dataclass(frozen=True)
class FeatureVector:
    """Final hidden state of one window."""

    values: np.ndarray
    origin: Origin
    label: SiteLabel
    species: Species

    @property
    def y(self) -> int:
        return self.label.y


def extract_features(model: SequenceModel, windows: list[PeptideWindow]) -> list[FeatureVector]:
    """Inference-mode features, one per window, in input order.

    Raises:
        DataError: If a window has the wrong length
        NumericalError: If a feature is not finite
    """
    bad = [w.origin for w in windows if len(w.residues) != model.config.window_len]
    if bad:
        raise DataError(f"window {bad[0]} is not {model.config.window_len} long")
    _, features = model.forward(windows)
    if not np.all(np.isfinite(features)):
        raise NumericalError("non-finite feature values")
    return [
        FeatureVector(values=row.copy(), origin=w.origin, label=w.label, species=w.species)
        for row, w in zip(features, windows)
    ]


def feature_matrix(features: list[FeatureVector]) -> tuple[np.ndarray, np.ndarray]:
    """(n, d) value matrix and (n,) label vector."""
    if not features:
        raise DataError("no feature vectors")
    X = np.stack([f.values for f in features])
    y = np.array([f.y for f in features], dtype=np.int64)
    return X, y


def format_features(features: list[FeatureVector]) -> str:
    """``origin \\t label \\t v1..vd`` rows; values use shortest round-trip repr."""
    return "".join(
        "\t".join([str(f.origin), f.label.value, *(repr(float(v)) for v in f.values)]) + "\n"
        for f in features
    )


def parse_features(text: str, species: Species) -> list[FeatureVector]:
    """Inverse of ``format_features``.

    Raises:
        DataError: On malformed rows or inconsistent widths
    """
    features: list[FeatureVector] = []
    width = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line:
            continue
        fields = line.split("\t")
        if len(fields) < 3:
            raise DataError(f"feature row {lineno}: expected origin, label and values")
        if width is None:
            width = len(fields) - 2
        elif len(fields) - 2 != width:
            raise DataError(f"feature row {lineno}: {len(fields) - 2} values, expected {width}")
        try:
            features.append(
                FeatureVector(
                    values=np.array([float(v) for v in fields[2:]]),
                    origin=Origin.parse(fields[0]),
                    label=SiteLabel.parse(fields[1]),
                    species=species,
                )
            )
        except ValueError as e:
            raise DataError(f"feature row {lineno}: {e}") from e
    return features


def read_features(path: Path, species: Species) -> list[FeatureVector]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise DataError(f"cannot read features {path}: {e}") from e
    return parse_features(text, species)
