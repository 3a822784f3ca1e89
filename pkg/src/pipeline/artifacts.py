"""Artifact store: namespaced paths under the output directory with checksums."""
import hashlib
from pathlib import Path
from typing import Optional, Union

from src.config.logging import get_logger
from src.corpus.types import Species
from src.errors import DataError

logger = get_logger(__name__)

Key = Union[Species, str]


def sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()


def _slug(key: Key) -> str:
    return key.slug if isinstance(key, Species) else str(key)


class ArtifactStore:
    """File store for every stage's outputs.

    Paths are built from a namespace plus dotted key parts, e.g.
    ``features/e_coli.train.tsv``. Every write is checksummed and recorded
    so the run manifest can list it.
    """

    DATASETS = "datasets"
    MODELS = "models"
    FEATURES = "features"
    REPORTS = "reports"
    ROC = "roc"
    TSNE = "tsne"
    NAMESPACES = (DATASETS, MODELS, FEATURES, REPORTS, ROC, TSNE)
    MANIFEST = "manifest.json"

    def __init__(self, root: Path):
        """Initialize the store.

        Args:
            root: Output directory (created on first write)
        """
        self.root = Path(root)
        self.written: dict[str, str] = {}

    def _key(self, namespace: str, *parts: Key, suffix: str) -> Path:
        """Build a namespaced path.

        Args:
            namespace: One of ``NAMESPACES``
            *parts: Dotted name components
            suffix: File extension including the dot

        Returns:
            Absolute artifact path
        """
        if namespace not in self.NAMESPACES:
            raise ValueError(f"unknown artifact namespace {namespace!r}")
        return self.root / namespace / (".".join(_slug(p) for p in parts) + suffix)

    def relative(self, path: Path) -> str:
        return Path(path).relative_to(self.root).as_posix()

    # Datasets
    def windows_path(self, species: Species, split: str) -> Path:
        return self._key(self.DATASETS, species, split, suffix=".tsv")

    def summary_path(self) -> Path:
        return self._key(self.DATASETS, "summary", suffix=".tsv")

    # Models
    def model_path(self, key: Key) -> Path:
        return self._key(self.MODELS, key, "lstm", suffix=".json")

    def ensemble_path(self, species: Species, kind: str) -> Path:
        return self._key(self.MODELS, species, kind, suffix=".json")

    # Features
    def features_path(self, species: Species, split: str) -> Path:
        return self._key(self.FEATURES, species, split, suffix=".tsv")

    # Reports
    def report_path(self, protocol: str, *qualifiers: str) -> Path:
        return self._key(self.REPORTS, protocol, *qualifiers, suffix=".tsv")

    def roc_path(self, species: Key, protocol: str, classifier: str) -> Path:
        return self._key(self.ROC, species, protocol, classifier, suffix=".csv")

    def tsne_path(self, species: Species, split: str) -> Path:
        return self._key(self.TSNE, species, split, suffix=".csv")

    @property
    def manifest_path(self) -> Path:
        return self.root / self.MANIFEST

    def write_text(self, path: Path, text: str) -> str:
        """Write UTF-8 text with LF newlines and record its checksum.

        Returns:
            SHA-256 hex digest of the written file
        """
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        checksum = sha256_file(path)
        self.written[self.relative(path)] = checksum
        logger.debug("artifact_written", path=self.relative(path), sha256=checksum[:12])
        return checksum

    def require(self, path: Path, produced_by: Optional[str] = None) -> Path:
        """Return ``path`` if it exists, else raise DataError naming the missing stage."""
        path = Path(path)
        if not path.is_file():
            hint = f"; run `{produced_by}` first" if produced_by else ""
            logger.debug("artifact_missing", path=str(path))
            raise DataError(f"missing artifact {path}{hint}")
        return path
