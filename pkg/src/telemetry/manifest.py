"""Run manifest: config snapshot, checksums, stage timings and formats."""
import json
import time
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Iterator

from src.config.logging import get_logger
from src.errors import DataError
from src.pipeline.artifacts import sha256_file

logger = get_logger(__name__)

MANIFEST_VERSION = 1


@dataclass
class StageRecord:
    """Timing of one stage invocation."""

    seconds: float
    started_at: float


@dataclass
class RunManifest:
    """Everything a run wrote, with checksums.

    Timings make this file the one output that differs between otherwise
    identical reruns.
    """

    config: dict[str, Any] = field(default_factory=dict)
    inputs: dict[str, str] = field(default_factory=dict)
    artifacts: dict[str, str] = field(default_factory=dict)
    stages: dict[str, StageRecord] = field(default_factory=dict)
    formats: dict[str, int] = field(default_factory=dict)
    version: int = MANIFEST_VERSION

    @contextmanager
    def stage(self, name: str) -> Iterator[None]:
        """Time a stage; the record is kept only if the stage completes."""
        started = time.time()
        t0 = time.perf_counter()
        logger.info("stage_start", stage=name)
        yield
        elapsed = time.perf_counter() - t0
        self.stages[name] = StageRecord(seconds=round(elapsed, 6), started_at=started)
        logger.info("stage_complete", stage=name, seconds=round(elapsed, 3))

    def add_artifacts(self, checksums: dict[str, str]) -> None:
        self.artifacts.update(checksums)

    def prune(self, root: Path) -> list[str]:
        """Drop artifact entries whose file under ``root`` is gone or no longer matches.

        Returns:
            Relative paths that were dropped
        """
        root = Path(root)
        stale = [
            relative
            for relative, digest in self.artifacts.items()
            if not (root / relative).is_file() or sha256_file(root / relative) != digest
        ]
        for relative in stale:
            del self.artifacts[relative]
        if stale:
            logger.info("manifest_pruned", artifacts=sorted(stale))
        return stale

    def to_dict(self) -> dict[str, Any]:
        data = asdict(self)
        data["artifacts"] = dict(sorted(self.artifacts.items()))
        data["inputs"] = dict(sorted(self.inputs.items()))
        return data

    def save(self, path: Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: Path) -> "RunManifest":
        """Load a manifest, or return an empty one if the file does not exist.

        Raises:
            DataError: If the file exists but cannot be parsed
        """
        path = Path(path)
        if not path.is_file():
            return cls()
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
            return cls(
                config=data.get("config", {}),
                inputs=data.get("inputs", {}),
                artifacts=data.get("artifacts", {}),
                stages={name: StageRecord(**record) for name, record in data.get("stages", {}).items()},
                formats=data.get("formats", {}),
                version=data.get("version", MANIFEST_VERSION),
            )
        except (json.JSONDecodeError, TypeError) as e:
            raise DataError(f"corrupt manifest {path}: {e}") from e
