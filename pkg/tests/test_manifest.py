"""Tests for the run manifest."""
import pytest

from src.errors import DataError
from src.pipeline.artifacts import sha256_file
from src.telemetry.manifest import RunManifest


class TestRunManifest:
    """Test manifest bookkeeping across commands."""

    def test_prune_drops_missing_and_changed(self, tmp_path):
        """Test entries for deleted or rewritten files are dropped and intact ones kept."""
        for name in ("kept.tsv", "changed.tsv", "deleted.tsv"):
            (tmp_path / name).write_text(name, encoding="utf-8")
        manifest = RunManifest()
        manifest.add_artifacts({name: sha256_file(tmp_path / name) for name in ("kept.tsv", "changed.tsv", "deleted.tsv")})
        (tmp_path / "changed.tsv").write_text("other", encoding="utf-8")
        (tmp_path / "deleted.tsv").unlink()

        assert sorted(manifest.prune(tmp_path)) == ["changed.tsv", "deleted.tsv"]
        assert list(manifest.artifacts) == ["kept.tsv"]

    def test_save_and_load(self, tmp_path):
        """Test a saved manifest loads back with its stages and artifacts."""
        manifest = RunManifest(formats={"kace-lstm": 1})
        with manifest.stage("prepare"):
            manifest.add_artifacts({"datasets/summary.tsv": "0" * 64})
        path = tmp_path / "manifest.json"
        manifest.save(path)
        loaded = RunManifest.load(path)
        assert loaded.artifacts == manifest.artifacts
        assert set(loaded.stages) == {"prepare"}
        assert loaded.formats == {"kace-lstm": 1}

    def test_failed_stage_not_recorded(self):
        """Test a stage that raises leaves no timing record."""
        manifest = RunManifest()
        with pytest.raises(RuntimeError):
            with manifest.stage("train"):
                raise RuntimeError("boom")
        assert manifest.stages == {}

    def test_missing_file_is_empty(self, tmp_path):
        """Test loading a manifest that does not exist gives an empty one."""
        assert RunManifest.load(tmp_path / "manifest.json") == RunManifest()

    def test_corrupt_file(self, tmp_path):
        """Test an unparseable manifest raises DataError."""
        path = tmp_path / "manifest.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(DataError):
            RunManifest.load(path)
