"""Tests for run configuration loading."""
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import pytest

from src.config.settings import EnsembleConfig, RunConfig, render_toml
from src.corpus.types import Species
from src.ensembles.types import EnsembleKind
from src.errors import ConfigError
from src.evaluation.types import Protocol


class TestDefaults:
    """Test default values."""

    def test_documented_defaults(self):
        """Test the defaults of the network, ensembles and t-SNE."""
        config = RunConfig.load(None)
        assert config.lstm.window_len == 41
        assert config.lstm.dropout_rate == 0.2
        assert config.corpus.identity_threshold == 0.30
        assert config.tsne.perplexity == 30.0
        assert set(config.ensembles) == set(EnsembleKind)
        assert config.evaluation.protocols == list(Protocol)
        assert config.selected_species == list(Species)

    def test_booster_depth(self):
        """Test boosters default to depth 3 unless set explicitly."""
        assert EnsembleConfig(kind=EnsembleKind.GB).max_depth == 3
        assert EnsembleConfig(kind=EnsembleKind.ERT).max_depth is None
        assert EnsembleConfig(kind=EnsembleKind.AB, max_depth=1).max_depth == 1


class TestLoad:
    """Test TOML files, overrides and the environment."""

    def test_toml_file(self, tmp_path):
        """Test sections in a TOML file override defaults."""
        path = tmp_path / "run.toml"
        path.write_text(
            'seed = 11\nspecies = ["E. coli", "b_subtilis"]\n\n[lstm]\nhidden_dim = 8\n\n[ensembles.RF]\nn_trees = 7\n',
            encoding="utf-8",
        )
        config = RunConfig.load(path)
        assert config.seed == 11
        assert config.selected_species == [Species.E_COLI, Species.B_SUBTILIS]
        assert config.lstm.hidden_dim == 8
        assert config.ensembles[EnsembleKind.RF].n_trees == 7
        assert config.ensembles[EnsembleKind.RF].kind is EnsembleKind.RF
        assert config.ensembles[EnsembleKind.XGB].n_trees == 100

    def test_dotted_overrides(self, tmp_path):
        """Test command-line overrides win over the file and None is ignored."""
        path = tmp_path / "run.toml"
        path.write_text("seed = 1\n", encoding="utf-8")
        config = RunConfig.load(path, seed=5, species="ecoli", **{"paths.output_dir": str(tmp_path / "out"), "log_level": None})
        assert config.seed == 5
        assert config.species == [Species.E_COLI]
        assert config.paths.output_dir == tmp_path / "out"
        assert config.log_level == "INFO"

    def test_environment(self, monkeypatch):
        """Test KACE_ variables fill unset fields, nested with a double underscore."""
        monkeypatch.setenv("KACE_SEED", "23")
        monkeypatch.setenv("KACE_LSTM__HIDDEN_DIM", "12")
        config = RunConfig.load(None)
        assert config.seed == 23
        assert config.lstm.hidden_dim == 12

    def test_toml_roundtrip(self, tmp_path):
        """Test the rendered defaults load back to the same configuration."""
        original = RunConfig.load(None, seed=3)
        path = tmp_path / "defaults.toml"
        path.write_text(original.to_toml(), encoding="utf-8")
        assert RunConfig.load(path).snapshot() == original.snapshot()

    def test_render_toml_skips_none(self):
        """Test None values are omitted and nested tables get headers."""
        text = render_toml({"a": 1, "b": None, "t": {"x": [1, 2], "u": {"y": "z"}}})
        assert "b =" not in text
        assert tomllib.loads(text) == {"a": 1, "t": {"x": [1, 2], "u": {"y": "z"}}}


class TestErrors:
    """Test invalid configurations."""

    def test_missing_file(self, tmp_path):
        """Test a missing config file raises ConfigError."""
        with pytest.raises(ConfigError):
            RunConfig.load(tmp_path / "absent.toml")

    def test_bad_toml(self, tmp_path):
        """Test unparsable TOML raises ConfigError."""
        path = tmp_path / "bad.toml"
        path.write_text("seed = = 3\n", encoding="utf-8")
        with pytest.raises(ConfigError):
            RunConfig.load(path)

    @pytest.mark.parametrize(
        "overrides",
        [
            {"lstm.dropout_rate": 1.0},
            {"corpus.window_len": 40},
            {"tsne.iterations": 100},
            {"evaluation.protocols": []},
            {"species": "mouse"},
            {"paths.fasta": "/nonexistent/proteins.fasta"},
            {"ensembles.GB.learning_rate": 0.0},
        ],
    )
    def test_invalid_values(self, overrides):
        """Test out-of-range values raise ConfigError."""
        with pytest.raises(ConfigError):
            RunConfig.load(None, **overrides)
