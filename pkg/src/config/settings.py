"""Run configuration for the acetylation site toolkit."""
import json
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Literal, Optional
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from src.corpus.types import Species, WINDOW_LEN
from src.ensembles.types import EnsembleKind
from src.evaluation.types import Protocol
from src.errors import ConfigError


class PathsConfig(BaseModel):
    """Input files and the output directory."""

    fasta: Optional[Path] = Field(None, description="Protein FASTA file (species=<name> in headers)")
    annotations: Optional[Path] = Field(None, description="Tab-separated protein_id, position, label")
    output_dir: Path = Field(Path("runs/default"), description="Directory for all artifacts")

    @field_validator("fasta", "annotations")
    @classmethod
    def _must_exist(cls, value: Optional[Path]) -> Optional[Path]:
        if value is not None and not value.exists():
            raise ValueError(f"file not found: {value}")
        return value


class CorpusConfig(BaseModel):
    """Dataset construction."""

    window_len: int = Field(WINDOW_LEN, ge=1, description="Odd window length centred on K")
    identity_threshold: float = Field(0.30, gt=0.0, le=1.0, description="Redundancy clustering identity")
    train_frac: float = Field(0.70, gt=0.0, lt=1.0, description="Training share per species and class")
    infer_negatives: Optional[bool] = Field(
        None, description="Label unannotated K as negatives; unset = only when annotations carry no negatives"
    )
    default_species: Optional[Species] = Field(None, description="Species for FASTA records without a tag")

    @field_validator("window_len")
    @classmethod
    def _odd(cls, value: int) -> int:
        if value % 2 == 0:
            raise ValueError("window_len must be odd")
        return value

    @field_validator("default_species", mode="before")
    @classmethod
    def _parse_species(cls, value: Any) -> Any:
        return Species.parse(value) if isinstance(value, str) else value


class ModelConfig(BaseModel):
    """Embedding + LSTM network and its optimiser."""

    window_len: int = Field(WINDOW_LEN, ge=1, description="Input sequence length")
    embed_dim: int = Field(128, ge=1, description="Embedding width")
    hidden_dim: int = Field(64, ge=1, description="LSTM units (feature length)")
    dropout_rate: float = Field(0.2, ge=0.0, lt=1.0, description="Rate of both dropout layers")
    batch_size: int = Field(128, ge=1, description="Mini-batch size")
    patience: int = Field(3, ge=1, description="Epochs without validation improvement before stopping")
    max_epochs: int = Field(100, ge=1, description="Hard epoch limit")
    learning_rate: float = Field(1e-3, gt=0.0, description="Adam step size")
    beta1: float = Field(0.9, ge=0.0, lt=1.0, description="Adam first-moment decay")
    beta2: float = Field(0.999, ge=0.0, lt=1.0, description="Adam second-moment decay")
    epsilon: float = Field(1e-8, gt=0.0, description="Adam denominator guard")
    init_scale: float = Field(0.05, gt=0.0, description="Uniform init half-width")
    gate_bias: bool = Field(False, description="Add zero-initialised gate biases")
    validation_fraction: float = Field(0.1, gt=0.0, lt=1.0, description="Share of training windows held out for early stopping")
    seed: int = Field(0, description="Seed for init, shuffling and dropout")


class EnsembleConfig(BaseModel):
    """One tree ensemble.

    ``max_depth`` defaults to unlimited for RF/ERT and to 3 for the boosters;
    ``max_features`` defaults to round(sqrt(n_features)).
    """

    kind: EnsembleKind = Field(EnsembleKind.RF, description="Ensemble family")
    n_trees: int = Field(100, ge=1, description="Number of trees / boosting rounds")
    max_depth: Optional[int] = Field(None, ge=0, description="Depth limit (None = unlimited)")
    learning_rate: float = Field(0.1, gt=0.0, le=1.0, description="Shrinkage for GB/XGB")
    max_features: Optional[int] = Field(None, ge=1, description="Candidate features per split for RF/ERT")
    min_samples_split: int = Field(2, ge=2, description="Smallest node that may be split")
    reg_lambda: float = Field(1.0, ge=0.0, description="XGB L2 leaf penalty")
    gamma: float = Field(0.0, ge=0.0, description="XGB minimum split gain")
    seed: int = Field(0, description="Seed for bootstrap, feature and threshold draws")

    @model_validator(mode="after")
    def _booster_depth(self) -> "EnsembleConfig":
        if "max_depth" not in self.model_fields_set and self.kind.is_booster:
            self.max_depth = 3
        return self

    @classmethod
    def for_kind(cls, kind: EnsembleKind, **overrides: Any) -> "EnsembleConfig":
        return cls(kind=kind, **overrides)


class EvaluationConfig(BaseModel):
    """Protocols and classifiers to evaluate."""

    protocols: list[Protocol] = Field(
        default_factory=lambda: list(Protocol), min_length=1, description="Subset of train, independent, cv5, cv10"
    )
    classifiers: list[EnsembleKind] = Field(default_factory=lambda: list(EnsembleKind), min_length=1)
    include_deep_model: bool = Field(True, description="Also report the network's own sigmoid output")
    threshold: float = Field(0.5, ge=0.0, le=1.0, description="Score >= threshold is positive")
    cv_retrain_extractor: bool = Field(True, description="Re-train the LSTM inside every fold")
    stratified_folds: bool = Field(False, description="Stratify fold assignment by label")


class TsneConfig(BaseModel):
    """Exact t-SNE schedule."""

    perplexity: float = Field(30.0, gt=0.0)
    iterations: int = Field(1000, ge=250)
    learning_rate: float = Field(200.0, gt=0.0)
    early_exaggeration: float = Field(12.0, ge=1.0)
    exaggeration_iters: int = Field(250, ge=0)
    initial_momentum: float = Field(0.5, ge=0.0, lt=1.0)
    final_momentum: float = Field(0.8, ge=0.0, lt=1.0)
    momentum_switch_iter: int = Field(250, ge=0)
    init_std: float = Field(1e-4, gt=0.0)
    entropy_tol: float = Field(1e-5, gt=0.0)
    max_search_steps: int = Field(50, ge=1)
    min_gain: float = Field(0.01, gt=0.0)
    split: Literal["train", "independent", "both"] = Field("independent", description="Feature split to embed")
    seed: int = Field(0)


def _default_ensembles() -> dict[EnsembleKind, EnsembleConfig]:
    return {kind: EnsembleConfig.for_kind(kind) for kind in EnsembleKind}


class RunConfig(BaseSettings):
    """Declarative configuration of a full run.

    Values come from a TOML file (``RunConfig.load``), then ``KACE_*``
    environment variables, then field defaults.
    """

    model_config = SettingsConfigDict(
        env_prefix="KACE_",
        env_nested_delimiter="__",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    seed: int = Field(7, description="Global seed; every stage derives a named substream")
    species: list[Species] = Field(default_factory=list, description="Species filter (empty = every species in the corpus)")
    pooled: bool = Field(False, description="Train one network on all selected species")
    log_level: str = Field("INFO", description="Logging level")
    log_json: bool = Field(True, description="JSON log lines; false for the console renderer")

    paths: PathsConfig = Field(default_factory=PathsConfig)
    corpus: CorpusConfig = Field(default_factory=CorpusConfig)
    lstm: ModelConfig = Field(default_factory=ModelConfig)
    ensembles: dict[EnsembleKind, EnsembleConfig] = Field(default_factory=_default_ensembles)
    evaluation: EvaluationConfig = Field(default_factory=EvaluationConfig)
    tsne: TsneConfig = Field(default_factory=TsneConfig)

    @field_validator("species", mode="before")
    @classmethod
    def _parse_species(cls, value: Any) -> Any:
        if isinstance(value, str):
            value = [part for part in value.split(",") if part.strip()]
        return [Species.parse(v) if isinstance(v, str) else v for v in value]

    @field_validator("ensembles", mode="before")
    @classmethod
    def _fill_ensembles(cls, value: Any) -> Any:
        merged: dict[EnsembleKind, Any] = dict(_default_ensembles())
        for key, section in (value or {}).items():
            kind = EnsembleKind(key)
            if isinstance(section, EnsembleConfig):
                merged[kind] = section
            else:
                merged[kind] = EnsembleConfig(**{**dict(section), "kind": kind})
        return merged

    @property
    def selected_species(self) -> list[Species]:
        """Species to process, in enum order."""
        if not self.species:
            return list(Species)
        return [s for s in Species if s in self.species]

    @classmethod
    def load(cls, path: Optional[Path] = None, **overrides: Any) -> "RunConfig":
        """Load configuration from a TOML file with command-line overrides.

        Args:
            path: TOML file, or None for defaults only
            **overrides: Top-level or dotted (``paths.output_dir``) overrides; None values are ignored

        Returns:
            Validated run configuration

        Raises:
            ConfigError: If the file is missing or unreadable, or validation fails
        """
        data: dict[str, Any] = {}
        if path is not None:
            path = Path(path)
            if not path.is_file():
                raise ConfigError(f"config file not found: {path}")
            try:
                data = tomllib.loads(path.read_text(encoding="utf-8"))
            except tomllib.TOMLDecodeError as e:
                raise ConfigError(f"invalid config file {path}: {e}") from e

        for dotted, value in overrides.items():
            if value is None:
                continue
            *parents, leaf = dotted.split(".")
            target = data
            for parent in parents:
                target = target.setdefault(parent, {})
            target[leaf] = value

        try:
            return cls(**data)
        except ValidationError as e:
            raise ConfigError(str(e)) from e

    def to_toml(self) -> str:
        """Render the configuration as TOML (None values are omitted)."""
        return render_toml(self.model_dump(mode="json"))

    def snapshot(self) -> dict[str, Any]:
        """JSON-compatible copy for manifests and model files."""
        return self.model_dump(mode="json")


def render_toml(data: dict[str, Any]) -> str:
    """Render nested dicts of scalars and scalar lists as TOML."""
    lines: list[str] = []

    def emit(table: dict[str, Any], prefix: str) -> None:
        scalars = {k: v for k, v in table.items() if not isinstance(v, dict) and v is not None}
        tables = {k: v for k, v in table.items() if isinstance(v, dict)}
        if prefix and scalars:
            lines.append(f"[{prefix}]")
        for key, value in scalars.items():
            lines.append(f"{key} = {json.dumps(value)}")
        if scalars:
            lines.append("")
        for key, value in tables.items():
            emit(value, f"{prefix}.{key}" if prefix else key)

    emit(data, "")
    return "\n".join(lines).rstrip() + "\n"
