"""Versioned JSON model files."""
import json
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import ValidationError

from src.config.logging import get_logger
from src.config.settings import ModelConfig
from src.errors import DataError
from src.model.lstm import LstmParameters
from src.model.trainer import SequenceModel
from src.model.vocabulary import Vocabulary

logger = get_logger(__name__)

MODEL_FORMAT = "kace-lstm"
MODEL_VERSION = 1


def model_to_dict(model: SequenceModel) -> dict[str, Any]:
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "config": model.config.model_dump(mode="json"),
        "vocabulary": model.vocabulary.alphabet,
        "tensors": {
            name: {"shape": list(t.shape), "values": [float(v) for v in t.ravel()]}
            for name, t in model.params.tensors.items()
        },
        "history": model.history,
    }


def model_from_dict(data: dict[str, Any]) -> SequenceModel:
    """Rebuild a model, checking format, version and tensor shapes.

    Raises:
        DataError: On an unknown format or version, or inconsistent content
    """
    if data.get("format") != MODEL_FORMAT:
        raise DataError(f"not a {MODEL_FORMAT} file (format={data.get('format')!r})")
    if data.get("version") != MODEL_VERSION:
        raise DataError(f"unsupported {MODEL_FORMAT} version {data.get('version')!r}")
    try:
        config = ModelConfig(**data["config"])
        vocabulary = Vocabulary(data["vocabulary"])
        tensors = {
            name: np.array(entry["values"], dtype=float).reshape(entry["shape"])
            for name, entry in data["tensors"].items()
        }
        params = LstmParameters(tensors)
        params.check_shapes(config, vocabulary.size)
    except (KeyError, TypeError, ValueError, ValidationError) as e:
        raise DataError(f"corrupt model file: {e}") from e
    if not all(np.all(np.isfinite(t)) for t in tensors.values()):
        raise DataError("model file holds non-finite parameters")
    return SequenceModel(params, config, vocabulary, data.get("history", {}))


def dumps_model(model: SequenceModel) -> str:
    """Model file text; floats keep their shortest round-trip repr."""
    return json.dumps(model_to_dict(model)) + "\n"


def load_model(path: Path) -> SequenceModel:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise DataError(f"cannot read model {path}: {e}") from e
    model = model_from_dict(data)
    logger.debug("model_loaded", path=str(path), hidden_dim=model.config.hidden_dim)
    return model
