"""Mini-batch training with early stopping."""
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from src.config.logging import get_logger
from src.config.settings import ModelConfig
from src.corpus.types import PeptideWindow
from src.errors import DataError, NumericalError
from src.model.lstm import LstmParameters, bce_loss, backward_gradients, forward_batch
from src.model.optim import TrainingState, adam_update
from src.model.vocabulary import DEFAULT_VOCABULARY, Vocabulary, encode_windows
from src.pipeline.rng import substream

logger = get_logger(__name__)

INFERENCE_BATCH = 512


@dataclass
class SequenceModel:
    """Trained network together with the configuration it was built with."""

    params: LstmParameters
    config: ModelConfig
    vocabulary: Vocabulary = DEFAULT_VOCABULARY
    history: dict[str, object] = field(default_factory=dict)

    def forward(self, windows: list[PeptideWindow]) -> tuple[np.ndarray, np.ndarray]:
        """Inference-mode (probabilities, features) for windows, in order."""
        if not windows:
            return np.zeros(0), np.zeros((0, self.params.hidden_dim))
        tokens = encode_windows(windows, self.vocabulary)
        return predict_tokens(self.params, tokens, self.config)

    def predict_proba(self, windows: list[PeptideWindow]) -> np.ndarray:
        return self.forward(windows)[0]


def predict_tokens(params: LstmParameters, tokens: np.ndarray, config: ModelConfig) -> tuple[np.ndarray, np.ndarray]:
    """Inference forward pass in fixed-size chunks."""
    probs, features = [], []
    for start in range(0, len(tokens), INFERENCE_BATCH):
        p, f, _ = forward_batch(tokens[start:start + INFERENCE_BATCH], params, config, mode="infer")
        probs.append(p)
        features.append(f)
    return np.concatenate(probs), np.concatenate(features)


def _labels(windows: list[PeptideWindow]) -> np.ndarray:
    return np.array([w.y for w in windows], dtype=float)


def _check_windows(windows: list[PeptideWindow], config: ModelConfig, name: str) -> None:
    if not windows:
        raise DataError(f"{name} set is empty")
    bad = [w.origin for w in windows if len(w.residues) != config.window_len]
    if bad:
        raise DataError(f"{len(bad)} {name} windows are not {config.window_len} long, e.g. {bad[0]}")


def train_model(
    train: list[PeptideWindow],
    validation: list[PeptideWindow],
    config: ModelConfig,
    vocabulary: Vocabulary = DEFAULT_VOCABULARY,
    initial: Optional[LstmParameters] = None,
) -> tuple[SequenceModel, TrainingState]:
    """Train the network with Adam on shuffled mini-batches.

    After every epoch the validation loss is computed in inference mode;
    training stops after ``patience`` epochs without improvement or at
    ``max_epochs``. The returned model holds the best-epoch parameters.

    Args:
        train: Training windows
        validation: Early-stopping windows
        config: Network and optimiser configuration
        vocabulary: Residue tokeniser
        initial: Starting parameters; drawn from ``config.seed`` when None

    Returns:
        (trained model, final training state)

    Raises:
        DataError: On empty sets or wrong window lengths
        NumericalError: If a loss becomes NaN or infinite
    """
    _check_windows(train, config, "training")
    _check_windows(validation, config, "validation")

    X, y = encode_windows(train, vocabulary), _labels(train)
    X_val, y_val = encode_windows(validation, vocabulary), _labels(validation)

    params = initial.copy() if initial is not None else LstmParameters.initialize(
        config, vocabulary.size, substream(config.seed, "lstm", "init")
    )
    params.check_shapes(config, vocabulary.size)
    shuffle_rng = substream(config.seed, "lstm", "shuffle")
    dropout_rng = substream(config.seed, "lstm", "dropout")
    state = TrainingState.for_parameters(params)
    best = params.copy()

    logger.info(
        "training_started",
        train=len(train),
        validation=len(validation),
        positives=int(y.sum()),
        batch_size=config.batch_size,
        max_epochs=config.max_epochs,
    )

    for epoch in range(1, config.max_epochs + 1):
        order = shuffle_rng.permutation(len(X))
        total = 0.0
        for start in range(0, len(order), config.batch_size):
            idx = order[start:start + config.batch_size]
            probs, _, cache = forward_batch(X[idx], params, config, mode="train", rng=dropout_rng)
            loss = bce_loss(probs, y[idx])
            if not math.isfinite(loss):
                raise NumericalError(f"non-finite training loss at epoch {epoch}, step {state.step + 1}")
            params = adam_update(params, backward_gradients(cache, y[idx]), state, config)
            total += loss * len(idx)

        train_loss = total / len(X)
        val_loss = bce_loss(predict_tokens(params, X_val, config)[0], y_val)
        if not math.isfinite(val_loss):
            raise NumericalError(f"non-finite validation loss at epoch {epoch}")
        state.train_loss_history.append(train_loss)
        state.val_loss_history.append(val_loss)

        if val_loss < state.best_val_loss:
            state.best_val_loss = val_loss
            state.best_epoch = epoch
            state.epochs_without_improvement = 0
            best = params.copy()
        else:
            state.epochs_without_improvement += 1

        logger.debug("epoch_complete", epoch=epoch, train_loss=train_loss, val_loss=val_loss)
        if state.epochs_without_improvement >= config.patience:
            logger.info("early_stopping", epoch=epoch, best_epoch=state.best_epoch)
            break

    logger.info(
        "training_complete",
        epochs=state.epochs_run,
        best_epoch=state.best_epoch,
        best_val_loss=state.best_val_loss,
    )
    return SequenceModel(best, config, vocabulary, state.history()), state
