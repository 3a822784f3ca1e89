"""Adam optimiser state and update."""
from dataclasses import dataclass, field

import numpy as np

from src.config.settings import ModelConfig
from src.model.lstm import LstmParameters


@dataclass
class TrainingState:
    """Optimiser moments plus early-stopping bookkeeping."""

    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]
    step: int = 0
    best_val_loss: float = float("inf")
    best_epoch: int = 0
    epochs_without_improvement: int = 0
    train_loss_history: list[float] = field(default_factory=list)
    val_loss_history: list[float] = field(default_factory=list)

    @classmethod
    def for_parameters(cls, params: LstmParameters) -> "TrainingState":
        return cls(
            m={name: np.zeros_like(t) for name, t in params.tensors.items()},
            v={name: np.zeros_like(t) for name, t in params.tensors.items()},
        )

    @property
    def epochs_run(self) -> int:
        return len(self.train_loss_history)

    def history(self) -> dict[str, object]:
        return {
            "train_loss": list(self.train_loss_history),
            "val_loss": list(self.val_loss_history),
            "best_epoch": self.best_epoch,
            "best_val_loss": self.best_val_loss,
            "steps": self.step,
        }


def adam_update(
    params: LstmParameters,
    grads: dict[str, np.ndarray],
    state: TrainingState,
    config: ModelConfig,
) -> LstmParameters:
    """Apply one bias-corrected Adam step.

    ``state`` moments and step counter are updated in place; the returned
    parameters are a new object.

    Raises:
        ValueError: If gradient names or shapes do not match the parameters
    """
    if set(grads) != set(params.tensors):
        raise ValueError(f"gradient names {sorted(grads)} do not match parameters {sorted(params.tensors)}")
    for name, tensor in params.tensors.items():
        if grads[name].shape != tensor.shape:
            raise ValueError(f"gradient {name} has shape {grads[name].shape}, expected {tensor.shape}")

    state.step += 1
    b1, b2 = config.beta1, config.beta2
    correction1 = 1.0 - b1 ** state.step
    correction2 = 1.0 - b2 ** state.step
    updated = {}
    for name, tensor in params.tensors.items():
        g = grads[name]
        state.m[name] = b1 * state.m[name] + (1.0 - b1) * g
        state.v[name] = b2 * state.v[name] + (1.0 - b2) * g * g
        m_hat = state.m[name] / correction1
        v_hat = state.v[name] / correction2
        updated[name] = tensor - config.learning_rate * m_hat / (np.sqrt(v_hat) + config.epsilon)
    return LstmParameters(updated)
