"""Exact O(n^2) t-SNE.

Gaussian input affinities with a per-point bandwidth matched to the target
perplexity, a Student-t kernel in 2-D, and gradient descent on the KL
divergence with early exaggeration, a momentum switch and per-coordinate
gains.
"""
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.spatial.distance import pdist, squareform

from src.config.logging import get_logger
from src.config.settings import TsneConfig
from src.errors import DataError, NumericalError
from src.pipeline.rng import substream

logger = get_logger(__name__)

MACHINE_EPSILON = np.finfo(np.double).eps


@dataclass
class Embedding2D:
    """2-D coordinates with the labels and origins of the embedded rows."""

    points: np.ndarray
    labels: list[int]
    kl_divergence: float
    perplexity: float
    origins: list[str] = field(default_factory=list)
    kl_trace: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __len__(self) -> int:
        return len(self.points)


def max_perplexity(n: int) -> float:
    """Largest perplexity ``n`` points support."""
    return (n - 1) / 3.0


def conditional_affinities(
    sq_distances: np.ndarray,
    perplexity: float,
    tol: float = 1e-5,
    max_steps: int = 50,
) -> tuple[np.ndarray, np.ndarray]:
    """Row-normalised Gaussian affinities p(j|i) and their precisions.

    Every row's precision is bisected in parallel until the entropy of p(.|i)
    is within ``tol`` of log(perplexity) or ``max_steps`` is reached.

    Returns:
        (P (n, n) with zero diagonal, beta (n,))
    """
    n = len(sq_distances)
    target = np.log(perplexity)
    d = sq_distances.astype(float).copy()
    np.fill_diagonal(d, np.inf)
    # shifting each row by its nearest distance leaves p(.|i) unchanged
    d -= d.min(axis=1, keepdims=True)
    np.fill_diagonal(d, np.inf)
    finite_d = np.where(np.isinf(d), 0.0, d)

    beta = np.ones(n)
    lo = np.full(n, -np.inf)
    hi = np.full(n, np.inf)
    active = np.ones(n, dtype=bool)
    P = np.zeros((n, n))

    for _ in range(max_steps):
        rows = np.flatnonzero(active)
        if len(rows) == 0:
            break
        kernel = np.exp(-d[rows] * beta[rows, None])
        total = np.maximum(kernel.sum(axis=1), MACHINE_EPSILON)
        P[rows] = kernel / total[:, None]
        entropy = np.log(total) + beta[rows] * np.sum(finite_d[rows] * P[rows], axis=1)
        diff = entropy - target
        converged = np.abs(diff) <= tol
        active[rows[converged]] = False

        too_flat = diff > 0
        up = rows[too_flat & ~converged]
        down = rows[~too_flat & ~converged]
        lo[up] = beta[up]
        beta[up] = np.where(np.isinf(hi[up]), beta[up] * 2.0, (beta[up] + hi[up]) / 2.0)
        hi[down] = beta[down]
        beta[down] = np.where(np.isinf(lo[down]), beta[down] / 2.0, (beta[down] + lo[down]) / 2.0)

    if active.any():
        # rows that never converged keep the affinities of their last precision
        rows = np.flatnonzero(active)
        kernel = np.exp(-d[rows] * beta[rows, None])
        P[rows] = kernel / np.maximum(kernel.sum(axis=1), MACHINE_EPSILON)[:, None]
        logger.debug("perplexity_search_unconverged", rows=int(len(rows)))
    return P, beta


def row_entropies(P: np.ndarray) -> np.ndarray:
    """Shannon entropy (nats) of each row distribution."""
    with np.errstate(divide="ignore", invalid="ignore"):
        logs = np.where(P > 0, np.log(np.where(P > 0, P, 1.0)), 0.0)
    return -np.sum(P * logs, axis=1)


def joint_affinities(X: np.ndarray, perplexity: float, tol: float = 1e-5, max_steps: int = 50) -> np.ndarray:
    """Symmetrised affinities (P + P^T) / 2n, floored at machine epsilon off the diagonal."""
    conditional, _ = conditional_affinities(squareform(pdist(X, "sqeuclidean")), perplexity, tol, max_steps)
    P = (conditional + conditional.T) / (2.0 * len(X))
    P = np.maximum(P, MACHINE_EPSILON)
    np.fill_diagonal(P, 0.0)
    return P


def _student_t(Y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    num = 1.0 / (1.0 + squareform(pdist(Y, "sqeuclidean")))
    np.fill_diagonal(num, 0.0)
    Q = np.maximum(num / num.sum(), MACHINE_EPSILON)
    np.fill_diagonal(Q, 0.0)
    return num, Q


def kl_divergence(P: np.ndarray, Y: np.ndarray) -> float:
    """KL(P || Q) of an embedding."""
    _, Q = _student_t(Y)
    mask = P > 0
    return float(np.sum(P[mask] * np.log(P[mask] / Q[mask])))


def _canonical_ranks(X: np.ndarray) -> np.ndarray:
    # lexicographic row order, so initial positions follow the rows under permutation
    order = np.lexsort(X.T[::-1])
    ranks = np.empty(len(X), dtype=np.int64)
    ranks[order] = np.arange(len(X))
    return ranks


def tsne_embed(
    features: Sequence,
    labels: Sequence[int],
    config: TsneConfig,
    perplexity: Optional[float] = None,
) -> Embedding2D:
    """Embed feature vectors in 2-D.

    Args:
        features: (n, d) matrix or n feature vectors (origins are carried when present)
        labels: n labels, passed through to the result
        config: Schedule and seed
        perplexity: Overrides ``config.perplexity``

    Returns:
        Embedding with the final KL divergence and the per-iteration KL trace

    Raises:
        DataError: On non-finite features, mismatched labels or too few points
        NumericalError: If the optimisation diverges
    """
    origins = [str(f.origin) for f in features] if len(features) and hasattr(features[0], "origin") else []
    X = np.asarray(features if isinstance(features, np.ndarray) else [getattr(f, "values", f) for f in features], dtype=float)
    labels = [int(v) for v in labels]
    perplexity = config.perplexity if perplexity is None else perplexity
    n = len(X)
    if len(labels) != n:
        raise DataError(f"{n} points but {len(labels)} labels")
    if n < 3 * perplexity + 1:
        raise DataError(f"{n} points are too few for perplexity {perplexity} (need at least {3 * perplexity + 1:g})")
    if not np.all(np.isfinite(X)):
        raise DataError("features contain non-finite values")

    P = joint_affinities(X, perplexity, config.entropy_tol, config.max_search_steps)
    rng = substream(config.seed, "tsne")
    Y = rng.normal(0.0, config.init_std, size=(n, 2))[_canonical_ranks(X)]
    update = np.zeros_like(Y)
    gains = np.ones_like(Y)
    trace = np.empty(config.iterations)

    for it in range(config.iterations):
        exaggeration = config.early_exaggeration if it < config.exaggeration_iters else 1.0
        momentum = config.initial_momentum if it < config.momentum_switch_iter else config.final_momentum
        num, Q = _student_t(Y)
        PQ = (exaggeration * P - Q) * num
        grad = 4.0 * (PQ.sum(axis=1)[:, None] * Y - PQ @ Y)

        flipped = update * grad < 0.0
        gains = np.where(flipped, gains + 0.2, gains * 0.8)
        np.maximum(gains, config.min_gain, out=gains)
        update = momentum * update - config.learning_rate * gains * grad
        Y = Y + update
        Y -= Y.mean(axis=0)

        if not np.all(np.isfinite(Y)):
            raise NumericalError(f"t-SNE diverged at iteration {it}")
        trace[it] = kl_divergence(P, Y)
        if (it + 1) % 250 == 0:
            logger.debug("tsne_iteration", iteration=it + 1, kl=float(trace[it]))

    logger.info("tsne_complete", points=n, perplexity=perplexity, kl=float(trace[-1]))
    return Embedding2D(
        points=Y,
        labels=labels,
        kl_divergence=float(trace[-1]),
        perplexity=perplexity,
        origins=origins,
        kl_trace=trace,
    )
