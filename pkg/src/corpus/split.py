"""Stratified, seeded train/independent splitting."""
import math
from collections import defaultdict

from src.corpus.types import PeptideWindow, SiteLabel
from src.pipeline.rng import substream
from src.config.logging import get_logger
from src.errors import DataError

logger = get_logger(__name__)


def split_train_independent(
    windows: list[PeptideWindow],
    train_frac: float = 0.70,
    seed: int = 0,
) -> tuple[list[PeptideWindow], list[PeptideWindow]]:
    """Split windows into train and independent sets.

    Each (species, label) group is shuffled with its own seeded stream and
    round(train_frac * group size) windows go to train. Both outputs keep the
    input order.

    Args:
        windows: Windows to split; origins must be unique
        train_frac: Training share in (0, 1)
        seed: Split seed

    Returns:
        Tuple of (train, independent)

    Raises:
        DataError: If a species lacks one of the classes or origins repeat
    """
    if not 0.0 < train_frac < 1.0:
        raise ValueError(f"train_frac must be in (0, 1), got {train_frac}")

    if not windows:
        raise DataError("no windows to split")
    origins = {(w.species, w.origin) for w in windows}
    if len(origins) != len(windows):
        raise DataError("duplicate window origins; cannot keep splits disjoint")

    groups: dict[tuple, list[int]] = defaultdict(list)
    for i, window in enumerate(windows):
        groups[(window.species, window.label)].append(i)

    for species in {w.species for w in windows}:
        for label in SiteLabel:
            if not groups.get((species, label)):
                raise DataError(f"{species.value}: no {label.value} windows to split")

    in_train = [False] * len(windows)
    for (species, label), members in sorted(groups.items(), key=lambda kv: (kv[0][0].name, kv[0][1].name)):
        rng = substream(seed, "split", species.name, label.name)
        n_train = math.floor(train_frac * len(members) + 0.5)
        for position in rng.permutation(len(members))[:n_train]:
            in_train[members[position]] = True

    train = [w for w, flag in zip(windows, in_train) if flag]
    independent = [w for w, flag in zip(windows, in_train) if not flag]
    logger.info("split_complete", train=len(train), independent=len(independent), train_frac=train_frac, seed=seed)
    return train, independent
