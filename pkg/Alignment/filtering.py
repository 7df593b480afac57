"""
WER-based filtering of transcription pairs
"""

import math
import logging
from decimal import Decimal

from Common.validators import validate_fraction

logger = logging.getLogger(__name__)


def drop_count(total, drop_fraction):
    """ceil(drop_fraction * total), computed exactly on the decimal value"""
    return math.ceil(Decimal(str(drop_fraction)) * total)


def filter_by_wer(pairs, drop_fraction=0.001):
    """
    Exclude the worst transcription pairs by WER

    Drops the ceil(drop_fraction * N) pairs with the highest WER; among equal
    WERs the earlier pair is kept. Survivors keep their input order.

    Args:
        pairs (sequence): TranscriptionPair
        drop_fraction (float): in [0, 1)

    Returns:
        list: surviving pairs
    """
    validate_fraction(drop_fraction)
    pairs = list(pairs)
    n_drop = drop_count(len(pairs), drop_fraction)
    if n_drop == 0:
        return pairs

    worst_first = sorted(range(len(pairs)), key=lambda i: (-pairs[i].wer, -i))
    dropped = set(worst_first[:n_drop])
    cutoff = min(pairs[i].wer for i in dropped)
    logger.info(
        f"WER filter dropped {n_drop} of {len(pairs)} pairs (WER >= {cutoff:.4f})"
    )
    return [pair for i, pair in enumerate(pairs) if i not in dropped]
