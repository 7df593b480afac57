"""
Process-wide seeding for reproducible runs
"""

import random
import logging
import numpy as np
import torch
from django.conf import settings

logger = logging.getLogger(__name__)


def seed_everything(seed):
    """
    Seed python, numpy and torch, and pin torch to a fixed thread count

    Args:
        seed (int): Global seed

    Returns:
        int: the seed, for chaining
    """
    random.seed(seed)
    np.random.seed(seed)
    torch.manual_seed(seed)
    torch.set_num_threads(getattr(settings, "TORCH_NUM_THREADS", 1))
    torch.use_deterministic_algorithms(True, warn_only=True)
    logger.debug(f"Seeded python/numpy/torch with {seed}")
    return seed


def derived_rng(seed, *stream):
    """
    Independent numpy generator for (seed, stream...) such as (seed, step) or
    (seed, sentence_index); results do not depend on call order
    """
    return np.random.default_rng([int(seed), *[int(s) for s in stream]])
