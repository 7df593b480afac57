"""
Gaussian noise on input word embeddings (the comparison system)
"""

import math
import torch
from django.core.exceptions import ValidationError

from Common.validators import validate_non_negative

STD = "std"
VARIANCE = "variance"
INTERPRETATIONS = (STD, VARIANCE)


def noise_std(sigma, interpretation=STD):
    """Per-component standard deviation for a configured sigma"""
    validate_non_negative(sigma, "sigma")
    if interpretation not in INTERPRETATIONS:
        raise ValidationError(
            f"Unknown sigma interpretation {interpretation!r}, use one of {INTERPRETATIONS}"
        )
    return math.sqrt(sigma) if interpretation == VARIANCE else float(sigma)


def gaussian_embedding_noise(embeddings, sigma, interpretation=STD, generator=None):
    """
    Add i.i.d. zero-mean Gaussian noise to every embedding component

    Args:
        embeddings (Tensor): any shape
        sigma (float): std (or variance, see interpretation), >= 0
        interpretation (str): "std" or "variance"
        generator (torch.Generator): optional source of randomness

    Returns:
        Tensor: embeddings itself when sigma is 0
    """
    std = noise_std(sigma, interpretation)
    if std == 0.0:
        return embeddings
    noise = torch.randn(
        embeddings.shape,
        generator=generator,
        dtype=embeddings.dtype,
        device=embeddings.device,
    )
    return embeddings + std * noise
