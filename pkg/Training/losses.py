"""
Training objectives

total = alpha * l_enc + beta * l_dec + l_normal, where l_normal is the
label-smoothed NLL on parallel data, l_enc the adversarial loss of the
discriminator over manual/automatic encodings and l_dec the NLL of automatic
transcripts against pseudo-references decoded from the manual ones.
"""

import math
from dataclasses import dataclass

import torch
import torch.nn.functional as F
from django.core.exceptions import ValidationError

from Common.validators import validate_non_negative
from Text.vocabulary import PAD
from Translation.batching import target_tensors_from_ids
from Translation.decoding import greedy_decode


@dataclass(frozen=True)
class LossWeights:
    alpha: float = 0.0
    beta: float = 0.0

    def __post_init__(self):
        validate_non_negative(self.alpha, "alpha")
        validate_non_negative(self.beta, "beta")

    @property
    def is_plain(self):
        return self.alpha == 0 and self.beta == 0


@dataclass(frozen=True)
class LossBreakdown:
    step: int
    l_normal: float
    l_enc: float
    l_dec: float
    total: float
    skipped_pseudo_references: int = 0

    def is_consistent(self, weights, rel_tol=1e-6):
        expected = weights.alpha * self.l_enc + weights.beta * self.l_dec + self.l_normal
        return math.isclose(self.total, expected, rel_tol=rel_tol, abs_tol=1e-12)


def nll_loss(logits, gold, epsilon=0.0):
    """
    Label-smoothed negative log-likelihood

    Averaged over the non-PAD positions of each sentence, then over sentences.

    Args:
        logits (Tensor): (batch, length, vocab)
        gold (LongTensor): (batch, length), PAD-padded, each row ending with EOS
        epsilon (float): label smoothing

    Returns:
        Tensor: scalar
    """
    if logits.shape[:2] != gold.shape:
        raise ValidationError(
            f"Logits cover {tuple(logits.shape[:2])} positions but targets are {tuple(gold.shape)}"
        )
    vocab = logits.size(-1)
    per_token = F.cross_entropy(
        logits.reshape(-1, vocab),
        gold.reshape(-1),
        ignore_index=PAD,
        reduction="none",
        label_smoothing=epsilon,
    ).view_as(gold)

    valid = gold.ne(PAD).to(per_token.dtype)
    per_sentence = (per_token * valid).sum(dim=1) / valid.sum(dim=1).clamp(min=1.0)
    return per_sentence.mean()


def adversarial_loss(score_manual, score_auto):
    """mean(-log D(h_manual) - log(1 - D(h_auto))) over paired scores"""
    return (-torch.log(score_manual) - torch.log1p(-score_auto)).mean()


def total_loss(l_normal, l_enc, l_dec, weights):
    """Weighted sum; zero-weighted terms are left out of the sum entirely"""
    total = l_normal
    if weights.alpha:
        total = total + weights.alpha * l_enc
    if weights.beta:
        total = total + weights.beta * l_dec
    return total


@torch.no_grad()
def pseudo_reference(model, manual_ids, max_len=None):
    """
    Greedy translations of the manual transcripts, as constant targets

    Decoded in eval mode (no dropout); the model's previous mode is restored.

    Args:
        model (TranslationModel)
        manual_ids (LongTensor): (batch, length) PAD-padded sources
        max_len (int): output limit, default 2 * source length + 10

    Returns:
        list: target id lists (empty where the model emitted EOS first)
    """
    was_training = model.training
    model.eval()
    try:
        lengths = manual_ids.ne(PAD).sum(dim=1).tolist()
        limit = max_len or 2 * max(lengths, default=0) + 10
        return greedy_decode(model, model.encode(manual_ids), limit)
    finally:
        model.train(was_training)


def consistency_loss(model, h_auto, y_hat, epsilon=0.0):
    """
    NLL of the pseudo-references given the automatic-transcript encodings

    Args:
        h_auto (EncoderOutput): encodings of the rows whose y_hat is nonempty
        y_hat (list): nonempty target id lists, one per row

    Returns:
        Tensor: scalar
    """
    if any(len(ids) == 0 for ids in y_hat):
        raise ValidationError("Pseudo-references must be nonempty")
    prefix, gold = target_tensors_from_ids(y_hat)
    prefix, gold = prefix.to(h_auto.states.device), gold.to(h_auto.states.device)
    return nll_loss(model.decoder_logits(h_auto, prefix), gold, epsilon)
