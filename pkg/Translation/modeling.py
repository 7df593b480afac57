"""
Transformer encoder-decoder and the encoder-output discriminator

Token id tensors are (batch, length) and padded with PAD. EncoderOutput.mask is
True at valid positions.
"""

import math
import logging
from dataclasses import dataclass

import torch
from torch import nn
from django.core.exceptions import ValidationError

from Noise.embedding import STD, gaussian_embedding_noise
from Text.vocabulary import PAD

logger = logging.getLogger(__name__)

SCORE_CLAMP = 1e-7


@dataclass
class EncoderOutput:
    states: torch.Tensor  # (batch, length, d_model)
    mask: torch.Tensor  # (batch, length), True = valid

    def __len__(self):
        return self.states.size(0)


class SinusoidalPositions(nn.Module):
    def __init__(self, d_model, max_positions):
        super().__init__()
        position = torch.arange(max_positions, dtype=torch.float).unsqueeze(1)
        div_term = torch.exp(
            torch.arange(0, d_model, 2).float() * (-math.log(10000.0) / d_model)
        )
        table = torch.zeros(max_positions, d_model)
        table[:, 0::2] = torch.sin(position * div_term)
        table[:, 1::2] = torch.cos(position * div_term)
        self.register_buffer("table", table, persistent=False)

    def forward(self, x):
        return x + self.table[: x.size(1)].to(x.dtype)


def init_embedding(embedding, d_model):
    """N(0, 1/d_model) weights with a zero PAD row; lookups are scaled back by sqrt(d_model)"""
    nn.init.normal_(embedding.weight, mean=0.0, std=d_model ** -0.5)
    with torch.no_grad():
        embedding.weight[PAD].zero_()


def causal_mask(length, device=None):
    """True above the diagonal: position j may not attend to positions > j"""
    return torch.triu(torch.ones(length, length, dtype=torch.bool, device=device), diagonal=1)


class TranslationModel(nn.Module):
    def __init__(self, config):
        super().__init__()
        self.config = config
        d = config.d_model

        self.source_embedding = nn.Embedding(config.source_vocab_size, d, padding_idx=PAD)
        self.target_embedding = nn.Embedding(config.target_vocab_size, d, padding_idx=PAD)
        self.positions = SinusoidalPositions(d, config.max_positions)
        self.dropout = nn.Dropout(config.dropout)

        encoder_layer = nn.TransformerEncoderLayer(
            d, config.num_heads, config.ffn_size, config.dropout, batch_first=True
        )
        self.encoder = nn.TransformerEncoder(
            encoder_layer, config.num_layers, enable_nested_tensor=False
        )
        decoder_layer = nn.TransformerDecoderLayer(
            d, config.num_heads, config.ffn_size, config.dropout, batch_first=True
        )
        self.decoder = nn.TransformerDecoder(decoder_layer, config.num_layers)
        self.output_projection = nn.Linear(d, config.target_vocab_size)
        for embedding in (self.source_embedding, self.target_embedding):
            init_embedding(embedding, d)

    def _check_length(self, ids, what):
        if ids.size(1) > self.config.max_positions:
            raise ValidationError(
                f"{what} length {ids.size(1)} exceeds max_positions {self.config.max_positions}"
            )

    def encode(self, source_ids, embedding_noise=0.0, noise_interpretation=STD):
        """
        Encode padded source ids

        Args:
            source_ids (LongTensor): (batch, length)
            embedding_noise (float): Gaussian sigma added to word embeddings,
                applied in training mode only

        Returns:
            EncoderOutput
        """
        self._check_length(source_ids, "Source")
        mask = source_ids.ne(PAD)

        embedded = self.source_embedding(source_ids)
        if self.training and embedding_noise:
            embedded = gaussian_embedding_noise(embedded, embedding_noise, noise_interpretation)
        x = self.dropout(self.positions(embedded * math.sqrt(self.config.d_model)))

        states = self.encoder(x, src_key_padding_mask=~mask)
        return EncoderOutput(states, mask)

    def decoder_logits(self, h, prefix_ids):
        """
        Next-token logits for every prefix position

        Args:
            h (EncoderOutput)
            prefix_ids (LongTensor): (batch, length), starting with BOS

        Returns:
            Tensor: (batch, length, target_vocab_size)
        """
        self._check_length(prefix_ids, "Target prefix")
        length = prefix_ids.size(1)

        embedded = self.target_embedding(prefix_ids) * math.sqrt(self.config.d_model)
        x = self.dropout(self.positions(embedded))
        states = self.decoder(
            x,
            h.states,
            tgt_mask=causal_mask(length, prefix_ids.device),
            tgt_key_padding_mask=prefix_ids.eq(PAD),
            memory_key_padding_mask=~h.mask,
        )
        return self.output_projection(states)

    def forward(self, source_ids, prefix_ids, embedding_noise=0.0):
        return self.decoder_logits(self.encode(source_ids, embedding_noise), prefix_ids)


class Discriminator(nn.Module):
    """
    Scores how likely an encoding comes from a manual (clean) transcript

    Self-attention sub-layer (residual + layer norm) over the encoder states,
    masked mean pooling to a sentence embedding, then a feed-forward network
    and a sigmoid. Scores are clamped to [SCORE_CLAMP, 1 - SCORE_CLAMP].
    """

    def __init__(self, config):
        super().__init__()
        d = config.d_model
        self.attention = nn.MultiheadAttention(
            d, config.num_heads, dropout=config.dropout, batch_first=True
        )
        self.dropout = nn.Dropout(config.dropout)
        self.norm = nn.LayerNorm(d)
        self.feed_forward = nn.Sequential(
            nn.Linear(d, config.ffn_size), nn.ReLU(), nn.Linear(config.ffn_size, 1)
        )

    def sentence_embedding(self, h):
        if not bool(h.mask.any(dim=1).all()):
            raise ValidationError("Cannot discriminate an encoding with no valid position")

        attended, _ = self.attention(
            h.states, h.states, h.states, key_padding_mask=~h.mask, need_weights=False
        )
        x = self.norm(h.states + self.dropout(attended))
        weights = h.mask.unsqueeze(-1).to(x.dtype)
        return (x * weights).sum(dim=1) / weights.sum(dim=1)

    def forward(self, h):
        """
        Returns:
            Tensor: (batch,) probabilities
        """
        logits = self.feed_forward(self.sentence_embedding(h)).squeeze(-1)
        return torch.sigmoid(logits).clamp(SCORE_CLAMP, 1.0 - SCORE_CLAMP)

    def discriminate(self, h):
        return self(h)
