"""
Greedy decoding and batched sentence translation
"""

import logging
import torch

from Text.vocabulary import BOS, EOS, PAD, decode_ids
from .batching import source_tensor

logger = logging.getLogger(__name__)


@torch.no_grad()
def greedy_decode(model, h, max_len):
    """
    Argmax decoding until EOS or max_len tokens

    Args:
        model (TranslationModel): put in eval mode by the caller
        h (EncoderOutput)
        max_len (int): output token limit (EOS not counted)

    Returns:
        list: one list of target ids per batch row, without BOS/EOS
    """
    batch = h.states.size(0)
    max_len = min(max_len, model.config.max_positions - 1)
    prefix = torch.full((batch, 1), BOS, dtype=torch.long, device=h.states.device)
    finished = torch.zeros(batch, dtype=torch.bool, device=h.states.device)

    for _ in range(max_len):
        logits = model.decoder_logits(h, prefix)[:, -1]
        next_ids = logits.argmax(dim=-1)
        next_ids = next_ids.masked_fill(finished, PAD)
        prefix = torch.cat([prefix, next_ids.unsqueeze(1)], dim=1)
        finished |= next_ids.eq(EOS)
        if bool(finished.all()):
            break

    outputs = []
    for row in prefix[:, 1:].tolist():
        ids = []
        for index in row:
            if index in (EOS, PAD):
                break
            ids.append(index)
        outputs.append(ids)
    return outputs


def default_max_len(sentences):
    return 2 * max((len(sentence) for sentence in sentences), default=0) + 10


@torch.no_grad()
def translate_sentences(model, sentences, source_vocab, target_vocab, max_len=None, batch_size=64):
    """
    Translate tokenized sentences with greedy decoding

    Empty sentences translate to empty outputs. The model is left in eval mode.

    Returns:
        list: Sentence per input
    """
    model.eval()
    outputs = [()] * len(sentences)
    pending = [index for index, sentence in enumerate(sentences) if sentence]

    for start in range(0, len(pending), batch_size):
        indices = pending[start : start + batch_size]
        chunk = [sentences[index] for index in indices]
        limit = max_len or default_max_len(chunk)
        h = model.encode(source_tensor(chunk, source_vocab))
        for index, ids in zip(indices, greedy_decode(model, h, limit)):
            outputs[index] = decode_ids(ids, target_vocab)
    return outputs
