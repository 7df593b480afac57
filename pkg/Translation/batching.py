"""
Tensor helpers for id sequences
"""

import torch

from Text.vocabulary import BOS, EOS, PAD, encode_ids


def pad_batch(id_lists, pad=PAD):
    """(batch, max_len) LongTensor, right-padded"""
    width = max((len(ids) for ids in id_lists), default=0)
    batch = torch.full((len(id_lists), max(width, 1)), pad, dtype=torch.long)
    for row, ids in enumerate(id_lists):
        if ids:
            batch[row, : len(ids)] = torch.as_tensor(ids, dtype=torch.long)
    return batch


def source_tensor(sentences, vocab):
    return pad_batch([encode_ids(sentence, vocab) for sentence in sentences])


def target_tensors(sentences, vocab):
    """
    Teacher-forcing pair for a batch of target sentences

    Returns:
        tuple: (decoder input starting with BOS, gold output ending with EOS)
    """
    ids = [encode_ids(sentence, vocab) for sentence in sentences]
    return pad_batch([[BOS] + row for row in ids]), pad_batch([row + [EOS] for row in ids])


def target_tensors_from_ids(id_lists):
    return (
        pad_batch([[BOS] + list(row) for row in id_lists]),
        pad_batch([list(row) + [EOS] for row in id_lists]),
    )
