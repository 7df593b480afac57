"""
Synthetic ASR noise channel

Per input token exactly one of delete (omission), repeat (repetition),
substitute (homophone proxy) or keep happens; after each position a random
token is inserted with p_insert. Every sentence draws from its own generator
seeded with (seed, sentence index), so corrupting a corpus in parallel gives
the same result as corrupting it in order.
"""

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple
from django.core.exceptions import ValidationError

from Common.seeding import derived_rng
from Common.validators import validate_probability
from Text.tokenization import PUNCTUATION
from Text.vocabulary import UNK_TOKEN

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class NoiseConfig:
    p_delete: float = 0.0
    p_repeat: float = 0.0
    p_substitute: float = 0.0
    p_insert: float = 0.0
    confusion_table: Optional[Dict[str, Tuple[str, ...]]] = field(default=None, hash=False)
    seed: int = 0

    def __post_init__(self):
        for name in ("p_delete", "p_repeat", "p_substitute", "p_insert"):
            try:
                validate_probability(getattr(self, name))
            except ValidationError:
                raise ValidationError(f"{name} must be in [0, 1], got {getattr(self, name)!r}")
        if self.p_delete + self.p_repeat + self.p_substitute > 1.0:
            raise ValidationError("p_delete + p_repeat + p_substitute must not exceed 1")


def edit_neighbors(tokens):
    """
    Default confusion table: tokens at character edit distance 1

    Substitution neighbors share a wildcard key (one position masked);
    insertion/deletion neighbors are found by deleting one character.
    """
    tokens = sorted(set(tokens))
    known = set(tokens)
    neighbors = defaultdict(set)

    buckets = defaultdict(set)
    for token in tokens:
        for i in range(len(token)):
            buckets[token[:i] + "\0" + token[i + 1:]].add(token)
    for bucket in buckets.values():
        for token in bucket:
            neighbors[token].update(bucket - {token})

    for token in tokens:
        for i in range(len(token)):
            shorter = token[:i] + token[i + 1:]
            if shorter in known:
                neighbors[token].add(shorter)
                neighbors[shorter].add(token)

    return {token: tuple(sorted(neighbors[token])) for token in tokens if neighbors[token]}


def _asr_form(tokens):
    normalized = []
    for token in tokens:
        if token == UNK_TOKEN:
            normalized.append(token)
            continue
        token = token.lower().strip(PUNCTUATION)
        if token:
            normalized.append(token)
    return tuple(normalized)


class NoiseChannel:
    """
    Corrupts sentences under a NoiseConfig

    Uniform substitutions and insertions draw from `vocabulary`; without one
    they draw from the tokens of the sentence being corrupted. A config
    without a confusion table substitutes edit-distance-1 neighbors from the
    vocabulary where a token has any.
    """

    def __init__(self, config, vocabulary=None):
        self.config = config
        self.vocabulary = tuple(sorted(set(vocabulary))) if vocabulary else ()
        if config.confusion_table is not None:
            self.confusion_table = config.confusion_table
        else:
            self.confusion_table = edit_neighbors(self.vocabulary)

    def _substitute(self, rng, token, pool):
        candidates = self.confusion_table.get(token)
        if not candidates:
            candidates = [other for other in pool if other != token]
        if not candidates:
            return UNK_TOKEN
        return candidates[int(rng.integers(len(candidates)))]

    def _attempt(self, rng, sentence, pool):
        cfg = self.config
        repeat_edge = cfg.p_delete + cfg.p_repeat
        substitute_edge = repeat_edge + cfg.p_substitute

        output = []
        for token in sentence:
            draw = rng.random()
            if draw < cfg.p_delete:
                pass
            elif draw < repeat_edge:
                output.extend((token, token))
            elif draw < substitute_edge:
                output.append(self._substitute(rng, token, pool))
            else:
                output.append(token)

            if cfg.p_insert and rng.random() < cfg.p_insert:
                output.append(pool[int(rng.integers(len(pool)))])
        return _asr_form(output)

    def corrupt(self, sentence, index=0):
        """
        Corrupt one nonempty sentence

        Args:
            sentence (Sentence): clean tokens
            index (int): sentence index, mixed into the seed

        Returns:
            Sentence: noisy tokens, (UNK_TOKEN,) if two attempts came out empty
        """
        if not sentence:
            raise ValidationError("Cannot corrupt an empty sentence")

        rng = derived_rng(self.config.seed, index)
        pool = self.vocabulary or tuple(sorted(set(sentence)))
        for _ in range(2):
            noisy = self._attempt(rng, sentence, pool)
            if noisy:
                return noisy
        return (UNK_TOKEN,)

    def corrupt_corpus(self, sentences):
        return [self.corrupt(sentence, index) for index, sentence in enumerate(sentences)]


def corrupt(sentence, config, index=0, vocabulary=None):
    return NoiseChannel(config, vocabulary).corrupt(sentence, index)


def read_confusion_table(path):
    """token<TAB>candidate<TAB>candidate... per line"""
    table = {}
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            fields = line.split()
            if len(fields) > 1:
                table[fields[0]] = tuple(fields[1:])
    return table


def write_confusion_table(path, table):
    with open(path, "w", encoding="utf-8") as handle:
        for token in sorted(table):
            handle.write("\t".join((token, *table[token])) + "\n")
