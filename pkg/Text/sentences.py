"""
Sentence-level records shared across the pipeline
"""

from dataclasses import dataclass
from typing import Tuple

# Ordered tokens of one sentence; no padding markers, no whitespace in tokens
Sentence = Tuple[str, ...]


@dataclass(frozen=True)
class ParallelPair:
    """(source, target) translation pair, the unit of the plain NMT loss"""

    source: Sentence
    target: Sentence


@dataclass(frozen=True)
class TranscriptionPair:
    """
    Aligned automatic/manual transcript sentence pair
    wer is the word error rate of auto against manual
    """

    auto: Sentence
    manual: Sentence
    wer: float


def format_sentence(sentence):
    return " ".join(sentence)
