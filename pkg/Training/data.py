"""
Training corpora and vocabularies
"""

import logging
from dataclasses import dataclass, field
from typing import List

from Text.corpus import load_parallel, read_transcription_pairs
from Text.sentences import ParallelPair, TranscriptionPair
from Text.vocabulary import build_vocab
from .trainer import TrainingConfig

logger = logging.getLogger(__name__)


@dataclass
class Corpora:
    parallel: List[ParallelPair]
    transcriptions: List[TranscriptionPair] = field(default_factory=list)


def load_corpora(parallel_source, parallel_target, transcriptions=None):
    parallel = load_parallel(parallel_source, parallel_target)
    pairs = read_transcription_pairs(transcriptions) if transcriptions else []
    logger.info(f"Loaded {len(parallel)} parallel pairs and {len(pairs)} transcription pairs")
    return Corpora(parallel, pairs)


def build_vocabularies(corpora, min_freq=1, max_size=10000):
    """
    Shared source vocabulary over parallel sources and both transcript sides,
    target vocabulary over parallel targets

    Returns:
        tuple: (source Vocabulary, target Vocabulary)
    """
    source_side = [pair.source for pair in corpora.parallel]
    for pair in corpora.transcriptions:
        source_side.extend((pair.manual, pair.auto))
    target_side = [pair.target for pair in corpora.parallel]
    return (
        build_vocab(source_side, min_freq, max_size),
        build_vocab(target_side, min_freq, max_size),
    )


@dataclass(frozen=True)
class TrainingSetup:
    """A validated training config file: data paths plus the TrainingConfig"""

    config: TrainingConfig
    parallel_source: str
    parallel_target: str
    transcriptions: str = ""
    init_checkpoint: str = ""
    dev_source: str = ""
    dev_noisy_source: str = ""
    dev_target: str = ""
    min_freq: int = 1
    max_vocab_size: int = 10000
