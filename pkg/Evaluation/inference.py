"""
Inference driver and BLEU evaluation of models and files
"""

import logging
from dataclasses import dataclass
from typing import Optional

from Text.corpus import read_lines, write_lines
from Text.sentences import format_sentence
from Text.tokenization import ASR, CLEAN, EmptySentenceError, get_tokenizer
from Translation.checkpoints import load_checkpoint
from Translation.decoding import translate_sentences
from .bleu import bleu
from .models import EvalReport

logger = logging.getLogger(__name__)

CLEAN_CONDITION = "clean"
NOISY_CONDITION = "noisy"


def tokenize_file(path, mode=CLEAN):
    """One Sentence per line; lines that tokenize to nothing become ()"""
    tokenizer = get_tokenizer(mode)
    sentences = []
    for line in read_lines(path):
        try:
            sentences.append(tokenizer.tokenize(line))
        except EmptySentenceError:
            sentences.append(())
    return sentences


def translate_file(checkpoint, input_path, output_path, mode=CLEAN, max_len=None, batch_size=64):
    """
    Translate a file line by line with greedy decoding

    Only the translation model is used; discriminator parameters, if stored,
    are never loaded.

    Returns:
        list: translations, also written to output_path
    """
    checkpoint = load_checkpoint(checkpoint)
    model = checkpoint.build_model()
    sources = tokenize_file(input_path, mode)
    translations = translate_sentences(
        model,
        sources,
        checkpoint.source_vocab,
        checkpoint.target_vocab,
        max_len=max_len,
        batch_size=batch_size,
    )
    write_lines(output_path, map(format_sentence, translations))
    logger.info(f"Translated {len(sources)} lines from {input_path} into {output_path}")
    return translations


def evaluate_files(hypothesis_path, reference_path, smooth=False):
    return bleu(tokenize_file(hypothesis_path), tokenize_file(reference_path), smooth=smooth)


def evaluate_model(model, source_vocab, target_vocab, sources, references, batch_size=64):
    translations = translate_sentences(
        model, sources, source_vocab, target_vocab, batch_size=batch_size
    )
    return bleu(translations, references)


@dataclass
class DevSet:
    """Dev references plus clean and (optionally) noisy sources"""

    name: str
    clean: list
    references: list
    noisy: Optional[list] = None

    @classmethod
    def from_files(cls, name, source, target, noisy_source=None):
        return cls(
            name=name,
            clean=tokenize_file(source),
            references=tokenize_file(target),
            noisy=tokenize_file(noisy_source, mode=ASR) if noisy_source else None,
        )

    def conditions(self):
        yield CLEAN_CONDITION, self.clean
        if self.noisy is not None:
            yield NOISY_CONDITION, self.noisy


class DevEvaluator:
    """
    Checkpoint hook for Trainer.fit: scores the dev set under every input
    condition and records an EvalReport for each
    """

    def __init__(self, dev_set, run=None):
        self.dev_set = dev_set
        self.run = run
        self.scores = []

    def __call__(self, step, checkpoint_path, trainer):
        for condition, sources in self.dev_set.conditions():
            score = evaluate_model(
                trainer.model,
                trainer.source_vocab,
                trainer.target_vocab,
                sources,
                self.dev_set.references,
            )
            EvalReport.record(
                score,
                dataset=self.dev_set.name,
                condition=condition,
                step=step,
                run=self.run,
                alpha=trainer.weights.alpha,
                beta=trainer.weights.beta,
                checkpoint=checkpoint_path,
            )
            self.scores.append((step, condition, score))
            logger.info(f"Step {step} {self.dev_set.name}/{condition}: {score}")
