"""
Management command to corrupt a corpus with the synthetic ASR channel
Usage: python manage.py make_noise --input dev.src --output dev.noisy.src --config noise.conf
"""

import logging

from Alignment.levenshtein import corpus_wer, wer
from Common.config import build_from_config
from Common.management.base import PipelineCommand
from Noise.channel import NoiseChannel
from Noise.serializers import NoiseConfigSerializer
from Text.corpus import read_lines, tokenize_lines, write_lines, write_transcription_pairs
from Text.sentences import TranscriptionPair, format_sentence
from Text.tokenization import ASR

logger = logging.getLogger(__name__)


class Command(PipelineCommand):
    help = "Corrupt a corpus with deletions, repetitions, substitutions and insertions"

    def add_pipeline_arguments(self, parser):
        parser.add_argument("--input", required=True, help="Clean corpus, one sentence per line")
        parser.add_argument("--output", required=True, help="Corrupted corpus")
        parser.add_argument(
            "--pairs-output",
            default=None,
            help="Also write auto<TAB>manual<TAB>wer records",
        )

    def run(self, **options):
        config = build_from_config(
            NoiseConfigSerializer, self.config_file, overrides={"seed": options["seed"]}
        )
        sentences, _ = tokenize_lines(read_lines(options["input"]), ASR)
        vocabulary = {token for sentence in sentences for token in sentence}

        channel = NoiseChannel(config, vocabulary)
        noisy = channel.corrupt_corpus(sentences)
        write_lines(options["output"], (format_sentence(sentence) for sentence in noisy))

        if options["pairs_output"]:
            write_transcription_pairs(
                options["pairs_output"],
                (
                    TranscriptionPair(auto, manual, wer(auto, manual))
                    for auto, manual in zip(noisy, sentences)
                ),
            )

        empirical = corpus_wer(noisy, sentences)
        logger.info(f"Corrupted {len(sentences)} sentences, empirical WER {empirical:.4f}")
        self.stdout.write(
            self.style.SUCCESS(
                f"Wrote {len(noisy)} sentences to {options['output']} "
                f"(empirical WER: {empirical:.4f})"
            )
        )
