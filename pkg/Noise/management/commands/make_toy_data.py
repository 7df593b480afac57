"""
Management command to generate the desk-scale toy dataset
Usage: python manage.py make_toy_data --output-dir data/toy --seed 1234

Writes a copy-with-token-remap parallel corpus, ASR documents whose automatic
side comes from the noise channel, clean/noisy dev sets and the noise config.
"""

import logging
from dataclasses import replace
from pathlib import Path
import numpy as np

from Alignment.levenshtein import corpus_wer
from Common.management.base import PipelineCommand
from Noise.channel import NoiseChannel, NoiseConfig, write_confusion_table
from Text.corpus import write_lines
from Text.sentences import format_sentence
from Text.toy import make_toy_task, sample_sentence

logger = logging.getLogger(__name__)

TOY_NOISE = {"p_delete": 0.02, "p_repeat": 0.03, "p_substitute": 0.10, "p_insert": 0.0}


def as_manual_line(sentence):
    text = format_sentence(sentence)
    return text[:1].upper() + text[1:] + "."


class Command(PipelineCommand):
    help = "Generate the toy translation task with synthetic ASR transcripts"

    def add_pipeline_arguments(self, parser):
        parser.add_argument("--output-dir", required=True, help="Directory for the dataset")
        parser.add_argument("--pairs", type=int, default=5000, help="Parallel training pairs")
        parser.add_argument("--documents", type=int, default=100, help="ASR documents")
        parser.add_argument(
            "--sentences-per-document", type=int, default=10, help="Sentences per ASR document"
        )
        parser.add_argument("--dev-size", type=int, default=200, help="Dev sentences")
        parser.add_argument("--vocab-size", type=int, default=50, help="Source words")

    def run(self, **options):
        seed = options["seed"]
        out = Path(options["output_dir"])
        out.mkdir(parents=True, exist_ok=True)

        task = make_toy_task(options["vocab_size"], seed)
        rng = np.random.default_rng([seed, 1])

        train = [sample_sentence(rng, task) for _ in range(options["pairs"])]
        write_lines(out / "train.src", map(format_sentence, train))
        write_lines(out / "train.tgt", (format_sentence(task.translate(s)) for s in train))

        confusions = task.confusion_table()
        write_confusion_table(out / "confusions.tsv", confusions)
        noise = NoiseConfig(confusion_table=confusions, seed=seed, **TOY_NOISE)
        channel = NoiseChannel(noise, task.source_tokens)

        manual_lines, auto_lines, clean, noisy = [], [], [], []
        index = 0
        for _ in range(options["documents"]):
            if manual_lines:
                manual_lines.append("")
                auto_lines.append("")
            stream = []
            for _ in range(options["sentences_per_document"]):
                sentence = sample_sentence(rng, task)
                corrupted = channel.corrupt(sentence, index)
                index += 1
                manual_lines.append(as_manual_line(sentence))
                stream.extend(corrupted)
                clean.append(sentence)
                noisy.append(corrupted)
            auto_lines.append(format_sentence(stream))
        write_lines(out / "asr.manual", manual_lines)
        write_lines(out / "asr.auto", auto_lines)

        dev = [sample_sentence(rng, task) for _ in range(options["dev_size"])]
        dev_channel = NoiseChannel(replace(noise, seed=seed + 1), task.source_tokens)
        dev_noisy = dev_channel.corrupt_corpus(dev)
        write_lines(out / "dev.src", map(format_sentence, dev))
        write_lines(out / "dev.noisy.src", map(format_sentence, dev_noisy))
        write_lines(out / "dev.tgt", (format_sentence(task.translate(s)) for s in dev))

        write_lines(
            out / "noise.conf",
            [f"{key.upper()}={value}" for key, value in TOY_NOISE.items()]
            + [f"CONFUSION_TABLE={out / 'confusions.tsv'}", f"SEED={seed}"],
        )

        asr_wer = corpus_wer(noisy, clean)
        dev_wer = corpus_wer(dev_noisy, dev)
        logger.info(f"Toy data in {out}: ASR WER {asr_wer:.4f}, dev WER {dev_wer:.4f}")
        self.stdout.write(
            self.style.SUCCESS(
                f"Wrote toy dataset to {out} ({len(train)} pairs, {len(clean)} transcripts, "
                f"{len(dev)} dev sentences; ASR WER {asr_wer:.4f}, dev WER {dev_wer:.4f})"
            )
        )
