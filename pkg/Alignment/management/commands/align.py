"""
Management command to align automatic transcripts with manual references
Usage: python manage.py align --auto talks.auto --manual talks.manual --output pairs.tsv
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from django.core.exceptions import ValidationError

from Alignment.resegmentation import align_document
from Common.management.base import PipelineCommand
from Text.corpus import read_documents, write_transcription_pairs
from Text.tokenization import ASR, MODES

logger = logging.getLogger(__name__)


def _align_one(job):
    auto_lines, manual_lines, manual_mode = job
    return align_document(auto_lines, manual_lines, manual_mode)


class Command(PipelineCommand):
    help = "Re-segment automatic transcripts against the manual sentence segmentation"

    def add_pipeline_arguments(self, parser):
        parser.add_argument(
            "--auto",
            required=True,
            help="Automatic transcripts, documents separated by a blank line",
        )
        parser.add_argument(
            "--manual",
            required=True,
            help="Manual transcripts, one sentence per line, documents separated by a blank line",
        )
        parser.add_argument("--output", required=True, help="auto<TAB>manual<TAB>wer records")
        parser.add_argument(
            "--manual-mode",
            choices=MODES,
            default=ASR,
            help="Tokenization of the stored manual side (default: asr)",
        )
        parser.add_argument(
            "--workers",
            type=int,
            default=1,
            help="Documents aligned in parallel (default: 1)",
        )

    def run(self, **options):
        auto_documents = read_documents(options["auto"])
        manual_documents = read_documents(options["manual"])
        if len(auto_documents) != len(manual_documents):
            raise ValidationError(
                f"Document count mismatch: {len(auto_documents)} automatic, "
                f"{len(manual_documents)} manual"
            )

        jobs = [
            (auto, manual, options["manual_mode"])
            for auto, manual in zip(auto_documents, manual_documents)
        ]
        if options["workers"] > 1:
            with ProcessPoolExecutor(max_workers=options["workers"]) as pool:
                results = list(pool.map(_align_one, jobs))
        else:
            results = [_align_one(job) for job in jobs]

        pairs, dropped = [], 0
        for document_pairs, document_dropped in results:
            pairs.extend(document_pairs)
            dropped += document_dropped

        if dropped:
            logger.info(f"Dropped {dropped} pairs with an empty automatic segment")
        write_transcription_pairs(options["output"], pairs)

        self.stdout.write(
            self.style.SUCCESS(
                f"Aligned {len(jobs)} documents into {len(pairs)} pairs "
                f"({dropped} dropped) -> {options['output']}"
            )
        )
