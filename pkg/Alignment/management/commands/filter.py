"""
Management command to exclude the worst-WER transcription pairs
Usage: python manage.py filter --input pairs.tsv --output pairs.filtered.tsv --drop-fraction 0.001
"""

from django.conf import settings

from Alignment.filtering import filter_by_wer
from Common.management.base import PipelineCommand
from Text.corpus import read_transcription_pairs, write_transcription_pairs


class Command(PipelineCommand):
    help = "Drop the ceil(fraction * N) transcription pairs with the highest WER"

    def add_pipeline_arguments(self, parser):
        parser.add_argument("--input", required=True, help="Pairs written by align")
        parser.add_argument("--output", required=True, help="Filtered pairs")
        parser.add_argument(
            "--drop-fraction",
            type=float,
            default=None,
            help="Fraction in [0, 1) (default: WER_DROP_FRACTION config key or setting)",
        )

    def run(self, **options):
        drop_fraction = options["drop_fraction"]
        if drop_fraction is None:
            drop_fraction = self.config_file.get(
                "WER_DROP_FRACTION", settings.WER_DROP_FRACTION, cast=float
            )

        pairs = read_transcription_pairs(options["input"])
        survivors = filter_by_wer(pairs, drop_fraction)
        write_transcription_pairs(options["output"], survivors)

        self.stdout.write(
            self.style.SUCCESS(
                f"Kept {len(survivors)} of {len(pairs)} pairs -> {options['output']}"
            )
        )
