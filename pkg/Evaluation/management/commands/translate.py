"""
Management command to translate a file with a trained checkpoint
Usage: python manage.py translate --checkpoint runs/robust --input dev.src --output dev.hyp
"""

from pathlib import Path

from Common.management.base import PipelineCommand
from Evaluation.inference import translate_file
from Text.tokenization import CLEAN, MODES
from Translation.checkpoints import latest_checkpoint


class Command(PipelineCommand):
    help = "Greedy-decode every line of a file"

    def add_pipeline_arguments(self, parser):
        parser.add_argument(
            "--checkpoint",
            required=True,
            help="Checkpoint file, or a run directory (its latest checkpoint is used)",
        )
        parser.add_argument("--input", required=True, help="Source sentences, one per line")
        parser.add_argument("--output", required=True, help="Translations, one per line")
        parser.add_argument("--mode", choices=MODES, default=CLEAN, help="Input tokenization")
        parser.add_argument(
            "--max-len",
            type=int,
            default=None,
            help="Decoding limit (default: 2 * longest input + 10)",
        )
        parser.add_argument("--batch-size", type=int, default=64)

    def run(self, **options):
        checkpoint = Path(options["checkpoint"])
        if checkpoint.is_dir():
            checkpoint = latest_checkpoint(checkpoint)

        translations = translate_file(
            checkpoint,
            options["input"],
            options["output"],
            mode=options["mode"],
            max_len=options["max_len"],
            batch_size=options["batch_size"],
        )
        self.stdout.write(
            self.style.SUCCESS(
                f"Translated {len(translations)} lines with {checkpoint} -> {options['output']}"
            )
        )
