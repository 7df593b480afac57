"""
Management command to score translations with corpus BLEU
Usage: python manage.py evaluate --hypotheses dev.hyp --references dev.tgt
"""

from pathlib import Path

from Common.management.base import PipelineCommand
from Evaluation.inference import CLEAN_CONDITION, NOISY_CONDITION, evaluate_files
from Evaluation.models import EvalReport
from Training.models import TrainingRun


class Command(PipelineCommand):
    help = "Corpus BLEU of a hypothesis file against a reference file"

    def add_pipeline_arguments(self, parser):
        parser.add_argument("--hypotheses", required=True, help="One translation per line")
        parser.add_argument("--references", required=True, help="One reference per line")
        parser.add_argument("--smooth", action="store_true", help="Add-one smoothing")
        parser.add_argument("--record", action="store_true", help="Store the score as an EvalReport")
        parser.add_argument("--dataset", default="dev")
        parser.add_argument(
            "--condition", choices=(CLEAN_CONDITION, NOISY_CONDITION), default=CLEAN_CONDITION
        )
        parser.add_argument("--step", type=int, default=0)
        parser.add_argument("--run-dir", default=None, help="Registered run the score belongs to")

    def run(self, **options):
        score = evaluate_files(options["hypotheses"], options["references"], options["smooth"])
        self.stdout.write(str(score))

        if options["record"]:
            run = None
            if options["run_dir"]:
                run = TrainingRun.objects.filter(
                    run_dir=str(Path(options["run_dir"]).resolve())
                ).first()
            EvalReport.record(
                score,
                dataset=options["dataset"],
                condition=options["condition"],
                step=options["step"],
                run=run,
                alpha=run.alpha if run else 0.0,
                beta=run.beta if run else 0.0,
                checkpoint=options["hypotheses"],
            )
            self.stdout.write(
                self.style.SUCCESS(f"Recorded {options['dataset']}/{options['condition']}")
            )
