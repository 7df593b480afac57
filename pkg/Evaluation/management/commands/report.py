"""
Management command to emit curve files for plotting
Usage: python manage.py report --output-dir reports/
"""

from pathlib import Path

from Common.management.base import PipelineCommand
from Evaluation.models import EvalReport
from Evaluation.reports import write_bleu_curves, write_loss_curves
from Training.models import TrainingRun
from Training.trainer import LOSS_LOG, read_loss_log

BLEU_CURVES = "bleu_curves.tsv"
LOSS_CURVES = "loss_curves.tsv"


def collect_loss_curves(runs):
    curves = []
    for run in runs:
        path = Path(run.run_dir) / LOSS_LOG
        if path.is_file():
            curves.append((run.name, run.alpha, run.beta, read_loss_log(path)))
    return curves


class Command(PipelineCommand):
    help = "Write step-vs-BLEU curves per dataset, run, condition and alpha/beta, plus loss curves"

    def add_pipeline_arguments(self, parser):
        parser.add_argument("--output-dir", required=True)
        parser.add_argument("--dataset", default=None, help="Only this dataset")
        parser.add_argument("--run-dir", action="append", default=None, help="Only these runs")

    def run(self, **options):
        out = Path(options["output_dir"])
        reports = EvalReport.objects.select_related("run")
        runs = TrainingRun.objects.all()
        if options["dataset"]:
            reports = reports.filter(dataset=options["dataset"])
        if options["run_dir"]:
            run_dirs = [str(Path(path).resolve()) for path in options["run_dir"]]
            runs = runs.filter(run_dir__in=run_dirs)
            reports = reports.filter(run__in=runs)

        bleu_path = write_bleu_curves(out / BLEU_CURVES, reports)
        loss_path = write_loss_curves(out / LOSS_CURVES, collect_loss_curves(runs))
        self.stdout.write(
            self.style.SUCCESS(
                f"Wrote {reports.count()} evaluation points to {bleu_path} and loss curves to {loss_path}"
            )
        )
