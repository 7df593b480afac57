"""
Management command to run the desk-scale robustness study end to end
Usage: python manage.py experiment --output-dir experiments/toy --seed 1234

Phases: toy data, align, filter, baseline (alpha = beta = 0), fine-tuning
from the baseline for every alpha:beta setting of the sweep, the Gaussian
comparison system, and the curve report. Prints whether the robust system
beats the control on noisy input without losing clean accuracy, and whether
it gains more than the Gaussian system.
"""

import logging
import time
from dataclasses import dataclass
from pathlib import Path
from django.core.exceptions import ValidationError
from django.core.management import call_command
from django.core.management.base import CommandError

from Common.management.base import PipelineCommand
from Evaluation.inference import CLEAN_CONDITION, NOISY_CONDITION
from Text.corpus import write_lines
from Training.models import TrainingRun
from Training.trainer import GAUSSIAN_NOISE
from Translation.checkpoints import latest_checkpoint

logger = logging.getLogger(__name__)

BASELINE_DATASET = "baseline"
SWEEP_DATASET = "sweep"
GAUSSIAN_DATASET = "gaussian"

NOISY_GAIN = 1.0
CLEAN_TOLERANCE = 1.0


def parse_weights(text):
    """'0:0,0.5:0.5' -> [(0.0, 0.0), (0.5, 0.5)]"""
    weights = []
    for item in text.split(","):
        try:
            alpha, beta = item.split(":")
            weights.append((float(alpha), float(beta)))
        except ValueError:
            raise ValidationError(f"Bad alpha:beta setting {item!r}")
    if not weights:
        raise ValidationError("At least one alpha:beta setting is required")
    return weights


def final_bleu(run, condition):
    report = run.evaluations.filter(condition=condition).order_by("-step").first()
    if report is None:
        raise ValidationError(f"Run {run.name} has no {condition} evaluation")
    return report.bleu


@dataclass(frozen=True)
class Verdict:
    description: str
    passed: bool


def directional_verdicts(control, robust, gaussian):
    """
    Args:
        control, robust, gaussian: {condition: final BLEU}

    Returns:
        list: Verdict per check
    """
    robust_gain = robust[NOISY_CONDITION] - control[NOISY_CONDITION]
    gaussian_gain = gaussian[NOISY_CONDITION] - control[NOISY_CONDITION]
    clean_change = robust[CLEAN_CONDITION] - control[CLEAN_CONDITION]
    return [
        Verdict(
            f"noisy-input gain {robust_gain:+.2f} >= {NOISY_GAIN:+.2f}",
            robust_gain >= NOISY_GAIN,
        ),
        Verdict(
            f"clean-input change {clean_change:+.2f} >= {-CLEAN_TOLERANCE:+.2f}",
            clean_change >= -CLEAN_TOLERANCE,
        ),
        Verdict(
            f"gaussian noisy gain {gaussian_gain:+.2f} < robust noisy gain {robust_gain:+.2f}",
            gaussian_gain < robust_gain,
        ),
    ]


class Command(PipelineCommand):
    help = "Toy data, baseline, alpha/beta sweep, Gaussian comparison and report"

    def add_pipeline_arguments(self, parser):
        parser.add_argument("--output-dir", required=True)
        parser.add_argument("--baseline-steps", type=int, default=800)
        parser.add_argument("--finetune-steps", type=int, default=400)
        parser.add_argument("--checkpoint-every", type=int, default=200)
        parser.add_argument("--d-model", type=int, default=64, help="Model width of every system")
        parser.add_argument("--ffn-size", type=int, default=128)
        parser.add_argument(
            "--sweep",
            default="0:0,0.5:0.5",
            help="Comma-separated alpha:beta settings fine-tuned from the baseline",
        )
        parser.add_argument(
            "--robust", default="0.5:0.5", help="Setting compared against the 0:0 control"
        )
        parser.add_argument("--sigma", type=float, default=0.01, help="Gaussian system sigma")
        parser.add_argument("--pairs", type=int, default=5000)
        parser.add_argument("--documents", type=int, default=100)
        parser.add_argument("--dev-size", type=int, default=200)
        parser.add_argument("--strict", action="store_true", help="Fail unless every check passes")

    def call(self, name, **options):
        logger.info(f"experiment: {name} {options}")
        call_command(name, stdout=self.stdout, stderr=self.stderr, **options)

    def train(self, train_conf, run_dir, dataset, alpha, beta, steps, seed, **extra):
        self.call(
            "train",
            config=str(train_conf),
            run_dir=str(run_dir),
            alpha=alpha,
            beta=beta,
            steps=steps,
            seed=seed,
            dataset=dataset,
            **extra,
        )
        return TrainingRun.objects.get(run_dir=str(Path(run_dir).resolve()))

    def run(self, **options):
        started = time.monotonic()
        seed = options["seed"]
        out = Path(options["output_dir"])
        data = out / "data"
        sweep = parse_weights(options["sweep"])
        robust_weights = parse_weights(options["robust"])[0]
        if (0.0, 0.0) not in sweep or robust_weights not in sweep:
            raise ValidationError("The sweep must contain 0:0 and the robust setting")

        self.call(
            "make_toy_data",
            output_dir=str(data),
            pairs=options["pairs"],
            documents=options["documents"],
            dev_size=options["dev_size"],
            seed=seed,
        )
        self.call(
            "align",
            auto=str(data / "asr.auto"),
            manual=str(data / "asr.manual"),
            output=str(data / "pairs.tsv"),
            seed=seed,
        )
        self.call(
            "filter",
            input=str(data / "pairs.tsv"),
            output=str(data / "pairs.filtered.tsv"),
            seed=seed,
        )

        train_conf = out / "train.conf"
        write_lines(
            train_conf,
            [
                f"PARALLEL_SOURCE={data / 'train.src'}",
                f"PARALLEL_TARGET={data / 'train.tgt'}",
                f"TRANSCRIPTIONS={data / 'pairs.filtered.tsv'}",
                f"DEV_SOURCE={data / 'dev.src'}",
                f"DEV_NOISY_SOURCE={data / 'dev.noisy.src'}",
                f"DEV_TARGET={data / 'dev.tgt'}",
                f"CHECKPOINT_EVERY={options['checkpoint_every']}",
                f"SIGMA={options['sigma']}",
                f"D_MODEL={options['d_model']}",
                f"FFN_SIZE={options['ffn_size']}",
            ],
        )

        baseline = self.train(
            train_conf, out / "baseline", BASELINE_DATASET, 0.0, 0.0,
            options["baseline_steps"], seed,
        )
        init = str(latest_checkpoint(baseline.run_dir))

        runs = {}
        for alpha, beta in sweep:
            runs[(alpha, beta)] = self.train(
                train_conf, out / f"alpha{alpha}-beta{beta}", SWEEP_DATASET, alpha, beta,
                options["finetune_steps"], seed, init_checkpoint=init,
            )
        gaussian = self.train(
            train_conf, out / f"gaussian-alpha{robust_weights[0]}-beta{robust_weights[1]}",
            GAUSSIAN_DATASET, *robust_weights, options["finetune_steps"], seed,
            init_checkpoint=init, noise_source=GAUSSIAN_NOISE,
        )

        for dataset in (BASELINE_DATASET, SWEEP_DATASET, GAUSSIAN_DATASET):
            self.call("report", output_dir=str(out / "reports" / dataset), dataset=dataset, seed=seed)

        def scores(run):
            return {c: final_bleu(run, c) for c in (CLEAN_CONDITION, NOISY_CONDITION)}

        control, robust = runs[(0.0, 0.0)], runs[robust_weights]
        for run in (baseline, *runs.values(), gaussian):
            run_scores = scores(run)
            self.stdout.write(
                f"{run.name}: clean BLEU {run_scores[CLEAN_CONDITION]:.2f}, "
                f"noisy BLEU {run_scores[NOISY_CONDITION]:.2f}"
            )

        verdicts = directional_verdicts(scores(control), scores(robust), scores(gaussian))
        for verdict in verdicts:
            status = self.style.SUCCESS("PASS") if verdict.passed else self.style.ERROR("FAIL")
            self.stdout.write(f"{status} {verdict.description}")

        minutes = (time.monotonic() - started) / 60
        logger.info(f"experiment finished in {minutes:.1f} minutes")
        self.stdout.write(f"Study time: {minutes:.1f} minutes")

        failed = [v for v in verdicts if not v.passed]
        if failed and options["strict"]:
            raise CommandError(f"{len(failed)} of {len(verdicts)} directional checks failed")
        if not failed:
            self.stdout.write(self.style.SUCCESS(f"All directional checks passed ({out})"))
