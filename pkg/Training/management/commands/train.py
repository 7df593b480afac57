"""
Management command to train a translation model
Usage: python manage.py train --config train.conf --run-dir runs/robust --alpha 0.5 --beta 0.5

With ALPHA = BETA = 0 this is plain NMT training (the baseline phase). With
INIT_CHECKPOINT set, the model starts from that checkpoint's parameters and
vocabularies and the discriminator starts fresh.
"""

import logging
from pathlib import Path
from django.conf import settings

from Common.config import build_from_config
from Common.management.base import PipelineCommand
from Common.seeding import seed_everything
from Evaluation.inference import DevEvaluator, DevSet
from Training.data import build_vocabularies, load_corpora
from Training.models import TrainingRun
from Training.serializers import TrainingConfigSerializer
from Training.trainer import NOISE_SOURCES, NonFiniteLossError, Trainer, init_from_baseline
from Translation.checkpoints import load_checkpoint
from Translation.modeling import Discriminator, TranslationModel
from Translation.serializers import ModelConfigSerializer

logger = logging.getLogger(__name__)


class Command(PipelineCommand):
    help = "Train with the weighted sum of NMT, adversarial and consistency losses"

    def add_pipeline_arguments(self, parser):
        parser.add_argument("--run-dir", default=None, help="Run directory (default: RUNS_DIR/<name>)")
        parser.add_argument("--name", default=None, help="Run name (default: run directory name)")
        parser.add_argument("--alpha", type=float, default=None, help="Weight of l_enc")
        parser.add_argument("--beta", type=float, default=None, help="Weight of l_dec")
        parser.add_argument("--steps", type=int, default=None, help="Number of updates")
        parser.add_argument("--noise-source", choices=NOISE_SOURCES, default=None)
        parser.add_argument("--init-checkpoint", default=None, help="Baseline checkpoint")
        parser.add_argument("--dataset", default="dev", help="Dataset id of the dev evaluations")

    def run(self, **options):
        setup = build_from_config(
            TrainingConfigSerializer,
            self.config_file,
            overrides={
                "seed": options["seed"],
                "alpha": options["alpha"],
                "beta": options["beta"],
                "steps": options["steps"],
                "noise_source": options["noise_source"],
                "init_checkpoint": options["init_checkpoint"],
            },
        )
        config = setup.config
        name = options["name"] or (Path(options["run_dir"]).name if options["run_dir"] else None)
        name = name or f"alpha{config.weights.alpha}-beta{config.weights.beta}-{config.noise_source}"
        run_dir = Path(options["run_dir"]) if options["run_dir"] else settings.RUNS_DIR / name
        run_dir.mkdir(parents=True, exist_ok=True)

        corpora = load_corpora(setup.parallel_source, setup.parallel_target, setup.transcriptions)
        if setup.init_checkpoint:
            baseline = load_checkpoint(setup.init_checkpoint)
            source_vocab, target_vocab = baseline.source_vocab, baseline.target_vocab
            model_config = baseline.config
        else:
            baseline = None
            source_vocab, target_vocab = build_vocabularies(
                corpora, setup.min_freq, setup.max_vocab_size
            )
            model_config = build_from_config(
                ModelConfigSerializer,
                self.config_file,
                context={
                    "source_vocab_size": len(source_vocab),
                    "target_vocab_size": len(target_vocab),
                },
            )

        seed_everything(config.seed)
        model = TranslationModel(model_config)
        discriminator = Discriminator(model_config)
        if baseline is not None:
            init_from_baseline(model, baseline)

        self.config_file.echo_to(run_dir)
        source_vocab.save(run_dir / "source.vocab")
        target_vocab.save(run_dir / "target.vocab")

        run, _ = TrainingRun.objects.update_or_create(
            run_dir=str(run_dir.resolve()),
            defaults={
                "name": name,
                "status": "running",
                "alpha": config.weights.alpha,
                "beta": config.weights.beta,
                "noise_source": config.noise_source,
                "seed": config.seed,
                "steps": config.steps,
                "init_checkpoint": setup.init_checkpoint,
                "steps_completed": 0,
                "error_message": "",
                "completed_at": None,
            },
        )
        run.evaluations.all().delete()

        evaluator = None
        if setup.dev_source:
            dev_set = DevSet.from_files(
                options["dataset"], setup.dev_source, setup.dev_target, setup.dev_noisy_source or None
            )
            evaluator = DevEvaluator(dev_set, run=run)

        trainer = Trainer(
            model,
            discriminator,
            config,
            source_vocab,
            target_vocab,
            corpora.parallel,
            corpora.transcriptions,
        )
        logger.info(
            f"Training {name}: alpha={config.weights.alpha} beta={config.weights.beta} "
            f"noise={config.noise_source} steps={config.steps} seed={config.seed}"
        )
        try:
            history = trainer.fit(run_dir, on_checkpoint=evaluator)
        except NonFiniteLossError as e:
            run.mark_failed(str(e), trainer.step)
            raise

        final = history[-1]
        run.mark_completed(final)
        self.stdout.write(
            self.style.SUCCESS(
                f"Trained {name} for {final.step} steps: l_normal={final.l_normal:.4f} "
                f"l_enc={final.l_enc:.4f} l_dec={final.l_dec:.4f} total={final.total:.4f} "
                f"-> {run_dir}"
            )
        )
