import math
import random
import tempfile
import time
from io import StringIO
from pathlib import Path
from unittest import skipUnless

import torch
from decouple import config
from django.contrib.auth.models import User
from django.core.exceptions import ValidationError
from django.core.management import call_command
from django.test import SimpleTestCase, TestCase, tag
from rest_framework.test import APIClient

from Text.corpus import read_lines, write_lines
from Text.vocabulary import build_vocab
from Training.models import TrainingRun
from Translation.checkpoints import checkpoint_path, save_checkpoint, strip_discriminator
from Translation.config import ModelConfig
from Translation.modeling import Discriminator, TranslationModel
from .bleu import BleuScore, bleu
from .management.commands.experiment import directional_verdicts, parse_weights
from .models import EvalReport
from .reports import CURVE_HEADER, NO_RUN, read_curves, write_bleu_curves

RUN_SLOW_TESTS = config("RUN_SLOW_TESTS", default=False, cast=bool)
STUDY_BUDGET_SECONDS = 15 * 60


def sentences(*lines):
    return [tuple(line.split()) for line in lines]


def score_of(value):
    return BleuScore(value, (value, value, value, value), 1.0, 10, 10)


class BleuTests(SimpleTestCase):
    def test_self_score_is_exactly_100(self):
        corpus = sentences("the cat sat on the mat", "a dog ran", "hello world again and again")
        self.assertEqual(bleu(corpus, corpus).score, 100.0)

    def test_no_shared_unigram_scores_zero(self):
        self.assertEqual(bleu(sentences("a b c d"), sentences("e f g h")).score, 0.0)

    def test_brevity_penalty_example(self):
        score = bleu(sentences("the cat sat"), sentences("the cat sat down"))
        # every n-gram the candidate has matches; only the length is short
        expected = 100 * math.exp(1 - 4 / 3)
        self.assertAlmostEqual(score.score, expected, delta=0.05)
        self.assertAlmostEqual(score.brevity_penalty, math.exp(1 - 4 / 3), places=6)
        self.assertEqual((score.hypothesis_length, score.reference_length), (3, 4))

    def test_corpus_order_does_not_matter(self):
        rng = random.Random(4)
        words = "a b c d e f".split()
        candidates = [tuple(rng.choices(words, k=rng.randint(1, 8))) for _ in range(30)]
        references = [tuple(rng.choices(words, k=rng.randint(1, 8))) for _ in range(30)]
        order = list(range(30))
        rng.shuffle(order)
        self.assertEqual(
            bleu(candidates, references).score,
            bleu([candidates[i] for i in order], [references[i] for i in order]).score,
        )

    def test_smoothing_lifts_zero_precision(self):
        candidates, references = sentences("a b x y"), sentences("a b c d")
        self.assertEqual(bleu(candidates, references).score, 0.0)
        self.assertGreater(bleu(candidates, references, smooth=True).score, 0.0)

    def test_empty_corpus_is_rejected(self):
        with self.assertRaises(ValidationError):
            bleu([], [])

    def test_count_mismatch_is_rejected(self):
        with self.assertRaises(ValidationError):
            bleu(sentences("a"), sentences("a", "b"))

    def test_string_form(self):
        self.assertTrue(str(bleu(sentences("a b c d"), sentences("a b c d"))).startswith("BLEU = 100.00"))


class CurveFileTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.path = Path(self.tmp.name) / "curves.tsv"

    def test_empty_set_gives_header_only(self):
        write_bleu_curves(self.path, [])
        self.assertEqual(read_lines(self.path), ["\t".join(CURVE_HEADER)])

    def test_two_conditions_give_two_blocks(self):
        reports = [
            EvalReport(dataset="dev", condition=condition, step=step, bleu=score, alpha=0.5, beta=0.5)
            for condition, step, score in (
                ("noisy", 20, 12.0),
                ("clean", 10, 30.0),
                ("noisy", 10, 10.0),
                ("clean", 20, 31.5),
            )
        ]
        write_bleu_curves(self.path, reports)
        lines = read_lines(self.path)
        self.assertEqual(lines.count(""), 1)
        self.assertEqual(
            read_curves(self.path),
            {
                ("dev", NO_RUN, "clean", 0.5, 0.5): [(10, 30.0), (20, 31.5)],
                ("dev", NO_RUN, "noisy", 0.5, 0.5): [(10, 10.0), (20, 12.0)],
            },
        )


class CurveRunTests(TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def test_runs_with_equal_weights_stay_separate(self):
        path = Path(self.tmp.name) / "curves.tsv"
        for name, offset in (("baseline", 10.0), ("control", 30.0)):
            run = TrainingRun.objects.create(name=name, run_dir=f"/runs/{name}", seed=1, steps=500)
            for step in (250, 500):
                EvalReport.record(
                    score_of(offset + step / 250), "dev", "clean", step=step, run=run
                )

        write_bleu_curves(path, EvalReport.objects.select_related("run"))
        curves = read_curves(path)
        self.assertEqual(
            curves,
            {
                ("dev", "baseline", "clean", 0.0, 0.0): [(250, 11.0), (500, 12.0)],
                ("dev", "control", "clean", 0.0, 0.0): [(250, 31.0), (500, 32.0)],
            },
        )
        self.assertEqual(read_lines(path).count(""), 1)


class ExperimentVerdictTests(SimpleTestCase):
    def test_parse_weights(self):
        self.assertEqual(parse_weights("0:0,0.5:1"), [(0.0, 0.0), (0.5, 1.0)])
        with self.assertRaises(ValidationError):
            parse_weights("0.5")

    def test_directional_verdicts(self):
        control = {"clean": 30.0, "noisy": 20.0}
        robust = {"clean": 29.5, "noisy": 22.0}
        gaussian = {"clean": 30.0, "noisy": 20.5}
        self.assertTrue(all(v.passed for v in directional_verdicts(control, robust, gaussian)))

        weak = {"clean": 27.0, "noisy": 20.5}
        passed = [v.passed for v in directional_verdicts(control, weak, gaussian)]
        self.assertEqual(passed, [False, False, False])


class CommandTests(TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.dir = Path(self.tmp.name)

    def make_checkpoint(self):
        vocab = build_vocab([tuple(f"w{i}" for i in range(8))])
        torch.manual_seed(0)
        model_config = ModelConfig(
            num_layers=1, d_model=16, ffn_size=32, num_heads=2, max_positions=32,
            source_vocab_size=len(vocab), target_vocab_size=len(vocab),
        )
        return save_checkpoint(
            checkpoint_path(self.dir / "run", 5),
            TranslationModel(model_config),
            vocab,
            vocab,
            step=5,
            discriminator=Discriminator(model_config),
        )

    def test_translate_ignores_discriminator_parameters(self):
        path = self.make_checkpoint()
        stripped = strip_discriminator(path, self.dir / "stripped")
        write_lines(self.dir / "input.txt", ["w1 w2 w3", "W4 w5", "", "w7"])

        for name, checkpoint in (("full.txt", path), ("bare.txt", stripped)):
            call_command(
                "translate",
                checkpoint=str(checkpoint),
                input=str(self.dir / "input.txt"),
                output=str(self.dir / name),
                stdout=StringIO(),
            )
        full = (self.dir / "full.txt").read_bytes()
        self.assertEqual(full, (self.dir / "bare.txt").read_bytes())
        self.assertEqual(len(read_lines(self.dir / "full.txt")), 4)

    def test_translate_from_run_directory_uses_latest_checkpoint(self):
        path = self.make_checkpoint()
        write_lines(self.dir / "input.txt", ["w1 w2"])
        stdout = StringIO()
        call_command(
            "translate",
            checkpoint=str(self.dir / "run"),
            input=str(self.dir / "input.txt"),
            output=str(self.dir / "out.txt"),
            stdout=stdout,
        )
        self.assertIn(str(path), stdout.getvalue())

    def test_evaluate_identical_files(self):
        write_lines(self.dir / "hyp.txt", ["the cat sat on the mat", "a dog ran home"])
        stdout = StringIO()
        call_command(
            "evaluate",
            hypotheses=str(self.dir / "hyp.txt"),
            references=str(self.dir / "hyp.txt"),
            record=True,
            condition="noisy",
            step=7,
            stdout=stdout,
        )
        self.assertTrue(stdout.getvalue().startswith("BLEU = 100.00"))
        report = EvalReport.objects.get()
        self.assertEqual((report.condition, report.step, report.bleu), ("noisy", 7, 100.0))

    def test_report_writes_curve_blocks(self):
        for condition in ("clean", "noisy"):
            for step in (10, 20):
                EvalReport.record(score_of(step + 0.5), "dev", condition, step=step, alpha=0.5, beta=0.5)
        EvalReport.record(score_of(1.0), "other", "clean", step=1)

        call_command("report", output_dir=str(self.dir), dataset="dev", stdout=StringIO())
        curves = read_curves(self.dir / "bleu_curves.tsv")
        self.assertEqual(
            set(curves), {("dev", NO_RUN, "clean", 0.5, 0.5), ("dev", NO_RUN, "noisy", 0.5, 0.5)}
        )
        self.assertEqual(curves[("dev", NO_RUN, "noisy", 0.5, 0.5)], [(10, 10.5), (20, 20.5)])
        self.assertTrue((self.dir / "loss_curves.tsv").is_file())

    def test_report_on_empty_registry(self):
        call_command("report", output_dir=str(self.dir), stdout=StringIO())
        self.assertEqual(read_lines(self.dir / "bleu_curves.tsv"), ["\t".join(CURVE_HEADER)])

    def test_evaluations_api(self):
        EvalReport.record(score_of(12.0), "dev", "clean", step=1)
        EvalReport.record(score_of(9.0), "dev", "noisy", step=1)
        client = APIClient()
        client.force_authenticate(User.objects.create_user("viewer", password="pw"))

        response = client.get("/api/evaluations/", {"condition": "noisy"})
        self.assertEqual(response.status_code, 200)
        self.assertEqual(response.data["count"], 1)
        self.assertEqual(response.data["results"][0]["bleu"], 9.0)


@tag("slow")
@skipUnless(RUN_SLOW_TESTS, "set RUN_SLOW_TESTS=True for the desk-scale study")
class ExperimentTests(TestCase):
    def test_directional_replication_within_budget(self):
        with tempfile.TemporaryDirectory() as tmp:
            stdout = StringIO()
            started = time.monotonic()
            call_command("experiment", output_dir=tmp, strict=True, seed=1234, stdout=stdout)
            self.assertLess(time.monotonic() - started, STUDY_BUDGET_SECONDS)
            self.assertIn("All directional checks passed", stdout.getvalue())
