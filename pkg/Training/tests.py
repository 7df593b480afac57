import itertools
import math
import tempfile
from io import StringIO
from pathlib import Path

import numpy as np
import torch
from django.contrib.auth.models import User
from django.core.exceptions import ValidationError
from django.core.management import call_command
from django.test import SimpleTestCase, TestCase
from rest_framework.test import APIClient

from Common.seeding import seed_everything
from Text.corpus import write_lines, write_transcription_pairs
from Text.sentences import ParallelPair, TranscriptionPair, format_sentence
from Text.vocabulary import PAD, decode_ids
from Translation.batching import source_tensor, target_tensors_from_ids
from Translation.checkpoints import load_checkpoint
from Translation.config import ModelConfig
from Translation.decoding import greedy_decode, translate_sentences
from Translation.gradient_reversal import grad_reverse
from Translation.modeling import Discriminator, EncoderOutput, TranslationModel
from .data import Corpora, build_vocabularies
from .losses import (
    LossBreakdown,
    LossWeights,
    adversarial_loss,
    consistency_loss,
    nll_loss,
    pseudo_reference,
    total_loss,
)
from .models import TrainingRun
from .serializers import TrainingConfigSerializer
from .trainer import (
    GAUSSIAN_NOISE,
    LOSS_LOG,
    NonFiniteLossError,
    Trainer,
    TrainingConfig,
    discriminator_accuracy,
    init_from_baseline,
    read_loss_log,
)

TINY = dict(num_layers=1, d_model=16, ffn_size=32, num_heads=2, dropout=0.1, max_positions=32)
WORDS = tuple(f"w{i}" for i in range(8))


def toy_pairs(count=40, seed=0):
    """Copy-with-remap pairs plus transcripts that drop the second word"""
    rng = np.random.default_rng(seed)
    parallel, transcriptions = [], []
    for _ in range(count):
        length = int(rng.integers(2, 6))
        source = tuple(WORDS[i] for i in rng.integers(0, len(WORDS), size=length))
        parallel.append(ParallelPair(source, tuple(f"t{word[1:]}" for word in source)))
        transcriptions.append(TranscriptionPair(source[:1] + source[2:], source, 1 / length))
    return parallel, transcriptions


def make_trainer(alpha=0.0, beta=0.0, steps=20, seed=7, pairs=None, **config):
    parallel, transcriptions = pairs or toy_pairs()
    source_vocab, target_vocab = build_vocabularies(Corpora(parallel, transcriptions))
    model_config = ModelConfig(
        **TINY, source_vocab_size=len(source_vocab), target_vocab_size=len(target_vocab)
    )
    seed_everything(seed)
    model = TranslationModel(model_config)
    discriminator = Discriminator(model_config)
    training = TrainingConfig(
        steps=steps,
        parallel_batch_size=8,
        transcription_batch_size=8,
        warmup_steps=10,
        weights=LossWeights(alpha, beta),
        log_every=5,
        seed=seed,
        **config,
    )
    return Trainer(
        model, discriminator, training, source_vocab, target_vocab, parallel, transcriptions
    )


class LossIdentityTests(SimpleTestCase):
    def test_uniform_logits_give_log_vocabulary(self):
        gold = torch.randint(4, 100, (3, 5))
        logits = torch.zeros(3, 5, 100)
        for epsilon in (0.0, 0.1):
            self.assertAlmostEqual(nll_loss(logits, gold, epsilon).item(), math.log(100), delta=1e-6)

    def test_nll_matches_hand_computation(self):
        logits = torch.tensor([[[2.0, 0.0, 0.0, 0.0, 1.0], [0.0, 0.0, 0.0, 3.0, 0.0]]])
        gold = torch.tensor([[4, 3]])
        log_probs = logits.log_softmax(dim=-1)
        expected = -(log_probs[0, 0, 4] + log_probs[0, 1, 3]) / 2
        self.assertAlmostEqual(nll_loss(logits, gold).item(), expected.item(), delta=1e-6)

    def test_padding_positions_are_ignored(self):
        logits = torch.randn(1, 3, 10)
        gold = torch.tensor([[5, 6, PAD]])
        self.assertAlmostEqual(
            nll_loss(logits, gold).item(), nll_loss(logits[:, :2], gold[:, :2]).item(), delta=1e-6
        )

    def test_shape_mismatch_is_rejected(self):
        with self.assertRaises(ValidationError):
            nll_loss(torch.zeros(2, 3, 10), torch.ones(2, 4, dtype=torch.long))

    def test_adversarial_loss_at_chance(self):
        half = torch.full((4,), 0.5)
        self.assertAlmostEqual(adversarial_loss(half, half).item(), 2 * math.log(2), delta=1e-6)

    def test_total_is_weighted_sum(self):
        two = torch.tensor(2.0)
        total = total_loss(two, two, two, LossWeights(0.5, 0.5))
        self.assertEqual(total.item(), 4.0)

    def test_plain_weights_leave_l_normal(self):
        generator = torch.Generator().manual_seed(0)
        for _ in range(50):
            logits = torch.randn(4, 6, 30, generator=generator)
            gold = torch.randint(4, 30, (4, 6), generator=generator)
            l_normal = nll_loss(logits, gold, 0.1)
            l_enc, l_dec = torch.rand(2, generator=generator) * 10
            total = total_loss(l_normal, l_enc, l_dec, LossWeights(0.0, 0.0))
            self.assertTrue(math.isclose(total.item(), l_normal.item(), rel_tol=1e-6))

    def test_negative_weight_is_rejected(self):
        with self.assertRaises(ValidationError):
            LossWeights(-0.1, 0.0)

    def test_breakdown_consistency(self):
        breakdown = LossBreakdown(step=1, l_normal=2.0, l_enc=1.0, l_dec=4.0, total=4.5)
        self.assertTrue(breakdown.is_consistent(LossWeights(0.5, 0.5)))
        self.assertFalse(breakdown.is_consistent(LossWeights(1.0, 1.0)))


class AdversarialGradientTests(SimpleTestCase):
    def test_reversal_negates_encoder_gradient_of_l_enc(self):
        torch.manual_seed(5)
        config = ModelConfig(**TINY, source_vocab_size=12, target_vocab_size=12)
        model = TranslationModel(config).double().eval()
        discriminator = Discriminator(config).double().eval()
        manual = torch.tensor([[4, 5, 6, 7], [8, 9, PAD, PAD]])
        auto = torch.tensor([[4, 6, 7, PAD], [8, 10, 9, PAD]])

        def encoder_gradient(reverse):
            model.zero_grad()
            h_manual, h_auto = model.encode(manual), model.encode(auto)
            if reverse:
                h_manual, h_auto = grad_reverse(h_manual), grad_reverse(h_auto)
            adversarial_loss(discriminator(h_manual), discriminator(h_auto)).backward()
            return model.source_embedding.weight.grad.clone()

        reversed_grad = encoder_gradient(True)
        plain_grad = encoder_gradient(False)
        self.assertGreater(plain_grad.abs().sum().item(), 0.0)
        self.assertTrue(torch.allclose(reversed_grad, -plain_grad))

    def test_discriminator_descent_on_fixed_encodings(self):
        torch.manual_seed(11)
        config = ModelConfig(**TINY, source_vocab_size=12, target_vocab_size=12)
        discriminator = Discriminator(config).eval()
        mask = torch.ones(16, 5, dtype=torch.bool)
        direction = torch.cat([torch.ones(8), -torch.ones(8)])
        h_manual = EncoderOutput(torch.randn(16, 5, 16) + direction, mask)
        h_auto = EncoderOutput(torch.randn(16, 5, 16) - direction, mask)
        optimizer = torch.optim.Adam(discriminator.parameters(), lr=1e-2)

        def loss():
            return adversarial_loss(discriminator(h_manual), discriminator(h_auto))

        initial = loss().item()
        for _ in range(100):
            optimizer.zero_grad()
            loss().backward()
            optimizer.step()
        self.assertLess(loss().item(), 0.5 * initial)


class PseudoReferenceTests(SimpleTestCase):
    def test_deterministic_and_restores_mode(self):
        trainer = make_trainer()
        trainer.model.train()
        manual, _ = trainer.transcription_batch(1)
        first = pseudo_reference(trainer.model, manual)
        second = pseudo_reference(trainer.model, manual)
        self.assertEqual(first, second)
        self.assertTrue(trainer.model.training)
        self.assertTrue(all(isinstance(i, int) for ids in first for i in ids))

    def test_respects_length_limit(self):
        trainer = make_trainer()
        manual, _ = trainer.transcription_batch(1)
        for ids in pseudo_reference(trainer.model, manual, max_len=3):
            self.assertLessEqual(len(ids), 3)


class CopyTaskTests(SimpleTestCase):
    """A tiny model trained to copy every sentence of up to three letters"""

    LETTERS = ("a", "b", "c", "d")
    STEPS = 1500

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        sentences = [
            tuple(letters)
            for length in (1, 2, 3)
            for letters in itertools.product(cls.LETTERS, repeat=length)
        ]
        parallel = [ParallelPair(sentence, sentence) for sentence in sentences]
        source_vocab, target_vocab = build_vocabularies(Corpora(parallel))
        config = ModelConfig(
            num_layers=1,
            d_model=32,
            ffn_size=64,
            num_heads=4,
            dropout=0.0,
            label_smoothing=0.0,
            max_positions=16,
            source_vocab_size=len(source_vocab),
            target_vocab_size=len(target_vocab),
        )
        seed_everything(21)
        trainer = Trainer(
            TranslationModel(config),
            Discriminator(config),
            TrainingConfig(
                steps=cls.STEPS,
                parallel_batch_size=32,
                learning_rate=5e-3,
                warmup_steps=100,
                seed=21,
            ),
            source_vocab,
            target_vocab,
            parallel,
        )
        cls.history = [trainer.train_step() for _ in range(cls.STEPS)]
        cls.model = trainer.model.eval()
        cls.source_vocab, cls.target_vocab = source_vocab, target_vocab

    def source(self, *sentences):
        return source_tensor(sentences, self.source_vocab)

    def test_baseline_phase_drives_l_normal_low(self):
        tail = [breakdown.l_normal for breakdown in self.history[-20:]]
        self.assertLess(sum(tail) / len(tail), 0.1)
        self.assertLess(tail[-1], self.history[0].l_normal)

    def test_greedy_decode_copies_input(self):
        h = self.model.encode(self.source(("a", "b", "c"), ("d", "a")))
        decoded = greedy_decode(self.model, h, 10)
        self.assertEqual(
            [tuple(decode_ids(ids, self.target_vocab)) for ids in decoded],
            [("a", "b", "c"), ("d", "a")],
        )

    def test_pseudo_reference_copies_manual_transcript(self):
        self.model.train()
        y_hat = pseudo_reference(self.model, self.source(("a", "b")))
        self.assertTrue(self.model.training)
        self.model.eval()
        self.assertEqual(tuple(decode_ids(y_hat[0], self.target_vocab)), ("a", "b"))

    def test_consistency_loss_is_nll_of_pseudo_references(self):
        y_hat = pseudo_reference(self.model, self.source(("a", "b"), ("c", "a", "d")))
        h_auto = self.model.encode(self.source(("a", "c"), ("c", "d")))
        prefix, gold = target_tensors_from_ids(y_hat)
        with torch.no_grad():
            expected = nll_loss(self.model.decoder_logits(h_auto, prefix), gold, 0.1)
            actual = consistency_loss(self.model, h_auto, y_hat, 0.1)
        self.assertAlmostEqual(actual.item(), expected.item(), delta=1e-6)

    def test_no_gradient_reaches_the_pseudo_reference_decoding(self):
        manual = self.source(("a", "b"))
        y_hat = pseudo_reference(self.model, manual)
        self.model.zero_grad()
        consistency_loss(self.model, self.model.encode(self.source(("c", "d"))), y_hat).backward()

        grad = self.model.source_embedding.weight.grad
        for token in ("a", "b"):
            self.assertEqual(grad[self.source_vocab.id_of(token)].abs().sum().item(), 0.0, token)
        for token in ("c", "d"):
            self.assertGreater(grad[self.source_vocab.id_of(token)].abs().sum().item(), 0.0, token)
        self.model.zero_grad()

    def test_empty_pseudo_reference_is_rejected(self):
        h_auto = self.model.encode(self.source(("a",)))
        with self.assertRaises(ValidationError):
            consistency_loss(self.model, h_auto, [[]])


class TrainStepTests(SimpleTestCase):
    def test_plain_training_matches_reference_loop(self):
        steps = 20
        trainer = make_trainer(steps=steps)
        for _ in range(steps):
            trainer.train_step()

        reference = make_trainer(steps=steps)
        model = reference.model
        optimizer = torch.optim.Adam(
            model.parameters(), lr=1e-3, betas=(0.9, 0.98), eps=1e-9
        )
        scheduler = torch.optim.lr_scheduler.LambdaLR(
            optimizer, lambda done: min((done + 1) / 10, math.sqrt(10 / (done + 1)))
        )
        for step in range(1, steps + 1):
            source, prefix, gold = reference.parallel_batch(step)
            model.train()
            logits = model.decoder_logits(model.encode(source), prefix)
            loss = nll_loss(logits, gold, model.config.label_smoothing)
            optimizer.zero_grad(set_to_none=True)
            loss.backward()
            optimizer.step()
            scheduler.step()

        for (name, trained), expected in zip(
            trainer.model.named_parameters(), model.parameters()
        ):
            self.assertTrue(torch.equal(trained, expected), name)

    def test_breakdowns_are_consistent(self):
        trainer = make_trainer(alpha=0.5, beta=0.25, steps=5)
        for _ in range(5):
            breakdown = trainer.train_step()
            self.assertTrue(breakdown.is_consistent(trainer.weights))
            self.assertGreater(breakdown.l_enc, 0.0)
            self.assertGreaterEqual(breakdown.l_dec, 0.0)

    def test_zero_weight_terms_are_still_logged(self):
        breakdown = make_trainer().train_step()
        self.assertGreater(breakdown.l_enc, 0.0)
        self.assertEqual(breakdown.total, breakdown.l_normal)

    def test_gaussian_comparison_system_trains(self):
        trainer = make_trainer(alpha=0.5, beta=0.5, steps=3, noise_source=GAUSSIAN_NOISE, sigma=0.01)
        for _ in range(3):
            breakdown = trainer.train_step()
            self.assertTrue(math.isfinite(breakdown.total))
        self.assertEqual(breakdown.skipped_pseudo_references, 0)

    def test_non_finite_loss_names_component(self):
        trainer = make_trainer()
        with torch.no_grad():
            for parameter in trainer.model.parameters():
                parameter.fill_(float("nan"))
        with self.assertRaises(NonFiniteLossError) as raised:
            trainer.train_step()
        self.assertEqual(raised.exception.component, "l_normal")
        self.assertEqual(raised.exception.step, 1)

    def test_unfit_pairs_are_dropped_and_logged(self):
        parallel, transcriptions = toy_pairs()
        long_sentence = tuple(WORDS[i % len(WORDS)] for i in range(50))
        transcriptions += [
            TranscriptionPair(long_sentence, long_sentence[:4], 1.0),
            TranscriptionPair((), ("w1", "w2"), 1.0),
        ]
        parallel += [ParallelPair(long_sentence, tuple(f"t{w[1:]}" for w in long_sentence))]

        with self.assertLogs("Training.trainer", "WARNING") as logs:
            trainer = make_trainer(alpha=0.5, beta=0.5, pairs=(parallel, transcriptions))
        self.assertEqual(len(trainer.parallel), 40)
        self.assertEqual(len(trainer.transcriptions), 40)
        for manual, auto in trainer.transcriptions:
            self.assertTrue(0 < len(manual) <= 32 and 0 < len(auto) <= 32)
        output = "\n".join(logs.output)
        self.assertIn("Dropped 1 of 41 parallel pairs", output)
        self.assertIn("Dropped 2 of 42 transcription pairs", output)

    def test_discriminator_accuracy_is_a_fraction(self):
        trainer = make_trainer()
        _, transcriptions = toy_pairs(10, seed=1)
        accuracy = discriminator_accuracy(
            trainer.model, trainer.discriminator, transcriptions, trainer.source_vocab
        )
        self.assertGreaterEqual(accuracy, 0.0)
        self.assertLessEqual(accuracy, 1.0)


class FitTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_same_seed_gives_identical_loss_logs(self):
        logs = []
        for name in ("first", "second"):
            make_trainer(alpha=0.5, beta=0.5, steps=100).fit(self.dir / name)
            logs.append((self.dir / name / LOSS_LOG).read_text())
        self.assertEqual(logs[0], logs[1])
        self.assertEqual(len(logs[0].splitlines()), 101)

    def test_loss_log_round_trip_and_checkpoints(self):
        trainer = make_trainer(alpha=0.5, beta=0.5, steps=6, checkpoint_every=3)
        seen = []
        history = trainer.fit(self.dir, on_checkpoint=lambda step, path, _: seen.append(step))
        self.assertEqual(seen, [3, 6])
        records = read_loss_log(self.dir / LOSS_LOG)
        self.assertEqual([r.step for r in records], list(range(1, 7)))
        for record, breakdown in zip(records, history):
            self.assertTrue(math.isclose(record.total, breakdown.total, rel_tol=1e-8))

    def test_init_from_baseline(self):
        baseline = make_trainer(steps=5)
        baseline.fit(self.dir)
        checkpoint = load_checkpoint(self.dir / "ckpt-5")

        fresh = make_trainer(seed=99)
        init_from_baseline(fresh.model, checkpoint)
        for (name, loaded), stored in zip(
            fresh.model.state_dict().items(), checkpoint.model_state.values()
        ):
            self.assertTrue(torch.equal(loaded, stored), name)

        sentences = [pair.source for pair in toy_pairs(5)[0]]
        self.assertEqual(
            translate_sentences(fresh.model.eval(), sentences, fresh.source_vocab, fresh.target_vocab),
            translate_sentences(
                checkpoint.build_model(), sentences, checkpoint.source_vocab, checkpoint.target_vocab
            ),
        )

    def test_init_from_mismatched_baseline_is_rejected(self):
        baseline = make_trainer(steps=1)
        baseline.fit(self.dir)
        checkpoint = load_checkpoint(self.dir / "ckpt-1")
        other = TranslationModel(ModelConfig(**{**TINY, "d_model": 32}, source_vocab_size=20, target_vocab_size=20))
        with self.assertRaises(ValidationError):
            init_from_baseline(other, checkpoint)


class TrainingConfigSerializerTests(SimpleTestCase):
    def test_weighted_asr_training_needs_transcriptions(self):
        serializer = TrainingConfigSerializer(
            data={"parallel_source": "a", "parallel_target": "b", "alpha": 0.5}
        )
        self.assertFalse(serializer.is_valid())
        self.assertIn("transcriptions", serializer.errors)

    def test_gaussian_training_needs_no_transcriptions(self):
        serializer = TrainingConfigSerializer(
            data={"parallel_source": "a", "parallel_target": "b", "alpha": 0.5, "noise_source": "gaussian"}
        )
        self.assertTrue(serializer.is_valid(), serializer.errors)
        setup = serializer.save()
        self.assertEqual(setup.config.weights, LossWeights(0.5, 0.0))
        self.assertEqual(setup.config.noise_source, GAUSSIAN_NOISE)

    def test_dev_files_come_together(self):
        serializer = TrainingConfigSerializer(
            data={"parallel_source": "a", "parallel_target": "b", "dev_source": "dev.src"}
        )
        self.assertFalse(serializer.is_valid())
        self.assertIn("dev_target", serializer.errors)


class TrainCommandTests(TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)
        parallel, transcriptions = toy_pairs()
        write_lines(self.dir / "train.src", (format_sentence(p.source) for p in parallel))
        write_lines(self.dir / "train.tgt", (format_sentence(p.target) for p in parallel))
        write_transcription_pairs(self.dir / "pairs.tsv", transcriptions)
        dev = parallel[:6]
        write_lines(self.dir / "dev.src", (format_sentence(p.source) for p in dev))
        write_lines(self.dir / "dev.noisy.src", (format_sentence(p.source[1:]) for p in dev))
        write_lines(self.dir / "dev.tgt", (format_sentence(p.target) for p in dev))
        write_lines(
            self.dir / "train.conf",
            [
                f"PARALLEL_SOURCE={self.dir / 'train.src'}",
                f"PARALLEL_TARGET={self.dir / 'train.tgt'}",
                f"TRANSCRIPTIONS={self.dir / 'pairs.tsv'}",
                f"DEV_SOURCE={self.dir / 'dev.src'}",
                f"DEV_NOISY_SOURCE={self.dir / 'dev.noisy.src'}",
                f"DEV_TARGET={self.dir / 'dev.tgt'}",
                "STEPS=6",
                "CHECKPOINT_EVERY=3",
                "PARALLEL_BATCH_SIZE=8",
                "TRANSCRIPTION_BATCH_SIZE=8",
                "WARMUP_STEPS=4",
                "NUM_LAYERS=1",
                "D_MODEL=16",
                "FFN_SIZE=32",
                "NUM_HEADS=2",
                "MAX_POSITIONS=32",
            ],
        )
        self.run_dir = self.dir / "run"

    def tearDown(self):
        self.tmp.cleanup()

    def train(self, **options):
        call_command(
            "train",
            config=str(self.dir / "train.conf"),
            run_dir=str(self.run_dir),
            stdout=StringIO(),
            **options,
        )
        return TrainingRun.objects.get(run_dir=str(self.run_dir.resolve()))

    def test_train_registers_run_and_evaluations(self):
        run = self.train(alpha=0.5, beta=0.5, seed=3)
        self.assertEqual(run.status, "completed")
        self.assertEqual(run.steps_completed, 6)
        self.assertEqual((run.alpha, run.beta), (0.5, 0.5))
        self.assertEqual(run.evaluations.count(), 4)
        for name in ("ckpt-3", "ckpt-6", LOSS_LOG, "train.conf", "source.vocab", "target.vocab"):
            self.assertTrue((self.run_dir / name).is_file(), name)

    def test_fine_tuning_starts_from_baseline(self):
        self.train(seed=3)
        baseline = str(self.run_dir / "ckpt-6")
        self.run_dir = self.dir / "finetuned"
        run = self.train(alpha=0.5, beta=0.5, init_checkpoint=baseline, steps=3, seed=3)
        self.assertEqual(run.init_checkpoint, baseline)
        self.assertEqual(
            load_checkpoint(self.run_dir / "ckpt-3").source_vocab,
            load_checkpoint(baseline).source_vocab,
        )

    def test_losses_api(self):
        run = self.train(seed=3)
        client = APIClient()
        client.force_authenticate(User.objects.create_user("viewer", password="pw"))

        listing = client.get("/api/runs/", {"status": "completed"})
        self.assertEqual(listing.status_code, 200)
        self.assertEqual(listing.data["count"], 1)

        losses = client.get(f"/api/runs/{run.pk}/losses/")
        self.assertEqual(losses.status_code, 200)
        self.assertEqual([row["step"] for row in losses.data], list(range(1, 7)))

    def test_api_requires_authentication(self):
        self.assertIn(APIClient().get("/api/runs/").status_code, (401, 403))

    def test_seed_flag_overrides_config_seed(self):
        with open(self.dir / "train.conf", "a", encoding="utf-8") as handle:
            handle.write("SEED=5\n")
        self.assertEqual(self.train(seed=9).seed, 9)
        self.run_dir = self.dir / "file-seed"
        self.assertEqual(self.train().seed, 5)
