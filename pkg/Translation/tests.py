import tempfile
from pathlib import Path

import torch
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase

from Text.vocabulary import BOS, PAD, build_vocab
from .batching import pad_batch, target_tensors
from .checkpoints import (
    checkpoint_path,
    latest_checkpoint,
    load_checkpoint,
    save_checkpoint,
    strip_discriminator,
)
from .config import ModelConfig
from .decoding import greedy_decode, translate_sentences
from .gradient_reversal import grad_reverse
from .modeling import SCORE_CLAMP, Discriminator, EncoderOutput, TranslationModel
from .serializers import ModelConfigSerializer

TINY = dict(
    num_layers=1,
    d_model=16,
    ffn_size=32,
    num_heads=2,
    dropout=0.1,
    max_positions=32,
    source_vocab_size=12,
    target_vocab_size=12,
)


def tiny_model(seed=0, **overrides):
    torch.manual_seed(seed)
    config = ModelConfig(**{**TINY, **overrides})
    return TranslationModel(config).eval(), Discriminator(config).eval()


class ModelConfigTests(SimpleTestCase):
    def test_heads_must_divide_d_model(self):
        with self.assertRaises(ValidationError):
            ModelConfig(d_model=10, num_heads=4)

    def test_dropout_must_be_below_one(self):
        with self.assertRaises(ValidationError):
            ModelConfig(dropout=1.0)

    def test_serializer_defaults_are_desk_scale(self):
        serializer = ModelConfigSerializer(
            data={}, context={"source_vocab_size": 20, "target_vocab_size": 30}
        )
        serializer.is_valid(raise_exception=True)
        config = serializer.save()
        self.assertEqual((config.source_vocab_size, config.target_vocab_size), (20, 30))
        self.assertEqual(
            (config.num_layers, config.d_model, config.ffn_size, config.num_heads),
            (2, 128, 256, 4),
        )
        self.assertEqual((config.dropout, config.label_smoothing), (0.1, 0.1))

    def test_serializer_rejects_indivisible_heads(self):
        serializer = ModelConfigSerializer(data={"d_model": 30, "num_heads": 4})
        self.assertFalse(serializer.is_valid())
        self.assertIn("d_model", serializer.errors)


class EncodeTests(SimpleTestCase):
    def setUp(self):
        self.model, _ = tiny_model()

    def test_one_state_per_token(self):
        h = self.model.encode(torch.tensor([[4, 5, 6, 7, 8, 9, 10]]))
        self.assertEqual(tuple(h.states.shape), (1, 7, 16))
        self.assertTrue(bool(h.mask.all()))

    def test_inference_is_deterministic(self):
        ids = torch.tensor([[4, 5, 6, 7]])
        with torch.no_grad():
            self.assertTrue(torch.equal(self.model.encode(ids).states, self.model.encode(ids).states))

    def test_positions_matter(self):
        with torch.no_grad():
            original = self.model.encode(torch.tensor([[4, 5, 6, 7, 8]])).states
            swapped = self.model.encode(torch.tensor([[8, 5, 6, 7, 4]])).states
        self.assertFalse(torch.allclose(original[0, 0], swapped[0, 4], atol=1e-4))

    def test_embeddings_are_scaled_to_model_width(self):
        model, _ = tiny_model(d_model=64, num_heads=4, source_vocab_size=2000, target_vocab_size=2000)
        for embedding in (model.source_embedding, model.target_embedding):
            weight = embedding.weight.detach()
            self.assertEqual(weight[PAD].abs().sum().item(), 0.0)
            self.assertAlmostEqual(weight[1:].std().item(), 64 ** -0.5, delta=0.01)

    def test_overlong_input_is_rejected(self):
        with self.assertRaises(ValidationError):
            self.model.encode(torch.full((1, 33), 4))

    def test_embedding_noise_only_in_training(self):
        ids = torch.tensor([[4, 5, 6]])
        with torch.no_grad():
            clean = self.model.encode(ids).states
            self.assertTrue(torch.equal(clean, self.model.encode(ids, embedding_noise=0.5).states))


class DecoderTests(SimpleTestCase):
    def setUp(self):
        self.model, _ = tiny_model()
        self.h = self.model.encode(torch.tensor([[4, 5, 6, 7]]))

    def test_prefix_extension_leaves_earlier_positions(self):
        with torch.no_grad():
            short = self.model.decoder_logits(self.h, torch.tensor([[BOS, 5, 6]]))
            long = self.model.decoder_logits(self.h, torch.tensor([[BOS, 5, 6, 9, 4]]))
        self.assertTrue(torch.allclose(short, long[:, :3], atol=1e-5))

    def test_rows_normalize(self):
        with torch.no_grad():
            logits = self.model.decoder_logits(self.h, torch.tensor([[BOS, 5, 6]]))
        self.assertTrue(bool(torch.isfinite(logits).all()))
        sums = logits.softmax(dim=-1).sum(dim=-1)
        self.assertTrue(torch.allclose(sums, torch.ones_like(sums), atol=1e-5))
        self.assertTrue(bool((logits.argmax(dim=-1) < 12).all()))

    def test_overlong_prefix_is_rejected(self):
        with self.assertRaises(ValidationError):
            self.model.decoder_logits(self.h, torch.full((1, 33), 4))


class DiscriminatorTests(SimpleTestCase):
    def setUp(self):
        self.model, self.discriminator = tiny_model()

    def score(self, ids):
        with torch.no_grad():
            return self.discriminator.discriminate(self.model.encode(torch.tensor(ids)))

    def test_scores_are_clamped_probabilities(self):
        scores = self.score([[4, 5, 6], [7, 8, 9]])
        self.assertTrue(bool(((scores >= SCORE_CLAMP) & (scores <= 1 - SCORE_CLAMP)).all()))

    def test_padding_does_not_change_score(self):
        unpadded = self.score([[4, 5, 6]])
        padded = self.score([[4, 5, 6, PAD, PAD], [7, 8, 9, 10, 11]])
        self.assertTrue(torch.allclose(unpadded[0], padded[0], atol=1e-5))

    def test_distinct_sentences_score_differently(self):
        scores = self.score([[4, 5, 6, 7], [11, 10, 9, 8]])
        self.assertNotEqual(scores[0].item(), scores[1].item())

    def test_all_masked_row_is_rejected(self):
        h = EncoderOutput(torch.zeros(1, 3, 16), torch.zeros(1, 3, dtype=torch.bool))
        with self.assertRaises(ValidationError):
            self.discriminator.discriminate(h)


class GradientReversalTests(SimpleTestCase):
    def setUp(self):
        self.model, self.discriminator = tiny_model(seed=3)
        self.model.double()
        self.discriminator.double()
        self.ids = torch.tensor([[4, 5, 6, 7], [8, 9, 10, PAD]])

    def objective(self, reverse, scale=1.0):
        h = self.model.encode(self.ids)
        if reverse:
            h = grad_reverse(h, scale)
        return self.discriminator.discriminate(h).log().sum()

    def shifted_objective(self, parameter, index, value):
        with torch.no_grad():
            parameter[index] = value
        return self.objective(reverse=False).item()

    def test_forward_is_identity(self):
        states = torch.randn(2, 3, 4)
        self.assertTrue(torch.equal(grad_reverse(states), states))

    def test_encoder_gradient_is_negated_finite_difference(self):
        self.model.zero_grad()
        self.objective(reverse=True).backward()

        sampled = [
            (self.model.source_embedding.weight, (5, 3)),
            (self.model.encoder.layers[0].linear1.weight, (7, 2)),
            (self.model.encoder.layers[0].self_attn.in_proj_weight, (11, 9)),
        ]
        step = 1e-6
        for parameter, index in sampled:
            original = parameter[index].item()
            upper = self.shifted_objective(parameter, index, original + step)
            lower = self.shifted_objective(parameter, index, original - step)
            with torch.no_grad():
                parameter[index] = original
            numeric = (upper - lower) / (2 * step)
            analytic = parameter.grad[index].item()
            self.assertAlmostEqual(analytic, -numeric, delta=1e-3 * max(abs(numeric), 1e-6))

    def test_discriminator_gradient_is_not_reversed(self):
        self.objective(reverse=True).backward()
        reversed_grad = self.discriminator.feed_forward[2].weight.grad.clone()
        self.discriminator.zero_grad()
        self.objective(reverse=False).backward()
        self.assertTrue(torch.allclose(reversed_grad, self.discriminator.feed_forward[2].weight.grad))

    def test_zero_scale_blocks_encoder_gradient(self):
        self.model.zero_grad()
        self.objective(reverse=True, scale=0.0).backward()
        self.assertEqual(self.model.source_embedding.weight.grad.abs().sum().item(), 0.0)


class GreedyDecodeTests(SimpleTestCase):
    def setUp(self):
        self.model, _ = tiny_model()
        self.h = self.model.encode(torch.tensor([[4, 5, 6], [7, 8, PAD]]))

    def test_deterministic_and_bounded(self):
        first = greedy_decode(self.model, self.h, 5)
        self.assertEqual(first, greedy_decode(self.model, self.h, 5))
        self.assertTrue(all(len(ids) <= 5 for ids in first))

    def test_records_no_gradient(self):
        self.model.train()
        h = self.model.encode(torch.tensor([[4, 5, 6]]))
        self.model.eval()
        greedy_decode(self.model, h, 4)
        self.assertIsNone(self.model.output_projection.weight.grad)


class CheckpointTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.run_dir = Path(self.tmp.name)
        corpus = [tuple(f"w{i}" for i in range(8))]
        self.vocab = build_vocab(corpus)
        self.model, self.discriminator = tiny_model()

    def save(self, step):
        return save_checkpoint(
            checkpoint_path(self.run_dir, step),
            self.model,
            self.vocab,
            self.vocab,
            step=step,
            discriminator=self.discriminator,
        )

    def test_round_trip_is_bitwise(self):
        loaded = load_checkpoint(self.save(10))
        for name, tensor in self.model.state_dict().items():
            self.assertTrue(torch.equal(tensor, loaded.model_state[name]), name)
        self.assertTrue(loaded.has_discriminator)
        self.assertEqual(loaded.step, 10)
        self.assertEqual(loaded.source_vocab, self.vocab)

    def test_latest_checkpoint_by_step(self):
        self.save(9)
        self.save(10)
        self.assertEqual(latest_checkpoint(self.run_dir).name, "ckpt-10")

    def test_stripping_discriminator_keeps_translations(self):
        path = self.save(1)
        stripped = strip_discriminator(path, self.run_dir / "stripped")
        sentences = [("w1", "w2", "w3"), ("w4",), ()]

        full, bare = load_checkpoint(path), load_checkpoint(stripped)
        self.assertFalse(bare.has_discriminator)
        self.assertEqual(
            translate_sentences(full.build_model(), sentences, full.source_vocab, full.target_vocab),
            translate_sentences(bare.build_model(), sentences, bare.source_vocab, bare.target_vocab),
        )

    def test_vocabulary_mismatch_is_rejected(self):
        small = build_vocab([("w1",)])
        path = save_checkpoint(self.run_dir / "bad", self.model, small, small)
        with self.assertRaises(ValidationError):
            load_checkpoint(path)


class BatchingTests(SimpleTestCase):
    def test_target_tensors_shift_by_one(self):
        vocab = build_vocab([("a", "b")])
        inputs, outputs = target_tensors([("a", "b"), ("b",)], vocab)
        self.assertEqual(inputs.tolist(), [[1, 4, 5], [1, 5, 0]])
        self.assertEqual(outputs.tolist(), [[4, 5, 2], [5, 2, 0]])

    def test_pad_batch(self):
        self.assertEqual(pad_batch([[4], [5, 6]]).tolist(), [[4, 0], [5, 6]])
