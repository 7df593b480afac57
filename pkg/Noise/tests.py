import tempfile
from io import StringIO
from pathlib import Path

import torch
from django.core.exceptions import ValidationError
from django.core.management import call_command
from django.test import SimpleTestCase
from rest_framework.exceptions import ValidationError as SerializerValidationError

from Alignment.levenshtein import corpus_wer
from Common.config import ConfigFile, build_from_config
from Text.corpus import read_documents, read_lines, read_transcription_pairs, write_lines
from Text.vocabulary import UNK_TOKEN
from .channel import NoiseChannel, NoiseConfig, corrupt, edit_neighbors
from .embedding import gaussian_embedding_noise, noise_std
from .serializers import NoiseConfigSerializer

VOCABULARY = tuple(f"w{i}" for i in range(20))


def corpus(count=1000, length=10):
    return [tuple(VOCABULARY[(7 * i + 3 * j) % 20] for j in range(length)) for i in range(count)]


class NoiseConfigTests(SimpleTestCase):
    def test_probabilities_must_be_in_range(self):
        with self.assertRaises(ValidationError):
            NoiseConfig(p_insert=1.5)

    def test_exclusive_events_must_fit_in_one(self):
        with self.assertRaises(ValidationError):
            NoiseConfig(p_delete=0.5, p_repeat=0.3, p_substitute=0.3)

    def test_insert_is_independent_of_the_budget(self):
        NoiseConfig(p_delete=0.5, p_substitute=0.5, p_insert=1.0)


class CorruptTests(SimpleTestCase):
    sentence = ("alpha", "beta", "gamma", "delta")

    def test_zero_probabilities_are_identity(self):
        self.assertEqual(corrupt(self.sentence, NoiseConfig()), self.sentence)

    def test_deleting_everything_falls_back_to_unk(self):
        self.assertEqual(corrupt(self.sentence, NoiseConfig(p_delete=1.0)), (UNK_TOKEN,))

    def test_repeat_doubles_every_token(self):
        noisy = corrupt(("a", "b"), NoiseConfig(p_repeat=1.0))
        self.assertEqual(noisy, ("a", "a", "b", "b"))

    def test_confusion_table_drives_substitution(self):
        config = NoiseConfig(p_substitute=1.0, confusion_table={"a": ("ah",), "b": ("bh",)})
        self.assertEqual(corrupt(("a", "b"), config), ("ah", "bh"))

    def test_output_is_asr_normalized(self):
        config = NoiseConfig(p_substitute=1.0, confusion_table={"a": ("Ah!",)})
        self.assertEqual(corrupt(("a",), config), ("ah",))

    def test_empty_sentence_is_rejected(self):
        with self.assertRaises(ValidationError):
            corrupt((), NoiseConfig())

    def test_deterministic_and_length_bounded(self):
        config = NoiseConfig(p_delete=0.1, p_repeat=0.2, p_substitute=0.2, p_insert=0.3, seed=9)
        channel = NoiseChannel(config, VOCABULARY)
        for index, sentence in enumerate(corpus(50)):
            first = channel.corrupt(sentence, index)
            self.assertEqual(first, channel.corrupt(sentence, index))
            self.assertLessEqual(len(first), 3 * len(sentence))

    def test_sentence_result_does_not_depend_on_corpus_order(self):
        config = NoiseConfig(p_delete=0.1, p_substitute=0.2, p_insert=0.1, seed=3)
        channel = NoiseChannel(config, VOCABULARY)
        sentences = corpus(30)
        in_order = channel.corrupt_corpus(sentences)
        backwards = [channel.corrupt(sentences[i], i) for i in reversed(range(30))]
        self.assertEqual(in_order, backwards[::-1])

    def test_substitution_rate_matches_probability(self):
        config = NoiseConfig(p_substitute=0.15, confusion_table={}, seed=1)
        sentences = corpus()
        noisy = NoiseChannel(config, VOCABULARY).corrupt_corpus(sentences)
        self.assertAlmostEqual(corpus_wer(noisy, sentences), 0.15, delta=0.01)


class EditNeighborsTests(SimpleTestCase):
    def test_substitutions_insertions_and_deletions(self):
        table = edit_neighbors(["cat", "bat", "cart", "at", "dog"])
        self.assertEqual(table["cat"], ("at", "bat", "cart"))
        self.assertEqual(table["at"], ("bat", "cat"))
        self.assertNotIn("dog", table)


class GaussianEmbeddingNoiseTests(SimpleTestCase):
    def test_zero_sigma_is_identity(self):
        embeddings = torch.randn(3, 4)
        self.assertIs(gaussian_embedding_noise(embeddings, 0.0), embeddings)

    def test_empirical_std(self):
        generator = torch.Generator().manual_seed(0)
        embeddings = torch.ones(1000, 1000)
        noisy = gaussian_embedding_noise(embeddings, 0.01, generator=generator)
        self.assertAlmostEqual((noisy - embeddings).std().item(), 0.01, delta=0.0002)

    def test_variance_interpretation(self):
        self.assertAlmostEqual(noise_std(0.01, "variance"), 0.1)
        self.assertEqual(noise_std(0.01), 0.01)

    def test_negative_sigma_is_rejected(self):
        with self.assertRaises(ValidationError):
            noise_std(-0.1)


class NoiseConfigSerializerTests(SimpleTestCase):
    def test_builds_config_from_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            write_lines(Path(tmp) / "confusions.tsv", ["a\tah\taa"])
            write_lines(
                Path(tmp) / "noise.conf",
                ["P_SUBSTITUTE=0.1", f"CONFUSION_TABLE={tmp}/confusions.tsv", "SEED=5"],
            )
            config = build_from_config(
                NoiseConfigSerializer, ConfigFile(Path(tmp) / "noise.conf")
            )
        self.assertEqual(config.p_substitute, 0.1)
        self.assertEqual(config.confusion_table, {"a": ("ah", "aa")})
        self.assertEqual(config.seed, 5)

    def test_rejects_overfull_budget(self):
        serializer = NoiseConfigSerializer(data={"p_delete": 0.6, "p_substitute": 0.6})
        self.assertFalse(serializer.is_valid())

    def test_rejects_out_of_range_probability(self):
        serializer = NoiseConfigSerializer(data={"p_insert": 2})
        with self.assertRaises(SerializerValidationError):
            serializer.is_valid(raise_exception=True)


class NoiseCommandTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.dir = Path(self.tmp.name)

    def test_make_noise_reports_wer(self):
        write_lines(self.dir / "clean.txt", [" ".join(s) for s in corpus(100)])
        write_lines(self.dir / "noise.conf", ["P_SUBSTITUTE=0.2", "SEED=2"])
        stdout = StringIO()
        call_command(
            "make_noise",
            input=str(self.dir / "clean.txt"),
            output=str(self.dir / "noisy.txt"),
            pairs_output=str(self.dir / "pairs.tsv"),
            config=str(self.dir / "noise.conf"),
            stdout=stdout,
        )
        self.assertIn("empirical WER", stdout.getvalue())
        self.assertEqual(len(read_lines(self.dir / "noisy.txt")), 100)
        self.assertEqual(len(read_transcription_pairs(self.dir / "pairs.tsv")), 100)

    def test_seed_flag_overrides_config_seed(self):
        write_lines(self.dir / "clean.txt", [" ".join(s) for s in corpus(100)])
        write_lines(self.dir / "seed2.conf", ["P_SUBSTITUTE=0.5", "SEED=2"])
        write_lines(self.dir / "seed9.conf", ["P_SUBSTITUTE=0.5", "SEED=9"])

        def noisy(name, **options):
            call_command(
                "make_noise",
                input=str(self.dir / "clean.txt"),
                output=str(self.dir / name),
                stdout=StringIO(),
                **options,
            )
            return read_lines(self.dir / name)

        flagged = noisy("flagged.txt", config=str(self.dir / "seed2.conf"), seed=9)
        self.assertEqual(flagged, noisy("seed9.txt", config=str(self.dir / "seed9.conf")))
        self.assertNotEqual(flagged, noisy("seed2.txt", config=str(self.dir / "seed2.conf")))

    def test_make_toy_data_layout(self):
        call_command(
            "make_toy_data",
            output_dir=str(self.dir),
            pairs=200,
            documents=4,
            sentences_per_document=5,
            dev_size=20,
            seed=1,
            stdout=StringIO(),
        )
        for name in ("train.src", "train.tgt", "dev.src", "dev.noisy.src", "dev.tgt"):
            self.assertTrue((self.dir / name).is_file(), name)
        self.assertEqual(len(read_lines(self.dir / "train.tgt")), 200)
        self.assertEqual(len(read_documents(self.dir / "asr.auto")), 4)
        self.assertEqual(len(read_documents(self.dir / "asr.manual")), 4)
        self.assertIn("CONFUSION_TABLE", (self.dir / "noise.conf").read_text())
