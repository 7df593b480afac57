import random
import tempfile
from collections import Counter
from pathlib import Path

import numpy as np
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase, override_settings

from .corpus import (
    clean_pair,
    load_parallel,
    read_documents,
    read_transcription_pairs,
    tokenize_lines,
    write_lines,
    write_transcription_pairs,
)
from .sentences import ParallelPair, TranscriptionPair
from .tokenization import ASR, CLEAN, EmptySentenceError, WordTokenizer, get_tokenizer, tokenize
from .toy import make_toy_task, sample_sentence
from .vocabulary import (
    BOS,
    EOS,
    PAD,
    RESERVED_TOKENS,
    UNK,
    Vocabulary,
    build_vocab,
    decode_ids,
    encode_ids,
)


def pair_of_lengths(source_len, target_len):
    return ParallelPair(("s",) * source_len, ("t",) * target_len)


class UpperTokenizer(WordTokenizer):
    def tokenize(self, line):
        return tuple(token.upper() for token in super().tokenize(line))


class TokenizeTests(SimpleTestCase):
    def test_asr_mode_strips_punctuation_and_case(self):
        self.assertEqual(tokenize("Hello, world!", ASR), ("hello", "world"))

    def test_clean_mode_splits_on_whitespace(self):
        self.assertEqual(tokenize("a b c", CLEAN), ("a", "b", "c"))
        self.assertEqual(tokenize("Hello, World!", CLEAN), ("hello,", "world!"))

    def test_punctuation_only_line_is_empty(self):
        with self.assertRaises(EmptySentenceError):
            tokenize("...", ASR)

    def test_unknown_mode_is_rejected(self):
        with self.assertRaises(ValidationError):
            tokenize("a", "phonetic")

    def test_idempotent_on_own_output(self):
        lines = ["Hello, world!", "It's 5 o'clock -- isn't it?", "  spaced   OUT  ", "a.b,c"]
        for mode in (CLEAN, ASR):
            for line in lines:
                once = tokenize(line, mode)
                self.assertEqual(tokenize(" ".join(once), mode), once, (mode, line))

    def test_tokenize_lines_drops_empty_lines(self):
        sentences, kept = tokenize_lines(["Hi there.", "?!", "", "ok"], ASR)
        self.assertEqual(sentences, [("hi", "there"), ("ok",)])
        self.assertEqual(kept, [0, 3])

    @override_settings(TEXT_TOKENIZER="Text.tests.UpperTokenizer")
    def test_tokenizer_is_pluggable(self):
        self.assertEqual(get_tokenizer(CLEAN).tokenize("a b"), ("A", "B"))


class CleanPairTests(SimpleTestCase):
    def test_examples(self):
        self.assertTrue(clean_pair(pair_of_lengths(50, 50)))
        self.assertFalse(clean_pair(pair_of_lengths(101, 60)))
        self.assertFalse(clean_pair(pair_of_lengths(10, 21)))
        self.assertFalse(clean_pair(pair_of_lengths(0, 1)))

    def test_exhaustive_lengths(self):
        for source_len in range(1, 121):
            for target_len in range(1, 121):
                expected = (
                    source_len <= 100
                    and target_len <= 100
                    and 0.5 <= source_len / target_len <= 2
                )
                self.assertEqual(
                    clean_pair(pair_of_lengths(source_len, target_len)),
                    expected,
                    (source_len, target_len),
                )


class VocabularyTests(SimpleTestCase):
    def test_min_freq(self):
        corpus = [("a", "a", "b")]
        self.assertEqual(build_vocab(corpus, min_freq=1).tokens, RESERVED_TOKENS + ("a", "b"))
        self.assertEqual(build_vocab(corpus, min_freq=2).tokens, RESERVED_TOKENS + ("a",))

    def test_reserved_ids(self):
        vocab = build_vocab([("x",)])
        self.assertEqual(
            [vocab.id_of(token) for token in RESERVED_TOKENS], [PAD, BOS, EOS, UNK]
        )

    def test_max_size_against_frequency_oracle(self):
        rng = random.Random(0)
        words = [f"w{i}" for i in range(100)]
        corpus = [tuple(rng.choices(words, k=rng.randint(1, 12))) for _ in range(1000)]
        vocab = build_vocab(corpus, max_size=50)
        self.assertEqual(len(vocab), 54)

        counts = Counter(token for sentence in corpus for token in sentence)
        oracle = sorted(counts, key=lambda token: (-counts[token], token))[:50]
        self.assertEqual(vocab.tokens[4:], tuple(oracle))

    def test_empty_corpus_is_rejected(self):
        with self.assertRaises(ValidationError):
            build_vocab([])

    def test_duplicate_tokens_are_rejected(self):
        with self.assertRaises(ValidationError):
            Vocabulary(RESERVED_TOKENS + ("a", "a"))

    def test_unknown_token_maps_to_unk(self):
        vocab = build_vocab([("a", "b")])
        self.assertEqual(encode_ids(("a", "zzz"), vocab), [vocab.id_of("a"), UNK])
        self.assertEqual(encode_ids(("a",), vocab, add_bos_eos=True), [BOS, vocab.id_of("a"), EOS])

    def test_round_trip_on_in_vocabulary_sentences(self):
        rng = random.Random(1)
        words = [f"v{i}" for i in range(30)]
        vocab = build_vocab([tuple(words)])
        for _ in range(500):
            sentence = tuple(rng.choices(words, k=rng.randint(1, 15)))
            self.assertEqual(tuple(decode_ids(encode_ids(sentence, vocab), vocab)), sentence)

    def test_strip_special_stops_at_eos(self):
        vocab = build_vocab([("a", "b")])
        ids = [BOS, vocab.id_of("a"), EOS, vocab.id_of("b"), PAD]
        self.assertEqual(tuple(decode_ids(ids, vocab, strip_special=True)), ("a",))

    def test_save_and_load(self):
        vocab = build_vocab([("a", "b", "b")])
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "vocab.txt"
            vocab.save(path)
            self.assertEqual(Vocabulary.load(path), vocab)


class CorpusTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.dir = Path(self.tmp.name)

    def test_load_parallel_cleans_pairs(self):
        write_lines(self.dir / "src", ["A b c", "one", " ".join(["x"] * 101), "d e"])
        write_lines(self.dir / "tgt", ["q r s", "one two three", "y", "F G"])
        pairs = load_parallel(self.dir / "src", self.dir / "tgt")
        self.assertEqual(
            pairs,
            [ParallelPair(("a", "b", "c"), ("q", "r", "s")), ParallelPair(("d", "e"), ("f", "g"))],
        )

    def test_load_parallel_needs_equal_line_counts(self):
        write_lines(self.dir / "src", ["a", "b"])
        write_lines(self.dir / "tgt", ["a"])
        with self.assertRaises(ValidationError):
            load_parallel(self.dir / "src", self.dir / "tgt")

    def test_transcription_pairs_file(self):
        pairs = [TranscriptionPair(("a", "b"), ("a", "c"), 0.5), TranscriptionPair(("x",), ("x",), 0.0)]
        write_transcription_pairs(self.dir / "pairs.tsv", pairs)
        self.assertEqual(read_transcription_pairs(self.dir / "pairs.tsv"), pairs)

    def test_malformed_transcription_record(self):
        write_lines(self.dir / "pairs.tsv", ["a b\tc"])
        with self.assertRaises(ValidationError):
            read_transcription_pairs(self.dir / "pairs.tsv")

    def test_empty_transcript_side_is_rejected_with_line(self):
        write_lines(self.dir / "pairs.tsv", ["a b\ta b\t0.0", "\ta b\t1.0"])
        with self.assertRaises(ValidationError) as raised:
            read_transcription_pairs(self.dir / "pairs.tsv")
        self.assertIn("pairs.tsv:2: empty automatic transcript", raised.exception.messages[0])

    def test_wer_keeps_full_precision(self):
        close = [
            TranscriptionPair(("a",), ("a", "b", "c"), 2 / 3),
            TranscriptionPair(("b",), ("a", "b", "c"), 2 / 3 + 1e-9),
        ]
        write_transcription_pairs(self.dir / "pairs.tsv", close)
        read_back = read_transcription_pairs(self.dir / "pairs.tsv")
        self.assertEqual([pair.wer for pair in read_back], [2 / 3, 2 / 3 + 1e-9])
        self.assertLess(read_back[0].wer, read_back[1].wer)

    def test_documents_are_blank_line_separated(self):
        write_lines(self.dir / "docs", ["a", "b", "", "", "c", ""])
        self.assertEqual(read_documents(self.dir / "docs"), [["a", "b"], ["c"]])


class ToyTaskTests(SimpleTestCase):
    def test_task_is_deterministic_and_bijective(self):
        task = make_toy_task(50, seed=3)
        self.assertEqual(task, make_toy_task(50, seed=3))
        self.assertEqual(len(task.source_tokens), 50)
        self.assertEqual(len(set(task.target_of.values())), 50)

    def test_variants_never_appear_in_clean_text(self):
        task = make_toy_task(50, seed=3)
        rng = np.random.default_rng(0)
        variants = set(task.variant_of.values())
        for _ in range(100):
            sentence = sample_sentence(rng, task)
            self.assertTrue(3 <= len(sentence) <= 10)
            self.assertFalse(variants & set(sentence))
            self.assertEqual(len(task.translate(sentence)), len(sentence))
