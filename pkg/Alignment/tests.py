import random
import tempfile
from functools import lru_cache
from io import StringIO
from itertools import combinations_with_replacement
from pathlib import Path

from django.core.exceptions import ValidationError
from django.core.management import call_command
from django.test import SimpleTestCase

from Text.corpus import read_transcription_pairs, write_lines, write_transcription_pairs
from Text.sentences import TranscriptionPair
from .filtering import drop_count, filter_by_wer
from .levenshtein import (
    DELETE,
    INSERT,
    MATCH,
    SUBSTITUTE,
    corpus_wer,
    edit_distance,
    edit_distance_align,
    wer,
)
from .resegmentation import align_document, resegment, segment_cost


def recursive_distance(hyp, ref):
    @lru_cache(maxsize=None)
    def go(i, j):
        if i == len(hyp):
            return len(ref) - j
        if j == len(ref):
            return len(hyp) - i
        if hyp[i] == ref[j]:
            return go(i + 1, j + 1)
        return 1 + min(go(i + 1, j + 1), go(i + 1, j), go(i, j + 1))

    return go(0, 0)


def random_sentence(rng, max_len, alphabet="abcd", min_len=0):
    return tuple(rng.choice(alphabet) for _ in range(rng.randint(min_len, max_len)))


def enumerate_segmentations(stream, refs):
    """(cost, segments) of the cheapest placement, earliest boundaries first"""
    best = None
    for cuts in combinations_with_replacement(range(len(stream) + 1), len(refs) - 1):
        bounds = (0, *cuts, len(stream))
        segments = tuple(stream[bounds[k]:bounds[k + 1]] for k in range(len(refs)))
        cost = segment_cost(segments, refs)
        if best is None or cost < best[0]:
            best = (cost, segments)
    return best


class EditDistanceAlignTests(SimpleTestCase):
    def assertValidPath(self, path, hyp, ref):
        i = j = 0
        for op in path.ops:
            if op.kind in (MATCH, SUBSTITUTE):
                self.assertEqual((op.hyp_index, op.ref_index), (i, j))
                self.assertEqual(hyp[i] == ref[j], op.kind == MATCH)
                i, j = i + 1, j + 1
            elif op.kind == DELETE:
                self.assertEqual((op.hyp_index, op.ref_index), (None, j))
                j += 1
            else:
                self.assertEqual((op.hyp_index, op.ref_index), (i, None))
                i += 1
        self.assertEqual((i, j), (len(hyp), len(ref)))
        self.assertEqual(path.cost, sum(op.kind != MATCH for op in path.ops))

    def test_identity(self):
        path = edit_distance_align(("a", "b"), ("a", "b"))
        self.assertEqual(path.cost, 0)
        self.assertEqual([op.kind for op in path.ops], [MATCH, MATCH])

    def test_empty_hypothesis_is_a_delete(self):
        path = edit_distance_align((), ("a",))
        self.assertEqual(path.cost, 1)
        self.assertEqual([op.kind for op in path.ops], [DELETE])

    def test_empty_reference_is_an_insert(self):
        path = edit_distance_align(("a", "b"), ())
        self.assertEqual([op.kind for op in path.ops], [INSERT, INSERT])

    def test_tie_break_prefers_substitution(self):
        path = edit_distance_align(("x",), ("a",))
        self.assertEqual([op.kind for op in path.ops], [SUBSTITUTE])

    def test_matches_recursive_oracle(self):
        rng = random.Random(7)
        for _ in range(1000):
            hyp, ref = random_sentence(rng, 12), random_sentence(rng, 12)
            path = edit_distance_align(hyp, ref)
            self.assertEqual(path.cost, recursive_distance(hyp, ref))
            self.assertEqual(path.cost, edit_distance(hyp, ref))
            self.assertValidPath(path, hyp, ref)

    def test_cost_symmetric_with_delete_insert_exchanged(self):
        rng = random.Random(11)
        for _ in range(200):
            hyp, ref = random_sentence(rng, 8), random_sentence(rng, 8)
            forward = edit_distance_align(hyp, ref)
            backward = edit_distance_align(ref, hyp)
            self.assertEqual(forward.cost, backward.cost)
            counts, swapped = forward.counts(), backward.counts()
            self.assertEqual(
                counts[DELETE] - counts[INSERT], swapped[INSERT] - swapped[DELETE]
            )


class WerTests(SimpleTestCase):
    def test_identical_sentence(self):
        sentence = tuple("abcde")
        self.assertEqual(wer(sentence, sentence), 0.0)

    def test_one_substitution_in_five(self):
        self.assertAlmostEqual(wer(tuple("abxde"), tuple("abcde")), 0.2)

    def test_random_pairs_match_oracle(self):
        rng = random.Random(3)
        for _ in range(100):
            hyp, ref = random_sentence(rng, 10), random_sentence(rng, 10, min_len=1)
            self.assertAlmostEqual(wer(hyp, ref), recursive_distance(hyp, ref) / len(ref))

    def test_empty_reference_is_rejected(self):
        with self.assertRaises(ValidationError):
            wer(("a",), ())

    def test_corpus_wer_pools_edits(self):
        self.assertAlmostEqual(corpus_wer([("a",), ("x", "c")], [("a",), ("b", "c")]), 1 / 3)


class ResegmentTests(SimpleTestCase):
    def test_exact_match(self):
        result = resegment("a b c d".split(), [("a", "b"), ("c", "d")])
        self.assertEqual(result.segments, (("a", "b"), ("c", "d")))
        self.assertEqual(result.cost, 0)

    def test_substitution_stays_in_its_sentence(self):
        result = resegment("a x c d".split(), [("a", "b"), ("c", "d")])
        self.assertEqual(result.segments, (("a", "x"), ("c", "d")))
        self.assertEqual(result.cost, 1)

    def test_empty_stream_gives_empty_segments(self):
        result = resegment((), [("a",), ("b", "c")])
        self.assertEqual(result.segments, ((), ()))
        self.assertEqual(result.cost, 3)

    def test_missed_sentence_yields_empty_segment(self):
        result = resegment("a b e f".split(), [("a", "b"), ("c", "d"), ("e", "f")])
        self.assertEqual(result.segments, (("a", "b"), (), ("e", "f")))

    def test_refs_must_not_be_empty(self):
        with self.assertRaises(ValidationError):
            resegment(("a",), [])

    def test_matches_boundary_enumeration(self):
        rng = random.Random(5)
        for _ in range(200):
            stream = random_sentence(rng, 10)
            refs = [random_sentence(rng, 4, min_len=1) for _ in range(rng.randint(1, 3))]
            result = resegment(stream, refs)

            self.assertEqual(sum(result.segments, ()), stream)
            self.assertEqual(len(result.segments), len(refs))
            best_cost, earliest = enumerate_segmentations(stream, refs)
            self.assertEqual(result.cost, best_cost)
            self.assertEqual(segment_cost(result.segments, refs), best_cost)
            self.assertEqual(result.segments, earliest)


class AlignDocumentTests(SimpleTestCase):
    def test_pairs_carry_wer_against_asr_form(self):
        pairs, dropped = align_document(
            ["Hello world how are you"], ["Hello, world!", "How are we?"]
        )
        self.assertEqual(dropped, 0)
        self.assertEqual(
            pairs,
            [
                TranscriptionPair(("hello", "world"), ("hello", "world"), 0.0),
                TranscriptionPair(("how", "are", "you"), ("how", "are", "we"), 1 / 3),
            ],
        )

    def test_clean_manual_mode_keeps_punctuation(self):
        pairs, _ = align_document(["hello world"], ["Hello, world!"], manual_mode="clean")
        self.assertEqual(pairs[0].manual, ("hello,", "world!"))
        self.assertEqual(pairs[0].wer, 0.0)

    def test_empty_automatic_segments_are_dropped(self):
        pairs, dropped = align_document(["a b e f"], ["a b", "c d", "e f"])
        self.assertEqual(dropped, 1)
        self.assertEqual([pair.manual for pair in pairs], [("a", "b"), ("e", "f")])


def make_pairs(wers):
    return [TranscriptionPair((f"w{i}",), (f"w{i}",), value) for i, value in enumerate(wers)]


class FilterByWerTests(SimpleTestCase):
    def test_per_mille_rule(self):
        rng = random.Random(1)
        pairs = make_pairs([rng.random() for _ in range(1000)])
        survivors = filter_by_wer(pairs, 0.001)
        self.assertEqual(len(survivors), 999)
        (dropped,) = [pair for pair in pairs if pair not in survivors]
        self.assertEqual(dropped.wer, max(pair.wer for pair in pairs))

    def test_zero_fraction_is_identity(self):
        pairs = make_pairs([0.5, 0.1, 0.9])
        self.assertEqual(filter_by_wer(pairs, 0), pairs)

    def test_three_largest_dropped_in_order(self):
        wers = [0.1, 0.9, 0.3, 0.8, 0.2, 0.7, 0.4, 0.05, 0.6, 0.15]
        survivors = filter_by_wer(make_pairs(wers), 0.3)
        self.assertEqual([pair.wer for pair in survivors], [0.1, 0.3, 0.2, 0.4, 0.05, 0.6, 0.15])

    def test_ties_keep_earlier_pairs(self):
        survivors = filter_by_wer(make_pairs([0.5, 0.5, 0.5, 0.1]), 0.5)
        self.assertEqual([pair.auto for pair in survivors], [("w0",), ("w3",)])

    def test_drop_count_is_exact(self):
        self.assertEqual(drop_count(10, 0.3), 3)
        self.assertEqual(drop_count(1000, 0.001), 1)
        self.assertEqual(drop_count(1001, 0.001), 2)

    def test_fraction_must_be_below_one(self):
        with self.assertRaises(ValidationError):
            filter_by_wer(make_pairs([0.1]), 1.0)


class AlignCommandTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.dir = Path(self.tmp.name)
        write_lines(self.dir / "talks.auto", ["a b c d e", "", "f g h", "i j"])
        write_lines(
            self.dir / "talks.manual", ["A b.", "C d e!", "", "F g.", "H i j."]
        )

    def align(self, output, **options):
        call_command(
            "align",
            auto=str(self.dir / "talks.auto"),
            manual=str(self.dir / "talks.manual"),
            output=str(self.dir / output),
            stdout=StringIO(),
            **options,
        )
        return read_transcription_pairs(self.dir / output)

    def test_writes_one_record_per_sentence(self):
        pairs = self.align("pairs.tsv")
        self.assertEqual([pair.auto for pair in pairs], [
            ("a", "b"), ("c", "d", "e"), ("f", "g"), ("h", "i", "j"),
        ])
        self.assertTrue(all(pair.wer == 0.0 for pair in pairs))

    def test_worker_count_does_not_change_output(self):
        self.assertEqual(self.align("serial.tsv"), self.align("parallel.tsv", workers=2))

    def test_filter_applies_ceil_rule(self):
        pairs = make_pairs([0.1 * i for i in range(10)])
        write_transcription_pairs(self.dir / "pairs.tsv", pairs)
        call_command(
            "filter",
            input=str(self.dir / "pairs.tsv"),
            output=str(self.dir / "kept.tsv"),
            drop_fraction=0.15,
            stdout=StringIO(),
        )
        self.assertEqual(len(read_transcription_pairs(self.dir / "kept.tsv")), 8)
