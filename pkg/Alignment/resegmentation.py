"""
Re-segmentation of an unsegmented automatic transcript against the reference
sentence segmentation

The stream is aligned against the concatenated references with one global
edit-distance DP; each reference boundary then maps to a hypothesis position.
Among all optimal segmentations the one with the earliest boundaries is
returned.
"""

from dataclasses import dataclass
from typing import Tuple

from Common.validators import validate_nonempty
from Text.sentences import Sentence, TranscriptionPair
from Text.tokenization import ASR, EmptySentenceError, tokenize
from .levenshtein import edit_distance, wer

@dataclass(frozen=True)
class SegmentedTranscript:
    """One (possibly empty) segment per reference; segments concatenate to the stream"""

    segments: Tuple[Sentence, ...]
    cost: int


def _suffix_costs(hyp, concatenated, columns):
    """
    Backward DP over hyp x concatenated references

    Returns:
        dict: column -> list, list[i] = min cost of aligning hyp[i:] with
        concatenated[column:]
    """
    n, m = len(hyp), len(concatenated)
    wanted = set(columns)
    stored = {}

    following = [n - i for i in range(n + 1)]  # column m: only insertions left
    if m in wanted:
        stored[m] = following

    for j in range(m - 1, -1, -1):
        token = concatenated[j]
        column = [0] * (n + 1)
        column[n] = m - j
        for i in range(n - 1, -1, -1):
            column[i] = min(
                following[i + 1] + (hyp[i] != token),
                following[i] + 1,
                column[i + 1] + 1,
            )
        if j in wanted:
            stored[j] = column
        following = column

    return stored


def _prefix_costs(segment_hyp, ref):
    """list[t] = edit distance between segment_hyp[:t] and ref"""
    previous = list(range(len(segment_hyp) + 1))
    for ref_token in ref:
        row = [previous[0] + 1]
        for t, hyp_token in enumerate(segment_hyp):
            row.append(
                min(previous[t] + (hyp_token != ref_token), previous[t + 1] + 1, row[t] + 1)
            )
        previous = row
    return previous


def resegment(auto_stream, refs):
    """
    Split auto_stream into len(refs) contiguous segments minimizing the summed
    segment-vs-reference edit distance

    Args:
        auto_stream (sequence): recognizer tokens of one document
        refs (sequence): reference sentences of the same document

    Returns:
        SegmentedTranscript
    """
    validate_nonempty(refs, "refs")
    hyp = tuple(auto_stream)
    refs = [tuple(ref) for ref in refs]

    concatenated = [token for ref in refs for token in ref]
    columns = [0]
    for ref in refs:
        columns.append(columns[-1] + len(ref))

    suffix = _suffix_costs(hyp, concatenated, columns)
    total = suffix[0][0]

    segments = []
    start, remaining = 0, total
    for k, ref in enumerate(refs):
        if k == len(refs) - 1:
            segments.append(hyp[start:])
            break

        after = suffix[columns[k + 1]]
        prefix = _prefix_costs(hyp[start:], ref)
        end = next(
            start + t
            for t, cost in enumerate(prefix)
            if cost + after[start + t] == remaining
        )
        segments.append(hyp[start:end])
        start, remaining = end, after[end]

    return SegmentedTranscript(tuple(segments), total)


def align_document(auto_lines, manual_lines, manual_mode=ASR):
    """
    Turn one document into transcription pairs

    The automatic side is tokenized in asr mode and treated as one stream.
    Alignment and WER use the asr-mode form of each manual sentence; the
    stored manual side uses manual_mode. Pairs whose automatic segment is
    empty are dropped.

    Returns:
        tuple: (list of TranscriptionPair, number of dropped pairs)
    """
    stream = []
    for line in auto_lines:
        try:
            stream.extend(tokenize(line, ASR))
        except EmptySentenceError:
            continue

    references, stored = [], []
    for line in manual_lines:
        try:
            references.append(tokenize(line, ASR))
        except EmptySentenceError:
            continue
        stored.append(tokenize(line, manual_mode))

    if not references:
        return [], 0

    segmented = resegment(stream, references)
    pairs, dropped = [], 0
    for segment, reference, manual in zip(segmented.segments, references, stored):
        if not segment:
            dropped += 1
            continue
        pairs.append(TranscriptionPair(segment, manual, wer(segment, reference)))
    return pairs, dropped


def segment_cost(segments, refs):
    """Summed edit distance of given segments against their references"""
    return sum(edit_distance(segment, ref) for segment, ref in zip(segments, refs))
