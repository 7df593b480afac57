"""
Word-level Levenshtein alignment with backtracking, and WER

Unit costs. Convention: "delete" is a reference token missing from the
hypothesis (consumes ref only), "insert" is a hypothesis token absent from the
reference (consumes hyp only). Backtracking prefers
match > substitute > delete > insert, so paths are deterministic.
"""

from collections import Counter
from dataclasses import dataclass
from typing import Optional, Tuple
from django.core.exceptions import ValidationError

MATCH = "match"
SUBSTITUTE = "substitute"
DELETE = "delete"
INSERT = "insert"


@dataclass(frozen=True)
class EditOp:
    kind: str
    hyp_index: Optional[int] = None
    ref_index: Optional[int] = None


@dataclass(frozen=True)
class AlignmentPath:
    ops: Tuple[EditOp, ...]
    cost: int

    def counts(self):
        return Counter(op.kind for op in self.ops)


def distance_table(hyp, ref):
    """table[i][j] = edit distance between hyp[:i] and ref[:j]"""
    width = len(ref) + 1
    table = [list(range(width))]
    for i, hyp_token in enumerate(hyp, start=1):
        previous = table[-1]
        row = [i] + [0] * (width - 1)
        for j, ref_token in enumerate(ref, start=1):
            diagonal = previous[j - 1] + (hyp_token != ref_token)
            row[j] = min(diagonal, row[j - 1] + 1, previous[j] + 1)
        table.append(row)
    return table


def edit_distance(hyp, ref):
    """Unit-cost edit distance (two-row version, no path)"""
    previous = list(range(len(ref) + 1))
    for i, hyp_token in enumerate(hyp, start=1):
        row = [i]
        for j, ref_token in enumerate(ref, start=1):
            row.append(
                min(previous[j - 1] + (hyp_token != ref_token), row[j - 1] + 1, previous[j] + 1)
            )
        previous = row
    return previous[-1]


def edit_distance_align(hyp, ref):
    """
    Minimal unit-cost alignment of hyp against ref

    Args:
        hyp (sequence): hypothesis tokens (may be empty)
        ref (sequence): reference tokens (may be empty)

    Returns:
        AlignmentPath: monotone ops covering both sides, cost = non-match ops
    """
    table = distance_table(hyp, ref)
    i, j = len(hyp), len(ref)
    ops = []

    while i > 0 or j > 0:
        current = table[i][j]
        if i > 0 and j > 0 and hyp[i - 1] == ref[j - 1] and table[i - 1][j - 1] == current:
            ops.append(EditOp(MATCH, i - 1, j - 1))
            i, j = i - 1, j - 1
        elif i > 0 and j > 0 and hyp[i - 1] != ref[j - 1] and table[i - 1][j - 1] + 1 == current:
            ops.append(EditOp(SUBSTITUTE, i - 1, j - 1))
            i, j = i - 1, j - 1
        elif j > 0 and table[i][j - 1] + 1 == current:
            ops.append(EditOp(DELETE, None, j - 1))
            j -= 1
        else:
            ops.append(EditOp(INSERT, i - 1, None))
            i -= 1

    ops.reverse()
    return AlignmentPath(tuple(ops), table[len(hyp)][len(ref)])


def wer(hyp, ref):
    """Word error rate: edit distance / reference length"""
    if len(ref) == 0:
        raise ValidationError("WER is undefined for an empty reference")
    return edit_distance(hyp, ref) / len(ref)


def corpus_wer(hyps, refs):
    """Corpus-level WER: total edits / total reference tokens"""
    edits = sum(edit_distance(hyp, ref) for hyp, ref in zip(hyps, refs))
    words = sum(len(ref) for ref in refs)
    if words == 0:
        raise ValidationError("WER is undefined for an empty reference corpus")
    return edits / words
