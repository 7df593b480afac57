"""
Corpus-level BLEU on pre-tokenized sentences, computed with sacrebleu

Single reference, no tokenization inside the metric (sentences are already
tokenized with the training tokenizer), no smoothing unless asked for.
Scores are rounded to 10 decimals so exact matches give exactly 100.0.
N-gram orders the candidates cannot contain (e.g. 4-grams in a corpus of
3-token sentences) are left out of the geometric mean.
"""

from dataclasses import dataclass
from typing import Tuple

from sacrebleu.metrics import BLEU

from Common.validators import validate_nonempty, validate_same_length
from Text.sentences import format_sentence


@dataclass(frozen=True)
class BleuScore:
    score: float
    precisions: Tuple[float, ...]
    brevity_penalty: float
    hypothesis_length: int
    reference_length: int

    def __str__(self):
        precisions = "/".join(f"{p:.1f}" for p in self.precisions)
        return (
            f"BLEU = {self.score:.2f} {precisions} "
            f"(BP = {self.brevity_penalty:.3f}, hyp_len = {self.hypothesis_length}, "
            f"ref_len = {self.reference_length})"
        )


def bleu(candidates, references, max_n=4, smooth=False):
    """
    Corpus BLEU of tokenized candidates against one reference each

    Args:
        candidates (sequence): Sentences
        references (sequence): Sentences
        max_n (int): highest n-gram order
        smooth (bool): add-one smoothing of higher-order counts

    Returns:
        BleuScore
    """
    validate_nonempty(candidates, "candidates")
    validate_same_length(candidates, references, "candidates and references")

    metric = BLEU(
        tokenize="none",
        smooth_method="add-k" if smooth else "none",
        max_ngram_order=max_n,
        effective_order=True,
        force=True,
    )
    result = metric.corpus_score(
        [format_sentence(sentence) for sentence in candidates],
        [[format_sentence(sentence) for sentence in references]],
    )
    return BleuScore(
        score=round(result.score, 10),
        precisions=tuple(result.precisions),
        brevity_penalty=result.bp,
        hypothesis_length=result.sys_len,
        reference_length=result.ref_len,
    )
