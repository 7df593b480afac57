"""
Desk-scale toy translation task: copy with token remap

Source words are two-syllable pseudo-words; every source word translates to
exactly one target word. Each source word also has an acoustic variant (the
word with a trailing 'h') that stands in for a homophone error: recognizer
output may contain it, clean text never does.
"""

from dataclasses import dataclass, field
import numpy as np

CONSONANTS = "bdgklmnprstv"
VOWELS = "aeiou"


@dataclass(frozen=True)
class ToyTask:
    source_tokens: tuple
    target_of: dict = field(hash=False)
    variant_of: dict = field(hash=False)

    def translate(self, sentence):
        return tuple(self.target_of[token] for token in sentence)

    def confusion_table(self):
        return {token: (variant,) for token, variant in self.variant_of.items()}


def make_toy_task(size=50, seed=0):
    """
    Build a toy task with `size` source words

    Returns:
        ToyTask
    """
    rng = np.random.default_rng(seed)
    syllables = [c + v for c in CONSONANTS for v in VOWELS]

    words = set()
    while len(words) < size:
        first, second = rng.integers(len(syllables), size=2)
        words.add(syllables[first] + syllables[second])
    source_tokens = tuple(sorted(words))

    permutation = rng.permutation(size)
    target_of = {
        token: "q" + source_tokens[permutation[index]][::-1]
        for index, token in enumerate(source_tokens)
    }
    variant_of = {token: token + "h" for token in source_tokens}
    return ToyTask(source_tokens, target_of, variant_of)


def sample_sentence(rng, task, min_len=3, max_len=10):
    length = int(rng.integers(min_len, max_len + 1))
    indices = rng.integers(len(task.source_tokens), size=length)
    return tuple(task.source_tokens[i] for i in indices)
