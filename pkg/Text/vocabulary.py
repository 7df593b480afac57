"""
Word vocabulary with fixed reserved ids (PAD=0, BOS=1, EOS=2, UNK=3)
Serialized as one token per line; the line index is the id.
"""

from collections import Counter
from pathlib import Path
from django.core.exceptions import ValidationError

from Common.validators import validate_nonempty

PAD, BOS, EOS, UNK = 0, 1, 2, 3
PAD_TOKEN, BOS_TOKEN, EOS_TOKEN, UNK_TOKEN = "<pad>", "<s>", "</s>", "<unk>"
RESERVED_TOKENS = (PAD_TOKEN, BOS_TOKEN, EOS_TOKEN, UNK_TOKEN)


class Vocabulary:
    """
    Immutable token <-> id map
    """

    def __init__(self, tokens):
        tokens = tuple(tokens)
        if tokens[: len(RESERVED_TOKENS)] != RESERVED_TOKENS:
            raise ValidationError(
                f"Vocabulary must start with the reserved tokens {RESERVED_TOKENS}"
            )
        if len(set(tokens)) != len(tokens):
            raise ValidationError("Vocabulary contains duplicate tokens")
        if any(not token or any(c.isspace() for c in token) for token in tokens):
            raise ValidationError("Vocabulary tokens must be nonempty and whitespace-free")

        self._tokens = tokens
        self._ids = {token: index for index, token in enumerate(tokens)}

    @property
    def tokens(self):
        return self._tokens

    @property
    def size(self):
        return len(self._tokens)

    def __len__(self):
        return len(self._tokens)

    def __contains__(self, token):
        return token in self._ids

    def __eq__(self, other):
        return isinstance(other, Vocabulary) and self._tokens == other._tokens

    def __hash__(self):
        return hash(self._tokens)

    def __repr__(self):
        return f"Vocabulary(size={self.size})"

    def id_of(self, token):
        return self._ids.get(token, UNK)

    def token_of(self, index):
        return self._tokens[index]

    def save(self, path):
        Path(path).write_text("\n".join(self._tokens) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path):
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        return cls(line for line in lines if line)


def build_vocab(corpus, min_freq=1, max_size=10000):
    """
    Build a vocabulary from tokenized sentences

    Keeps the max_size most frequent tokens seen at least min_freq times;
    equal frequencies are ordered lexicographically.

    Args:
        corpus (iterable): Sentences
        min_freq (int): Minimum token count
        max_size (int): Maximum number of non-reserved entries

    Returns:
        Vocabulary
    """
    corpus = list(corpus)
    validate_nonempty(corpus, "corpus")

    counts = Counter(token for sentence in corpus for token in sentence)
    for token in RESERVED_TOKENS:
        counts.pop(token, None)

    ranked = sorted(
        (token for token, count in counts.items() if count >= min_freq),
        key=lambda token: (-counts[token], token),
    )
    return Vocabulary(RESERVED_TOKENS + tuple(ranked[:max_size]))


def encode_ids(sentence, vocab, add_bos_eos=False):
    """Map tokens to ids; unknown tokens become UNK"""
    ids = [vocab.id_of(token) for token in sentence]
    if add_bos_eos:
        ids = [BOS] + ids + [EOS]
    return ids


def decode_ids(ids, vocab, strip_special=False):
    """
    Map ids back to tokens

    With strip_special, PAD and BOS are skipped and decoding stops at EOS.
    """
    tokens = []
    for index in ids:
        index = int(index)
        if strip_special:
            if index == EOS:
                break
            if index in (PAD, BOS):
                continue
        tokens.append(vocab.token_of(index))
    return tuple(tokens)
