"""
Tokenizers

clean mode: lowercase, split on whitespace (written-text MT input)
asr mode:   additionally strip ASCII punctuation, the way recognizer output
            comes without punctuation or case
"""

import string
from typing import Protocol
from django.conf import settings
from django.core.exceptions import ValidationError
from django.utils.module_loading import import_string

from .sentences import Sentence

CLEAN = "clean"
ASR = "asr"
MODES = (CLEAN, ASR)

PUNCTUATION = string.punctuation


class EmptySentenceError(ValidationError):
    """Raised when an asr-mode line has no tokens left; callers drop the line"""

    def __init__(self, raw):
        super().__init__(f"Line is empty after punctuation stripping: {raw!r}")
        self.raw = raw


def tokenize(raw, mode=CLEAN) -> Sentence:
    """
    Tokenize one line of text

    Args:
        raw (str): A single line
        mode (str): "clean" or "asr"

    Returns:
        tuple: tokens

    Raises:
        EmptySentenceError: asr mode left nothing
    """
    if mode not in MODES:
        raise ValidationError(f"Unknown tokenization mode {mode!r}, use one of {MODES}")

    tokens = raw.lower().split()
    if mode == CLEAN:
        return tuple(tokens)

    stripped = (token.strip(PUNCTUATION) for token in tokens)
    sentence = tuple(token for token in stripped if token)
    if not sentence:
        raise EmptySentenceError(raw)
    return sentence


class Tokenizer(Protocol):
    """Anything that turns a line into a Sentence (e.g. a subword model)"""

    def tokenize(self, line: str) -> Sentence: ...


class WordTokenizer:
    """Word-level tokenizer, the default TEXT_TOKENIZER"""

    def __init__(self, mode=CLEAN):
        if mode not in MODES:
            raise ValidationError(f"Unknown tokenization mode {mode!r}")
        self.mode = mode

    def tokenize(self, line):
        return tokenize(line, self.mode)

    def __repr__(self):
        return f"WordTokenizer(mode={self.mode!r})"


def get_tokenizer(mode=CLEAN) -> Tokenizer:
    """Instantiate the tokenizer class named by the TEXT_TOKENIZER setting"""
    tokenizer_class = import_string(
        getattr(settings, "TEXT_TOKENIZER", "Text.tokenization.WordTokenizer")
    )
    return tokenizer_class(mode=mode)
