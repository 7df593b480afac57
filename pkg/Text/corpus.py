"""
Corpus loading, writing and the data-cleaning rules
Plain text, UTF-8, one sentence per line. Parallel corpora are two files with
equal line counts. Transcription pairs are auto<TAB>manual<TAB>wer records.
"""

import logging
from pathlib import Path
from django.conf import settings
from django.core.exceptions import ValidationError

from Common.validators import validate_same_length
from .sentences import ParallelPair, TranscriptionPair, format_sentence
from .tokenization import CLEAN, EmptySentenceError, get_tokenizer

logger = logging.getLogger(__name__)


def read_lines(path):
    with open(path, encoding="utf-8") as handle:
        return [line.rstrip("\n") for line in handle]


def write_lines(path, lines):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        for line in lines:
            handle.write(f"{line}\n")


def read_documents(path):
    """
    Read blank-line separated documents

    Returns:
        list: one list of (non-blank) lines per document
    """
    documents, current = [], []
    for line in read_lines(path):
        if line.strip():
            current.append(line)
        elif current:
            documents.append(current)
            current = []
    if current:
        documents.append(current)
    return documents


def tokenize_lines(lines, mode=CLEAN, tokenizer=None):
    """
    Tokenize lines, dropping the ones that come out empty

    Returns:
        tuple: (sentences, kept line indices)
    """
    tokenizer = tokenizer or get_tokenizer(mode)
    sentences, kept = [], []
    for index, line in enumerate(lines):
        try:
            sentence = tokenizer.tokenize(line)
        except EmptySentenceError:
            continue
        if sentence:
            sentences.append(sentence)
            kept.append(index)

    dropped = len(lines) - len(sentences)
    if dropped:
        logger.info(f"Dropped {dropped} empty sentences out of {len(lines)}")
    return sentences, kept


def clean_pair(pair, max_len=100, ratio_bound=2.0):
    """
    Length-based cleaning of a parallel pair

    Drops the pair if a side is empty, a side has more than max_len tokens, or
    len(source)/len(target) falls outside [1/ratio_bound, ratio_bound].

    Returns:
        bool: True to keep
    """
    source_len, target_len = len(pair.source), len(pair.target)
    if source_len == 0 or target_len == 0:
        return False
    if source_len > max_len or target_len > max_len:
        return False
    return source_len * ratio_bound >= target_len and target_len * ratio_bound >= source_len


def load_parallel(source_path, target_path, clean=True, max_len=None, ratio_bound=None):
    """
    Load a parallel corpus in clean tokenization

    Args:
        source_path, target_path: line-aligned files
        clean (bool): apply clean_pair
        max_len, ratio_bound: cleaning limits (default: CLEAN_* settings)

    Returns:
        list: ParallelPair
    """
    sources, targets = read_lines(source_path), read_lines(target_path)
    validate_same_length(sources, targets, f"{source_path} and {target_path}")

    max_len = max_len or getattr(settings, "CLEAN_MAX_LEN", 100)
    ratio_bound = ratio_bound or getattr(settings, "CLEAN_RATIO_BOUND", 2.0)
    tokenizer = get_tokenizer(CLEAN)

    pairs = [
        ParallelPair(tokenizer.tokenize(source), tokenizer.tokenize(target))
        for source, target in zip(sources, targets)
    ]
    if clean:
        kept = [pair for pair in pairs if clean_pair(pair, max_len, ratio_bound)]
        if len(kept) < len(pairs):
            logger.info(
                f"Cleaning dropped {len(pairs) - len(kept)} of {len(pairs)} pairs "
                f"(max_len={max_len}, ratio_bound={ratio_bound})"
            )
        pairs = kept

    if not pairs:
        raise ValidationError(f"No usable sentence pairs in {source_path}")
    return pairs


def read_transcription_pairs(path):
    pairs = []
    for number, line in enumerate(read_lines(path), start=1):
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise ValidationError(
                f"{path}:{number}: expected auto<TAB>manual<TAB>wer, got {len(fields)} fields"
            )
        auto, manual, wer = (tuple(fields[0].split()), tuple(fields[1].split()), fields[2])
        if not auto or not manual:
            side = "automatic" if not auto else "manual"
            raise ValidationError(f"{path}:{number}: empty {side} transcript")
        try:
            wer = float(wer)
        except ValueError:
            raise ValidationError(f"{path}:{number}: WER {wer!r} is not a number")
        pairs.append(TranscriptionPair(auto, manual, wer))
    return pairs


def write_transcription_pairs(path, pairs):
    write_lines(
        path,
        (
            f"{format_sentence(pair.auto)}\t{format_sentence(pair.manual)}\t{float(pair.wer)!r}"
            for pair in pairs
        ),
    )
