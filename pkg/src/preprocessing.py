"""
Text preprocessing for metric scoring: segments and the three tokenizer policies.

``zh_char`` splits Chinese into characters, ``en_simple`` splits on whitespace
and detaches punctuation (case preserved), and ``pretokenized`` uses the
segment's own word list.
"""

import unicodedata
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple

from nltk.tokenize import WordPunctTokenizer

from src.exceptions import MetricInputError


@dataclass(frozen=True)
class Segment:
    """A translation or reference segment, optionally with its word segmentation."""

    text: str
    pretokenized: Optional[Tuple[str, ...]] = None

    def __post_init__(self):
        if self.pretokenized is not None:
            object.__setattr__(self, "pretokenized", tuple(self.pretokenized))
            if _squash(" ".join(self.pretokenized)) != _squash(self.text):
                raise MetricInputError(
                    f"pretokenized words do not reproduce the text: {' '.join(self.pretokenized)!r} vs {self.text!r}"
                )

    @classmethod
    def from_words(cls, words, text: Optional[str] = None) -> "Segment":
        words = tuple(words)
        return cls(text if text is not None else " ".join(words), words)


def _squash(text: str) -> str:
    """Normalization under which pretokenized words must reproduce the text: NFC, whitespace removed."""
    return "".join(unicodedata.normalize("NFC", text).split())


_word_punct = WordPunctTokenizer()


def tokenize_zh_char(text: str) -> List[str]:
    """
    Split text into characters.

    Args:
        text: Input text

    Returns:
        One token per non-whitespace character
    """
    return [ch for ch in text if not ch.isspace()]


def tokenize_en_simple(text: str) -> List[str]:
    """Split on whitespace and detach runs of punctuation; case is preserved."""
    return _word_punct.tokenize(text)


def tokenize_pretokenized(text: str, words: Optional[Tuple[str, ...]] = None) -> List[str]:
    """The given word segmentation, or whitespace tokens when there is none."""
    return list(words) if words is not None else text.split()


TOKENIZERS: Dict[str, Callable[[str], List[str]]] = {
    "zh_char": tokenize_zh_char,
    "en_simple": tokenize_en_simple,
    "pretokenized": tokenize_pretokenized,
}


def tokenize(segment: Segment, policy: str) -> List[str]:
    """
    Tokenize a segment under a named policy.

    Args:
        segment: Segment to tokenize
        policy: 'zh_char', 'en_simple' or 'pretokenized'

    Returns:
        List of tokens
    """
    if policy == "pretokenized":
        return tokenize_pretokenized(segment.text, segment.pretokenized)
    try:
        tokenizer = TOKENIZERS[policy]
    except KeyError:
        raise MetricInputError(f"unknown tokenizer policy {policy!r}") from None
    return tokenizer(segment.text)
