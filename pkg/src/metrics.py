"""
Reference-based MT metrics: corpus BLEU and chrF++.

Both metrics accumulate per-segment n-gram statistics that add up across
segments, so a corpus score is the score of the summed statistics.
"""

import math
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

from nltk.util import ngrams

from src.config import DEFAULT_TOKENIZERS
from src.corpus import Direction, Language, SentencePair
from src.exceptions import CorpusFormatError, MetricInputError, PairSetMismatchError
from src.preprocessing import Segment, tokenize
from src.utils import PathLike, logger, read_tsv

BLEU_ORDER = 4
CHAR_ORDER = 6
WORD_ORDER = 2
BETA = 2


class Metric(str, Enum):
    BLEU = "BLEU"
    CHRF_PP = "CHRF_PP"


@dataclass(frozen=True)
class MetricScore:
    metric: Metric
    value: float
    details: Dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not 0.0 <= self.value <= 100.0:
            raise ValueError(f"{self.metric.value} score {self.value} outside [0, 100]")


@dataclass(frozen=True)
class NgramStats:
    """Clipped matches and hypothesis/reference n-gram totals for orders 1..len."""

    matches: Tuple[int, ...]
    hyp_totals: Tuple[int, ...]
    ref_totals: Tuple[int, ...]

    def __add__(self, other: "NgramStats") -> "NgramStats":
        return NgramStats(
            tuple(a + b for a, b in zip(self.matches, other.matches)),
            tuple(a + b for a, b in zip(self.hyp_totals, other.hyp_totals)),
            tuple(a + b for a, b in zip(self.ref_totals, other.ref_totals)),
        )

    @classmethod
    def zero(cls, order: int) -> "NgramStats":
        return cls((0,) * order, (0,) * order, (0,) * order)


def ngram_stats(hypothesis: Sequence[str], reference: Sequence[str], max_order: int) -> NgramStats:
    """
    Compare the n-grams of one hypothesis against one reference.

    Args:
        hypothesis: Hypothesis tokens (or characters)
        reference: Reference tokens (or characters)
        max_order: Highest n-gram order

    Returns:
        NgramStats with matches clipped by reference counts
    """
    matches, hyp_totals, ref_totals = [], [], []
    for n in range(1, max_order + 1):
        hyp_counts = Counter(ngrams(hypothesis, n))
        ref_counts = Counter(ngrams(reference, n))
        matches.append(sum((hyp_counts & ref_counts).values()))
        hyp_totals.append(sum(hyp_counts.values()))
        ref_totals.append(sum(ref_counts.values()))
    return NgramStats(tuple(matches), tuple(hyp_totals), tuple(ref_totals))


@dataclass(frozen=True)
class BleuStats:
    ngrams: NgramStats
    hyp_length: int
    ref_length: int

    def __add__(self, other: "BleuStats") -> "BleuStats":
        return BleuStats(self.ngrams + other.ngrams, self.hyp_length + other.hyp_length,
                         self.ref_length + other.ref_length)


@dataclass(frozen=True)
class ChrfStats:
    chars: NgramStats
    words: NgramStats

    def __add__(self, other: "ChrfStats") -> "ChrfStats":
        return ChrfStats(self.chars + other.chars, self.words + other.words)


def _check_corpora(hypotheses: Sequence[Segment], references: Sequence[Segment]) -> None:
    if len(hypotheses) != len(references):
        raise MetricInputError(f"{len(hypotheses)} hypotheses but {len(references)} references")
    if not references:
        raise MetricInputError("empty reference corpus")


def bleu_stats(hypothesis: Segment, reference: Segment, tokenizer: str, max_order: int = BLEU_ORDER) -> BleuStats:
    hyp_tokens = tokenize(hypothesis, tokenizer)
    ref_tokens = tokenize(reference, tokenizer)
    return BleuStats(ngram_stats(hyp_tokens, ref_tokens, max_order), len(hyp_tokens), len(ref_tokens))


def bleu_from_stats(stats: BleuStats) -> MetricScore:
    """
    Corpus BLEU from summed statistics, without smoothing.

    Orders for which the hypothesis corpus has no n-grams at all are left out of
    the geometric mean; any other order with zero matches makes the score 0.
    """
    counted = [(m, t) for m, t in zip(stats.ngrams.matches, stats.ngrams.hyp_totals) if t > 0]
    precisions = [m / t for m, t in counted]
    c, r = stats.hyp_length, stats.ref_length
    if c == 0:
        brevity_penalty = 0.0
    else:
        brevity_penalty = 1.0 if c > r else math.exp(1 - r / c)

    if not precisions or min(precisions) == 0.0 or brevity_penalty == 0.0:
        value = 0.0
    else:
        value = 100.0 * brevity_penalty * math.exp(sum(math.log(p) for p in precisions) / len(precisions))
    details = {
        "precisions": [m / t if t else 0.0 for m, t in zip(stats.ngrams.matches, stats.ngrams.hyp_totals)],
        "matches": list(stats.ngrams.matches),
        "totals": list(stats.ngrams.hyp_totals),
        "brevity_penalty": brevity_penalty,
        "hyp_length": c,
        "ref_length": r,
    }
    return MetricScore(Metric.BLEU, min(value, 100.0), details)


def bleu(hypotheses: Sequence[Segment], references: Sequence[Segment], tokenizer: str = "en_simple") -> MetricScore:
    """
    Corpus-level BLEU over n-gram orders 1..4.

    Args:
        hypotheses: System segments
        references: Reference segments, aligned with hypotheses
        tokenizer: 'en_simple', 'zh_char' or 'pretokenized'

    Returns:
        MetricScore with precisions and brevity penalty in details
    """
    _check_corpora(hypotheses, references)
    total = BleuStats(NgramStats.zero(BLEU_ORDER), 0, 0)
    for hypothesis, reference in zip(hypotheses, references):
        total = total + bleu_stats(hypothesis, reference, tokenizer)
    if total.ref_length == 0:
        raise MetricInputError("empty reference corpus")
    return bleu_from_stats(total)


def _characters(segment: Segment) -> List[str]:
    return [ch for ch in segment.text if not ch.isspace()]


def chrf_stats(hypothesis: Segment, reference: Segment, word_tokenizer: str = "pretokenized",
               char_order: int = CHAR_ORDER, word_order: int = WORD_ORDER) -> ChrfStats:
    return ChrfStats(
        ngram_stats(_characters(hypothesis), _characters(reference), char_order),
        ngram_stats(tokenize(hypothesis, word_tokenizer), tokenize(reference, word_tokenizer), word_order),
    )


def f_beta(matches: int, hyp_total: int, ref_total: int, beta: float = BETA) -> float:
    if matches == 0:
        return 0.0
    precision = matches / hyp_total
    recall = matches / ref_total
    return (1 + beta ** 2) * precision * recall / (beta ** 2 * precision + recall)


def chrf_from_stats(stats: ChrfStats, beta: float = BETA) -> MetricScore:
    """
    chrF++ from summed statistics.

    Each order contributes its F-beta; an order with no n-grams on either side
    is skipped, an order with n-grams on only one side contributes 0. The score
    is the mean over contributing character and word orders.
    """
    char_f, word_f = [], []
    for source, scores in ((stats.chars, char_f), (stats.words, word_f)):
        for m, h, r in zip(source.matches, source.hyp_totals, source.ref_totals):
            scores.append(None if h == 0 and r == 0 else f_beta(m, h, r, beta))
    counted = [f for f in char_f + word_f if f is not None]
    value = 100.0 * sum(counted) / len(counted) if counted else 0.0
    details = {"char_f": char_f, "word_f": word_f, "beta": beta}
    return MetricScore(Metric.CHRF_PP, min(value, 100.0), details)


def chrf_pp(hypotheses: Sequence[Segment], references: Sequence[Segment], char_order: int = CHAR_ORDER,
            word_order: int = WORD_ORDER, beta: float = BETA, word_tokenizer: str = "pretokenized") -> MetricScore:
    """
    Corpus-level chrF++: character n-grams 1..6 plus word n-grams 1..2.

    Args:
        hypotheses: System segments
        references: Reference segments, aligned with hypotheses
        char_order: Highest character n-gram order
        word_order: Highest word n-gram order
        beta: Recall weight
        word_tokenizer: Policy for word n-grams; 'pretokenized' falls back to whitespace tokens

    Returns:
        MetricScore with per-order F-scores in details
    """
    _check_corpora(hypotheses, references)
    total = ChrfStats(NgramStats.zero(char_order), NgramStats.zero(word_order))
    for hypothesis, reference in zip(hypotheses, references):
        total = total + chrf_stats(hypothesis, reference, word_tokenizer, char_order, word_order)
    if sum(total.chars.ref_totals) == 0:
        raise MetricInputError("empty reference corpus")
    return chrf_from_stats(total, beta)


def reference_segment(pair: SentencePair) -> Segment:
    """The human translation of a pair; Chinese references carry their token forms as word segmentation."""
    target = pair.target
    if target.language is Language.ZH:
        return Segment.from_words(target.forms(), text=target.surface())
    return Segment(target.surface())


def score_subset(pairs: Sequence[SentencePair], system_outputs: Mapping[str, Segment], direction: Direction,
                 tokenizers: Optional[Mapping[str, str]] = None) -> List[MetricScore]:
    """
    Score one system on one subset against the human translations.

    Args:
        pairs: Subset pairs, all in ``direction``
        system_outputs: pair_id -> system Segment
        direction: Translation direction of the subset
        tokenizers: Policies for ``bleu_zh``, ``chrf_zh`` and ``en``

    Returns:
        [BLEU, chrF++]
    """
    policies = dict(DEFAULT_TOKENIZERS)
    policies.update(tokenizers or {})
    missing = [pair.pair_id for pair in pairs if pair.pair_id not in system_outputs]
    if missing:
        raise PairSetMismatchError("system output does not cover the subset", missing=missing)
    for pair in pairs:
        if pair.direction is not direction:
            raise MetricInputError(f"pair {pair.pair_id} is {pair.direction.value}, subset is {direction.value}")

    hypotheses = [system_outputs[pair.pair_id] for pair in pairs]
    references = [reference_segment(pair) for pair in pairs]
    if direction.target_language is Language.ZH:
        bleu_policy, chrf_policy = policies["bleu_zh"], policies["chrf_zh"]
        unsegmented = sum(1 for h in hypotheses if h.pretokenized is None)
        if unsegmented and chrf_policy == "pretokenized":
            logger.warning(f"{unsegmented} Chinese outputs have no word segmentation; "
                           "chrF++ word n-grams use whitespace")
    else:
        bleu_policy = chrf_policy = policies["en"]
    return [
        bleu(hypotheses, references, tokenizer=bleu_policy),
        chrf_pp(hypotheses, references, word_tokenizer=chrf_policy),
    ]


SYSTEM_OUTPUT_HEADER = ("pair_id", "translation", "pretokenized")


def read_system_outputs(path: PathLike) -> Dict[str, Segment]:
    """
    Read a system-output TSV.

    Args:
        path: UTF-8 TSV with header ``pair_id, translation[, pretokenized]``

    Returns:
        pair_id -> Segment, in file order
    """
    outputs: Dict[str, Segment] = {}
    for row in read_tsv(path, SYSTEM_OUTPUT_HEADER, min_columns=2):
        if row["pair_id"] in outputs:
            raise CorpusFormatError(f"duplicate pair_id {row['pair_id']}", str(path), int(row["_line"]))
        words = row.get("pretokenized") or None
        try:
            outputs[row["pair_id"]] = Segment(row["translation"], tuple(words.split()) if words else None)
        except MetricInputError as e:
            raise MetricInputError(f"{path}:{row['_line']}: {e}") from None
    logger.info(f"Loaded {len(outputs)} system outputs from {path}")
    return outputs
