"""
Passive extraction: detect bei/be passives, clean sentence pairs, and split
them into the four directional subsets.
"""

import unicodedata
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.corpus import Direction, Language, ParsedSentence, Register, SentencePair
from src.exceptions import LanguageMismatchError
from src.utils import logger

BE_WINDOW = 4
MAX_ENGLISH_WORDS = 100
RATIO_RANGE = (0.5, 2.2)

BEI_FORM = "被"
BEI_WITH_AGENT_TAG = "LB"
BEI_WITHOUT_AGENT_TAG = "SB"
AUXPASS = "auxpass"
PAST_PARTICIPLE_TAG = "VBN"


class Construction(str, Enum):
    BEI = "BEI"
    BE = "BE"


@dataclass(frozen=True)
class PassiveMatch:
    construction: Construction
    anchor_index: int
    participle_index: Optional[int] = None
    with_agent: Optional[bool] = None

    def __post_init__(self):
        if self.construction is Construction.BE:
            if self.participle_index is None or self.participle_index <= self.anchor_index:
                raise ValueError("BE match needs a participle after its anchor")
        elif self.with_agent is None:
            raise ValueError("BEI match needs with_agent")


class SubsetName(str, Enum):
    ZH_BEI_EN = "ZH(bei)→EN"
    EN_ZH_BEI = "EN→ZH(bei)"
    ZH_EN_BE = "ZH→EN(be)"
    EN_BE_ZH = "EN(be)→ZH"

    @property
    def slug(self) -> str:
        return SUBSET_SLUGS[self]

    @property
    def direction(self) -> Direction:
        return Direction.ZH_EN if self in (SubsetName.ZH_BEI_EN, SubsetName.ZH_EN_BE) else Direction.EN_ZH

    @property
    def passive_side(self) -> str:
        """Side of the pair that carries the defining passive."""
        return "source" if self in (SubsetName.ZH_BEI_EN, SubsetName.EN_BE_ZH) else "target"

    @classmethod
    def parse(cls, value: str) -> "SubsetName":
        for subset in cls:
            if value in (subset.value, subset.slug, subset.name):
                return subset
        raise ValueError(f"unknown subset name: {value!r}")


SUBSET_SLUGS = {
    SubsetName.ZH_BEI_EN: "zh-bei_en",
    SubsetName.EN_ZH_BEI: "en_zh-bei",
    SubsetName.ZH_EN_BE: "zh_en-be",
    SubsetName.EN_BE_ZH: "en-be_zh",
}


@dataclass(frozen=True)
class Subset:
    name: SubsetName
    pairs: Tuple[str, ...]

    def __len__(self) -> int:
        return len(self.pairs)

    def __contains__(self, pair_id: str) -> bool:
        return pair_id in self.pairs


class CleaningReason(str, Enum):
    OK = "OK"
    TOO_LONG = "TOO_LONG"
    RATIO_OUT_OF_RANGE = "RATIO_OUT_OF_RANGE"


@dataclass(frozen=True)
class CleaningVerdict:
    keep: bool
    reason: CleaningReason

    def __post_init__(self):
        if self.keep != (self.reason is CleaningReason.OK):
            raise ValueError("keep must be true exactly when reason is OK")


def _require_language(sentence: ParsedSentence, language: Language) -> None:
    if sentence.language is not language:
        raise LanguageMismatchError(
            f"sentence {sentence.id} is {sentence.language.value}, expected {language.value}"
        )


def detect_be_passive(sentence: ParsedSentence) -> List[PassiveMatch]:
    """
    Find English be-passives: lemma 'be' labelled auxpass with a VBN within four tokens.

    Args:
        sentence: English ParsedSentence

    Returns:
        Matches sorted by anchor index (empty when none)
    """
    _require_language(sentence, Language.EN)
    matches = []
    for token in sentence.tokens:
        if token.lemma.lower() != "be" or token.dep_label != AUXPASS:
            continue
        window = sentence.tokens[token.index:token.index + BE_WINDOW]
        participles = [t.index for t in window if t.pos == PAST_PARTICIPLE_TAG]
        if not participles:
            continue
        # the auxiliary's own head wins when it is one of the candidates
        participle = token.dep_head if token.dep_head in participles else participles[0]
        matches.append(PassiveMatch(Construction.BE, token.index, participle_index=participle))
    return matches


def detect_bei_passive(sentence: ParsedSentence) -> List[PassiveMatch]:
    """Find Chinese bei-passives: the token 被 tagged LB (with agent) or SB (without)."""
    _require_language(sentence, Language.ZH)
    return [
        PassiveMatch(Construction.BEI, token.index, with_agent=token.pos == BEI_WITH_AGENT_TAG)
        for token in sentence.tokens
        if token.form == BEI_FORM and token.pos in (BEI_WITH_AGENT_TAG, BEI_WITHOUT_AGENT_TAG)
    ]


def is_punctuation(text: str) -> bool:
    """True when every character of a non-empty string is Unicode punctuation."""
    return bool(text) and all(unicodedata.category(ch).startswith("P") for ch in text)


def english_word_count(sentence: ParsedSentence) -> int:
    """Tokens whose form contains at least one letter or digit."""
    return sum(1 for token in sentence.tokens if any(ch.isalnum() for ch in token.form))


def chinese_character_count(sentence: ParsedSentence) -> int:
    """Characters of the token forms that are neither whitespace nor punctuation."""
    return sum(
        1
        for token in sentence.tokens
        for ch in token.form
        if not ch.isspace() and not unicodedata.category(ch).startswith("P")
    )


def clean_pair(pair: SentencePair) -> CleaningVerdict:
    """
    Apply the length cap and the length-ratio filter to a pair.

    Args:
        pair: SentencePair with non-empty sides

    Returns:
        CleaningVerdict; TOO_LONG is checked before the ratio
    """
    english_words = english_word_count(pair.en)
    if english_words > MAX_ENGLISH_WORDS:
        return CleaningVerdict(False, CleaningReason.TOO_LONG)
    if english_words == 0:
        return CleaningVerdict(False, CleaningReason.RATIO_OUT_OF_RANGE)
    ratio = chinese_character_count(pair.zh) / english_words
    low, high = RATIO_RANGE
    if not low <= ratio <= high:
        return CleaningVerdict(False, CleaningReason.RATIO_OUT_OF_RANGE)
    return CleaningVerdict(True, CleaningReason.OK)


def subset_predicates() -> Dict[SubsetName, Callable[[SentencePair], bool]]:
    """The defining membership predicate of each subset."""
    return {
        SubsetName.ZH_BEI_EN: lambda p: p.direction is Direction.ZH_EN and bool(detect_bei_passive(p.source)),
        SubsetName.EN_ZH_BEI: lambda p: p.direction is Direction.EN_ZH and bool(detect_bei_passive(p.target)),
        SubsetName.ZH_EN_BE: lambda p: p.direction is Direction.ZH_EN and bool(detect_be_passive(p.target)),
        SubsetName.EN_BE_ZH: lambda p: p.direction is Direction.EN_ZH and bool(detect_be_passive(p.source)),
    }


def partition_subsets(pairs: Iterable[SentencePair]) -> Dict[SubsetName, Subset]:
    """
    Split cleaned pairs into the four directional subsets.

    A pair may belong to two subsets (a ZH->EN pair with 被 in the source and a
    be-passive in the target is in both ZH(bei)->EN and ZH->EN(be)).

    Args:
        pairs: Cleaned SentencePairs

    Returns:
        Mapping from subset name to Subset, in SubsetName order
    """
    predicates = subset_predicates()
    members: Dict[SubsetName, List[str]] = {name: [] for name in SubsetName}
    for pair in pairs:
        for name, predicate in predicates.items():
            if predicate(pair):
                members[name].append(pair.pair_id)
    subsets = {name: Subset(name, tuple(ids)) for name, ids in members.items()}
    for name, subset in subsets.items():
        logger.info(f"Subset {name.value}: {len(subset)} pairs")
    return subsets


CENSUS_INDEX = ["subset", "register"]
SUM = "Sum"


def subset_census(subsets: Mapping[SubsetName, Subset], pairs: Iterable[SentencePair]) -> pd.DataFrame:
    """
    Count subset members by register and corpus.

    Args:
        subsets: Output of partition_subsets
        pairs: The pairs the subsets were built from

    Returns:
        DataFrame indexed by (subset, register) with one column per corpus
        (sorted) and a trailing ``Sum`` column; every subset/register row is present
    """
    by_id = {pair.pair_id: pair for pair in pairs}
    records = [
        (name.value, by_id[pair_id].register.value, by_id[pair_id].corpus)
        for name, subset in subsets.items()
        for pair_id in subset.pairs
    ]
    frame = pd.DataFrame.from_records(records, columns=["subset", "register", "corpus"])
    full_index = pd.MultiIndex.from_product(
        [[name.value for name in SubsetName], [register.value for register in Register]],
        names=CENSUS_INDEX,
    )
    if frame.empty:
        census = pd.DataFrame(index=full_index)
    else:
        census = pd.crosstab([frame["subset"], frame["register"]], frame["corpus"])
        census = census.reindex(full_index, fill_value=0)
        census = census[sorted(census.columns)]
    census.columns.name = None
    census[SUM] = census.sum(axis=1).astype(int) if len(census.columns) else 0
    return census.astype(int)


def census_table(census: pd.DataFrame, subset: SubsetName) -> pd.DataFrame:
    """Registers x corpora view of one subset with Sum row and column."""
    table = census.xs(subset.value, level="subset").copy()
    table.loc[SUM] = table.sum(axis=0)
    return table.astype(int)


@dataclass(frozen=True)
class CorpusSize:
    pairs: int
    english_words: int
    chinese_characters: int


def corpus_size(pairs: Iterable[SentencePair]) -> CorpusSize:
    """Pair count and total English words / Chinese characters under the cleaning conventions."""
    count = words = characters = 0
    for pair in pairs:
        count += 1
        words += english_word_count(pair.en)
        characters += chinese_character_count(pair.zh)
    return CorpusSize(count, words, characters)


def _largest_remainder(quota: int, weights: Sequence[int]) -> List[int]:
    total = sum(weights)
    if total == 0 or quota == 0:
        return [0] * len(weights)
    exact = np.array(weights, dtype=float) * quota / total
    allocation = np.floor(exact).astype(int)
    remainders = exact - allocation
    # stable order: larger remainder first, then position
    for position in sorted(range(len(weights)), key=lambda i: (-remainders[i], i))[:quota - allocation.sum()]:
        allocation[position] += 1
    return [int(a) for a in np.minimum(allocation, weights)]


def sample_test_set(pairs: Iterable[SentencePair], per_register: int = 50, seed: int = 0) -> List[SentencePair]:
    """
    Draw a stratified validation sample.

    Each register contributes ``per_register`` pairs (or all of its pairs when
    it has fewer), split across corpora in proportion to the register's corpus
    composition.

    Args:
        pairs: Candidate pairs, usually one subset
        per_register: Pairs requested per register
        seed: Seed of the numpy generator; the same seed gives the same sample

    Returns:
        Sampled pairs ordered by register, corpus, then input order
    """
    rng = np.random.default_rng(seed)
    groups: Dict[Register, Dict[str, List[SentencePair]]] = {}
    for pair in pairs:
        groups.setdefault(pair.register, {}).setdefault(pair.corpus, []).append(pair)

    sample: List[SentencePair] = []
    for register in Register:
        corpora = groups.get(register)
        if not corpora:
            logger.info(f"No pairs for register {register.value}; skipped in sample")
            continue
        names = sorted(corpora)
        sizes = [len(corpora[name]) for name in names]
        quotas = _largest_remainder(min(per_register, sum(sizes)), sizes)
        for name, quota in zip(names, quotas):
            candidates = corpora[name]
            chosen = sorted(rng.choice(len(candidates), size=quota, replace=False).tolist())
            sample.extend(candidates[i] for i in chosen)
    return sample
