"""
Evaluation module for aggregating annotations: structure proportions,
voice/structure consistency against human translations, and label diversity.
"""

from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.annotation import Annotation
from src.corpus import Language, Register
from src.exceptions import EmptyColumnError, LanguageMismatchError, PairSetMismatchError
from src.taxonomy import (
    STRUCTURE_CAPTIONS,
    Strategy,
    StrategyLabel,
    Voice,
    labels_for,
    strategies_for,
    voice_of,
)
from src.utils import logger

OVERALL = "overall"
VOICE_CAPTIONS = {Voice.PASSIVE: "Passive", Voice.ACTIVE: "Active"}
STRUCTURE_GRANULARITIES = ("label", "strategy")


def _language_of(annotations: Iterable[Annotation]) -> Optional[Language]:
    languages = {a.label.language for a in annotations}
    if len(languages) > 1:
        raise LanguageMismatchError("annotation set mixes Chinese and English labels")
    return languages.pop() if languages else None


def _by_pair(annotations: Sequence[Annotation], what: str) -> Dict[str, Annotation]:
    indexed: Dict[str, Annotation] = {}
    duplicates = []
    for annotation in annotations:
        if annotation.pair_id in indexed:
            duplicates.append(annotation.pair_id)
        indexed[annotation.pair_id] = annotation
    if duplicates:
        raise PairSetMismatchError(f"{what} has more than one annotation per pair", extra=duplicates)
    return indexed


def _check_same_pairs(first: Mapping[str, Annotation], second: Mapping[str, Annotation], what: str) -> None:
    if first.keys() != second.keys():
        raise PairSetMismatchError(what, missing=first.keys() - second.keys(), extra=second.keys() - first.keys())


def _strategy_counts(annotations: Sequence[Annotation], strategies: Sequence[Strategy]) -> List[int]:
    counter = Counter(a.strategy for a in annotations)
    return [counter[strategy] for strategy in strategies]


@dataclass(frozen=True)
class ProportionTable:
    """
    Percentage of each structure per annotation column.

    ``frame`` is indexed by (Voice, Structure) captions in taxonomy order with
    one column per source; ``counts`` holds the raw sentence counts.
    """

    language: Language
    frame: pd.DataFrame
    counts: pd.DataFrame

    @property
    def columns(self) -> List[str]:
        return list(self.frame.columns)

    def column_totals(self) -> pd.Series:
        return self.frame.sum(axis=0)

    def rounded(self, decimals: int = 1) -> pd.DataFrame:
        return self.frame.round(decimals)

    def percentage(self, column: str, strategy: Strategy) -> float:
        return float(self.frame.loc[(VOICE_CAPTIONS[voice_of(strategy)], STRUCTURE_CAPTIONS[strategy]), column])


def proportions(columns: Mapping[str, Sequence[Annotation]], language: Optional[Language] = None) -> ProportionTable:
    """
    Calculate the proportion of structures in each annotation column.

    Args:
        columns: Column name (e.g. 'human', a system name) -> annotations of one language
        language: Table language; inferred from the annotations when omitted

    Returns:
        ProportionTable with the eight Chinese strategies or the five English structures as rows
    """
    if not columns:
        raise EmptyColumnError("no annotation columns given")
    for name, annotations in columns.items():
        if not annotations:
            raise EmptyColumnError(f"annotation column {name!r} is empty")
        _by_pair(annotations, f"column {name!r}")
        column_language = _language_of(annotations)
        if language is None:
            language = column_language
        elif column_language is not language:
            raise LanguageMismatchError(f"column {name!r} is {column_language.value}, table is {language.value}")

    strategies = strategies_for(language)
    index = pd.MultiIndex.from_tuples(
        [(VOICE_CAPTIONS[voice_of(s)], STRUCTURE_CAPTIONS[s]) for s in strategies],
        names=["Voice", "Structure"],
    )
    counts = pd.DataFrame(
        {name: _strategy_counts(annotations, strategies) for name, annotations in columns.items()},
        index=index,
    )
    frame = counts / counts.sum(axis=0) * 100.0
    return ProportionTable(language, frame, counts)


@dataclass(frozen=True)
class ConsistencyRow:
    n: int
    voice_matches: int
    structure_matches: int

    @property
    def voice_consistency(self) -> float:
        return self.voice_matches / self.n

    @property
    def structure_consistency(self) -> float:
        return self.structure_matches / self.n

    def __add__(self, other: "ConsistencyRow") -> "ConsistencyRow":
        return ConsistencyRow(self.n + other.n, self.voice_matches + other.voice_matches,
                              self.structure_matches + other.structure_matches)


@dataclass(frozen=True)
class ConsistencySummary:
    """Consistency per register (only registers with pairs) plus an ``overall`` row."""

    granularity: str
    rows: Dict[str, ConsistencyRow] = field(default_factory=dict)

    @property
    def overall(self) -> ConsistencyRow:
        return self.rows[OVERALL]

    def registers(self) -> List[str]:
        return [name for name in self.rows if name != OVERALL]

    def to_frame(self) -> pd.DataFrame:
        records = [
            {
                "register": name,
                "n": row.n,
                "voice_consistency": row.voice_consistency,
                "structure_consistency": row.structure_consistency,
            }
            for name, row in self.rows.items()
        ]
        return pd.DataFrame.from_records(records).set_index("register")


def _structure_key(annotation: Annotation, granularity: str):
    return annotation.label if granularity == "label" else annotation.strategy


def consistency(human: Sequence[Annotation], system: Sequence[Annotation], registers: Mapping[str, Register],
                by: Optional[str] = None) -> ConsistencySummary:
    """
    Compare the voice and structure of system translations with the human ones.

    Args:
        human: Human-translation annotations
        system: System-translation annotations over the same pairs
        registers: pair_id -> Register
        by: Structure granularity, 'label' or 'strategy'; defaults to labels
            for English and strategies for Chinese

    Returns:
        ConsistencySummary stratified by register
    """
    human_by_pair = _by_pair(human, "human annotations")
    system_by_pair = _by_pair(system, "system annotations")
    _check_same_pairs(human_by_pair, system_by_pair, "human and system annotations cover different pairs")
    if not human_by_pair:
        raise EmptyColumnError("no annotations to compare")
    language = _language_of(human)
    if _language_of(system) is not language:
        raise LanguageMismatchError("human and system annotations are in different languages")
    if by is None:
        by = "label" if language is Language.EN else "strategy"
    if by not in STRUCTURE_GRANULARITIES:
        raise ValueError(f"by must be one of {STRUCTURE_GRANULARITIES}, got {by!r}")

    unmapped = sorted(set(human_by_pair) - set(registers))
    if unmapped:
        raise PairSetMismatchError("pairs without a register", missing=unmapped)

    pair_ids = list(human_by_pair)
    voice_match = np.array([human_by_pair[p].voice is system_by_pair[p].voice for p in pair_ids], dtype=bool)
    structure_match = np.array(
        [_structure_key(human_by_pair[p], by) == _structure_key(system_by_pair[p], by) for p in pair_ids],
        dtype=bool,
    )
    pair_registers = np.array([registers[p].value for p in pair_ids], dtype=object)

    rows: Dict[str, ConsistencyRow] = {}
    for register in Register:
        mask = pair_registers == register.value
        if mask.any():
            rows[register.value] = ConsistencyRow(int(mask.sum()), int(voice_match[mask].sum()),
                                                  int(structure_match[mask].sum()))
    rows[OVERALL] = ConsistencyRow(len(pair_ids), int(voice_match.sum()), int(structure_match.sum()))
    return ConsistencySummary(by, rows)


@dataclass(frozen=True)
class DiversitySummary:
    distinct_labels: int
    label_universe: int
    distinct_strategies: int
    strategy_universe: int
    labels: Tuple[StrategyLabel, ...] = ()
    strategies: Tuple[Strategy, ...] = ()

    def __post_init__(self):
        if self.distinct_labels > self.label_universe or self.distinct_strategies > self.strategy_universe:
            raise ValueError("distinct count exceeds its universe")

    @property
    def label_fraction(self) -> str:
        return f"{self.distinct_labels} / {self.label_universe}"

    @property
    def strategy_fraction(self) -> str:
        return f"{self.distinct_strategies} / {self.strategy_universe}"


def diversity(annotations: Sequence[Annotation], label_universe: Optional[Iterable[StrategyLabel]] = None,
              strategy_universe: Optional[Iterable[Strategy]] = None,
              language: Optional[Language] = None) -> DiversitySummary:
    """
    Count the distinct labels and strategies used by one annotation set.

    Args:
        annotations: Annotations of one column
        label_universe: Labels that count (defaults to every label of the language)
        strategy_universe: Strategies that count (defaults to the language's strategies)
        language: Language of the default universes; inferred when omitted

    Returns:
        DiversitySummary; values outside the universes are ignored with a warning
    """
    language = language or _language_of(annotations)
    if label_universe is None:
        label_universe = labels_for(language) if language else ()
    if strategy_universe is None:
        strategy_universe = strategies_for(language) if language else ()
    label_universe = tuple(label_universe)
    strategy_universe = tuple(strategy_universe)

    used_labels = {a.label for a in annotations}
    used_strategies = {a.strategy for a in annotations}
    outside = sorted(label.value for label in used_labels - set(label_universe))
    if outside:
        logger.warning(f"labels outside the diversity universe ignored: {', '.join(outside)}")

    labels = tuple(label for label in label_universe if label in used_labels)
    strategies = tuple(strategy for strategy in strategy_universe if strategy in used_strategies)
    return DiversitySummary(len(labels), len(label_universe), len(strategies), len(strategy_universe),
                            labels, strategies)


def voice_crosstab(source_annotations: Sequence[Annotation], target_annotations: Sequence[Annotation]) -> pd.DataFrame:
    """
    Percentage of pairs by source voice (rows) and target voice (columns).

    Args:
        source_annotations: Annotations of the source sentences
        target_annotations: Annotations of the target sentences of the same pairs

    Returns:
        2x2 DataFrame of percentages summing to 100
    """
    source = _by_pair(source_annotations, "source annotations")
    target = _by_pair(target_annotations, "target annotations")
    _check_same_pairs(source, target, "source and target annotations cover different pairs")
    if not source:
        raise EmptyColumnError("no annotations to cross-tabulate")
    voices = [VOICE_CAPTIONS[Voice.PASSIVE], VOICE_CAPTIONS[Voice.ACTIVE]]
    frame = pd.DataFrame({
        "source": [VOICE_CAPTIONS[source[p].voice] for p in source],
        "target": [VOICE_CAPTIONS[target[p].voice] for p in source],
    })
    table = pd.crosstab(frame["source"], frame["target"]).reindex(index=voices, columns=voices, fill_value=0)
    table.index.name = "Source voice"
    table.columns.name = "Target voice"
    return table / len(source) * 100.0
