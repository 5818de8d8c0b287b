"""
Translation-strategy labels, their strategy categories, and voice.

Chinese labels fold into eight strategies of which only syntactic and lexical
passives count as passive voice. English labels are their own categories; every
English label except EN_NA is passive.
"""

from enum import Enum
from typing import Dict, FrozenSet, Tuple

from src.corpus import Language


class StrategyLabel(str, Enum):
    # Chinese: marked (syntactic) passives
    BEI_L = "BEI_L"
    BEI_S = "BEI_S"
    GEI = "GEI"
    RANG = "RANG"
    WEI = "WEI"
    # Chinese: lexical passives
    SHOU = "SHOU"
    ZAO = "ZAO"
    AI = "AI"
    MENG = "MENG"
    # Chinese: patient-subject sentences
    NOTIONAL = "NOTIONAL"
    YOU = "YOU"
    SHI_DE = "SHI_DE"
    # Chinese: light verb + verbal noun
    LV_DEDAO = "LV_DEDAO"
    LV_HUO = "LV_HUO"
    LV_DEYI = "LV_DEYI"
    LV_JING = "LV_JING"
    LV_YU = "LV_YU"
    LV_JIYU = "LV_JIYU"
    LV_JIAYI = "LV_JIAYI"
    LV_JINXING = "LV_JINXING"
    LV_SHISHI = "LV_SHISHI"
    LV_FUZHU = "LV_FUZHU"
    # Chinese: causatives and resultatives
    CAUS_SHI = "CAUS_SHI"
    CAUS_LING = "CAUS_LING"
    RES_JIANG = "RES_JIANG"
    RES_BA = "RES_BA"
    ZH_NA = "ZH_NA"
    # English
    BE = "BE"
    GET = "GET"
    HAVE = "HAVE"
    BECOME = "BECOME"
    EN_NA = "EN_NA"

    @property
    def language(self) -> Language:
        return Language.EN if self in ENGLISH_LABELS else Language.ZH

    @classmethod
    def parse(cls, value: str) -> "StrategyLabel":
        value = value.strip()
        if value in ("N/A", "NA"):
            raise ValueError("ambiguous label 'N/A': use ZH_NA or EN_NA")
        return cls(value.upper())


class Strategy(str, Enum):
    SYNTACTIC_PASSIVE = "SYNTACTIC_PASSIVE"
    LEXICAL_PASSIVE = "LEXICAL_PASSIVE"
    NOTIONAL_PASSIVE = "NOTIONAL_PASSIVE"
    TOPIC_SENTENCE = "TOPIC_SENTENCE"
    LIGHT_VERB = "LIGHT_VERB"
    CAUSATIVE = "CAUSATIVE"
    RESULTATIVE = "RESULTATIVE"
    OTHER_ACTIVE = "OTHER_ACTIVE"
    BE = "BE"
    GET = "GET"
    HAVE = "HAVE"
    BECOME = "BECOME"
    ACTIVE = "ACTIVE"


class Voice(str, Enum):
    PASSIVE = "PASSIVE"
    ACTIVE = "ACTIVE"


ENGLISH_LABELS: FrozenSet[StrategyLabel] = frozenset({
    StrategyLabel.BE, StrategyLabel.GET, StrategyLabel.HAVE, StrategyLabel.BECOME, StrategyLabel.EN_NA,
})

_LABEL_STRATEGY: Dict[StrategyLabel, Strategy] = {
    StrategyLabel.BEI_L: Strategy.SYNTACTIC_PASSIVE,
    StrategyLabel.BEI_S: Strategy.SYNTACTIC_PASSIVE,
    StrategyLabel.GEI: Strategy.SYNTACTIC_PASSIVE,
    StrategyLabel.RANG: Strategy.SYNTACTIC_PASSIVE,
    StrategyLabel.WEI: Strategy.SYNTACTIC_PASSIVE,
    StrategyLabel.SHOU: Strategy.LEXICAL_PASSIVE,
    StrategyLabel.ZAO: Strategy.LEXICAL_PASSIVE,
    StrategyLabel.AI: Strategy.LEXICAL_PASSIVE,
    StrategyLabel.MENG: Strategy.LEXICAL_PASSIVE,
    StrategyLabel.NOTIONAL: Strategy.NOTIONAL_PASSIVE,
    StrategyLabel.YOU: Strategy.TOPIC_SENTENCE,
    StrategyLabel.SHI_DE: Strategy.TOPIC_SENTENCE,
    StrategyLabel.CAUS_SHI: Strategy.CAUSATIVE,
    StrategyLabel.CAUS_LING: Strategy.CAUSATIVE,
    StrategyLabel.RES_JIANG: Strategy.RESULTATIVE,
    StrategyLabel.RES_BA: Strategy.RESULTATIVE,
    StrategyLabel.ZH_NA: Strategy.OTHER_ACTIVE,
    StrategyLabel.BE: Strategy.BE,
    StrategyLabel.GET: Strategy.GET,
    StrategyLabel.HAVE: Strategy.HAVE,
    StrategyLabel.BECOME: Strategy.BECOME,
    StrategyLabel.EN_NA: Strategy.ACTIVE,
}
_LABEL_STRATEGY.update({label: Strategy.LIGHT_VERB for label in StrategyLabel if label.name.startswith("LV_")})

PASSIVE_STRATEGIES: FrozenSet[Strategy] = frozenset({
    Strategy.SYNTACTIC_PASSIVE, Strategy.LEXICAL_PASSIVE,
    Strategy.BE, Strategy.GET, Strategy.HAVE, Strategy.BECOME,
})

CHINESE_STRATEGIES: Tuple[Strategy, ...] = (
    Strategy.SYNTACTIC_PASSIVE, Strategy.LEXICAL_PASSIVE, Strategy.NOTIONAL_PASSIVE,
    Strategy.TOPIC_SENTENCE, Strategy.LIGHT_VERB, Strategy.CAUSATIVE, Strategy.RESULTATIVE,
    Strategy.OTHER_ACTIVE,
)
ENGLISH_STRATEGIES: Tuple[Strategy, ...] = (
    Strategy.BE, Strategy.GET, Strategy.HAVE, Strategy.BECOME, Strategy.ACTIVE,
)


def strategy_of(label: StrategyLabel) -> Strategy:
    return _LABEL_STRATEGY[StrategyLabel(label)]


def voice_of(strategy: Strategy) -> Voice:
    return Voice.PASSIVE if Strategy(strategy) in PASSIVE_STRATEGIES else Voice.ACTIVE


def labels_for(language: Language) -> Tuple[StrategyLabel, ...]:
    """All labels of one language, in declaration order."""
    return tuple(label for label in StrategyLabel if label.language is language)


def strategies_for(language: Language) -> Tuple[Strategy, ...]:
    return CHINESE_STRATEGIES if language is Language.ZH else ENGLISH_STRATEGIES


def default_label(language: Language) -> StrategyLabel:
    return StrategyLabel.ZH_NA if language is Language.ZH else StrategyLabel.EN_NA


# Row captions of the proportion tables
STRUCTURE_CAPTIONS: Dict[Strategy, str] = {
    Strategy.SYNTACTIC_PASSIVE: "Syntactic passive",
    Strategy.LEXICAL_PASSIVE: "Lexical passive",
    Strategy.NOTIONAL_PASSIVE: "Notional passive",
    Strategy.TOPIC_SENTENCE: "Topic sentence",
    Strategy.LIGHT_VERB: "Light verb",
    Strategy.CAUSATIVE: "Causative",
    Strategy.RESULTATIVE: "Resultative",
    Strategy.OTHER_ACTIVE: "N/A",
    Strategy.BE: "BE",
    Strategy.GET: "GET",
    Strategy.HAVE: "HAVE",
    Strategy.BECOME: "BECOME",
    Strategy.ACTIVE: "N/A",
}
