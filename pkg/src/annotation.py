"""
Rule-based translation-strategy annotation.

Each ``find_*`` function evaluates one rule family over a parsed sentence and
returns every firing site as a RuleHit; ``match_*`` reduces that to the label
of the earliest marker. ``StrategyAnnotator`` applies the rule families in the
configured precedence and turns the first firing family into an Annotation.

Token forms are matched as whole tokens only, so 命令 never fires the 令 rule.
Rules that read the semantic layer (PAT, AGT, FOB, mRELA) raise
RuleNotEvaluableError on sentences without one.
"""

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from src.config import AnnotatorConfig
from src.corpus import Language, ParsedSentence, ParsedToken, SentencePair
from src.exceptions import CorrectionsError, CorpusFormatError, LanguageMismatchError, RuleNotEvaluableError
from src.extraction import is_punctuation
from src.taxonomy import Strategy, StrategyLabel, Voice, default_label, strategy_of, voice_of
from src.utils import PathLike, logger, read_tsv, write_tsv

# Semantic dependency labels
PAT = "PAT"
AGT = "AGT"
FOB = "FOB"
MRELA = "mRELA"
FRONTED_LABELS = frozenset({FOB, PAT})

BEI_TAGS = {"LB": StrategyLabel.BEI_L, "SB": StrategyLabel.BEI_S}
OTHER_PASSIVE_MARKERS = {"给": StrategyLabel.GEI, "让": StrategyLabel.RANG, "为": StrategyLabel.WEI}
LEXICAL_PASSIVE_FORMS = {
    "受": StrategyLabel.SHOU, "受到": StrategyLabel.SHOU,
    "遭": StrategyLabel.ZAO, "遭到": StrategyLabel.ZAO, "惨遭": StrategyLabel.ZAO, "惨遭到": StrategyLabel.ZAO,
    "挨": StrategyLabel.AI,
    "蒙": StrategyLabel.MENG,
}
LIGHT_VERB_FORMS = {
    "得到": StrategyLabel.LV_DEDAO,
    "获": StrategyLabel.LV_HUO, "获得": StrategyLabel.LV_HUO,
    "得以": StrategyLabel.LV_DEYI,
    "经": StrategyLabel.LV_JING, "经过": StrategyLabel.LV_JING,
    "予": StrategyLabel.LV_YU, "予以": StrategyLabel.LV_YU,
    "给予": StrategyLabel.LV_JIYU,
    "加以": StrategyLabel.LV_JIAYI,
    "进行": StrategyLabel.LV_JINXING,
    "实施": StrategyLabel.LV_SHISHI,
    "付诸": StrategyLabel.LV_FUZHU,
}
CAUSATIVE_FORMS = {"使": StrategyLabel.CAUS_SHI, "令": StrategyLabel.CAUS_LING}
LIGHT_VERB_WINDOW = 4
PUNCTUATION_TAGS = frozenset({"PU", "PUNCT", "wp"})
CLAUSE_END_FORMS = frozenset({",", "，", "。", ".", "．", "﹐", "｡"})

EN_MARKER_LEMMAS = {
    "be": StrategyLabel.BE,
    "get": StrategyLabel.GET,
    "have": StrategyLabel.HAVE,
    "become": StrategyLabel.BECOME,
}
GET_WINDOW = 4
HAVE_WINDOW = 5

SIDES = ("source", "target")


@dataclass(frozen=True)
class RuleHit:
    """One firing site of a rule: the label, the marker token, and every token the rule read."""

    label: StrategyLabel
    marker: int
    evidence: Tuple[int, ...]


@dataclass(frozen=True)
class Annotation:
    pair_id: str
    side: str
    label: StrategyLabel
    strategy: Strategy
    voice: Voice
    evidence: Tuple[int, ...] = ()
    verified: bool = False
    unevaluable: Tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if self.side not in SIDES:
            raise ValueError(f"side must be 'source' or 'target', got {self.side!r}")
        if self.strategy is not strategy_of(self.label):
            raise ValueError(
                f"{self.label.value} belongs to {strategy_of(self.label).value}, not {self.strategy.value}"
            )
        if self.voice is not voice_of(self.strategy):
            raise ValueError(f"{self.strategy.value} has voice {voice_of(self.strategy).value}, not {self.voice.value}")

    @classmethod
    def from_label(cls, pair_id: str, side: str, label: StrategyLabel, evidence: Sequence[int] = (),
                   verified: bool = False, unevaluable: Sequence[str] = ()) -> "Annotation":
        strategy = strategy_of(label)
        return cls(pair_id, side, label, strategy, voice_of(strategy), tuple(evidence), verified, tuple(unevaluable))

    @property
    def key(self) -> Tuple[str, str]:
        return self.pair_id, self.side


def _require_language(sentence: ParsedSentence, language: Language) -> None:
    if sentence.language is not language:
        raise LanguageMismatchError(f"sentence {sentence.id} is {sentence.language.value}, expected {language.value}")


def _earliest(hits: Sequence[RuleHit]) -> Optional[StrategyLabel]:
    if not hits:
        return None
    return min(hits, key=lambda hit: hit.marker).label


def _forms_present(sentence: ParsedSentence, forms: Iterable[str]) -> bool:
    forms = set(forms)
    return any(token.form in forms for token in sentence.tokens)


def _fronted_before(sentence: ParsedSentence, limit: int, root: ParsedToken,
                    labels=FRONTED_LABELS) -> Optional[ParsedToken]:
    """Leftmost token before ``limit`` carrying a fronted-object label and headed by the semantic root."""
    for token in sentence.tokens[:limit - 1]:
        if token.sem_label in labels and token.sem_head == root.index:
            return token
    return None


def _agent_between(sentence: ParsedSentence, start: int, end: int) -> Optional[ParsedToken]:
    for token in sentence.tokens[start:end - 1]:
        if token.sem_label == AGT:
            return token
    return None


def _is_punctuation_token(token: ParsedToken) -> bool:
    return token.pos in PUNCTUATION_TAGS or is_punctuation(token.form)


# Chinese rule families

def find_marked_passive(sentence: ParsedSentence) -> List[RuleHit]:
    """
    被 tagged LB/SB, or 给/让/为 as mRELA in the order PAT -> mRELA -> (AGT) -> ROOT.

    The fronted element may carry FOB or PAT and must be headed by the semantic root.
    """
    _require_language(sentence, Language.ZH)
    hits = [
        RuleHit(BEI_TAGS[token.pos], token.index, (token.index,))
        for token in sentence.tokens
        if token.form == "被" and token.pos in BEI_TAGS
    ]
    if not _forms_present(sentence, OTHER_PASSIVE_MARKERS):
        return hits
    if not sentence.has_semantic_layer:
        raise RuleNotEvaluableError("marked", sentence.id, partial=hits)

    root = sentence.semantic_root()
    if root is None:
        return hits
    for marker in sentence.tokens:
        if marker.form not in OTHER_PASSIVE_MARKERS or marker.sem_label != MRELA or marker.index >= root.index:
            continue
        patient = _fronted_before(sentence, marker.index, root)
        if patient is None:
            continue
        agent = _agent_between(sentence, marker.index, root.index)
        evidence = [patient.index, marker.index] + ([agent.index] if agent else []) + [root.index]
        hits.append(RuleHit(OTHER_PASSIVE_MARKERS[marker.form], marker.index, tuple(evidence)))
    return sorted(hits, key=lambda hit: hit.marker)


def find_lexical_passive(sentence: ParsedSentence) -> List[RuleHit]:
    """受(到), (惨)遭(到), 挨 or 蒙 as a whole token."""
    _require_language(sentence, Language.ZH)
    return [
        RuleHit(LEXICAL_PASSIVE_FORMS[token.form], token.index, (token.index,))
        for token in sentence.tokens
        if token.form in LEXICAL_PASSIVE_FORMS
    ]


def find_notional_passive(sentence: ParsedSentence) -> List[RuleHit]:
    """
    Fronted PAT/FOB headed by ROOT and preceding it, no AGT anywhere,
    and no mRELA between the fronted element and ROOT.
    """
    _require_language(sentence, Language.ZH)
    if not sentence.has_semantic_layer:
        raise RuleNotEvaluableError("notional", sentence.id)
    root = sentence.semantic_root()
    if root is None or any(token.sem_label == AGT for token in sentence.tokens):
        return []
    hits = []
    for token in sentence.tokens[:root.index - 1]:
        if token.sem_label not in FRONTED_LABELS or token.sem_head != root.index:
            continue
        between = sentence.tokens[token.index:root.index - 1]
        if any(t.sem_label == MRELA for t in between):
            continue
        hits.append(RuleHit(StrategyLabel.NOTIONAL, token.index, (token.index, root.index)))
    return hits


def find_topic_you(sentence: ParsedSentence) -> List[RuleHit]:
    """由 as mRELA in the order FOB -> 由 -> (AGT) -> ROOT, FOB headed by ROOT."""
    _require_language(sentence, Language.ZH)
    if not _forms_present(sentence, ("由",)):
        return []
    if not sentence.has_semantic_layer:
        raise RuleNotEvaluableError("topic_you", sentence.id)
    root = sentence.semantic_root()
    if root is None:
        return []
    hits = []
    for marker in sentence.tokens:
        if marker.form != "由" or marker.sem_label != MRELA or marker.index >= root.index:
            continue
        fronted = _fronted_before(sentence, marker.index, root)
        if fronted is None:
            continue
        agent = _agent_between(sentence, marker.index, root.index)
        evidence = [fronted.index, marker.index] + ([agent.index] if agent else []) + [root.index]
        hits.append(RuleHit(StrategyLabel.YOU, marker.index, tuple(evidence)))
    return hits


def find_topic_shi_de(sentence: ParsedSentence) -> List[RuleHit]:
    """是 tagged VC followed later by 的 that ends its clause (before a comma or period, or sentence-final)."""
    _require_language(sentence, Language.ZH)
    hits = []
    size = len(sentence)
    for copula in sentence.tokens:
        if copula.form != "是" or copula.pos != "VC":
            continue
        for token in sentence.tokens[copula.index:]:
            if token.form != "的":
                continue
            if token.index == size or sentence.token(token.index + 1).form in CLAUSE_END_FORMS:
                hits.append(RuleHit(StrategyLabel.SHI_DE, copula.index, (copula.index, token.index)))
                break
    return hits


def find_topic_sentence(sentence: ParsedSentence, config: Optional[AnnotatorConfig] = None) -> List[RuleHit]:
    """
    Both topic-sentence branches, the branch that comes first in the configured
    precedence listed first. The 由 branch's partial hits survive a missing
    semantic layer.
    """
    shi_de = find_topic_shi_de(sentence)
    try:
        you = find_topic_you(sentence)
    except RuleNotEvaluableError as e:
        raise RuleNotEvaluableError("topic_you", sentence.id, partial=shi_de) from e
    branches = {"topic_you": you, "topic_shi_de": shi_de}
    precedence = (config or AnnotatorConfig()).zh_precedence
    return [hit for rule in precedence if rule in branches for hit in branches[rule]]


def find_light_verb(sentence: ParsedSentence, config: Optional[AnnotatorConfig] = None) -> List[RuleHit]:
    """A listed light verb with a verb-tagged token in the next 4 tokens and no punctuation in between."""
    _require_language(sentence, Language.ZH)
    verb_tag = (config or AnnotatorConfig()).verb_tag_regex
    hits = []
    for token in sentence.tokens:
        if token.form not in LIGHT_VERB_FORMS:
            continue
        for following in sentence.tokens[token.index:token.index + LIGHT_VERB_WINDOW]:
            if _is_punctuation_token(following):
                break
            if verb_tag.search(following.pos):
                hits.append(RuleHit(LIGHT_VERB_FORMS[token.form], token.index, (token.index, following.index)))
                break
    return hits


def find_causative(sentence: ParsedSentence) -> List[RuleHit]:
    """使 or 令 as a whole token."""
    _require_language(sentence, Language.ZH)
    return [
        RuleHit(CAUSATIVE_FORMS[token.form], token.index, (token.index,))
        for token in sentence.tokens
        if token.form in CAUSATIVE_FORMS
    ]


def find_resultative(sentence: ParsedSentence) -> List[RuleHit]:
    """把 tagged BA, or 将 as mRELA in the order (AGT) -> 将 -> PAT -> ROOT with PAT headed by ROOT."""
    _require_language(sentence, Language.ZH)
    hits = [
        RuleHit(StrategyLabel.RES_BA, token.index, (token.index,))
        for token in sentence.tokens
        if token.form == "把" and token.pos == "BA"
    ]
    if not _forms_present(sentence, ("将",)):
        return hits
    if not sentence.has_semantic_layer:
        raise RuleNotEvaluableError("resultative", sentence.id, partial=hits)
    root = sentence.semantic_root()
    if root is None:
        return hits
    for marker in sentence.tokens:
        if marker.form != "将" or marker.sem_label != MRELA or marker.index >= root.index:
            continue
        patient = next(
            (t for t in sentence.tokens[marker.index:root.index - 1]
             if t.sem_label in FRONTED_LABELS and t.sem_head == root.index),
            None,
        )
        if patient is None:
            continue
        agent = _agent_between(sentence, 0, marker.index)
        evidence = ([agent.index] if agent else []) + [marker.index, patient.index, root.index]
        hits.append(RuleHit(StrategyLabel.RES_JIANG, marker.index, tuple(evidence)))
    return sorted(hits, key=lambda hit: hit.marker)


def match_marked_passive(sentence: ParsedSentence) -> Optional[StrategyLabel]:
    return _earliest(find_marked_passive(sentence))


def match_lexical_passive(sentence: ParsedSentence) -> Optional[StrategyLabel]:
    return _earliest(find_lexical_passive(sentence))


def match_notional_passive(sentence: ParsedSentence) -> Optional[StrategyLabel]:
    return _earliest(find_notional_passive(sentence))


def match_topic_sentence(sentence: ParsedSentence, config: Optional[AnnotatorConfig] = None) -> Optional[StrategyLabel]:
    hits = find_topic_sentence(sentence, config)
    return hits[0].label if hits else None


def match_light_verb(sentence: ParsedSentence, config: Optional[AnnotatorConfig] = None) -> Optional[StrategyLabel]:
    return _earliest(find_light_verb(sentence, config))


def match_causative(sentence: ParsedSentence) -> Optional[StrategyLabel]:
    return _earliest(find_causative(sentence))


def match_resultative(sentence: ParsedSentence) -> Optional[StrategyLabel]:
    return _earliest(find_resultative(sentence))


# English rule families

def find_english_passive(sentence: ParsedSentence) -> List[RuleHit]:
    """
    be/get/have/become labelled auxpass, or labelled aux with an nsubjpass
    subject on the same head; plus the get/have + ccomp participle rules.
    """
    _require_language(sentence, Language.EN)
    hits = []
    passive_subject_heads = {token.dep_head for token in sentence.tokens if token.dep_label == "nsubjpass"}
    for token in sentence.tokens:
        lemma = token.lemma.lower()
        label = EN_MARKER_LEMMAS.get(lemma)
        if label is None:
            continue
        if token.dep_label == "auxpass" or (token.dep_label == "aux" and token.dep_head in passive_subject_heads):
            evidence = (token.index,) + ((token.dep_head,) if token.dep_head else ())
            hits.append(RuleHit(label, token.index, evidence))
            continue
        if lemma == "get":
            first, last = token.index + 1, token.index + GET_WINDOW
        elif lemma == "have":
            first, last = token.index + 2, token.index + HAVE_WINDOW
        else:
            continue
        for candidate in sentence.tokens[first - 1:last]:
            if candidate.pos == "VBN" and candidate.dep_label == "ccomp" and candidate.dep_head == token.index:
                hits.append(RuleHit(label, token.index, (token.index, candidate.index)))
                break
    return hits


class StrategyAnnotator:
    """Applies the rule families in configured precedence order."""

    def __init__(self, config: Optional[AnnotatorConfig] = None):
        """
        Initialize annotator.

        Args:
            config: Precedence and verb tag pattern; defaults when omitted
        """
        self.config = config or AnnotatorConfig()
        self._zh_rules: Dict[str, Callable[[ParsedSentence], List[RuleHit]]] = {
            "marked": find_marked_passive,
            "lexical": find_lexical_passive,
            "resultative": find_resultative,
            "topic_you": find_topic_you,
            "topic_shi_de": find_topic_shi_de,
            "light_verb": lambda s: find_light_verb(s, self.config),
            "causative": find_causative,
            "notional": find_notional_passive,
        }

    @staticmethod
    def _settle(hits: Sequence[RuleHit]) -> Tuple[StrategyLabel, Tuple[int, ...]]:
        label = _earliest(hits)
        evidence = sorted({index for hit in hits if hit.label is label for index in hit.evidence})
        return label, tuple(evidence)

    def annotate_zh(self, sentence: ParsedSentence, pair_id: Optional[str] = None,
                    side: str = "target") -> Annotation:
        """
        Label a Chinese sentence with the first rule family that fires.

        Args:
            sentence: Chinese ParsedSentence
            pair_id: Pair the sentence belongs to (defaults to the sentence id)
            side: 'source' or 'target'

        Returns:
            Annotation; ZH_NA when no rule fires
        """
        _require_language(sentence, Language.ZH)
        pair_id = pair_id or sentence.id
        unevaluable = []
        for rule in self.config.zh_precedence:
            try:
                hits = self._zh_rules[rule](sentence)
            except RuleNotEvaluableError as e:
                logger.info(f"{e}")
                unevaluable.append(rule)
                hits = e.partial
            if hits:
                label, evidence = self._settle(hits)
                return Annotation.from_label(pair_id, side, label, evidence, unevaluable=unevaluable)
        return Annotation.from_label(pair_id, side, StrategyLabel.ZH_NA, unevaluable=unevaluable)

    def annotate_en(self, sentence: ParsedSentence, pair_id: Optional[str] = None,
                    side: str = "target") -> Annotation:
        """Label an English sentence BE/GET/HAVE/BECOME by precedence, else EN_NA."""
        _require_language(sentence, Language.EN)
        pair_id = pair_id or sentence.id
        hits = find_english_passive(sentence)
        for name in self.config.en_precedence:
            label = StrategyLabel(name)
            chosen = [hit for hit in hits if hit.label is label]
            if chosen:
                return Annotation.from_label(pair_id, side, *self._settle(chosen))
        return Annotation.from_label(pair_id, side, StrategyLabel.EN_NA)

    def annotate(self, sentence: ParsedSentence, pair_id: Optional[str] = None, side: str = "target") -> Annotation:
        if sentence.language is Language.ZH:
            return self.annotate_zh(sentence, pair_id, side)
        return self.annotate_en(sentence, pair_id, side)

    def annotate_pairs(self, pairs: Iterable[SentencePair], side: str) -> List[Annotation]:
        """Annotate one side of every pair, in input order."""
        annotations = [self.annotate(pair.side(side), pair.pair_id, side) for pair in pairs]
        skipped = sum(1 for annotation in annotations if annotation.unevaluable)
        if skipped:
            logger.warning(f"{skipped} {side} sentences had rules that were not evaluable (no semantic layer)")
        return annotations


_default_annotator: Optional[StrategyAnnotator] = None


def get_annotator() -> StrategyAnnotator:
    """Get or create the default-configured annotator."""
    global _default_annotator
    if _default_annotator is None:
        _default_annotator = StrategyAnnotator()
    return _default_annotator


def annotate_zh(sentence: ParsedSentence, pair_id: Optional[str] = None, side: str = "target") -> Annotation:
    return get_annotator().annotate_zh(sentence, pair_id, side)


def annotate_en(sentence: ParsedSentence, pair_id: Optional[str] = None, side: str = "target") -> Annotation:
    return get_annotator().annotate_en(sentence, pair_id, side)


# Annotation and corrections files

ANNOTATION_HEADER = ("pair_id", "side", "label", "strategy", "voice", "evidence", "verified")
CORRECTIONS_HEADER = ("pair_id", "side", "corrected_label")


def write_annotations(annotations: Iterable[Annotation], path: PathLike) -> Path:
    rows = (
        (a.pair_id, a.side, a.label.value, a.strategy.value, a.voice.value,
         ",".join(str(i) for i in a.evidence), "true" if a.verified else "false")
        for a in annotations
    )
    return write_tsv(path, ANNOTATION_HEADER, rows)


def read_annotations(path: PathLike) -> List[Annotation]:
    """Read an annotation TSV; stored strategy and voice must agree with the label."""
    annotations = []
    for row in read_tsv(path, ANNOTATION_HEADER):
        try:
            label = StrategyLabel.parse(row["label"])
            evidence = tuple(int(i) for i in row["evidence"].split(",") if i)
            annotation = Annotation(
                row["pair_id"], row["side"], label, Strategy(row["strategy"]), Voice(row["voice"]),
                evidence, row["verified"].lower() == "true",
            )
        except ValueError as e:
            raise CorpusFormatError(str(e), str(path), int(row["_line"])) from None
        annotations.append(annotation)
    return annotations


def apply_corrections(annotations: Sequence[Annotation], corrections_file: PathLike,
                      known_pair_ids: Optional[Iterable[str]] = None) -> List[Annotation]:
    """
    Override automatic labels with manually validated ones.

    Args:
        annotations: Automatic annotations
        corrections_file: TSV with header ``pair_id, side, corrected_label``
        known_pair_ids: Every pair id the corrections may name (defaults to the
            annotated pairs); rows for known pairs outside ``annotations`` are skipped

    Returns:
        New list in the same order; overridden rows re-derive strategy and voice and are verified
    """
    by_key = {annotation.key: position for position, annotation in enumerate(annotations)}
    pair_ids = set(known_pair_ids) if known_pair_ids is not None else {a.pair_id for a in annotations}
    corrected = list(annotations)
    count = 0
    for row in read_tsv(corrections_file, CORRECTIONS_HEADER):
        location = f"{corrections_file}:{row['_line']}"
        if row["pair_id"] not in pair_ids:
            raise CorrectionsError(f"{location}: unknown pair_id {row['pair_id']!r}")
        if row["side"] not in SIDES:
            raise CorrectionsError(f"{location}: side must be 'source' or 'target', got {row['side']!r}")
        try:
            label = StrategyLabel.parse(row["corrected_label"])
        except ValueError:
            raise CorrectionsError(f"{location}: invalid label {row['corrected_label']!r}") from None
        key = (row["pair_id"], row["side"])
        if key not in by_key:
            continue
        original = corrected[by_key[key]]
        if label.language is not original.label.language:
            raise CorrectionsError(
                f"{location}: label {label.value} does not fit a {original.label.language.value} sentence"
            )
        corrected[by_key[key]] = replace(
            Annotation.from_label(original.pair_id, original.side, label, original.evidence, verified=True),
            unevaluable=original.unevaluable,
        )
        count += 1
    logger.info(f"Applied {count} corrections from {corrections_file}")
    return corrected


def default_annotation(pair_id: str, side: str, language: Language) -> Annotation:
    return Annotation.from_label(pair_id, side, default_label(language))
