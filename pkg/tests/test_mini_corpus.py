"""
The bundled mini-corpus against its hand-derived golden labels.
"""

import time
from collections import Counter

from src.annotation import (
    StrategyAnnotator,
    find_english_passive,
    match_causative,
    match_lexical_passive,
    match_light_verb,
    match_marked_passive,
    match_notional_passive,
    match_resultative,
    match_topic_sentence,
)
from src.config import load_annotator_config
from src.corpus import Language
from src.taxonomy import StrategyLabel as L, labels_for

EXPECTED_EVIDENCE = {
    "zh018": (1, 2, 3, 4),
    "zh022": (1, 2, 3, 5),
    "zh060": (1, 2, 3, 4),
    "zh013": (3, 4, 5, 6),
    "zh016": (1, 3, 4, 5),
    "zh014": (4, 7),
    "zh035": (3, 5),
    "en005": (2, 6),
    "en001": (2, 3),
}


def _annotate_all(mini_dir, mini_sentences):
    annotator = StrategyAnnotator(load_annotator_config(mini_dir / "annotator.conf"))
    return {sid: annotator.annotate(sentence) for sid, sentence in mini_sentences.items()}


def test_golden_agreement(mini_dir, mini_sentences, golden_labels):
    started = time.perf_counter()
    annotations = _annotate_all(mini_dir, mini_sentences)
    elapsed = time.perf_counter() - started
    assert set(golden_labels) == set(mini_sentences)
    disagreements = {
        sid: (annotations[sid].label.value, expected)
        for sid, expected in golden_labels.items()
        if annotations[sid].label.value != expected
    }
    assert disagreements == {}
    assert elapsed < 1.0


def test_golden_evidence(mini_dir, mini_sentences):
    annotations = _annotate_all(mini_dir, mini_sentences)
    for sid, evidence in EXPECTED_EVIDENCE.items():
        assert annotations[sid].evidence == evidence, sid


def test_every_rule_exercised_twice(golden_labels):
    counts = Counter(L(label) for label in golden_labels.values())
    for language in (Language.ZH, Language.EN):
        for label in labels_for(language):
            assert counts[label] >= 2, label


def test_corpus_size(mini_sentences):
    assert len(mini_sentences) >= 60


def test_semantic_layer_always_evaluable(mini_dir, mini_sentences):
    annotations = _annotate_all(mini_dir, mini_sentences)
    assert not any(annotation.unevaluable for annotation in annotations.values())


# label -> (rule family, forms one of which must be among the evidence tokens)
ZH_LABEL_FAMILY = {
    L.BEI_L: ("marked", {"被"}), L.BEI_S: ("marked", {"被"}), L.GEI: ("marked", {"给"}),
    L.RANG: ("marked", {"让"}), L.WEI: ("marked", {"为"}),
    L.SHOU: ("lexical", {"受", "受到"}), L.ZAO: ("lexical", {"遭", "遭到", "惨遭", "惨遭到"}),
    L.AI: ("lexical", {"挨"}), L.MENG: ("lexical", {"蒙"}),
    L.RES_BA: ("resultative", {"把", "将"}), L.RES_JIANG: ("resultative", {"将"}),
    L.YOU: ("topic", {"由"}), L.SHI_DE: ("topic", {"是"}),
    L.LV_DEDAO: ("light_verb", {"得到"}), L.LV_HUO: ("light_verb", {"获", "获得"}),
    L.LV_DEYI: ("light_verb", {"得以"}), L.LV_JING: ("light_verb", {"经", "经过"}),
    L.LV_YU: ("light_verb", {"予", "予以"}), L.LV_JIYU: ("light_verb", {"给予"}),
    L.LV_JIAYI: ("light_verb", {"加以"}), L.LV_JINXING: ("light_verb", {"进行"}),
    L.LV_SHISHI: ("light_verb", {"实施"}), L.LV_FUZHU: ("light_verb", {"付诸"}),
    L.CAUS_SHI: ("causative", {"使"}), L.CAUS_LING: ("causative", {"令"}),
    L.NOTIONAL: ("notional", None),
}
EN_MARKER_LEMMAS = {L.BE: "be", L.GET: "get", L.HAVE: "have", L.BECOME: "become"}


def _zh_matchers(config):
    return {
        "marked": match_marked_passive,
        "lexical": match_lexical_passive,
        "resultative": match_resultative,
        "topic": lambda s: match_topic_sentence(s, config),
        "light_verb": lambda s: match_light_verb(s, config),
        "causative": match_causative,
        "notional": match_notional_passive,
    }


def test_annotations_agree_with_family_rules(mini_dir, mini_sentences):
    config = load_annotator_config(mini_dir / "annotator.conf")
    matchers = _zh_matchers(config)
    annotations = _annotate_all(mini_dir, mini_sentences)
    for sid, sentence in mini_sentences.items():
        label = annotations[sid].label
        if sentence.language is Language.EN:
            fired = {hit.label for hit in find_english_passive(sentence)}
            assert (label in fired) if label is not L.EN_NA else not fired, sid
        elif label is L.ZH_NA:
            assert all(match(sentence) is None for match in matchers.values()), sid
        else:
            family, _ = ZH_LABEL_FAMILY[label]
            assert matchers[family](sentence) is label, sid


def test_evidence_lies_in_sentence_and_holds_marker(mini_dir, mini_sentences):
    annotations = _annotate_all(mini_dir, mini_sentences)
    for sid, sentence in mini_sentences.items():
        annotation = annotations[sid]
        if annotation.label in (L.ZH_NA, L.EN_NA):
            assert annotation.evidence == (), sid
            continue
        assert annotation.evidence, sid
        assert all(1 <= index <= len(sentence) for index in annotation.evidence), sid
        tokens = [sentence.token(index) for index in annotation.evidence]
        if sentence.language is Language.EN:
            assert any(t.lemma.lower() == EN_MARKER_LEMMAS[annotation.label] for t in tokens), sid
        elif annotation.label is L.NOTIONAL:
            assert any(t.sem_label in ("FOB", "PAT") for t in tokens), sid
            assert any(t.sem_head == 0 for t in tokens), sid
        else:
            _, forms = ZH_LABEL_FAMILY[annotation.label]
            assert any(t.form in forms for t in tokens), sid
