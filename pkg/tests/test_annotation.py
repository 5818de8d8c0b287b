"""
Tests for the strategy rules, the precedence annotator and the corrections file.
"""

import pytest

from src.annotation import (
    Annotation,
    RuleHit,
    StrategyAnnotator,
    annotate_en,
    annotate_zh,
    apply_corrections,
    default_annotation,
    find_light_verb,
    find_marked_passive,
    find_topic_sentence,
    get_annotator,
    match_causative,
    match_lexical_passive,
    match_light_verb,
    match_marked_passive,
    match_notional_passive,
    match_resultative,
    match_topic_sentence,
    read_annotations,
    write_annotations,
)
from src.config import ZH_RULES, AnnotatorConfig, load_annotator_config
from src.corpus import Language
from src.exceptions import (
    ConfigError,
    CorpusFormatError,
    CorrectionsError,
    LanguageMismatchError,
    RuleNotEvaluableError,
)
from src.taxonomy import Strategy, StrategyLabel as L, Voice
from tests.builders import en, zh

# Chinese rule families

BEI_S = zh([("书", "NN", "nsubj:pass", 3, "PAT", 3), ("被", "SB", "aux:pass", 3, "mRELA", 3),
            ("偷", "VV", "ROOT", 0, "Root", 0)])
GEI = zh([("书", "NN", "nsubj", 4, "PAT", 4), ("给", "P", "case", 3, "mRELA", 3),
          ("他", "PN", "obl", 4, "AGT", 4), ("弄丢", "VV", "ROOT", 0, "Root", 0)])
GEI_PATIENT_AFTER_ROOT = zh([("给", "P", "case", 2, "mRELA", 2), ("他", "PN", "nsubj", 3, "AGT", 3),
                             ("弄丢", "VV", "ROOT", 0, "Root", 0), ("书", "NN", "dobj", 3, "PAT", 3)])
MEAL = zh([("饭", "NN", "nsubj", 2, "PAT", 2), ("烧好", "VV", "ROOT", 0, "Root", 0),
           ("了", "AS", "aux:asp", 2, "mDEPD", 2)])
BRIDGE_BY = zh([("大桥", "NN", "nsubj", 4, "FOB", 4), ("由", "P", "case", 3, "mRELA", 3),
                ("他们", "PN", "obl", 4, "AGT", 4), ("设计", "VV", "ROOT", 0, "Root", 0)])


def test_bei_tags():
    assert match_marked_passive(BEI_S) is L.BEI_S
    bei_l = zh([("书", "NN", "nsubj", 4), ("被", "LB", "aux:pass", 4), ("他", "PN", "nsubj", 4),
                ("偷", "VV", "ROOT", 0)])
    assert match_marked_passive(bei_l) is L.BEI_L


def test_gei_in_order():
    assert match_marked_passive(GEI) is L.GEI
    assert find_marked_passive(GEI) == [RuleHit(L.GEI, 2, (1, 2, 3, 4))]


def test_gei_with_patient_after_root():
    assert match_marked_passive(GEI_PATIENT_AFTER_ROOT) is None


def test_gei_needs_semantic_layer():
    sentence = zh([("书", "NN", "nsubj", 3), ("给", "P", "case", 3), ("弄丢", "VV", "ROOT", 0)])
    with pytest.raises(RuleNotEvaluableError, match="rule not evaluable"):
        match_marked_passive(sentence)


def test_lexical_forms():
    assert match_lexical_passive(zh([("他", "PN", "nsubj", 2), ("遭到", "VV", "ROOT", 0),
                                     ("批评", "NN", "dobj", 2)])) is L.ZAO
    assert match_lexical_passive(zh([("他", "PN", "nsubj", 2), ("挨", "VV", "ROOT", 0),
                                     ("打", "VV", "dobj", 2)])) is L.AI
    assert match_lexical_passive(MEAL) is None


@pytest.mark.parametrize("first, second, expected", [("受到", "遭", L.SHOU), ("遭", "受到", L.ZAO)])
def test_lexical_earliest_marker_wins(first, second, expected):
    sentence = zh([("他", "PN", "nsubj", 2), (first, "VV", "ROOT", 0), ("批评", "NN", "dobj", 2),
                   ("又", "AD", "advmod", 5), (second, "VV", "conj", 2), ("打击", "NN", "dobj", 5)])
    assert match_lexical_passive(sentence) is expected
    assert annotate_zh(sentence).label is expected


def test_notional():
    assert match_notional_passive(MEAL) is L.NOTIONAL


def test_notional_blocked_by_agent():
    with_agent = zh([("饭", "NN", "nsubj", 3, "PAT", 3), ("妈妈", "NN", "nsubj", 3, "AGT", 3),
                     ("烧好", "VV", "ROOT", 0, "Root", 0)])
    assert match_notional_passive(with_agent) is None


def test_notional_blocked_by_marker_and_topic_applies():
    sentence = zh([("大桥", "NN", "nsubj", 3, "PAT", 3), ("由", "P", "case", 3, "mRELA", 3),
                   ("设计", "VV", "ROOT", 0, "Root", 0)])
    assert match_notional_passive(sentence) is None
    assert match_topic_sentence(sentence) is L.YOU


def test_notional_needs_semantic_layer():
    with pytest.raises(RuleNotEvaluableError):
        match_notional_passive(zh([("饭", "NN", "nsubj", 2), ("烧好", "VV", "ROOT", 0)]))


def test_topic_you():
    assert match_topic_sentence(BRIDGE_BY) is L.YOU
    assert annotate_zh(BRIDGE_BY).evidence == (1, 2, 3, 4)


def test_topic_shi_de():
    sentence = zh([("这", "PN", "nsubj", 2), ("是", "VC", "ROOT", 0), ("他", "PN", "nsubj", 4),
                   ("写", "VV", "ccomp", 2), ("的", "SP", "mark", 4), ("。", "PU", "punct", 2)])
    assert match_topic_sentence(sentence) is L.SHI_DE
    final = zh([("这", "PN", "nsubj", 2), ("是", "VC", "ROOT", 0), ("他", "PN", "nsubj", 4),
                ("写", "VV", "ccomp", 2), ("的", "SP", "mark", 4)])
    assert match_topic_sentence(final) is L.SHI_DE


SHI_YOU_DE = zh([("大桥", "NN", "nsubj", 5, "FOB", 5), ("是", "VC", "cop", 5, "mDEPD", 5),
                 ("由", "P", "case", 4, "mRELA", 4), ("他们", "PN", "obl", 5, "AGT", 5),
                 ("设计", "VV", "ROOT", 0, "Root", 0), ("的", "SP", "mark", 5, "mDEPD", 5),
                 ("。", "PU", "punct", 5, "mPUNC", 5)])


def test_shi_you_de_follows_precedence():
    assert [hit.label for hit in find_topic_sentence(SHI_YOU_DE)] == [L.YOU, L.SHI_DE]
    assert match_topic_sentence(SHI_YOU_DE) is L.YOU
    annotation = annotate_zh(SHI_YOU_DE)
    assert annotation.label is L.YOU
    assert annotation.evidence == (1, 3, 4, 5)


def test_shi_you_de_with_shi_de_ranked_first():
    order = ("marked", "lexical", "resultative", "topic_shi_de", "topic_you", "light_verb", "causative", "notional")
    config = AnnotatorConfig(zh_precedence=order)
    assert match_topic_sentence(SHI_YOU_DE, config) is L.SHI_DE
    assert StrategyAnnotator(config).annotate_zh(SHI_YOU_DE).label is L.SHI_DE


def test_shi_de_mid_clause():
    sentence = zh([("这", "PN", "nsubj", 2), ("是", "VC", "ROOT", 0), ("他", "PN", "nsubj", 4),
                   ("写", "VV", "relcl", 6), ("的", "DEC", "mark", 4), ("书", "NN", "attr", 2),
                   ("。", "PU", "punct", 2)])
    assert match_topic_sentence(sentence) is None


def test_shi_needs_copula_tag():
    sentence = zh([("这", "PN", "nsubj", 2), ("是", "VV", "ROOT", 0), ("他", "PN", "nsubj", 4),
                   ("写", "VV", "ccomp", 2), ("的", "SP", "mark", 4)])
    assert match_topic_sentence(sentence) is None


def test_light_verb_next_token():
    sentence = zh([("问题", "NN", "nsubj", 2), ("得到", "VV", "ROOT", 0), ("解决", "VV", "dobj", 2)])
    assert match_light_verb(sentence) is L.LV_DEDAO


def test_light_verb_blocked_by_punctuation():
    sentence = zh([("双方", "NN", "nsubj", 2), ("进行", "VV", "ROOT", 0), ("，", "PU", "punct", 2),
                   ("讨论", "VV", "conj", 2)])
    assert match_light_verb(sentence) is None


@pytest.mark.parametrize("fillers, expected", [(3, L.LV_JIAYI), (4, None)])
def test_light_verb_window(fillers, expected):
    rows = [("对此", "AD", "advmod", 2), ("加以", "VV", "ROOT", 0)]
    rows += [("认真", "AD", "advmod", 2)] * fillers
    rows.append(("研究", "VV", "dobj", 2))
    assert match_light_verb(zh(rows)) is expected


def test_light_verb_tag_pattern():
    sentence = zh([("问题", "n", "nsubj", 2), ("得到", "v", "ROOT", 0), ("解决", "v", "dobj", 2)])
    assert match_light_verb(sentence) is None
    assert match_light_verb(sentence, AnnotatorConfig(verb_tag_pattern="^[vV]")) is L.LV_DEDAO


def test_causative():
    assert match_causative(zh([("这", "PN", "nsubj", 2), ("使", "VV", "ROOT", 0), ("他", "PN", "dobj", 2),
                               ("高兴", "VA", "ccomp", 2)])) is L.CAUS_SHI
    assert match_causative(zh([("这", "PN", "nsubj", 2), ("令", "VV", "ROOT", 0), ("人", "NN", "dobj", 2),
                               ("感动", "VV", "ccomp", 2)])) is L.CAUS_LING
    assert match_causative(MEAL) is None


def test_causative_whole_token_only():
    sentence = zh([("他", "PN", "nsubj", 2), ("命令", "VV", "ROOT", 0), ("士兵", "NN", "dobj", 2)])
    assert match_causative(sentence) is None


def test_resultative_ba():
    sentence = zh([("他", "PN", "nsubj", 4), ("把", "BA", "aux:ba", 4), ("书", "NN", "dobj", 4),
                   ("卖掉", "VV", "ROOT", 0)])
    assert match_resultative(sentence) is L.RES_BA
    preposition = zh([("他", "PN", "nsubj", 4), ("把", "P", "case", 3), ("门", "NN", "obl", 4),
                      ("守", "VV", "ROOT", 0)])
    assert match_resultative(preposition) is None


def test_resultative_jiang():
    sentence = zh([("他", "PN", "nsubj", 4, "AGT", 4), ("将", "P", "case", 3, "mRELA", 3),
                   ("书", "NN", "obl", 4, "PAT", 4), ("卖掉", "VV", "ROOT", 0, "Root", 0)])
    assert match_resultative(sentence) is L.RES_JIANG
    assert annotate_zh(sentence).evidence == (1, 2, 3, 4)


def test_jiang_as_future_marker():
    sentence = zh([("会议", "NN", "nsubj", 4, "PAT", 4), ("将", "AD", "advmod", 4, "mDEPD", 4),
                   ("明天", "NT", "tmod", 4, "TIME", 4), ("举行", "VV", "ROOT", 0, "Root", 0)])
    assert match_resultative(sentence) is None
    assert annotate_zh(sentence).label is L.NOTIONAL


# Precedence

BEI_AND_LIGHT_VERB = zh([("问题", "NN", "nsubj:pass", 4), ("被", "SB", "aux:pass", 4), ("及时", "AD", "advmod", 4),
                         ("得到", "VV", "ROOT", 0), ("解决", "VV", "dobj", 4)])


def test_marked_passive_outranks_light_verb():
    assert match_marked_passive(BEI_AND_LIGHT_VERB) is L.BEI_S
    assert match_light_verb(BEI_AND_LIGHT_VERB) is L.LV_DEDAO
    annotation = annotate_zh(BEI_AND_LIGHT_VERB)
    assert annotation.label is L.BEI_S
    assert annotation.evidence == (2,)


def test_precedence_is_configurable():
    order = ("light_verb",) + tuple(rule for rule in ZH_RULES if rule != "light_verb")
    annotator = StrategyAnnotator(AnnotatorConfig(zh_precedence=order))
    assert annotator.annotate_zh(BEI_AND_LIGHT_VERB).label is L.LV_DEDAO


def test_no_rule_fires():
    sentence = zh([("他", "PN", "nsubj", 2, "AGT", 2), ("走", "VV", "ROOT", 0, "Root", 0),
                   ("了", "AS", "aux:asp", 2, "mDEPD", 2)])
    annotation = annotate_zh(sentence, "p1", "source")
    assert (annotation.label, annotation.strategy, annotation.voice) == (L.ZH_NA, Strategy.OTHER_ACTIVE, Voice.ACTIVE)
    assert annotation.evidence == ()
    assert annotation.key == ("p1", "source")


def test_ba_resultative_example(mini_sentences):
    annotation = annotate_zh(mini_sentences["zh058"])
    assert (annotation.label, annotation.strategy, annotation.voice) == (L.RES_BA, Strategy.RESULTATIVE, Voice.ACTIVE)


def test_unevaluable_rules_keep_partial_hits():
    sentence = zh([("书", "NN", "nsubj", 4), ("被", "SB", "aux:pass", 4), ("给", "P", "case", 4),
                   ("偷", "VV", "ROOT", 0)])
    annotation = annotate_zh(sentence)
    assert annotation.label is L.BEI_S
    assert annotation.unevaluable == ("marked",)


def test_unevaluable_rules_are_skipped():
    sentence = zh([("饭", "NN", "nsubj", 2), ("烧好", "VV", "ROOT", 0)])
    annotation = annotate_zh(sentence)
    assert annotation.label is L.ZH_NA
    assert annotation.unevaluable == ("notional",)


# English

def test_was_struck_down():
    sentence = en([("He", "PRP", "nsubjpass", 3, None, None, "he"), ("was", "VBD", "auxpass", 3, None, None, "be"),
                   ("struck", "VBN", "ROOT", 0, None, None, "strike"), ("down", "RP", "prt", 3, None, None, "down")])
    annotation = annotate_en(sentence)
    assert annotation.label is L.BE
    assert annotation.evidence == (2, 3)


def test_get_struck_down():
    sentence = en([("They", "PRP", "nsubj", 2, None, None, "they"), ("get", "VBP", "ROOT", 0, None, None, "get"),
                   ("struck", "VBN", "ccomp", 2, None, None, "strike"), ("down", "RP", "prt", 3, None, None, "down")])
    assert annotate_en(sentence).label is L.GET


def test_get_passive_in_mini_corpus(mini_sentences):
    assert annotate_en(mini_sentences["en004"]).label is L.GET


def test_have_it_repaired():
    sentence = en([("have", "VB", "ROOT", 0, None, None, "have"), ("it", "PRP", "nsubj", 3, None, None, "it"),
                   ("repaired", "VBN", "ccomp", 1, None, None, "repair")])
    annotation = annotate_en(sentence)
    assert annotation.label is L.HAVE
    assert annotation.evidence == (1, 3)


def test_have_needs_a_token_in_between():
    sentence = en([("I", "PRP", "nsubj", 2, None, None, "I"), ("have", "VBP", "ROOT", 0, None, None, "have"),
                   ("finished", "VBN", "ccomp", 2, None, None, "finish")])
    assert annotate_en(sentence).label is L.EN_NA


def test_aux_with_passive_subject():
    sentence = en([("It", "PRP", "nsubjpass", 3, None, None, "it"), ("got", "VBD", "aux", 3, None, None, "get"),
                   ("fixed", "VBN", "ROOT", 0, None, None, "fix")])
    assert annotate_en(sentence).label is L.GET


def test_become(mini_sentences):
    assert annotate_en(mini_sentences["en007"]).label is L.BECOME


def test_be_outranks_have(mini_sentences):
    annotation = annotate_en(mini_sentences["en033"])
    assert annotation.label is L.BE
    annotator = StrategyAnnotator(AnnotatorConfig(en_precedence=("HAVE", "BE", "GET", "BECOME")))
    assert annotator.annotate_en(mini_sentences["en033"]).label is L.HAVE


def test_evidence_is_union_of_winning_hits():
    sentence = en([("It", "PRP", "nsubjpass", 3, None, None, "it"), ("was", "VBD", "auxpass", 3, None, None, "be"),
                   ("built", "VBN", "ROOT", 0, None, None, "build"), ("and", "CC", "cc", 3, None, None, "and"),
                   ("was", "VBD", "auxpass", 6, None, None, "be"), ("sold", "VBN", "conj", 3, None, None, "sell")])
    assert annotate_en(sentence).evidence == (2, 3, 5, 6)


def test_no_english_marker():
    annotation = annotate_en(en([("Birds", "NNS", "nsubj", 2, None, None, "bird"),
                                 ("sing", "VBP", "ROOT", 0, None, None, "sing")]))
    assert (annotation.label, annotation.strategy, annotation.voice) == (L.EN_NA, Strategy.ACTIVE, Voice.ACTIVE)


def test_annotate_dispatches_on_language():
    annotator = get_annotator()
    assert annotator is get_annotator()
    assert annotator.annotate(MEAL).label is L.NOTIONAL
    with pytest.raises(LanguageMismatchError):
        annotator.annotate_en(MEAL)


# Annotator configuration

def test_load_annotator_config(mini_dir, tmp_path):
    assert load_annotator_config(mini_dir / "annotator.conf") == AnnotatorConfig()
    assert load_annotator_config(None) == AnnotatorConfig()
    path = tmp_path / "annotator.conf"
    path.write_text("precedence.en = have, be, get, become\n", encoding="utf-8")
    assert load_annotator_config(path).en_precedence == ("HAVE", "BE", "GET", "BECOME")


def test_hash_inside_value_is_kept(tmp_path):
    path = tmp_path / "annotator.conf"
    path.write_text("  # verbs and tagged verbs\nverb_tag_pattern = ^(V|#V)\n", encoding="utf-8")
    config = load_annotator_config(path)
    assert config.verb_tag_pattern == "^(V|#V)"
    assert config.verb_tag_regex.match("#VV")


@pytest.mark.parametrize("text, message", [
    ("precedence.zh = marked, lexical\n", "missing entries"),
    ("precedence.zh = marked, marked, lexical, resultative, topic_you, topic_shi_de, light_verb, causative, "
     "notional\n", "must not repeat"),
    ("precedence.en = BE, GET, HAVE, BECOME, SEEM\n", "unknown entries"),
    ("verb_tag_pattern = [V\n", "not a valid regex"),
    ("colour = blue\n", "unknown key"),
    ("precedence.zh\n", "key = value"),
])
def test_annotator_config_errors(tmp_path, text, message):
    path = tmp_path / "annotator.conf"
    path.write_text(text, encoding="utf-8")
    with pytest.raises(ConfigError, match=message):
        load_annotator_config(path)


def test_annotator_config_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_annotator_config(tmp_path / "absent.conf")


# Annotation records and corrections

def test_annotation_invariants():
    with pytest.raises(ValueError):
        Annotation("p1", "target", L.BE, Strategy.GET, Voice.PASSIVE)
    with pytest.raises(ValueError):
        Annotation("p1", "target", L.NOTIONAL, Strategy.NOTIONAL_PASSIVE, Voice.PASSIVE)
    with pytest.raises(ValueError):
        Annotation.from_label("p1", "middle", L.BE)
    assert default_annotation("p1", "source", Language.EN).label is L.EN_NA


def test_annotation_file(tmp_path):
    annotations = [Annotation.from_label("p1", "source", L.BEI_S, (2,)),
                   Annotation.from_label("p1", "target", L.BE, (2, 3), verified=True)]
    path = write_annotations(annotations, tmp_path / "a.tsv")
    assert path.read_text(encoding="utf-8").splitlines()[1] == "p1\tsource\tBEI_S\tSYNTACTIC_PASSIVE\tPASSIVE\t2\tfalse"
    assert read_annotations(path) == annotations


def test_annotation_file_with_inconsistent_voice(tmp_path):
    path = tmp_path / "a.tsv"
    path.write_text("pair_id\tside\tlabel\tstrategy\tvoice\tevidence\tverified\n"
                    "p1\ttarget\tBE\tBE\tACTIVE\t2\tfalse\n", encoding="utf-8")
    with pytest.raises(CorpusFormatError):
        read_annotations(path)


def _corrections(tmp_path, *rows):
    path = tmp_path / "corrections.tsv"
    path.write_text("pair_id\tside\tcorrected_label\n" + "".join(row + "\n" for row in rows), encoding="utf-8")
    return path


AUTOMATIC = [Annotation.from_label("p6", "target", L.BE, (2, 3)), Annotation.from_label("p7", "target", L.EN_NA)]


def test_apply_corrections(tmp_path):
    corrected = apply_corrections(AUTOMATIC, _corrections(tmp_path, "p7\ttarget\tGET"))
    assert corrected[0] == AUTOMATIC[0]
    assert (corrected[1].label, corrected[1].voice, corrected[1].verified) == (L.GET, Voice.PASSIVE, True)


def test_corrections_for_other_sides_are_skipped(tmp_path):
    path = _corrections(tmp_path, "p7\tsource\tBEI_S", "p9\ttarget\tBE")
    assert apply_corrections(AUTOMATIC, path, known_pair_ids=["p6", "p7", "p9"]) == AUTOMATIC


@pytest.mark.parametrize("row, message", [
    ("p8\ttarget\tGET", "unknown pair_id"),
    ("p7\ttarget\tPASSIVE", "invalid label"),
    ("p7\ttarget\tN/A", "invalid label"),
    ("p7\ttarget\tBEI_S", "does not fit"),
    ("p7\tmiddle\tGET", "side must be"),
])
def test_corrections_errors(tmp_path, row, message):
    with pytest.raises(CorrectionsError, match=message):
        apply_corrections(AUTOMATIC, _corrections(tmp_path, row))
