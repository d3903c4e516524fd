import json
import re

import pytest

from fecorrect.errors import AnnotatorUnavailable
from fecorrect.extract import (
    AnnotatorOutput,
    BuiltinAnnotator,
    SpanAnnotation,
    TokenAnnotation,
    annotate,
    extract_claim_answers,
    get_annotator,
)
from fecorrect.types import AnswerKind

CLATHRIN = "Clathrin stabilizes the spindle fiber apparatus during anaphase."
FULLER = "Fuller House (TV series) won't air on Netflix."


def _answers(claim, **kw):
    return extract_claim_answers(claim, annotate(claim), **kw)


def _spans(claim):
    return {(claim[s.char_start : s.char_end], s.label) for s in annotate(claim).spans}


def _gold(fixtures_dir):
    with open(fixtures_dir / "extraction_gold.jsonl", encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def test_paris_tokens_and_spans():
    out = annotate("Paris.")
    assert [(t.text, t.pos) for t in out.tokens] == [("Paris", "PROPN"), (".", "PUNCT")]
    assert [(s.label, s.char_start, s.char_end) for s in out.spans] == [("NOUN_CHUNK", 0, 5)]


def test_paris_dedupes_to_one_answer():
    (ans,) = _answers("Paris.")
    assert (ans.text, ans.kind) == ("Paris", AnswerKind.NOUN_CHUNK)


def test_clathrin_units():
    texts = [a.text for a in _answers(CLATHRIN)]
    for unit in ("anaphase", "Clathrin", "the spindle fiber apparatus", "stabilizes"):
        assert unit in texts
    assert ("anaphase", "NOUN_CHUNK") in _spans(CLATHRIN)


def test_fuller_house_vp_and_negation():
    assert ("won't air on Netflix", "VP") in _spans(FULLER)
    kinds = {a.text: a.kind for a in _answers(FULLER)}
    assert kinds["won't"] is AnswerKind.NEGATION
    assert "Fuller House (TV series)" in kinds


def test_cleopatre_negation_and_noun():
    kinds = {a.text: a.kind for a in _answers("Cleopatre is not a queen.")}
    assert kinds["not"] is AnswerKind.NEGATION
    assert kinds["queen"] is AnswerKind.NOUN


def test_fused_contraction_counts_as_negation():
    kinds = {a.text: a.kind for a in _answers("Neil Armstrong didn't walk on the Moon.")}
    assert kinds["didn't"] is AnswerKind.NEGATION


def test_custom_negation_lexicon():
    kinds = {a.text: a.kind for a in _answers("Cleopatre is hardly a queen.", negation_lexicon={"hardly"})}
    assert kinds["hardly"] is AnswerKind.NEGATION
    texts = [a.text for a in _answers("Cleopatre is not a queen.", negation_lexicon=set())]
    assert "not" not in texts


def test_order_and_dedupe():
    answers = _answers(FULLER)
    keys = [(a.char_start, -(a.char_end - a.char_start)) for a in answers]
    assert keys == sorted(keys)
    normalized = [" ".join(a.text.lower().split()) for a in answers]
    assert len(normalized) == len(set(normalized))


def test_offsets_are_exact_substrings(fixtures_dir):
    for rec in _gold(fixtures_dir):
        for a in _answers(rec["claim"]):
            assert rec["claim"][a.char_start : a.char_end] == a.text


def test_gold_recall(fixtures_dir):
    for rec in _gold(fixtures_dir):
        claim = rec["claim"]
        got = {(a.text, a.char_start) for a in _answers(claim)}
        for unit in rec["units"] + rec["negations"]:
            start = re.search(r"(?<!\w)" + re.escape(unit) + r"(?!\w)", claim).start()
            assert (unit, start) in got, (claim, unit)


def test_all_punctuation_claim_is_empty():
    assert _answers("?!") == []


def test_empty_claim_rejected():
    with pytest.raises(ValueError):
        annotate("   ")


def test_external_annotation_is_used_as_given():
    claim = "Ada wrote code."
    ann = AnnotatorOutput(
        tokens=(
            TokenAnnotation("Ada", "PROPN", 0, 3),
            TokenAnnotation("wrote", "VERB", 4, 9),
            TokenAnnotation("code", "NOUN", 10, 14),
            TokenAnnotation(".", "PUNCT", 14, 15),
        ),
        spans=(SpanAnnotation("NAMED_ENTITY", 0, 3),),
    )
    got = [(a.text, a.kind) for a in extract_claim_answers(claim, ann)]
    assert got == [("Ada", AnswerKind.NAMED_ENTITY), ("wrote", AnswerKind.VERB), ("code", AnswerKind.NOUN)]


def test_builtin_is_deterministic():
    a = BuiltinAnnotator().annotate(FULLER)
    b = get_annotator("builtin").annotate(FULLER)
    assert a == b


def test_unknown_annotator():
    with pytest.raises((ValueError, AnnotatorUnavailable)):
        get_annotator("no-such-annotator")
