"""Claim answer generation.

A claim is annotated (tokens with coarse POS tags plus chunk spans) and every
plausible information unit is harvested from the annotation: chunk/entity/
phrase spans, open-class tokens and negation terms. Recall matters more than
precision here; whatever is missed cannot be corrected later.

Two annotators are provided. :class:`BuiltinAnnotator` is a deterministic
lexicon + suffix tagger with regex-style chunking and needs no model files.
:class:`SpacyAnnotator` adapts spaCy when it is installed.
"""

from __future__ import annotations

import re
import threading
from dataclasses import dataclass
from typing import Iterable, Protocol, Sequence

from fecorrect.errors import AnnotatorUnavailable
from fecorrect.resources import lexicon
from fecorrect.types import AnswerKind, ClaimAnswer


@dataclass(frozen=True)
class TokenAnnotation:
    text: str
    pos: str
    char_start: int
    char_end: int


@dataclass(frozen=True)
class SpanAnnotation:
    label: str  # NOUN_CHUNK | NAMED_ENTITY | NP | VP
    char_start: int
    char_end: int

    def __post_init__(self) -> None:
        if self.char_start >= self.char_end:
            raise ValueError(f"empty span {self.char_start}:{self.char_end}")


@dataclass(frozen=True)
class AnnotatorOutput:
    tokens: tuple[TokenAnnotation, ...]
    spans: tuple[SpanAnnotation, ...]


class Annotator(Protocol):
    name: str
    thread_safe: bool

    def annotate(self, claim: str) -> AnnotatorOutput: ...


_TOKEN_RE = re.compile(r"\w+(?:['’]\w+)*|[^\w\s]")
_CLAUSE_END = frozenset(".;:!?")
_NOMINAL = frozenset({"DET", "ADJ", "NUM", "NOUN", "PROPN"})
_VERBAL = frozenset({"VERB", "AUX"})
_MONTHS = frozenset(
    "january february march april may june july august september october november december".split()
)
_NUMBER_WORDS = frozenset(
    "one two three four five six seven eight nine ten eleven twelve twenty thirty "
    "forty fifty hundred thousand million billion".split()
)
_ADJ_SUFFIXES = ("ous", "ful", "ive", "able", "ible", "less", "ish", "ical", "ic")
_VERB_SUFFIXES = ("ize", "izes", "ized", "izing", "ise", "ises", "ised", "ify", "ifies", "ified")
_ENTITY_CONNECTORS = frozenset({"of", "the", "de", "and", "&"})


def _tokenize(claim: str) -> list[tuple[str, int, int]]:
    return [(m.group(), m.start(), m.end()) for m in _TOKEN_RE.finditer(claim)]


def _verb_base_candidates(word: str) -> Iterable[str]:
    yield word
    if word.endswith("ies") and len(word) > 4:
        yield word[:-3] + "y"
    if word.endswith("es"):
        yield word[:-2]
    if word.endswith("s"):
        yield word[:-1]
    if word.endswith("ied"):
        yield word[:-3] + "y"
    if word.endswith("ed"):
        yield word[:-2]
        yield word[:-1]
        if len(word) > 4 and word[-3] == word[-4]:
            yield word[:-3]
    if word.endswith("ing") and len(word) > 5:
        yield word[:-3]
        yield word[:-3] + "e"
        if word[-4] == word[-5]:
            yield word[:-4]


def _irregular_forms() -> frozenset[str]:
    from fecorrect.resources import read_lines

    forms: set[str] = set()
    for line in read_lines("irregular_verbs.txt"):
        forms.update(line.split()[1:])
    return frozenset(forms)


class BuiltinAnnotator:
    """Deterministic annotator: closed-class lexicons, suffix rules, chunk rules.

    Contracted negations ("won't", "doesn't") stay single tokens tagged AUX so
    the negation lexicon matches them directly.
    """

    name = "builtin"
    thread_safe = True

    def __init__(self) -> None:
        self.determiners = lexicon("determiners")
        self.pronouns = lexicon("pronouns")
        self.adpositions = lexicon("adpositions")
        self.conjunctions = lexicon("conjunctions")
        self.subordinators = lexicon("subordinators")
        self.auxiliaries = lexicon("auxiliaries")
        self.adjectives = lexicon("adjectives")
        self.adverbs = lexicon("adverbs")
        self.verbs = lexicon("verbs") | frozenset(
            line.split()[0] for line in _irregular_lines()
        )
        self.irregular_forms = _irregular_forms()

    # -- tagging -----------------------------------------------------------

    def _closed_class(self, low: str) -> str | None:
        if low in ("not", "n't"):
            return "PART"
        if low == "never":
            return "ADV"
        if low in self.auxiliaries:
            return "AUX"
        if low in self.determiners:
            return "DET"
        if low in self.pronouns:
            return "PRON"
        if low == "to":
            return "PART"
        if low in self.adpositions:
            return "ADP"
        if low in self.conjunctions:
            return "CCONJ"
        if low in self.subordinators:
            return "SCONJ"
        return None

    def _is_verb_form(self, low: str) -> bool:
        if low in self.irregular_forms:
            return True
        if low.endswith(_VERB_SUFFIXES):
            return True
        return any(base in self.verbs for base in _verb_base_candidates(low))

    def _tag(self, words: Sequence[str]) -> list[str]:
        tags: list[str] = []
        for i, word in enumerate(words):
            low = word.lower()
            prev = tags[i - 1] if i else None
            if not re.match(r"\w", word):
                tags.append("PUNCT")
                continue
            if word[0].isdigit() or low in _NUMBER_WORDS:
                tags.append("NUM")
                continue
            if len(word) > 1 and word.isupper():
                # acronyms ("US", "TV") are names, not pronouns
                tags.append("PROPN")
                continue
            closed = self._closed_class(low)
            initial = i == 0 or (prev == "PUNCT" and words[i - 1] in "\"'“‘(")
            if closed is not None:
                tags.append(closed)
                continue
            if word[0].isupper():
                tags.append("PROPN")
                continue
            if low in self.adverbs or (low.endswith("ly") and len(low) > 4):
                tags.append("ADV")
            elif low in self.adjectives:
                tags.append("ADJ")
            elif prev in ("DET", "ADJ"):
                if low.endswith("ed") or low.endswith(_ADJ_SUFFIXES):
                    tags.append("ADJ")
                else:
                    tags.append("NOUN")
            elif prev == "NOUN" and ("VERB" in tags or "AUX" in tags):
                # second noun of a compound after the main verb ("heart attacks")
                tags.append("NOUN")
            elif self._is_verb_form(low) or (len(low) > 4 and low.endswith(("ed", "ing"))):
                tags.append("VERB")
            elif low.endswith(_ADJ_SUFFIXES):
                tags.append("ADJ")
            else:
                tags.append("NOUN")
        # a noun followed by an -s word and then a determiner/preposition is
        # usually subject + verb ("The company owns the ...")
        for i in range(1, len(words) - 1):
            if "VERB" in tags[:i] or "AUX" in tags[:i]:
                break
            if (
                tags[i] == "NOUN"
                and words[i].endswith("s")
                and not words[i].endswith(("ss", "us", "is"))
                and tags[i - 1] in ("NOUN", "PROPN")
                and tags[i + 1] in ("DET", "ADP", "PRON", "NUM", "PROPN")
            ):
                tags[i] = "VERB"
        return tags

    # -- chunking ----------------------------------------------------------

    def annotate(self, claim: str) -> AnnotatorOutput:
        if not claim or not claim.strip():
            raise ValueError("cannot annotate an empty claim")
        raw = _tokenize(claim)
        words = [w for w, _, _ in raw]
        tags = self._tag(words)
        tokens = tuple(
            TokenAnnotation(w, t, s, e) for (w, s, e), t in zip(raw, tags)
        )
        spans: list[SpanAnnotation] = []
        seen: set[tuple[int, int]] = set()

        def add(label: str, i: int, j: int) -> None:
            # tokens[i:j]; identical offsets keep the first label
            key = (tokens[i].char_start, tokens[j - 1].char_end)
            if key not in seen:
                seen.add(key)
                spans.append(SpanAnnotation(label, *key))

        chunks = self._noun_chunks(tokens)
        for i, j in chunks:
            add("NOUN_CHUNK", i, j)
        for i, j in self._entities(tokens):
            add("NAMED_ENTITY", i, j)
        for i, j in self._noun_phrases(tokens, chunks):
            add("NP", i, j)
        for i, j in self._verb_phrases(tokens):
            add("VP", i, j)
        spans.sort(key=lambda s: (s.char_start, -(s.char_end - s.char_start)))
        return AnnotatorOutput(tokens, tuple(spans))

    @staticmethod
    def _noun_chunks(tokens: Sequence[TokenAnnotation]) -> list[tuple[int, int]]:
        out = []
        i = 0
        n = len(tokens)
        while i < n:
            if tokens[i].pos not in _NOMINAL:
                i += 1
                continue
            j = i
            while j < n and tokens[j].pos in _NOMINAL:
                j += 1
            end = j
            while end > i and tokens[end - 1].pos == "DET":
                end -= 1
            if any(t.pos != "DET" for t in tokens[i:end]):
                out.append((i, end))
            i = j
        return out

    @staticmethod
    def _entities(tokens: Sequence[TokenAnnotation]) -> list[tuple[int, int]]:
        out = []
        i = 0
        n = len(tokens)
        while i < n:
            tok = tokens[i]
            # capitalized mid-sentence determiners open titles ("The Tempest")
            title = (
                tok.pos == "DET"
                and i > 0
                and tok.text[0].isupper()
                and i + 1 < n
                and tokens[i + 1].pos == "PROPN"
            )
            if tok.pos != "PROPN" and not title:
                i += 1
                continue
            j = i + 1
            while j < n:
                if tokens[j].pos in ("PROPN",):
                    j += 1
                elif (
                    tokens[j].text.lower() in _ENTITY_CONNECTORS
                    and j + 1 < n
                    and tokens[j + 1].pos == "PROPN"
                ):
                    j += 2
                else:
                    break
            # dates: "February 14th, 1860"
            if tok.text.lower() in _MONTHS and j < n and tokens[j].pos == "NUM":
                j += 1
                if j + 1 < n and tokens[j].text == "," and tokens[j + 1].pos == "NUM":
                    j += 2
            out.append((i, j))
            i = j
        return out

    @staticmethod
    def _noun_phrases(
        tokens: Sequence[TokenAnnotation], chunks: Sequence[tuple[int, int]]
    ) -> list[tuple[int, int]]:
        """Chunks extended by "of"-attachments and parentheticals."""
        starts = {i: j for i, j in chunks}
        out = []
        n = len(tokens)
        for i, j in chunks:
            end = j
            while end < n:
                if tokens[end].text.lower() == "of" and end + 1 in starts:
                    end = starts[end + 1]
                elif tokens[end].text == "(":
                    k = end + 1
                    while k < n and tokens[k].text != ")":
                        k += 1
                    if k >= n:
                        break
                    end = k + 1
                else:
                    break
            if end != j:
                out.append((i, end))
        return out

    @staticmethod
    def _verb_phrases(tokens: Sequence[TokenAnnotation]) -> list[tuple[int, int]]:
        out = []
        n = len(tokens)
        for i, tok in enumerate(tokens):
            if tok.pos not in _VERBAL:
                continue
            if i and tokens[i - 1].pos in _VERBAL | {"PART"}:
                continue
            j = i + 1
            while j < n and not (tokens[j].pos == "PUNCT" and tokens[j].text in _CLAUSE_END):
                j += 1
            while j > i + 1 and tokens[j - 1].pos == "PUNCT":
                j -= 1
            out.append((i, j))
        return out


def _irregular_lines() -> list[str]:
    from fecorrect.resources import read_lines

    return read_lines("irregular_verbs.txt")


class SpacyAnnotator:
    """Adapter over spaCy's tagger, noun chunker and NER.

    spaCy pipelines are not documented as thread-safe, so calls are
    serialized with a lock.
    """

    name = "spacy"
    thread_safe = True

    def __init__(self, model: str = "en_core_web_sm") -> None:
        try:
            import spacy  # type: ignore[import-not-found]
        except ImportError as exc:
            raise AnnotatorUnavailable("spaCy is not installed") from exc
        try:
            self._nlp = spacy.load(model)
        except OSError as exc:
            raise AnnotatorUnavailable(f"spaCy model {model!r} is not available") from exc
        self._lock = threading.Lock()

    def annotate(self, claim: str) -> AnnotatorOutput:
        with self._lock:
            doc = self._nlp(claim)
        tokens = tuple(
            TokenAnnotation(t.text, t.pos_, t.idx, t.idx + len(t.text)) for t in doc
        )
        spans = [SpanAnnotation("NOUN_CHUNK", c.start_char, c.end_char) for c in doc.noun_chunks]
        spans += [SpanAnnotation("NAMED_ENTITY", e.start_char, e.end_char) for e in doc.ents]
        for tok in doc:
            if tok.pos_ in ("VERB", "AUX") and tok.dep_ in ("ROOT", "conj", "ccomp", "relcl", "advcl"):
                sub = list(tok.subtree)
                left = min((t for t in sub if t.i >= tok.i or t.dep_ in ("aux", "neg", "auxpass")), key=lambda t: t.i)
                right = max(sub, key=lambda t: t.i)
                while right.i > left.i and right.is_punct:
                    right = doc[right.i - 1]
                spans.append(SpanAnnotation("VP", left.idx, right.idx + len(right.text)))
        spans.sort(key=lambda s: (s.char_start, -(s.char_end - s.char_start)))
        return AnnotatorOutput(tokens, tuple(spans))


_ANNOTATORS: dict[str, Annotator] = {}
_ANNOTATORS_LOCK = threading.Lock()


def get_annotator(name: str = "builtin") -> Annotator:
    with _ANNOTATORS_LOCK:
        if name not in _ANNOTATORS:
            if name == "builtin":
                _ANNOTATORS[name] = BuiltinAnnotator()
            elif name == "spacy":
                _ANNOTATORS[name] = SpacyAnnotator()
            else:
                raise ValueError(f"unknown annotator {name!r}")
        return _ANNOTATORS[name]


def annotate(claim: str, annotator: str | Annotator = "builtin") -> AnnotatorOutput:
    if isinstance(annotator, str):
        annotator = get_annotator(annotator)
    return annotator.annotate(claim)


_TOKEN_KINDS = {
    "NOUN": AnswerKind.NOUN,
    "PROPN": AnswerKind.NOUN,
    "VERB": AnswerKind.VERB,
    "ADJ": AnswerKind.ADJ,
    "ADV": AnswerKind.ADV,
}


def normalize_unit(text: str) -> str:
    return " ".join(text.lower().split())


def _is_negation(word: str, negations: frozenset[str]) -> bool:
    low = word.lower().replace("’", "'")
    # a fused contraction ("didn't") carries the lexicon's "n't"
    return low in negations or (low.endswith("n't") and "n't" in negations)


def extract_claim_answers(
    claim: str,
    annotation: AnnotatorOutput,
    negation_lexicon: Iterable[str] | None = None,
) -> list[ClaimAnswer]:
    """Harvest claim answers from an annotation.

    Candidates are the union of all spans, open-class tokens and negation
    tokens, ordered by (start, longest first) and deduplicated on
    lowercased, whitespace-collapsed text keeping the first occurrence. At
    identical offsets negation wins over spans, and spans over tokens.
    """
    negations = frozenset(
        t.lower() for t in (lexicon("negation") if negation_lexicon is None else negation_lexicon)
    )
    found: list[tuple[int, int, int, AnswerKind]] = []
    for tok in annotation.tokens:
        if _is_negation(tok.text, negations):
            found.append((tok.char_start, tok.char_end, 0, AnswerKind.NEGATION))
    for span in annotation.spans:
        found.append((span.char_start, span.char_end, 1, AnswerKind(span.label)))
    for tok in annotation.tokens:
        kind = _TOKEN_KINDS.get(tok.pos)
        if kind is not None:
            found.append((tok.char_start, tok.char_end, 2, kind))

    # stable sort: (start, longest first, source priority)
    order = sorted(range(len(found)), key=lambda k: (found[k][0], found[k][0] - found[k][1], found[k][2], k))
    answers: list[ClaimAnswer] = []
    seen: set[str] = set()
    for k in order:
        start, end, _, kind = found[k]
        text = claim[start:end]
        key = normalize_unit(text)
        if not key or key in seen:
            continue
        seen.add(key)
        answers.append(ClaimAnswer(text, start, end, kind))
    return answers
