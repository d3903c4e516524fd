"""Rule-based conversion of yes/no question-answer pairs to statements.

``Does Fuller House air on Netflix?`` + YES -> ``Fuller House airs on Netflix.``

The subject is found with a shallow rule (names, determiner phrases, bare
nouns) instead of a constituency parse. Do-support questions drop the
auxiliary and re-inflect the main verb; a NO answer inserts ``not`` after
the auxiliary, or restores ``does/do/did not`` before the base verb.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

from fecorrect.errors import BackendError, UnparseableQuestion
from fecorrect.resources import lexicon, read_lines


class YesNo(str, enum.Enum):
    YES = "YES"
    NO = "NO"


@dataclass(frozen=True)
class BooleanQA:
    question: str
    answer: YesNo

    def __post_init__(self) -> None:
        q = self.question.strip()
        if not q.endswith("?"):
            raise ValueError(f"boolean question must end with '?': {self.question!r}")
        first = q.split()[0].lower() if q.split() else ""
        if first not in auxiliaries():
            raise ValueError(f"boolean question must start with an auxiliary: {self.question!r}")
        if not isinstance(self.answer, YesNo):
            object.__setattr__(self, "answer", YesNo(str(self.answer).upper()))


@lru_cache(maxsize=1)
def auxiliaries() -> frozenset[str]:
    return lexicon("question_auxiliaries")


@lru_cache(maxsize=1)
def _irregular() -> dict[str, tuple[str, str]]:
    table = {}
    for line in read_lines("irregular_verbs.txt"):
        base, past, participle = line.split()
        table[base] = (past, participle)
    return table


@lru_cache(maxsize=1)
def _participles() -> frozenset[str]:
    return frozenset(p for _, p in _irregular().values()) | frozenset(
        p for p, _ in _irregular().values()
    )


_THIRD_SINGULAR_IRREGULAR = {"be": "is", "have": "has", "do": "does", "go": "goes"}
_VOWELS = set("aeiou")


def inflect_third_singular(verb_base: str) -> str:
    verb = verb_base
    if verb in _THIRD_SINGULAR_IRREGULAR:
        return _THIRD_SINGULAR_IRREGULAR[verb]
    if len(verb) > 1 and verb.endswith("y") and verb[-2] not in _VOWELS:
        return verb[:-1] + "ies"
    if verb.endswith(("s", "x", "z", "ch", "sh", "o")):
        return verb + "es"
    return verb + "s"


def inflect_past(verb_base: str) -> str:
    verb = verb_base
    if verb in _irregular():
        return _irregular()[verb][0]
    if verb.endswith("e"):
        return verb + "d"
    if len(verb) > 1 and verb.endswith("y") and verb[-2] not in _VOWELS:
        return verb[:-1] + "ied"
    # short consonant-vowel-consonant stems double the final consonant
    if (
        len(verb) in (3, 4)
        and verb[-1] not in _VOWELS | set("wxy")
        and verb[-2] in _VOWELS
        and verb[-3] not in _VOWELS
        and (len(verb) == 3 or verb[-4] not in _VOWELS)
    ):
        return verb + verb[-1] + "ed"
    return verb + "ed"


_DETERMINERS = frozenset(
    "a an the this that these those his her its their my our your some any every each no".split()
)
_PRONOUNS = frozenset("i you he she it we they there this that".split())
_PREPOSITIONS = frozenset(
    "in on at by for with from to into onto over under about above below after before "
    "during until since between among through against within without across along "
    "around behind near off out of than like as".split()
)
_CONNECTORS = frozenset({"of", "the", "de", "and", "&", "'s"})
_DO = frozenset({"do", "does", "did"})


def _is_verb_like(word: str) -> bool:
    low = word.lower()
    if low in _participles():
        return True
    if low in lexicon("verbs") or low in _irregular():
        return True
    return len(low) > 4 and low.endswith(("ed", "ing"))


def _is_adjective(word: str) -> bool:
    low = word.lower()
    return low in lexicon("adjectives") or low.endswith(("ous", "ful", "ive", "able", "ible", "less"))


def _is_predicate_start(word: str) -> bool:
    low = word.lower()
    return (
        low in _DETERMINERS
        or low in _PREPOSITIONS
        or low == "not"
        or word[0].isdigit()
        or _is_verb_like(word)
        or _is_adjective(word)
    )


def _name_end(words: Sequence[str], j: int) -> int:
    """End of a capitalized name starting at ``j`` (connectors, parentheticals)."""
    n = len(words)
    j += 1
    while j < n:
        w = words[j]
        if w[0].isupper() or (w[0].isdigit() and words[j - 1][0].isupper()):
            j += 1
        elif w.lower() in _CONNECTORS and j + 1 < n and words[j + 1][0].isupper():
            j += 2
        elif w.startswith("("):
            k = j
            while k < n and not words[k].endswith(")"):
                k += 1
            if k >= n:
                break
            j = k + 1
        else:
            break
    return j


def _subject_end(words: Sequence[str], do_support: bool) -> int:
    """Index one past the subject noun phrase in ``words`` (aux removed)."""
    n = len(words)
    if n == 0:
        raise UnparseableQuestion("no subject after the auxiliary")
    low = words[0].lower()
    if low in _PRONOUNS and low not in ("this", "that"):
        return 1
    j = 1 if low in _DETERMINERS and n > 1 else 0
    if words[j][0].isupper():
        return _name_end(words, j)
    if do_support:
        # the bare base verb follows the subject
        k = next((i for i in range(j + 1, n) if _is_verb_like(words[i])), None)
        if k is None:
            k = next(
                (i - 1 for i in range(j + 2, n) if words[i].lower() in _DETERMINERS | _PREPOSITIONS),
                n - 1,
            )
        if k <= j:
            raise UnparseableQuestion("no main verb after the subject")
        return k
    # adjectives may premodify the head noun; leave at least one predicate word
    while j < n - 1 and _is_adjective(words[j]) and not _is_predicate_start(words[j + 1]):
        j += 1
    j += 1
    while j < n - 1 and not _is_predicate_start(words[j]) and words[j][0].islower():
        j += 1
    return j


def _split_question(question: str) -> tuple[str, list[str], str]:
    q = question.strip()
    if not q.endswith("?"):
        raise UnparseableQuestion(f"not a question: {question!r}")
    words = q[:-1].split()
    if len(words) < 2:
        raise UnparseableQuestion(f"too short: {question!r}")
    aux = words[0].lower()
    if aux not in auxiliaries():
        raise UnparseableQuestion(f"no leading auxiliary: {question!r}")
    return aux, words[1:], q


def _capitalize(sentence: str) -> str:
    return sentence[:1].upper() + sentence[1:]


def declarativize(qa: BooleanQA, *, emphatic: bool = False) -> str:
    """Statement asserting (YES) or denying (NO) a boolean question.

    With ``emphatic=True`` a positive do-support answer keeps the auxiliary
    ("Fuller House does air on Netflix."), which is the NO form minus "not".
    """
    aux, words, _ = _split_question(qa.question)
    do_support = aux in _DO
    end = _subject_end(words, do_support)
    if end >= len(words):
        raise UnparseableQuestion(f"no predicate after the subject: {qa.question!r}")
    subject, rest = words[:end], words[end:]
    negative = qa.answer is YesNo.NO
    if do_support:
        verb = rest[0]
        if negative or emphatic:
            middle = [aux, "not", verb] if negative else [aux, verb]
        elif aux == "does":
            middle = [inflect_third_singular(verb.lower()) if verb.islower() else verb]
        elif aux == "did":
            middle = [inflect_past(verb.lower()) if verb.islower() else verb]
        else:
            middle = [verb]
        body = subject + middle + rest[1:]
    else:
        body = subject + ([aux, "not"] if negative else [aux]) + rest
    sentence = " ".join(body)
    sentence = re.sub(r"\s+([,.;:])", r"\1", sentence)
    return _capitalize(sentence.rstrip(" ?.")) + "."


_YES = frozenset({"yes", "true", "correct", "yeah", "yep"})
_NO = frozenset({"no", "false", "incorrect", "nope"})


def parse_yes_no(answer: str) -> YesNo | None:
    low = answer.strip().strip(".!").lower()
    if low in _YES:
        return YesNo.YES
    if low in _NO:
        return YesNo.NO
    return None


class RuleBasedQA2Claim:
    """QA-to-claim generator for boolean answers, with optional fallback.

    Prompts use the default ``"{question} \\n {answer}"`` layout. Non-boolean
    pairs go to ``fallback``; without one they raise BackendError.
    """

    name = "qa2claim-rules"
    beam_width = 1

    def __init__(self, fallback=None):
        self.fallback = fallback
        self.thread_safe = fallback is None or bool(getattr(fallback, "thread_safe", False))

    def generate(self, inputs: Sequence[str], beam_width: int | None = None) -> list[str]:
        from fecorrect.backends import parse_prompt

        out: list[str | None] = []
        deferred: list[int] = []
        for i, prompt in enumerate(inputs):
            question, answer = parse_prompt(prompt)
            verdict = parse_yes_no(answer)
            statement = None
            if verdict is not None:
                try:
                    statement = declarativize(BooleanQA(question, verdict))
                except (UnparseableQuestion, ValueError):
                    statement = None
            out.append(statement)
            if statement is None:
                deferred.append(i)
        if deferred:
            if self.fallback is None:
                raise BackendError(f"{self.name}: cannot convert {inputs[deferred[0]]!r}")
            fresh = self.fallback.generate([inputs[i] for i in deferred], beam_width)
            for i, text in zip(deferred, fresh):
                out[i] = text
        return out  # type: ignore[return-value]
