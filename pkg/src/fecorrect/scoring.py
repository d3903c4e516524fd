"""Candidate scoring and selection.

Each candidate statement is scored as a weighted sum of an entailment
probability (evidence as premise, candidate as hypothesis) and ROUGE-1 F1
against the input claim. The correction is the argmax; ties go to the input
claim, then to the lowest index.
"""

from __future__ import annotations

import re
from collections import Counter
from functools import lru_cache
from typing import Sequence

from nltk.stem.porter import PorterStemmer

from fecorrect.backends import EntailmentScorer, entail
from fecorrect.errors import BackendError, MissingInputClaim
from fecorrect.types import CandidateCorrection, ScoredCandidate, ScorerSpec

_NON_ALNUM = re.compile(r"[^a-z0-9]+")
_stemmer = PorterStemmer()


@lru_cache(maxsize=65536)
def _stem(token: str) -> str:
    return _stemmer.stem(token)


def tokenize_for_rouge(text: str, stemming: bool = True) -> list[str]:
    tokens = [t for t in _NON_ALNUM.split(text.lower()) if t]
    if stemming:
        tokens = [_stem(t) for t in tokens]
    return tokens


def rouge1(candidate: str, reference: str, stemming: bool = True) -> float:
    """Unigram F1 between two texts (multiset overlap)."""
    cand = Counter(tokenize_for_rouge(candidate, stemming))
    ref = Counter(tokenize_for_rouge(reference, stemming))
    n_cand = sum(cand.values())
    n_ref = sum(ref.values())
    if n_cand == 0 and n_ref == 0:
        return 1.0
    overlap = sum((cand & ref).values())
    if overlap == 0:
        return 0.0
    precision = overlap / n_cand
    recall = overlap / n_ref
    return 2 * precision * recall / (precision + recall)


def score_candidates(
    candidates: Sequence[CandidateCorrection],
    claim: str,
    evidence: str,
    scorer: EntailmentScorer | None,
    spec: ScorerSpec | None = None,
) -> list[ScoredCandidate]:
    """Score every candidate; components absent from ``spec`` are recorded as None."""
    spec = spec or ScorerSpec()
    if not candidates:
        raise ValueError("no candidates to score")
    use_entailment = spec.uses("entailment")
    if use_entailment and scorer is None:
        raise ValueError("scorer spec needs entailment but no scorer was given")
    scored = []
    for cand in candidates:
        components: dict[str, float] = {}
        if spec.uses("rouge1"):
            components["rouge1"] = rouge1(cand.text, claim, stemming=spec.stemming)
        if use_entailment:
            try:
                components["entailment"] = entail(scorer, evidence, cand.text)
            except BackendError as exc:
                raise exc.with_context("entailment", cand.provenance_record())
        total = 0.0
        for name, weight in spec.components:
            total += weight * components[name]
        scored.append(
            ScoredCandidate(
                cand,
                components.get("entailment"),
                components.get("rouge1"),
                total,
            )
        )
    return scored


def select_correction(scored: Sequence[ScoredCandidate]) -> tuple[int, bool]:
    """Return ``(winner_index, edited)``."""
    inputs = [i for i, s in enumerate(scored) if s.candidate.is_input_claim]
    if not inputs:
        raise MissingInputClaim("candidate list has no INPUT_CLAIM entry")
    if len(inputs) > 1:
        raise ValueError("candidate list has more than one INPUT_CLAIM entry")
    best = max(s.total for s in scored)
    if scored[inputs[0]].total == best:
        return inputs[0], False
    for i, s in enumerate(scored):
        if s.total == best:
            return i, True
    raise AssertionError("unreachable")  # pragma: no cover
