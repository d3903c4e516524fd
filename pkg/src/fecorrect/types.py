"""Domain records passed between pipeline stages.

All records are frozen dataclasses; the pipeline never mutates them after
construction, which is what makes batch execution order-independent.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Any, Optional, Union


class Label(str, enum.Enum):
    SUPPORTS = "SUPPORTS"
    REFUTES = "REFUTES"


class AnswerKind(str, enum.Enum):
    NOUN_CHUNK = "NOUN_CHUNK"
    NAMED_ENTITY = "NAMED_ENTITY"
    NOUN = "NOUN"
    VERB = "VERB"
    ADJ = "ADJ"
    ADV = "ADV"
    NP = "NP"
    VP = "VP"
    NEGATION = "NEGATION"


@dataclass(frozen=True)
class CorrectionTask:
    id: str
    claim: str
    evidence: str
    gold_correction: Optional[str] = None
    label: Optional[Label] = None

    def __post_init__(self) -> None:
        if not self.claim or not self.claim.strip():
            raise ValueError(f"task {self.id!r}: claim is empty")
        if not self.evidence or not self.evidence.strip():
            raise ValueError(f"task {self.id!r}: evidence is empty")
        if self.label is not None and not isinstance(self.label, Label):
            object.__setattr__(self, "label", Label(self.label))


@dataclass(frozen=True)
class ClaimAnswer:
    text: str
    char_start: int
    char_end: int
    kind: AnswerKind

    def __post_init__(self) -> None:
        if not self.text:
            raise ValueError("claim answer text is empty")
        if not 0 <= self.char_start < self.char_end:
            raise ValueError(f"bad offsets {self.char_start}:{self.char_end}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "text": self.text,
            "kind": self.kind.value,
            "char_start": self.char_start,
            "char_end": self.char_end,
        }


@dataclass(frozen=True)
class GeneratedQuestion:
    text: str
    source_answer: ClaimAnswer


@dataclass(frozen=True)
class EvidenceAnswer:
    text: str
    source_question: GeneratedQuestion


class _InputClaim:
    """Sentinel provenance for the unedited input claim."""

    _instance: "_InputClaim | None" = None

    def __new__(cls) -> "_InputClaim":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INPUT_CLAIM"

    def __reduce__(self):
        return (_InputClaim, ())


INPUT_CLAIM = _InputClaim()


@dataclass(frozen=True)
class Provenance:
    claim_answer: ClaimAnswer
    question: GeneratedQuestion
    evidence_answer: EvidenceAnswer

    def to_dict(self) -> dict[str, Any]:
        return {
            "claim_answer": self.claim_answer.to_dict(),
            "question": self.question.text,
            "evidence_answer": self.evidence_answer.text,
        }


@dataclass(frozen=True)
class CandidateCorrection:
    text: str
    provenance: Union[Provenance, _InputClaim]

    @property
    def is_input_claim(self) -> bool:
        return self.provenance is INPUT_CLAIM

    def provenance_record(self) -> Any:
        if self.is_input_claim:
            return "INPUT_CLAIM"
        return self.provenance.to_dict()


@dataclass(frozen=True)
class ScoredCandidate:
    candidate: CandidateCorrection
    entailment: Optional[float]
    rouge1: Optional[float]
    total: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "text": self.candidate.text,
            "provenance": self.candidate.provenance_record(),
            "entailment": self.entailment,
            "rouge1": self.rouge1,
            "total": self.total,
        }


@dataclass(frozen=True)
class CorrectionOutput:
    task_id: str
    correction: Optional[str]
    edited: bool
    trace: tuple[ScoredCandidate, ...] = ()
    winner_index: Optional[int] = None
    error: Optional[dict[str, Any]] = None

    @property
    def ok(self) -> bool:
        return self.error is None

    def to_dict(self) -> dict[str, Any]:
        if self.error is not None:
            return {"task_id": self.task_id, "error": self.error}
        return {
            "task_id": self.task_id,
            "correction": self.correction,
            "edited": self.edited,
            "winner_index": self.winner_index,
            "trace": [item.to_dict() for item in self.trace],
        }


@dataclass(frozen=True)
class ScorerSpec:
    """Weighted sum of scoring components.

    ``components`` pairs a component name (``entailment`` or ``rouge1``) with
    its weight. The default reproduces entailment + ROUGE-1 with unit weights.
    """

    components: tuple[tuple[str, float], ...] = (("entailment", 1.0), ("rouge1", 1.0))
    stemming: bool = True

    def __post_init__(self) -> None:
        comps = tuple((str(name), float(weight)) for name, weight in self.components)
        if not comps:
            raise ValueError("scorer spec needs at least one component")
        for name, weight in comps:
            if name not in ("entailment", "rouge1"):
                raise ValueError(f"unknown scoring component {name!r}")
            if not math.isfinite(weight):
                raise ValueError(f"weight for {name!r} is not finite")
        object.__setattr__(self, "components", comps)

    def uses(self, name: str) -> bool:
        return any(n == name for n, _ in self.components)


def _default_negations() -> frozenset[str]:
    from fecorrect.resources import lexicon

    return lexicon("negation")


@dataclass(frozen=True)
class PipelineConfig:
    beam_width: int = 4
    scorer_spec: ScorerSpec = field(default_factory=ScorerSpec)
    negation_lexicon: frozenset[str] = field(default_factory=_default_negations)
    max_candidates: Optional[int] = None
    dedupe: bool = True
    annotator: str = "builtin"
    qg_template: str = "{answer} \\n {context}"
    qa_template: str = "{question} \\n {context}"
    qa2claim_template: str = "{question} \\n {answer}"
    qa_lowercase: bool = True

    def __post_init__(self) -> None:
        if self.beam_width < 1:
            raise ValueError("beam_width must be >= 1")
        if self.max_candidates is not None and self.max_candidates < 1:
            raise ValueError("max_candidates must be positive when set")
        object.__setattr__(
            self, "negation_lexicon", frozenset(t.lower() for t in self.negation_lexicon)
        )
