"""Zero-shot factual error correction via question answering and entailment ranking."""

from fecorrect.backends import BackendSet
from fecorrect.core import run_batch, run_pipeline
from fecorrect.extract import annotate, extract_claim_answers
from fecorrect.scoring import rouge1, score_candidates, select_correction
from fecorrect.types import (
    INPUT_CLAIM,
    AnswerKind,
    CandidateCorrection,
    ClaimAnswer,
    CorrectionOutput,
    CorrectionTask,
    Label,
    PipelineConfig,
    ScoredCandidate,
    ScorerSpec,
)

__version__ = "0.1.0"

__all__ = [
    "INPUT_CLAIM",
    "AnswerKind",
    "BackendSet",
    "CandidateCorrection",
    "ClaimAnswer",
    "CorrectionOutput",
    "CorrectionTask",
    "Label",
    "PipelineConfig",
    "ScoredCandidate",
    "ScorerSpec",
    "annotate",
    "extract_claim_answers",
    "rouge1",
    "run_batch",
    "run_pipeline",
    "score_candidates",
    "select_correction",
]
