"""Correction pipeline: extract -> ask -> answer -> restate -> score -> select."""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import IO, Iterable, Sequence

from fecorrect import backends as bk
from fecorrect.errors import BackendError, FECError
from fecorrect.extract import annotate, extract_claim_answers
from fecorrect.scoring import score_candidates, select_correction
from fecorrect.types import (
    INPUT_CLAIM,
    CandidateCorrection,
    CorrectionOutput,
    CorrectionTask,
    PipelineConfig,
)

log = logging.getLogger(__name__)


def _ws(text: str) -> str:
    return " ".join(text.split())


def build_candidates(
    generated: Sequence[CandidateCorrection], claim: str, dedupe: bool = True
) -> list[CandidateCorrection]:
    """Append the input-claim candidate and optionally merge duplicates.

    Duplicates are detected after whitespace normalization and keep the first
    provenance, except that a generated candidate reproducing the claim is
    folded into the single INPUT_CLAIM entry.
    """
    input_candidate = CandidateCorrection(claim, INPUT_CLAIM)
    if not dedupe:
        return [*generated, input_candidate]
    claim_key = _ws(claim)
    seen = {claim_key}
    out = []
    for cand in generated:
        key = _ws(cand.text)
        if key in seen:
            continue
        seen.add(key)
        out.append(cand)
    out.append(input_candidate)
    return out


def run_pipeline(
    task: CorrectionTask,
    backends: bk.BackendSet,
    config: PipelineConfig | None = None,
) -> CorrectionOutput:
    config = config or PipelineConfig()
    annotation = annotate(task.claim, config.annotator)
    answers = extract_claim_answers(task.claim, annotation, config.negation_lexicon)
    if config.max_candidates is not None:
        answers = answers[: config.max_candidates]

    questions = bk.generate_questions(
        backends.qg, answers, task.claim, config.qg_template, config.beam_width
    )
    evidence_answers = bk.answer_questions(
        backends.qa, questions, task.evidence, config.qa_template,
        config.qa_lowercase, config.beam_width,
    )
    generated = bk.qa_to_claims(
        backends.qa2claim, evidence_answers, config.qa2claim_template, config.beam_width
    )
    candidates = build_candidates(generated, task.claim, config.dedupe)
    scored = score_candidates(
        candidates, task.claim, task.evidence, backends.entailment, config.scorer_spec
    )
    winner, edited = select_correction(scored)
    return CorrectionOutput(
        task_id=task.id,
        correction=scored[winner].candidate.text,
        edited=edited,
        trace=tuple(scored),
        winner_index=winner,
    )


def _error_output(task: CorrectionTask, exc: Exception) -> CorrectionOutput:
    if isinstance(exc, BackendError):
        record = exc.to_record()
    else:
        record = {"type": type(exc).__name__, "stage": None, "message": str(exc), "provenance": None}
    return CorrectionOutput(task.id, None, False, error=record)


def run_batch(
    tasks: Sequence[CorrectionTask],
    backends: bk.BackendSet,
    config: PipelineConfig | None = None,
    parallelism: int = 1,
    fail_fast: bool = False,
) -> list[CorrectionOutput]:
    """Correct every task; results come back in input order.

    Task failures become error records unless ``fail_fast`` is set, in which
    case the first failure (in input order) is raised. Backends that are not
    thread-safe force sequential execution.
    """
    if parallelism < 1:
        raise ValueError("parallelism must be >= 1")
    config = config or PipelineConfig()

    def one(task: CorrectionTask) -> CorrectionOutput:
        try:
            return run_pipeline(task, backends, config)
        except FECError as exc:
            if fail_fast:
                raise
            log.warning("task %s failed: %s", task.id, exc)
            return _error_output(task, exc)

    if parallelism == 1 or len(tasks) <= 1:
        return [one(t) for t in tasks]
    if not backends.thread_safe:
        log.warning("backends are not thread-safe; running %d tasks sequentially", len(tasks))
        return [one(t) for t in tasks]
    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        futures = [pool.submit(one, t) for t in tasks]
        try:
            return [f.result() for f in futures]
        except BaseException:
            for f in futures:
                f.cancel()
            raise


def dumps_output(output: CorrectionOutput) -> str:
    return json.dumps(output.to_dict(), ensure_ascii=False)


def write_outputs(outputs: Iterable[CorrectionOutput], fh: IO[str]) -> int:
    n = 0
    for out in outputs:
        fh.write(dumps_output(out) + "\n")
        n += 1
    return n
