"""Generation and entailment backends.

The pipeline talks to three text generators (question generation, question
answering, QA-to-claim) and one entailment scorer. All of them sit behind
two small protocols so that HTTP model servers, cached wrappers and the
deterministic mocks used in tests are interchangeable.

Wire protocol (UTF-8 JSON over HTTP)::

    POST /v1/generate  {"model": str, "inputs": [str, ...], "beam_width": int}
                    -> {"outputs": [str, ...]}            # same length/order
    POST /v1/entail    {"premise": str, "hypothesis": str}
                    -> {"probability": float in [0, 1]}
"""

from __future__ import annotations

import json
import math
import os
import re
import string
import threading
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Optional, Protocol, Sequence, runtime_checkable

import httpx

from fecorrect.errors import BackendError, ProtocolError, TemplateError
from fecorrect.types import (
    CandidateCorrection,
    ClaimAnswer,
    EvidenceAnswer,
    GeneratedQuestion,
    PipelineConfig,
    Provenance,
)

DEFAULT_BEAM_WIDTH = 4
SEPARATOR = " \\n "
DEFAULT_QG_TEMPLATE = "{answer}" + SEPARATOR + "{context}"
DEFAULT_QA_TEMPLATE = "{question}" + SEPARATOR + "{context}"
DEFAULT_QA2CLAIM_TEMPLATE = "{question}" + SEPARATOR + "{answer}"

ENV_URLS = {
    "qg": "ZEROFEC_QG_URL",
    "qa": "ZEROFEC_QA_URL",
    "qa2claim": "ZEROFEC_Q2C_URL",
    "entailment": "ZEROFEC_NLI_URL",
}


@runtime_checkable
class TextGenerator(Protocol):
    name: str
    thread_safe: bool
    beam_width: int

    def generate(self, inputs: Sequence[str], beam_width: int | None = None) -> list[str]: ...


@runtime_checkable
class EntailmentScorer(Protocol):
    name: str
    thread_safe: bool

    def score(self, premise: str, hypothesis: str) -> float: ...


@dataclass(frozen=True)
class BackendSet:
    qg: TextGenerator
    qa: TextGenerator
    qa2claim: TextGenerator
    entailment: EntailmentScorer

    def __post_init__(self) -> None:
        for stage in ("qg", "qa", "qa2claim", "entailment"):
            if getattr(self, stage) is None:
                raise ValueError(f"backend set is missing {stage!r}")

    @property
    def thread_safe(self) -> bool:
        return all(
            getattr(b, "thread_safe", False)
            for b in (self.qg, self.qa, self.qa2claim, self.entailment)
        )


# -- prompts -----------------------------------------------------------------


def _fill(template: str, required: Sequence[str], **values: str) -> str:
    fields = {f for _, f, _, _ in string.Formatter().parse(template) if f}
    missing = [name for name in required if name not in fields]
    if missing:
        raise TemplateError(f"template {template!r} lacks placeholder(s) {missing}")
    # plain substitution so braces inside the values are left alone
    out = template
    for name, value in values.items():
        out = out.replace("{" + name + "}", value)
    return out


def format_qg_prompt(answer: ClaimAnswer | str, claim: str, template: str = DEFAULT_QG_TEMPLATE) -> str:
    text = answer.text if isinstance(answer, ClaimAnswer) else answer
    return _fill(template, ("answer", "context"), answer=text, context=claim)


def format_qa_prompt(
    question: GeneratedQuestion | str,
    evidence: str,
    template: str = DEFAULT_QA_TEMPLATE,
    lowercase: bool = True,
) -> str:
    text = question.text if isinstance(question, GeneratedQuestion) else question
    prompt = _fill(template, ("question", "context"), question=text, context=evidence)
    return prompt.lower() if lowercase else prompt


def format_qa2claim_prompt(
    question: GeneratedQuestion | str,
    answer: EvidenceAnswer | str,
    template: str = DEFAULT_QA2CLAIM_TEMPLATE,
) -> str:
    q = question.text if isinstance(question, GeneratedQuestion) else question
    a = answer.text if isinstance(answer, EvidenceAnswer) else answer
    return _fill(template, ("question", "answer"), question=q, answer=a)


def parse_prompt(prompt: str) -> tuple[str, str]:
    """Split a default-template prompt back into its two fields."""
    head, sep, tail = prompt.partition(SEPARATOR)
    if not sep:
        raise TemplateError("prompt does not use the default separator")
    return head, tail


# -- stage helpers -------------------------------------------------------------


def _call_generator(
    gen: TextGenerator,
    prompts: Sequence[str],
    beam_width: int | None,
    stage: str,
    provenance: Sequence[Any],
) -> list[str]:
    if not prompts:
        return []
    try:
        outputs = gen.generate(list(prompts), beam_width)
    except BackendError as exc:
        raise exc.with_context(stage, provenance[0] if len(provenance) == 1 else None)
    except Exception as exc:  # transport/library failures become BackendError
        raise BackendError(f"{gen.name}: {exc}", stage) from exc
    if len(outputs) != len(prompts):
        raise ProtocolError(
            f"{gen.name}: {len(outputs)} outputs for {len(prompts)} inputs", stage
        )
    cleaned = []
    for out, prov in zip(outputs, provenance):
        if not isinstance(out, str) or not out.strip():
            raise BackendError(f"{gen.name}: empty generation", stage, prov)
        cleaned.append(out.strip())
    return cleaned


def _normalize_question(text: str) -> str:
    return text if text.endswith("?") else text + "?"


def generate_questions(
    qg: TextGenerator,
    answers: Sequence[ClaimAnswer],
    claim: str,
    template: str = DEFAULT_QG_TEMPLATE,
    beam_width: int | None = None,
) -> list[GeneratedQuestion]:
    prompts = [format_qg_prompt(a, claim, template) for a in answers]
    provenance = [{"claim_answer": a.to_dict()} for a in answers]
    outputs = _call_generator(qg, prompts, beam_width, "qg", provenance)
    return [GeneratedQuestion(_normalize_question(o), a) for o, a in zip(outputs, answers)]


def generate_question(
    qg: TextGenerator,
    answer: ClaimAnswer,
    claim: str,
    template: str = DEFAULT_QG_TEMPLATE,
    beam_width: int | None = None,
) -> GeneratedQuestion:
    return generate_questions(qg, [answer], claim, template, beam_width)[0]


def answer_questions(
    qa: TextGenerator,
    questions: Sequence[GeneratedQuestion],
    evidence: str,
    template: str = DEFAULT_QA_TEMPLATE,
    lowercase: bool = True,
    beam_width: int | None = None,
) -> list[EvidenceAnswer]:
    prompts = [format_qa_prompt(q, evidence, template, lowercase) for q in questions]
    provenance = [
        {"claim_answer": q.source_answer.to_dict(), "question": q.text} for q in questions
    ]
    outputs = _call_generator(qa, prompts, beam_width, "qa", provenance)
    return [EvidenceAnswer(o, q) for o, q in zip(outputs, questions)]


def answer_question(
    qa: TextGenerator,
    question: GeneratedQuestion,
    evidence: str,
    template: str = DEFAULT_QA_TEMPLATE,
    lowercase: bool = True,
    beam_width: int | None = None,
) -> EvidenceAnswer:
    return answer_questions(qa, [question], evidence, template, lowercase, beam_width)[0]


def qa_to_claims(
    m: TextGenerator,
    answers: Sequence[EvidenceAnswer],
    template: str = DEFAULT_QA2CLAIM_TEMPLATE,
    beam_width: int | None = None,
) -> list[CandidateCorrection]:
    prompts = [format_qa2claim_prompt(a.source_question, a, template) for a in answers]
    chains = [
        Provenance(a.source_question.source_answer, a.source_question, a) for a in answers
    ]
    outputs = _call_generator(m, prompts, beam_width, "qa2claim", [c.to_dict() for c in chains])
    return [CandidateCorrection(o, c) for o, c in zip(outputs, chains)]


def qa_to_claim(
    m: TextGenerator,
    question: GeneratedQuestion,
    answer: EvidenceAnswer,
    template: str = DEFAULT_QA2CLAIM_TEMPLATE,
    beam_width: int | None = None,
) -> CandidateCorrection:
    if answer.source_question is not question:
        answer = EvidenceAnswer(answer.text, question)
    return qa_to_claims(m, [answer], template, beam_width)[0]


def entail(scorer: EntailmentScorer, premise: str, hypothesis: str) -> float:
    """Probability that ``premise`` entails ``hypothesis``; validated to [0, 1]."""
    try:
        value = scorer.score(premise, hypothesis)
    except BackendError as exc:
        raise exc.with_context("entailment")
    except Exception as exc:
        raise BackendError(f"{scorer.name}: {exc}", "entailment") from exc
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ProtocolError(f"{scorer.name}: non-numeric probability {value!r}", "entailment")
    value = float(value)
    if not math.isfinite(value) or not 0.0 <= value <= 1.0:
        raise ProtocolError(f"{scorer.name}: probability {value} outside [0, 1]", "entailment")
    return value


# -- mocks ---------------------------------------------------------------------


class TableBackend:
    """Generator answering from an explicit prompt -> output map."""

    thread_safe = True

    def __init__(self, table: Mapping[str, str], name: str = "table", beam_width: int = DEFAULT_BEAM_WIDTH):
        self.table = dict(table)
        self.name = name
        self.beam_width = beam_width

    def generate(self, inputs: Sequence[str], beam_width: int | None = None) -> list[str]:
        out = []
        for prompt in inputs:
            try:
                out.append(self.table[prompt])
            except KeyError:
                raise BackendError(f"{self.name}: no fixture for prompt {prompt!r}") from None
        return out


class EchoBackend:
    """Returns leading tokens of one prompt field.

    ``segment`` picks the field of a default-template prompt (``-1`` is the
    context, so a QA echo answers with the first token of the evidence).
    ``max_tokens=None`` echoes the whole field.
    """

    thread_safe = True

    def __init__(self, segment: int = -1, max_tokens: int | None = 1, name: str = "echo",
                 beam_width: int = DEFAULT_BEAM_WIDTH):
        self.segment = segment
        self.max_tokens = max_tokens
        self.name = name
        self.beam_width = beam_width

    def generate(self, inputs: Sequence[str], beam_width: int | None = None) -> list[str]:
        out = []
        for prompt in inputs:
            field = prompt.split(SEPARATOR)[self.segment]
            tokens = field.split()
            if self.max_tokens is not None:
                tokens = tokens[: self.max_tokens]
            out.append(" ".join(tokens))
        return out


class ConstantEntailment:
    thread_safe = True

    def __init__(self, probability: float, name: str = "constant"):
        self.probability = probability
        self.name = name

    def score(self, premise: str, hypothesis: str) -> float:
        return self.probability


_WORD = re.compile(r"[a-z0-9]+")


class OverlapEntailment:
    """Clipped unigram containment of the hypothesis in the premise."""

    name = "overlap"
    thread_safe = True

    def score(self, premise: str, hypothesis: str) -> float:
        hyp = Counter(_WORD.findall(hypothesis.lower()))
        total = sum(hyp.values())
        if total == 0:
            return 0.0
        prem = Counter(_WORD.findall(premise.lower()))
        return sum((hyp & prem).values()) / total


class TableEntailment:
    """Scripted probabilities keyed by ``(premise, hypothesis)`` or by hypothesis.

    Lookups without a match fall back to ``default``; with no default a
    miss is a BackendError, like :class:`TableBackend`.
    """

    thread_safe = True

    def __init__(self, table: Mapping[Any, float], default: float | None = None, name: str = "table-nli"):
        self.table = dict(table)
        self.default = default
        self.name = name

    def score(self, premise: str, hypothesis: str) -> float:
        if (premise, hypothesis) in self.table:
            return self.table[(premise, hypothesis)]
        if hypothesis in self.table:
            return self.table[hypothesis]
        if self.default is not None:
            return self.default
        raise BackendError(f"{self.name}: no fixture for hypothesis {hypothesis!r}")


# -- HTTP ---------------------------------------------------------------------


def _post(client: httpx.Client, url: str, payload: dict, name: str) -> Any:
    try:
        resp = client.post(url, content=json.dumps(payload).encode("utf-8"),
                           headers={"Content-Type": "application/json; charset=utf-8"})
    except httpx.HTTPError as exc:
        raise BackendError(f"{name}: request to {url} failed: {exc}") from exc
    if resp.status_code != 200:
        raise BackendError(f"{name}: {url} returned HTTP {resp.status_code}")
    try:
        return json.loads(resp.content.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ProtocolError(f"{name}: response is not UTF-8 JSON") from exc


def _client(timeout: float, max_connections: int) -> httpx.Client:
    return httpx.Client(
        timeout=timeout,
        limits=httpx.Limits(max_connections=max_connections, max_keepalive_connections=max_connections),
    )


class HttpGenerator:
    """Client for ``POST {base_url}/v1/generate``. httpx clients are thread-safe."""

    thread_safe = True

    def __init__(self, base_url: str, model: str, name: str | None = None,
                 beam_width: int = DEFAULT_BEAM_WIDTH, timeout: float = 60.0,
                 max_connections: int = 8):
        self.url = base_url.rstrip("/") + "/v1/generate"
        self.model = model
        self.name = name or model
        self.beam_width = beam_width
        self._client = _client(timeout, max_connections)

    def generate(self, inputs: Sequence[str], beam_width: int | None = None) -> list[str]:
        payload = {
            "model": self.model,
            "inputs": list(inputs),
            "beam_width": int(beam_width or self.beam_width),
        }
        body = _post(self._client, self.url, payload, self.name)
        outputs = body.get("outputs") if isinstance(body, dict) else None
        if not isinstance(outputs, list) or not all(isinstance(o, str) for o in outputs):
            raise ProtocolError(f"{self.name}: response lacks a string list 'outputs'")
        if len(outputs) != len(inputs):
            raise ProtocolError(f"{self.name}: {len(outputs)} outputs for {len(inputs)} inputs")
        return outputs

    def close(self) -> None:
        self._client.close()


class HttpEntailment:
    """Client for ``POST {base_url}/v1/entail``."""

    thread_safe = True

    def __init__(self, base_url: str, name: str = "nli", timeout: float = 60.0, max_connections: int = 8):
        self.url = base_url.rstrip("/") + "/v1/entail"
        self.name = name
        self._client = _client(timeout, max_connections)

    def score(self, premise: str, hypothesis: str) -> float:
        body = _post(self._client, self.url, {"premise": premise, "hypothesis": hypothesis}, self.name)
        value = body.get("probability") if isinstance(body, dict) else None
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ProtocolError(f"{self.name}: response lacks numeric 'probability'")
        value = float(value)
        if not math.isfinite(value) or not 0.0 <= value <= 1.0:
            raise ProtocolError(f"{self.name}: probability {value} outside [0, 1]")
        return value

    def close(self) -> None:
        self._client.close()


def resolve_urls(urls: Mapping[str, Optional[str]] | None = None, use_env: bool = True) -> dict[str, str]:
    """Merge configured URLs with ``ZEROFEC_*_URL`` environment overrides."""
    resolved = {k: v for k, v in (urls or {}).items() if v}
    for stage, var in ENV_URLS.items():
        if use_env and os.environ.get(var):
            resolved[stage] = os.environ[var]
    missing = [s for s in ENV_URLS if s not in resolved]
    if missing:
        raise ValueError(f"no endpoint configured for {missing}")
    return resolved


def http_backends(urls: Mapping[str, Optional[str]] | None = None,
                  models: Mapping[str, str] | None = None,
                  beam_width: int = DEFAULT_BEAM_WIDTH, use_env: bool = True) -> BackendSet:
    urls = resolve_urls(urls, use_env)
    models = {"qg": "qg", "qa": "qa", "qa2claim": "qa2claim", **(models or {})}
    return BackendSet(
        qg=HttpGenerator(urls["qg"], models["qg"], beam_width=beam_width),
        qa=HttpGenerator(urls["qa"], models["qa"], beam_width=beam_width),
        qa2claim=HttpGenerator(urls["qa2claim"], models["qa2claim"], beam_width=beam_width),
        entailment=HttpEntailment(urls["entailment"]),
    )


# -- caching --------------------------------------------------------------------


class ResponseCache:
    """Append-only newline-delimited JSON cache of backend responses.

    Readers hit an in-memory dict; writes are serialized by a lock and
    flushed immediately so an interrupted run keeps what it paid for.
    """

    def __init__(self, path: str | os.PathLike | None = None):
        self.path = Path(path) if path else None
        self._data: dict[str, Any] = {}
        self._lock = threading.Lock()
        if self.path and self.path.exists():
            with self.path.open(encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        rec = json.loads(line)
                        self._data[rec["key"]] = rec["value"]

    @staticmethod
    def key(*parts: Any) -> str:
        return json.dumps(parts, ensure_ascii=False)

    def get(self, key: str) -> Any:
        return self._data.get(key)

    def __contains__(self, key: str) -> bool:
        return key in self._data

    def __len__(self) -> int:
        return len(self._data)

    def put(self, key: str, value: Any) -> None:
        with self._lock:
            if key in self._data:
                return
            self._data[key] = value
            if self.path:
                with self.path.open("a", encoding="utf-8") as fh:
                    fh.write(json.dumps({"key": key, "value": value}, ensure_ascii=False) + "\n")


class CachedGenerator:
    def __init__(self, inner: TextGenerator, cache: ResponseCache):
        self.inner = inner
        self.cache = cache
        self.name = inner.name
        self.thread_safe = inner.thread_safe
        self.beam_width = inner.beam_width

    def generate(self, inputs: Sequence[str], beam_width: int | None = None) -> list[str]:
        beam = beam_width or self.beam_width
        keys = [ResponseCache.key(self.name, beam, p) for p in inputs]
        todo = [i for i, k in enumerate(keys) if k not in self.cache]
        if todo:
            fresh = self.inner.generate([inputs[i] for i in todo], beam_width)
            if len(fresh) != len(todo):
                raise ProtocolError(f"{self.name}: {len(fresh)} outputs for {len(todo)} inputs")
            for i, out in zip(todo, fresh):
                if isinstance(out, str) and out.strip():
                    self.cache.put(keys[i], out)
                else:
                    raise BackendError(f"{self.name}: empty generation")
        return [self.cache.get(k) for k in keys]


class CachedEntailment:
    def __init__(self, inner: EntailmentScorer, cache: ResponseCache):
        self.inner = inner
        self.cache = cache
        self.name = inner.name
        self.thread_safe = inner.thread_safe

    def score(self, premise: str, hypothesis: str) -> float:
        key = ResponseCache.key(self.name, premise, hypothesis)
        if key not in self.cache:
            value = entail(self.inner, premise, hypothesis)
            self.cache.put(key, value)
        return self.cache.get(key)


def with_cache(backends: BackendSet, cache: ResponseCache) -> BackendSet:
    return BackendSet(
        qg=CachedGenerator(backends.qg, cache),
        qa=CachedGenerator(backends.qa, cache),
        qa2claim=CachedGenerator(backends.qa2claim, cache),
        entailment=CachedEntailment(backends.entailment, cache),
    )


# -- mock fixtures ----------------------------------------------------------------


def _generator_from_fixture(stage: str, spec: Any, config: PipelineConfig) -> TextGenerator:
    if spec == "echo" or (isinstance(spec, dict) and spec.get("type") == "echo"):
        opts = spec if isinstance(spec, dict) else {}
        return EchoBackend(
            segment=opts.get("segment", 0 if stage == "qg" else -1),
            max_tokens=opts.get("max_tokens", None if stage == "qg" else 1),
            name=f"echo-{stage}",
        )
    if stage == "qa2claim" and (spec == "rules" or (isinstance(spec, dict) and spec.get("type") == "rules")):
        from fecorrect.qa2claim_rules import RuleBasedQA2Claim

        return RuleBasedQA2Claim()
    entries = spec.get("entries", []) if isinstance(spec, dict) else spec
    table: dict[str, str] = {}
    for entry in entries:
        if stage == "qg":
            prompt = format_qg_prompt(entry["answer"], entry["context"], config.qg_template)
        elif stage == "qa":
            prompt = format_qa_prompt(entry["question"], entry["context"], config.qa_template,
                                      config.qa_lowercase)
        else:
            prompt = format_qa2claim_prompt(entry["question"], entry["answer"], config.qa2claim_template)
        table[prompt] = entry["output"]
    return TableBackend(table, name=f"table-{stage}")


def _scorer_from_fixture(spec: Any) -> EntailmentScorer:
    if spec == "overlap":
        return OverlapEntailment()
    if isinstance(spec, dict) and "constant" in spec:
        return ConstantEntailment(float(spec["constant"]))
    entries = spec.get("entries", []) if isinstance(spec, dict) else spec
    default = spec.get("default") if isinstance(spec, dict) else None
    table: dict[Any, float] = {}
    for entry in entries:
        key = (entry["premise"], entry["hypothesis"]) if "premise" in entry else entry["hypothesis"]
        table[key] = float(entry["probability"])
    return TableEntailment(table, default=default)


def backends_from_fixture(fixture: Mapping[str, Any] | str | os.PathLike,
                          config: PipelineConfig | None = None) -> BackendSet:
    """Build mock backends from a fixture mapping or JSON file.

    Each generator stage is either a list of table entries (``qg``:
    answer/context/output, ``qa``: question/context/output, ``qa2claim``:
    question/answer/output) or ``"echo"``; ``qa2claim`` may also be
    ``"rules"``. ``entailment`` is a list of hypothesis/probability entries
    (optionally with premise), ``{"entries": [...], "default": p}``,
    ``{"constant": p}`` or ``"overlap"``.
    """
    if not isinstance(fixture, Mapping):
        with open(fixture, encoding="utf-8") as fh:
            fixture = json.load(fh)
    config = config or PipelineConfig()
    return BackendSet(
        qg=_generator_from_fixture("qg", fixture["qg"], config),
        qa=_generator_from_fixture("qa", fixture["qa"], config),
        qa2claim=_generator_from_fixture("qa2claim", fixture["qa2claim"], config),
        entailment=_scorer_from_fixture(fixture["entailment"]),
    )
