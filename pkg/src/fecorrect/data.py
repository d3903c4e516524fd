"""Loading and validating correction datasets (newline-delimited JSON).

Canonical record::

    {"id": ..., "claim": ..., "evidence": ..., "gold_correction": ..., "label": "SUPPORTS" | "REFUTES"}

Datasets released with other field names are read through a field mapping
(canonical name -> source name). Evidence given as a list of sentences is
joined with single spaces in its original order.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass
from typing import IO, Iterable, Mapping, Sequence

from fecorrect.errors import InvariantViolation, ParseError
from fecorrect.types import CorrectionTask, Label

FIELDS = ("id", "claim", "evidence", "gold_correction", "label")


@dataclass(frozen=True)
class DatasetRecord:
    id: str
    claim: str
    evidence: str
    gold_correction: str | None
    label: Label | None

    def to_task(self) -> CorrectionTask:
        return CorrectionTask(self.id, self.claim, self.evidence, self.gold_correction, self.label)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["label"] = self.label.value if self.label else None
        return d


@dataclass(frozen=True)
class DatasetStats:
    total: int
    supports: int
    refutes: int

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.total, self.supports, self.refutes)


def _norm_ws(text: str) -> str:
    return " ".join(text.split())


def _text(value, line: int, name: str) -> str:
    if isinstance(value, list) and all(isinstance(v, str) for v in value):
        value = " ".join(v.strip() for v in value)
    if isinstance(value, (int, float)) and not isinstance(value, bool) and name == "id":
        value = str(value)
    if not isinstance(value, str) or not value.strip():
        raise InvariantViolation(line, name, "missing or empty")
    return value


def parse_record(
    obj, line: int, mapping: Mapping[str, str] | None = None, require_gold: bool = True
) -> DatasetRecord:
    """Validate one decoded record; ``require_gold=False`` admits bare correction inputs."""
    if not isinstance(obj, dict):
        raise ParseError(line, "record is not a JSON object")
    mapping = mapping or {}
    values = {name: obj.get(mapping.get(name, name)) for name in FIELDS}
    rid = _text(values["id"], line, "id")
    claim = _text(values["claim"], line, "claim")
    evidence = _text(values["evidence"], line, "evidence")
    if not require_gold and values["gold_correction"] is None and values["label"] is None:
        return DatasetRecord(rid, claim, evidence, None, None)
    gold = _text(values["gold_correction"], line, "gold_correction")
    raw_label = values["label"]
    try:
        label = Label(str(raw_label).strip().upper())
    except ValueError:
        raise InvariantViolation(line, "label", f"{raw_label!r} is not SUPPORTS/REFUTES") from None
    if label is Label.SUPPORTS and _norm_ws(gold) != _norm_ws(claim):
        raise InvariantViolation(line, "gold_correction", "SUPPORTS record must keep the claim unchanged")
    return DatasetRecord(rid, claim, evidence, gold, label)


def read_records(
    fh: IO[str], mapping: Mapping[str, str] | None = None, require_gold: bool = True
) -> list[DatasetRecord]:
    records = []
    for lineno, line in enumerate(fh, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(lineno, f"invalid JSON: {exc.msg}") from None
        records.append(parse_record(obj, lineno, mapping, require_gold))
    return records


def load_dataset(
    path: str | os.PathLike, mapping: Mapping[str, str] | None = None, require_gold: bool = True
) -> list[DatasetRecord]:
    try:
        with open(path, encoding="utf-8") as fh:
            return read_records(fh, mapping, require_gold)
    except UnicodeDecodeError as exc:
        raise ParseError(0, f"file is not UTF-8: {exc}") from None


def load_mapping(path: str | os.PathLike) -> dict[str, str]:
    with open(path, encoding="utf-8") as fh:
        mapping = json.load(fh)
    unknown = set(mapping) - set(FIELDS)
    if unknown:
        raise ValueError(f"mapping names unknown canonical fields {sorted(unknown)}")
    return mapping


def dump_dataset(records: Iterable[DatasetRecord], path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_dict(), ensure_ascii=False) + "\n")


def dataset_stats(records: Sequence[DatasetRecord]) -> DatasetStats:
    supports = sum(1 for r in records if r.label is Label.SUPPORTS)
    refutes = sum(1 for r in records if r.label is Label.REFUTES)
    return DatasetStats(supports + refutes, supports, refutes)


def load_tasks(path: str | os.PathLike, mapping: Mapping[str, str] | None = None) -> list[CorrectionTask]:
    return [r.to_task() for r in load_dataset(path, mapping, require_gold=False)]
