"""Command-line entry point.

    fecorrect correct      --input tasks.jsonl --output traces.jsonl [--mock fixture.json]
    fecorrect evaluate     --input records.jsonl | --dataset data.jsonl --traces traces.jsonl
    fecorrect correlate    --input judgments.jsonl
    fecorrect significance --sys-a a.jsonl --sys-b b.jsonl [--n-resamples N --seed S]
    fecorrect validate     --input data.jsonl [--expect TOTAL,SUPPORTS,REFUTES]

Settings come from ``--config`` (JSON), then ``ZEROFEC_*_URL`` environment
variables for endpoints, then command-line flags.

Exit codes: 0 success, 1 configuration error, 2 dataset error, 3 backend
failure with ``--fail-fast``.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from contextlib import contextmanager
from typing import Any, Iterator, Sequence

from fecorrect import backends as bk
from fecorrect.core import run_batch, write_outputs
from fecorrect.data import dataset_stats, load_dataset, load_mapping, load_tasks
from fecorrect.errors import BackendError, DatasetError, DegenerateInput, FECError
from fecorrect.metrics import EvalRecord, corpus_sari, kendall_tau, paired_bootstrap, sari
from fecorrect.types import PipelineConfig, ScorerSpec

log = logging.getLogger("fecorrect")

EXIT_OK, EXIT_CONFIG, EXIT_DATASET, EXIT_BACKEND = 0, 1, 2, 3


class ConfigError(Exception):
    pass


# -- config ------------------------------------------------------------------------


def load_config(args: argparse.Namespace) -> dict[str, Any]:
    cfg: dict[str, Any] = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(cfg, dict):
            raise ConfigError("config file must hold a JSON object")
    for key in ("input", "output", "parallelism", "seed", "mock", "cache", "mapping", "n_resamples"):
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    if getattr(args, "fail_fast", False):
        cfg["fail_fast"] = True
    flags = {}
    for stage in ("qg", "qa", "q2c", "nli"):
        value = getattr(args, f"backend_{stage}_url", None)
        if value:
            flags[stage] = value
    cfg["url_flags"] = flags
    return cfg


def pipeline_config(cfg: dict[str, Any]) -> PipelineConfig:
    p = cfg.get("pipeline", {})
    s = cfg.get("scorer", {})
    kwargs: dict[str, Any] = {}
    for key in ("beam_width", "max_candidates", "dedupe", "annotator", "qa_lowercase"):
        if key in p:
            kwargs[key] = p[key]
    if "negation_lexicon" in p:
        kwargs["negation_lexicon"] = frozenset(p["negation_lexicon"])
    for name, value in p.get("templates", {}).items():
        kwargs[f"{name}_template"] = value
    spec_kwargs: dict[str, Any] = {}
    if "components" in s:
        spec_kwargs["components"] = tuple((c[0], c[1]) for c in s["components"])
    if "stemming" in s:
        spec_kwargs["stemming"] = bool(s["stemming"])
    try:
        return PipelineConfig(scorer_spec=ScorerSpec(**spec_kwargs), **kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid pipeline settings: {exc}") from exc


def build_backends(cfg: dict[str, Any], pconf: PipelineConfig) -> bk.BackendSet:
    if cfg.get("mock"):
        try:
            backends = bk.backends_from_fixture(cfg["mock"], pconf)
        except (OSError, KeyError, ValueError, TypeError) as exc:
            raise ConfigError(f"cannot load mock fixture {cfg['mock']}: {exc}") from exc
    else:
        section = cfg.get("backends", {})
        names = {"qg": "qg", "qa": "qa", "qa2claim": "q2c", "entailment": "nli"}
        urls = {stage: section.get(key, {}).get("url") for stage, key in names.items()}
        flags = {stage: cfg.get("url_flags", {}).get(key) for stage, key in names.items()}
        flags = {k: v for k, v in flags.items() if v}
        try:
            # environment overrides the file; flags override both
            urls = {**bk.resolve_urls({**urls, **flags}), **flags}
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        models = {
            stage: section[key]["model"]
            for stage, key in names.items()
            if stage != "entailment" and "model" in section.get(key, {})
        }
        try:
            backends = bk.http_backends(urls, models, beam_width=pconf.beam_width, use_env=False)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    if cfg.get("cache"):
        backends = bk.with_cache(backends, bk.ResponseCache(cfg["cache"]))
    return backends


@contextmanager
def _open_out(path: str | None) -> Iterator[Any]:
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8") as fh:
            yield fh


def _read_jsonl(path: str) -> list[dict[str, Any]]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if line.strip():
                try:
                    rows.append(json.loads(line))
                except json.JSONDecodeError as exc:
                    raise DatasetError(lineno, f"{path}: invalid JSON: {exc.msg}") from None
    return rows


def _eval_record(row: dict[str, Any], where: str) -> EvalRecord:
    try:
        return EvalRecord(row["input"], row["output"], tuple(row["references"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise DatasetError(0, f"{where}: bad evaluation record: {exc}") from None


# -- commands -------------------------------------------------------------------------


def cmd_correct(cfg: dict[str, Any]) -> int:
    if not cfg.get("input"):
        raise ConfigError("correct needs --input")
    pconf = pipeline_config(cfg)
    parallelism = int(cfg.get("parallelism", 1))
    if parallelism < 1:
        raise ConfigError("parallelism must be >= 1")
    try:
        tasks = load_tasks(cfg["input"], load_mapping(cfg["mapping"]) if cfg.get("mapping") else None)
    except (OSError, DatasetError, ValueError) as exc:
        print(f"dataset error: {exc}", file=sys.stderr)
        return EXIT_DATASET
    backends = build_backends(cfg, pconf)
    fail_fast = bool(cfg.get("fail_fast", False))
    try:
        outputs = run_batch(tasks, backends, pconf, parallelism=parallelism, fail_fast=fail_fast)
    except BackendError as exc:
        print(f"backend failure: {exc} (stage={exc.stage})", file=sys.stderr)
        return EXIT_BACKEND
    with _open_out(cfg.get("output")) as fh:
        write_outputs(outputs, fh)
    n_err = sum(1 for o in outputs if not o.ok)
    n_edit = sum(1 for o in outputs if o.ok and o.edited)
    print(f"processed={len(outputs)} edited={n_edit} errors={n_err}", file=sys.stderr)
    return EXIT_OK


def _records_from_traces(dataset_path: str, traces_path: str, mapping=None) -> list[dict[str, Any]]:
    gold = {r.id: r for r in load_dataset(dataset_path, mapping)}
    rows = []
    for trace in _read_jsonl(traces_path):
        if "error" in trace:
            continue
        rec = gold.get(trace["task_id"])
        if rec is None:
            raise DatasetError(0, f"trace for unknown task {trace['task_id']!r}")
        rows.append(
            {"id": rec.id, "input": rec.claim, "output": trace["correction"], "references": [rec.gold_correction]}
        )
    return rows


def cmd_evaluate(cfg: dict[str, Any]) -> int:
    mapping = load_mapping(cfg["mapping"]) if cfg.get("mapping") else None
    try:
        if cfg.get("dataset") and cfg.get("traces"):
            rows = _records_from_traces(cfg["dataset"], cfg["traces"], mapping)
        elif cfg.get("input"):
            rows = _read_jsonl(cfg["input"])
        else:
            raise ConfigError("evaluate needs --input, or --dataset with --traces")
        records = [_eval_record(r, f"record {i + 1}") for i, r in enumerate(rows)]
        if not records:
            raise DatasetError(0, "no records to evaluate")
    except (OSError, DatasetError) as exc:
        print(f"dataset error: {exc}", file=sys.stderr)
        return EXIT_DATASET
    report: dict[str, Any] = {"n": len(records), "sari": corpus_sari(records)}
    external: dict[str, list[float]] = {}
    for row in rows:
        for name, value in (row.get("metrics") or {}).items():
            external.setdefault(name, []).append(float(value))
    for name, values in sorted(external.items()):
        report[name] = math.fsum(values) / len(values)
    print(f"records: {report['n']}")
    print(f"SARI (%): {report['sari']:.2f}")
    for name in sorted(external):
        print(f"{name}: {report[name]:.4f}")
    if cfg.get("output"):
        with _open_out(cfg["output"]) as fh:
            fh.write(json.dumps(report) + "\n")
    return EXIT_OK


def cmd_correlate(cfg: dict[str, Any]) -> int:
    if not cfg.get("input"):
        raise ConfigError("correlate needs --input")
    try:
        rows = _read_jsonl(cfg["input"])
    except (OSError, DatasetError) as exc:
        print(f"dataset error: {exc}", file=sys.stderr)
        return EXIT_DATASET
    human: dict[str, list[float]] = {}
    metric: dict[str, list[float]] = {}
    for i, row in enumerate(rows):
        h = row.get("human")
        dims = h if isinstance(h, dict) else {"human": h}
        for name, value in dims.items():
            human.setdefault(name, []).append(float(value))
        for name, value in (row.get("metrics") or {}).items():
            metric.setdefault(name, []).append(float(value))
    n = len(rows)
    bad = [k for k, v in {**human, **metric}.items() if len(v) != n]
    if bad or not metric:
        print(f"dataset error: incomplete columns {bad or 'metrics'}", file=sys.stderr)
        return EXIT_DATASET
    table = []
    for mname in sorted(metric):
        for hname in sorted(human):
            try:
                tau: float | None = kendall_tau(metric[mname], human[hname])
            except DegenerateInput:
                tau = None
            table.append({"metric": mname, "dimension": hname, "tau_b": tau, "n": n})
    dims = sorted(human)
    print("metric".ljust(16) + "".join(d.rjust(16) for d in dims))
    for mname in sorted(metric):
        cells = [r["tau_b"] for r in table if r["metric"] == mname]
        print(mname.ljust(16) + "".join(("n/a" if t is None else f"{t:.3f}").rjust(16) for t in cells))
    if cfg.get("output"):
        with _open_out(cfg["output"]) as fh:
            for rec in table:
                fh.write(json.dumps(rec) + "\n")
    return EXIT_OK


def cmd_significance(cfg: dict[str, Any]) -> int:
    if not (cfg.get("sys_a") and cfg.get("sys_b")):
        raise ConfigError("significance needs --sys-a and --sys-b")
    try:
        rows_a = _read_jsonl(cfg["sys_a"])
        rows_b = _read_jsonl(cfg["sys_b"])
        if len(rows_a) != len(rows_b) or not rows_a:
            raise DatasetError(0, f"system files hold {len(rows_a)} and {len(rows_b)} records")
        for i, (ra, rb) in enumerate(zip(rows_a, rows_b)):
            if "id" in ra and "id" in rb and ra["id"] != rb["id"]:
                raise DatasetError(i + 1, f"record ids differ: {ra['id']!r} vs {rb['id']!r}")
        recs_a = [_eval_record(r, f"sys-a record {i + 1}") for i, r in enumerate(rows_a)]
        recs_b = [_eval_record(r, f"sys-b record {i + 1}") for i, r in enumerate(rows_b)]
    except (OSError, DatasetError) as exc:
        print(f"dataset error: {exc}", file=sys.stderr)
        return EXIT_DATASET
    n_resamples = int(cfg.get("n_resamples", 10_000))
    seed = int(cfg.get("seed", 0))
    results = []
    refs = [(r.input, r.references) for r in recs_a]
    p = paired_bootstrap(
        lambda out, ref: sari(EvalRecord(ref[0], out, ref[1])),
        [r.output for r in recs_a], [r.output for r in recs_b], refs, n_resamples, seed,
    )
    results.append({"metric": "sari", "p_value": p})
    shared = set.intersection(*(set(r.get("metrics") or {}) for r in rows_a + rows_b))
    for name in sorted(shared):
        col_a = [float(r["metrics"][name]) for r in rows_a]
        col_b = [float(r["metrics"][name]) for r in rows_b]
        p = paired_bootstrap(lambda v, _: v, col_a, col_b, [None] * len(col_a), n_resamples, seed)
        results.append({"metric": name, "p_value": p})
    for res in results:
        res["significant"] = res["p_value"] < 0.01
        star = "*" if res["significant"] else ""
        print(f"{res['metric']}: p={res['p_value']:.4f}{star}")
    if cfg.get("output"):
        with _open_out(cfg["output"]) as fh:
            for res in results:
                fh.write(json.dumps(res) + "\n")
    return EXIT_OK


def cmd_validate(cfg: dict[str, Any]) -> int:
    if not cfg.get("input"):
        raise ConfigError("validate needs --input")
    mapping = load_mapping(cfg["mapping"]) if cfg.get("mapping") else None
    try:
        records = load_dataset(cfg["input"], mapping)
    except (OSError, DatasetError) as exc:
        print(f"dataset error: {exc}", file=sys.stderr)
        return EXIT_DATASET
    st = dataset_stats(records)
    print(f"total={st.total} supports={st.supports} refutes={st.refutes}")
    if cfg.get("expect"):
        try:
            expected = tuple(int(v) for v in str(cfg["expect"]).split(","))
        except ValueError as exc:
            raise ConfigError(f"--expect wants TOTAL,SUPPORTS,REFUTES: {exc}") from exc
        if expected != st.as_tuple():
            print(f"statistics mismatch: expected {expected}", file=sys.stderr)
            return EXIT_DATASET
    return EXIT_OK


COMMANDS = {
    "correct": cmd_correct,
    "evaluate": cmd_evaluate,
    "correlate": cmd_correlate,
    "significance": cmd_significance,
    "validate": cmd_validate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fecorrect", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config")
        p.add_argument("--input")
        p.add_argument("--output")
        p.add_argument("--mapping", help="JSON map of canonical field -> dataset field")
        p.add_argument("--seed", type=int)
        if name == "correct":
            p.add_argument("--parallelism", type=int)
            p.add_argument("--fail-fast", action="store_true")
            p.add_argument("--mock", help="fixture JSON with table/echo backends")
            p.add_argument("--cache", help="response cache file")
            for stage in ("qg", "qa", "q2c", "nli"):
                p.add_argument(f"--backend.{stage}.url", dest=f"backend_{stage}_url")
        if name == "evaluate":
            p.add_argument("--dataset")
            p.add_argument("--traces")
        if name == "significance":
            p.add_argument("--sys-a", dest="sys_a")
            p.add_argument("--sys-b", dest="sys_b")
            p.add_argument("--n-resamples", dest="n_resamples", type=int)
        if name == "validate":
            p.add_argument("--expect")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = load_config(args)
        for key in ("dataset", "traces", "sys_a", "sys_b", "expect"):
            if getattr(args, key, None) is not None:
                cfg[key] = getattr(args, key)
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FECError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
