"""Evaluation statistics: SARI, Kendall's tau-b, Krippendorff's alpha and the
paired bootstrap significance test.
"""

from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Mapping, Optional, Sequence

import numpy as np
from scipy import stats

from fecorrect.errors import DegenerateInput, InsufficientData, LengthMismatch
from fecorrect.scoring import tokenize_for_rouge


@dataclass(frozen=True)
class EvalRecord:
    input: str
    output: str
    references: tuple[str, ...]

    def __post_init__(self) -> None:
        refs = (self.references,) if isinstance(self.references, str) else tuple(self.references)
        if not refs:
            raise ValueError("an evaluation record needs at least one reference")
        object.__setattr__(self, "references", refs)


@dataclass(frozen=True)
class JudgmentRow:
    item_id: str
    human: float
    metric_scores: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not math.isfinite(self.human):
            raise ValueError(f"item {self.item_id!r}: human judgment is not finite")
        if not self.metric_scores:
            raise ValueError(f"item {self.item_id!r}: no metric scores")


# -- SARI ----------------------------------------------------------------------


def _ngrams(tokens: Sequence[str], n: int) -> list[str]:
    return [" ".join(tokens[i : i + n]) for i in range(len(tokens) - n + 1)]


def _ratio(num: float, sys_size: int, ref_size: int) -> float:
    # empty system and reference sets agree perfectly; one-sided emptiness scores 0
    if sys_size:
        return num / sys_size
    return 1.0 if ref_size == 0 else 0.0


def _f1(p: float, r: float) -> float:
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


def _sari_ngram(
    source: Sequence[str], output: Sequence[str], references: Sequence[Sequence[str]]
) -> tuple[float, float, float]:
    """(keep F1, delete precision, add F1) for one n-gram order."""
    numref = len(references)
    ref_counts = Counter(g for ref in references for g in ref)
    src_rep = Counter({g: c * numref for g, c in Counter(source).items()})
    out_rep = Counter({g: c * numref for g, c in Counter(output).items()})

    keep_sys = src_rep & out_rep
    keep_good = keep_sys & ref_counts
    keep_ref = src_rep & ref_counts
    keep_p = _ratio(sum(keep_good[g] / keep_sys[g] for g in keep_good), len(keep_sys), len(keep_ref))
    keep_r = _ratio(sum(keep_good[g] / keep_ref[g] for g in keep_good), len(keep_ref), len(keep_sys))

    del_sys = src_rep - out_rep
    del_good = del_sys - ref_counts
    del_ref = src_rep - ref_counts
    del_p = _ratio(sum(del_good[g] / del_sys[g] for g in del_good), len(del_sys), len(del_ref))

    add_sys = set(output) - set(source)
    add_ref = set(ref_counts) - set(source)
    add_good = add_sys & add_ref
    add_p = _ratio(len(add_good), len(add_sys), len(add_ref))
    add_r = _ratio(len(add_good), len(add_ref), len(add_sys))

    return _f1(keep_p, keep_r), del_p, _f1(add_p, add_r)


def sari(record: EvalRecord, max_n: int = 4) -> float:
    src = tokenize_for_rouge(record.input, stemming=False)
    out = tokenize_for_rouge(record.output, stemming=False)
    refs = [tokenize_for_rouge(r, stemming=False) for r in record.references]
    keep = delete = add = 0.0
    for n in range(1, max_n + 1):
        k, d, a = _sari_ngram(_ngrams(src, n), _ngrams(out, n), [_ngrams(r, n) for r in refs])
        keep += k
        delete += d
        add += a
    return (keep + delete + add) / (3 * max_n)


def corpus_sari(records: Sequence[EvalRecord], max_n: int = 4) -> float:
    """Mean per-record SARI, as a percentage."""
    if not records:
        raise ValueError("corpus SARI of an empty corpus is undefined")
    return 100.0 * math.fsum(sari(r, max_n) for r in records) / len(records)


# -- Kendall's tau-b --------------------------------------------------------------


def kendall_tau(x: Sequence[float], y: Sequence[float]) -> float:
    """Tie-corrected Kendall rank correlation (tau-b)."""
    if len(x) != len(y):
        raise LengthMismatch(f"{len(x)} vs {len(y)} observations")
    if len(x) < 2:
        raise DegenerateInput("need at least two observations")
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    if np.all(xa == xa[0]) or np.all(ya == ya[0]):
        raise DegenerateInput("tau-b is undefined for a constant variable")
    return float(stats.kendalltau(xa, ya, variant="b").statistic)


# -- Krippendorff's alpha -----------------------------------------------------------


def _is_missing(value: Any) -> bool:
    return value is None or (isinstance(value, float) and math.isnan(value))


def krippendorff_alpha(ratings: Sequence[Sequence[Optional[Hashable]]], level: str = "nominal") -> float:
    """Nominal Krippendorff's alpha from a raters x items matrix.

    Missing cells are ``None`` or NaN. Items with fewer than two ratings are
    not pairable and are dropped.
    """
    if level != "nominal":
        raise ValueError(f"unsupported measurement level {level!r}")
    if not ratings:
        raise InsufficientData("no raters")
    n_items = len(ratings[0])
    if any(len(row) != n_items for row in ratings):
        raise LengthMismatch("rater rows have different lengths")

    units = []
    for j in range(n_items):
        values = [row[j] for row in ratings if not _is_missing(row[j])]
        if len(values) >= 2:
            units.append(values)
    if len(units) < 2:
        raise InsufficientData("need at least two items with two or more ratings")

    categories = sorted({v for u in units for v in u}, key=repr)
    index = {c: i for i, c in enumerate(categories)}
    k = len(categories)
    coincidence = np.zeros((k, k))
    for values in units:
        counts = np.zeros(k)
        for v in values:
            counts[index[v]] += 1
        m = len(values)
        coincidence += (np.outer(counts, counts) - np.diag(counts)) / (m - 1)

    n_c = coincidence.sum(axis=1)
    n = n_c.sum()
    observed = coincidence.sum() - np.trace(coincidence)
    expected = (n * n - np.sum(n_c * n_c)) / (n - 1)
    if expected == 0:
        # a single category across all pairable values: no disagreement possible
        return 1.0
    return float(1.0 - observed / expected)


# -- paired bootstrap -----------------------------------------------------------------

BLOCK_SIZE = 1000


def bootstrap_indices(n_records: int, n_resamples: int, seed: int = 0, block: int | None = None):
    """Resample index matrices, one ``(size, n_records)`` array per block.

    Block ``b`` draws from ``default_rng([seed, b])`` so any partition of the
    blocks across workers sees the same indices.
    """
    n_blocks = math.ceil(n_resamples / BLOCK_SIZE)
    blocks = range(n_blocks) if block is None else [block]
    for b in blocks:
        size = min(BLOCK_SIZE, n_resamples - b * BLOCK_SIZE)
        rng = np.random.default_rng([seed, b])
        yield rng.integers(0, n_records, size=(size, n_records))


def paired_bootstrap(
    metric: Callable[[Any, Any], float],
    sys_a: Sequence[Any],
    sys_b: Sequence[Any],
    refs: Sequence[Any],
    n_resamples: int = 10_000,
    seed: int = 0,
    workers: int = 1,
) -> float:
    """One-sided p-value that system A's mean metric beats system B's.

    ``metric(output, reference)`` scores one record. With observed difference
    ``delta = mean(A) - mean(B)``, the p-value is the fraction of resampled
    differences that are ``<= 0``; it is 1.0 whenever ``delta <= 0``.
    """
    if not (len(sys_a) == len(sys_b) == len(refs)):
        raise LengthMismatch(f"{len(sys_a)} / {len(sys_b)} / {len(refs)} records")
    if n_resamples < 1:
        raise ValueError("n_resamples must be >= 1")
    if not refs:
        raise ValueError("no records")
    a = np.array([metric(o, r) for o, r in zip(sys_a, refs)], dtype=float)
    b = np.array([metric(o, r) for o, r in zip(sys_b, refs)], dtype=float)
    diff = a - b
    if diff.sum() <= 0:
        return 1.0
    n = len(diff)
    n_blocks = math.ceil(n_resamples / BLOCK_SIZE)

    def count(block: int) -> int:
        (idx,) = bootstrap_indices(n, n_resamples, seed, block)
        return int(np.count_nonzero(diff[idx].sum(axis=1) <= 0))

    if workers > 1 and n_blocks > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            failures = sum(pool.map(count, range(n_blocks)))
    else:
        failures = sum(count(blk) for blk in range(n_blocks))
    return failures / n_resamples
