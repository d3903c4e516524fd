"""Slow, independent reference implementations used as test oracles.

Everything here is written with plain loops over explicit pair/gram
enumerations and shares no code with the package beyond the bootstrap
index stream (which defines the resamples themselves).
"""

from __future__ import annotations

import itertools
import math
import re
from fractions import Fraction


def words(text):
    return [w for w in re.split(r"[^a-z0-9]+", text.lower()) if w]


def grams(tokens, n):
    out = {}
    for i in range(len(tokens) - n + 1):
        g = tuple(tokens[i : i + n])
        out[g] = out.get(g, 0) + 1
    return out


def _div(num, sys_size, ref_size):
    if sys_size == 0:
        return Fraction(1) if ref_size == 0 else Fraction(0)
    return Fraction(num) / sys_size


def _f1(p, r):
    return Fraction(0) if p + r == 0 else 2 * p * r / (p + r)


def sari_oracle(source, output, references, max_n=4):
    """SARI with exact rational arithmetic."""
    src_t, out_t = words(source), words(output)
    refs_t = [words(r) for r in references]
    k = len(refs_t)
    keep_sum = del_sum = add_sum = Fraction(0)
    for n in range(1, max_n + 1):
        s, o = grams(src_t, n), grams(out_t, n)
        r_all = {}
        for ref in refs_t:
            for g, c in grams(ref, n).items():
                r_all[g] = r_all.get(g, 0) + c
        # counts scaled by the number of references
        s_k = {g: c * k for g, c in s.items()}
        o_k = {g: c * k for g, c in o.items()}

        keep_sys = {g: min(s_k[g], o_k[g]) for g in s_k if g in o_k}
        keep_ref = {g: min(s_k[g], r_all[g]) for g in s_k if g in r_all}
        p_num = Fraction(0)
        r_num = Fraction(0)
        for g, c in keep_sys.items():
            good = min(c, r_all.get(g, 0))
            if good:
                p_num += Fraction(good, c)
                r_num += Fraction(good, keep_ref[g])
        keep_p = _div(p_num, len(keep_sys), len(keep_ref))
        keep_r = _div(r_num, len(keep_ref), len(keep_sys))
        keep_sum += _f1(keep_p, keep_r)

        del_sys = {g: s_k[g] - o_k.get(g, 0) for g in s_k if s_k[g] > o_k.get(g, 0)}
        del_ref = {g: s_k[g] - r_all.get(g, 0) for g in s_k if s_k[g] > r_all.get(g, 0)}
        d_num = Fraction(0)
        for g, c in del_sys.items():
            good = c - r_all.get(g, 0)
            if good > 0:
                d_num += Fraction(good, c)
        del_sum += _div(d_num, len(del_sys), len(del_ref))

        add_sys = {g for g in o if g not in s}
        add_ref = {g for g in r_all if g not in s}
        hit = len(add_sys & add_ref)
        add_sum += _f1(_div(hit, len(add_sys), len(add_ref)), _div(hit, len(add_ref), len(add_sys)))
    return float((keep_sum + del_sum + add_sum) / (3 * max_n))


def _sign(v):
    return (v > 0) - (v < 0)


def tau_b_oracle(x, y):
    """Tau-b by enumerating every unordered pair."""
    n = len(x)
    conc = disc = tie_x = tie_y = 0
    for i, j in itertools.combinations(range(n), 2):
        sx, sy = _sign(x[i] - x[j]), _sign(y[i] - y[j])
        if sx == 0:
            tie_x += 1
        if sy == 0:
            tie_y += 1
        if sx * sy > 0:
            conc += 1
        elif sx * sy < 0:
            disc += 1
    n0 = n * (n - 1) // 2
    return (conc - disc) / math.sqrt((n0 - tie_x) * (n0 - tie_y))


def alpha_oracle(ratings):
    """Nominal alpha from pairwise disagreement counts, in exact fractions."""
    units = []
    for j in range(len(ratings[0])):
        vals = [row[j] for row in ratings if row[j] is not None]
        if len(vals) >= 2:
            units.append(vals)
    pooled = [v for u in units for v in u]
    n = len(pooled)
    observed = Fraction(0)
    for u in units:
        m = len(u)
        mismatched = sum(1 for a, b in itertools.permutations(range(m), 2) if u[a] != u[b])
        observed += Fraction(mismatched, m - 1)
    observed /= n
    expected = Fraction(
        sum(1 for a, b in itertools.permutations(range(n), 2) if pooled[a] != pooled[b]), n * (n - 1)
    )
    if expected == 0:
        return 1.0
    return float(1 - observed / expected)


def bootstrap_oracle(scores_a, scores_b, index_blocks, n_resamples):
    """Count non-positive resampled sums with plain Python loops."""
    diffs = [a - b for a, b in zip(scores_a, scores_b)]
    if sum(diffs) <= 0:
        return 1.0
    bad = 0
    for block in index_blocks:
        for row in block.tolist():
            total = 0.0
            for i in row:
                total += diffs[i]
            if total <= 0:
                bad += 1
    return bad / n_resamples


def bootstrap_exact(scores_a, scores_b):
    """Exact resampling distribution: P(resampled diff sum <= 0) over all n**n draws."""
    diffs = [Fraction(a) - Fraction(b) for a, b in zip(scores_a, scores_b)]
    n = len(diffs)
    bad = sum(1 for draw in itertools.product(range(n), repeat=n) if sum(diffs[i] for i in draw) <= 0)
    return bad / n**n
