import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fecorrect.errors import DegenerateInput, InsufficientData, LengthMismatch
from fecorrect.metrics import (
    BLOCK_SIZE,
    EvalRecord,
    bootstrap_indices,
    corpus_sari,
    kendall_tau,
    krippendorff_alpha,
    paired_bootstrap,
    sari,
)
from oracles import alpha_oracle, bootstrap_exact, bootstrap_oracle, sari_oracle, tau_b_oracle

# hand enumeration, n = 1..4 (keep F1 / delete P / add F1):
#   1: 1 / 1 / 1      2: 2/3 / 1 / 1      3: 0 / 1 / 0      4: 0 / 1 / 1
SARI_GOLDEN = 0.75


def _identity(value, _ref):
    return value


# -- SARI ---------------------------------------------------------------------


def test_sari_golden():
    rec = EvalRecord("about 616 kilometres", "about 616 kms", ("approximately 616 kms",))
    assert sari(rec) == pytest.approx(SARI_GOLDEN, abs=1e-12)
    assert sari_oracle(rec.input, rec.output, rec.references) == pytest.approx(SARI_GOLDEN, abs=1e-12)


def test_sari_identity_cases():
    assert sari(EvalRecord("a b c", "a b c", ("a b c",))) == 1.0
    assert sari(EvalRecord("a b c", "a b d", ("a b d",))) == 1.0


def test_corpus_sari():
    perfect = EvalRecord("a b", "a b", ("a b",))
    half = EvalRecord("a b c", "a b c", ("a b d",))
    assert corpus_sari([perfect, perfect]) == 100.0
    assert corpus_sari([perfect, half]) == pytest.approx(50.0 * (1.0 + sari(half)))
    with pytest.raises(ValueError):
        corpus_sari([])


def test_sari_reference_order_invariant():
    refs = ("about 616 kms", "approximately 616 km", "616 kilometres")
    a = sari(EvalRecord("about 616 kilometres", "about 616 km", refs))
    b = sari(EvalRecord("about 616 kilometres", "about 616 km", refs[::-1]))
    assert a == b


def test_eval_record_needs_reference():
    with pytest.raises(ValueError):
        EvalRecord("a", "b", ())


sentence = st.lists(st.sampled_from("abcde"), max_size=7).map(" ".join)


@settings(max_examples=150, deadline=None)
@given(sentence, sentence, st.lists(sentence, min_size=1, max_size=3))
def test_sari_matches_oracle(src, out, refs):
    value = sari(EvalRecord(src, out, tuple(refs)))
    assert 0.0 <= value <= 1.0
    assert value == pytest.approx(sari_oracle(src, out, refs), abs=1e-9)


# -- Kendall tau-b --------------------------------------------------------------


def test_tau_trivial():
    assert kendall_tau([1, 2, 3], [10, 20, 30]) == pytest.approx(1.0)
    assert kendall_tau([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)


def test_tau_with_ties_hand_value():
    # C=5, D=0, one x-tie, no y-ties: 5 / sqrt(5 * 6)
    assert kendall_tau([1, 2, 2, 3], [1, 3, 2, 4]) == pytest.approx(5 / math.sqrt(30), abs=1e-12)


def test_tau_errors():
    with pytest.raises(DegenerateInput):
        kendall_tau([1, 1, 1], [1, 2, 3])
    with pytest.raises(LengthMismatch):
        kendall_tau([1, 2], [1, 2, 3])


@settings(max_examples=150, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 4), st.integers(0, 4)), min_size=2, max_size=12))
def test_tau_matches_oracle(pairs):
    x, y = [p[0] for p in pairs], [p[1] for p in pairs]
    if len(set(x)) < 2 or len(set(y)) < 2:
        return
    v = kendall_tau(x, y)
    assert -1.0 <= v <= 1.0
    assert v == pytest.approx(tau_b_oracle(x, y), abs=1e-12)
    assert kendall_tau(y, x) == pytest.approx(v, abs=1e-12)


# -- Krippendorff's alpha ----------------------------------------------------------


def test_alpha_perfect_agreement():
    assert krippendorff_alpha([["a", "b", "a"], ["a", "b", "a"]]) == 1.0
    assert krippendorff_alpha([["a", "a"], ["a", "a"]]) == 1.0


def test_alpha_one_disagreement_hand_value():
    # coincidences: o_aa=7, o_bb=3, o_ab=o_ba=1; n_a=8, n_b=4
    ratings = [["a", "a", "b", "a"], ["a", "a", "b", "a"], ["a", "a", "b", "b"]]
    assert krippendorff_alpha(ratings) == pytest.approx(1 - (2 / 12) / (64 / 132), abs=1e-12)
    assert krippendorff_alpha(ratings) == pytest.approx(0.65625, abs=1e-12)


def test_alpha_missing_values():
    ratings = [[1, 2, None, 1], [1, 2, 3, float("nan")], [None, 2, 3, 1]]
    assert krippendorff_alpha(ratings) == pytest.approx(alpha_oracle(
        [[None if isinstance(v, float) else v for v in row] for row in ratings]), abs=1e-12)


def test_alpha_errors():
    with pytest.raises(InsufficientData):
        krippendorff_alpha([[1, None], [1, 2]])
    with pytest.raises(LengthMismatch):
        krippendorff_alpha([[1, 2], [1]])
    with pytest.raises(ValueError):
        krippendorff_alpha([[1, 2], [1, 2]], level="interval")


# -- paired bootstrap ------------------------------------------------------------------


def test_bootstrap_identical_systems():
    scores = [0.5, 0.25, 1.0]
    assert paired_bootstrap(_identity, scores, scores, [None] * 3, 1000, seed=3) == 1.0


def test_bootstrap_worse_system_is_one():
    assert paired_bootstrap(_identity, [0.0, 0.5], [0.5, 0.5], [None, None], 1000) == 1.0


def test_bootstrap_uniform_dominance():
    a = [1.0] * 20
    b = [0.5] * 20
    assert paired_bootstrap(_identity, a, b, [None] * 20, 1000, seed=0) == 0.0


def test_bootstrap_indices_are_partition_independent():
    whole = np.vstack(list(bootstrap_indices(7, 2500, seed=11)))
    parts = np.vstack([next(bootstrap_indices(7, 2500, seed=11, block=b)) for b in range(3)])
    assert whole.shape == (2500, 7)
    assert np.array_equal(whole, parts)


def test_bootstrap_workers_do_not_change_result():
    rng = random.Random(5)
    a = [rng.randint(0, 8) / 8 for _ in range(12)]
    b = [rng.randint(0, 8) / 8 for _ in range(12)]
    if sum(a) <= sum(b):
        a, b = b, a
    p1 = paired_bootstrap(_identity, a, b, [None] * 12, 3 * BLOCK_SIZE + 17, seed=2)
    p4 = paired_bootstrap(_identity, a, b, [None] * 12, 3 * BLOCK_SIZE + 17, seed=2, workers=4)
    assert p1 == p4


def test_bootstrap_matches_loop_oracle():
    rng = random.Random(9)
    for _ in range(20):
        n = rng.randint(1, 12)
        a = [rng.randint(0, 16) / 16 for _ in range(n)]
        b = [rng.randint(0, 16) / 16 for _ in range(n)]
        p = paired_bootstrap(_identity, a, b, [None] * n, 1500, seed=n)
        assert p == bootstrap_oracle(a, b, bootstrap_indices(n, 1500, seed=n), 1500)


def test_bootstrap_close_to_exact_distribution():
    a = [0.75, 0.25, 0.5, 0.0]
    b = [0.25, 0.5, 0.25, 0.25]
    exact = bootstrap_exact(a, b)
    n_res = 20_000
    p = paired_bootstrap(_identity, a, b, [None] * 4, n_res, seed=1)
    assert abs(p - exact) < 5 * math.sqrt(exact * (1 - exact) / n_res)


def test_bootstrap_length_mismatch():
    with pytest.raises(LengthMismatch):
        paired_bootstrap(_identity, [1.0], [1.0, 2.0], [None], 10)
