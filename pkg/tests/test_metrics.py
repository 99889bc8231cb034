import math
import random
import unicodedata

import pytest

from dforge.dataset import MCQItem
from dforge.errors import DataError, UsageError
from dforge.metrics import (
    EvalReport,
    Prediction,
    evaluate,
    is_match,
    mrr,
    ndcg_at_k,
    precision_recall_f1_at_k,
)


def _norm(s):
    return " ".join(unicodedata.normalize("NFC", s).split()).lower()


def oracle_item_metrics(ranked, gold, k):
    """Independent per-item recomputation used as the reference."""
    gold_n = {_norm(g) for g in gold}
    ranked_n = [_norm(r) for r in ranked]
    match_at = [r in gold_n for r in ranked_n]
    hits_k = len({r for r in ranked_n[:k] if r in gold_n})
    p = hits_k / k
    r = hits_k / len(gold_n)
    f1 = 0.0 if p + r == 0 else 2 * p * r / (p + r)
    rr = 0.0
    for i, m in enumerate(match_at, 1):
        if m:
            rr = 1.0 / i
            break
    dcg = sum(1 / math.log2(i + 1) for i, m in enumerate(match_at[:k], 1) if m)
    idcg = sum(1 / math.log2(i + 1) for i in range(1, min(k, len(gold_n)) + 1))
    return p, r, f1, rr, dcg / idcg


class TestIsMatch:
    def test_normalized_equality(self):
        assert is_match("Lungs ", "lungs")

    def test_no_plural_credit(self):
        assert not is_match("lung", "lungs")

    def test_hyphen_preserved(self):
        assert not is_match("bean shaped", "bean-shaped")


class TestPrecisionRecallF1:
    GOLD = {"lungs", "pancreas", "liver"}

    def test_perfect_top3(self):
        assert precision_recall_f1_at_k(["lungs", "pancreas", "liver"], self.GOLD, 3) == \
            pytest.approx((1.0, 1.0, 1.0))

    def test_one_of_three(self):
        p, r, f1 = precision_recall_f1_at_k(["lungs", "bone", "skin"], self.GOLD, 3)
        assert (p, r, f1) == pytest.approx((1 / 3, 1 / 3, 1 / 3))

    def test_p_at_1_with_three_gold(self):
        p, r, _ = precision_recall_f1_at_k(["lungs"], self.GOLD, 1)
        assert p == pytest.approx(1.0)
        assert r == pytest.approx(1 / 3)

    def test_empty_gold_is_error(self):
        with pytest.raises(DataError):
            precision_recall_f1_at_k(["x"], [], 3)

    def test_bad_k(self):
        with pytest.raises(UsageError):
            precision_recall_f1_at_k(["x"], self.GOLD, 0)


class TestMrr:
    def test_first_match(self):
        assert mrr(["lungs", "x"], {"lungs"}) == 1.0

    def test_match_at_rank_two(self):
        assert mrr(["x", "lungs"], {"lungs"}) == 0.5

    def test_no_match(self):
        assert mrr(["x", "y"], {"lungs"}) == 0.0


class TestNdcg:
    GOLD = {"a", "b", "c"}

    def test_perfect(self):
        assert ndcg_at_k(["a", "b", "c"], self.GOLD, 3) == pytest.approx(1.0)

    def test_single_match_at_rank_three(self):
        val = ndcg_at_k(["x", "y", "a"], self.GOLD, 3)
        assert val == pytest.approx(0.2346, abs=1e-3)

    def test_no_match(self):
        assert ndcg_at_k(["x", "y", "z"], self.GOLD, 3) == 0.0


def _items(n, gold_size=3):
    items = []
    for i in range(n):
        ds = tuple(f"gold{i}_{j}" for j in range(gold_size))
        items.append(MCQItem(f"it{i:03d}", f"stem {i}", f"ans{i}", ds))
    return items


class TestEvaluate:
    def test_all_perfect(self):
        items = _items(4)
        preds = [Prediction(it.id, it.distractors) for it in items]
        rep = evaluate(preds, items, 3)
        for val in (rep.p_at_1, rep.p_at_k, rep.r_at_k, rep.f1_at_k, rep.mrr, rep.ndcg_at_k):
            assert val == pytest.approx(100.0)
        # R@1 caps at 1/|gold| even for perfect predictions (Table-2 pattern)
        assert rep.r_at_1 == pytest.approx(100.0 / 3)

    def test_all_miss(self):
        items = _items(4)
        preds = [Prediction(it.id, ("zz1", "zz2", "zz3")) for it in items]
        rep = evaluate(preds, items, 3)
        for val in (rep.p_at_1, rep.r_at_1, rep.p_at_k, rep.r_at_k,
                    rep.f1_at_k, rep.mrr, rep.ndcg_at_k):
            assert val == pytest.approx(0.0)

    def test_missing_prediction_counts_and_scores_zero(self):
        items = _items(2)
        preds = [Prediction(items[0].id, items[0].distractors)]
        rep = evaluate(preds, items, 3)
        assert rep.missing_predictions == 1
        assert rep.f1_at_k == pytest.approx(50.0)

    def test_duplicate_prediction_rejected(self):
        items = _items(1)
        preds = [Prediction("it000", ("a", "b")), Prediction("it000", ("c", "d"))]
        with pytest.raises(DataError, match="duplicate prediction"):
            evaluate(preds, items, 3)

    def test_unknown_item_rejected(self):
        with pytest.raises(DataError, match="unknown item"):
            evaluate([Prediction("ghost", ("a",))], _items(1), 3)

    def test_duplicate_distractors_in_one_prediction_rejected(self):
        with pytest.raises(DataError, match="duplicate predictions"):
            evaluate([Prediction("it000", ("a", "A "))], _items(1), 3)

    def test_permutation_invariant(self):
        rng = random.Random(11)
        items = _items(10)
        preds = [Prediction(it.id, (it.distractors[0], "w1", "w2")) for it in items]
        rep_a = evaluate(preds, items, 3)
        shuffled = preds[:]
        rng.shuffle(shuffled)
        items_shuffled = items[:]
        rng.shuffle(items_shuffled)
        rep_b = evaluate(shuffled, items_shuffled, 3)
        assert rep_a.f1_at_k == pytest.approx(rep_b.f1_at_k)
        assert rep_a.mrr == pytest.approx(rep_b.mrr)
        assert rep_a.ndcg_at_k == pytest.approx(rep_b.ndcg_at_k)

    def test_randomized_suite_matches_oracle(self):
        rng = random.Random(50)
        vocab = [f"opt{i}" for i in range(40)]
        items, preds = [], []
        for i in range(50):
            gold = rng.sample(vocab, 3)
            items.append(MCQItem(f"r{i:03d}", f"stem {i}", "answer", tuple(gold)))
            n_pred = rng.randint(1, 6)
            pool = rng.sample(vocab, n_pred)
            preds.append(Prediction(f"r{i:03d}", tuple(pool)))
        rep = evaluate(preds, items, 3)
        cols = list(zip(*(
            oracle_item_metrics(p.ranked_distractors, it.distractors, 3)
            for p, it in zip(preds, items)
        )))
        means = [100 * sum(c) / len(items) for c in cols]
        assert rep.p_at_k == pytest.approx(means[0], abs=1e-9)
        assert rep.r_at_k == pytest.approx(means[1], abs=1e-9)
        assert rep.f1_at_k == pytest.approx(means[2], abs=1e-9)
        assert rep.mrr == pytest.approx(means[3], abs=1e-9)
        assert rep.ndcg_at_k == pytest.approx(means[4], abs=1e-9)

    def test_p_equals_r_equals_f1_when_gold_size_is_k(self):
        rng = random.Random(60)
        vocab = [f"v{i}" for i in range(30)]
        for _ in range(100):
            gold = rng.sample(vocab, 3)
            ranked = rng.sample(vocab, 3)
            p, r, f1 = precision_recall_f1_at_k(ranked, gold, 3)
            assert p == pytest.approx(r)
            assert f1 == pytest.approx(p)

    def test_mrr_never_below_p_at_1(self):
        rng = random.Random(61)
        vocab = [f"v{i}" for i in range(20)]
        for _ in range(100):
            gold = rng.sample(vocab, 3)
            ranked = rng.sample(vocab, rng.randint(1, 6))
            p1, _, _ = precision_recall_f1_at_k(ranked, gold, 1)
            assert mrr(ranked, gold) >= p1 - 1e-12

    def test_adding_a_correct_item_is_monotone(self):
        gold = {"a", "b", "c"}
        before = precision_recall_f1_at_k(["x", "y"], gold, 3)
        after = precision_recall_f1_at_k(["x", "y", "a"], gold, 3)
        assert all(hi >= lo for lo, hi in zip(before, after))
        assert ndcg_at_k(["x", "y", "a"], gold, 3) >= ndcg_at_k(["x", "y"], gold, 3)


class TestReport:
    def test_json_keys_and_scaling(self):
        items = _items(2)
        preds = [Prediction(it.id, it.distractors) for it in items]
        d = evaluate(preds, items, 3).to_json_dict()
        assert d["p@1"] == 100.0 and d["f1@3"] == 100.0 and d["ndcg@3"] == 100.0
        assert d["n_items"] == 2

    def test_table_layout(self):
        rep = EvalReport(k=3, n_items=1, missing_predictions=0, p_at_1=10.58, r_at_1=3.6,
                         p_at_k=9.19, r_at_k=9.19, f1_at_k=9.19, mrr=17.51, ndcg_at_k=15.39)
        table = rep.to_table()
        lines = table.strip().splitlines()
        assert lines[0].split() == ["P@1", "R@1", "F1@3", "MRR", "NDCG@3"]
        assert lines[1].split() == ["10.58", "3.60", "9.19", "17.51", "15.39"]
