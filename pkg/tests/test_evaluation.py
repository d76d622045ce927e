import random

import numpy as np
import pytest

from deidkit.errors import ConfigError
from deidkit.evaluation import (
    Prf,
    approx_randomization,
    entities_from_corpus,
    entity_prf,
    predictions_by_document,
    report_to_csv,
    report_to_table,
)

PHI = ("Patient", "Doctor", "Date", "ID")


def test_partial_span_counts_as_both_errors():
    gold = {("d1", 0, 8, "Patient")}  # "Jane Doe"
    pred = {("d1", 0, 4, "Patient")}  # "Jane" only
    report = entity_prf(gold, pred)
    assert (report.tp, report.fp, report.fn) == (0, 1, 1)
    assert report.f1 == 0.0


def test_exact_match_is_perfect():
    gold = {("d1", 0, 8, "Patient"), ("d2", 3, 7, "Date")}
    report = entity_prf(gold, set(gold))
    assert (report.precision, report.recall, report.f1) == (1.0, 1.0, 1.0)


def test_half_right():
    gold = {("d1", 0, 8, "Patient"), ("d1", 10, 14, "Date")}
    pred = {("d1", 0, 8, "Patient"), ("d1", 20, 24, "Date")}
    report = entity_prf(gold, pred)
    assert (report.tp, report.fp, report.fn) == (1, 1, 1)
    assert report.precision == report.recall == report.f1 == 0.5


def test_right_span_wrong_type():
    gold = {("d1", 0, 8, "Patient")}
    pred = {("d1", 0, 8, "Doctor")}
    report = entity_prf(gold, pred)
    assert (report.tp, report.fp, report.fn) == (0, 1, 1)


def test_swap_gold_and_pred_swaps_precision_recall():
    rng = random.Random(0)
    gold = {("d", rng.randrange(50), 50 + i, rng.choice(PHI)) for i in range(8)}
    pred = {("d", rng.randrange(50), 50 + i, rng.choice(PHI)) for i in range(5)}
    fwd = entity_prf(gold, pred)
    rev = entity_prf(pred, gold)
    assert fwd.precision == rev.recall and fwd.recall == rev.precision
    assert fwd.f1 == pytest.approx(rev.f1)


def test_micro_totals_equal_sum_of_per_type_counts():
    rng = random.Random(1)
    gold, pred = set(), set()
    for i in range(60):
        doc = f"d{rng.randrange(5)}"
        ent = (doc, i * 10, i * 10 + rng.randrange(1, 9), rng.choice(PHI))
        if rng.random() < 0.7:
            gold.add(ent)
        if rng.random() < 0.7:
            pred.add(ent)
    report = entity_prf(gold, pred)
    assert report.tp == sum(v.tp for v in report.per_phi_type.values())
    assert report.fp == sum(v.fp for v in report.per_phi_type.values())
    assert report.fn == sum(v.fn for v in report.per_phi_type.values())
    whole = Prf(report.tp, report.fp, report.fn)
    assert report.f1 == whole.f1


def test_note_type_breakdown_uses_document_map():
    gold = {("a", 0, 4, "Date"), ("b", 0, 4, "Date")}
    pred = {("a", 0, 4, "Date")}
    report = entity_prf(gold, pred, note_types={"a": "admit", "b": "surgery"})
    assert report.per_note_type["admit"].f1 == 1.0
    assert report.per_note_type["surgery"].recall == 0.0


def brute_force_counts(gold, pred):
    gold, pred = list(gold), list(pred)
    matched = [False] * len(pred)
    tp = 0
    for g in gold:
        for i, p in enumerate(pred):
            if not matched[i] and p == g:
                matched[i] = True
                tp += 1
                break
    fp = sum(1 for m in matched if not m)
    fn = len(gold) - tp
    return tp, fp, fn


def test_scorer_matches_brute_force_on_random_instances():
    rng = random.Random(2)
    for _ in range(1000):
        universe = [
            (f"d{rng.randrange(3)}", s * 5, s * 5 + rng.randrange(1, 5), rng.choice(PHI))
            for s in range(rng.randrange(1, 10))
        ]
        gold = {e for e in universe if rng.random() < 0.6}
        pred = {e for e in universe if rng.random() < 0.6}
        report = entity_prf(gold, pred)
        assert (report.tp, report.fp, report.fn) == brute_force_counts(gold, pred)


def test_f1_zero_iff_no_overlap_one_iff_equal():
    gold = {("d", 0, 3, "Date")}
    assert entity_prf(gold, {("d", 4, 6, "Date")}).f1 == 0.0
    assert entity_prf(gold, set(gold)).f1 == 1.0
    assert entity_prf(set(), set()).f1 == 0.0


# -- significance --------------------------------------------------------------


def doc_sets(n_docs, hit_rate, rng, prefix="d"):
    gold, a = {}, {}
    for i in range(n_docs):
        doc = f"{prefix}{i}"
        gold[doc] = {(doc, 0, 5, "Date"), (doc, 10, 15, "Patient")}
        a[doc] = {e for e in gold[doc] if rng.random() < hit_rate}
    return gold, a


def test_identical_predictions_give_p_one():
    rng = random.Random(3)
    gold, a = doc_sets(20, 0.7, rng)
    result = approx_randomization(gold, a, dict(a), n_shuffles=200, seed=1)
    assert result.p_value == 1.0
    assert result.observed_delta == 0.0


def test_zero_shuffles_defined_by_smoothing():
    rng = random.Random(4)
    gold, a = doc_sets(5, 0.5, rng)
    result = approx_randomization(gold, a, dict(a), n_shuffles=0, seed=1)
    assert result.p_value == 1.0


def test_perfect_versus_empty_is_significant():
    gold = {}
    perfect = {}
    empty = {}
    for i in range(200):
        doc = f"d{i}"
        gold[doc] = {(doc, 0, 5, "Date")}
        perfect[doc] = set(gold[doc])
        empty[doc] = set()
    result = approx_randomization(gold, perfect, empty, n_shuffles=2000, seed=5)
    assert result.observed_delta == pytest.approx(1.0)
    assert result.p_value <= 0.05


def test_parallel_equals_serial():
    rng = random.Random(6)
    gold, a = doc_sets(30, 0.8, rng)
    _, b = doc_sets(30, 0.5, random.Random(7))
    serial = approx_randomization(gold, a, b, n_shuffles=500, seed=9, jobs=1)
    parallel = approx_randomization(gold, a, b, n_shuffles=500, seed=9, jobs=4)
    assert serial.p_value == parallel.p_value
    assert serial.observed_delta == parallel.observed_delta


def test_p_value_bounds_and_relabeling_invariance():
    rng = random.Random(8)
    gold, a = doc_sets(15, 0.9, rng)
    _, b = doc_sets(15, 0.3, random.Random(9))
    r = approx_randomization(gold, a, b, n_shuffles=300, seed=2)
    assert 1 / 301 <= r.p_value <= 1.0
    # relabel ids but keep insertion order: identical p-value
    mapping = {d: f"x{j}" for j, d in enumerate(gold)}
    relabel = lambda sets: {
        mapping[d]: {(mapping[d], s, e, t) for (_, s, e, t) in v} for d, v in sets.items()
    }
    r2 = approx_randomization(relabel(gold), relabel(a), relabel(b), n_shuffles=300, seed=2)
    assert r2.p_value == r.p_value


def test_document_set_mismatch_rejected():
    rng = random.Random(10)
    gold, a = doc_sets(5, 0.5, rng)
    b = dict(a)
    del b["d0"]
    with pytest.raises(ConfigError, match="same documents"):
        approx_randomization(gold, a, b, n_shuffles=10, seed=1)


# -- reports ---------------------------------------------------------------------


def test_report_rendering():
    gold = {("a", 0, 4, "Date"), ("b", 0, 4, "Patient")}
    pred = {("a", 0, 4, "Date"), ("b", 1, 4, "Patient")}
    report = entity_prf(gold, pred, note_types={"a": "admit", "b": "surgery"})
    csv = report_to_csv(report)
    lines = csv.strip().split("\n")
    assert lines[0] == "scope,key,tp,fp,fn,precision,recall,f1"
    assert lines[1].startswith("overall,,1,1,1,0.5")
    assert any(line.startswith("phi_type,Date,1,0,0,1.0") for line in lines)
    assert any(line.startswith("note_type,surgery,0,1,1,0.0") for line in lines)
    table = report_to_table(report)
    assert "overall" in table and "Date" in table


def test_entities_from_corpus_roundtrip():
    from deidkit.corpus import SyntheticSpec, generate_synthetic

    corpus = generate_synthetic(SyntheticSpec(n_domains=2, notes_per_domain=4, seed=1))
    entities = entities_from_corpus(corpus)
    by_doc = predictions_by_document(corpus)
    assert entities == {e for s in by_doc.values() for e in s}
    assert set(by_doc.keys()) == {d.id for d in corpus.documents}
