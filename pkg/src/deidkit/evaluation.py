"""Exact-span entity scoring, breakdowns, and significance testing.

Entities are (document id, start, end, phi type) tuples; a prediction counts
only on an exact tuple match, so partial spans and wrong types are both a
false positive and a false negative.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .corpus.model import Corpus, Document
from .errors import ConfigError

Entity = tuple[str, int, int, str]


@dataclass(frozen=True)
class Prf:
    tp: int
    fp: int
    fn: int

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if (self.tp + self.fp) else 0.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if (self.tp + self.fn) else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2.0 * p * r / (p + r) if (p + r) else 0.0


@dataclass
class MetricsReport:
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float
    per_phi_type: dict[str, Prf] = field(default_factory=dict)
    per_note_type: dict[str, Prf] = field(default_factory=dict)


@dataclass(frozen=True)
class SignificanceResult:
    observed_delta: float
    n_shuffles: int
    p_value: float
    seed: int


def entities_from_document(doc: Document) -> set[Entity]:
    return {(doc.id, a.start, a.end, a.phi_type) for a in doc.annotations}


def entities_from_corpus(corpus: Corpus) -> set[Entity]:
    out: set[Entity] = set()
    for doc in corpus.documents:
        out |= entities_from_document(doc)
    return out


def entity_prf(
    gold: set[Entity],
    pred: set[Entity],
    note_types: Mapping[str, str] | None = None,
) -> MetricsReport:
    """Micro P/R/F1 with per-PHI-type and per-note-type breakdowns."""
    gold, pred = set(gold), set(pred)
    tp_set = gold & pred
    fp_set = pred - gold
    fn_set = gold - pred

    def count_by(key_fn) -> dict[str, Prf]:
        counts: dict[str, list[int]] = {}
        for bucket, entities in ((0, tp_set), (1, fp_set), (2, fn_set)):
            for entity in entities:
                key = key_fn(entity)
                counts.setdefault(key, [0, 0, 0])[bucket] += 1
        return {k: Prf(*v) for k, v in sorted(counts.items())}

    per_phi = count_by(lambda e: e[3])
    per_note = {}
    if note_types is not None:
        per_note = count_by(lambda e: note_types.get(e[0], "unknown"))
    total = Prf(len(tp_set), len(fp_set), len(fn_set))
    return MetricsReport(
        total.tp, total.fp, total.fn,
        total.precision, total.recall, total.f1,
        per_phi, per_note,
    )


def _f1_from_counts(tp: int, fp: int, fn: int) -> float:
    return Prf(tp, fp, fn).f1


def _doc_counts(gold: set[Entity], pred: set[Entity]) -> tuple[int, int, int]:
    return len(gold & pred), len(pred - gold), len(gold - pred)


def approx_randomization(
    gold_by_doc: Mapping[str, set[Entity]],
    preds_a: Mapping[str, set[Entity]],
    preds_b: Mapping[str, set[Entity]],
    n_shuffles: int = 10000,
    seed: int = 42,
    jobs: int = 1,
) -> SignificanceResult:
    """Two-sided paired randomization test on the F1 delta.

    Each shuffle swaps the two systems' predictions per document with
    probability one half and recomputes the delta; the p-value uses add-one
    smoothing: (count(|shuffled| >= |observed|) + 1) / (n_shuffles + 1).
    Per-shuffle RNG streams are derived from (seed, shuffle index), so serial
    and parallel execution produce identical p-values. Swap vectors apply in
    input document order, making the result invariant to id relabeling.
    """
    docs = list(gold_by_doc.keys())
    if set(preds_a.keys()) != set(docs) or set(preds_b.keys()) != set(docs):
        raise ConfigError("the two prediction sets must cover the same documents")
    counts_a = np.array([_doc_counts(gold_by_doc[d], preds_a[d]) for d in docs])
    counts_b = np.array([_doc_counts(gold_by_doc[d], preds_b[d]) for d in docs])

    def delta(swap: np.ndarray) -> float:
        a = np.where(swap[:, None], counts_b, counts_a).sum(axis=0)
        b = np.where(swap[:, None], counts_a, counts_b).sum(axis=0)
        return _f1_from_counts(*a) - _f1_from_counts(*b)

    observed = delta(np.zeros(len(docs), dtype=bool))
    threshold = abs(observed)

    def count_range(indices: Iterable[int]) -> int:
        hits = 0
        for i in indices:
            rng = np.random.default_rng(np.random.SeedSequence([seed, i]))
            swap = rng.random(len(docs)) < 0.5
            if abs(delta(swap)) >= threshold:
                hits += 1
        return hits

    if jobs <= 1 or n_shuffles < 2:
        count = count_range(range(n_shuffles))
    else:
        chunks = np.array_split(np.arange(n_shuffles), jobs)
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            count = sum(pool.map(count_range, chunks))
    p_value = (count + 1) / (n_shuffles + 1)
    return SignificanceResult(observed, n_shuffles, p_value, seed)


def predictions_by_document(corpus: Corpus) -> dict[str, set[Entity]]:
    return {doc.id: entities_from_document(doc) for doc in corpus.documents}


# -- report rendering --------------------------------------------------------


def _rows(report: MetricsReport) -> list[tuple[str, str, Prf]]:
    rows = [("overall", "", Prf(report.tp, report.fp, report.fn))]
    rows += [("phi_type", k, v) for k, v in report.per_phi_type.items()]
    rows += [("note_type", k, v) for k, v in report.per_note_type.items()]
    return rows


def report_to_csv(report: MetricsReport) -> str:
    lines = ["scope,key,tp,fp,fn,precision,recall,f1"]
    for scope, key, prf in _rows(report):
        lines.append(
            f"{scope},{key},{prf.tp},{prf.fp},{prf.fn},"
            f"{prf.precision:.6f},{prf.recall:.6f},{prf.f1:.6f}"
        )
    return "\n".join(lines) + "\n"


def report_to_table(report: MetricsReport) -> str:
    lines = [f"{'scope':<10} {'key':<16} {'tp':>6} {'fp':>6} {'fn':>6} "
             f"{'P':>8} {'R':>8} {'F1':>8}"]
    for scope, key, prf in _rows(report):
        lines.append(
            f"{scope:<10} {key:<16} {prf.tp:>6} {prf.fp:>6} {prf.fn:>6} "
            f"{prf.precision:>8.4f} {prf.recall:>8.4f} {prf.f1:>8.4f}"
        )
    return "\n".join(lines) + "\n"
