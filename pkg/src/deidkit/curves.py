"""Incremental learning curves: fine-tuning from a pretrained model versus
training from scratch, over nested note-type-stratified subsets."""

from __future__ import annotations

from dataclasses import dataclass

from .corpus.model import Corpus, Document, LabelSet
from .errors import ConfigError
from .evaluation import MetricsReport, entities_from_corpus, entity_prf
from .heads import HeadConfig
from .network.tagger import Tagger
from .network.vocab import Vocabulary
from .numerics import TrainingConfig, seeded_rng
from .training import train_stage

_SUBSET_STREAM = 401


@dataclass(frozen=True)
class LearningCurvePoint:
    strategy: str  # "fine_tuned" or "baseline"
    size: int
    seed: int
    overall_f1: float
    note_type_f1: dict[str, float]


def evaluate_tagger(tagger: Tagger, corpus: Corpus) -> MetricsReport:
    gold = entities_from_corpus(corpus)
    pred = set()
    for doc in corpus.documents:
        for ann in tagger.predict_document(doc):
            pred.add((doc.id, ann.start, ann.end, ann.phi_type))
    return entity_prf(gold, pred, note_types=corpus.note_types())


def stratified_nested_subsets(
    docs: list[Document], increments: list[int], seed: int
) -> list[list[Document]]:
    """Nested subsets sampling n/k documents per note type for each size n."""
    if increments != sorted(increments):
        raise ConfigError("increments must be sorted ascending")
    by_type: dict[str, list[Document]] = {}
    for doc in docs:
        by_type.setdefault(doc.note_type, []).append(doc)
    note_types = sorted(by_type)
    rng = seeded_rng(seed, _SUBSET_STREAM)
    shuffled = {
        t: [by_type[t][i] for i in rng.permutation(len(by_type[t]))] for t in note_types
    }
    subsets = []
    for n in increments:
        if n == 0:
            subsets.append([])
            continue
        per_type, remainder = divmod(n, len(note_types))
        if remainder:
            raise ConfigError(
                f"increment {n} does not divide evenly over {len(note_types)} "
                f"note types"
            )
        subset: list[Document] = []
        for note_type in note_types:
            pool = shuffled[note_type]
            if per_type > len(pool):
                raise ConfigError(
                    f"increment {n} exceeds corpus size: note type "
                    f"{note_type!r} has only {len(pool)} documents"
                )
            subset.extend(pool[:per_type])
        subsets.append(subset)
    return subsets


def _as_single_domain_corpus(docs: list[Document]) -> Corpus:
    remapped = [
        Document(d.id, d.note_type, 0, d.text, list(d.annotations)) for d in docs
    ]
    return Corpus(remapped, ["target"])


def clone_tagger(tagger: Tagger, config: TrainingConfig | None = None) -> Tagger:
    """Fresh tagger with copied parameter values; config override must keep shapes."""
    out = Tagger(
        tagger.labels, tagger.vocab, tagger.n_domains, config or tagger.config,
        tagger.head,
    )
    out.store.copy_values_from(tagger.store)
    return out


def learning_curve(
    pretrained: Tagger | None,
    target: Corpus,
    test: Corpus,
    increments: list[int],
    seeds: list[int],
    config: TrainingConfig | None = None,
    head: HeadConfig | None = None,
    labels: LabelSet | None = None,
) -> list[LearningCurvePoint]:
    """One curve: fine-tuned when a pretrained tagger is given, else baseline.

    Subsets are nested per seed. Increment 0 is only meaningful with a
    pretrained model: its point is the pure out-of-domain transfer score.
    """
    head = head or HeadConfig()
    labels = labels or LabelSet()
    strategy = "baseline" if pretrained is None else "fine_tuned"
    points = []
    for seed in seeds:
        subsets = stratified_nested_subsets(target.documents, increments, seed)
        for size, subset in zip(increments, subsets):
            if size == 0:
                if pretrained is None:
                    raise ConfigError("a baseline curve cannot include increment 0")
                model = pretrained
            else:
                subset_corpus = _as_single_domain_corpus(subset)
                if pretrained is None:
                    cfg = (config or TrainingConfig()).replace(seed=seed)
                    vocab = Vocabulary.build([subset_corpus])
                    model = Tagger(labels, vocab, 1, cfg, head, init_seed=seed + size)
                else:
                    model = clone_tagger(pretrained, config)
                train_stage(model, [subset_corpus], stage_index=size, seed=seed)
            report = evaluate_tagger(model, test)
            points.append(
                LearningCurvePoint(
                    strategy, size, seed, report.f1,
                    {k: v.f1 for k, v in report.per_note_type.items()},
                )
            )
    return points


def curve_to_csv(points: list[LearningCurvePoint]) -> str:
    lines = ["strategy,size,seed,note_type,f1"]
    for point in points:
        lines.append(
            f"{point.strategy},{point.size},{point.seed},overall,{point.overall_f1:.6f}"
        )
        for note_type in sorted(point.note_type_f1):
            lines.append(
                f"{point.strategy},{point.size},{point.seed},{note_type},"
                f"{point.note_type_f1[note_type]:.6f}"
            )
    return "\n".join(lines) + "\n"
