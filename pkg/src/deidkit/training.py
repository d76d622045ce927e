"""Training strategies: staged plans, seeded epochs, dev-split early stopping.

A plan fully determines a run given its seed: vocabulary construction order,
parameter init, per-epoch shuffling, dropout draws, and dev splits all derive
from it deterministically.
"""

from __future__ import annotations

import json
import logging
import math
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .corpus.bio import encode_bio
from .corpus.fileio import load_corpus
from .corpus.model import Annotation, Corpus, Document, LabelSet, Sentence
from .errors import AnnotationError, ConfigError, TrainingError
from .evaluation import entities_from_document, entity_prf
from .heads import HeadConfig
from .network.tagger import SentenceFeatures, Tagger, encode_sentence
from .network.vocab import Vocabulary
from .numerics import TrainingConfig, clip_gradients, seeded_rng, sgd_step

logger = logging.getLogger("deidkit.training")

STRATEGIES = ("sequential", "fine_tuning", "concurrent", "in_domain")

# seed stream tags, to keep independent rng streams per purpose
_DEV_SPLIT, _EPOCH_SHUFFLE, _DROPOUT, _MERGE = 211, 223, 227, 229


@dataclass(frozen=True)
class TrainingPlan:
    strategy: str
    stages: tuple[tuple[str, ...], ...]  # corpus paths, one tuple per stage
    head: HeadConfig = HeadConfig()
    config: TrainingConfig = TrainingConfig()
    seed: int = 42

    def __post_init__(self) -> None:
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"unknown strategy {self.strategy!r}")
        if not self.stages or any(not stage for stage in self.stages):
            raise ConfigError("every stage needs at least one corpus")
        n = len(self.stages)
        if self.strategy in ("sequential", "fine_tuning") and n < 2:
            raise ConfigError(f"{self.strategy} training needs at least two stages")
        if self.strategy in ("concurrent", "in_domain") and n != 1:
            raise ConfigError(f"{self.strategy} training takes exactly one stage")
        if self.strategy == "concurrent" and len(self.stages[0]) < 2:
            raise ConfigError("concurrent training needs at least two corpora")

    def to_dict(self) -> dict:
        return {
            "strategy": self.strategy,
            "stages": [list(stage) for stage in self.stages],
            "head": self.head.to_dict(),
            "config": self.config.to_dict(),
            "seed": self.seed,
        }


def load_plan(path: str | Path) -> TrainingPlan:
    with open(path, encoding="utf-8") as handle:
        raw = json.load(handle)
    known = {"strategy", "stages", "head", "config", "seed"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown plan keys: {sorted(unknown)}")
    if "strategy" not in raw or "stages" not in raw:
        raise ConfigError("a plan must name a strategy and its stages")
    head_raw = raw.get("head", {})
    if isinstance(head_raw, str):
        head_raw = {"kind": head_raw}
    return TrainingPlan(
        strategy=raw["strategy"],
        stages=tuple(tuple(stage) for stage in raw["stages"]),
        head=HeadConfig.from_dict(head_raw),
        config=TrainingConfig.from_dict(raw.get("config", {})),
        seed=int(raw.get("seed", 42)),
    )


@dataclass
class EarlyStopState:
    best_dev_f1: float = -math.inf
    epochs_since_improvement: int = 0
    best_checkpoint: object = None  # ParameterStore snapshot


@dataclass(frozen=True)
class StageLogRow:
    stage: int
    epoch: int
    train_loss: float
    dev_f1: float
    patience: int
    seconds: float


@dataclass
class TrainResult:
    tagger: Tagger
    domains: list[str]
    log: list[StageLogRow]
    meta: dict


@dataclass(frozen=True)
class SentenceItem:
    features: SentenceFeatures
    tag_ids: np.ndarray
    domain_id: int


def sentence_annotations(doc: Document, sentence: Sentence) -> list[Annotation]:
    """Annotations fully inside the sentence; straddling spans are an error."""
    out = []
    for ann in doc.annotations:
        if ann.end <= sentence.start or ann.start >= sentence.end:
            continue
        if ann.start < sentence.start or ann.end > sentence.end:
            raise AnnotationError(
                f"document {doc.id!r}: annotation [{ann.start},{ann.end}) "
                f"crosses a sentence boundary"
            )
        out.append(ann)
    return out


def sentence_items(tagger: Tagger, docs: list[Document]) -> list[SentenceItem]:
    items = []
    for doc in docs:
        for sentence in doc.sentences:
            tags = encode_bio(
                sentence, sentence_annotations(doc, sentence), tagger.labels, doc.id
            )
            items.append(
                SentenceItem(
                    encode_sentence(tagger.vocab, sentence),
                    np.asarray(tags, dtype=np.int64),
                    doc.domain_id,
                )
            )
    return items


def run_training_epoch(
    tagger: Tagger,
    items: list[SentenceItem],
    shuffle_rng: np.random.Generator,
    dropout_rng: np.random.Generator,
) -> float:
    """One seeded pass of single-sentence SGD; returns the mean loss."""
    order = shuffle_rng.permutation(len(items))
    total = 0.0
    config = tagger.config
    for index in order:
        item = items[index]
        total += tagger.loss_and_grads(
            item.features, item.tag_ids, item.domain_id, rng=dropout_rng
        )
        clip_gradients(tagger.store, config.clip_norm)
        sgd_step(tagger.store, config.lr)
    return total / len(items)


def dev_entity_f1(tagger: Tagger, docs: list[Document]) -> float:
    gold: set = set()
    pred: set = set()
    for doc in docs:
        gold |= entities_from_document(doc)
        for ann in tagger.predict_document(doc):
            pred.add((doc.id, ann.start, ann.end, ann.phi_type))
    return entity_prf(gold, pred).f1


def split_dev(
    corpora: list[Corpus], dev_fraction: float, rng: np.random.Generator
) -> tuple[list[Document], list[Document]]:
    """Per-corpus seeded carve of dev documents (at least one per corpus)."""
    train_docs: list[Document] = []
    dev_docs: list[Document] = []
    for corpus in corpora:
        docs = corpus.documents
        if not docs:
            raise TrainingError("cannot train on an empty corpus")
        n_dev = 0
        if dev_fraction > 0:
            n_dev = max(1, math.floor(dev_fraction * len(docs)))
        if n_dev >= len(docs):
            raise TrainingError(
                f"dev split of {n_dev} documents leaves no training data "
                f"(corpus has {len(docs)})"
            )
        order = rng.permutation(len(docs))
        dev_docs.extend(docs[i] for i in order[:n_dev])
        train_docs.extend(docs[i] for i in order[n_dev:])
    if not dev_docs:
        raise TrainingError("dev split is empty; set a positive dev_fraction")
    return train_docs, dev_docs


def train_stage(
    tagger: Tagger,
    corpora: list[Corpus],
    stage_index: int,
    seed: int,
    dev_score_fn=None,
) -> list[StageLogRow]:
    """Train until dev F1 stops improving; leaves the best epoch's parameters."""
    config = tagger.config
    score = dev_score_fn or dev_entity_f1
    train_docs, dev_docs = split_dev(
        corpora, config.dev_fraction, seeded_rng(seed, _DEV_SPLIT, stage_index)
    )
    merge_rng = seeded_rng(seed, _MERGE, stage_index)
    train_docs = [train_docs[i] for i in merge_rng.permutation(len(train_docs))]
    items = sentence_items(tagger, train_docs)
    if not items:
        raise TrainingError("no training sentences in this stage")

    shuffle_rng = seeded_rng(seed, _EPOCH_SHUFFLE, stage_index)
    dropout_rng = seeded_rng(seed, _DROPOUT, stage_index)
    early = EarlyStopState()
    log: list[StageLogRow] = []
    for epoch in range(1, config.max_epochs + 1):
        started = time.perf_counter()
        mean_loss = run_training_epoch(tagger, items, shuffle_rng, dropout_rng)
        dev_f1 = score(tagger, dev_docs)
        if dev_f1 > early.best_dev_f1:
            early.best_dev_f1 = dev_f1
            early.epochs_since_improvement = 0
            early.best_checkpoint = tagger.store.clone()
        else:
            early.epochs_since_improvement += 1
        row = StageLogRow(
            stage_index, epoch, mean_loss, dev_f1,
            early.epochs_since_improvement, time.perf_counter() - started,
        )
        log.append(row)
        logger.info(
            "stage %d epoch %d loss %.4f dev_f1 %.4f patience %d",
            row.stage, row.epoch, row.train_loss, row.dev_f1, row.patience,
        )
        if early.epochs_since_improvement > config.patience:
            break
    tagger.store.copy_values_from(early.best_checkpoint)
    return log


def build_domain_registry(stage_corpora: list[list[Corpus]]) -> list[str]:
    domains: list[str] = []
    for stage in stage_corpora:
        for corpus in stage:
            for name in corpus.domains:
                if name not in domains:
                    domains.append(name)
    return domains


def _remap_domains(stage_corpora: list[list[Corpus]], registry: list[str]) -> list[list[Corpus]]:
    index = {name: i for i, name in enumerate(registry)}
    out = []
    for stage in stage_corpora:
        remapped_stage = []
        for corpus in stage:
            docs = [
                Document(
                    d.id, d.note_type, index[corpus.domains[d.domain_id]],
                    d.text, list(d.annotations),
                )
                for d in corpus.documents
            ]
            remapped_stage.append(Corpus(docs, list(registry)))
        out.append(remapped_stage)
    return out


def build_vocab(stage_corpora: list[list[Corpus]]) -> Vocabulary:
    """Union vocabulary over every stage, built once before stage one."""
    return Vocabulary.build([c for stage in stage_corpora for c in stage])


def run_plan(
    plan: TrainingPlan,
    stage_corpora: list[list[Corpus]] | None = None,
    labels: LabelSet | None = None,
    dev_score_fn=None,
) -> TrainResult:
    """Execute a training plan end to end and return the trained tagger."""
    if stage_corpora is None:
        stage_corpora = [[load_corpus(p) for p in stage] for stage in plan.stages]
    if len(stage_corpora) != len(plan.stages):
        raise TrainingError("stage corpora do not match the plan's stages")
    labels = labels or LabelSet()

    seen_ids: set[str] = set()
    for stage in stage_corpora:
        for corpus in stage:
            for doc in corpus.documents:
                if doc.id in seen_ids:
                    raise TrainingError(
                        f"duplicate document id {doc.id!r} across training corpora"
                    )
                seen_ids.add(doc.id)
    registry = build_domain_registry(stage_corpora)
    stage_corpora = _remap_domains(stage_corpora, registry)
    if plan.head.kind in ("csd", "jdl"):
        seen = {
            doc.domain_id for stage in stage_corpora for c in stage for doc in c.documents
        }
        if len(seen) < 2:
            raise TrainingError(
                f"the {plan.head.kind} head requires two or more training domains, "
                f"found {len(seen)}"
            )
    vocab = build_vocab(stage_corpora)
    config = replace(plan.config, seed=plan.seed)
    tagger = Tagger(labels, vocab, len(registry), config, plan.head)

    log: list[StageLogRow] = []
    for stage_index, corpora in enumerate(stage_corpora):
        log.extend(train_stage(tagger, corpora, stage_index, plan.seed, dev_score_fn))
    meta = {
        "strategy": plan.strategy,
        "stages": [list(stage) for stage in plan.stages],
        "seed": plan.seed,
        "in_domain_final_stage": plan.strategy == "fine_tuning",
    }
    return TrainResult(tagger, registry, log, meta)


def stage_log_to_csv(log: list[StageLogRow]) -> str:
    lines = ["stage,epoch,train_loss,dev_f1,patience,seconds"]
    for row in log:
        lines.append(
            f"{row.stage},{row.epoch},{row.train_loss:.6f},{row.dev_f1:.6f},"
            f"{row.patience},{row.seconds:.3f}"
        )
    return "\n".join(lines) + "\n"
