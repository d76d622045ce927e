"""Deterministic multi-domain synthetic corpus generation.

Each domain gets a disjoint slice of the name/hospital/location/id/phone
vocabularies and an overlapping-but-distinct subset of the sentence pattern
bank, so models transfer across domains imperfectly: shared grammar and
character shapes carry over, memorized surface forms do not.

PHI token densities are steered by a deficit feedback loop: every sentence
targets the currently most under-represented PHI type, and slots whose type
is already at target fall back to filler words.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from .model import Annotation, Corpus, Document, PHI_TYPES
from ..errors import ConfigError

_FIRST_NAMES = (
    "Alma Bruno Carla Devon Elena Farid Greta Hakim Irene Jonas Katya Lionel "
    "Marta Nadia Otto Priya Quincy Rosa Stefan Talia Umar Vera Wendell Ximena "
    "Yusuf Zelda Abram Bianca Cormac Dalia Ewan Freya Gideon Halle Ivo Jemma "
    "Kofi Lidia Milan Nora Osman Petra Ronan Selma Tobias Una Viktor Willa"
).split()

_LAST_NAMES = (
    "Ackler Bryce Cantrell Dooley Eastman Fenwick Garvey Holloway Ibarra "
    "Jacobs Keating Lambert Mercer Novak Ortega Pruitt Quig Renner Salazar "
    "Tennant Ulrich Vance Whitfield Xiong Yardley Zeller Ashford Barlow "
    "Crowley Draper Ellery Forbes Gracey Hutton Ingles Jarrett Kimball "
    "Lockhart Marsden Naylor Oakes Prescott Quimby Rutledge Sexton Thayer "
    "Underhill Varga"
).split()

_HOSPITALS = (
    "Mercy General Hospital|Lakeview Medical Center|Saint Vincent Clinic|"
    "Harbor Point Hospital|Cedarbrook Infirmary|Northgate Medical Center|"
    "Elmwood Community Hospital|Riverside Clinic|Summit Care Hospital|"
    "Pinehurst Medical Center|Westfall Hospital|Granite Bay Clinic|"
    "Oakdale Memorial Hospital|Fairmont Medical Center|Birchwood Clinic|"
    "Stonebridge Hospital|Maple Grove Medical Center|Seabright Clinic|"
    "Highland Crest Hospital|Willowbrook Medical Center|Ashton Clinic|"
    "Redstone Hospital|Clearwater Medical Center|Larkspur Clinic"
).split("|")

_LOCATIONS = (
    "Brookfield|Eastvale|14 Cedar Avenue|Gormley Heights|Ravenna|"
    "88 Quarry Road|Tamarind Falls|Northport|23 Juniper Lane|Veldt City|"
    "Crestline|51 Harbor Street|Mossgate|Duskwood|7 Alder Court|Kingsmere|"
    "Palomar Flats|302 Birch Boulevard|Wrenfield|Calder Bay|19 Sumac Drive|"
    "Holloway Park|Ember Ridge|640 Garnet Way"
).split("|")

_ID_PREFIXES = ("MR", "PT", "RX", "ENC", "ACC", "LAB", "ADM", "VIS")

_AREA_CODES = ("206", "313", "415", "508", "617", "702", "808", "919")

_MONTHS = (
    "January February March April May June July August September October "
    "November December"
).split()

_CONTENT_WORDS = (
    "stable routine gradual persistent mild moderate ongoing improved care "
    "therapy dosing tolerance outlook recovery mobility appetite hydration "
    "balance rest activity posture strength fatigue comfort breathing "
    "circulation wound healing regimen schedule review caution progress "
    "support guidance teaching oversight clearance intake output baseline "
    "trend variance margin signal pattern detail summary context history "
    "profile status update entry notice remark session briefing rotation "
    "handoff escort transport logistics supply inventory paperwork filing "
    "billing consent coverage approval referral triage queue backlog "
    "followthrough adherence outlooks phased tapered steady brisk gentle "
    "careful thorough prompt routine guarded favorable measured watchful"
).split()

_NOTE_TYPES = ("admit", "discharge", "progress", "nursing", "psychiatry", "surgery")

_DATE_FORMATS = (
    "{m}/{d}",
    "{m}/{d}/{y4}",
    "{mon} {d}",
    "{d} {mon} {y4}",
    "{m}-{d}-{y2}",
    "{mon} {d} {y4}",
)

_PATTERNS = (
    "{Patient} was seen by Dr. {Doctor} on {Date} .",
    "Admission note for {Patient} dated {Date} .",
    "Dr. {Doctor} reviewed the chart at {Hospital} .",
    "The patient {Patient} arrived from {Location} .",
    "Contact the clinic at {Phone} for {F} questions .",
    "Record {ID} was filed by Dr. {Doctor} .",
    "{Patient} , a {Age} year old , presented with {F} {F} .",
    "Follow up at {Hospital} on {Date} .",
    "Transfer to {Hospital} was approved on {Date} .",
    "Please call {Phone} to reach Dr. {Doctor} .",
    "Visit {ID} is scheduled for {Date} .",
    "{Doctor} , M.D. signed the note on {Date} .",
    "Labs were reviewed by Dr. {Doctor} at {Hospital} .",
    "{Patient} lives near {Location} with {F} support .",
    "Case {ID} was discussed at {Hospital} rounds .",
    "Seen in clinic on {Date} for {F} {F} .",
    "Discharge is planned for {Date} per Dr. {Doctor} .",
    "History was obtained from {Patient} and family .",
    "Pharmacy fax {Phone} confirmed the {F} order .",
    "Referral sent to the {Location} office on {Date} .",
    "MRN {ID} matches patient {Patient} .",
    "Nursing staff at {Hospital} called {Phone} .",
    "{Age} year old patient {Patient} from {Location} .",
    "Consult placed to Dr. {Doctor} regarding {F} .",
    "Imaging from {Hospital} dated {Date} was reviewed .",
    "Home address is listed as {Location} .",
    "Next appointment {Date} at {Hospital} .",
    "Phone on file {Phone} was verified by staff .",
    "Chart {ID} was updated after the {F} visit .",
    "Patient name {Patient} was confirmed at intake .",
    "Registered at {Hospital} under {ID} .",
    "Symptoms began around {Date} per {Patient} .",
    "A message was left at {Phone} on {Date} .",
    "Resident {Doctor} staffed the case with the attending .",
    "Recently moved to {Location} per the intake form .",
    "Aged {Age} , the patient remains {F} .",
    "Intake by Dr. {Doctor} documented {F} {F} {F} .",
    "The plan was reviewed and {F} {F} continued .",
    "No acute {F} events occurred overnight .",
    "Medications were adjusted after {F} discussion .",
    "Patient is {F} and tolerating {F} well .",
    "Team will continue to monitor {F} closely .",
    "Results were reviewed with the {F} team today .",
)

_INVENTORIES = {"default": _PATTERNS}

_SLOT_RE = re.compile(r"\{([A-Za-z]+)\}")

# Mirrors the tokenizer's word/punct split closely enough for counting.
_COUNT_RE = re.compile(r"[^\W_]+|\S")

_MAX_DOMAINS = 8
_MAX_DENSITY_SUM = 0.5


@dataclass(frozen=True)
class SyntheticSpec:
    n_domains: int = 3
    notes_per_domain: int = 100
    phi_density: dict[str, float] = field(
        default_factory=lambda: {
            "Patient": 0.05,
            "Doctor": 0.05,
            "Hospital": 0.04,
            "ID": 0.03,
            "Date": 0.08,
            "Location": 0.04,
            "Phone": 0.02,
            "Age": 0.01,
        }
    )
    vocab_skew: float = 0.5
    template_inventory: str = "default"
    seed: int = 42

    def validate(self) -> None:
        if not (1 <= self.n_domains <= _MAX_DOMAINS):
            raise ConfigError(f"n_domains must be in 1..{_MAX_DOMAINS}")
        if self.notes_per_domain < 1:
            raise ConfigError("notes_per_domain must be positive")
        if not 0.0 <= self.vocab_skew <= 1.0:
            raise ConfigError("vocab_skew must be in [0, 1]")
        if self.template_inventory not in _INVENTORIES:
            raise ConfigError(
                f"unknown template inventory {self.template_inventory!r}"
            )
        unknown = set(self.phi_density) - set(PHI_TYPES)
        if unknown:
            raise ConfigError(f"unknown phi types in density: {sorted(unknown)}")
        if any(v < 0 for v in self.phi_density.values()):
            raise ConfigError("phi densities must be non-negative")
        if sum(self.phi_density.values()) > _MAX_DENSITY_SUM:
            raise ConfigError(
                "infeasible phi density: token fractions must sum to at most "
                f"{_MAX_DENSITY_SUM} to leave room for context words"
            )


def _partition(pool: tuple | list, n_domains: int, domain: int) -> list:
    size = len(pool) // n_domains
    return list(pool[domain * size : (domain + 1) * size])


def _pattern_slots(pattern: str) -> list[str]:
    return _SLOT_RE.findall(pattern)


def _domain_inventories(
    rng: np.random.Generator, patterns: tuple[str, ...], n_domains: int
) -> list[list[int]]:
    """Overlapping-but-distinct pattern subsets, each covering every PHI type."""
    picks = rng.random((len(patterns), n_domains)) < 0.55
    inventories = []
    for d in range(n_domains):
        inventory = [i for i in range(len(patterns)) if picks[i, d]]
        covered = {s for i in inventory for s in _pattern_slots(patterns[i]) if s != "F"}
        for phi_type in PHI_TYPES:
            if phi_type in covered:
                continue
            candidates = [
                i for i in range(len(patterns)) if phi_type in _pattern_slots(patterns[i])
            ]
            inventory.append(int(rng.choice(candidates)))
        inventories.append(sorted(set(inventory)))
    return inventories


def _token_count(surface: str) -> int:
    return len(_COUNT_RE.findall(surface))


class _DomainState:
    """Per-domain vocabulary slices, pattern subset, and density counters."""

    def __init__(self, spec: SyntheticSpec, domain: int, inventory: list[int]):
        n = spec.n_domains
        self.domain = domain
        self.inventory = inventory
        self.firsts = _partition(_FIRST_NAMES, n, domain)
        self.lasts = _partition(_LAST_NAMES, n, domain)
        self.hospitals = _partition(_HOSPITALS, n, domain)
        self.locations = _partition(_LOCATIONS, n, domain)
        self.id_prefixes = _partition(_ID_PREFIXES, n, domain)
        self.area_codes = _partition(_AREA_CODES, n, domain)
        self.fillers = _partition(_CONTENT_WORDS, n, domain)
        self.date_formats = [
            _DATE_FORMATS[(domain + j) % len(_DATE_FORMATS)] for j in range(4)
        ]
        self.note_types = [_NOTE_TYPES[(domain + j) % len(_NOTE_TYPES)] for j in range(3)]
        self.total_tokens = 0
        self.covered = {t: 0 for t in PHI_TYPES}

    def deficit(self, density: dict[str, float]) -> dict[str, float]:
        return {
            t: density.get(t, 0.0) * self.total_tokens - self.covered[t]
            for t in PHI_TYPES
        }


def _make_entity(rng: np.random.Generator, state: _DomainState, phi_type: str) -> str:
    if phi_type in ("Patient", "Doctor"):
        return f"{rng.choice(state.firsts)} {rng.choice(state.lasts)}"
    if phi_type == "Hospital":
        return str(rng.choice(state.hospitals))
    if phi_type == "Location":
        return str(rng.choice(state.locations))
    if phi_type == "ID":
        return f"{rng.choice(state.id_prefixes)}{rng.integers(10000, 99999)}"
    if phi_type == "Phone":
        area = rng.choice(state.area_codes)
        if rng.random() < 0.5:
            return f"{area}-555-{rng.integers(1000, 9999)}"
        return f"( {area} ) 555 {rng.integers(1000, 9999)}"
    if phi_type == "Date":
        fmt = state.date_formats[int(rng.integers(len(state.date_formats)))]
        return fmt.format(
            m=int(rng.integers(1, 13)),
            d=int(rng.integers(1, 29)),
            mon=str(rng.choice(_MONTHS)),
            y4=int(rng.integers(1998, 2024)),
            y2=f"{rng.integers(0, 24):02d}",
        )
    if phi_type == "Age":
        if rng.random() < 0.6:
            return str(int(rng.integers(90, 100)))
        return str(int(rng.integers(65, 90)))
    raise ConfigError(f"no surface generator for phi type {phi_type!r}")


def _filler_word(rng: np.random.Generator, state: _DomainState, skew: float) -> str:
    if rng.random() < skew:
        return str(rng.choice(state.fillers))
    return str(rng.choice(_CONTENT_WORDS))


def _build_sentence(
    rng: np.random.Generator,
    spec: SyntheticSpec,
    state: _DomainState,
    patterns: tuple[str, ...],
) -> tuple[str, list[tuple[int, int, str]]]:
    """One sentence string plus (start, end, type) spans relative to it."""
    density = spec.phi_density
    deficit = state.deficit(density)
    positive = [t for t in PHI_TYPES if density.get(t, 0.0) > 0]
    target_type = None
    if positive:
        best = max(positive, key=lambda t: deficit[t])
        if deficit[best] > 0 or state.total_tokens == 0:
            target_type = best
    if target_type is None:
        candidates = [
            i for i in state.inventory if not any(
                s != "F" and density.get(s, 0.0) > 0 and deficit[s] > 0
                for s in _pattern_slots(patterns[i])
            )
        ] or list(state.inventory)
        # prefer patterns without PHI slots when everything is at target
        no_slot = [i for i in candidates if not any(
            s != "F" for s in _pattern_slots(patterns[i])
        )]
        pattern = patterns[int(rng.choice(no_slot or candidates))]
    else:
        with_slot = [
            i for i in state.inventory if target_type in _pattern_slots(patterns[i])
        ]
        pattern = patterns[int(rng.choice(with_slot))]

    pieces: list[tuple[str, str | None]] = []
    for item in pattern.split():
        m = _SLOT_RE.fullmatch(item)
        if m is None:
            pieces.append((item, None))
            continue
        slot = m.group(1)
        if slot == "F":
            pieces.append((_filler_word(rng, state, spec.vocab_skew), None))
        elif slot == target_type or (
            density.get(slot, 0.0) > 0 and deficit.get(slot, 0.0) > 0
        ):
            pieces.append((_make_entity(rng, state, slot), slot))
        else:
            pieces.append((_filler_word(rng, state, spec.vocab_skew), None))

    spans: list[tuple[int, int, str]] = []
    parts: list[str] = []
    pos = 0
    for surface, phi_type in pieces:
        if parts:
            pos += 1  # joining space
        if phi_type is not None:
            spans.append((pos, pos + len(surface), phi_type))
            state.covered[phi_type] += _token_count(surface)
        state.total_tokens += _token_count(surface)
        parts.append(surface)
        pos += len(surface)
    return " ".join(parts), spans


def generate_synthetic(spec: SyntheticSpec) -> Corpus:
    """Generate a multi-domain corpus; a pure function of the spec."""
    spec.validate()
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed))
    patterns = _INVENTORIES[spec.template_inventory]
    inventories = _domain_inventories(rng, patterns, spec.n_domains)
    documents = []
    domains = [f"domain_{d}" for d in range(spec.n_domains)]
    for d in range(spec.n_domains):
        state = _DomainState(spec, d, inventories[d])
        for i in range(spec.notes_per_domain):
            n_sentences = int(rng.integers(2, 5))
            sentence_texts = []
            annotations = []
            pos = 0
            for _ in range(n_sentences):
                text, spans = _build_sentence(rng, spec, state, patterns)
                for start, end, phi_type in spans:
                    annotations.append(
                        Annotation(
                            pos + start, pos + end, phi_type,
                            text[start:end],
                        )
                    )
                sentence_texts.append(text)
                pos += len(text) + 1  # joining newline
            doc = Document(
                id=f"{domains[d]}-{i:04d}",
                note_type=state.note_types[i % len(state.note_types)],
                domain_id=d,
                text="\n".join(sentence_texts),
                annotations=annotations,
            )
            doc.validate()
            documents.append(doc)
    return Corpus(documents, domains)


def split_by_domain(corpus: Corpus) -> list[Corpus]:
    """One single-domain corpus per domain, in registry order."""
    out = []
    for d, name in enumerate(corpus.domains):
        docs = []
        for doc in corpus.documents:
            if doc.domain_id == d:
                docs.append(
                    Document(doc.id, doc.note_type, 0, doc.text, list(doc.annotations))
                )
        out.append(Corpus(docs, [name]))
    return out
