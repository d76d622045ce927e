import io

import pytest

from deidkit.corpus import SyntheticSpec, generate_synthetic, save_corpus, split_by_domain
from deidkit.corpus.synthetic import _token_count
from deidkit.errors import ConfigError


def corpus_bytes(corpus):
    buf = io.StringIO()
    for doc in corpus.documents:
        buf.write(f"{doc.id}|{doc.note_type}|{doc.domain_id}|{doc.text}|{doc.annotations}\n")
    return buf.getvalue()


def test_same_spec_same_seed_is_byte_identical(tmp_path):
    spec = SyntheticSpec(n_domains=2, notes_per_domain=25, seed=77)
    a, b = generate_synthetic(spec), generate_synthetic(spec)
    assert corpus_bytes(a) == corpus_bytes(b)
    pa, pb = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    save_corpus(a, pa)
    save_corpus(b, pb)
    assert pa.read_bytes() == pb.read_bytes()


def test_different_seed_differs():
    a = generate_synthetic(SyntheticSpec(n_domains=2, notes_per_domain=25, seed=1))
    b = generate_synthetic(SyntheticSpec(n_domains=2, notes_per_domain=25, seed=2))
    assert corpus_bytes(a) != corpus_bytes(b)


def test_zero_density_type_never_emitted():
    spec = SyntheticSpec(
        n_domains=2,
        notes_per_domain=30,
        phi_density={"Patient": 0.05, "Date": 0.0},
        seed=5,
    )
    corpus = generate_synthetic(spec)
    types = {a.phi_type for d in corpus.documents for a in d.annotations}
    assert "Date" not in types
    assert types == {"Patient"}


def test_document_counts_and_domain_ids():
    corpus = generate_synthetic(SyntheticSpec(n_domains=3, notes_per_domain=100, seed=4))
    assert len(corpus.documents) == 300
    assert {d.domain_id for d in corpus.documents} == {0, 1, 2}
    assert corpus.domains == ["domain_0", "domain_1", "domain_2"]


def test_densities_within_ten_percent():
    spec = SyntheticSpec(n_domains=3, notes_per_domain=100, seed=11)
    corpus = generate_synthetic(spec)
    total = sum(_token_count(d.text) for d in corpus.documents)
    covered: dict[str, int] = {}
    for doc in corpus.documents:
        for a in doc.annotations:
            covered[a.phi_type] = covered.get(a.phi_type, 0) + _token_count(a.text)
    for phi_type, target in spec.phi_density.items():
        realized = covered.get(phi_type, 0) / total
        assert 0.9 * target <= realized <= 1.1 * target, (phi_type, realized, target)


def test_infeasible_density_rejected():
    spec = SyntheticSpec(phi_density={"Patient": 0.4, "Date": 0.3}, seed=1)
    with pytest.raises(ConfigError, match="infeasible"):
        generate_synthetic(spec)


def test_invalid_spec_fields_rejected():
    with pytest.raises(ConfigError):
        generate_synthetic(SyntheticSpec(n_domains=0))
    with pytest.raises(ConfigError):
        generate_synthetic(SyntheticSpec(notes_per_domain=0))
    with pytest.raises(ConfigError):
        generate_synthetic(SyntheticSpec(phi_density={"Nope": 0.1}))
    with pytest.raises(ConfigError):
        generate_synthetic(SyntheticSpec(template_inventory="missing"))


def test_phi_vocabulary_partitions_are_disjoint():
    corpus = generate_synthetic(SyntheticSpec(n_domains=3, notes_per_domain=60, seed=8))
    partitioned = ("Patient", "Doctor", "Hospital", "Location", "ID", "Phone")
    surfaces: dict[tuple[int, str], set[str]] = {}
    for doc in corpus.documents:
        for a in doc.annotations:
            if a.phi_type in partitioned:
                surfaces.setdefault((doc.domain_id, a.phi_type), set()).add(a.text)
    for phi_type in partitioned:
        for d1 in range(3):
            for d2 in range(d1 + 1, 3):
                s1 = surfaces.get((d1, phi_type), set())
                s2 = surfaces.get((d2, phi_type), set())
                assert not (s1 & s2), (phi_type, d1, d2, s1 & s2)


def test_template_inventories_are_distinct_but_overlapping():
    from deidkit.corpus.synthetic import _domain_inventories, _PATTERNS
    import numpy as np

    rng = np.random.default_rng(0)
    inventories = _domain_inventories(rng, _PATTERNS, 3)
    sets = [set(v) for v in inventories]
    assert sets[0] != sets[1] != sets[2]
    assert sets[0] & sets[1] and sets[1] & sets[2] and sets[0] & sets[2]


def test_split_by_domain():
    corpus = generate_synthetic(SyntheticSpec(n_domains=3, notes_per_domain=10, seed=2))
    parts = split_by_domain(corpus)
    assert [len(p.documents) for p in parts] == [10, 10, 10]
    assert all(doc.domain_id == 0 for p in parts for doc in p.documents)
    assert [p.domains for p in parts] == [["domain_0"], ["domain_1"], ["domain_2"]]
