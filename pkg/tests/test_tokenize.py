import random

from deidkit.corpus import SyntheticSpec, generate_synthetic, tokenize


def surfaces(sentence):
    return [t.surface for t in sentence.tokens]


def test_abbreviation_keeps_first_sentence_intact():
    sents = tokenize("Dr. Smith came. He left.")
    assert len(sents) == 2
    assert surfaces(sents[0]) == ["Dr.", "Smith", "came", "."]
    assert surfaces(sents[1]) == ["He", "left", "."]


def test_whitespace_only_yields_no_sentences():
    assert tokenize(" \t \n ") == []


def test_simple_offsets():
    sents = tokenize("Jane Doe")
    assert len(sents) == 1
    assert [(t.start, t.end) for t in sents[0].tokens] == [(0, 4), (5, 8)]
    assert surfaces(sents[0]) == ["Jane", "Doe"]


def test_punctuation_is_its_own_token():
    sents = tokenize("on 01/02, call (555) now")
    assert surfaces(sents[0]) == [
        "on", "01", "/", "02", ",", "call", "(", "555", ")", "now",
    ]


def test_newline_always_breaks():
    sents = tokenize("alpha beta\ngamma")
    assert len(sents) == 2
    assert surfaces(sents[1]) == ["gamma"]


def test_no_break_without_uppercase_or_gap():
    assert len(tokenize("version 2.5 shipped")) == 1  # "." token, then digit
    assert len(tokenize("end. here")) == 1  # lowercase after period
    assert len(tokenize("pH7.Q")) == 1  # no whitespace after period
    assert len(tokenize("Stop! Go now? Yes.")) == 3


def test_all_abbreviations_suppress_breaks():
    for abbr in ("Dr.", "Mr.", "Mrs.", "Ms.", "M.D.", "vs.", "e.g.", "i.e."):
        sents = tokenize(f"met {abbr} Smith")
        assert len(sents) == 1, abbr
        assert abbr in surfaces(sents[0])


def test_offsets_reconstruct_text():
    rng = random.Random(4)
    pieces = ["Dr. Who", "x-1\n", "  (555) 014", "End. Start", "été 9am!", " "]
    corpus = generate_synthetic(SyntheticSpec(n_domains=2, notes_per_domain=5, seed=9))
    texts = [d.text for d in corpus.documents]
    texts += ["".join(rng.choices(pieces, k=rng.randint(1, 12))) for _ in range(200)]
    for text in texts:
        for sent in tokenize(text):
            for tok in sent.tokens:
                assert text[tok.start : tok.end] == tok.surface
            starts = [t.start for t in sent.tokens]
            assert starts == sorted(starts)
            for a, b in zip(sent.tokens, sent.tokens[1:]):
                assert a.end <= b.start
