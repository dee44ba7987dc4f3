import random
from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from stancekit.core import ExplicitObject, StanceLabel, StanceRecord, validate_enriched
from stancekit.enrich import (
    CandidatePhrase,
    cohen_kappa,
    detect_explicit_mention,
    extract_candidates,
    filter_candidates,
    heuristic_tagger,
    majority_label,
    propose_adversarial_pair,
    tag,
)
from stancekit.errors import LengthMismatch, NoDisalignedObject

F, A, N = StanceLabel.FAVOR, StanceLabel.AGAINST, StanceLabel.NONE


# --- tagging -----------------------------------------------------------------

def test_tag_wear_a_mask():
    assert [t.pos for t in tag("I wear a mask")] == ["PRON", "VERB", "DET", "NOUN"]


def test_tag_empty():
    assert tag("") == []


def test_tag_hashtag_is_sym_and_intact():
    toks = tag("#COVID19")
    assert len(toks) == 1
    assert toks[0].surface == "#COVID19"
    assert toks[0].pos == "SYM"


def test_tag_offsets_cover_non_whitespace():
    text = "I believe in SCIENCE. I wear a mask for YOUR PROTECTION."
    toks = tag(text)
    covered = set()
    for t in toks:
        assert text[t.char_start:t.char_end] == t.surface
        covered.update(range(t.char_start, t.char_end))
    assert covered == {i for i, c in enumerate(text) if not c.isspace()}


def test_tag_accepts_custom_tagger():
    marker = heuristic_tagger("a b")
    assert tag("ignored", tagger=lambda _: marker) == marker


# --- chunking (values frozen from the chunk-rule oracle) ----------------------

def test_chunk_det_adj_noun_phrase():
    toks = tag("the unborn children")
    cands = extract_candidates(toks)
    assert [c.surface for c in cands] == ["the unborn children"]


def test_chunk_all_verb_sentence_empty():
    toks = tag("go went gone")
    assert all(t.pos == "VERB" for t in toks)
    assert extract_candidates(toks) == []


def test_chunk_example_sentence():
    text = "I believe in SCIENCE. I wear a mask for YOUR PROTECTION."
    cands = extract_candidates(tag(text))
    assert [(c.surface, c.char_start, c.char_end) for c in cands] == [
        ("SCIENCE", 13, 20),
        ("a mask", 29, 35),
        ("PROTECTION", 45, 55),
    ]
    for c in cands:
        assert text[c.char_start:c.char_end] == c.surface


def test_chunks_are_maximal_and_non_overlapping():
    cands = extract_candidates(tag("the big dog saw a very small cat house"))
    spans = [(c.char_start, c.char_end) for c in cands]
    assert spans == sorted(spans)
    assert all(spans[i][1] <= spans[i + 1][0] for i in range(len(spans) - 1))
    assert "cat house" in [c.surface for c in cands][-1]


# --- filtering ----------------------------------------------------------------

def test_filter_example_sentence_drops_verbless_candidate():
    text = "I believe in SCIENCE. I wear a mask for YOUR PROTECTION."
    toks = tag(text)
    kept = filter_candidates(extract_candidates(toks), toks)
    assert [o.surface for o in kept] == ["SCIENCE", "a mask"]


def test_filter_drops_short_surface():
    toks = tag("I saw sky")
    cands = extract_candidates(toks)
    assert "sky" in [c.surface for c in cands]
    assert all(o.surface != "sky" for o in filter_candidates(cands, toks))


def test_filter_drops_hash_and_user_prefixes():
    toks = tag("they saw things")
    cands = [
        CandidatePhrase(surface="#things", char_start=0, char_end=7, head_noun_index=2),
        CandidatePhrase(surface="@USER account", char_start=0, char_end=13, head_noun_index=2),
    ]
    assert filter_candidates(cands, toks) == []


def test_filter_keeps_candidate_near_verb():
    toks = tag("I wear a mask")
    kept = filter_candidates(extract_candidates(toks), toks)
    assert [o.surface for o in kept] == ["a mask"]


def test_filter_is_idempotent_subset():
    toks = tag("I believe in SCIENCE. I wear a mask for YOUR PROTECTION.")
    cands = extract_candidates(toks)
    once = filter_candidates(cands, toks)
    again = filter_candidates(
        [CandidatePhrase(o.surface, o.char_start, o.char_end,
                         head_noun_index=next(k for k, t in enumerate(toks)
                                              if t.char_end == o.char_end))
         for o in once],
        toks,
    )
    assert [(o.surface, o.char_start) for o in again] == [(o.surface, o.char_start) for o in once]


# --- mention detection ---------------------------------------------------------

MASK_TEXT = "I believe in SCIENCE. I wear a mask for YOUR PROTECTION."


def test_mention_positive():
    assert detect_explicit_mention(MASK_TEXT, "wear a mask")


def test_mention_negative():
    assert not detect_explicit_mention(MASK_TEXT, "Dr. Fauci")


def test_mention_whole_text():
    assert detect_explicit_mention(MASK_TEXT, MASK_TEXT)


def test_mention_case_insensitive():
    assert detect_explicit_mention(MASK_TEXT, "WEAR A MASK")
    assert detect_explicit_mention(MASK_TEXT, "science")


def test_mention_requires_token_boundaries():
    assert not detect_explicit_mention("masks are fine", "mask")


def test_mention_empty_target():
    assert not detect_explicit_mention(MASK_TEXT, "!!!")


# --- adversarial pairing --------------------------------------------------------

def obj(surface, start, label):
    return ExplicitObject(surface=surface, char_start=start,
                          char_end=start + len(surface), label=label)


def test_pairing_picks_disaligned_object():
    text = "So can unborn children have rights now?"
    rec = StanceRecord(id="b", text=text, target="Abortion", label=A)
    unborn = obj("unborn children", text.index("unborn"), F)
    enriched = propose_adversarial_pair(rec, [unborn])
    assert enriched.alignments == ((0, -1),)
    assert enriched.explicit_mention is False
    assert validate_enriched(enriched) == []


def test_pairing_earliest_wins():
    text = "aa bb cc dd ee ff gg hh"
    rec = StanceRecord(id="r", text=text, target="zz", label=A)
    late, early = obj("dd", 9, F), obj("bb", 3, F)
    enriched = propose_adversarial_pair(rec, [late, early])
    assert enriched.alignments == ((1, -1),)


def test_pairing_no_disaligned():
    rec = StanceRecord(id="r", text="aa bb", target="zz", label=A)
    with pytest.raises(NoDisalignedObject):
        propose_adversarial_pair(rec, [obj("aa", 0, A), obj("bb", 3, N)])


def test_pairing_rejects_none_record():
    rec = StanceRecord(id="r", text="aa bb", target="zz", label=N)
    with pytest.raises(ValueError):
        propose_adversarial_pair(rec, [obj("aa", 0, F)])


def test_pairing_output_always_validates():
    rng = random.Random(7)
    words = ["alpha", "bravo", "charlie", "delta", "echo"]
    for _ in range(50):
        text = " ".join(rng.sample(words, 4))
        rec = StanceRecord(id="r", text=text, target="omega",
                           label=rng.choice([F, A]))
        objs = []
        start = 0
        for w in text.split(" "):
            objs.append(obj(w, start, rng.choice([F, A, N])))
            start += len(w) + 1
        try:
            enriched = propose_adversarial_pair(rec, objs)
        except NoDisalignedObject:
            continue
        assert validate_enriched(enriched) == []


# --- Cohen's kappa ---------------------------------------------------------------

def brute_kappa(a, b) -> float:
    # independent oracle: exact arithmetic via fractions
    n = len(a)
    p_o = Fraction(sum(1 for x, y in zip(a, b) if x == y), n)
    ca, cb = Counter(a), Counter(b)
    p_e = sum(Fraction(ca[l], n) * Fraction(cb[l], n) for l in set(ca) | set(cb))
    if p_e == 1:
        return 1.0
    return float((p_o - p_e) / (1 - p_e))


def test_kappa_identical_lists():
    assert cohen_kappa([F, A, N], [F, A, N]) == 1.0


def test_kappa_fixture_zero():
    assert abs(cohen_kappa([F, F, A, A], [F, A, A, F]) - 0.0) < 1e-12


def test_kappa_fixture_disjoint_constant():
    # p_o = 0 and p_e = 0 (no marginal overlap) -> kappa = 0
    assert cohen_kappa([F, F], [A, A]) <= 0
    assert abs(cohen_kappa([F, F], [A, A]) - 0.0) < 1e-12


def test_kappa_fixture_seven_elevenths():
    a = [F, A, N, F]
    b = [F, A, N, A]
    assert abs(cohen_kappa(a, b) - 7 / 11) < 1e-12


def test_kappa_degenerate_same_constant():
    assert cohen_kappa([F, F, F], [F, F, F]) == 1.0


def test_kappa_length_mismatch():
    with pytest.raises(LengthMismatch):
        cohen_kappa([F], [F, A])
    with pytest.raises(LengthMismatch):
        cohen_kappa([], [])


def test_kappa_matches_brute_force_on_random_lists():
    rng = random.Random(0)
    labels = [F, A, N]
    for _ in range(200):
        n = rng.randint(1, 40)
        a = [rng.choice(labels) for _ in range(n)]
        b = [rng.choice(labels) for _ in range(n)]
        assert cohen_kappa(a, b) == pytest.approx(brute_kappa(a, b), abs=1e-12)


@given(st.lists(st.sampled_from([F, A, N]), min_size=1, max_size=30).flatmap(
    lambda a: st.tuples(st.just(a),
                        st.lists(st.sampled_from([F, A, N]),
                                 min_size=len(a), max_size=len(a)))))
def test_kappa_is_symmetric(pair):
    a, b = pair
    assert cohen_kappa(a, b) == pytest.approx(cohen_kappa(b, a), abs=1e-12)


# --- majority vote -----------------------------------------------------------------

def test_majority_label():
    assert majority_label([F, F, A]) is F
    assert majority_label([F, A]) is None
    assert majority_label([N, N, F]) is N
    assert majority_label([]) is None
