"""Annotation enrichment pipeline.

Takes records whose specified target is not literally mentioned, pulls
noun-phrase candidates out of the text as explicit-object proposals,
filters the noisy ones, and pairs each record with a dis-aligned labeled
object. Inter-annotator agreement over the human labels is measured with
Cohen's kappa.

POS tagging is rule-based (closed-class lexicon + suffix heuristics +
NOUN default) behind a pluggable interface, so a real parser or tagger
can be substituted without touching the chunking rules.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from .core import (
    EnrichedRecord,
    ExplicitObject,
    StanceLabel,
    StanceRecord,
    derive_alignment,
)
from .errors import LengthMismatch, NoDisalignedObject
from .text import normalize, normalized_tokens, tokenize_with_offsets

COARSE_TAGS = ("NOUN", "VERB", "ADJ", "DET", "PRON", "ADP", "PUNCT", "SYM", "OTHER")


@dataclass(frozen=True)
class TaggedToken:
    surface: str
    pos: str
    char_start: int
    char_end: int


@dataclass(frozen=True)
class CandidatePhrase:
    """A noun-phrase chunk; ``head_noun_index`` indexes the token list it came from."""

    surface: str
    char_start: int
    char_end: int
    head_noun_index: int


@dataclass(frozen=True)
class AnnotationVote:
    record_id: str
    object_surface: str
    annotator_id: str
    label: StanceLabel
    timestamp: float

    def key(self) -> tuple[str, str, str]:
        return (self.record_id, self.object_surface, self.annotator_id)


# --- rule-based POS tagging ------------------------------------------------

_DETS = {
    "a", "an", "the", "this", "that", "these", "those", "some", "any",
    "no", "each", "every", "either", "neither", "both", "all",
}
_PRONS = {
    "i", "you", "he", "she", "it", "we", "they", "me", "him", "her", "us",
    "them", "my", "your", "his", "its", "our", "their", "mine", "yours",
    "hers", "ours", "theirs", "myself", "yourself", "himself", "herself",
    "itself", "ourselves", "themselves", "who", "whom", "whose", "what",
    "which", "someone", "anyone", "everyone", "nobody", "something",
    "anything", "everything", "nothing",
}
_ADPS = {
    "in", "on", "at", "of", "for", "with", "by", "from", "to", "about",
    "against", "between", "during", "over", "under", "into", "onto",
    "through", "near", "after", "before", "above", "below", "without",
    "within", "upon", "toward", "towards",
}
_VERBS = {
    "is", "are", "was", "were", "be", "been", "being", "am", "do", "does",
    "did", "have", "has", "had", "can", "could", "will", "would", "shall",
    "should", "may", "might", "must", "go", "goes", "went", "gone", "say",
    "says", "said", "see", "sees", "saw", "seen", "make", "makes", "made",
    "get", "gets", "got", "take", "takes", "took", "taken", "come",
    "comes", "came", "want", "wants", "need", "needs", "know", "knows",
    "knew", "think", "thinks", "thought", "believe", "believes",
    "believed", "wear", "wears", "wore", "worn", "support", "supports",
    "oppose", "opposes", "love", "loves", "hate", "hates", "like",
    "likes", "keep", "keeps", "kept", "let", "lets", "give", "gives",
    "gave", "put", "puts", "tell", "tells", "told", "ask", "asks",
    "asked", "vote", "votes", "stand", "stands", "stood", "remind",
    "reminds", "mean", "means", "meant", "protect", "protects", "refuse",
    "refuses",
}
_OTHERS = {
    "and", "or", "but", "if", "because", "so", "not", "very", "too",
    "also", "just", "only", "now", "then", "than", "as", "when", "while",
    "how", "why", "where", "here", "there", "yes", "never", "always",
    "really", "even", "still", "again",
}

_ADJ_SUFFIXES = ("ous", "ful", "ive", "ish", "able", "ible", "ic", "less", "est")
_VERB_SUFFIXES = ("ing", "ed")


def _heuristic_pos(surface: str) -> str:
    if surface[0] in "#@":
        return "SYM"
    if not any(c.isalnum() for c in surface):
        return "PUNCT"
    low = surface.lower()
    if low in _DETS:
        return "DET"
    if low in _PRONS:
        return "PRON"
    if low in _ADPS:
        return "ADP"
    if low in _VERBS:
        return "VERB"
    if low in _OTHERS:
        return "OTHER"
    if low.isdigit():
        return "OTHER"
    if len(low) > 4:
        if low.endswith("ly"):
            return "OTHER"
        if low.endswith(_ADJ_SUFFIXES):
            return "ADJ"
        if low.endswith(_VERB_SUFFIXES):
            return "VERB"
    return "NOUN"


TaggerFn = Callable[[str], Sequence[TaggedToken]]


def heuristic_tagger(text: str) -> list[TaggedToken]:
    return [
        TaggedToken(surface=s, pos=_heuristic_pos(s), char_start=a, char_end=b)
        for s, a, b in tokenize_with_offsets(text)
    ]


def tag(text: str, tagger: Optional[TaggerFn] = None) -> list[TaggedToken]:
    """Tokenize and coarse-tag ``text``; deterministic for a fixed tagger."""
    tagger = tagger or heuristic_tagger
    return list(tagger(text))


# --- noun-phrase chunking --------------------------------------------------

def extract_candidates(tokens: Sequence[TaggedToken]) -> list[CandidatePhrase]:
    """Maximal left-to-right chunks matching (DET)? (ADJ)* (NOUN)+."""
    out: list[CandidatePhrase] = []
    i, n = 0, len(tokens)
    while i < n:
        j = i
        if j < n and tokens[j].pos == "DET":
            j += 1
        while j < n and tokens[j].pos == "ADJ":
            j += 1
        if j < n and tokens[j].pos == "NOUN":
            while j < n and tokens[j].pos == "NOUN":
                j += 1
            head = j - 1
            start = tokens[i].char_start
            end = tokens[head].char_end
            # surface is reconstructed from the token spans, so it equals
            # the text slice whenever tokens came from that text
            out.append(
                CandidatePhrase(
                    surface=_span_surface(tokens, i, head),
                    char_start=start,
                    char_end=end,
                    head_noun_index=head,
                )
            )
            i = j
        else:
            i += 1
    return out


def _span_surface(tokens: Sequence[TaggedToken], first: int, last: int) -> str:
    parts = [tokens[first].surface]
    for k in range(first + 1, last + 1):
        gap = tokens[k].char_start - tokens[k - 1].char_end
        parts.append(" " * gap + tokens[k].surface)
    return "".join(parts)


def filter_candidates(
    cands: Sequence[CandidatePhrase],
    tokens: Sequence[TaggedToken],
    verb_window: int = 2,
) -> list[ExplicitObject]:
    """Drop noisy candidates; survivors become unlabeled explicit objects.

    A candidate is dropped when it has no VERB within ``verb_window``
    tokens on either side, when its surface is shorter than 4 characters,
    or when it starts with '#' or the literal "@user" (case-insensitive).
    """
    span_by_char = {(t.char_start, t.char_end): k for k, t in enumerate(tokens)}
    out: list[ExplicitObject] = []
    for cand in cands:
        if len(cand.surface) < 4:
            continue
        low = cand.surface.lower()
        if low.startswith("#") or low.startswith("@user"):
            continue
        first = _token_index_at(tokens, cand.char_start, span_by_char)
        last = cand.head_noun_index
        lo = max(0, first - verb_window)
        hi = min(len(tokens), last + 1 + verb_window)
        near = [t for t in list(tokens[lo:first]) + list(tokens[last + 1:hi]) if t.pos == "VERB"]
        if not near:
            continue
        out.append(ExplicitObject(surface=cand.surface, char_start=cand.char_start, char_end=cand.char_end))
    return out


def _token_index_at(tokens, char_start, span_by_char) -> int:
    for k, t in enumerate(tokens):
        if t.char_start == char_start:
            return k
    return 0


# --- mention matching ------------------------------------------------------

def detect_explicit_mention(text: str, target: str) -> bool:
    """True iff the normalized target occurs as a contiguous token run in the text."""
    needle = normalized_tokens(target)
    hay = normalized_tokens(text)
    if not needle:
        return False
    n = len(needle)
    return any(hay[k:k + n] == needle for k in range(len(hay) - n + 1))


# --- adversarial pairing ---------------------------------------------------

def propose_adversarial_pair(
    rec: StanceRecord, labeled_objects: Sequence[ExplicitObject]
) -> EnrichedRecord:
    """Pair ``rec`` with an explicit object that dis-aligns with its target.

    Among labeled objects whose alignment toward the record's label is -1
    the earliest span wins. Raises NoDisalignedObject when every object
    aligns or carries no polar label.
    """
    if not rec.label.is_polar:
        raise ValueError(f"record {rec.id!r}: adversarial pairing needs a polar record label")
    if not labeled_objects:
        raise ValueError(f"record {rec.id!r}: at least one labeled object required")
    chosen = None
    for idx, obj in enumerate(labeled_objects):
        if obj.label is None or not obj.label.is_polar:
            continue
        if derive_alignment(obj.label, rec.label) != -1:
            continue
        if chosen is None or obj.char_start < labeled_objects[chosen].char_start:
            chosen = idx
    if chosen is None:
        raise NoDisalignedObject(
            f"record {rec.id!r}: no explicit object dis-aligns with label {rec.label.value}"
        )
    return EnrichedRecord(
        base=rec,
        explicit_objects=tuple(labeled_objects),
        explicit_mention=detect_explicit_mention(rec.text, rec.target),
        alignments=((chosen, -1),),
    )


# --- inter-annotator agreement ---------------------------------------------

def cohen_kappa(votes_a: Sequence[StanceLabel], votes_b: Sequence[StanceLabel]) -> float:
    """Chance-corrected agreement between two aligned vote lists.

    kappa = (p_o - p_e) / (1 - p_e), with chance agreement p_e taken from
    the two annotators' marginal label distributions. Degenerate case
    p_e = 1 (both annotators constant on the same label) returns 1.0.
    """
    if len(votes_a) != len(votes_b):
        raise LengthMismatch(f"vote lists differ in length: {len(votes_a)} vs {len(votes_b)}")
    if not votes_a:
        raise LengthMismatch("vote lists must be non-empty")
    n = len(votes_a)
    p_o = sum(1 for a, b in zip(votes_a, votes_b) if a is b) / n
    p_e = 0.0
    for lab in StanceLabel:
        pa = sum(1 for a in votes_a if a is lab) / n
        pb = sum(1 for b in votes_b if b is lab) / n
        p_e += pa * pb
    if p_e >= 1.0:
        return 1.0
    return (p_o - p_e) / (1.0 - p_e)


def majority_label(labels: Sequence[StanceLabel]) -> Optional[StanceLabel]:
    """Strict majority vote; ties resolve to None (item stays unresolved)."""
    counts: dict[StanceLabel, int] = {}
    for lab in labels:
        counts[lab] = counts.get(lab, 0) + 1
    if not counts:
        return None
    best = max(counts.values())
    winners = [lab for lab, c in counts.items() if c == best]
    return winners[0] if len(winners) == 1 else None
