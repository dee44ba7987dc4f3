"""Shared tokenization helpers.

The same offset-aware tokenizer backs POS tagging, mention matching, and
model input encoding, so character spans stay comparable across stages.
"""

from __future__ import annotations

import re

# hashtags / user handles stay intact; words may contain inner apostrophes;
# every remaining non-space character becomes its own token
_TOKEN_RE = re.compile(r"[#@]\w+|\w+(?:'\w+)*|[^\w\s]")

_PUNCT_STRIP_RE = re.compile(r"[^\w\s]+")
_WS_RE = re.compile(r"\s+")


def tokenize_with_offsets(text: str) -> list[tuple[str, int, int]]:
    """Split ``text`` into (surface, char_start, char_end) triples.

    Concatenated spans cover every non-whitespace character.
    """
    return [(m.group(0), m.start(), m.end()) for m in _TOKEN_RE.finditer(text)]


def tokenize(text: str) -> list[str]:
    return [t for t, _, _ in tokenize_with_offsets(text)]


def normalize(s: str) -> str:
    """Lowercase, strip punctuation, and collapse whitespace."""
    s = _PUNCT_STRIP_RE.sub(" ", s.lower())
    return _WS_RE.sub(" ", s).strip()


def normalized_tokens(s: str) -> list[str]:
    n = normalize(s)
    return n.split(" ") if n else []
