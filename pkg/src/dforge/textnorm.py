"""Text normalization, tokenization, and sentence segmentation.

Every module compares strings through :func:`normalize_text`, so the rules
here define equality for the whole pipeline: NFC, lowercase, whitespace runs
collapsed to single spaces. Tokens are runs of word characters; intra-word
hyphens are kept, so "bean-shaped" is a single token.
"""

from __future__ import annotations

import re
import unicodedata
from functools import lru_cache
from importlib import resources

TOKEN_RE = re.compile(r"\w+(?:-\w+)*", re.UNICODE)

# Cloze stems mark the gap with a run of underscores.
BLANK_RE = re.compile(r"_{3,}")

_TERMINALS = ".!?"
_CLOSERS = "\"')]’”"
_OPENERS = "\"'([‘“"


def normalize_text(s: str) -> str:
    """Canonical comparison form: NFC, trimmed, collapsed whitespace, lowercase."""
    s = unicodedata.normalize("NFC", s)
    return " ".join(s.split()).lower()


def norm_token(tok: str) -> str:
    return unicodedata.normalize("NFC", tok).lower()


def token_spans(text: str) -> list[tuple[str, int, int]]:
    """Tokens with their (start, end) character offsets in ``text``."""
    return [(m.group(0), m.start(), m.end()) for m in TOKEN_RE.finditer(text)]


def tokens(text: str) -> list[str]:
    """Normalized token sequence of ``text``."""
    return [norm_token(m.group(0)) for m in TOKEN_RE.finditer(text)]


def anchor_token_spans(text: str, anchor: str) -> list[tuple[int, int]]:
    """Character spans where ``anchor`` occurs in ``text`` as a whole token sequence.

    Matching is per-token after normalization, so "kidney" does not match
    inside "kidneys" and multi-word anchors must appear as contiguous tokens.
    Matches are non-overlapping, left to right.
    """
    want = tokens(anchor)
    if not want:
        return []
    spans = token_spans(text)
    out: list[tuple[int, int]] = []
    i, n, m = 0, len(spans), len(want)
    while i + m <= n:
        if all(norm_token(spans[i + j][0]) == want[j] for j in range(m)):
            out.append((spans[i][1], spans[i + m - 1][2]))
            i += m
        else:
            i += 1
    return out


def replace_spans(text: str, spans: list[tuple[int, int]], replacement: str) -> str:
    """Replace each (start, end) span with ``replacement``. Spans must not overlap."""
    out = text
    for start, end in sorted(spans, reverse=True):
        out = out[:start] + replacement + out[end:]
    return out


@lru_cache(maxsize=None)
def _wordlist(name: str) -> frozenset[str]:
    data = resources.files("dforge.data").joinpath(name).read_text(encoding="utf-8")
    return frozenset(w.strip() for w in data.splitlines() if w.strip() and not w.startswith("#"))


def stopwords() -> frozenset[str]:
    """Bundled English stopword list (fixed, shipped with the package)."""
    return _wordlist("stopwords_en.txt")


def abbreviations() -> frozenset[str]:
    """Abbreviations whose trailing period does not end a sentence."""
    return _wordlist("abbreviations_en.txt")


def _abbrev_before(text: str, punct_pos: int) -> bool:
    # Word immediately preceding the terminal punctuation, internal dots kept
    # so "e.g" and "u.s" are recognized.
    j = punct_pos
    while j > 0 and (text[j - 1].isalnum() or text[j - 1] in ".-"):
        j -= 1
    word = text[j:punct_pos].rstrip(".")
    if not word:
        return False
    if len(word) == 1 and word.isalpha():
        return True  # initials like "J. K. Rowling"
    return word.lower() in abbreviations()


def split_sentences(text: str) -> list[str]:
    """Rule-based sentence segmentation.

    Breaks after terminal punctuation (plus closing quotes/brackets) when it
    is followed by whitespace and an uppercase letter, unless the preceding
    word is a known abbreviation or a single initial. Newlines inside a
    document are treated as ordinary whitespace.
    """
    t = " ".join(text.split())
    if not t:
        return []
    sents: list[str] = []
    start = 0
    i, n = 0, len(t)
    while i < n:
        if t[i] in _TERMINALS:
            j = i + 1
            while j < n and t[j] in _TERMINALS:
                j += 1
            k = j
            while k < n and t[k] in _CLOSERS:
                k += 1
            w = k
            while w < n and t[w].isspace():
                w += 1
            nxt = w
            if nxt < n and t[nxt] in _OPENERS:
                nxt += 1
            if w > k and nxt < n and t[nxt].isupper() and not _abbrev_before(t, i):
                sent = t[start:k].strip()
                if sent:
                    sents.append(sent)
                start = w
                i = w
                continue
            i = k if k > i else i + 1
            continue
        i += 1
    tail = t[start:].strip()
    if tail:
        sents.append(tail)
    return sents


_CAMEL_RE = re.compile(r"(?<=[a-z0-9])(?=[A-Z])|(?<=[A-Z])(?=[A-Z][a-z])")


def relation_words(relation: str) -> str:
    """Render a graph relation as plain words: ``RelatedTo`` -> ``related to``."""
    s = relation.replace("_", " ").replace("/", " ")
    s = _CAMEL_RE.sub(" ", s)
    return normalize_text(s)


def has_blank(stem: str, pattern: re.Pattern[str] = BLANK_RE) -> bool:
    """True when a cloze stem contains a blank marker (3+ underscores by default)."""
    return pattern.search(stem) is not None
