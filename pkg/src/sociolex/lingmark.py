"""Linguistic marker detection and per-user aggregation.

Three markers per user: rate of standard two-particle negation, rate of
standard plural agreement after a plural determiner, and normalized
vocabulary set size (distinct words per post).
"""
from __future__ import annotations

import csv
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

from .corpus import UserTimeline

STANDARD = "standard"
NONSTANDARD = "nonstandard"

# Second negation particle; any hit makes the post a negation observation.
_PARTICLE_RE = re.compile(r"\b(pas|pa|aps|jamais|ni|personne|rien|ri1|r1|aucun|aucune)\b")
# First particle: bare "ne" or elided "n'".
_NE_RE = re.compile(r"\b(ne|n')\b")

PLURAL_DETERMINERS = frozenset(
    "les des ces ses mes tes nos vos leurs aux quelques plusieurs "
    "deux trois quatre cinq six sept huit neuf dix".split()
)


@dataclass(frozen=True)
class MarkerCounts:
    n_cn: int = 0       # standard negations
    n_incn: int = 0     # negations missing the first particle
    n_cp: int = 0       # standard plural observations
    n_incp: int = 0     # singular form after a plural determiner
    n_unique_words: int = 0
    n_tweets: int = 0


@dataclass(frozen=True)
class LinguisticProfile:
    L_cn: Optional[float]  # None when no negation observed
    L_cp: Optional[float]
    L_vs: Optional[float]

    def get(self, variable: str) -> Optional[float]:
        return {"cn": self.L_cn, "cp": self.L_cp, "vs": self.L_vs}[variable]


class PluralLexicon:
    """Singular->plural noun/adjective pairs plus the plural determiner set."""

    def __init__(self, entries: Mapping[str, str],
                 plural_determiners: frozenset[str] = PLURAL_DETERMINERS):
        for sg, pl in entries.items():
            if sg == pl:
                raise ValueError(f"lexicon entry maps {sg!r} to itself")
        if not plural_determiners:
            raise ValueError("determiner set must not be empty")
        self.singular_to_plural = dict(entries)
        self.plural_to_singular = {pl: sg for sg, pl in entries.items()}
        self.plural_determiners = plural_determiners

    def __len__(self) -> int:
        return len(self.singular_to_plural)

    @classmethod
    def load(cls, path: str | Path) -> "PluralLexicon":
        entries: dict[str, str] = {}
        with open(path, "r", encoding="utf-8", newline="") as f:
            for row in csv.reader(f):
                if not row or len(row) < 2:
                    continue
                entries[row[0].strip()] = row[1].strip()
        return cls(entries)

    @classmethod
    def bundled(cls) -> "PluralLexicon":
        """The lexicon shipped with the package (~2,500 pairs)."""
        ref = resources.files("sociolex").joinpath("data/plural_lexicon.csv")
        with resources.as_file(ref) as path:
            return cls.load(path)


def detect_negation(text_marker: str, require_ne_before: bool = False) -> Optional[str]:
    """Classify a post's negation usage.

    Returns None without a second-particle hit; otherwise STANDARD when a
    word-boundary "ne"/"n'" occurs anywhere in the post (or strictly before
    the particle with require_ne_before), else NONSTANDARD.  One observation
    per post: the first particle match decides.
    """
    m = _PARTICLE_RE.search(text_marker)
    if m is None:
        return None
    if require_ne_before:
        ne = _NE_RE.search(text_marker, 0, m.start())
    else:
        ne = _NE_RE.search(text_marker)
    return STANDARD if ne else NONSTANDARD


def detect_plural(tokens: Sequence[str], lexicon: PluralLexicon) -> list[str]:
    """Plural-agreement observations over adjacent (determiner, word) pairs."""
    out: list[str] = []
    for det, word in zip(tokens, tokens[1:]):
        if det not in lexicon.plural_determiners:
            continue
        if word in lexicon.plural_to_singular:
            out.append(STANDARD)
        elif word in lexicon.singular_to_plural:
            out.append(NONSTANDARD)
    return out


def count_markers(timeline: UserTimeline, lexicon: PluralLexicon,
                  require_ne_before: bool = False) -> MarkerCounts:
    n_cn = n_incn = n_cp = n_incp = 0
    vocab: set[str] = set()
    for post in timeline.posts:
        neg = detect_negation(post.text_marker, require_ne_before)
        if neg == STANDARD:
            n_cn += 1
        elif neg == NONSTANDARD:
            n_incn += 1
        for obs in detect_plural(post.tokens, lexicon):
            if obs == STANDARD:
                n_cp += 1
            else:
                n_incp += 1
        vocab.update(post.tokens)
    return MarkerCounts(n_cn, n_incn, n_cp, n_incp, len(vocab), len(timeline.posts))


def accumulate_markers(posts: Iterable, lexicon: PluralLexicon,
                       require_ne_before: bool = False) -> dict[str, MarkerCounts]:
    """Streaming per-user marker counts over an unordered post stream.

    Equivalent to count_markers over per-user timelines (counts are
    order-insensitive) without holding the posts in memory.
    """
    acc: dict[str, list] = {}  # [n_cn, n_incn, n_cp, n_incp, vocab_set, n_tweets]
    for post in posts:
        a = acc.get(post.author_id)
        if a is None:
            acc[post.author_id] = a = [0, 0, 0, 0, set(), 0]
        neg = detect_negation(post.text_marker, require_ne_before)
        if neg == STANDARD:
            a[0] += 1
        elif neg == NONSTANDARD:
            a[1] += 1
        for obs in detect_plural(post.tokens, lexicon):
            if obs == STANDARD:
                a[2] += 1
            else:
                a[3] += 1
        a[4].update(post.tokens)
        a[5] += 1
    return {
        user: MarkerCounts(a[0], a[1], a[2], a[3], len(a[4]), a[5])
        for user, a in acc.items()
    }


def profile_from_counts(counts: MarkerCounts) -> LinguisticProfile:
    neg_total = counts.n_cn + counts.n_incn
    plu_total = counts.n_cp + counts.n_incp
    return LinguisticProfile(
        L_cn=counts.n_cn / neg_total if neg_total else None,
        L_cp=counts.n_cp / plu_total if plu_total else None,
        L_vs=counts.n_unique_words / counts.n_tweets if counts.n_tweets else None,
    )


def profile_user(timeline: UserTimeline, lexicon: PluralLexicon,
                 require_ne_before: bool = False) -> tuple[MarkerCounts, LinguisticProfile]:
    if not timeline.posts:
        raise ValueError(f"empty timeline for user {timeline.author_id!r}")
    counts = count_markers(timeline, lexicon, require_ne_before)
    return counts, profile_from_counts(counts)


def group_average(profiles: Mapping[str, LinguisticProfile],
                  members: Iterable[str],
                  variable: str) -> tuple[Optional[float], int]:
    """Mean of one linguistic variable over the members that have it.

    Returns (mean, qualifying count); mean is None when nobody qualifies.
    """
    total = 0.0
    n = 0
    for user in members:
        prof = profiles.get(user)
        if prof is None:
            continue
        value = prof.get(variable)
        if value is None:
            continue
        total += value
        n += 1
    return (total / n if n else None), n
