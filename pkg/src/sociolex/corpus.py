"""Corpus ingestion and text normalization.

Reads newline-delimited JSON post records, drops retweets, strips
URLs / mentions / hashtags / emoticons, downcases, and produces both a
marker-detection text (apostrophes kept) and punctuation-free tokens.
"""
from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Iterator, Optional, Sequence

log = logging.getLogger("sociolex.corpus")


@dataclass(frozen=True)
class RawPost:
    post_id: str
    author_id: str
    timestamp: int
    utc_offset_minutes: int
    text: str
    is_retweet: bool
    mentioned_ids: tuple[str, ...]
    coords: Optional[tuple[float, float]]  # (lat, lon)


@dataclass(frozen=True)
class CleanPost:
    post_id: str
    author_id: str
    timestamp: int
    local_hour_of_week: int  # 0..167, week starts Monday 00:00 local
    text_marker: str
    tokens: tuple[str, ...]
    utc_offset_minutes: int = 0
    mentioned_ids: tuple[str, ...] = ()
    coords: Optional[tuple[float, float]] = None


@dataclass
class UserTimeline:
    author_id: str
    posts: list[CleanPost]

    @property
    def n_tweets(self) -> int:
        return len(self.posts)


@dataclass
class IngestStats:
    records_read: int = 0
    parsed: int = 0
    skipped_malformed: int = 0
    retweets_dropped: int = 0


# Stripping patterns.  URLs go first so that ":/" inside "http://" is never
# treated as an emoticon; mention/hashtag markers eat the whole non-space run.
_URL_RE = re.compile(r"(?:https?://|www\.)\S*", re.IGNORECASE)
_MENTION_RE = re.compile(r"@\S*")
_HASHTAG_RE = re.compile(r"#\S*")

# Unicode blocks: Emoticons, Misc Symbols & Pictographs, Transport & Map, Dingbats.
_EMOJI_RE = re.compile("[\U0001F600-\U0001F64F\U0001F300-\U0001F5FF\U0001F680-\U0001F6FF✀-➿]+")

# Token-boundary match so e.g. "xd" inside a word survives.
_ASCII_EMOTICONS = [":)", ":(", ":D", ";)", ":p", "xd", ":/", "<3"]
_ASCII_EMO_RE = re.compile(
    r"(?<!\S)(?:" + "|".join(re.escape(e) for e in _ASCII_EMOTICONS) + r")(?!\S)",
    re.IGNORECASE,
)

# Everything that is neither word character, whitespace, apostrophe nor hyphen
# is stripped; underscore counts as punctuation despite being in \w.
_PUNCT_RE = re.compile(r"[^\w\s'\-]|_")
_WS_RE = re.compile(r"\s+")


def normalize_text(text: str) -> tuple[str, tuple[str, ...]]:
    """Return (text_marker, tokens) for a raw post body.

    text_marker keeps apostrophes and hyphens so negation contractions
    ("n'") stay detectable; tokens additionally shed leading/trailing
    apostrophes and hyphens.
    """
    s = _URL_RE.sub(" ", text)
    s = _MENTION_RE.sub(" ", s)
    s = _HASHTAG_RE.sub(" ", s)
    s = _EMOJI_RE.sub(" ", s)
    s = _ASCII_EMO_RE.sub(" ", s)
    s = s.lower()
    s = s.replace("’", "'").replace("ʼ", "'")
    # replace rather than delete: "pas,mais" must not fuse into one token
    s = _PUNCT_RE.sub(" ", s)
    marker = _WS_RE.sub(" ", s).strip()
    tokens = tuple(t for t in (w.strip("'-") for w in marker.split()) if t)
    return marker, tokens


def hour_of_week(timestamp: int, utc_offset_minutes: int) -> int:
    """Hour-of-week index in local time, Monday 00:00 -> 0."""
    local = datetime.fromtimestamp(timestamp + 60 * utc_offset_minutes, tz=timezone.utc)
    return local.weekday() * 24 + local.hour


def parse_record(obj: object) -> RawPost:
    """Build a RawPost from a decoded NDJSON object; ValueError if malformed."""
    if not isinstance(obj, dict):
        raise ValueError("record is not an object")
    try:
        post_id = obj["id"]
        author_id = obj["user"]
        ts = obj["ts"]
        text = obj["text"]
    except KeyError as e:
        raise ValueError(f"missing field {e.args[0]!r}") from None
    if not isinstance(post_id, str) or not isinstance(author_id, str):
        raise ValueError("id/user must be strings")
    if isinstance(ts, bool) or not isinstance(ts, (int, float)) or int(ts) != ts:
        raise ValueError("ts must be integer epoch seconds")
    if not isinstance(text, str):
        raise ValueError("text must be a string")
    offset = obj.get("utc_offset", 0)
    if isinstance(offset, bool) or not isinstance(offset, (int, float)) or int(offset) != offset:
        raise ValueError("utc_offset must be integer minutes")
    retweet = obj.get("retweet", False)
    if not isinstance(retweet, bool):
        raise ValueError("retweet must be boolean")
    mentions = obj.get("mentions", [])
    if not isinstance(mentions, list) or any(not isinstance(m, str) for m in mentions):
        raise ValueError("mentions must be a list of strings")
    lat, lon = obj.get("lat"), obj.get("lon")
    coords: Optional[tuple[float, float]]
    if lat is None and lon is None:
        coords = None
    elif lat is None or lon is None:
        raise ValueError("lat/lon must be given together")
    else:
        lat, lon = float(lat), float(lon)
        if not (-90.0 <= lat <= 90.0 and -180.0 <= lon <= 180.0):
            raise ValueError("lat/lon out of range")
        coords = (lat, lon)
    return RawPost(
        post_id=post_id,
        author_id=author_id,
        timestamp=int(ts),
        utc_offset_minutes=int(offset),
        text=text,
        is_retweet=retweet,
        mentioned_ids=tuple(mentions),
        coords=coords,
    )


def ingest(paths: Sequence[str | Path], stats: IngestStats | None = None) -> Iterator[RawPost]:
    """Yield RawPosts from NDJSON files in file order.

    Malformed lines are logged and counted in `stats`, never abort the
    stream; an unreadable file raises OSError naming the path.
    """
    if stats is None:
        stats = IngestStats()
    for path in paths:
        path = Path(path)
        with path.open("r", encoding="utf-8") as f:
            for lineno, line in enumerate(f, 1):
                if not line.strip():
                    continue
                stats.records_read += 1
                try:
                    post = parse_record(json.loads(line))
                except ValueError as e:
                    stats.skipped_malformed += 1
                    log.warning("%s:%d: skipping malformed record (%s)", path, lineno, e)
                    continue
                except json.JSONDecodeError as e:
                    stats.skipped_malformed += 1
                    log.warning("%s:%d: skipping unparsable line (%s)", path, lineno, e.msg)
                    continue
                stats.parsed += 1
                yield post


def preprocess(post: RawPost, stats: IngestStats | None = None) -> Optional[CleanPost]:
    """Normalize one post; returns None for retweets."""
    if post.is_retweet:
        if stats is not None:
            stats.retweets_dropped += 1
        return None
    marker, tokens = normalize_text(post.text)
    return CleanPost(
        post_id=post.post_id,
        author_id=post.author_id,
        timestamp=post.timestamp,
        local_hour_of_week=hour_of_week(post.timestamp, post.utc_offset_minutes),
        text_marker=marker,
        tokens=tokens,
        utc_offset_minutes=post.utc_offset_minutes,
        mentioned_ids=post.mentioned_ids,
        coords=post.coords,
    )


def build_timelines(posts: Iterable[CleanPost]) -> dict[str, UserTimeline]:
    """Group posts per author, sorted by (timestamp, post_id)."""
    timelines: dict[str, UserTimeline] = {}
    for p in posts:
        tl = timelines.get(p.author_id)
        if tl is None:
            timelines[p.author_id] = tl = UserTimeline(p.author_id, [])
        tl.posts.append(p)
    for tl in timelines.values():
        tl.posts.sort(key=lambda p: (p.timestamp, p.post_id))
    return timelines


def to_envelope(post: CleanPost) -> dict:
    """NDJSON envelope for a clean post; same fields as the input format
    plus "tokens" and "how", so clean output re-ingests losslessly."""
    rec: dict = {
        "id": post.post_id,
        "user": post.author_id,
        "ts": post.timestamp,
        "utc_offset": post.utc_offset_minutes,
        "text": post.text_marker,
        "retweet": False,
        "mentions": list(post.mentioned_ids),
    }
    if post.coords is not None:
        rec["lat"], rec["lon"] = post.coords
    rec["tokens"] = list(post.tokens)
    rec["how"] = post.local_hour_of_week
    return rec


def read_clean(paths: Sequence[str | Path]) -> Iterator[CleanPost]:
    """Stream CleanPosts back from files written in the clean envelope."""
    for path in paths:
        path = Path(path)
        with path.open("r", encoding="utf-8") as f:
            for line in f:
                if not line.strip():
                    continue
                rec = json.loads(line)
                coords = (rec["lat"], rec["lon"]) if "lat" in rec else None
                yield CleanPost(
                    post_id=rec["id"],
                    author_id=rec["user"],
                    timestamp=rec["ts"],
                    local_hour_of_week=rec["how"],
                    text_marker=rec["text"],
                    tokens=tuple(rec["tokens"]),
                    utc_offset_minutes=rec.get("utc_offset", 0),
                    mentioned_ids=tuple(rec.get("mentions", ())),
                    coords=coords,
                )
