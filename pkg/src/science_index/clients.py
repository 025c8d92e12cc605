"""Remote clients for Semantic Scholar (career statistics) and DataCite
(dataset share counts).

Every response is cached as raw bytes keyed by (endpoint, identifier),
which doubles as the fixture mechanism: in fixture-only mode nothing
touches the network, live-with-record mode refreshes the fixtures. A
module-level request counter makes the offline guarantee testable.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
import time
from dataclasses import dataclass, field
from urllib.parse import quote

import requests

from .bibliometrics import PaperRecord
from .errors import (FixtureMissing, NetworkFailure, NotFound, RateLimited)

log = logging.getLogger(__name__)

MODE_LIVE = "live"
MODE_FIXTURE_ONLY = "fixture_only"
MODE_LIVE_WITH_RECORD = "live_with_record"

SEMANTIC_SCHOLAR_BASE = "https://api.semanticscholar.org"
DATACITE_BASE = "https://api.datacite.org"
API_KEY_ENV = "SEMANTIC_SCHOLAR_API_KEY"

_EP_AUTHOR = "semantic_scholar_author_papers"
_EP_DATACITE = "datacite_dois"

# network requests actually issued (cache hits and fixtures excluded);
# the test suite asserts this stays at zero
_request_count = 0
_count_lock = threading.Lock()


def network_request_count() -> int:
    return _request_count


def reset_network_request_count() -> None:
    global _request_count
    with _count_lock:
        _request_count = 0


class RateLimiter:
    """Token-style limiter: enforces a minimum interval between requests."""

    def __init__(self, per_second: float):
        if per_second <= 0:
            raise ValueError("rate_limit must be > 0")
        self._interval = 1.0 / per_second
        self._next_at = 0.0
        self._lock = threading.Lock()

    def acquire(self) -> None:
        with self._lock:
            now = time.monotonic()
            wait = self._next_at - now
            self._next_at = max(now, self._next_at) + self._interval
        if wait > 0:
            time.sleep(wait)


@dataclass
class FetchPolicy:
    rate_limit: float = 1.0          # requests per second
    timeout: float = 30.0            # seconds
    retries: int = 3                 # exponential backoff
    cache_dir: str | None = None
    mode: str = MODE_FIXTURE_ONLY
    cache_ttl: float = 7 * 86400.0   # seconds before a live refetch
    semantic_scholar_base: str = SEMANTIC_SCHOLAR_BASE
    datacite_base: str = DATACITE_BASE
    # explicit researcher_id -> DataCite query mapping (author
    # disambiguation is out of scope, so the join is user-supplied)
    datacite_query_map: dict = field(default_factory=dict)
    dataset_resource_types: tuple = ("Dataset",)
    _limiter: RateLimiter | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.rate_limit <= 0:
            raise ValueError("rate_limit must be > 0")
        if self.retries < 0:
            raise ValueError("retries must be >= 0")

    def limiter(self) -> RateLimiter:
        if self._limiter is None:
            self._limiter = RateLimiter(self.rate_limit)
        return self._limiter


@dataclass(frozen=True)
class RemoteAuthorProfile:
    researcher_id: str
    papers: tuple
    fetched_at: float
    source: str  # "semantic_scholar" | "fixture"

    def to_payload(self) -> dict:
        return {"researcher_id": self.researcher_id,
                "papers": [{"paper_id": p.paper_id, "year": p.year,
                            "citation_count": p.citation_count}
                           for p in self.papers],
                "fetched_at": float(self.fetched_at),
                "source": self.source}

    @classmethod
    def from_payload(cls, p: dict) -> "RemoteAuthorProfile":
        papers = tuple(PaperRecord(paper_id=str(q["paper_id"]),
                                   year=q["year"],
                                   citation_count=int(q["citation_count"]))
                       for q in p["papers"])
        return cls(researcher_id=str(p["researcher_id"]), papers=papers,
                   fetched_at=float(p["fetched_at"]), source=str(p["source"]))


# --- cache ---

def _cache_key(endpoint: str, ident: str) -> str:
    digest = hashlib.sha256(ident.encode("utf-8")).hexdigest()[:16]
    return f"{endpoint}__{digest}"


def _manifest_path(cache_dir: str) -> str:
    return os.path.join(cache_dir, "index.json")


def _load_manifest(cache_dir: str) -> dict:
    try:
        with open(_manifest_path(cache_dir), "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        return {}


def _atomic_write(path: str, data: bytes) -> None:
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)


def _cache_get(policy: FetchPolicy, endpoint: str, ident: str,
               max_age: float | None):
    """Returns (raw bytes, fetched_at) or None."""
    if not policy.cache_dir:
        return None
    manifest = _load_manifest(policy.cache_dir)
    key = _cache_key(endpoint, ident)
    meta = manifest.get(key)
    if meta is None:
        return None
    if max_age is not None and time.time() - meta["fetched_at"] > max_age:
        return None
    try:
        with open(os.path.join(policy.cache_dir, meta["file"]), "rb") as fh:
            return fh.read(), meta["fetched_at"]
    except FileNotFoundError:
        return None


def _cache_put(policy: FetchPolicy, endpoint: str, ident: str,
               raw: bytes) -> None:
    if not policy.cache_dir:
        return
    os.makedirs(policy.cache_dir, exist_ok=True)
    key = _cache_key(endpoint, ident)
    filename = key + ".json"
    _atomic_write(os.path.join(policy.cache_dir, filename), raw)
    manifest = _load_manifest(policy.cache_dir)
    manifest[key] = {"endpoint": endpoint, "id": ident,
                     "fetched_at": time.time(), "file": filename}
    _atomic_write(_manifest_path(policy.cache_dir),
                  json.dumps(manifest, indent=1, sort_keys=True).encode("utf-8"))


# --- transport ---

def _http_get(policy: FetchPolicy, url: str) -> bytes:
    global _request_count
    headers = {}
    api_key = os.environ.get(API_KEY_ENV)
    if api_key:
        headers["x-api-key"] = api_key
    last_exc = None
    for attempt in range(policy.retries + 1):
        if attempt:
            time.sleep(0.5 * 2 ** (attempt - 1))
        policy.limiter().acquire()
        with _count_lock:
            _request_count += 1
        try:
            resp = requests.get(url, headers=headers, timeout=policy.timeout)
        except requests.RequestException as exc:
            last_exc = NetworkFailure(f"GET {url}: {exc}")
            continue
        if resp.status_code == 404:
            raise NotFound(url)
        if resp.status_code == 429:
            last_exc = RateLimited(url)
            continue
        if resp.status_code >= 500:
            last_exc = NetworkFailure(f"GET {url}: HTTP {resp.status_code}")
            continue
        if resp.status_code != 200:
            raise NetworkFailure(f"GET {url}: HTTP {resp.status_code}")
        return resp.content
    raise last_exc


def _fetch_raw(policy: FetchPolicy, endpoint: str, ident: str, url: str):
    """Cache/fixture dispatch; returns (raw bytes, fetched_at, from_fixture)."""
    if policy.mode == MODE_FIXTURE_ONLY:
        hit = _cache_get(policy, endpoint, ident, max_age=None)
        if hit is None:
            raise FixtureMissing(f"no fixture for {endpoint}:{ident}")
        return hit[0], hit[1], True
    hit = _cache_get(policy, endpoint, ident, max_age=policy.cache_ttl)
    if hit is not None:
        return hit[0], hit[1], True
    raw = _http_get(policy, url)
    if policy.mode == MODE_LIVE_WITH_RECORD or policy.cache_dir:
        _cache_put(policy, endpoint, ident, raw)
    return raw, time.time(), False


# --- public operations ---

def fetch_author(policy: FetchPolicy, researcher_id: str) -> RemoteAuthorProfile:
    """Fetch a researcher's papers (year + citation count per paper)."""
    if not researcher_id:
        raise ValueError("researcher_id must be non-empty")
    url = (f"{policy.semantic_scholar_base}/graph/v1/author/"
           f"{quote(researcher_id)}/papers?fields=year,citationCount&limit=1000")
    raw, fetched_at, from_fixture = _fetch_raw(
        policy, _EP_AUTHOR, researcher_id, url)
    try:
        body = json.loads(raw)
        papers = tuple(
            PaperRecord(paper_id=str(item.get("paperId", f"p{i}")),
                        year=item.get("year"),
                        citation_count=int(item.get("citationCount") or 0))
            for i, item in enumerate(body["data"]))
    except (ValueError, KeyError, TypeError) as exc:
        raise NetworkFailure(
            f"unparseable author response for {researcher_id!r}: {exc}") from exc
    return RemoteAuthorProfile(researcher_id=researcher_id, papers=papers,
                               fetched_at=fetched_at,
                               source="fixture" if from_fixture else "semantic_scholar")


def fetch_share_count(policy: FetchPolicy, researcher_id: str) -> int:
    """Count DataCite records of dataset type attributed to a researcher."""
    if not researcher_id:
        raise ValueError("researcher_id must be non-empty")
    query = policy.datacite_query_map.get(researcher_id, researcher_id)
    url = (f"{policy.datacite_base}/dois?query={quote(query)}&page%5Bsize%5D=1000")
    raw, _, _ = _fetch_raw(policy, _EP_DATACITE, researcher_id, url)
    try:
        body = json.loads(raw)
        count = 0
        for item in body["data"]:
            rtype = (item.get("attributes", {}).get("types", {})
                     .get("resourceTypeGeneral"))
            if rtype in policy.dataset_resource_types:
                count += 1
        return count
    except (ValueError, KeyError, TypeError) as exc:
        raise NetworkFailure(
            f"unparseable DataCite response for {researcher_id!r}: {exc}") from exc
