"""Deterministic contract/oracle simulation.

The ledger is an append-only list of hash-chained entries: a genesis
entry carrying the full model, then alternating score requests and
oracle fulfillments. Applying a fulfillment updates the model first and
scores the researcher under the post-update weights, mirroring the
on-chain sequence. Because every payload is canonical bytes and every
operation is a pure function of the previous state, replaying a log
reconstructs the exact state (and digest) that produced it.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace

from . import canonical
from .bibliometrics import CareerStats
from .errors import (BrokenChain, DuplicateRequest, EmptyIdentifier,
                     ReplayMismatch, UnknownRequest)
from .regression import FeatureVector, ModelState, update_online, validate_model
from .scoring import MODE_LITERAL, MODE_SHARE_BONUS, ScoreBreakdown, score

KIND_GENESIS = "genesis"
KIND_REQUEST = "request"
KIND_FULFILL = "fulfill"

_ZERO_DIGEST = bytes(32)


@dataclass(frozen=True)
class ScoreRequest:
    request_id: int
    researcher_id: str
    submitted_at: int  # ledger sequence number of the request entry

    def to_payload(self) -> dict:
        return {"request_id": self.request_id,
                "researcher_id": self.researcher_id,
                "submitted_at": self.submitted_at}

    @classmethod
    def from_payload(cls, p: dict) -> "ScoreRequest":
        return cls(request_id=int(p["request_id"]),
                   researcher_id=str(p["researcher_id"]),
                   submitted_at=int(p["submitted_at"]))


@dataclass(frozen=True)
class OracleFulfillment:
    request_id: int
    stats: CareerStats


@dataclass(frozen=True)
class LedgerConfig:
    """Scoring policy fixed at genesis and recorded on-chain."""

    mode: str = MODE_SHARE_BONUS
    share_weight: float = 0.0
    update_before_score: bool = True
    dedupe_by_researcher: bool = False

    def __post_init__(self):
        if self.mode not in (MODE_LITERAL, MODE_SHARE_BONUS):
            raise ValueError(f"unknown mode: {self.mode!r}")

    def to_payload(self) -> dict:
        return {"mode": self.mode,
                "share_weight": float(self.share_weight),
                "update_before_score": self.update_before_score,
                "dedupe_by_researcher": self.dedupe_by_researcher}

    @classmethod
    def from_payload(cls, p: dict) -> "LedgerConfig":
        return cls(mode=str(p["mode"]),
                   share_weight=float(p["share_weight"]),
                   update_before_score=bool(p["update_before_score"]),
                   dedupe_by_researcher=bool(p["dedupe_by_researcher"]))


@dataclass(frozen=True)
class LedgerEntry:
    seq: int
    kind: str
    payload: bytes
    prev_digest: bytes
    digest: bytes


def _entry_digest(seq: int, kind: str, payload: bytes, prev: bytes) -> bytes:
    header = canonical.dumps({"seq": seq, "kind": kind,
                              "payload": payload.hex(),
                              "prev": prev.hex()})
    return hashlib.sha256(header).digest()


def _make_entry(seq: int, kind: str, payload: bytes, prev: bytes) -> LedgerEntry:
    return LedgerEntry(seq=seq, kind=kind, payload=payload, prev_digest=prev,
                       digest=_entry_digest(seq, kind, payload, prev))


@dataclass(frozen=True)
class LedgerState:
    entries: tuple
    model: ModelState
    config: LedgerConfig
    genesis_version: int
    pending: dict = field(default_factory=dict)   # request_id -> ScoreRequest
    emitted_scores: dict = field(default_factory=dict)  # request_id -> ScoreBreakdown
    next_request_id: int = 1

    @property
    def head_digest(self) -> bytes:
        return self.entries[-1].digest

    def fulfillment_count(self) -> int:
        return len(self.emitted_scores)


def genesis(model: ModelState, config: LedgerConfig | None = None) -> LedgerState:
    """Start a ledger from a validated model snapshot."""
    config = config or LedgerConfig()
    validate_model(model)
    payload = canonical.dumps({"model": model.to_payload(),
                               "ledger_config": config.to_payload()})
    entry = _make_entry(0, KIND_GENESIS, payload, _ZERO_DIGEST)
    return LedgerState(entries=(entry,), model=model, config=config,
                       genesis_version=model.version)


def submit_request(state: LedgerState, researcher_id: str):
    """Append a score request; returns (new state, request)."""
    if not researcher_id:
        raise EmptyIdentifier("researcher_id must be non-empty")
    if state.config.dedupe_by_researcher:
        for req in state.pending.values():
            if req.researcher_id == researcher_id:
                raise DuplicateRequest(
                    f"researcher {researcher_id!r} already pending "
                    f"(request {req.request_id})")
    seq = len(state.entries)
    request = ScoreRequest(request_id=state.next_request_id,
                           researcher_id=researcher_id, submitted_at=seq)
    entry = _make_entry(seq, KIND_REQUEST,
                        canonical.dumps(request.to_payload()),
                        state.head_digest)
    pending = dict(state.pending)
    pending[request.request_id] = request
    new = replace(state, entries=state.entries + (entry,), pending=pending,
                  next_request_id=state.next_request_id + 1)
    return new, request


def _apply_stats(state: LedgerState, request: ScoreRequest, stats: CareerStats):
    """Model update + scoring for one fulfillment; returns
    (new model, breakdown, payload dict)."""
    cfg = state.config
    point = FeatureVector.from_career_stats(
        stats, augmented=state.model.config.augmented)
    if cfg.update_before_score:
        model = update_online(state.model, point)
        breakdown = score(stats, model, cfg.mode, cfg.share_weight)
    else:
        breakdown = score(stats, state.model, cfg.mode, cfg.share_weight)
        model = update_online(state.model, point)
    payload = {"request_id": request.request_id,
               "researcher_id": request.researcher_id,
               "stats": stats.to_payload(),
               "score": breakdown.to_payload()}
    return model, breakdown, payload


def apply_fulfillment(state: LedgerState, fulfillment: OracleFulfillment):
    """Consume a pending request; returns (new state, score breakdown)."""
    request = state.pending.get(fulfillment.request_id)
    if request is None:
        raise UnknownRequest(
            f"request {fulfillment.request_id} is not pending")
    model, breakdown, payload = _apply_stats(state, request, fulfillment.stats)
    seq = len(state.entries)
    entry = _make_entry(seq, KIND_FULFILL, canonical.dumps(payload),
                        state.head_digest)
    pending = dict(state.pending)
    del pending[fulfillment.request_id]
    emitted = dict(state.emitted_scores)
    emitted[fulfillment.request_id] = breakdown
    new = replace(state, entries=state.entries + (entry,), model=model,
                  pending=pending, emitted_scores=emitted)
    return new, breakdown


def verify_chain(entries) -> bytes:
    """Check the digest chain end to end; returns the final digest."""
    entries = list(entries)
    if not entries:
        raise BrokenChain(0, "empty log")
    prev = _ZERO_DIGEST
    for i, entry in enumerate(entries):
        if entry.seq != i:
            raise BrokenChain(i, f"expected seq {i}, found {entry.seq}")
        if entry.prev_digest != prev:
            raise BrokenChain(i, f"prev-digest mismatch at seq {i}")
        expected = _entry_digest(entry.seq, entry.kind, entry.payload, prev)
        if entry.digest != expected:
            raise BrokenChain(i, f"digest mismatch at seq {i}")
        prev = entry.digest
    return prev


def replay(entries) -> LedgerState:
    """Rebuild state from a log, re-deriving every model update and score.

    Verification is two-layered: the digest chain must hold, and the
    recomputed fulfillment payloads must be byte-identical to the
    recorded ones (any divergence means the producing code was not
    deterministic, reported as ReplayMismatch at the offending seq).
    """
    entries = tuple(entries)
    verify_chain(entries)
    first = entries[0]
    if first.kind != KIND_GENESIS:
        raise BrokenChain(0, "log does not start with a genesis entry")
    p = canonical.loads(first.payload)
    state = LedgerState(entries=(first,),
                        model=ModelState.from_payload(p["model"]),
                        config=LedgerConfig.from_payload(p["ledger_config"]),
                        genesis_version=int(p["model"]["version"]))
    for entry in entries[1:]:
        if entry.kind == KIND_REQUEST:
            request = ScoreRequest.from_payload(canonical.loads(entry.payload))
            pending = dict(state.pending)
            pending[request.request_id] = request
            state = replace(state, entries=state.entries + (entry,),
                            pending=pending,
                            next_request_id=max(state.next_request_id,
                                                request.request_id + 1))
        elif entry.kind == KIND_FULFILL:
            recorded = canonical.loads(entry.payload)
            rid = int(recorded["request_id"])
            request = state.pending.get(rid)
            if request is None:
                raise ReplayMismatch(entry.seq,
                                     f"fulfillment for unknown request {rid}")
            stats = CareerStats.from_payload(recorded["stats"])
            model, breakdown, payload = _apply_stats(state, request, stats)
            if canonical.dumps(payload) != entry.payload:
                raise ReplayMismatch(entry.seq)
            pending = dict(state.pending)
            del pending[rid]
            emitted = dict(state.emitted_scores)
            emitted[rid] = breakdown
            state = replace(state, entries=state.entries + (entry,),
                            model=model, pending=pending,
                            emitted_scores=emitted)
        else:
            raise BrokenChain(entry.seq, f"unexpected kind {entry.kind!r}")
    return state


# --- persistence: one canonical record per line ---

def save_log(path, entries) -> None:
    with open(path, "wb") as fh:
        for entry in entries:
            record = {"seq": entry.seq, "kind": entry.kind,
                      "payload": entry.payload.hex(),
                      "prev_digest": entry.prev_digest.hex(),
                      "digest": entry.digest.hex()}
            fh.write(canonical.dumps(record))
            fh.write(b"\n")


def load_log(path):
    entries = []
    with open(path, "rb") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            p = canonical.loads(line)
            entries.append(LedgerEntry(seq=int(p["seq"]), kind=str(p["kind"]),
                                       payload=bytes.fromhex(p["payload"]),
                                       prev_digest=bytes.fromhex(p["prev_digest"]),
                                       digest=bytes.fromhex(p["digest"])))
    return entries
