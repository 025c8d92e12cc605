"""Career statistics derived from raw per-paper records.

The model consumes four numbers per researcher: career length in years,
publication count, total citation count, and h-index. This module owns
the record types and the derivations.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class PaperRecord:
    """One paper: opaque id, optional calendar year, citation snapshot."""

    paper_id: str
    year: int | None = None
    citation_count: int = 0

    def __post_init__(self):
        if self.citation_count < 0:
            raise ValueError(f"citation_count must be >= 0, got {self.citation_count}")
        if self.year is not None and not (1000 <= self.year <= 3000):
            raise ValueError(f"implausible year: {self.year}")


@dataclass(frozen=True)
class AuthorRecord:
    """Raw career facts for one researcher."""

    author_id: str
    papers: tuple[PaperRecord, ...] = ()
    data_share_count: int = 0

    def __post_init__(self):
        if not self.author_id:
            raise ValueError("author_id must be non-empty")
        if self.data_share_count < 0:
            raise ValueError("data_share_count must be >= 0")
        object.__setattr__(self, "papers", tuple(self.papers))


@dataclass(frozen=True)
class CareerStats:
    """The model's per-researcher inputs, plus the data-share count."""

    career_length: int
    publication_count: int
    citation_count: int
    h_index: int
    data_share_count: int = 0
    author_id: str = ""

    def __post_init__(self):
        for name in ("career_length", "publication_count", "citation_count",
                     "h_index", "data_share_count"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.h_index > self.publication_count:
            raise ValueError("h_index cannot exceed publication_count")

    def with_share_count(self, count: int) -> "CareerStats":
        return CareerStats(self.career_length, self.publication_count,
                           self.citation_count, self.h_index, count,
                           self.author_id)

    def to_payload(self) -> dict:
        return {
            "author_id": self.author_id,
            "career_length": self.career_length,
            "publication_count": self.publication_count,
            "citation_count": self.citation_count,
            "h_index": self.h_index,
            "data_share_count": self.data_share_count,
        }

    @classmethod
    def from_payload(cls, p: dict) -> "CareerStats":
        return cls(career_length=int(p["career_length"]),
                   publication_count=int(p["publication_count"]),
                   citation_count=int(p["citation_count"]),
                   h_index=int(p["h_index"]),
                   data_share_count=int(p["data_share_count"]),
                   author_id=str(p.get("author_id", "")))


def compute_h_index(citations) -> int:
    """Largest h such that at least h entries are >= h.

    Runs in O(n log n) by sorting descending and finding the last rank
    whose citation count still covers it.
    """
    h = 0
    for rank, c in enumerate(sorted(citations, reverse=True), start=1):
        if c >= rank:
            h = rank
        else:
            break
    return h


def compute_career_length(papers) -> int:
    """Years between the oldest and newest dated paper.

    Papers without a year are ignored; fewer than two dated papers
    (including the single-paper case) give 0.
    """
    years = [p.year for p in papers if p.year is not None]
    if len(years) < 2:
        return 0
    return max(years) - min(years)


def derive_career_stats(author: AuthorRecord) -> CareerStats:
    """Populate all CareerStats fields from an author's paper list."""
    citations = [p.citation_count for p in author.papers]
    return CareerStats(
        career_length=compute_career_length(author.papers),
        publication_count=len(author.papers),
        citation_count=sum(citations),
        h_index=compute_h_index(citations),
        data_share_count=author.data_share_count,
        author_id=author.author_id,
    )
