"""Bulk dataset loading.

Two on-disk layouts are supported, both streamed row by row so memory
stays bounded regardless of file size:

* prejoined: tab-separated, header required, one CareerStats per row
  (columns: author_id, career_length, publication_count, citation_count,
  h_index, data_share_count).
* authors_plus_papers: newline-delimited JSON, one author object per
  line with papers either nested inline or supplied in a companion
  papers file grouped in the same author order.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass

from .bibliometrics import AuthorRecord, CareerStats, PaperRecord
from .errors import RowParseError, SchemaMismatch

log = logging.getLogger(__name__)

FORMAT_PREJOINED = "prejoined"
FORMAT_AUTHORS_PLUS_PAPERS = "authors_plus_papers"

PREJOINED_COLUMNS = ("author_id", "career_length", "publication_count",
                     "citation_count", "h_index", "data_share_count")


@dataclass
class DatasetManifest:
    authors_path: str
    papers_path: str | None = None
    share_map_path: str | None = None
    format: str = FORMAT_PREJOINED
    row_count: int | None = None  # filled after a full scan

    def __post_init__(self):
        if self.format not in (FORMAT_PREJOINED, FORMAT_AUTHORS_PLUS_PAPERS):
            raise ValueError(f"unknown format: {self.format!r}")


def _bad_row(lineno: int, message: str, strict: bool):
    if strict:
        raise RowParseError(f"line {lineno}: {message}")
    log.warning("skipping line %d: %s", lineno, message)


def _iter_prejoined(path: str, strict: bool):
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh, delimiter="\t")
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaMismatch(f"{path}: empty file, header required")
        missing = [c for c in PREJOINED_COLUMNS if c not in header]
        if missing:
            raise SchemaMismatch(
                f"{path}: missing column(s) {', '.join(missing)}")
        idx = {c: header.index(c) for c in PREJOINED_COLUMNS}
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            try:
                yield CareerStats(
                    author_id=row[idx["author_id"]],
                    career_length=int(row[idx["career_length"]]),
                    publication_count=int(row[idx["publication_count"]]),
                    citation_count=int(row[idx["citation_count"]]),
                    h_index=int(row[idx["h_index"]]),
                    data_share_count=int(row[idx["data_share_count"]]),
                )
            except (ValueError, IndexError) as exc:
                _bad_row(lineno, str(exc), strict)


def _parse_paper(obj) -> PaperRecord:
    return PaperRecord(paper_id=str(obj["paper_id"]),
                       year=None if obj.get("year") is None else int(obj["year"]),
                       citation_count=int(obj.get("citation_count", 0)))


def _iter_paper_groups(path: str, strict: bool):
    """Yield (author_id, [PaperRecord]) for contiguous runs of author_id."""
    current_id = None
    group: list = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                author_id = str(obj["author_id"])
                paper = _parse_paper(obj)
            except (ValueError, KeyError) as exc:
                _bad_row(lineno, str(exc), strict)
                continue
            if author_id != current_id:
                if current_id is not None:
                    yield current_id, group
                current_id, group = author_id, []
            group.append(paper)
    if current_id is not None:
        yield current_id, group


def _iter_authors_plus_papers(manifest: DatasetManifest, strict: bool):
    paper_groups = (_iter_paper_groups(manifest.papers_path, strict)
                    if manifest.papers_path else None)
    with open(manifest.authors_path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                author_id = str(obj["author_id"])
                papers = [_parse_paper(p) for p in obj.get("papers", [])]
            except (ValueError, KeyError) as exc:
                _bad_row(lineno, str(exc), strict)
                continue
            if paper_groups is not None:
                group = next(paper_groups, None)
                if group is None or group[0] != author_id:
                    # papers file must be grouped in author-file order
                    raise RowParseError(
                        f"papers file out of step at author {author_id!r} "
                        f"(line {lineno} of {manifest.authors_path})")
                papers = group[1]
            yield AuthorRecord(author_id=author_id, papers=tuple(papers),
                               data_share_count=int(obj.get("data_share_count", 0)))


def load_dataset(manifest: DatasetManifest, strict: bool = False):
    """Stream records from a manifest.

    Prejoined files yield CareerStats directly; authors_plus_papers
    files yield AuthorRecord for downstream derive_career_stats.
    Malformed rows are logged and skipped, or fatal with `strict`.
    The manifest's row_count is filled in once the stream is exhausted.
    """
    for path in (manifest.authors_path, manifest.papers_path,
                 manifest.share_map_path):
        if path is not None:
            open(path, "rb").close()  # fail fast with FileNotFoundError
    if manifest.format == FORMAT_PREJOINED:
        source = _iter_prejoined(manifest.authors_path, strict)
    else:
        source = _iter_authors_plus_papers(manifest, strict)
    count = 0
    for record in source:
        count += 1
        yield record
    manifest.row_count = count


def load_share_map(path: str) -> dict:
    """author_id -> data share count, tab-separated with header.

    Duplicate ids keep the last occurrence (dirty exports should not
    abort a long run); each duplicate is logged.
    """
    result: dict = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh, delimiter="\t")
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaMismatch(f"{path}: empty file, header required")
        for col in ("author_id", "data_share_count"):
            if col not in header:
                raise SchemaMismatch(f"{path}: missing column(s) {col}")
        idx_id = header.index("author_id")
        idx_count = header.index("data_share_count")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            author_id = row[idx_id]
            if author_id in result:
                log.warning("duplicate share-map id %r at line %d, "
                            "last occurrence wins", author_id, lineno)
            result[author_id] = int(row[idx_count])
    return result


def join_share_counts(stats_stream, share_map: dict):
    """Attach share counts to a CareerStats stream; unknown ids get 0."""
    for stats in stats_stream:
        yield stats.with_share_count(share_map.get(stats.author_id, 0))


def write_prejoined(path: str, stats_stream) -> None:
    """Inverse of the prejoined loader, used for round-trips and exports."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
        writer.writerow(PREJOINED_COLUMNS)
        for s in stats_stream:
            writer.writerow([s.author_id, s.career_length,
                             s.publication_count, s.citation_count,
                             s.h_index, s.data_share_count])
