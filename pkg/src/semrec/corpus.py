"""Corpus ingestion: JSONL document records, rule-based tokenization, fixed-size chunking."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import IO, Iterable

_WORD_RE = re.compile(r"\S+")


class IngestError(ValueError):
    """Raised for malformed or inconsistent corpus input, with 1-based line numbers."""


@dataclass(frozen=True)
class DocumentRecord:
    """One source document with its bibliographic metadata."""

    doc_id: str
    work_id: str
    text: str
    title: str = ""
    author: str = ""
    year: int | None = None
    genre: str = ""
    declared_language: str = ""

    def as_dict(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "work_id": self.work_id,
            "title": self.title,
            "author": self.author,
            "year": self.year,
            "genre": self.genre,
            "declared_language": self.declared_language,
            "text": self.text,
        }


@dataclass(frozen=True)
class Chunk:
    """A contiguous run of document tokens; the retrieval unit.

    char_start/char_end are document-level character offsets of the chunk's
    surface text, kept so span overlap against character-offset alignment
    matches never needs re-tokenization.
    """

    chunk_id: str
    doc_id: str
    work_id: str
    token_start: int
    token_end: int
    text: str
    char_start: int
    char_end: int

    def as_dict(self) -> dict:
        return {
            "chunk_id": self.chunk_id,
            "doc_id": self.doc_id,
            "work_id": self.work_id,
            "token_start": self.token_start,
            "token_end": self.token_end,
            "text": self.text,
            "char_start": self.char_start,
            "char_end": self.char_end,
        }


def chunk_from_dict(row: dict) -> Chunk:
    return Chunk(
        chunk_id=row["chunk_id"],
        doc_id=row["doc_id"],
        work_id=row["work_id"],
        token_start=int(row["token_start"]),
        token_end=int(row["token_end"]),
        text=row["text"],
        char_start=int(row.get("char_start", 0)),
        char_end=int(row.get("char_end", 0)),
    )


def record_from_dict(row: dict, line_no: int | None = None) -> DocumentRecord:
    where = f" (line {line_no})" if line_no is not None else ""
    for field in ("doc_id", "work_id", "text"):
        if field not in row or row[field] in (None, ""):
            raise IngestError(f"missing required field {field!r}{where}")
    year = row.get("year")
    if year is not None:
        if not isinstance(year, int) or isinstance(year, bool) or year <= 0:
            raise IngestError(f"year must be a positive integer, got {year!r}{where}")
    return DocumentRecord(
        doc_id=str(row["doc_id"]),
        work_id=str(row["work_id"]),
        text=str(row["text"]),
        title=str(row.get("title", "") or ""),
        author=str(row.get("author", "") or ""),
        year=year,
        genre=str(row.get("genre", "") or ""),
        declared_language=str(row.get("declared_language", "") or ""),
    )


def ingest(source: Iterable[str] | IO[str]) -> list[DocumentRecord]:
    """Parse a JSONL document stream into records, preserving input order.

    Raises IngestError with the offending 1-based line number on malformed
    lines, and names both lines on a duplicate doc_id.
    """
    records: list[DocumentRecord] = []
    seen: dict[str, int] = {}
    for line_no, line in enumerate(source, start=1):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
        except json.JSONDecodeError as exc:
            raise IngestError(f"malformed JSON on line {line_no}: {exc.msg}") from exc
        if not isinstance(row, dict):
            raise IngestError(f"line {line_no} is not a JSON object")
        record = record_from_dict(row, line_no)
        if record.doc_id in seen:
            raise IngestError(
                f"duplicate doc_id {record.doc_id!r} on line {line_no} "
                f"(first seen on line {seen[record.doc_id]})"
            )
        seen[record.doc_id] = line_no
        records.append(record)
    return records


def ingest_path(path) -> list[DocumentRecord]:
    with open(path, encoding="utf-8") as handle:
        return ingest(handle)


def tokenize_with_offsets(text: str) -> list[tuple[str, int, int]]:
    """Tokenize into (token, char_start, char_end) triples.

    Rules: split on whitespace; peel leading and trailing non-alphanumeric
    characters into single-character tokens; split a possessive 's clitic.
    Case is preserved.
    """
    out: list[tuple[str, int, int]] = []
    for piece_match in _WORD_RE.finditer(text):
        piece = piece_match.group()
        base = piece_match.start()
        start, end = 0, len(piece)
        while start < end and not piece[start].isalnum():
            out.append((piece[start], base + start, base + start + 1))
            start += 1
        trail: list[tuple[str, int, int]] = []
        while end > start and not piece[end - 1].isalnum():
            trail.append((piece[end - 1], base + end - 1, base + end))
            end -= 1
        core = piece[start:end]
        if core:
            if len(core) > 2 and core[-2:].lower() == "'s":
                out.append((core[:-2], base + start, base + end - 2))
                out.append((core[-2:], base + end - 2, base + end))
            else:
                out.append((core, base + start, base + end))
        out.extend(reversed(trail))
    return out


def tokenize(text: str) -> list[str]:
    return [token for token, _, _ in tokenize_with_offsets(text)]


def chunk_document(doc: DocumentRecord, chunk_size: int = 100) -> list[Chunk]:
    """Tile a document into chunks of chunk_size tokens; only the final chunk may be shorter."""
    if chunk_size < 1:
        raise ValueError(f"chunk_size must be >= 1, got {chunk_size}")
    spans = tokenize_with_offsets(doc.text)
    chunks: list[Chunk] = []
    for start in range(0, len(spans), chunk_size):
        group = spans[start : start + chunk_size]
        char_start = group[0][1]
        char_end = group[-1][2]
        chunks.append(
            Chunk(
                chunk_id=f"{doc.doc_id}#{len(chunks)}",
                doc_id=doc.doc_id,
                work_id=doc.work_id,
                token_start=start,
                token_end=start + len(group),
                text=doc.text[char_start:char_end],
                char_start=char_start,
                char_end=char_end,
            )
        )
    return chunks


def chunk_corpus(docs: Iterable[DocumentRecord], chunk_size: int = 100) -> list[Chunk]:
    chunks: list[Chunk] = []
    for doc in docs:
        chunks.extend(chunk_document(doc, chunk_size))
    return chunks
