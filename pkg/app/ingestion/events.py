"""Parse reading-event logs (json-lines or CSV) into an InteractionLog."""

import csv
import io
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import BinaryIO, Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from app.errors import InputError

logger = logging.getLogger(__name__)

CSV_HEADER = ["user_id", "article_id", "active_time"]

EventFormat = Literal["json-lines", "csv"]


class InteractionEvent(BaseModel):
    """One reading event: a user spent ``active_time`` seconds on an article."""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    user_id: str = Field(alias="userId", min_length=1)
    article_id: str = Field(alias="documentId", min_length=1)
    active_time: float = Field(alias="activeTime", ge=0, allow_inf_nan=False)


@dataclass(frozen=True)
class InteractionLog:
    """Reading events plus the user and article indexes they span."""

    events: tuple[InteractionEvent, ...]
    user_index: frozenset[str]
    article_index: frozenset[str]
    dropped: int = field(default=0, compare=False)

    @classmethod
    def from_events(cls, events: list[InteractionEvent], dropped: int = 0) -> "InteractionLog":
        return cls(
            events=tuple(events),
            user_index=frozenset(e.user_id for e in events),
            article_index=frozenset(e.article_id for e in events),
            dropped=dropped,
        )

    def __len__(self) -> int:
        return len(self.events)

    def total_time(self) -> dict[tuple[str, str], float]:
        """ActTime(u, a): active time summed over repeated events of the same pair."""
        totals: dict[tuple[str, str], float] = defaultdict(float)
        for event in self.events:
            totals[(event.user_id, event.article_id)] += event.active_time
        return dict(totals)

    def total_time_by_article(self) -> dict[str, float]:
        totals: dict[str, float] = defaultdict(float)
        for event in self.events:
            totals[event.article_id] += event.active_time
        return dict(totals)


def _decode(stream: BinaryIO | bytes) -> str:
    raw = stream if isinstance(stream, bytes) else stream.read()
    try:
        return raw.decode("utf-8")
    except UnicodeDecodeError as e:
        raise InputError(f"input is not valid UTF-8: {e}", stage="ingest") from e


def _describe(error: ValidationError) -> str:
    parts = []
    for detail in error.errors():
        location = ".".join(str(loc) for loc in detail["loc"]) or "record"
        parts.append(f"{location}: {detail['msg']}")
    return "; ".join(parts)


def _iter_json_lines(text: str):
    for line_no, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            yield line_no, InteractionEvent.model_validate_json(line)
        except ValidationError as e:
            raise InputError(f"line {line_no}: {_describe(e)}", stage="ingest") from e


def _iter_csv(text: str):
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header != CSV_HEADER:
        raise InputError(
            f"line 1: expected CSV header {','.join(CSV_HEADER)!r}, got {header!r}", stage="ingest"
        )
    for row in reader:
        line_no = reader.line_num
        if not row:
            continue
        if len(row) != len(CSV_HEADER):
            raise InputError(f"line {line_no}: expected 3 columns, got {len(row)}", stage="ingest")
        try:
            yield line_no, InteractionEvent.model_validate(dict(zip(CSV_HEADER, row)))
        except ValidationError as e:
            raise InputError(f"line {line_no}: {_describe(e)}", stage="ingest") from e


def parse_events(stream: BinaryIO | bytes, format: EventFormat = "json-lines") -> InteractionLog:
    """
    Parse a reading-event log.

    Events with zero active time are dropped; repeated (user, article) pairs are
    kept and summed downstream.

    Args:
        stream: UTF-8 encoded bytes or a binary file object
        format: "json-lines" ({"userId", "documentId", "activeTime"} per line)
            or "csv" (header user_id,article_id,active_time)

    Returns:
        InteractionLog with the kept events in input order
    """
    text = _decode(stream)
    if format == "json-lines":
        records = _iter_json_lines(text)
    elif format == "csv":
        records = _iter_csv(text)
    else:
        raise InputError(f"unknown event format: {format}", stage="ingest")

    kept: list[InteractionEvent] = []
    dropped = 0
    for _, event in records:
        if event.active_time == 0:
            dropped += 1
            continue
        kept.append(event)

    logger.info("Parsed events: kept=%d dropped=%d (zero active time)", len(kept), dropped)
    return InteractionLog.from_events(kept, dropped=dropped)


def serialize_events(log: InteractionLog) -> bytes:
    """Write events back as json-lines in their original order."""
    lines = [event.model_dump_json(by_alias=True) for event in log.events]
    return ("\n".join(lines) + "\n").encode("utf-8") if lines else b""


def load_events(path: str | Path) -> InteractionLog:
    """Read an event file, choosing the format from its suffix."""
    path = Path(path)
    if not path.is_file():
        raise InputError(f"events file not found: {path}", stage="ingest")
    fmt: EventFormat = "csv" if path.suffix.lower() == ".csv" else "json-lines"
    with path.open("rb") as f:
        return parse_events(f, format=fmt)
