"""Parse article corpora from json-lines."""

import logging
from pathlib import Path
from typing import BinaryIO

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from app.errors import InputError
from app.ingestion.events import _decode, _describe

logger = logging.getLogger(__name__)


class ArticleDoc(BaseModel):
    """An article body, optionally tagged with its publisher."""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    article_id: str = Field(alias="documentId", min_length=1)
    body: str
    source: str | None = None

    @model_validator(mode="after")
    def _body_not_blank(self) -> "ArticleDoc":
        if not self.body.strip():
            raise ValueError(f"empty body for article '{self.article_id}'")
        return self


def parse_corpus(stream: BinaryIO | bytes) -> list[ArticleDoc]:
    """
    Parse a corpus of {"documentId", "body", "source"?} json-lines.

    Args:
        stream: UTF-8 encoded bytes or a binary file object

    Returns:
        Documents in input order
    """
    text = _decode(stream)
    docs: list[ArticleDoc] = []
    first_seen: dict[str, int] = {}

    for line_no, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            doc = ArticleDoc.model_validate_json(line)
        except ValidationError as e:
            raise InputError(f"line {line_no}: {_describe(e)}", stage="ingest") from e

        if doc.article_id in first_seen:
            raise InputError(
                f"duplicate article id '{doc.article_id}' on lines "
                f"{first_seen[doc.article_id]} and {line_no}",
                stage="ingest",
            )
        first_seen[doc.article_id] = line_no
        docs.append(doc)

    logger.info("Parsed corpus: %d documents", len(docs))
    return docs


def serialize_corpus(docs: list[ArticleDoc]) -> bytes:
    lines = [doc.model_dump_json(by_alias=True, exclude_none=True) for doc in docs]
    return ("\n".join(lines) + "\n").encode("utf-8") if lines else b""


def load_corpus(path: str | Path) -> list[ArticleDoc]:
    path = Path(path)
    if not path.is_file():
        raise InputError(f"corpus file not found: {path}", stage="ingest")
    with path.open("rb") as f:
        return parse_corpus(f)
