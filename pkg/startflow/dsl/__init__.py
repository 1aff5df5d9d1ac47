"""The `.sfw` wireflow language: parser and canonical formatter."""

from .formatter import format_project
from .parser import ParseResult, parse, parse_document, parse_file, read_source, segment

format = format_project

__all__ = [
    "ParseResult",
    "format",
    "format_project",
    "parse",
    "parse_document",
    "parse_file",
    "read_source",
    "segment",
]
