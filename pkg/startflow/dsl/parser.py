"""Reading `.sfw` documents into a :class:`~startflow.model.Project`.

Parsing is statement-oriented. :func:`segment` cuts the text into statements
(newline, ``;``, ``{`` and ``}`` delimit them, comments are dropped) and each
statement is parsed on its own against the start symbol of the enclosing
block. A bad statement becomes one :class:`ParseError` and parsing resumes at
the next statement, so a single run reports every error it can.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Tuple

from lark import Token, Transformer, v_args
from lark.exceptions import LarkError, UnexpectedCharacters, UnexpectedInput, UnexpectedToken, VisitError

from ..config import RULE_IDS, LintConfig
from ..errors import ConfigError, ParseError, ParseFailed, SourceEncodingError, SourceSpan
from ..logging import get_stage_logger
from ..model import (
    Connector,
    ConnectorKind,
    Feature,
    InputField,
    Layout,
    Project,
    Required,
    Screen,
    SourceRef,
    Tag,
    TaskPath,
    TriggerIcon,
    TriggerText,
    UserStory,
)
from .grammar import TOP_KEYWORDS, statement_parser

_LEADING_WORD = re.compile(r"\s*([A-Za-z_][A-Za-z0-9_-]*)")
_MAX_INT_DIGITS = 9

_ESCAPES = {'"': '"', "\\": "\\", "n": "\n", "t": "\t"}


@dataclass(frozen=True)
class Statement:
    """One statement of the source: its line, the column it starts at and its text."""

    line: int
    column: int
    text: str

    @property
    def is_close(self) -> bool:
        return self.text == "}"

    @property
    def opens_block(self) -> bool:
        return self.text.rstrip().endswith("{")

    @property
    def first_word(self) -> str:
        match = _LEADING_WORD.match(self.text)
        return match.group(1) if match else ""


def segment(text: str) -> Iterator[Statement]:
    """Split source text into statements; blank statements are skipped."""
    for line_no, line in enumerate(text.replace("\r\n", "\n").split("\n"), start=1):
        start = 0
        index = 0
        in_string = False
        length = len(line)
        while index < length:
            char = line[index]
            if in_string:
                if char == "\\":
                    index += 2
                    continue
                if char == '"':
                    in_string = False
            elif char == '"':
                in_string = True
            elif char == "#":
                break
            elif char == ";":
                yield from _statement(line_no, line, start, index)
                start = index + 1
            elif char == "{":
                yield from _statement(line_no, line, start, index + 1)
                start = index + 1
            elif char == "}":
                yield from _statement(line_no, line, start, index)
                yield Statement(line_no, index + 1, "}")
                start = index + 1
            index += 1
        yield from _statement(line_no, line, start, min(index, length))


def _statement(line_no: int, line: str, start: int, end: int) -> Iterator[Statement]:
    chunk = line[start:end]
    if chunk.strip():
        yield Statement(line_no, start + 1, chunk)


def decode_string(token: Token) -> str:
    body = token[1:-1]
    out: List[str] = []
    index = 0
    while index < len(body):
        char = body[index]
        if char == "\\":
            escaped = body[index + 1]
            if escaped not in _ESCAPES:
                raise _SemanticError(f"unknown escape '\\{escaped}' in string", token, code="E-LEX")
            out.append(_ESCAPES[escaped])
            index += 2
            continue
        out.append(char)
        index += 1
    return "".join(out)


class _SemanticError(Exception):
    def __init__(self, message: str, token: Optional[Token] = None, code: str = "E-SEMANTIC") -> None:
        super().__init__(message)
        self.message = message
        self.token = token
        self.code = code


def _int(token: Token) -> int:
    if len(token.lstrip("0")) > _MAX_INT_DIGITS:
        raise _SemanticError(f"number '{token}' is out of range", token)
    return int(token)


@dataclass(frozen=True)
class _ProjectName:
    name: str
    span: SourceSpan


@dataclass(frozen=True)
class _BlockOpen:
    kind: str
    id: str
    span: SourceSpan
    title: Optional[str] = None
    tags: frozenset = frozenset()
    story: Optional[str] = None


@dataclass(frozen=True)
class _LintSetting:
    overrides: Dict
    span: SourceSpan


@dataclass(frozen=True)
class _Use:
    screens: Tuple[str, ...]


@dataclass(frozen=True)
class _Connect:
    source: SourceRef
    target: str
    kind: ConnectorKind
    alias: Optional[str]
    span: SourceSpan


@v_args(inline=True)
class _StatementBuilder(Transformer):
    """Turns one statement's parse tree into model values (spans made absolute)."""

    def __init__(self, line: int, offset: int) -> None:
        super().__init__()
        self._line = line
        self._offset = offset

    def _span(self, token: Token) -> SourceSpan:
        return SourceSpan(self._line, self._offset + token.column - 1, max(len(token), 1))

    def project_decl(self, name):
        return _ProjectName(decode_string(name), self._span(name))

    def story(self, story_id, role, want, why, prio):
        return UserStory(
            id=str(story_id),
            role=decode_string(role),
            want=decode_string(want),
            why=decode_string(why) if why is not None else None,
            priority=_int(prio),
            span=self._span(story_id),
        )

    def screen_open(self, screen_id, title, *tags):
        return _BlockOpen(
            kind="screen",
            id=str(screen_id),
            span=self._span(screen_id),
            title=decode_string(title) if title is not None else str(screen_id),
            tags=frozenset(Tag(str(tag)) for tag in tags),
        )

    def feature_open(self, feature_id, story_id):
        return _BlockOpen(kind="feature", id=str(feature_id), span=self._span(feature_id), story=str(story_id))

    def _rule(self, token: Token) -> str:
        rule = str(token)
        if rule not in RULE_IDS:
            raise _SemanticError(f"unknown rule '{rule}'", token)
        return rule

    def lint_disable(self, rule):
        return _LintSetting({"disabled": [self._rule(rule)]}, self._span(rule))

    def lint_severity(self, rule, value):
        severity = _int(value)
        if not 1 <= severity <= 4:
            raise _SemanticError(f"severity must be within 1..4, got {severity}", value)
        return _LintSetting({"severity": {self._rule(rule): severity}}, self._span(rule))

    def lint_min_label(self, value):
        return _LintSetting({"min_label_length": _int(value)}, self._span(value))

    def lint_blocklist(self, *phrases):
        return _LintSetting(
            {"blocklist": [decode_string(phrase) for phrase in phrases]},
            SourceSpan(self._line, self._offset),
        )

    def lint_strict_feedback(self):
        return _LintSetting({"strict_feedback": True}, SourceSpan(self._line, self._offset))

    def layout(self, element_id, kind, label):
        return Layout(
            id=str(element_id),
            kind=str(kind),
            label=decode_string(label) if label is not None else None,
            span=self._span(element_id),
        )

    def field(self, element_id, label, required):
        return InputField(
            id=str(element_id),
            label=decode_string(label),
            required=Required(str(required)),
            span=self._span(element_id),
        )

    def button(self, element_id, label, submits):
        return TriggerText(
            id=str(element_id),
            label=decode_string(label),
            submits=submits is not None,
            span=self._span(element_id),
        )

    def icon(self, element_id, icon, alt, submits):
        return TriggerIcon(
            id=str(element_id),
            icon=str(icon),
            alt=decode_string(alt) if alt is not None else None,
            submits=submits is not None,
            span=self._span(element_id),
        )

    def use(self, *screens):
        return _Use(tuple(str(screen) for screen in screens))

    def ref(self, screen, element):
        return SourceRef(str(screen), str(element)), screen

    def connect(self, ref, target, kind, alias):
        source, source_token = ref
        return _Connect(
            source=source,
            target=str(target),
            kind=ConnectorKind(str(kind)) if kind is not None else ConnectorKind.NORMAL,
            alias=str(alias) if alias is not None else None,
            span=self._span(source_token),
        )

    def step(self, screen, element):
        return screen, element

    def task(self, name, *steps):
        refs: List[SourceRef] = []
        end: Optional[str] = None
        for index, (screen, element) in enumerate(steps):
            if element is not None:
                refs.append(SourceRef(str(screen), str(element)))
                continue
            if index != len(steps) - 1:
                raise _SemanticError(
                    f"bare screen '{screen}' may only end a task; name the trigger as '{screen}.<trigger>'",
                    screen,
                )
            end = str(screen)
        return TaskPath(name=str(name), steps=tuple(refs), end=end, span=self._span(name))


@dataclass
class _ScreenBlock:
    header: _BlockOpen
    brace: SourceSpan
    elements: List = field(default_factory=list)

    def build(self) -> Screen:
        return Screen(
            id=self.header.id,
            title=self.header.title or self.header.id,
            elements=tuple(self.elements),
            tags=self.header.tags,
            span=self.header.span,
        )


@dataclass
class _FeatureBlock:
    header: _BlockOpen
    brace: SourceSpan
    screens: List[str] = field(default_factory=list)
    connectors: List[Connector] = field(default_factory=list)
    tasks: List[TaskPath] = field(default_factory=list)

    def add(self, item) -> None:
        if isinstance(item, _Use):
            self.screens.extend(item.screens)
        elif isinstance(item, _Connect):
            position = len(self.connectors) + 1
            self.connectors.append(
                Connector(
                    id=item.alias or default_connector_id(position),
                    source=item.source,
                    target=item.target,
                    kind=item.kind,
                    span=item.span,
                )
            )
        else:
            self.tasks.append(item)

    def build(self) -> Feature:
        return Feature(
            id=self.header.id,
            story=self.header.story or "",
            screens=tuple(self.screens),
            connectors=tuple(self.connectors),
            tasks=tuple(self.tasks),
            span=self.header.span,
        )


@dataclass
class _SkippedBlock:
    brace: SourceSpan


def default_connector_id(position: int) -> str:
    """Id given to the ``position``-th (1-based) unnamed connector of a feature."""
    return f"c{position}"


@dataclass
class ParseResult:
    project: Optional[Project]
    errors: List[ParseError]

    @property
    def ok(self) -> bool:
        return not self.errors


class _DocumentReader:
    def __init__(self, text: str) -> None:
        self._lines = text.replace("\r\n", "\n").split("\n")
        self._statements = segment(text)
        self.errors: List[ParseError] = []
        self._stack: List = []
        self._name: Optional[str] = None
        self._name_seen = False
        self._stories: List[UserStory] = []
        self._screens: List[Screen] = []
        self._features: List[Feature] = []
        self._lint = LintConfig()

    def read(self) -> ParseResult:
        for statement in self._statements:
            self._dispatch(statement)
        for block in reversed(self._stack):
            self._error(block.brace, "unclosed block, missing '}'", "E-BLOCK")
        self.errors.sort(key=lambda error: (error.span.line, error.span.column))
        if self.errors:
            return ParseResult(None, self.errors)
        project = Project(
            name=self._name or "",
            stories=tuple(self._stories),
            features=tuple(self._features),
            screens=tuple(self._screens),
            config=self._lint,
        )
        return ParseResult(project, [])

    def _dispatch(self, statement: Statement) -> None:
        current = self._stack[-1] if self._stack else None
        if statement.is_close:
            self._close(statement)
            return
        if current is not None and statement.first_word in TOP_KEYWORDS:
            # 之前的块缺少 '}'：在其 '{' 处报错，然后按顶层语句继续
            while self._stack:
                self._error(self._stack.pop().brace, "unclosed block, missing '}'", "E-BLOCK")
            current = None
        if isinstance(current, _SkippedBlock):
            if statement.opens_block:
                self._stack.append(_SkippedBlock(self._brace_span(statement)))
            return
        start = "top"
        if isinstance(current, _ScreenBlock):
            start = "element"
        elif isinstance(current, _FeatureBlock):
            start = "feature_item"
        value = self._parse(statement, start)
        if value is None:
            if statement.opens_block:
                self._stack.append(_SkippedBlock(self._brace_span(statement)))
            return
        if current is None:
            self._accept_top(value, statement)
        elif isinstance(current, _ScreenBlock):
            current.elements.append(value)
        else:
            current.add(value)

    def _accept_top(self, value, statement: Statement) -> None:
        if isinstance(value, _ProjectName):
            if self._name_seen:
                self._error(value.span, "project name declared more than once", "E-SEMANTIC")
                return
            self._name_seen = True
            self._name = value.name
        elif isinstance(value, UserStory):
            self._stories.append(value)
        elif isinstance(value, _LintSetting):
            try:
                self._lint = self._lint.merged(value.overrides)
            except ConfigError as exc:
                self._error(value.span, exc.message, "E-SEMANTIC")
        elif isinstance(value, _BlockOpen):
            brace = self._brace_span(statement)
            if value.kind == "screen":
                self._stack.append(_ScreenBlock(value, brace))
            else:
                self._stack.append(_FeatureBlock(value, brace))

    def _close(self, statement: Statement) -> None:
        if not self._stack:
            self._error(SourceSpan(statement.line, statement.column), "unexpected '}'", "E-BLOCK")
            return
        block = self._stack.pop()
        if isinstance(block, _ScreenBlock):
            self._screens.append(block.build())
        elif isinstance(block, _FeatureBlock):
            self._features.append(block.build())

    def _parse(self, statement: Statement, start: str):
        try:
            tree = statement_parser().parse(statement.text, start=start)
        except UnexpectedToken as exc:
            if exc.token.type == "$END":
                self._error(self._end_span(statement), "unexpected end of statement", "E-SYNTAX")
            else:
                span = self._token_span(statement, exc.token.column, len(exc.token) or 1)
                self._error(span, f"unexpected '{exc.token}'", "E-SYNTAX")
            return None
        except UnexpectedCharacters as exc:
            span = self._token_span(statement, exc.column, 1)
            self._error(span, f"unexpected character '{exc.char}'", "E-LEX")
            return None
        except UnexpectedInput as exc:
            column = getattr(exc, "column", None)
            span = self._token_span(statement, column, 1) if isinstance(column, int) and column > 0 else self._end_span(statement)
            self._error(span, "unexpected input", "E-SYNTAX")
            return None
        except LarkError:
            self._error(SourceSpan(statement.line, statement.column), "statement could not be parsed", "E-SYNTAX")
            return None
        try:
            return _StatementBuilder(statement.line, statement.column).transform(tree)
        except VisitError as exc:
            original = exc.orig_exc
            if not isinstance(original, _SemanticError):
                raise
            if original.token is not None:
                span = self._token_span(statement, original.token.column, len(original.token) or 1)
            else:
                span = SourceSpan(statement.line, statement.column)
            self._error(span, original.message, original.code)
            return None

    def _token_span(self, statement: Statement, column: Optional[int], length: int) -> SourceSpan:
        if not isinstance(column, int) or column < 1:
            return self._end_span(statement)
        end = statement.column + len(statement.text)
        absolute = min(statement.column + column - 1, end - 1)
        return self._clamped(statement.line, absolute, length)

    def _end_span(self, statement: Statement) -> SourceSpan:
        stripped = statement.text.rstrip()
        return self._clamped(statement.line, statement.column + max(len(stripped), 1) - 1, 1)

    def _brace_span(self, statement: Statement) -> SourceSpan:
        return self._clamped(statement.line, statement.column + len(statement.text.rstrip()) - 1, 1)

    def _clamped(self, line: int, column: int, length: int) -> SourceSpan:
        line_text = self._lines[line - 1] if 0 < line <= len(self._lines) else ""
        column = max(1, min(column, len(line_text) + 1))
        length = max(1, min(length, len(line_text) - column + 1))
        return SourceSpan(line, column, length)

    def _error(self, span: SourceSpan, message: str, code: str) -> None:
        self.errors.append(ParseError(span, message, code))


def parse_document(text: str) -> ParseResult:
    """Parse ``text`` collecting every diagnostic instead of raising."""
    result = _DocumentReader(text).read()
    logger = get_stage_logger("parse")
    if result.errors:
        logger.info("Parse finished with %s error(s)", len(result.errors))
    elif logger.isEnabledFor(logging.DEBUG):
        project = result.project
        logger.debug(
            "Parsed project %r: %s stories, %s screens, %s features",
            project.name,
            len(project.stories),
            len(project.screens),
            len(project.features),
        )
    return result


def parse(text: str) -> Project:
    """Parse a `.sfw` document, raising :class:`ParseFailed` with all diagnostics."""
    result = parse_document(text)
    if result.errors:
        raise ParseFailed(result.errors)
    return result.project


def read_source(path: Path) -> str:
    try:
        with open(path, encoding="utf-8") as f:
            return f.read()
    except UnicodeDecodeError as exc:
        raise SourceEncodingError(f"{path}: not valid UTF-8 (byte {exc.start})") from None


def parse_file(path: Path) -> Project:
    return parse(read_source(path))
