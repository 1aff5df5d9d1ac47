"""Lark grammar for one `.sfw` statement.

The document is cut into single statements before it reaches lark (see
``parser.segment``), so each start symbol below matches exactly one statement
of the matching block context: ``top`` outside blocks, ``element`` inside a
screen block and ``feature_item`` inside a feature block.
"""

from __future__ import annotations

from functools import lru_cache

from lark import Lark

GRAMMAR = r"""
?top: project_decl
    | story
    | screen_open
    | feature_open
    | lint_stmt

project_decl: "project" STRING
story: "story" ID "as" STRING "want" STRING ["why" STRING] "prio" INT
screen_open: "screen" ID [STRING] TAG* "{"
feature_open: "feature" ID "for" ID "{"

?lint_stmt: "lint" "disable" ID           -> lint_disable
          | "lint" "severity" ID INT      -> lint_severity
          | "lint" "min-label" INT        -> lint_min_label
          | "lint" "blocklist" STRING*    -> lint_blocklist
          | "lint" "strict-feedback"      -> lint_strict_feedback

?element: "layout" ID ID [STRING]                 -> layout
        | "field" ID STRING "required" REQUIRED   -> field
        | "button" ID STRING [SUBMITS]            -> button
        | "icon" ID ID ["alt" STRING] [SUBMITS]   -> icon

?feature_item: "use" ID+                                -> use
             | "connect" ref "->" ID [KIND] ["as" ID]   -> connect
             | "task" ID ":" step ("->" step)*          -> task

ref: ID "." ID
step: ID ["." ID]

TAG: "entry" | "feedback" | "error"
KIND: "normal" | "error" | "back"
REQUIRED: "yes" | "no" | "unspecified"
SUBMITS: "submits"

STRING: /"(?:[^"\\\n]|\\.)*"/
INT: /[0-9]+/
ID: /[A-Za-z_](?:[A-Za-z0-9_]|-(?!>))*/

WS: /[ \t\f\r]+/
%ignore WS
"""

START_SYMBOLS = ("top", "element", "feature_item")

# 语句开头的关键字，用于块未闭合时的恢复
TOP_KEYWORDS = frozenset({"project", "story", "screen", "feature", "lint"})


@lru_cache(maxsize=1)
def statement_parser() -> Lark:
    """Shared LALR parser; lark parsers hold no per-parse state."""
    return Lark(
        GRAMMAR,
        parser="lalr",
        lexer="contextual",
        start=list(START_SYMBOLS),
        maybe_placeholders=True,
        propagate_positions=False,
    )
