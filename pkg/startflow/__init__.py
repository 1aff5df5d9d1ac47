"""
StartFlow: wireflow modelling, Step-3 heuristic checks and evaluation tooling.

The common entry points are re-exported here so callers can embed the
toolchain in their own scripts:

```python
from startflow import lint_project, parse

report = lint_project(parse(open("caa.sfw").read()))
```
"""

from .dsl import format_project, parse, parse_document
from .lint import lint_project
from .metrics import metrics_report, shortest_actions

__all__ = ["format_project", "lint_project", "metrics_report", "parse", "parse_document", "shortest_actions"]
