from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional

from .config import EDGE_KINDS, RULE_IDS, AppConfig, LintConfig, load_config, resolve_config_path
from .corpus import verify_corpus
from .dsl import format_project, parse_document, read_source
from .errors import (
    BrokenPathError,
    EvalError,
    GraphError,
    ParseFailed,
    StartflowError,
    UnknownFeatureError,
    UnknownScreenError,
    UnknownTaskError,
    UsageError,
)
from .evalkit import (
    TAM_QUESTIONS,
    EvalSummary,
    TamSummary,
    load_defect_forms,
    load_tam_responses,
    summarize_all,
    summarize_defects,
    summarize_tam,
    summarize_tam_all,
    top_heuristics,
)
from .flow import build_graph
from .lint import lint_project
from .logging import configure_logging
from .metrics import find_feature, find_task, metrics_report, shortest_actions, task_metrics
from .model import Project, validate_structure
from .render import to_dot
from .report import render_text
from .state import ExitStatus, Severity
from .utils import dump_json, round_half_up
from .wizard import ScriptedAnswers, Wizard


class _ArgumentParser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; usage errors here exit with 3."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(int(ExitStatus.USAGE), f"{self.prog}: 错误: {message}\n")


_SEVERITY_HELP = " ".join(f"{int(level)}={level.name}: {level.description}" for level in Severity)


def _severity_override(value: str) -> tuple[str, int]:
    rule, sep, level = value.partition("=")
    rule = rule.strip().upper()
    if not sep or rule not in RULE_IDS:
        raise argparse.ArgumentTypeError(f"格式应为 R1..R8=<1..4>，收到 {value!r}")
    try:
        severity = int(level)
    except ValueError:
        raise argparse.ArgumentTypeError(f"严重度必须是整数，收到 {level!r}") from None
    if severity not in tuple(Severity):
        raise argparse.ArgumentTypeError(f"严重度必须在 1..4 之间，收到 {severity}")
    return rule, severity


def _edge_kinds(value: str) -> frozenset[str]:
    kinds = frozenset(part.strip() for part in value.split(",") if part.strip())
    unknown = kinds - set(EDGE_KINDS)
    if unknown:
        raise argparse.ArgumentTypeError(f"未知连线类型: {', '.join(sorted(unknown))}")
    return kinds


def parse_args(argv: list[str] | None = None) -> argparse.Namespace:
    # 公共参数：允许在子命令前或后使用；SUPPRESS 避免子命令的默认值覆盖前面给出的值
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "-c",
        "--config",
        default=argparse.SUPPRESS,
        help="配置文件路径 (缺省读取环境变量 STARTFLOW_CONFIG)",
    )
    common.add_argument(
        "--log-level",
        default=argparse.SUPPRESS,
        help="日志级别，覆盖配置文件中的 logger.log_level",
    )

    parser = _ArgumentParser(description="StartFlow - wireflow 建模与检查工具", parents=[common])
    subparsers = parser.add_subparsers(dest="command", parser_class=_ArgumentParser)
    subparsers.required = True

    check_parser = subparsers.add_parser("check", help="解析并按步骤三的问题检查 wireflow", parents=[common])
    check_parser.add_argument("path", help=".sfw 文件")
    check_parser.add_argument("--json", action="store_true", help="输出 JSON 报告")
    check_parser.add_argument(
        "--fail-on",
        type=int,
        choices=[int(level) for level in Severity],
        help="严重度达到该值的缺陷使退出码为 1（缺省读取配置，默认 3）。" + _SEVERITY_HELP,
    )
    check_parser.add_argument(
        "--disable",
        action="append",
        default=[],
        choices=RULE_IDS,
        help="关闭规则，可重复",
    )
    check_parser.add_argument(
        "--severity",
        action="append",
        default=[],
        type=_severity_override,
        help="覆盖规则严重度，如 R2=4，可重复",
    )
    check_parser.add_argument("--strict-feedback", action="store_true", help="每个流程终点都必须是反馈屏幕")
    check_parser.add_argument("--jobs", type=int, default=1, help="并行检查的线程数")

    fmt_parser = subparsers.add_parser("fmt", help="输出规范格式", parents=[common])
    fmt_parser.add_argument("path", help=".sfw 文件")
    mode = fmt_parser.add_mutually_exclusive_group()
    mode.add_argument("--check", action="store_true", help="文件不是规范格式时退出码为 1")
    mode.add_argument("--write", action="store_true", help="就地改写文件")

    graph_parser = subparsers.add_parser("graph", help="导出 Graphviz DOT 图", parents=[common])
    graph_parser.add_argument("path", help=".sfw 文件")
    graph_parser.add_argument("--feature", help="只导出指定功能")
    graph_parser.add_argument("-o", "--output", help="输出文件，缺省写到标准输出")

    metrics_parser = subparsers.add_parser("metrics", help="计算任务步数与最短路径", parents=[common])
    metrics_parser.add_argument("path", help=".sfw 文件")
    metrics_parser.add_argument("--task", help="只输出指定任务的操作次数")
    metrics_parser.add_argument("--feature", help="--from/--to 所在的功能")
    metrics_parser.add_argument("--from", dest="source", help="起始屏幕（缺省为入口屏幕）")
    metrics_parser.add_argument("--to", dest="target", help="目标屏幕")
    metrics_parser.add_argument("--json", action="store_true", help="输出 JSON")
    metrics_parser.add_argument(
        "--exclude-kinds",
        type=_edge_kinds,
        help="计算最短路径时忽略的连线类型，逗号分隔 (normal,error,back)",
    )

    wizard_parser = subparsers.add_parser("wizard", help="交互式步骤一至三向导", parents=[common])
    wizard_parser.add_argument("path", help=".sfw 文件")
    wizard_parser.add_argument("--answers", help="脚本化回答 (JSON)，非交互终端必填")
    wizard_parser.add_argument("--reset", action="store_true", help="丢弃已保存的会话重新开始")

    eval_parser = subparsers.add_parser("eval", help="汇总启发式评估缺陷表", parents=[common])
    eval_parser.add_argument("csv", help="缺陷表 CSV")
    eval_parser.add_argument("--group", help="只汇总指定组")
    eval_parser.add_argument("--top", type=int, default=5, help="文本输出中列出的启发式数量")
    eval_parser.add_argument("--json", action="store_true", help="输出 JSON")

    tam_parser = subparsers.add_parser("tam", help="汇总 TAM 问卷", parents=[common])
    tam_parser.add_argument("csv", help="问卷 CSV")
    tam_parser.add_argument("--group", help="只汇总指定组")
    tam_parser.add_argument("--json", action="store_true", help="输出 JSON")

    corpus_parser = subparsers.add_parser("corpus", help="比对语料与金标准文件", parents=[common])
    corpus_parser.add_argument("--root", help="语料目录，缺省为仓库内 fixtures/")
    corpus_parser.add_argument("--update", action="store_true", help="重写已存在的金标准文件")

    subparsers.add_parser("test", help="运行项目附带的 pytest 测试", parents=[common])
    return parser.parse_args(argv)


def _load_app_config(args: argparse.Namespace) -> AppConfig:
    app_config = load_config(resolve_config_path(getattr(args, "config", None)))
    level = getattr(args, "log_level", None)
    if level:
        app_config = replace(app_config, logger=replace(app_config.logger, level=level))
    configure_logging(app_config.logger)
    return app_config


def _print_parse_errors(path: str, errors) -> None:
    for error in errors:
        print(f"{path}:{error}")


def _read_project(path: str) -> Project:
    result = parse_document(read_source(Path(path)))
    if not result.ok:
        raise ParseFailed(result.errors)
    return result.project


def _report_blocking(project: Project) -> bool:
    blocking = [error for error in validate_structure(project) if error.blocking]
    for error in blocking:
        print(f"ERROR {error}")
    return bool(blocking)


def cmd_check(args: argparse.Namespace, app_config: AppConfig) -> ExitStatus:
    project = _read_project(args.path)
    overrides: dict = {}
    if args.disable:
        overrides["disabled"] = args.disable
    if args.severity:
        overrides["severity"] = dict(args.severity)
    if args.strict_feedback:
        overrides["strict_feedback"] = True
    config: LintConfig = app_config.lint_config(project.config).merged(overrides)
    report = lint_project(project, config, jobs=max(1, args.jobs))
    sys.stdout.write(report.to_json() if args.json else render_text(report))
    if report.blocking_errors:
        return ExitStatus.INVALID
    fail_on = args.fail_on or app_config.check.fail_on
    return ExitStatus.DEFECTS if report.count_at_or_above(fail_on) else ExitStatus.CLEAN


def cmd_fmt(args: argparse.Namespace, app_config: AppConfig) -> ExitStatus:
    path = Path(args.path)
    source = read_source(path)
    result = parse_document(source)
    if not result.ok:
        raise ParseFailed(result.errors)
    canonical = format_project(result.project)
    if args.check:
        if canonical != source:
            print(f"{args.path} 不是规范格式", file=sys.stderr)
            return ExitStatus.DEFECTS
        return ExitStatus.CLEAN
    if args.write:
        if canonical != source:
            path.write_text(canonical, encoding="utf-8", newline="\n")
            logging.info("已改写 %s", path)
        return ExitStatus.CLEAN
    sys.stdout.write(canonical)
    return ExitStatus.CLEAN


def cmd_graph(args: argparse.Namespace, app_config: AppConfig) -> ExitStatus:
    project = _read_project(args.path)
    if _report_blocking(project):
        return ExitStatus.INVALID
    document = to_dot(project, args.feature)
    if args.output:
        document.write(Path(args.output))
    else:
        sys.stdout.write(document.text)
    return ExitStatus.CLEAN


def _format_count(value: Optional[int]) -> str:
    return "-" if value is None else str(value)


def cmd_metrics(args: argparse.Namespace, app_config: AppConfig) -> ExitStatus:
    project = _read_project(args.path)
    if _report_blocking(project):
        return ExitStatus.INVALID
    exclude = args.exclude_kinds if args.exclude_kinds is not None else app_config.metrics.exclude_edge_kinds

    if args.task:
        feature, task = find_task(project, args.task)
        row = task_metrics(feature, task, project, exclude)
        sys.stdout.write(dump_json(row) if args.json else f"{row['actions']}\n")
        return ExitStatus.CLEAN

    if args.target:
        if not args.feature:
            raise UsageError("--to 需要同时指定 --feature")
        flow = build_graph(find_feature(project, args.feature), project)
        source = args.source or flow.entry
        distance = shortest_actions(flow, source, args.target, exclude)
        if args.json:
            sys.stdout.write(dump_json({"feature": flow.feature, "from": source, "to": args.target, "actions": distance}))
        else:
            print("unreachable" if distance is None else distance)
        return ExitStatus.CLEAN
    if args.source or args.feature:
        raise UsageError("--from/--feature 需要与 --to 一起使用")

    report = metrics_report(project, exclude)
    if args.json:
        sys.stdout.write(dump_json(report))
        return ExitStatus.CLEAN
    for row in report["features"]:
        unreachable = ",".join(row["unreachable"]) or "-"
        print(
            f"feature {row['feature']}: entry={row['entry']} screens={row['screens']} "
            f"connectors={row['connectors']} actions_to_feedback={_format_count(row['actions_to_feedback'])} "
            f"unreachable={unreachable}"
        )
    for row in report["tasks"]:
        print(
            f"task {row['task']} ({row['feature']}): actions={row['actions']} "
            f"shortest={_format_count(row['shortest'])} end={row['end'] or '-'}"
        )
    return ExitStatus.CLEAN


def cmd_wizard(args: argparse.Namespace, app_config: AppConfig) -> ExitStatus:
    if args.answers:
        answers = ScriptedAnswers.from_file(Path(args.answers))
    elif sys.stdin.isatty():
        answers = None
    else:
        raise UsageError("当前终端不可交互，请通过 --answers 提供脚本化回答")
    path = Path(args.path)
    project = _read_project(args.path)
    if _report_blocking(project):
        return ExitStatus.INVALID
    wizard = Wizard(
        project,
        path,
        answers,
        lint_config=app_config.lint_config(project.config),
    )
    result = wizard.run(reset=args.reset)
    session = result.session
    state = "paused" if result.paused else ("completed" if session.completed else "open")
    print(
        f"wizard {state}: step {session.step}, round {session.round}, "
        f"pending {len(session.pending)}, resolved {len(session.resolved)}"
    )
    return ExitStatus.CLEAN


def _eval_text(summary: EvalSummary, top: int) -> str:
    mean = summary.mean_severity
    lines = [
        f"group {summary.group}",
        f"  total discrepancies: {summary.total_discrepancies}",
        f"  false positives: {summary.false_positives}",
        f"  real defects: {summary.real_defects}",
        f"  unique defects: {summary.unique_defects}",
        f"  duplicates: {summary.duplicates}",
        f"  mean severity: {round_half_up(mean) if mean is not None else '-'}",
        "  heuristics:",
    ]
    lines += [f"    {name}: {count}" for name, count in top_heuristics(summary, top)]
    lines.append("  locations:")
    lines += [f"    {name}: {count}" for name, count in summary.per_location.items()]
    return "\n".join(lines) + "\n"


def cmd_eval(args: argparse.Namespace, app_config: AppConfig) -> ExitStatus:
    forms = load_defect_forms(Path(args.csv))
    if args.group:
        if not any(form.group == args.group for form in forms):
            raise EvalError(f"no defect forms for group '{args.group}'", "E-EMPTY-GROUP")
        summaries = [summarize_defects(forms, args.group)]
    else:
        summaries = summarize_all(forms)
    if args.json:
        payload = summaries[0].to_dict() if args.group else [summary.to_dict() for summary in summaries]
        sys.stdout.write(dump_json(payload))
    else:
        sys.stdout.write("\n".join(_eval_text(summary, args.top) for summary in summaries))
    return ExitStatus.CLEAN


def _tam_text(summary: TamSummary) -> str:
    lines = [f"group {summary.group} ({summary.respondents} respondents)"]
    lines += [f"  {name}: {round_half_up(mean)}" for name, mean in summary.construct_means.items()]
    lines += [
        f"    {question} {round_half_up(mean)}  {TAM_QUESTIONS[question]}"
        for question, mean in summary.question_means.items()
    ]
    return "\n".join(lines) + "\n"


def cmd_tam(args: argparse.Namespace, app_config: AppConfig) -> ExitStatus:
    responses = load_tam_responses(Path(args.csv))
    summaries = [summarize_tam(responses, args.group)] if args.group else summarize_tam_all(responses)
    if args.json:
        payload = summaries[0].to_dict() if args.group else [summary.to_dict() for summary in summaries]
        sys.stdout.write(dump_json(payload))
    else:
        sys.stdout.write("\n".join(_tam_text(summary) for summary in summaries))
    return ExitStatus.CLEAN


def cmd_corpus(args: argparse.Namespace, app_config: AppConfig) -> ExitStatus:
    report = verify_corpus(Path(args.root) if args.root else None, update=args.update)
    sys.stdout.write(report.render_text())
    return ExitStatus.CLEAN if report.ok else ExitStatus.DEFECTS


def run_tests() -> ExitStatus:
    import subprocess

    cmd = [sys.executable, "-m", "pytest"]
    completed = subprocess.run(cmd, check=False)
    return ExitStatus.CLEAN if completed.returncode == 0 else ExitStatus.DEFECTS


_COMMANDS = {
    "check": cmd_check,
    "fmt": cmd_fmt,
    "graph": cmd_graph,
    "metrics": cmd_metrics,
    "wizard": cmd_wizard,
    "eval": cmd_eval,
    "tam": cmd_tam,
    "corpus": cmd_corpus,
}


def main(argv: List[str] | None = None) -> int:
    args = parse_args(argv)
    command = args.command
    try:
        if command == "test":
            return int(run_tests())
        app_config = _load_app_config(args)
        handler = _COMMANDS.get(command)
        if handler is None:
            raise UsageError(f"未知命令: {command}")
        return int(handler(args, app_config))
    except ParseFailed as exc:
        _print_parse_errors(getattr(args, "path", "-"), exc.errors)
        return int(ExitStatus.INVALID)
    except (GraphError, BrokenPathError, EvalError) as exc:
        print(f"{exc.code} {exc.message}", file=sys.stderr)
        return int(ExitStatus.INVALID)
    except (UsageError, UnknownFeatureError, UnknownScreenError, UnknownTaskError) as exc:
        print(f"{exc.code} {exc.message}", file=sys.stderr)
        return int(ExitStatus.USAGE)
    except StartflowError as exc:
        # ConfigError 等
        print(f"{exc.code} {exc.message}", file=sys.stderr)
        return int(ExitStatus.USAGE)
    except OSError as exc:
        print(f"无法读写文件 {exc.filename or ''}: {exc.strerror}", file=sys.stderr)
        return int(ExitStatus.USAGE)
    except KeyboardInterrupt:
        logging.info("已中断")
        return int(ExitStatus.USAGE)


if __name__ == "__main__":
    raise SystemExit(main())
