"""Command-line interface for the ``kripkeu`` package."""

from __future__ import annotations

import sys
from dataclasses import dataclass
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Any, Callable, List, Optional

import typer

try:  # newer typer vendors its own click; catch the exceptions it actually raises
    from typer import _click as click
except ImportError:  # pragma: no cover - older typer uses upstream click
    import click
from loguru import logger
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from .core.completion import ProfiniteApprox, cb_classify, covering_model, distance, find_antichain, is_isolated
from .core.config import Limits, get_limits, settings
from .core.errors import InvariantError, KripkeuError, PreconditionError, ResourceLimitError
from .core.experiments import EXPERIMENTS, run_experiment
from .core.export import (
    approx_document,
    element_document,
    export_model,
    import_model,
    model_document,
    run_document,
    save_document,
    to_dot,
)
from .core.formulas import DeJonghTable, decide, eval_formula, format_formula, impl_depth, parse_formula, variables
from .core.heyting import (
    Element,
    classify_irreducible,
    coprincipal,
    principal,
    subalgebra_closure,
    supp_meet_min,
    supp_meet_min_touches_top,
)
from .core.logger_config import setup_logger
from .core.models import FiniteKripkeModel, embed_reduced, is_reduced, random_model, reduce_model
from .core.poset import down_closure, from_indices, is_downset, members
from .core.universal import UniversalModel, format_valuation, universal, validate_reduced

app = typer.Typer(help="通用 Kripke 模型与有限生成自由 Heyting 代数工具集", no_args_is_help=True)
model_app = typer.Typer(help="构造与导出通用模型", no_args_is_help=True)
app.add_typer(model_app, name="model")
console = Console(soft_wrap=True)
err_console = Console(stderr=True, soft_wrap=True)


class OutputFormat(str, Enum):
    text = "text"
    structured = "structured"
    dot = "dot"


class ExportFormat(str, Enum):
    structured = "structured"
    dot = "dot"


@dataclass
class CliState:
    fmt: OutputFormat = OutputFormat.text
    cap_nodes: Optional[int] = None
    no_timestamp: bool = False

    def limits(self, kmax: Optional[int] = None) -> Limits:
        return get_limits(node_cap=self.cap_nodes, kmax=kmax)


def _state(ctx: typer.Context) -> CliState:
    return ctx.obj if isinstance(ctx.obj, CliState) else CliState()


def _emit(
    ctx: typer.Context,
    command: str,
    params: dict[str, Any],
    result: Any,
    render: Callable[[], None],
    witnesses: Optional[list[Any]] = None,
) -> None:
    state = _state(ctx)
    if state.fmt == OutputFormat.structured:
        timestamp = None if state.no_timestamp else datetime.now().isoformat(timespec="seconds")
        typer.echo(run_document(command, params, result, witnesses, timestamp).decode("utf-8"))
    else:
        render()


def _parse_ids(text: str) -> list[int]:
    text = text.strip()
    if not text:
        return []
    try:
        return [int(chunk) for chunk in text.replace(";", ",").split(",") if chunk.strip()]
    except ValueError as e:
        raise PreconditionError(f"无法解析节点编号列表: {text}") from e


def _parse_valuation(text: str, n: int) -> int:
    beta = 0
    for chunk in text.replace(" ", "").split(","):
        if not chunk or chunk in {"none", "{}"}:
            continue
        if not chunk.startswith("p") or not chunk[1:].isdigit():
            raise PreconditionError(f"无法解析变量: {chunk}")
        index = int(chunk[1:])
        if not 1 <= index <= n:
            raise PreconditionError(f"变量 p{index} 超出范围 (n={n})")
        beta |= 1 << (index - 1)
    return beta


def parse_element(desc: str, m: UniversalModel) -> Element:
    """``formula:TEXT``, ``nodes:IDS`` (must be a downset), ``down:IDS``, ``principal:ID``,
    ``coprincipal:ID``, ``zero`` or ``one``."""
    kind, _, body = desc.partition(":")
    kind = kind.strip().lower()
    if kind == "formula":
        return eval_formula(parse_formula(body), m)
    if kind in {"nodes", "down"}:
        ids = _parse_ids(body)
        bits = from_indices(ids, m.size)
        if kind == "down":
            bits = down_closure(bits, m.poset)
        elif not is_downset(bits, m.poset):
            raise PreconditionError("nodes: 给出的节点集合不是向下封闭的，可改用 down:")
        return Element._make(m, bits)
    if kind in {"principal", "coprincipal"}:
        ids = _parse_ids(body)
        if len(ids) != 1 or not 0 <= ids[0] < m.size:
            raise PreconditionError(f"{kind}: 需要一个有效的节点编号")
        return principal(m, ids[0]) if kind == "principal" else coprincipal(m, ids[0])
    if kind == "zero":
        return Element._make(m, 0)
    if kind == "one":
        return Element._make(m, m.full)
    raise PreconditionError(f"无法识别的元素描述: {desc}")


def parse_approx(desc: str, n: int, limits: Limits) -> ProfiniteApprox:
    """``formula:TEXT``, ``finite:IDS`` or ``cofinite:IDS``."""
    kind, _, body = desc.partition(":")
    kind = kind.strip().lower()
    if kind == "formula":
        return ProfiniteApprox.formula(n, parse_formula(body), limits)
    bits = 0
    for w in _parse_ids(body):
        bits |= 1 << w
    if kind == "finite":
        m = covering_model(n, bits, limits)
        return ProfiniteApprox.finite(n, down_closure(bits, m.poset), limits)
    if kind == "cofinite":
        return ProfiniteApprox.cofinite(n, bits, limits)
    raise PreconditionError(f"无法识别的完备化元素描述: {desc}")


def _load_model_file(path: Path):
    try:
        text = path.read_bytes()
    except OSError as e:
        raise PreconditionError(f"无法读取模型文件 {path}: {e}") from e
    return import_model(text)


def _element_text(a: Element) -> str:
    nodes = a.nodes()
    return "{" + ", ".join(str(v) for v in nodes) + "}" + f"  ({len(nodes)} 个节点)"


# ---------------------------------------------------------------- global options


@app.callback()
def main_callback(
    ctx: typer.Context,
    fmt: OutputFormat = typer.Option(OutputFormat.text, "--format", help="输出格式: text | structured | dot"),
    cap_nodes: Optional[int] = typer.Option(None, "--cap-nodes", help="通用模型节点总数上限"),
    no_timestamp: bool = typer.Option(False, "--no-timestamp", help="结构化输出中省略时间戳"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="输出调试日志"),
) -> None:
    """kripkeu: 通用模型 K_n^d 的构造、判定与分析。"""
    level = "DEBUG" if verbose else settings.logging.console_level
    setup_logger(app_name="kripkeu", console_output=True, log_to_file=settings.logging.file_logging, level=level)
    ctx.obj = CliState(fmt=fmt, cap_nodes=cap_nodes, no_timestamp=no_timestamp)


# ---------------------------------------------------------------- model


@model_app.command("build")
def model_build(
    ctx: typer.Context,
    n: int = typer.Option(..., "-n", help="变量个数"),
    depth: int = typer.Option(..., "-d", "--depth", help="深度"),
    stats: bool = typer.Option(False, "--stats", help="显示每层节点数"),
    check: bool = typer.Option(False, "--check", help="验证约简性"),
) -> None:
    """构造 K_n^d 并报告每层的节点数。"""
    state = _state(ctx)
    m = universal(n, depth, state.limits())
    if state.fmt == OutputFormat.dot:
        typer.echo(to_dot(m), nl=False)
        return
    counts = list(m.level_counts())
    result: dict[str, Any] = {"n": n, "depth": depth, "size": m.size, "level_counts": counts}
    if check:
        result["reduced"] = validate_reduced(m).ok

    def render() -> None:
        if stats:
            table = Table(title=f"K_{n}^{depth} 各层节点数", show_lines=False)
            table.add_column("秩", style="cyan", justify="right")
            table.add_column("节点数", style="green", justify="right")
            table.add_column("累计", style="white", justify="right")
            for rank, (count, total) in enumerate(zip(counts, m.level_sizes)):
                table.add_row(str(rank), str(count), str(total))
            console.print(table)
        console.print(f"[green]K_{n}^{depth}[/]: 共 {m.size} 个节点, 各层 {','.join(str(c) for c in counts)}")
        if check:
            console.print("[green]约简性检查通过[/]" if result["reduced"] else "[red]模型不是约简的[/]")

    _emit(ctx, "model build", {"n": n, "depth": depth}, result, render)


@model_app.command("export")
def model_export(
    ctx: typer.Context,
    n: int = typer.Option(..., "-n", help="变量个数"),
    depth: int = typer.Option(..., "-d", "--depth", help="深度"),
    fmt: ExportFormat = typer.Option(ExportFormat.structured, "--format", help="dot | structured"),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="写入文件而不是标准输出"),
) -> None:
    """导出 K_n^d (Hasse 图或结构化文档)。"""
    m = universal(n, depth, _state(ctx).limits())
    text = export_model(m, fmt.value)
    if output is None:
        typer.echo(text, nl=False)
    elif save_document(str(output), text):
        console.print(f"[green]已写入[/] {output}")
    else:
        raise PreconditionError(f"写入失败: {output}")


@model_app.command("random")
def model_random(
    n: int = typer.Option(2, "-n", help="变量个数"),
    size: int = typer.Option(6, "--size", help="点数"),
    seed: int = typer.Option(0, "--seed", help="随机种子"),
    max_rank: Optional[int] = typer.Option(None, "--max-rank", help="秩的上限"),
    output: Optional[Path] = typer.Option(None, "--output", "-o"),
) -> None:
    """生成一个随机有限 Kripke 模型 (结构化文档)。"""
    text = export_model(random_model(n, size, seed, max_rank=max_rank), "structured")
    if output is None:
        typer.echo(text)
    elif not save_document(str(output), text):
        raise PreconditionError(f"写入失败: {output}")


# ---------------------------------------------------------------- formulas


def _infer_n(n: Optional[int], *formulas) -> int:
    if n is not None:
        return n
    used = set().union(*(variables(f) for f in formulas))
    return max(used, default=1)


def _decision_output(ctx: typer.Context, command: str, params: dict[str, Any], outcome, limits: Limits) -> None:
    witnesses = []
    description = None
    if outcome.witness is not None:
        description = outcome.witness.describe(limits)
        witnesses.append({
            "depth": outcome.witness.depth,
            "node": outcome.witness.node,
            "variables": list(outcome.witness.variables),
            "description": description,
        })
    result = {"verdict": outcome.verdict.upper(), "depth": outcome.depth}

    def render() -> None:
        if outcome.valid:
            console.print(f"[green]VALID[/] (检查到深度 {outcome.depth})")
        else:
            console.print(f"[red]INVALID[/] 反驳点: {description} @ 深度 {outcome.depth}")

    _emit(ctx, command, params, result, render, witnesses)


@app.command("decide")
def decide_command(
    ctx: typer.Context,
    formula: str = typer.Argument(..., help="公式，如 \"p1 -> ~~p1\""),
    n: Optional[int] = typer.Option(None, "-n", help="变量个数 (默认取公式中的最大下标)"),
    depth: Optional[int] = typer.Option(None, "-d", "--depth", help="覆盖默认的蕴涵深度上界"),
) -> None:
    """判定公式是否为直觉主义重言式。"""
    limits = _state(ctx).limits()
    f = parse_formula(formula)
    n = _infer_n(n, f)
    outcome = decide(f, n, depth=depth, limits=limits)
    _decision_output(ctx, "decide", {"formula": format_formula(f), "n": n, "depth": depth}, outcome, limits)


@app.command("equiv")
def equiv_command(
    ctx: typer.Context,
    left: str = typer.Argument(...),
    right: str = typer.Argument(...),
    n: Optional[int] = typer.Option(None, "-n"),
    depth: Optional[int] = typer.Option(None, "-d", "--depth"),
) -> None:
    """判定两个公式是否直觉主义等价。"""
    limits = _state(ctx).limits()
    f, g = parse_formula(left), parse_formula(right)
    n = _infer_n(n, f, g)
    outcome = decide(f, n, mode="equiv", other=g, depth=depth, limits=limits)
    params = {"left": format_formula(f), "right": format_formula(g), "n": n, "depth": depth}
    _decision_output(ctx, "equiv", params, outcome, limits)


@app.command("eval")
def eval_command(
    ctx: typer.Context,
    formula: str = typer.Argument(...),
    n: int = typer.Option(..., "-n"),
    depth: int = typer.Option(..., "-d", "--depth"),
) -> None:
    """在 K_n^d 上计算公式的真值集。"""
    m = universal(n, depth, _state(ctx).limits())
    f = parse_formula(formula)
    value = eval_formula(f, m)
    _emit(
        ctx, "eval", {"formula": format_formula(f), "n": n, "depth": depth},
        element_document(value), lambda: console.print(_element_text(value)),
    )


@app.command("dejongh")
def dejongh_command(
    ctx: typer.Context,
    n: int = typer.Option(..., "-n"),
    rank: Optional[int] = typer.Option(None, "--rank", help="节点的秩"),
    val: str = typer.Option("", "--val", help="节点赋值，如 p1,p2"),
    node: Optional[int] = typer.Option(None, "--node", help="直接给出节点编号"),
) -> None:
    """生成节点 w 的 de Jongh 公式 ψ_w 与 ψ'_w。"""
    limits = _state(ctx).limits()
    if node is not None:
        m = covering_model(n, 1 << node, limits)
        w = node
    else:
        if rank is None:
            raise PreconditionError("需要 --rank 或 --node")
        m = universal(n, rank, limits)
        beta = _parse_valuation(val, n)
        candidates = [v for v in m.rank_range(rank) if m.valuation[v] == beta]
        if not candidates:
            raise PreconditionError(f"第 {rank} 层没有赋值为 {format_valuation(beta)} 的节点")
        w = candidates[0]
    table = DeJonghTable(m)
    psi, psi_prime = table.psi(w), table.psi_prime(w)
    result = {
        "node": m.describe(w),
        "psi": format_formula(psi),
        "psi_prime": format_formula(psi_prime),
        "psi_depth": impl_depth(psi),
        "psi_prime_depth": impl_depth(psi_prime),
    }

    def render() -> None:
        console.print(Panel(
            f"[white]ψ[/]  (深度 {result['psi_depth']}): {result['psi']}\n"
            f"[white]ψ'[/] (深度 {result['psi_prime_depth']}): {result['psi_prime']}",
            title=f"节点 {result['node']}",
            border_style="cyan",
        ))

    _emit(ctx, "dejongh", {"n": n, "node": w}, result, render)


# ---------------------------------------------------------------- models


@app.command("reduce")
def reduce_command(ctx: typer.Context, path: Path = typer.Argument(..., help="结构化模型文件")) -> None:
    """约简有限 Kripke 模型。"""
    m = _load_model_file(path)
    model = m if isinstance(m, FiniteKripkeModel) else FiniteKripkeModel.from_universal(m)
    reduced = reduce_model(model)
    state = _state(ctx)
    if state.fmt == OutputFormat.dot:
        typer.echo(to_dot(reduced), nl=False)
        return
    result = {"before": model.size, "after": reduced.size, "model": model_document(reduced).model_dump()}
    _emit(
        ctx, "reduce", {"path": str(path)}, result,
        lambda: console.print(f"约简: {model.size} -> {reduced.size} 个点"),
    )


@app.command("embed")
def embed_command(
    ctx: typer.Context,
    path: Path = typer.Argument(..., help="结构化模型文件"),
    reduce_first: bool = typer.Option(False, "--reduce", help="嵌入前先约简"),
) -> None:
    """把约简模型作为初始段嵌入 K_n^rank。"""
    m = _load_model_file(path)
    model = m if isinstance(m, FiniteKripkeModel) else FiniteKripkeModel.from_universal(m)
    if reduce_first:
        model = reduce_model(model)
    target = universal(model.n, max(model.poset.max_rank, 0), _state(ctx).limits())
    embedding = embed_reduced(model, target)
    result = {"target": {"n": target.n, "depth": target.depth}, "mapping": list(embedding.mapping)}

    def render() -> None:
        table = Table(title=f"嵌入 K_{target.n}^{target.depth}")
        table.add_column("点", style="cyan", justify="right")
        table.add_column("节点", style="green")
        for p, w in enumerate(embedding.mapping):
            table.add_row(str(p), target.describe(w))
        console.print(table)

    _emit(ctx, "embed", {"path": str(path), "reduced": is_reduced(model)}, result, render)


# ---------------------------------------------------------------- algebra


@app.command("irr")
def irr_command(
    ctx: typer.Context,
    element: str = typer.Argument(..., help="元素描述，如 formula:p1 或 nodes:0,1"),
    n: int = typer.Option(..., "-n"),
    depth: int = typer.Option(..., "-d", "--depth"),
) -> None:
    """元素的不可约性分类。"""
    m = universal(n, depth, _state(ctx).limits())
    a = parse_element(element, m)
    flags = classify_irreducible(a)
    result = {
        "completely_join": flags.completely_join,
        "meet": flags.meet,
        "join_filtering": flags.join_filtering,
        "filtering_bounded": flags.filtering_bounded,
    }

    def render() -> None:
        table = Table(title="不可约性")
        table.add_column("性质", style="cyan")
        table.add_column("结果", style="green")
        for key, value in result.items():
            table.add_row(key, "是" if value else "否")
        console.print(table)

    _emit(ctx, "irr", {"element": element, "n": n, "depth": depth}, result, render)


@app.command("supp")
def supp_command(
    ctx: typer.Context,
    element: str = typer.Argument(...),
    n: int = typer.Option(..., "-n"),
    depth: int = typer.Option(..., "-d", "--depth"),
) -> None:
    """并支撑与 supp-min。"""
    m = universal(n, depth, _state(ctx).limits())
    a = parse_element(element, m)
    result = {
        "supp_join": a.nodes(),
        "supp_meet_min": members(supp_meet_min(a)),
        "touches_top": supp_meet_min_touches_top(a),
    }

    def render() -> None:
        console.print(f"supp⊔: {result['supp_join']}")
        console.print(f"supp-min: {result['supp_meet_min']}")
        if result["touches_top"]:
            console.print(f"[yellow]supp-min 含有第 {depth} 层的节点，更深时可能变化[/]")

    _emit(ctx, "supp", {"element": element, "n": n, "depth": depth}, result, render)


@app.command("dist")
def dist_command(
    ctx: typer.Context,
    left: str = typer.Argument(..., help="formula:… | finite:… | cofinite:…"),
    right: str = typer.Argument(...),
    n: int = typer.Option(..., "-n"),
    max_depth: int = typer.Option(4, "--max-depth"),
) -> None:
    """完备化中两个元素的距离。"""
    limits = _state(ctx).limits()
    x, y = parse_approx(left, n, limits), parse_approx(right, n, limits)
    d = distance(x, y, max_depth)
    result = {
        "distance": str(d),
        "exact": d.exact,
        "value": d.value,
        "upper": d.upper,
        "explored_depth": d.explored_depth,
        "left": approx_document(x),
        "right": approx_document(y),
    }
    _emit(ctx, "dist", {"n": n, "max_depth": max_depth}, result, lambda: console.print(f"距离: {d}"))


@app.command("isolated")
def isolated_command(
    ctx: typer.Context,
    element: str = typer.Argument(..., help="formula:… | finite:… | cofinite:…"),
    n: int = typer.Option(..., "-n"),
    levels: Optional[int] = typer.Option(None, "--levels", help="公式元寻找证书时探测的层数"),
) -> None:
    """判断完备化中的元素是否为孤立点 (有限元)。"""
    x = parse_approx(element, n, _state(ctx).limits())
    isolated = is_isolated(x, levels)
    _emit(
        ctx, "isolated", {"element": element, "n": n, "levels": levels}, {"isolated": isolated},
        lambda: console.print("孤立点 (有限元)" if isolated else "不是孤立点"),
    )


@app.command("classify")
def classify_command(
    ctx: typer.Context,
    element: str = typer.Argument(...),
    n: int = typer.Option(..., "-n"),
    depth: int = typer.Option(..., "-d", "--depth"),
    kmax: Optional[int] = typer.Option(None, "--kmax"),
) -> None:
    """Cantor-Bendixson 分类 (按 k-扩张个数)。"""
    limits = _state(ctx).limits(kmax=kmax)
    m = universal(n, depth, limits)
    a = parse_element(element, m)
    outcome = cb_classify(a, limits.kmax, limits)
    result = {"verdict": str(outcome), "counts": list(outcome.counts), "kmax": outcome.kmax}
    _emit(
        ctx, "classify", {"element": element, "n": n, "depth": depth, "kmax": limits.kmax}, result,
        lambda: console.print(f"{outcome}  k-扩张个数: {list(outcome.counts)}"),
    )


@app.command("antichain")
def antichain_command(
    ctx: typer.Context,
    n: int = typer.Option(..., "-n"),
    size: int = typer.Option(..., "--size", "-m"),
    depth_cap: int = typer.Option(2, "--depth-cap"),
) -> None:
    """在通用模型中寻找两两不可比较的节点。"""
    found = find_antichain(n, size, depth_cap, _state(ctx).limits())
    _emit(
        ctx, "antichain", {"n": n, "size": size, "depth_cap": depth_cap}, {"nodes": found},
        lambda: console.print(f"反链: {found}"),
    )


@app.command("subalg")
def subalg_command(
    ctx: typer.Context,
    elements: List[str] = typer.Argument(..., help="生成元描述"),
    n: int = typer.Option(..., "-n"),
    depth: int = typer.Option(..., "-d", "--depth"),
    cap: Optional[int] = typer.Option(None, "--cap"),
    within: Optional[str] = typer.Option(None, "--within", help="向下封闭的窗口 (元素描述)"),
) -> None:
    """生成元的子代数闭包。"""
    state = _state(ctx)
    m = universal(n, depth, state.limits())
    gens = [parse_element(desc, m) for desc in elements]
    window = parse_element(within, m).bits if within else None
    closure = subalgebra_closure(gens, cap=cap, within=window)
    result = {"size": len(closure), "elements": [x.nodes() for x in closure]}

    def render() -> None:
        console.print(f"子代数共 {len(closure)} 个元素")
        for x in closure[:16]:
            console.print(f"  {_element_text(x)}")
        if len(closure) > 16:
            console.print(f"[yellow]还有 {len(closure) - 16} 个元素未展示。[/]")

    _emit(ctx, "subalg", {"generators": elements, "n": n, "depth": depth}, result, render)


# ---------------------------------------------------------------- experiments


@app.command("experiment")
def experiment_command(
    ctx: typer.Context,
    name: str = typer.Argument(..., help=" | ".join(EXPERIMENTS)),
    n: Optional[int] = typer.Option(None, "-n"),
    depth: Optional[int] = typer.Option(None, "-d", "--depth"),
    kmax: Optional[int] = typer.Option(None, "--kmax"),
) -> None:
    """运行可复现的验证实验并输出报告。"""
    limits = _state(ctx).limits(kmax=kmax)
    if name == "separation":
        report = run_experiment(name, n=n, d=depth, limits=limits)
    elif name == "definability":
        report = run_experiment(name, n=n, depth=depth, limits=limits)
    elif name == "cbscan":
        report = run_experiment(name, n=n, d=depth, kmax=kmax, limits=limits)
    elif name == "spectrum":
        pairs = [(n, depth)] if n is not None and depth is not None else None
        report = run_experiment(name, pairs=pairs, limits=limits)
    else:
        raise PreconditionError(f"未知的实验: {name}，可选 {', '.join(EXPERIMENTS)}")
    data = report.to_dict()

    def render() -> None:
        table = Table(title=f"实验 {name}")
        table.add_column("项目", style="cyan")
        table.add_column("结果", style="white")
        for key, value in data.items():
            if key in {"rows", "runs"}:
                continue
            table.add_row(key, str(value))
        console.print(table)
        for row in data.get("rows", []):
            console.print(f"  {row['nodes']}: {row['verdict']} {row['counts']}")
        colour = "green" if report.passed else "red"
        console.print(f"[{colour}]{'PASS' if report.passed else 'FAIL'}[/]")

    _emit(ctx, "experiment", {"name": name, "n": n, "depth": depth, "kmax": kmax}, data, render)


# ---------------------------------------------------------------- entry


def run(argv: Optional[List[str]] = None) -> int:
    """Run the CLI and map failures to exit codes: 2 usage, 3 resource cap, 1 internal."""
    try:
        code = app(args=argv, prog_name="kripkeu", standalone_mode=False)
    except click.exceptions.UsageError as e:
        e.show()
        return 2
    except click.exceptions.Abort:
        return 1
    except ResourceLimitError as e:
        err_console.print(f"[red]资源上限[/]: {e}")
        if e.counts:
            err_console.print(f"已到达层级 {e.level}, 部分计数 {list(e.counts)}")
        return 3
    except InvariantError as e:
        logger.error(f"内部不变量失败: {e}")
        return 1
    except KripkeuError as e:
        err_console.print(f"[red]错误[/]: {e}")
        return 2
    except Exception as e:  # noqa: BLE001
        logger.exception(f"未预期的错误: {e}")
        return 1
    return code if isinstance(code, int) else 0


def main() -> None:  # pragma: no cover - Typer 入口
    sys.exit(run())


__all__ = ["app", "main", "run", "parse_element", "parse_approx"]
