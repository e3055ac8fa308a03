"""Structured documents (orjson) and DOT text for models, elements and run results."""

from __future__ import annotations

import os
from fractions import Fraction
from typing import Any, Literal, Optional, Union

import orjson
from loguru import logger
from pydantic import BaseModel, ConfigDict, ValidationError

from .completion import CoFinite, Finite, ProfiniteApprox
from .errors import InvalidModelError, InvalidPosetError, PreconditionError
from .formulas import format_formula, parse_formula
from .heyting import Element, KripkeFrame
from .models import FiniteKripkeModel
from .poset import Poset, from_indices, is_downset, members
from .universal import UniversalModel, format_valuation, universal, validate_reduced

ExportFormat = Literal["dot", "structured"]

JSON_OPTIONS = orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS | orjson.OPT_NON_STR_KEYS


class NodeRecord(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: int
    rank: int
    val: list[int]
    down: list[int]


class ModelDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["universal", "kripke"] = "universal"
    n: int
    depth: int
    nodes: list[NodeRecord]


class AmbientRef(BaseModel):
    n: int
    depth: int


class ElementDocument(BaseModel):
    ambient: AmbientRef
    bits: list[int]


class ApproxDocument(BaseModel):
    n: int
    kind: Literal["finite", "cofinite", "formula"]
    payload: Union[list[int], str]


class RunDocument(BaseModel):
    command: str
    params: dict[str, Any]
    result: Any
    witnesses: list[Any] = []
    timestamp: Optional[str] = None


def _default(value: Any) -> Any:
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (set, frozenset)):
        return sorted(value)
    if isinstance(value, BaseModel):
        return value.model_dump()
    raise TypeError(f"无法序列化的类型: {type(value).__name__}")


def dumps(data: Any) -> bytes:
    return orjson.dumps(data, default=_default, option=JSON_OPTIONS)


def _depth_of(m: KripkeFrame) -> int:
    return m.depth if isinstance(m, UniversalModel) else max(m.poset.max_rank, 0)


def model_document(m: KripkeFrame) -> ModelDocument:
    poset = m.poset
    return ModelDocument(
        kind="universal" if isinstance(m, UniversalModel) else "kripke",
        n=m.n,
        depth=_depth_of(m),
        nodes=[
            NodeRecord(
                id=w,
                rank=poset.rank[w],
                val=[i + 1 for i in members(m.valuation[w])],
                down=members(poset.strict_down[w]),
            )
            for w in range(poset.size)
        ],
    )


def to_dot(m: KripkeFrame) -> str:
    """Hasse diagram: one vertex per node labelled ``id:rank:{vars}``, edges lower -> higher."""
    poset = m.poset
    lines = ["digraph kripke {", "  rankdir=BT;"]
    for w in range(poset.size):
        label = f"{w}:{poset.rank[w]}:{format_valuation(m.valuation[w])}"
        lines.append(f'  n{w} [label="{label}"];')
    for w, covers in enumerate(poset.lower_covers):
        for u in members(covers):
            lines.append(f"  n{u} -> n{w};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_model(m: KripkeFrame, fmt: ExportFormat = "structured") -> str:
    if fmt == "dot":
        return to_dot(m)
    if fmt == "structured":
        return dumps(model_document(m).model_dump()).decode("utf-8")
    raise PreconditionError(f"未知的导出格式: {fmt}")


def _load_document(text: Union[str, bytes]) -> ModelDocument:
    try:
        return ModelDocument.model_validate(orjson.loads(text))
    except orjson.JSONDecodeError as e:
        raise InvalidModelError(f"文档不是合法的 JSON: {e}") from e
    except ValidationError as e:
        raise InvalidModelError(f"文档结构不符合模型格式: {e.error_count()} 处错误") from e


def import_model(text: Union[str, bytes]) -> Union[UniversalModel, FiniteKripkeModel]:
    """Inverse of the structured export.

    ``kind: kripke`` gives a FiniteKripkeModel with no reducedness check;
    ``kind: universal`` must list nodes in canonical order and be reduced.
    """
    doc = _load_document(text)
    size = len(doc.nodes)
    for position, record in enumerate(doc.nodes):
        if record.id != position:
            raise InvalidModelError(f"节点编号必须连续递增，第 {position} 个节点的编号为 {record.id}")
    try:
        strict_down = [from_indices(record.down, size) for record in doc.nodes]
        valuation = [from_indices((i - 1 for i in record.val), doc.n) for record in doc.nodes]
        poset = Poset.from_strict_down(strict_down)
    except (IndexError, InvalidPosetError) as e:
        raise InvalidModelError(f"节点数据无效: {e}") from e
    for record in doc.nodes:
        if poset.rank[record.id] != record.rank:
            raise InvalidModelError(f"节点 {record.id} 的秩与下集不一致")

    if doc.kind == "kripke":
        return FiniteKripkeModel(poset, tuple(valuation), doc.n)

    keys = [(poset.rank[w], valuation[w], strict_down[w]) for w in range(size)]
    if keys != sorted(keys):
        raise InvalidModelError("节点顺序不符合 (秩, 赋值, 下集) 的规范顺序")
    if poset.max_rank != doc.depth:
        raise InvalidModelError(f"声明的深度 {doc.depth} 与节点的最大秩 {poset.max_rank} 不一致")
    level_sizes = tuple(sum(1 for r in poset.rank if r <= i) for i in range(doc.depth + 1))
    model = UniversalModel(
        n=doc.n,
        depth=doc.depth,
        poset=poset,
        valuation=tuple(valuation),
        level_sizes=level_sizes,
    )
    report = validate_reduced(model)
    if not report.ok:
        raise InvalidModelError(f"模型不是约简的: {report.violations[0]}")
    logger.debug(f"导入通用模型: n={doc.n}, 深度 {doc.depth}, {size} 个节点")
    return model


def element_document(a: Element) -> dict[str, Any]:
    return ElementDocument(
        ambient=AmbientRef(n=a.ambient.n, depth=_depth_of(a.ambient)),
        bits=a.nodes(),
    ).model_dump()


def element_from_document(data: dict[str, Any]) -> Element:
    doc = ElementDocument.model_validate(data)
    m = universal(doc.ambient.n, doc.ambient.depth)
    bits = from_indices(doc.bits, m.size)
    if not is_downset(bits, m.poset):
        raise PreconditionError("节点集合不是向下封闭的")
    return Element._make(m, bits)


def approx_document(x: ProfiniteApprox) -> dict[str, Any]:
    descriptor = x.descriptor
    if isinstance(descriptor, Finite):
        payload: Union[list[int], str] = members(descriptor.nodes)
    elif isinstance(descriptor, CoFinite):
        payload = members(descriptor.antichain)
    else:
        payload = format_formula(descriptor.formula)
    return ApproxDocument(n=x.n, kind=x.kind, payload=payload).model_dump()


def approx_from_document(data: dict[str, Any]) -> ProfiniteApprox:
    doc = ApproxDocument.model_validate(data)
    if doc.kind == "formula":
        if not isinstance(doc.payload, str):
            raise PreconditionError("公式元的 payload 必须是字符串")
        return ProfiniteApprox.formula(doc.n, parse_formula(doc.payload))
    if isinstance(doc.payload, str):
        raise PreconditionError("有限元和余有限元的 payload 必须是节点列表")
    bits = 0
    for w in doc.payload:
        bits |= 1 << w
    if doc.kind == "finite":
        return ProfiniteApprox.finite(doc.n, bits)
    return ProfiniteApprox.cofinite(doc.n, bits)


def run_document(
    command: str,
    params: dict[str, Any],
    result: Any,
    witnesses: Optional[list[Any]] = None,
    timestamp: Optional[str] = None,
) -> bytes:
    """The single structured document printed by one CLI run."""
    doc = RunDocument(command=command, params=params, result=result, witnesses=witnesses or [], timestamp=timestamp)
    data = doc.model_dump()
    if timestamp is None:
        data.pop("timestamp")
    return dumps(data)


def save_document(file_path: str, data: Union[str, bytes]) -> bool:
    """Write through a temporary file and replace the target."""
    temp_path = f"{file_path}.tmp"
    payload = data.encode("utf-8") if isinstance(data, str) else data
    try:
        with open(temp_path, "wb") as f:
            f.write(payload)
        os.replace(temp_path, file_path)
        return True
    except OSError as e:
        logger.error(f"保存文件失败 {file_path}: {e}")
        if os.path.exists(temp_path):
            os.remove(temp_path)
        return False


__all__ = [
    "NodeRecord",
    "ModelDocument",
    "ElementDocument",
    "ApproxDocument",
    "RunDocument",
    "dumps",
    "model_document",
    "to_dot",
    "export_model",
    "import_model",
    "element_document",
    "element_from_document",
    "approx_document",
    "approx_from_document",
    "run_document",
    "save_document",
]
