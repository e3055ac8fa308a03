"""The generic Kripke model truncated at a finite depth.

Nodes are the pairs ``(beta, Y)``: ``beta`` is a valuation bitmap (bit ``i-1``
stands for ``P_i``) and ``Y`` the bitmap of nodes strictly below. The order is
reversed with respect to the usual Kripke convention: rank 0 sits at the
bottom, valuations only grow going down.

Node ids are canonical: sorted by rank, then valuation, then ``Y`` read as an
integer. Extending a model by one level never renumbers existing nodes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Iterator, Literal, Optional

from loguru import logger

from .config import Limits, get_limits
from .errors import DepthInsufficientError, InvariantError, PreconditionError, ResourceLimitError
from .poset import NodeSet, Poset, enumerate_downsets, from_indices, members

Valuation = int


def submasks(mask: int) -> Iterator[int]:
    """All submasks of ``mask`` in descending numeric order, ending with 0."""
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


def format_valuation(beta: Valuation) -> str:
    return "{" + ",".join(f"p{i + 1}" for i in members(beta)) + "}"


@dataclass(frozen=True, eq=False)
class UniversalModel:
    n: int
    depth: int
    poset: Poset
    valuation: tuple[Valuation, ...]
    # level_sizes[i] = number of nodes of rank <= i
    level_sizes: tuple[int, ...] = field(repr=False)

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if not isinstance(other, UniversalModel):
            return NotImplemented
        return (
            self.n == other.n
            and self.depth == other.depth
            and self.level_sizes == other.level_sizes
            and self.valuation == other.valuation
            and self.poset.strict_down == other.poset.strict_down
        )

    def __hash__(self) -> int:
        return hash((self.n, self.depth, self.level_sizes))

    def __repr__(self) -> str:
        return f"UniversalModel(n={self.n}, depth={self.depth}, size={self.size})"

    @property
    def size(self) -> int:
        return self.poset.size

    @property
    def full(self) -> NodeSet:
        return self.poset.full

    @property
    def variable_mask(self) -> Valuation:
        return (1 << self.n) - 1

    def level_index(self, i: int) -> NodeSet:
        """Nodes of rank <= i."""
        if i < 0:
            return 0
        return (1 << self.level_sizes[min(i, self.depth)]) - 1

    def rank_range(self, r: int) -> range:
        start = self.level_sizes[r - 1] if r > 0 else 0
        return range(start, self.level_sizes[r])

    def level_counts(self) -> tuple[int, ...]:
        previous = 0
        counts = []
        for total in self.level_sizes:
            counts.append(total - previous)
            previous = total
        return tuple(counts)

    def node_key(self, w: int) -> tuple[Valuation, NodeSet]:
        return self.valuation[w], self.poset.strict_down[w]

    @cached_property
    def _key_index(self) -> dict[tuple[Valuation, NodeSet], int]:
        return {(beta, y): w for w, (beta, y) in enumerate(zip(self.valuation, self.poset.strict_down))}

    def lookup(self, beta: Valuation, y: NodeSet) -> Optional[int]:
        return self._key_index.get((beta, y))

    @cached_property
    def cover_index(self) -> dict[NodeSet, tuple[int, ...]]:
        """Lower-cover bitmap -> nodes having exactly those maximal predecessors."""
        index: dict[NodeSet, list[int]] = {}
        for w, covers in enumerate(self.poset.lower_covers):
            if covers:
                index.setdefault(covers, []).append(w)
        return {covers: tuple(nodes) for covers, nodes in index.items()}

    def rank(self, w: int) -> int:
        return self.poset.rank[w]

    def describe(self, w: int) -> str:
        return f"{w}:{self.poset.rank[w]}:{format_valuation(self.valuation[w])}"


def _check_arguments(n: int, d: int, limits: Limits) -> None:
    if n < 1 or d < 0:
        raise PreconditionError(f"需要 n >= 1 且 d >= 0，收到 n={n}, d={d}")
    if n > limits.max_vars:
        raise ResourceLimitError(f"变量个数 {n} 超过上限 {limits.max_vars}", level=0)
    if d > limits.max_depth:
        raise ResourceLimitError(f"深度 {d} 超过上限 {limits.max_depth}", level=0)


def level_zero(n: int) -> UniversalModel:
    count = 1 << n
    return UniversalModel(
        n=n,
        depth=0,
        poset=Poset.antichain(count),
        valuation=tuple(range(count)),
        level_sizes=(count,),
    )


def extend_level(m: UniversalModel, limits: Optional[Limits] = None) -> UniversalModel:
    """Add every admissible ``(beta, Y)`` of rank ``m.depth + 1``."""
    limits = limits or get_limits()
    depth = m.depth + 1
    if depth > limits.max_depth:
        raise ResourceLimitError(f"深度 {depth} 超过上限 {limits.max_depth}", level=m.depth, counts=m.level_counts())

    top = m.full & ~m.level_index(m.depth - 1)
    valuation = m.valuation
    full_vars = m.variable_mask
    memory_cap = limits.memory_cap_mb * 1024 * 1024
    memory_used = 0
    candidates: list[tuple[Valuation, NodeSet]] = []

    for y in enumerate_downsets(m.poset, lambda s: bool(s & top), limits.downset_cap):
        # Y 的极大元即 Y 中不被其他元素覆盖的节点
        dominated = 0
        for v in members(y):
            dominated |= m.poset.strict_down[v]
        maximal = members(y & ~dominated)
        allowed = full_vars
        for v in maximal:
            allowed &= valuation[v]
        excluded = valuation[maximal[0]] if len(maximal) == 1 else None
        for beta in submasks(allowed):
            if beta != excluded:
                candidates.append((beta, y))
                memory_used += 64 + (y.bit_length() >> 3)
        if m.size + len(candidates) > limits.node_cap or memory_used > memory_cap:
            counts = m.level_counts() + (len(candidates),)
            logger.warning(f"构造第 {depth} 层时达到资源上限，已生成 {len(candidates)} 个候选节点")
            raise ResourceLimitError(
                f"第 {depth} 层超出资源上限 (节点 {limits.node_cap}, 内存 {limits.memory_cap_mb} MB)",
                level=depth,
                counts=counts,
            )

    candidates.sort()
    poset = m.poset.extended([y for _, y in candidates], [depth] * len(candidates))
    model = UniversalModel(
        n=m.n,
        depth=depth,
        poset=poset,
        valuation=m.valuation + tuple(beta for beta, _ in candidates),
        level_sizes=m.level_sizes + (poset.size,),
    )
    logger.info(f"第 {depth} 层: 新增 {len(candidates)} 个节点, 累计 {poset.size}")
    return model


def build_universal(n: int, d: int, limits: Optional[Limits] = None) -> UniversalModel:
    limits = limits or get_limits()
    _check_arguments(n, d, limits)
    model = level_zero(n)
    for _ in range(d):
        model = extend_level(model, limits)
    return model


@lru_cache(maxsize=32)
def _cached_universal(n: int, d: int, limits: Limits) -> UniversalModel:
    _check_arguments(n, d, limits)
    if d == 0:
        return level_zero(n)
    return extend_level(_cached_universal(n, d - 1, limits), limits)


def universal(n: int, d: int, limits: Optional[Limits] = None) -> UniversalModel:
    """Cached ``build_universal``; lower levels are shared between depths."""
    return _cached_universal(n, d, limits or get_limits())


def restrict_depth(m: UniversalModel, i: int) -> UniversalModel:
    """The initial segment K^i of ``m`` (same node ids)."""
    if not 0 <= i <= m.depth:
        raise PreconditionError(f"层级 {i} 不在 0..{m.depth} 之间")
    if i == m.depth:
        return m
    size = m.level_sizes[i]
    return UniversalModel(
        n=m.n,
        depth=i,
        poset=Poset(size=size, strict_down=m.poset.strict_down[:size], rank=m.poset.rank[:size]),
        valuation=m.valuation[:size],
        level_sizes=m.level_sizes[: i + 1],
    )


def private_successors(w: int, m: UniversalModel) -> NodeSet:
    """Nodes ``w_{beta', w↓}`` with ``beta'`` a proper subset of ``val(w)``."""
    if not 0 <= w < m.size:
        raise IndexError(f"节点编号越界: {w}")
    if m.rank(w) >= m.depth:
        raise DepthInsufficientError(f"节点 {w} 的秩 {m.rank(w)} 不小于模型深度 {m.depth}")
    principal = m.poset.down(w)
    beta = m.valuation[w]
    found = []
    for sub in submasks(beta):
        if sub == beta:
            continue
        u = m.lookup(sub, principal)
        if u is None:
            raise InvariantError(f"缺少私有后继 ({format_valuation(sub)}, ↓{w})")
        found.append(u)
    return from_indices(found, m.size)


@dataclass(frozen=True)
class Violation:
    kind: Literal["duplicate", "redundant"]
    nodes: tuple[int, int]

    def __str__(self) -> str:
        if self.kind == "duplicate":
            return f"节点 {self.nodes[0]} 与 {self.nodes[1]} 的赋值和下集相同"
        return f"节点 {self.nodes[0]} 的唯一前驱 {self.nodes[1]} 赋值相同"


@dataclass(frozen=True)
class ReducednessReport:
    violations: tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def reducedness_violations(poset: Poset, valuation: tuple[Valuation, ...]) -> list[Violation]:
    """Both reducedness conditions, checked point by point."""
    found: list[Violation] = []
    seen: dict[tuple[Valuation, NodeSet], int] = {}
    for v in range(poset.size):
        key = (valuation[v], poset.strict_down[v])
        if key in seen:
            found.append(Violation("duplicate", (seen[key], v)))
        else:
            seen[key] = v
    for v, covers in enumerate(poset.lower_covers):
        if covers and covers & (covers - 1) == 0:
            u = covers.bit_length() - 1
            if valuation[u] == valuation[v]:
                found.append(Violation("redundant", (v, u)))
    return found


def validate_reduced(m: UniversalModel) -> ReducednessReport:
    return ReducednessReport(tuple(reducedness_violations(m.poset, m.valuation)))


__all__ = [
    "UniversalModel",
    "Violation",
    "ReducednessReport",
    "build_universal",
    "extend_level",
    "restrict_depth",
    "level_zero",
    "universal",
    "private_successors",
    "validate_reduced",
    "reducedness_violations",
    "submasks",
    "format_valuation",
]
