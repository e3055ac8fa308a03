"""Finite ranked posets over integer bitmaps.

A node set is a plain ``int`` used as a membership bitmap: bit ``v`` set means
element ``v`` belongs to the set. Every poset stores, per element, the bitmap
of elements strictly below it; the reflexive down-set is that bitmap plus the
element's own bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterable, Iterator, Literal, Optional, Sequence

from loguru import logger

from .errors import InvalidPosetError, ResourceLimitError

NodeSet = int
Mode = Literal["min", "max"]


def members(bits: NodeSet) -> list[int]:
    """Indices of the set bits, ascending."""
    if bits < 0:
        raise ValueError("节点集合不能为负数")
    if not bits:
        return []
    text = format(bits, "b")
    top = len(text) - 1
    found: list[int] = []
    pos = text.rfind("1")
    while pos != -1:
        found.append(top - pos)
        pos = text.rfind("1", 0, pos)
    return found


def from_indices(indices: Iterable[int], size: int) -> NodeSet:
    """Build a bitmap in one pass (avoids quadratic big-int updates)."""
    buffer = bytearray((size + 7) // 8)
    for index in indices:
        if not 0 <= index < size:
            raise IndexError(f"节点编号越界: {index} (size={size})")
        buffer[index >> 3] |= 1 << (index & 7)
    return int.from_bytes(buffer, "little")


def bit(index: int) -> NodeSet:
    return 1 << index


@dataclass(frozen=True)
class Poset:
    """Immutable finite poset with foundation ranks.

    ``strict_down[v]`` is the bitmap of elements strictly below ``v``.
    """

    size: int
    strict_down: tuple[int, ...]
    rank: tuple[int, ...]

    @classmethod
    def from_strict_down(cls, strict_down: Sequence[int]) -> "Poset":
        """Validate a strict down-map (irreflexive, transitive) and compute ranks."""
        size = len(strict_down)
        full = (1 << size) - 1
        for v, below in enumerate(strict_down):
            if below & ~full:
                raise InvalidPosetError(f"元素 {v} 的下集越界")
            if below >> v & 1:
                raise InvalidPosetError(f"元素 {v} 不能严格小于自身")
            for u in members(below):
                if strict_down[u] & ~below:
                    raise InvalidPosetError(f"下集不满足传递性: {u} < {v}")
        # 严格下集的大小在序中严格递增，按其排序即为一个线性扩张
        ranks = [0] * size
        for v in sorted(range(size), key=lambda x: strict_down[x].bit_count()):
            below = members(strict_down[v])
            ranks[v] = 1 + max(ranks[u] for u in below) if below else 0
        return cls(size=size, strict_down=tuple(strict_down), rank=tuple(ranks))

    @classmethod
    def from_relation(cls, size: int, pairs: Iterable[tuple[int, int]]) -> "Poset":
        """Poset generated by ``lo < hi`` pairs (transitive closure is taken)."""
        below = [0] * size
        for lo, hi in pairs:
            if not (0 <= lo < size and 0 <= hi < size):
                raise IndexError(f"节点编号越界: {(lo, hi)}")
            below[hi] |= 1 << lo
        changed = True
        while changed:
            changed = False
            for v in range(size):
                closed = below[v]
                for u in members(below[v]):
                    closed |= below[u]
                if closed != below[v]:
                    below[v] = closed
                    changed = True
        for v in range(size):
            if below[v] >> v & 1:
                raise InvalidPosetError(f"关系含有环，经过元素 {v}")
        return cls.from_strict_down(below)

    @classmethod
    def antichain(cls, size: int) -> "Poset":
        return cls(size=size, strict_down=(0,) * size, rank=(0,) * size)

    @classmethod
    def chain(cls, size: int) -> "Poset":
        return cls(
            size=size,
            strict_down=tuple((1 << v) - 1 for v in range(size)),
            rank=tuple(range(size)),
        )

    def extended(self, strict_downs: Sequence[int], ranks: Sequence[int]) -> "Poset":
        """Append elements whose strict down-sets lie among existing ones."""
        return Poset(
            size=self.size + len(strict_downs),
            strict_down=self.strict_down + tuple(strict_downs),
            rank=self.rank + tuple(ranks),
        )

    @property
    def full(self) -> NodeSet:
        return (1 << self.size) - 1

    def down(self, v: int) -> NodeSet:
        return self.strict_down[v] | (1 << v)

    def leq(self, u: int, v: int) -> bool:
        return u == v or bool(self.strict_down[v] >> u & 1)

    @cached_property
    def linear_extension(self) -> tuple[int, ...]:
        return tuple(sorted(range(self.size), key=lambda v: (self.rank[v], v)))

    @cached_property
    def lower_covers(self) -> tuple[int, ...]:
        """Per element, the bitmap of elements it covers (its maximal predecessors)."""
        covers = []
        for below in self.strict_down:
            dominated = 0
            for u in members(below):
                dominated |= self.strict_down[u]
            covers.append(below & ~dominated)
        return tuple(covers)

    @cached_property
    def max_rank(self) -> int:
        return max(self.rank, default=-1)

    def check(self, s: NodeSet) -> None:
        if s < 0 or s >> self.size:
            raise IndexError(f"节点集合超出范围 (size={self.size})")


def down_closure(s: NodeSet, p: Poset) -> NodeSet:
    p.check(s)
    below = 0
    strict_down = p.strict_down
    for v in members(s):
        below |= strict_down[v]
    return s | below


def up_closure(s: NodeSet, p: Poset) -> NodeSet:
    p.check(s)
    if not s:
        return 0
    strict_down = p.strict_down
    above = from_indices((w for w in range(p.size) if strict_down[w] & s), p.size)
    return s | above


def is_downset(s: NodeSet, p: Poset) -> bool:
    p.check(s)
    below = 0
    strict_down = p.strict_down
    for v in members(s):
        below |= strict_down[v]
    return (below | s) == s


def extremal(s: NodeSet, p: Poset, mode: Mode) -> NodeSet:
    """Minimal or maximal elements of ``s``."""
    p.check(s)
    strict_down = p.strict_down
    if mode == "max":
        dominated = 0
        for v in members(s):
            dominated |= strict_down[v]
        return s & ~dominated
    if mode == "min":
        return from_indices((v for v in members(s) if not strict_down[v] & s), p.size)
    raise ValueError(f"未知的模式: {mode}")


def enumerate_downsets(
    p: Poset,
    predicate: Optional[Callable[[NodeSet], bool]] = None,
    limit: Optional[int] = None,
) -> Iterator[NodeSet]:
    """Yield every downset of ``p`` exactly once.

    Backtracking over ``p.linear_extension``; at each element "out" is tried
    before "in", so output is lexicographic with absent < present. An element
    may only go in when everything strictly below it is already in.
    """
    order = p.linear_extension
    strict_down = p.strict_down
    total = len(order)
    yielded = 0
    stack: list[tuple[int, int]] = [(0, 0)]
    while stack:
        pos, current = stack.pop()
        if pos == total:
            if predicate is None or predicate(current):
                yielded += 1
                if limit is not None and yielded > limit:
                    logger.warning(f"下集枚举超过上限 {limit}")
                    raise ResourceLimitError(f"下集枚举超过上限 {limit}", counts=(yielded - 1,))
                yield current
            continue
        v = order[pos]
        below = strict_down[v]
        if below & current == below:
            stack.append((pos + 1, current | (1 << v)))
        stack.append((pos + 1, current))


def count_downsets(p: Poset, predicate: Optional[Callable[[NodeSet], bool]] = None,
                   limit: Optional[int] = None) -> int:
    return sum(1 for _ in enumerate_downsets(p, predicate, limit))


def is_antichain(s: NodeSet, p: Poset) -> bool:
    return extremal(s, p, "max") == s


__all__ = [
    "NodeSet",
    "Poset",
    "members",
    "from_indices",
    "bit",
    "down_closure",
    "up_closure",
    "is_downset",
    "extremal",
    "enumerate_downsets",
    "count_downsets",
    "is_antichain",
]
