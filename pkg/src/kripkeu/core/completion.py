"""Finitely described elements of the profinite completion.

An element is a compatible family of truncations, one downset per level of
the universal model. Three descriptors are supported: a finite downset, the
complement of the up-closure of a finite antichain, and a formula.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Literal, Optional, Union

from loguru import logger

from .config import Limits, get_limits
from .errors import InvariantError, PreconditionError, ResourceLimitError, UndecidableError, VariableRangeError
from .formulas import (
    BOT,
    TOP,
    And,
    DeJonghTable,
    Formula,
    Imp,
    Or,
    conjunction,
    decide,
    disjunction,
    eval_formula,
    impl_depth,
    variables,
)
from .heyting import Element, implication_bits
from .poset import NodeSet, Poset, down_closure, enumerate_downsets, extremal, from_indices, is_antichain, is_downset, members, up_closure
from .universal import UniversalModel, restrict_depth, submasks, universal

Verdict = Literal["A", "B", "C", "Unknown"]
SectionMode = Literal["min", "max"]
ApproxOp = Literal["meet", "join", "impl", "minus"]


@dataclass(frozen=True)
class Finite:
    nodes: NodeSet


@dataclass(frozen=True)
class CoFinite:
    """Everything outside the up-closure of ``antichain``."""

    antichain: NodeSet


@dataclass(frozen=True)
class FormulaDefined:
    formula: Formula


Descriptor = Union[Finite, CoFinite, FormulaDefined]


def covering_model(n: int, bits: NodeSet, limits: Optional[Limits] = None) -> UniversalModel:
    """Smallest universal model whose node ids include every member of ``bits``."""
    needed = bits.bit_length()
    depth = 0
    while True:
        m = universal(n, depth, limits)
        if m.size >= needed:
            return m
        depth += 1


def set_rank(n: int, bits: NodeSet, limits: Optional[Limits] = None) -> int:
    """Largest rank in ``bits`` (ids are sorted by rank); 0 for the empty set."""
    if not bits:
        return 0
    return covering_model(n, bits, limits).rank(bits.bit_length() - 1)


@dataclass(frozen=True)
class ProfiniteApprox:
    n: int
    descriptor: Descriptor
    limits: Optional[Limits] = field(default=None, compare=False, repr=False)
    _truncations: dict = field(default_factory=dict, init=False, compare=False, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, init=False, compare=False, repr=False)

    @classmethod
    def finite(cls, n: int, nodes: NodeSet, limits: Optional[Limits] = None) -> "ProfiniteApprox":
        m = covering_model(n, nodes, limits)
        if not is_downset(nodes, m.poset):
            raise PreconditionError("有限元必须是向下封闭的节点集合")
        return cls(n, Finite(nodes), limits)

    @classmethod
    def from_element(cls, a: Element) -> "ProfiniteApprox":
        return cls(a.ambient.n, Finite(a.bits))

    @classmethod
    def cofinite(cls, n: int, nodes: NodeSet, limits: Optional[Limits] = None) -> "ProfiniteApprox":
        """Complement of ``up(nodes)``; ``nodes`` is reduced to its minimal elements."""
        m = covering_model(n, nodes, limits)
        return cls(n, CoFinite(extremal(nodes, m.poset, "min")), limits)

    @classmethod
    def formula(cls, n: int, f: Formula, limits: Optional[Limits] = None) -> "ProfiniteApprox":
        for index in variables(f):
            if not 1 <= index <= n:
                raise VariableRangeError(f"变量 p{index} 超出范围 (n={n})")
        return cls(n, FormulaDefined(f), limits)

    @property
    def kind(self) -> str:
        if isinstance(self.descriptor, Finite):
            return "finite"
        if isinstance(self.descriptor, CoFinite):
            return "cofinite"
        return "formula"

    def truncate(self, i: int) -> Element:
        if i < 0:
            raise PreconditionError(f"层级必须非负: {i}")
        with self._lock:
            cached = self._truncations.get(i)
        if cached is not None:
            return cached
        value = self._compute(i)
        with self._lock:
            return self._truncations.setdefault(i, value)

    def _compute(self, i: int) -> Element:
        m = universal(self.n, i, self.limits)
        descriptor = self.descriptor
        if isinstance(descriptor, Finite):
            return Element._make(m, descriptor.nodes & m.full)
        if isinstance(descriptor, CoFinite):
            seeds = descriptor.antichain & m.full
            return Element._make(m, m.full & ~up_closure(seeds, m.poset))
        return eval_formula(descriptor.formula, m)

    def __and__(self, other: "ProfiniteApprox") -> "ProfiniteApprox":
        return combine("meet", self, other)

    def __or__(self, other: "ProfiniteApprox") -> "ProfiniteApprox":
        return combine("join", self, other)

    def __rshift__(self, other: "ProfiniteApprox") -> "ProfiniteApprox":
        return combine("impl", self, other)

    def __sub__(self, other: "ProfiniteApprox") -> "ProfiniteApprox":
        return combine("minus", self, other)


def truncate(x: ProfiniteApprox, i: int) -> Element:
    return x.truncate(i)


def is_compatible(x: ProfiniteApprox, depth: int) -> bool:
    """``truncate(j) ∩ K^i == truncate(i)`` for all ``i <= j <= depth``."""
    levels = [x.truncate(i) for i in range(depth + 1)]
    for j, upper in enumerate(levels):
        m = upper.ambient
        for i in range(j):
            if upper.bits & m.level_index(i) != levels[i].bits:
                return False
    return True


def as_formula(x: ProfiniteApprox) -> Formula:
    """A formula denoting ``x``: ⋁ψ_w over max(a), or ⋀ψ'_e over the antichain."""
    descriptor = x.descriptor
    if isinstance(descriptor, FormulaDefined):
        return descriptor.formula
    if isinstance(descriptor, Finite):
        if not descriptor.nodes:
            return BOT
        m = covering_model(x.n, descriptor.nodes, x.limits)
        table = DeJonghTable(m)
        tops = members(extremal(descriptor.nodes, m.poset, "max"))
        return disjunction([table.psi(w) for w in tops])
    if not descriptor.antichain:
        return TOP
    m = covering_model(x.n, descriptor.antichain, x.limits)
    table = DeJonghTable(m)
    return conjunction([table.psi_prime(e) for e in members(descriptor.antichain)])


def _finite_level(x: ProfiniteApprox) -> int:
    return set_rank(x.n, x.descriptor.nodes, x.limits)


def combine(op: ApproxOp, x: ProfiniteApprox, y: ProfiniteApprox) -> ProfiniteApprox:
    """Heyting operations; closed forms where the descriptors allow, formulas otherwise.

    ``minus`` needs a finite left operand: truncation only bounds a
    difference from above, so other shapes are not computed.
    """
    if x.n != y.n:
        raise PreconditionError(f"变量个数不一致: {x.n} != {y.n}")
    n, limits = x.n, x.limits or y.limits
    dx, dy = x.descriptor, y.descriptor

    if op == "minus":
        if not isinstance(dx, Finite):
            raise UndecidableError("差运算只支持左侧为有限元")
        level = _finite_level(x)
        m = universal(n, level, limits)
        rest = dx.nodes & ~y.truncate(level).bits
        return ProfiniteApprox(n, Finite(down_closure(rest, m.poset)), limits)

    if op == "meet":
        if isinstance(dx, Finite) or isinstance(dy, Finite):
            finite, other = (x, y) if isinstance(dx, Finite) else (y, x)
            level = _finite_level(finite)
            return ProfiniteApprox(n, Finite(finite.descriptor.nodes & other.truncate(level).bits), limits)
        if isinstance(dx, CoFinite) and isinstance(dy, CoFinite):
            seeds = dx.antichain | dy.antichain
            m = covering_model(n, seeds, limits)
            return ProfiniteApprox(n, CoFinite(extremal(seeds, m.poset, "min")), limits)
        return ProfiniteApprox(n, FormulaDefined(And(as_formula(x), as_formula(y))), limits)

    if op == "join":
        if isinstance(dx, Finite) and isinstance(dy, Finite):
            return ProfiniteApprox(n, Finite(dx.nodes | dy.nodes), limits)
        return ProfiniteApprox(n, FormulaDefined(Or(as_formula(x), as_formula(y))), limits)

    if op == "impl":
        if isinstance(dx, Finite) and isinstance(dy, Finite):
            gap = dx.nodes & ~dy.nodes
            m = covering_model(n, dx.nodes, limits)
            return ProfiniteApprox(n, CoFinite(extremal(gap, m.poset, "min")), limits)
        return ProfiniteApprox(n, FormulaDefined(Imp(as_formula(x), as_formula(y))), limits)

    raise ValueError(f"未知的运算: {op}")


def project(a: Element, i: int) -> Element:
    """``a ∩ K^i`` over the depth-``i`` segment of ``a``'s ambient."""
    m = a.ambient
    if not isinstance(m, UniversalModel):
        raise PreconditionError("投影需要通用模型上的元素")
    if not 0 <= i <= m.depth:
        raise PreconditionError(f"投影层级 {i} 不在 0..{m.depth} 之间")
    target = restrict_depth(m, i)
    return Element._make(target, a.bits & m.level_index(i))


@dataclass(frozen=True)
class Distance:
    """Exact dyadic distance, or an upper bound after exploring levels 0..D."""

    value: Optional[Fraction]
    explored_depth: Optional[int] = None

    @classmethod
    def at_level(cls, i: int) -> "Distance":
        return cls(Fraction(1, 1 << i))

    @property
    def exact(self) -> bool:
        return self.value is not None

    @property
    def upper(self) -> Fraction:
        if self.value is not None:
            return self.value
        return Fraction(1, 1 << (self.explored_depth + 1))

    @property
    def lower(self) -> Fraction:
        return self.value if self.value is not None else Fraction(0)

    @property
    def level(self) -> Optional[int]:
        """First level of difference for a nonzero exact value."""
        if not self.value:
            return None
        return self.value.denominator.bit_length() - 1

    def __str__(self) -> str:
        if self.value is None:
            return f"<= 2^-{self.explored_depth + 1}"
        if self.value == 0:
            return "0"
        return f"2^-{self.level}"


ZERO_DISTANCE = Distance(Fraction(0))


def distance(x: ProfiniteApprox, y: ProfiniteApprox, max_depth: int) -> Distance:
    if x.n != y.n:
        raise PreconditionError(f"变量个数不一致: {x.n} != {y.n}")
    if max_depth < 0:
        raise PreconditionError(f"探索深度必须非负: {max_depth}")
    if x.descriptor == y.descriptor:
        return ZERO_DISTANCE
    for i in range(max_depth + 1):
        if x.truncate(i).bits != y.truncate(i).bits:
            return Distance.at_level(i)
    logger.debug(f"两个元素在 0..{max_depth} 层都相同，只给出上界")
    return Distance(None, explored_depth=max_depth)


def section(x: Element, mode: SectionMode, depth: int, limits: Optional[Limits] = None) -> Element:
    """Lift ``x`` from its level to ``depth``; min keeps the set, max is ``K^i → x``."""
    m = x.ambient
    if not isinstance(m, UniversalModel):
        raise PreconditionError("截面需要通用模型上的元素")
    if depth < m.depth:
        raise PreconditionError(f"目标深度 {depth} 小于元素所在层级 {m.depth}")
    target = m if depth == m.depth else universal(m.n, depth, limits)
    if mode == "min":
        return Element._make(target, x.bits)
    if mode == "max":
        return Element._make(target, implication_bits(target.level_index(m.depth), x.bits, target.poset))
    raise ValueError(f"未知的截面模式: {mode}")


# ---------------------------------------------------------------- extensions


@dataclass(frozen=True)
class NewNode:
    """A node added above a downset: valuation plus its maximal predecessors.

    Predecessors are node ids of the base downset or other ``NewNode`` keys.
    """

    valuation: int
    below: frozenset
    rank: int


class _ExtensionSearch:
    def __init__(self, a: Element):
        m = a.ambient
        if not isinstance(m, UniversalModel):
            raise PreconditionError("扩张计数需要通用模型上的元素")
        self.depth = m.depth
        self.full_vars = m.variable_mask
        self.base = a.nodes()
        self.index = {v: k for k, v in enumerate(self.base)}
        size = len(self.base)
        self.base_down = [
            from_indices((self.index[u] for u in members(m.poset.strict_down[v])), size) for v in self.base
        ]
        self.base_rank = [m.rank(v) for v in self.base]
        self.base_val = [m.valuation[v] for v in self.base]

    def frame(self, ext: frozenset) -> tuple[Poset, list[int], list]:
        strict_down = list(self.base_down)
        ranks = list(self.base_rank)
        vals = list(self.base_val)
        keys: list = list(self.base)
        local: dict[NewNode, int] = {}
        for node in sorted(ext, key=lambda x: x.rank):
            down = 0
            for key in node.below:
                j = local[key] if isinstance(key, NewNode) else self.index[key]
                down |= strict_down[j] | (1 << j)
            local[node] = len(keys)
            strict_down.append(down)
            ranks.append(node.rank)
            vals.append(node.valuation)
            keys.append(node)
        return Poset(size=len(keys), strict_down=tuple(strict_down), rank=tuple(ranks)), vals, keys

    def candidates(self, ext: frozenset):
        """Admissible nodes of rank above ``depth`` that can be added to ``base ∪ ext``."""
        poset, vals, keys = self.frame(ext)
        high = from_indices((j for j, r in enumerate(poset.rank) if r >= self.depth), poset.size)
        for y in enumerate_downsets(poset, lambda s: bool(s & high)):
            maximal = members(extremal(y, poset, "max"))
            allowed = self.full_vars
            for j in maximal:
                allowed &= vals[j]
            excluded = vals[maximal[0]] if len(maximal) == 1 else None
            below = frozenset(keys[j] for j in maximal)
            rank = 1 + max(poset.rank[j] for j in maximal)
            for beta in submasks(allowed):
                if beta == excluded:
                    continue
                node = NewNode(beta, below, rank)
                if node not in ext:
                    yield node


def extension_counts(a: Element, kmax: int, limits: Optional[Limits] = None, stop_at_three: bool = False) -> list[int]:
    """Counts of k-extensions of ``a`` for k = 1, 2, ...; stops after a zero.

    A k-extension is a (k-1)-extension plus one admissible node; sets of new
    nodes are deduplicated by their symbolic keys.
    """
    limits = limits or get_limits()
    search = _ExtensionSearch(a)
    layer: set[frozenset] = {frozenset()}
    counts: list[int] = []
    for k in range(1, kmax + 1):
        following: set[frozenset] = set()
        for ext in layer:
            for node in search.candidates(ext):
                following.add(ext | {node})
                if len(following) > limits.extension_cap:
                    logger.warning(f"{k}-扩张个数超过上限 {limits.extension_cap}")
                    raise ResourceLimitError(
                        f"{k}-扩张个数超过上限 {limits.extension_cap}",
                        level=k,
                        counts=counts + [len(following)],
                    )
        counts.append(len(following))
        logger.debug(f"{k}-扩张: {len(following)} 个")
        if not following or (stop_at_three and k == 1 and len(following) >= 3):
            break
        layer = following
    return counts


def count_k_extensions(a: Element, k: int, limits: Optional[Limits] = None) -> int:
    if k < 1:
        raise PreconditionError(f"k 必须至少为 1: {k}")
    counts = extension_counts(a, k, limits)
    return counts[k - 1] if len(counts) >= k else 0


@dataclass(frozen=True)
class Classification:
    verdict: Verdict
    counts: tuple[int, ...]
    kmax: int

    def __str__(self) -> str:
        if self.verdict == "B":
            return f"B({self.kmax}-verified)"
        return self.verdict


def cb_classify(a: Element, kmax: Optional[int] = None, limits: Optional[Limits] = None) -> Classification:
    """A: some k has no extension; C: at least three 1-extensions; B: two at every k ≤ kmax."""
    limits = limits or get_limits()
    kmax = kmax or limits.kmax
    counts = tuple(extension_counts(a, kmax, limits, stop_at_three=True))
    if counts[-1] == 0:
        verdict: Verdict = "A"
    elif counts[0] >= 3:
        verdict = "C"
    elif len(counts) == kmax and all(c == 2 for c in counts):
        verdict = "B"
    else:
        verdict = "Unknown"
    return Classification(verdict, counts, kmax)


def is_isolated(x: ProfiniteApprox, levels: Optional[int] = None) -> bool:
    """Whether ``x`` is a finite node set.

    A co-finite element is finite exactly when the part of ``a`` above the
    antichain's top rank has no long extensions, which ``cb_classify``
    decides.

    A formula element needs a certificate found within ``levels`` explored
    levels (default: the depth cap for one variable, 2 otherwise):

    - finite, when some level adds no node (every node of rank r + 1 covers
      a node of rank r, so a downset without rank-r nodes stops there);
    - co-finite, when the formula is implied by the co-finite element cut
      out by the minimal nodes missing at the last explored level, checked by
      ``decide`` within the explored depth. The answer is then that element's.

    Growth alone proves nothing; without a certificate ``UndecidableError``.
    """
    descriptor = x.descriptor
    if isinstance(descriptor, Finite):
        return True
    if isinstance(descriptor, CoFinite):
        r = set_rank(x.n, descriptor.antichain, x.limits)
        result = cb_classify(x.truncate(r), limits=x.limits)
        if result.verdict == "A":
            return True
        if result.verdict in ("B", "C"):
            return False
        raise UndecidableError(f"无法判定余有限元是否有限: {result.counts}")

    limits = x.limits or get_limits()
    if levels is None:
        levels = limits.max_depth if x.n == 1 else 2
    sizes: list[int] = []
    try:
        for i in range(levels + 1):
            sizes.append(len(x.truncate(i)))
            if sizes[-1] == (sizes[-2] if i else 0):
                logger.debug(f"公式元在第 {i} 层稳定: {sizes}")
                return True
        last = x.truncate(levels)
        poset = last.ambient.poset
        missing = extremal(poset.full & ~last.bits, poset, "min")
        candidate = ProfiniteApprox.cofinite(x.n, missing, x.limits)
        check = Imp(as_formula(candidate), descriptor.formula)
        if impl_depth(check) > levels:
            raise UndecidableError(
                f"公式元在前 {levels} 层没有稳定，余有限证书需要深度 {impl_depth(check)}: {sizes}"
            )
        outcome = decide(check, x.n, limits=limits)
    except ResourceLimitError as e:
        raise UndecidableError(f"寻找证书时达到资源上限: {e}") from e
    if outcome.valid:
        return is_isolated(candidate)
    raise UndecidableError(f"公式元在前 {levels} 层既没有稳定也不是余有限的: {sizes}")


def find_antichain(n: int, size: int, depth_cap: int = 2, limits: Optional[Limits] = None) -> list[int]:
    """``size`` pairwise incomparable nodes of the universal model, sorted.

    At each depth up to ``depth_cap`` the top level is taken first, then the
    lower levels in descending rank contribute the nodes below none of those
    already chosen. The first depth that yields ``size`` nodes wins.
    """
    if n < 2:
        raise PreconditionError("n = 1 时通用模型没有无穷反链")
    if size < 0:
        raise PreconditionError(f"反链大小必须非负: {size}")
    best = 0
    for d in range(depth_cap + 1):
        m = universal(n, d, limits)
        poset = m.poset
        chosen: list[int] = []
        blocked = 0
        for r in range(d, -1, -1):
            chosen.extend(v for v in m.rank_range(r) if not blocked >> v & 1)
            if len(chosen) >= size:
                break
            blocked = down_closure(from_indices(chosen, m.size), poset)
        best = max(best, len(chosen))
        if len(chosen) >= size:
            found = sorted(chosen[:size])
            if not is_antichain(from_indices(found, m.size), poset):
                raise InvariantError(f"选出的节点不是反链: {found}")
            return found
    raise ResourceLimitError(
        f"深度上限 {depth_cap} 内找不到大小为 {size} 的反链 (最多 {best} 个)", level=depth_cap
    )


__all__ = [
    "Finite",
    "CoFinite",
    "FormulaDefined",
    "Descriptor",
    "ProfiniteApprox",
    "Distance",
    "Classification",
    "NewNode",
    "covering_model",
    "set_rank",
    "truncate",
    "is_compatible",
    "as_formula",
    "combine",
    "project",
    "distance",
    "section",
    "extension_counts",
    "count_k_extensions",
    "cb_classify",
    "is_isolated",
    "find_antichain",
]
