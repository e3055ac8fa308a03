"""Downset algebras of finite Kripke frames.

Over a universal model of depth d this is the finite free-algebra layer
F^d_n: elements are downward closed node sets, meet and join are intersection
and union, implication is the complement of an up-closure.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Literal, Optional, Protocol, Sequence

from loguru import logger

from .config import get_limits
from .errors import (
    AmbientMismatchError,
    DepthInsufficientError,
    PreconditionError,
    ResourceLimitError,
)
from .poset import (
    NodeSet,
    Poset,
    down_closure,
    enumerate_downsets,
    extremal,
    from_indices,
    is_downset,
    members,
    up_closure,
)
from .universal import UniversalModel

BinaryOp = Literal["meet", "join", "impl", "minus"]
Direction = Literal["cap", "cup"]


class KripkeFrame(Protocol):
    n: int
    poset: Poset
    valuation: tuple[int, ...]


@dataclass(frozen=True, eq=False)
class Element:
    """A downward closed node set over a fixed ambient model."""

    ambient: KripkeFrame
    bits: NodeSet

    def __post_init__(self) -> None:
        if not is_downset(self.bits, self.ambient.poset):
            raise PreconditionError("节点集合不是向下封闭的")

    @classmethod
    def _make(cls, ambient: KripkeFrame, bits: NodeSet) -> "Element":
        element = object.__new__(cls)
        object.__setattr__(element, "ambient", ambient)
        object.__setattr__(element, "bits", bits)
        return element

    @classmethod
    def closure_of(cls, ambient: KripkeFrame, nodes: Iterable[int]) -> "Element":
        poset = ambient.poset
        return cls._make(ambient, down_closure(from_indices(nodes, poset.size), poset))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Element):
            return NotImplemented
        return self.bits == other.bits and _same_ambient(self.ambient, other.ambient)

    def __hash__(self) -> int:
        return hash((self.bits, self.ambient.n, self.ambient.poset.size))

    def __repr__(self) -> str:
        nodes = self.nodes()
        shown = ",".join(str(v) for v in nodes[:12])
        more = ",…" if len(nodes) > 12 else ""
        return f"Element({{{shown}{more}}}, size={len(nodes)})"

    def __len__(self) -> int:
        return self.bits.bit_count()

    def __contains__(self, node: int) -> bool:
        return bool(self.bits >> node & 1)

    def __le__(self, other: "Element") -> bool:
        _require_same(self, other)
        return self.bits & ~other.bits == 0

    def __and__(self, other: "Element") -> "Element":
        return heyting_binary("meet", self, other)

    def __or__(self, other: "Element") -> "Element":
        return heyting_binary("join", self, other)

    def __rshift__(self, other: "Element") -> "Element":
        return heyting_binary("impl", self, other)

    def __sub__(self, other: "Element") -> "Element":
        return heyting_binary("minus", self, other)

    def __invert__(self) -> "Element":
        return neg(self)

    def nodes(self) -> list[int]:
        return members(self.bits)

    @property
    def is_zero(self) -> bool:
        return self.bits == 0

    @property
    def is_one(self) -> bool:
        return self.bits == self.ambient.poset.full


@dataclass(frozen=True)
class IrreducibilityFlags:
    completely_join: bool
    meet: bool
    join_filtering: bool
    # join_filtering read on the nodes below the top rank only
    filtering_bounded: bool = False


def _same_ambient(x: KripkeFrame, y: KripkeFrame) -> bool:
    return x is y or x == y


def _require_same(a: Element, b: Element) -> None:
    if not _same_ambient(a.ambient, b.ambient):
        raise AmbientMismatchError("两个元素不在同一个模型上")


def zero(ambient: KripkeFrame) -> Element:
    return Element._make(ambient, 0)


def one(ambient: KripkeFrame) -> Element:
    return Element._make(ambient, ambient.poset.full)


def principal(ambient: KripkeFrame, w: int) -> Element:
    return Element._make(ambient, ambient.poset.down(w))


def coprincipal(ambient: KripkeFrame, w: int) -> Element:
    poset = ambient.poset
    return Element._make(ambient, poset.full & ~up_closure(1 << w, poset))


def level_element(m: UniversalModel, i: int) -> Element:
    return Element._make(m, m.level_index(i))


def implication_bits(a: NodeSet, b: NodeSet, poset: Poset) -> NodeSet:
    return poset.full & ~up_closure(a & ~b, poset)


def heyting_binary(op: BinaryOp, a: Element, b: Element) -> Element:
    """``minus`` reads as ``a - b``: the least x with ``a ⊑ b ⊔ x``."""
    _require_same(a, b)
    poset = a.ambient.poset
    if op == "meet":
        bits = a.bits & b.bits
    elif op == "join":
        bits = a.bits | b.bits
    elif op == "impl":
        bits = implication_bits(a.bits, b.bits, poset)
    elif op == "minus":
        bits = down_closure(a.bits & ~b.bits, poset)
    else:
        raise ValueError(f"未知的运算: {op}")
    return Element._make(a.ambient, bits)


def neg(a: Element) -> Element:
    return Element._make(a.ambient, implication_bits(a.bits, 0, a.ambient.poset))


def _unique_max(a: Element) -> Optional[int]:
    if not a.bits:
        return None
    top = extremal(a.bits, a.ambient.poset, "max")
    return top.bit_length() - 1 if top & (top - 1) == 0 else None


def _unique_complement_min(a: Element) -> Optional[int]:
    poset = a.ambient.poset
    rest = poset.full & ~a.bits
    if not rest:
        return None
    bottom = extremal(rest, poset, "min")
    return bottom.bit_length() - 1 if bottom & (bottom - 1) == 0 else None


def is_join_filtering(a: Element) -> tuple[bool, bool]:
    """Return ``(filtering, filtering_up_to_depth)``.

    ``filtering`` is the exact test on the node set as given: every two nodes
    of ``a`` have a common upper bound inside ``a``, i.e. a unique maximum.
    ``filtering_up_to_depth`` asks the same only of the nodes below the top
    rank, which is what a truncation can say about an infinite element of the
    completion. The empty set is neither.
    """
    if not a.bits:
        return False, False
    poset = a.ambient.poset
    top_rank = poset.max_rank
    low = from_indices((v for v in a.nodes() if poset.rank[v] < top_rank), poset.size)
    tops = members(extremal(low, poset, "max")) if low else []
    above = {v: up_closure(1 << v, poset) & a.bits for v in tops}
    bounded = all(above[u] & above[v] for i, u in enumerate(tops) for v in tops[i + 1:])
    return _unique_max(a) is not None, bounded


def classify_irreducible(a: Element) -> IrreducibilityFlags:
    filtering, bounded = is_join_filtering(a)
    return IrreducibilityFlags(
        completely_join=_unique_max(a) is not None,
        meet=_unique_complement_min(a) is not None,
        join_filtering=filtering,
        filtering_bounded=bounded,
    )


def supp_join(a: Element) -> NodeSet:
    return a.bits


def supp_meet_min(a: Element) -> NodeSet:
    """Minimal nodes outside ``a``: ``a`` is the meet of their co-principals."""
    poset = a.ambient.poset
    return extremal(poset.full & ~a.bits, poset, "min")


def supp_meet_min_touches_top(a: Element) -> bool:
    """Whether some minimal complement node sits on the top level (it may move deeper)."""
    poset = a.ambient.poset
    return any(poset.rank[v] == poset.max_rank for v in members(supp_meet_min(a)))


def suppmin_rule_check(op: Literal["join", "meet", "impl"], a: Element, b: Element) -> bool:
    """Compare supp-min of ``op(a, b)`` with the rule computed from the operands."""
    _require_same(a, b)
    poset = a.ambient.poset
    full = poset.full
    supp_a = full & ~a.bits
    supp_b = full & ~b.bits
    if op == "join":
        rule = extremal(supp_a & supp_b, poset, "min")
    elif op == "meet":
        rule = extremal(supp_a | supp_b, poset, "min")
    elif op == "impl":
        rule = extremal(supp_b & ~supp_a, poset, "min")
    else:
        raise ValueError(f"未知的运算: {op}")
    return supp_meet_min(heyting_binary(op, a, b)) == rule


def predecessor(x: Element) -> Element:
    """``x⁻``: the unique element covered by a completely join-irreducible ``x``."""
    top = _unique_max(x)
    if top is None:
        raise PreconditionError("元素不是完全并不可约的")
    return Element._make(x.ambient, x.bits & ~(1 << top))


def successor(x: Element) -> Element:
    """``x⁺``: the unique element covering a meet-irreducible ``x``."""
    bottom = _unique_complement_min(x)
    if bottom is None:
        raise PreconditionError("元素不是交不可约的")
    return Element._make(x.ambient, x.bits | (1 << bottom))


def dual_map(x: Element, direction: Direction) -> Element:
    """``cap``: w↓ ↦ x → x⁻ (co-principal of w); ``cup``: co-principal ↦ x⁺ − x."""
    if direction == "cap":
        return heyting_binary("impl", x, predecessor(x))
    if direction == "cup":
        return heyting_binary("minus", successor(x), x)
    raise ValueError(f"未知的方向: {direction}")


def atoms_and_pregenerators(m: UniversalModel) -> tuple[list[Element], list[Element]]:
    """Atoms in node order; ``pregen[i - 1]`` is the atom valued ``{P_i}``."""
    atoms = [Element._make(m, 1 << w) for w in m.rank_range(0)]
    by_valuation = {m.valuation[w]: w for w in m.rank_range(0)}
    pregen = [Element._make(m, 1 << by_valuation[1 << i]) for i in range(m.n)]
    return atoms, pregen


def _require_depth(m: UniversalModel) -> None:
    if m.depth < 1:
        raise DepthInsufficientError("需要模型深度至少为 1")


def _pregenerator_node(i: int, m: UniversalModel) -> int:
    if not 1 <= i <= m.n:
        raise PreconditionError(f"变量编号越界: {i}")
    _, pregen = atoms_and_pregenerators(m)
    return pregen[i - 1].bits.bit_length() - 1


def private_successor_count(v: int, m: UniversalModel) -> int:
    """Successors of ``v`` whose only maximal predecessor is ``v`` (order data only)."""
    return len(m.cover_index.get(1 << v, ()))


def common_private_successor_count(u: int, v: int, m: UniversalModel) -> int:
    """Successors whose maximal predecessors are exactly ``u`` and ``v``."""
    return len(m.cover_index.get((1 << u) | (1 << v), ()))


def definable_generator_support(i: int, m: UniversalModel) -> NodeSet:
    """Nodes of rank < depth meeting the order-theoretic support conditions for ``g_i``.

    (1) the node has a private successor; (2) it lies above the pre-generator
    node or shares two private successors with it.
    """
    _require_depth(m)
    anchor = _pregenerator_node(i, m)
    poset = m.poset
    found = []
    for v in range(m.level_sizes[m.depth - 1]):
        if not private_successor_count(v, m):
            continue
        if poset.leq(anchor, v) or common_private_successor_count(v, anchor, m) >= 2:
            found.append(v)
    return from_indices(found, m.size)


def b_i_atom_set(i: int, m: UniversalModel) -> list[Element]:
    _require_depth(m)
    anchor = _pregenerator_node(i, m)
    atoms, _ = atoms_and_pregenerators(m)
    chosen = []
    for atom in atoms:
        w = atom.bits.bit_length() - 1
        if w == anchor or common_private_successor_count(w, anchor, m) >= 2:
            chosen.append(atom)
    return chosen


def definable_atom_classes(m: UniversalModel) -> dict[int, list[Element]]:
    """Atoms grouped by k, where the atom's node has 2^k - 1 private successors."""
    _require_depth(m)
    classes: dict[int, list[Element]] = {}
    atoms, _ = atoms_and_pregenerators(m)
    for atom in atoms:
        count = private_successor_count(atom.bits.bit_length() - 1, m)
        k = (count + 1).bit_length() - 1
        if (1 << k) != count + 1:
            raise PreconditionError(f"私有后继个数 {count} 不是 2^k - 1 的形式")
        classes.setdefault(k, []).append(atom)
    return dict(sorted(classes.items()))


def subalgebra_closure(
    gens: Sequence[Element],
    cap: Optional[int] = None,
    within: Optional[NodeSet] = None,
) -> tuple[Element, ...]:
    """Least set with ``gens``, 0 and 1 closed under meet, join and impl.

    With ``within`` (a downward closed window Q) everything is computed in the
    downset algebra of Q; restricting to a downset is a Heyting homomorphism,
    so this is the image of the full closure under ``x ↦ x ∩ Q``. Elements
    come back in discovery order: 0, 1, the generators, then new elements.
    """
    if not gens:
        raise PreconditionError("生成元列表为空")
    ambient = gens[0].ambient
    for g in gens[1:]:
        _require_same(gens[0], g)
    cap = cap or get_limits().closure_cap
    poset = ambient.poset
    window = poset.full if within is None else within
    if not is_downset(window, poset):
        raise PreconditionError("窗口必须向下封闭")
    window_nodes = members(window)
    strict_down = poset.strict_down

    def impl(a: NodeSet, b: NodeSet) -> NodeSet:
        gap = a & ~b
        if not gap:
            return window
        above = from_indices((w for w in window_nodes if strict_down[w] & gap), poset.size)
        return window & ~(above | gap)

    elements: list[NodeSet] = []
    seen: dict[NodeSet, int] = {}

    def add(x: NodeSet) -> None:
        if x in seen:
            return
        seen[x] = len(elements)
        elements.append(x)
        if len(elements) > cap:
            logger.warning(f"子代数闭包超过上限 {cap}")
            raise ResourceLimitError(f"子代数闭包超过上限 {cap}", counts=(len(elements),))

    add(0)
    add(window)
    for g in gens:
        add(g.bits & window)
    i = 0
    while i < len(elements):
        x = elements[i]
        for j in range(i + 1):
            y = elements[j]
            add(x & y)
            add(x | y)
            add(impl(x, y))
            add(impl(y, x))
        i += 1
    logger.debug(f"子代数闭包完成: {len(elements)} 个元素")
    return tuple(Element._make(ambient, x) for x in elements)


def regular_elements(m: UniversalModel) -> list[Element]:
    """¬¬S for every set S of rank-0 nodes (rank-0 ids are 0..2^n-1)."""
    level0 = m.level_sizes[0]
    return [neg(neg(Element._make(m, seed))) for seed in range(1 << level0)]


@dataclass(frozen=True)
class SpectrumReport:
    meet_irreducibles: int
    nodes: int
    isomorphic: bool
    basis_ok: bool
    topology_matches: bool
    valuation_matches: bool
    problems: tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return self.isomorphic and self.basis_ok and self.topology_matches and self.valuation_matches


def spectrum_check(m: KripkeFrame) -> SpectrumReport:
    """Rebuild the frame from the meet-irreducibles of its downset algebra."""
    poset = m.poset
    full = poset.full
    problems: list[str] = []

    elements = list(enumerate_downsets(poset))
    irreducible: list[NodeSet] = []
    node_of: list[int] = []
    for x in elements:
        bottom = _unique_complement_min(Element._make(m, x))
        if bottom is not None:
            irreducible.append(x)
            node_of.append(bottom)

    isomorphic = sorted(node_of) == list(range(poset.size))
    if not isomorphic:
        problems.append("交不可约元与节点之间不是双射")
    for x, w in zip(irreducible, node_of):
        if x != full & ~up_closure(1 << w, poset):
            isomorphic = False
            problems.append(f"交不可约元不是节点 {w} 的余主集")
    position = {w: k for k, w in enumerate(node_of)}
    if isomorphic:
        for v in range(poset.size):
            for w in range(poset.size):
                below = irreducible[position[v]] & ~irreducible[position[w]] == 0
                if below != poset.leq(v, w):
                    isomorphic = False
                    problems.append(f"序不一致: {v}, {w}")

    # 谱的序: 主理想按包含排序，即交不可约元按 ⊑ 排序
    count = len(irreducible)
    spectrum = Poset.from_strict_down([
        from_indices(
            (k for k in range(count) if k != j and irreducible[k] & ~irreducible[j] == 0),
            count,
        )
        for j in range(count)
    ])

    def zariski(a: NodeSet) -> NodeSet:
        return from_indices((k for k in range(count) if a & ~irreducible[k]), count)

    basis_ok = True
    for j, x in enumerate(irreducible):
        generator = dual_map(Element._make(m, x), "cup").bits
        if zariski(generator) != spectrum.down(j):
            basis_ok = False
            problems.append(f"基本开集不是主下集: {node_of[j]}")

    family = {zariski(a) for a in elements}
    topology_matches = family == set(enumerate_downsets(spectrum))
    if not topology_matches:
        problems.append("Zariski 开集族与下集拓扑不一致")

    valuation_matches = True
    for i in range(m.n):
        generator = from_indices((w for w in range(poset.size) if m.valuation[w] >> i & 1), poset.size)
        for x, w in zip(irreducible, node_of):
            recovered = bool(generator & ~x)
            if recovered != bool(m.valuation[w] >> i & 1):
                valuation_matches = False
                problems.append(f"节点 {w} 的变量 p{i + 1} 赋值无法还原")

    return SpectrumReport(
        meet_irreducibles=count,
        nodes=poset.size,
        isomorphic=isomorphic,
        basis_ok=basis_ok,
        topology_matches=topology_matches,
        valuation_matches=valuation_matches,
        problems=tuple(problems),
    )


__all__ = [
    "Element",
    "IrreducibilityFlags",
    "KripkeFrame",
    "SpectrumReport",
    "zero",
    "one",
    "principal",
    "coprincipal",
    "level_element",
    "heyting_binary",
    "neg",
    "classify_irreducible",
    "is_join_filtering",
    "supp_join",
    "supp_meet_min",
    "supp_meet_min_touches_top",
    "suppmin_rule_check",
    "predecessor",
    "successor",
    "dual_map",
    "atoms_and_pregenerators",
    "private_successor_count",
    "common_private_successor_count",
    "definable_generator_support",
    "b_i_atom_set",
    "definable_atom_classes",
    "subalgebra_closure",
    "regular_elements",
    "spectrum_check",
]
