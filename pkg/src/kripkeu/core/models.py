"""Arbitrary finite Kripke models: reduction and embedding into the universal model."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from loguru import logger

from .errors import DepthInsufficientError, EmbeddingError, InvalidModelError, NotReducedError
from .poset import NodeSet, Poset, down_closure, from_indices, members
from .universal import UniversalModel, reducedness_violations


@dataclass(frozen=True)
class FiniteKripkeModel:
    poset: Poset
    valuation: tuple[int, ...]
    n: int

    def __post_init__(self) -> None:
        if len(self.valuation) != self.poset.size:
            raise InvalidModelError("赋值个数与点数不一致")
        limit = 1 << self.n
        for v, beta in enumerate(self.valuation):
            if not 0 <= beta < limit:
                raise InvalidModelError(f"点 {v} 的赋值超出 {self.n} 个变量")
            for u in members(self.poset.strict_down[v]):
                if beta & ~self.valuation[u]:
                    raise InvalidModelError(f"赋值不单调: {u} < {v}")

    @classmethod
    def from_relation(cls, n: int, valuation: Sequence[int], pairs: Iterable[tuple[int, int]]) -> "FiniteKripkeModel":
        """Model from ``lo < hi`` pairs; valuations must grow going down."""
        return cls(Poset.from_relation(len(valuation), pairs), tuple(valuation), n)

    @classmethod
    def from_universal(cls, m: UniversalModel) -> "FiniteKripkeModel":
        return cls(m.poset, m.valuation, m.n)

    @property
    def size(self) -> int:
        return self.poset.size

    @property
    def full(self) -> NodeSet:
        return self.poset.full


def restrict(model, nodes: NodeSet) -> FiniteKripkeModel:
    """Submodel on a downward closed node set, renumbered in ascending id order."""
    kept = members(nodes)
    index = {v: k for k, v in enumerate(kept)}
    strict_down = [
        from_indices((index[u] for u in members(model.poset.strict_down[v])), len(kept))
        for v in kept
    ]
    return FiniteKripkeModel(
        Poset.from_strict_down(strict_down),
        tuple(model.valuation[v] for v in kept),
        model.n,
    )


def _quotient(m: FiniteKripkeModel, representative: list[int], dropped: set[int]) -> FiniteKripkeModel:
    kept = [v for v in range(m.size) if representative[v] == v and v not in dropped]
    index = {v: k for k, v in enumerate(kept)}
    strict_down = []
    for v in kept:
        targets = {
            index[representative[u]]
            for u in members(m.poset.strict_down[v])
            if representative[u] not in dropped
        }
        strict_down.append(from_indices(targets, len(kept)))
    return FiniteKripkeModel(
        Poset.from_strict_down(strict_down),
        tuple(m.valuation[v] for v in kept),
        m.n,
    )


def _identify(m: FiniteKripkeModel) -> Optional[FiniteKripkeModel]:
    representative = list(range(m.size))
    seen: dict[tuple[int, int], int] = {}
    merged = False
    for v in range(m.size):
        key = (m.valuation[v], m.poset.strict_down[v])
        if key in seen:
            representative[v] = seen[key]
            merged = True
        else:
            seen[key] = v
    return _quotient(m, representative, set()) if merged else None


def _delete_one(m: FiniteKripkeModel) -> Optional[FiniteKripkeModel]:
    for v, covers in enumerate(m.poset.lower_covers):
        if covers and covers & (covers - 1) == 0:
            u = covers.bit_length() - 1
            if m.valuation[u] == m.valuation[v]:
                return _quotient(m, list(range(m.size)), {v})
    return None


def reduce_model(m: FiniteKripkeModel) -> FiniteKripkeModel:
    """Identify duplicates, then delete one redundant point; repeat until stable."""
    current = m
    while True:
        merged = _identify(current)
        if merged is not None:
            current = merged
            continue
        shrunk = _delete_one(current)
        if shrunk is not None:
            current = shrunk
            continue
        if current.size != m.size:
            logger.debug(f"模型约简: {m.size} -> {current.size} 个点")
        return current


def is_reduced(m) -> bool:
    return not reducedness_violations(m.poset, m.valuation)


@dataclass(frozen=True)
class Embedding:
    mapping: tuple[int, ...]

    def __getitem__(self, point: int) -> int:
        return self.mapping[point]

    def image(self, size: int) -> NodeSet:
        return from_indices(self.mapping, size)


def embedding_problems(m: FiniteKripkeModel, target: UniversalModel, embedding: Embedding) -> list[str]:
    problems = []
    mapping = embedding.mapping
    if len(set(mapping)) != len(mapping):
        problems.append("映射不是单射")
    for p in range(m.size):
        if m.valuation[p] != target.valuation[mapping[p]]:
            problems.append(f"点 {p} 的赋值未保持")
        for q in range(m.size):
            if m.poset.leq(p, q) != target.poset.leq(mapping[p], mapping[q]):
                problems.append(f"序关系未保持: {p}, {q}")
    image = embedding.image(target.size)
    if down_closure(image, target.poset) != image:
        problems.append("像不是向下封闭的")
    return problems


def embed_reduced(m: FiniteKripkeModel, target: UniversalModel) -> Embedding:
    """Map each point to ``(val(p), image of the points below p)`` rank by rank."""
    if not is_reduced(m):
        raise NotReducedError("模型不是约简的")
    if m.n > target.n:
        raise DepthInsufficientError(f"模型有 {m.n} 个变量，目标只有 {target.n} 个")
    if m.poset.max_rank > target.depth:
        raise DepthInsufficientError(f"模型的秩 {m.poset.max_rank} 超过目标深度 {target.depth}")
    image = [-1] * m.size
    for p in sorted(range(m.size), key=lambda v: m.poset.rank[v]):
        below = from_indices((image[u] for u in members(m.poset.strict_down[p])), target.size)
        node = target.lookup(m.valuation[p], below)
        if node is None:
            raise EmbeddingError(f"点 {p} 在通用模型中找不到对应节点")
        image[p] = node
    embedding = Embedding(tuple(image))
    problems = embedding_problems(m, target, embedding)
    if problems:
        raise EmbeddingError("; ".join(problems))
    return embedding


def random_model(n: int, size: int, seed: int, edge_probability: float = 0.35,
                 letter_probability: float = 0.3, max_rank: Optional[int] = None) -> FiniteKripkeModel:
    """Seeded random model; valuations are assigned top-down and unioned going down.

    With ``max_rank`` a point only goes above points of smaller rank than the cap.
    """
    if size < 1:
        raise ValueError("点数至少为 1")
    rng = random.Random(seed)
    strict_down: list[int] = []
    ranks: list[int] = []
    for v in range(size):
        below = 0
        rank = 0
        for u in range(v):
            if max_rank is not None and ranks[u] >= max_rank:
                continue
            if rng.random() < edge_probability:
                below |= strict_down[u] | (1 << u)
                rank = max(rank, ranks[u] + 1)
        strict_down.append(below)
        ranks.append(rank)
    valuation = [0] * size
    for v in reversed(range(size)):
        beta = 0
        for i in range(n):
            if rng.random() < letter_probability:
                beta |= 1 << i
        for w in range(v + 1, size):
            if strict_down[w] >> v & 1:
                beta |= valuation[w]
        valuation[v] = beta
    return FiniteKripkeModel(Poset.from_strict_down(strict_down), tuple(valuation), n)


__all__ = [
    "FiniteKripkeModel",
    "Embedding",
    "restrict",
    "reduce_model",
    "is_reduced",
    "embed_reduced",
    "embedding_problems",
    "random_model",
]
