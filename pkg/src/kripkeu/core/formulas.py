"""Intuitionistic propositional formulas.

Syntax tree, parser/printer, Kripke evaluation into downset elements,
level-by-level validity decision and de Jongh formula synthesis.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterator, Literal, Optional, Union

from loguru import logger

from .config import Limits, get_limits
from .errors import FormulaSyntaxError, PreconditionError, VariableRangeError
from .heyting import Element, KripkeFrame, implication_bits
from .poset import NodeSet, from_indices, members
from .universal import UniversalModel, format_valuation, universal


@dataclass(frozen=True)
class Bot:
    pass


@dataclass(frozen=True)
class Var:
    index: int


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Imp:
    left: "Formula"
    right: "Formula"


Formula = Union[Bot, Var, And, Or, Imp]

BOT = Bot()
TOP = Imp(BOT, BOT)


def top() -> Formula:
    return TOP


def not_(x: Formula) -> Formula:
    return Imp(x, BOT)


def iff(left: Formula, right: Formula) -> Formula:
    return And(Imp(left, right), Imp(right, left))


def disjunction(items: list[Formula]) -> Formula:
    """Left-folded disjunction; the empty one is ⊥."""
    if not items:
        return BOT
    result = items[0]
    for item in items[1:]:
        result = Or(result, item)
    return result


def conjunction(items: list[Formula]) -> Formula:
    """Left-folded conjunction; the empty one is ⊤."""
    if not items:
        return TOP
    result = items[0]
    for item in items[1:]:
        result = And(result, item)
    return result


def _is_top(f: Formula) -> bool:
    return isinstance(f, Imp) and isinstance(f.left, Bot) and isinstance(f.right, Bot)


# ---------------------------------------------------------------- parsing

_SYMBOLS = (
    ("<->", "IFF"),
    ("->", "IMP"),
    ("↔", "IFF"),
    ("→", "IMP"),
    ("&", "AND"),
    ("∧", "AND"),
    ("|", "OR"),
    ("∨", "OR"),
    ("~", "NOT"),
    ("¬", "NOT"),
    ("(", "LPAREN"),
    (")", "RPAREN"),
    ("⊥", "FALSE"),
    ("⊤", "TRUE"),
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    position: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    while pos < len(text):
        ch = text[pos]
        if ch.isspace():
            pos += 1
            continue
        for symbol, kind in _SYMBOLS:
            if text.startswith(symbol, pos):
                tokens.append(Token(kind, symbol, pos))
                pos += len(symbol)
                break
        else:
            if ch.isalpha():
                end = pos
                while end < len(text) and text[end].isalnum():
                    end += 1
                word = text[pos:end]
                if word == "false":
                    tokens.append(Token("FALSE", word, pos))
                elif word == "true":
                    tokens.append(Token("TRUE", word, pos))
                elif word[0] == "p" and word[1:].isdigit():
                    if int(word[1:]) < 1:
                        raise FormulaSyntaxError(f"变量编号必须从 1 开始: {word}", pos)
                    tokens.append(Token("VAR", word, pos))
                else:
                    raise FormulaSyntaxError(f"无法识别的标识符: {word}", pos)
                pos = end
            else:
                raise FormulaSyntaxError(f"无法识别的字符: {ch!r}", pos)
    tokens.append(Token("END", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.index = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def take(self, kind: str) -> Token:
        token = self.current
        if token.kind != kind:
            expected = "输入结束" if kind == "END" else kind
            raise FormulaSyntaxError(f"期望 {expected}，实际为 {token.text or '输入结束'}", token.position)
        self.index += 1
        return token

    def implication(self) -> Formula:
        left = self.disjunction()
        if self.current.kind == "IMP":
            self.index += 1
            return Imp(left, self.implication())
        if self.current.kind == "IFF":
            self.index += 1
            return iff(left, self.implication())
        return left

    def disjunction(self) -> Formula:
        result = self.conjunction()
        while self.current.kind == "OR":
            self.index += 1
            result = Or(result, self.conjunction())
        return result

    def conjunction(self) -> Formula:
        result = self.unary()
        while self.current.kind == "AND":
            self.index += 1
            result = And(result, self.unary())
        return result

    def unary(self) -> Formula:
        if self.current.kind == "NOT":
            self.index += 1
            return not_(self.unary())
        return self.atom()

    def atom(self) -> Formula:
        token = self.current
        if token.kind == "FALSE":
            self.index += 1
            return BOT
        if token.kind == "TRUE":
            self.index += 1
            return TOP
        if token.kind == "VAR":
            self.index += 1
            return Var(int(token.text[1:]))
        if token.kind == "LPAREN":
            self.index += 1
            inner = self.implication()
            self.take("RPAREN")
            return inner
        raise FormulaSyntaxError(f"意外的符号: {token.text or '输入结束'}", token.position)


def parse_formula(text: str) -> Formula:
    parser = _Parser(text)
    formula = parser.implication()
    parser.take("END")
    return formula


# ---------------------------------------------------------------- printing

_IMP_LEVEL, _OR_LEVEL, _AND_LEVEL, _NOT_LEVEL, _ATOM_LEVEL = 1, 2, 3, 4, 5


def _iff_parts(f: Formula) -> Optional[tuple[Formula, Formula]]:
    if isinstance(f, And) and isinstance(f.left, Imp) and isinstance(f.right, Imp):
        if f.left.left == f.right.right and f.left.right == f.right.left:
            return f.left.left, f.left.right
    return None


def _render(f: Formula) -> tuple[str, int]:
    def wrap(child: Formula, minimum: int) -> str:
        text, level = _render(child)
        return text if level >= minimum else f"({text})"

    if isinstance(f, Bot):
        return "false", _ATOM_LEVEL
    if isinstance(f, Var):
        return f"p{f.index}", _ATOM_LEVEL
    if isinstance(f, Imp):
        if _is_top(f):
            return "true", _ATOM_LEVEL
        if isinstance(f.right, Bot):
            return "~" + wrap(f.left, _NOT_LEVEL), _NOT_LEVEL
        return f"{wrap(f.left, _OR_LEVEL)} -> {wrap(f.right, _IMP_LEVEL)}", _IMP_LEVEL
    if isinstance(f, And):
        parts = _iff_parts(f)
        if parts is not None:
            return f"{wrap(parts[0], _OR_LEVEL)} <-> {wrap(parts[1], _IMP_LEVEL)}", _IMP_LEVEL
        return f"{wrap(f.left, _AND_LEVEL)} & {wrap(f.right, _NOT_LEVEL)}", _AND_LEVEL
    if isinstance(f, Or):
        return f"{wrap(f.left, _OR_LEVEL)} | {wrap(f.right, _AND_LEVEL)}", _OR_LEVEL
    raise TypeError(f"不是公式: {f!r}")


def format_formula(f: Formula) -> str:
    """Canonical ASCII text; ``parse_formula(format_formula(f)) == f``."""
    return _render(f)[0]


# ---------------------------------------------------------------- structure

def impl_depth(f: Formula, _memo: Optional[dict[int, int]] = None) -> int:
    memo = {} if _memo is None else _memo
    key = id(f)
    if key in memo:
        return memo[key]
    if isinstance(f, (Bot, Var)):
        depth = 0
    elif isinstance(f, Imp):
        depth = 1 + max(impl_depth(f.left, memo), impl_depth(f.right, memo))
    else:
        depth = max(impl_depth(f.left, memo), impl_depth(f.right, memo))
    memo[key] = depth
    return depth


def variables(f: Formula) -> set[int]:
    found: set[int] = set()
    seen: set[int] = set()
    stack = [f]
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        if isinstance(node, Var):
            found.add(node.index)
        elif not isinstance(node, Bot):
            stack.append(node.left)
            stack.append(node.right)
    return found


def rename_variables(f: Formula, mapping: dict[int, int]) -> Formula:
    memo: dict[int, Formula] = {}

    def go(node: Formula) -> Formula:
        key = id(node)
        if key in memo:
            return memo[key]
        if isinstance(node, Bot):
            result: Formula = node
        elif isinstance(node, Var):
            result = Var(mapping[node.index])
        else:
            result = type(node)(go(node.left), go(node.right))
        memo[key] = result
        return result

    return go(f)


def simplify(f: Formula) -> Formula:
    """Drop ⊥ disjuncts and ⊤ conjuncts; evaluation is unchanged."""
    memo: dict[int, Formula] = {}

    def go(node: Formula) -> Formula:
        key = id(node)
        if key in memo:
            return memo[key]
        if isinstance(node, (Bot, Var)) or _is_top(node):
            result: Formula = node
        else:
            left, right = go(node.left), go(node.right)
            if isinstance(node, Or) and isinstance(left, Bot):
                result = right
            elif isinstance(node, Or) and isinstance(right, Bot):
                result = left
            elif isinstance(node, And) and _is_top(left):
                result = right
            elif isinstance(node, And) and _is_top(right):
                result = left
            else:
                result = type(node)(left, right)
        memo[key] = result
        return result

    return go(f)


def random_formula(n: int, depth: int, rng: random.Random, size: int = 6) -> Formula:
    """Random formula over ``p1..pn`` with implication depth at most ``depth``."""

    def go(budget: int, depth_left: int) -> Formula:
        if budget <= 1:
            return BOT if rng.random() < 0.1 else Var(rng.randint(1, n))
        choice = rng.random()
        left_budget = rng.randint(1, budget - 1)
        right_budget = budget - left_budget
        if choice < 0.4 and depth_left > 0:
            return Imp(go(left_budget, depth_left - 1), go(right_budget, depth_left - 1))
        if choice < 0.7:
            return And(go(left_budget, depth_left), go(right_budget, depth_left))
        return Or(go(left_budget, depth_left), go(right_budget, depth_left))

    return go(size, depth)


# ---------------------------------------------------------------- evaluation

class EvaluationCache:
    """Memo of subformula values over one ambient, keyed by node identity."""

    def __init__(self, ambient: KripkeFrame):
        self.ambient = ambient
        self._values: dict[int, tuple[Formula, NodeSet]] = {}
        self._atoms: dict[int, NodeSet] = {}

    def atom(self, index: int) -> NodeSet:
        if index not in self._atoms:
            valuation = self.ambient.valuation
            shift = index - 1
            self._atoms[index] = from_indices(
                (w for w, beta in enumerate(valuation) if beta >> shift & 1),
                self.ambient.poset.size,
            )
        return self._atoms[index]

    def get(self, f: Formula) -> Optional[NodeSet]:
        entry = self._values.get(id(f))
        return entry[1] if entry is not None and entry[0] is f else None

    def put(self, f: Formula, bits: NodeSet) -> None:
        self._values[id(f)] = (f, bits)


def eval_formula(f: Formula, m: KripkeFrame, cache: Optional[EvaluationCache] = None) -> Element:
    """Truth set of ``f``: the nodes forcing it."""
    if cache is None or cache.ambient is not m:
        cache = EvaluationCache(m)
    for index in variables(f):
        if not 1 <= index <= m.n:
            raise VariableRangeError(f"变量 p{index} 超出范围 (n={m.n})")
    poset = m.poset
    full = poset.full

    def go(node: Formula) -> NodeSet:
        known = cache.get(node)
        if known is not None:
            return known
        if isinstance(node, Bot):
            bits = 0
        elif isinstance(node, Var):
            bits = cache.atom(node.index)
        elif _is_top(node):
            bits = full
        elif isinstance(node, And):
            bits = go(node.left) & go(node.right)
        elif isinstance(node, Or):
            bits = go(node.left) | go(node.right)
        else:
            bits = implication_bits(go(node.left), go(node.right), poset)
        cache.put(node, bits)
        return bits

    return Element._make(m, go(f))


# ---------------------------------------------------------------- decision

@dataclass(frozen=True)
class Witness:
    """A refuting node of ``universal(len(variables), depth)``.

    ``variables[k]`` is the original index of compacted variable ``k + 1``.
    """

    depth: int
    node: int
    variables: tuple[int, ...]
    n: int

    def model(self, limits: Optional[Limits] = None) -> UniversalModel:
        return universal(len(self.variables), self.depth, limits)

    def describe(self, limits: Optional[Limits] = None) -> str:
        m = self.model(limits)
        original = 0
        for k in members(m.valuation[self.node]):
            original |= 1 << (self.variables[k] - 1)
        return f"节点 {self.node} (秩 {m.rank(self.node)}, 赋值 {format_valuation(original)})"


@dataclass(frozen=True)
class DecisionResult:
    verdict: Literal["valid", "invalid"]
    depth: int
    witness: Optional[Witness] = None

    @property
    def valid(self) -> bool:
        return self.verdict == "valid"


def decide(
    f: Formula,
    n: int,
    mode: Literal["valid", "equiv"] = "valid",
    other: Optional[Formula] = None,
    depth: Optional[int] = None,
    limits: Optional[Limits] = None,
) -> DecisionResult:
    """Validity (or equivalence with ``other``) on the universal model.

    Only the variables that occur are kept. The formula is evaluated on
    levels 0..D (D = implication depth unless overridden) and the first level
    with a non-forcing node gives the witness; a lower level is an initial
    segment of the higher ones, so an early refutation is final.
    """
    limits = limits or get_limits()
    if mode == "equiv":
        if other is None:
            raise PreconditionError("equiv 模式需要第二个公式")
        target = iff(f, other)
    else:
        target = f
    used = sorted(variables(target))
    for index in used:
        if not 1 <= index <= n:
            raise VariableRangeError(f"变量 p{index} 超出范围 (n={n})")
    if not used:
        used = [1]
    mapping = {original: k + 1 for k, original in enumerate(used)}
    compact = rename_variables(target, mapping)
    bound = impl_depth(target) if depth is None else depth
    logger.debug(f"判定 {format_formula(target)}: {len(used)} 个变量, 深度上界 {bound}")

    for level in range(bound + 1):
        m = universal(len(used), level, limits)
        value = eval_formula(compact, m)
        missing = m.full & ~value.bits
        if missing:
            node = (missing & -missing).bit_length() - 1
            return DecisionResult(
                verdict="invalid",
                depth=level,
                witness=Witness(depth=level, node=node, variables=tuple(used), n=n),
            )
    return DecisionResult(verdict="valid", depth=bound)


# ---------------------------------------------------------------- de Jongh formulas

class DeJonghTable:
    """ψ_w / ψ'_w for the nodes of one universal model, sharing subformulas."""

    def __init__(self, m: UniversalModel):
        self.model = m
        self._psi: dict[int, Formula] = {}
        self._psi_prime: dict[int, Formula] = {}

    def _build(self, w: int) -> None:
        # 按秩从低到高构造，避免深递归
        m = self.model
        pending = [w]
        order: list[int] = []
        while pending:
            v = pending.pop()
            if v in self._psi or v in order:
                continue
            order.append(v)
            pending.extend(z for z in members(m.poset.lower_covers[v]) if z not in self._psi)
        for v in sorted(order, key=lambda x: m.rank(x)):
            if v in self._psi:
                continue
            maximal = members(m.poset.lower_covers[v])
            beta = m.valuation[v]
            below = disjunction([self._psi[z] for z in maximal])
            absent = [Var(i + 1) for i in range(m.n) if not beta >> i & 1]
            present = [Var(i + 1) for i in range(m.n) if beta >> i & 1]
            guard = Or(disjunction([self._psi_prime[z] for z in maximal]), disjunction(absent))
            psi = And(Imp(guard, below), conjunction(present))
            self._psi[v] = psi
            self._psi_prime[v] = Imp(psi, below)

    def psi(self, w: int) -> Formula:
        if w not in self._psi:
            self._build(w)
        return self._psi[w]

    def psi_prime(self, w: int) -> Formula:
        if w not in self._psi_prime:
            self._build(w)
        return self._psi_prime[w]


def de_jongh(w: int, m: UniversalModel, table: Optional[DeJonghTable] = None) -> tuple[Formula, Formula]:
    """``(ψ_w, ψ'_w)`` with values w↓ and the co-principal of w at any depth."""
    if not 0 <= w < m.size:
        raise IndexError(f"节点编号越界: {w}")
    table = table if table is not None and table.model is m else DeJonghTable(m)
    return table.psi(w), table.psi_prime(w)


def iter_subformulas(f: Formula) -> Iterator[Formula]:
    seen: set[int] = set()
    stack = [f]
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        yield node
        if isinstance(node, (And, Or, Imp)):
            stack.append(node.right)
            stack.append(node.left)


__all__ = [
    "Formula",
    "Bot",
    "Var",
    "And",
    "Or",
    "Imp",
    "BOT",
    "TOP",
    "top",
    "not_",
    "iff",
    "disjunction",
    "conjunction",
    "tokenize",
    "parse_formula",
    "format_formula",
    "impl_depth",
    "variables",
    "rename_variables",
    "simplify",
    "random_formula",
    "EvaluationCache",
    "eval_formula",
    "Witness",
    "DecisionResult",
    "decide",
    "DeJonghTable",
    "de_jongh",
    "iter_subformulas",
]
