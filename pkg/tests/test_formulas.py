"""公式解析、求值、判定与 de Jongh 公式单元测试"""

import random
from functools import lru_cache
from itertools import combinations, product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kripkeu.core.config import get_limits
from kripkeu.core.errors import FormulaSyntaxError, PreconditionError, ResourceLimitError, VariableRangeError
from kripkeu.core.formulas import (
    BOT,
    TOP,
    And,
    Bot,
    DeJonghTable,
    EvaluationCache,
    Imp,
    Or,
    Var,
    conjunction,
    de_jongh,
    decide,
    disjunction,
    eval_formula,
    format_formula,
    iff,
    impl_depth,
    not_,
    parse_formula,
    random_formula,
    rename_variables,
    simplify,
    variables,
)
from kripkeu.core.heyting import coprincipal, principal
from kripkeu.core.poset import Poset
from kripkeu.core.universal import universal

VALID = [
    "p1 -> ~~p1",
    "p1 <-> p1",
    "~~~p1 -> ~p1",
    "~~(p1 | ~p1)",
    "~~(~~p1 -> p1)",
    "p1 & p2 -> p2 & p1",
]

VALID_DEEP = [
    "~(p1 | p2) -> ~p1 & ~p2",
    "~p1 & ~p2 -> ~(p1 | p2)",
    "~p1 | ~p2 -> ~(p1 & p2)",
    "(p1 -> p2) -> (p1 & p2 <-> p1)",
]

INVALID = [
    "((p1 -> p2) -> p1) -> p1",
    "p1 | ~p1",
    "~~p1 -> p1",
    "~p1 | ~~p1",
    "~(p1 & p2) -> ~p1 | ~p2",
    "(p1 -> p2) | (p2 -> p1)",
    "((p1 -> p2) -> p2) -> p1 | p2",
    "(~~p1 -> p1) -> p1 | ~p1",
    "(~p1 -> p2) -> p1 | p2",
    "~~(p1 | p2) -> ~~p1 | ~~p2",
]


# ---------------------------------------------------------------- 暴力检验


def forced(f, strict_down, val):
    """按定义计算真值集: 蕴涵在当前点及其下方的所有点上检查"""
    size = len(val)
    if isinstance(f, Bot):
        return frozenset()
    if isinstance(f, Var):
        return frozenset(w for w in range(size) if val[w] >> (f.index - 1) & 1)
    left = forced(f.left, strict_down, val)
    right = forced(f.right, strict_down, val)
    if isinstance(f, And):
        return left & right
    if isinstance(f, Or):
        return left | right
    result = set()
    for w in range(size):
        below = [u for u in range(size) if u == w or strict_down[w] >> u & 1]
        if all(u not in left or u in right for u in below):
            result.add(w)
    return frozenset(result)


@lru_cache(maxsize=None)
def small_models():
    """至多 4 个点的有根模型，根在所有点之上，赋值向下单调增长"""
    found = []
    for size in range(1, 5):
        root = size - 1
        inner = list(combinations(range(root), 2))
        posets = set()
        for k in range(len(inner) + 1):
            for pairs in combinations(inner, k):
                edges = list(pairs) + [(u, root) for u in range(root)]
                posets.add(Poset.from_relation(size, edges).strict_down)
        for strict_down in posets:
            for val in product(range(4), repeat=size):
                if all(val[w] & ~val[u] == 0 for w in range(size) for u in range(size) if strict_down[w] >> u & 1):
                    found.append((strict_down, val))
    return found


def brute_force_valid(f):
    return all(len(forced(f, sd, val)) == len(val) for sd, val in small_models())


class TestParser:
    """测试公式解析"""

    def test_precedence(self):
        """测试优先级: ~ > & > | > -> / <->"""
        p1, p2, p3 = Var(1), Var(2), Var(3)
        assert parse_formula("p1 | p2 & p3") == Or(p1, And(p2, p3))
        assert parse_formula("~p1 & p2") == And(not_(p1), p2)
        assert parse_formula("p1 & p2 -> p3") == Imp(And(p1, p2), p3)

    def test_implication_right_associative(self):
        """测试蕴涵右结合"""
        assert parse_formula("p1 -> p2 -> p3") == Imp(Var(1), Imp(Var(2), Var(3)))

    def test_conjunction_left_associative(self):
        """测试合取左结合"""
        assert parse_formula("p1 & p2 & p3") == And(And(Var(1), Var(2)), Var(3))

    def test_iff_and_constants(self):
        """测试等价与常量"""
        assert parse_formula("p1 <-> p2") == iff(Var(1), Var(2))
        assert parse_formula("true") == TOP
        assert parse_formula("false") == BOT

    def test_unicode(self):
        """测试 Unicode 符号"""
        assert parse_formula("¬p1 ∧ p2 → ⊥") == parse_formula("~p1 & p2 -> false")
        assert parse_formula("p1 ∨ ⊤ ↔ p2") == parse_formula("p1 | true <-> p2")

    @pytest.mark.parametrize(
        "text,position",
        [("p1 ->", 5), ("p0", 0), ("q1", 0), ("(p1", 3), ("p1 p2", 3), ("p1 # p2", 3)],
    )
    def test_syntax_errors(self, text, position):
        """测试语法错误带有位置"""
        with pytest.raises(FormulaSyntaxError) as info:
            parse_formula(text)
        assert info.value.position == position

    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, 10_000), st.integers(1, 12))
    def test_print_parse(self, seed, size):
        """测试打印后重新解析得到同一棵语法树"""
        f = random_formula(3, 4, random.Random(seed), size=size)
        assert parse_formula(format_formula(f)) == f

    def test_format(self):
        """测试规范文本"""
        assert format_formula(parse_formula("~(p1 & p2) -> (p3 -> p1) | false")) == "~(p1 & p2) -> (p3 -> p1) | false"
        assert format_formula(TOP) == "true"


class TestStructure:
    """测试公式结构函数"""

    @pytest.mark.parametrize(
        "text,depth",
        [("p1", 0), ("false", 0), ("~p1", 1), ("~~p1", 2), ("((p1 -> p2) -> p1) -> p1", 3), ("p1 <-> p2", 1)],
    )
    def test_impl_depth(self, text, depth):
        """测试蕴涵深度"""
        assert impl_depth(parse_formula(text)) == depth

    def test_variables_and_rename(self):
        """测试变量集合与重命名"""
        f = parse_formula("p3 -> p5 | p3")
        assert variables(f) == {3, 5}
        assert rename_variables(f, {3: 1, 5: 2}) == parse_formula("p1 -> p2 | p1")

    def test_empty_folds(self):
        """测试空析取为 ⊥、空合取为 ⊤"""
        assert disjunction([]) == BOT
        assert conjunction([]) == TOP
        assert conjunction([Var(1)]) == Var(1)

    def test_simplify(self):
        """测试化简去掉 ⊥ 析取项与 ⊤ 合取项"""
        assert simplify(Or(BOT, Var(1))) == Var(1)
        assert simplify(And(Var(2), TOP)) == Var(2)
        assert simplify(Imp(Or(Var(1), BOT), And(TOP, BOT))) == Imp(Var(1), BOT)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 10_000))
    def test_simplify_preserves_value(self, seed):
        """测试化简不改变真值集"""
        m = universal(2, 1)
        f = random_formula(2, 3, random.Random(seed), size=8)
        assert eval_formula(simplify(f), m) == eval_formula(f, m)


class TestEvaluation:
    """测试在通用模型上求值"""

    def test_atoms(self):
        """测试变量与否定的真值集"""
        m = universal(1, 1)
        assert eval_formula(Var(1), m).nodes() == [1]
        assert eval_formula(parse_formula("~p1"), m).nodes() == [0]
        assert eval_formula(parse_formula("~~p1"), m).nodes() == [1, 2]
        assert eval_formula(TOP, m).is_one
        assert eval_formula(BOT, m).is_zero

    def test_variable_out_of_range(self):
        """测试变量超出模型范围"""
        with pytest.raises(VariableRangeError):
            eval_formula(Var(2), universal(1, 1))

    def test_cache(self):
        """测试求值缓存复用"""
        m = universal(2, 1)
        cache = EvaluationCache(m)
        f = parse_formula("(p1 -> p2) | (p2 -> p1)")
        first = eval_formula(f, m, cache)
        assert cache.get(f) == first.bits
        assert eval_formula(f, m, cache) == first
        other = universal(1, 1)
        assert eval_formula(Var(1), other, cache).nodes() == [1]


class TestOracle:
    """测试暴力检验器本身"""

    @pytest.mark.parametrize("text", VALID + VALID_DEEP)
    def test_valid(self, text):
        """测试重言式在小模型上都成立"""
        assert brute_force_valid(parse_formula(text))

    @pytest.mark.parametrize("text", INVALID)
    def test_invalid(self, text):
        """测试非重言式在小模型上有反例"""
        assert not brute_force_valid(parse_formula(text))


class TestDecide:
    """测试重言式判定"""

    @pytest.mark.parametrize("text", VALID)
    def test_valid(self, text):
        """测试重言式被判定为有效"""
        result = decide(parse_formula(text), 2)
        assert result.valid
        assert result.witness is None

    @pytest.mark.slow
    @pytest.mark.parametrize("text", VALID_DEEP)
    def test_valid_two_variables_depth_two(self, text):
        """测试需要 K_2^2 的两变量重言式"""
        assert decide(parse_formula(text), 2).valid

    @pytest.mark.parametrize("text", INVALID)
    def test_invalid_with_witness(self, text):
        """测试非重言式给出真实的反驳点"""
        f = parse_formula(text)
        result = decide(f, 2)
        assert not result.valid
        witness = result.witness
        mapping = {original: k + 1 for k, original in enumerate(witness.variables)}
        compact = rename_variables(f, mapping)
        assert witness.node not in eval_formula(compact, witness.model())
        assert witness.depth <= impl_depth(f)
        assert "节点" in witness.describe()

    def test_early_refutation(self):
        """测试在第 1 层即可反驳排中律"""
        result = decide(parse_formula("p1 | ~p1"), 1)
        assert result.depth == 1
        assert result.witness.node == 2

    def test_constants(self):
        """测试没有变量的公式"""
        assert decide(TOP, 1).valid
        result = decide(BOT, 1)
        assert not result.valid
        assert result.depth == 0

    def test_double_negation_shift_one_variable(self):
        """测试 ¬¬ 与蕴涵交换的单变量代入实例有效"""
        assert decide(parse_formula("~~(p1 -> ~p1) <-> (~~p1 -> ~~~p1)"), 1).valid

    def test_double_negation_shift_resource_cap(self):
        """测试两变量 ¬¬ 交换律在节点上限下干净地中止"""
        shift = parse_formula("~~(p1 -> p2) <-> (~~p1 -> ~~p2)")
        assert impl_depth(shift) == 4
        with pytest.raises(ResourceLimitError) as info:
            decide(shift, 2, limits=get_limits(node_cap=1000))
        assert info.value.level == 2

    @pytest.mark.slow
    def test_double_negation_shift_depth_two(self):
        """测试两变量 ¬¬ 交换律在 K_2^2 上没有反驳点"""
        result = decide(parse_formula("~~(p1 -> p2) <-> (~~p1 -> ~~p2)"), 2, depth=2)
        assert result.valid
        assert result.depth == 2

    def test_equivalence(self):
        """测试等价判定"""
        assert decide(parse_formula("p1 & p2"), 2, mode="equiv", other=parse_formula("p2 & p1")).valid
        assert not decide(parse_formula("p1"), 1, mode="equiv", other=parse_formula("~~p1")).valid
        assert decide(parse_formula("~p1"), 1, mode="equiv", other=parse_formula("~~~p1")).valid

    def test_equivalence_needs_other(self):
        """测试 equiv 模式缺少第二个公式"""
        with pytest.raises(PreconditionError):
            decide(Var(1), 1, mode="equiv")

    def test_variable_range(self):
        """测试变量超出 n"""
        with pytest.raises(VariableRangeError):
            decide(parse_formula("p3"), 2)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10_000))
    def test_matches_brute_force_one_variable(self, seed):
        """测试单变量随机公式的判定与暴力检验一致"""
        f = random_formula(1, 3, random.Random(seed), size=7)
        assert decide(f, 1).valid == brute_force_valid(f)


class TestDeJongh:
    """测试 de Jongh 公式"""

    @pytest.mark.parametrize("deeper", [3, 4, 5])
    def test_one_variable(self, deeper):
        """测试 n=1 时 ψ_w 定义 w↓、ψ'_w 定义余主集，在更深的层上依然成立"""
        base = universal(1, 3)
        table = DeJonghTable(base)
        m = universal(1, deeper)
        cache = EvaluationCache(m)
        for w in range(base.size):
            psi, psi_prime = table.psi(w), table.psi_prime(w)
            assert eval_formula(psi, m, cache) == principal(m, w)
            assert eval_formula(psi_prime, m, cache) == coprincipal(m, w)

    def test_two_variables(self, k2):
        """测试 n=2 深度 1 的所有节点"""
        table = DeJonghTable(k2)
        cache = EvaluationCache(k2)
        for w in range(k2.size):
            assert eval_formula(table.psi(w), k2, cache) == principal(k2, w)
            assert eval_formula(table.psi_prime(w), k2, cache) == coprincipal(k2, w)

    @pytest.mark.slow
    def test_two_variables_deeper(self, k2, k2_deep):
        """测试 K_2^1 的节点公式在 K_2^2 上依然成立"""
        table = DeJonghTable(k2)
        cache = EvaluationCache(k2_deep)
        for w in range(k2.size):
            assert eval_formula(table.psi(w), k2_deep, cache) == principal(k2_deep, w)
            assert eval_formula(table.psi_prime(w), k2_deep, cache) == coprincipal(k2_deep, w)

    @pytest.mark.parametrize("n,d", [(1, 5), (2, 1)])
    def test_depth_bounds(self, n, d):
        """测试蕴涵深度上界 2r+1 与 2r+2"""
        m = universal(n, d)
        table = DeJonghTable(m)
        for w in range(m.size):
            r = m.rank(w)
            assert impl_depth(table.psi(w)) <= 2 * r + 1
            assert impl_depth(table.psi_prime(w)) <= 2 * r + 2

    def test_single_node(self):
        """测试单个节点的 de Jongh 公式"""
        m = universal(1, 0)
        psi, psi_prime = de_jongh(1, m)
        assert eval_formula(psi, m).nodes() == [1]
        assert eval_formula(psi_prime, m).nodes() == [0]
        with pytest.raises(IndexError):
            de_jongh(2, m)
