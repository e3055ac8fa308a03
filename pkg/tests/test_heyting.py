"""有限自由 Heyting 代数 F^d_n 单元测试"""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kripkeu.core.errors import (
    AmbientMismatchError,
    DepthInsufficientError,
    PreconditionError,
    ResourceLimitError,
)
from kripkeu.core.formulas import eval_formula, parse_formula
from kripkeu.core.heyting import (
    Element,
    atoms_and_pregenerators,
    b_i_atom_set,
    classify_irreducible,
    coprincipal,
    definable_atom_classes,
    definable_generator_support,
    dual_map,
    is_join_filtering,
    level_element,
    neg,
    one,
    predecessor,
    principal,
    regular_elements,
    spectrum_check,
    subalgebra_closure,
    successor,
    supp_meet_min,
    supp_meet_min_touches_top,
    suppmin_rule_check,
    zero,
)
from kripkeu.core.models import FiniteKripkeModel
from kripkeu.core.poset import down_closure, enumerate_downsets, from_indices, is_downset, members, up_closure
from kripkeu.core.universal import submasks, universal

K1 = universal(1, 3)
K2 = universal(2, 1)


def element_of(m, raw):
    return Element._make(m, down_closure(raw & m.full, m.poset))


def elements(m):
    return st.integers(0, m.full).map(lambda raw: element_of(m, raw))


def all_elements(m):
    return [Element._make(m, bits) for bits in enumerate_downsets(m.poset)]


class TestElement:
    """测试元素的构造与比较"""

    def test_requires_downset(self):
        """测试非下集被拒绝"""
        with pytest.raises(PreconditionError):
            Element(K1, 0b100)

    def test_closure_of(self):
        """测试下闭包构造"""
        a = Element.closure_of(K1, [4])
        assert a.nodes() == [0, 1, 2, 4]

    def test_ambient_mismatch(self):
        """测试不同模型上的元素不能运算"""
        with pytest.raises(AmbientMismatchError):
            one(universal(1, 1)) & one(universal(1, 2))

    def test_constants(self):
        """测试 0 与 1"""
        assert zero(K2).is_zero
        assert one(K2).is_one
        assert len(one(K2)) == K2.size
        assert level_element(K2, 0).nodes() == [0, 1, 2, 3]


class TestHeytingLaws:
    """测试 Heyting 代数律"""

    @settings(max_examples=80, deadline=None)
    @given(elements(K2), elements(K2), elements(K2))
    def test_implication_adjunction(self, x, a, b):
        """测试 x ⊓ a ⊑ b 当且仅当 x ⊑ a → b"""
        assert ((x & a) <= b) == (x <= (a >> b))

    @settings(max_examples=80, deadline=None)
    @given(elements(K2), elements(K2), elements(K2))
    def test_minus_coadjunction(self, b, a, x):
        """测试 b − a ⊑ x 当且仅当 b ⊑ a ⊔ x"""
        assert ((b - a) <= x) == (b <= (a | x))

    @settings(max_examples=60, deadline=None)
    @given(elements(K1), elements(K1))
    def test_lattice(self, a, b):
        """测试格运算与序"""
        assert (a & b) <= a
        assert a <= (a | b)
        assert (a >> a).is_one
        assert (a & ~a).is_zero
        assert neg(neg(neg(a))) == neg(a)

    @settings(max_examples=60, deadline=None)
    @given(elements(K2), elements(K2))
    def test_results_are_downsets(self, a, b):
        """测试运算结果仍是下集"""
        for c in (a & b, a | b, a >> b, a - b, ~a):
            Element(K2, c.bits)


def brute_flags(a, smaller, larger):
    m = a.ambient
    join = zero(m)
    for b in smaller:
        join = join | b
    meet = one(m)
    for b in larger:
        meet = meet & b
    return not a.is_zero and join != a, not a.is_one and meet != a


def brute_filtering(a, nodes=None):
    """任意两个节点在 a 内有公共上界"""
    poset = a.ambient.poset
    nodes = a.nodes() if nodes is None else nodes
    return bool(nodes) and all(
        up_closure(1 << u, poset) & up_closure(1 << v, poset) & a.bits for u in nodes for v in nodes
    )


def check_against_brute_force(a, smaller, larger):
    poset = a.ambient.poset
    flags = classify_irreducible(a)
    join, meet = brute_flags(a, smaller, larger)
    assert flags.completely_join == join
    assert flags.meet == meet
    assert flags.join_filtering == brute_filtering(a)
    low = [v for v in a.nodes() if poset.rank[v] < poset.max_rank]
    assert flags.filtering_bounded == (not a.is_zero and (not low or brute_filtering(a, low)))
    if flags.completely_join:
        assert flags.join_filtering
    if flags.join_filtering:
        assert flags.filtering_bounded


class TestIrreducibility:
    """测试不可约性分类"""

    @pytest.mark.parametrize("n,depth", [(1, 0), (1, 1), (1, 2), (1, 3), (1, 4), (2, 0)])
    def test_against_brute_force(self, n, depth):
        """测试与按定义的暴力判定一致"""
        m = universal(n, depth)
        everything = all_elements(m)
        for a in everything:
            smaller = [b for b in everything if b <= a and b != a]
            larger = [b for b in everything if a <= b and b != a]
            check_against_brute_force(a, smaller, larger)

    def test_sampled_two_variables(self, k2):
        """测试 K_2^1 上抽样元素与暴力判定一致"""
        poset = k2.poset
        rng = random.Random(5)
        for _ in range(40):
            # 少数节点的下闭包: 枚举其全部子下集
            seeds = from_indices(rng.sample(range(k2.size), rng.randint(1, 3)), k2.size)
            a = Element._make(k2, down_closure(seeds, poset))
            smaller = [
                Element._make(k2, s) for s in submasks(a.bits) if s != a.bits and is_downset(s, poset)
            ]
            flags = classify_irreducible(a)
            assert flags.completely_join == brute_flags(a, smaller, [])[0]
            assert flags.join_filtering == brute_filtering(a)
            # 补集很小的元素: 枚举其全部上方下集
            top = rng.sample(list(k2.rank_range(1)), rng.randint(1, 2))
            if rng.random() < 0.3:
                top.append(rng.randrange(4))
            b = Element._make(k2, poset.full & ~up_closure(from_indices(top, k2.size), poset))
            rest = poset.full & ~b.bits
            larger = [
                Element._make(k2, b.bits | s) for s in submasks(rest) if s and is_downset(b.bits | s, poset)
            ]
            flags = classify_irreducible(b)
            assert flags.meet == brute_flags(b, [], larger)[1]
            assert flags.join_filtering == brute_filtering(b)

    def test_principal_and_coprincipal(self, k2):
        """测试主集完全并不可约，余主集交不可约"""
        for w in range(k2.size):
            assert classify_irreducible(principal(k2, w)).completely_join
            assert classify_irreducible(coprincipal(k2, w)).meet

    def test_zero_and_one(self):
        """测试 0 与 1 不可约性为假"""
        assert not classify_irreducible(zero(K2)).completely_join
        assert not classify_irreducible(one(K2)).meet

    def test_filtering_conjunction(self):
        """测试 [[p1 ∧ p2]] 是并过滤的"""
        value = eval_formula(parse_formula("p1 & p2"), K2)
        assert value.nodes() == [3]
        assert is_join_filtering(value) == (True, True)

    def test_filtering_coprincipal_meets(self, k2):
        """测试反链上余主集之交在顶层以下是并过滤的"""
        antichain = [1, 2, 3]
        for size in range(len(antichain)):
            for chosen in (antichain[:size], antichain[-size:] if size else []):
                a = one(k2)
                for z in chosen:
                    a = a & coprincipal(k2, z)
                filtering, bounded = is_join_filtering(a)
                assert bounded
                if filtering:
                    assert classify_irreducible(a).completely_join
        assert is_join_filtering(one(k2)) == (False, True)

    def test_filtering_counts_top_rank(self, k2):
        """测试顶层上两个没有公共上界的节点使精确判定失败"""
        a = principal(k2, 10) | principal(k2, 18)
        assert a.nodes() == [3, 10, 18]
        flags = classify_irreducible(a)
        assert not flags.join_filtering
        assert not flags.completely_join
        assert flags.filtering_bounded

    @pytest.mark.parametrize("depth", [0, 1])
    def test_filtering_generator_meets(self, depth):
        """测试生成元之交在顶层以下是并过滤的"""
        m = universal(2, depth)
        for text in ("p1", "p2", "p1 & p2"):
            assert is_join_filtering(eval_formula(parse_formula(text), m))[1]
        assert is_join_filtering(eval_formula(parse_formula("p1 & p2"), m)) == (True, True)

    def test_filtering_fails(self):
        """测试两个不可比较原子的并不是并过滤的"""
        a = level_element(universal(1, 1), 0)
        assert is_join_filtering(a) == (False, False)
        assert is_join_filtering(zero(K1)) == (False, False)


class TestSupports:
    """测试支撑"""

    @settings(max_examples=60, deadline=None)
    @given(elements(K2))
    def test_meet_of_coprincipals(self, a):
        """测试元素等于其 supp-min 余主集之交"""
        meet = one(K2)
        for z in members(supp_meet_min(a)):
            meet = meet & coprincipal(K2, z)
        assert meet == a

    @settings(max_examples=60, deadline=None)
    @given(elements(K2), elements(K2))
    def test_suppmin_rules(self, a, b):
        """测试 supp-min 的运算规则"""
        for op in ("join", "meet", "impl"):
            assert suppmin_rule_check(op, a, b)

    def test_touches_top(self, k2):
        """测试 supp-min 是否落在顶层"""
        assert not supp_meet_min_touches_top(coprincipal(k2, 0))
        assert supp_meet_min_touches_top(coprincipal(k2, k2.size - 1))
        assert not supp_meet_min_touches_top(one(k2))

    @pytest.mark.parametrize(
        "shallow,deep",
        [(0, 1), pytest.param(1, 2, marks=pytest.mark.slow)],
    )
    def test_suppmin_grows_with_depth(self, shallow, deep):
        """测试两个不可比较余主集之并的 supp-min 随深度严格变大"""
        sizes = []
        for depth in (shallow, deep):
            m = universal(2, depth)
            join = coprincipal(m, 1) | coprincipal(m, 2)
            sizes.append(len(members(supp_meet_min(join))))
        assert sizes[0] < sizes[1]


class TestDuality:
    """测试主集与余主集之间的对偶映射"""

    @pytest.mark.parametrize("m", [universal(1, 4), universal(2, 1)], ids=["K1^4", "K2^1"])
    def test_cap_cup(self, m):
        """测试 cap 与 cup 互逆且保序"""
        for w in range(m.size):
            x = principal(m, w)
            assert dual_map(x, "cap") == coprincipal(m, w)
            assert dual_map(coprincipal(m, w), "cup") == x
            assert predecessor(x).bits == m.poset.strict_down[w]
            assert successor(coprincipal(m, w)).bits == coprincipal(m, w).bits | (1 << w)
        for w in range(0, m.size, 3):
            for v in range(m.size):
                assert (coprincipal(m, w) <= coprincipal(m, v)) == m.poset.leq(w, v)

    def test_requires_irreducible(self):
        """测试非不可约元没有前驱"""
        with pytest.raises(PreconditionError):
            predecessor(Element._make(universal(1, 0), 0b11))
        with pytest.raises(PreconditionError):
            successor(one(K1))


class TestGenerators:
    """测试原子、生成元的序论可定义性"""

    def test_atoms(self, k2):
        """测试原子与预生成元"""
        atoms, pregen = atoms_and_pregenerators(k2)
        assert [a.nodes() for a in atoms] == [[0], [1], [2], [3]]
        assert [g.nodes() for g in pregen] == [[1], [2]]

    @pytest.mark.parametrize("i", [1, 2])
    def test_generator_support(self, k2, i):
        """测试由序数据恢复的支撑等于 [[p_i]] 在内层的部分"""
        expected = eval_formula(parse_formula(f"p{i}"), k2).bits & k2.level_index(0)
        assert definable_generator_support(i, k2) == expected

    def test_b_i_atoms(self, k2):
        """测试 B_i 为赋值含 p_i 的原子"""
        assert [a.nodes() for a in b_i_atom_set(1, k2)] == [[1], [3]]
        assert len(b_i_atom_set(1, universal(3, 1))) == 4

    def test_atom_classes(self, k2):
        """测试按私有后继个数划分的原子类"""
        classes = definable_atom_classes(k2)
        assert {k: [a.nodes()[0] for a in group] for k, group in classes.items()} == {0: [0], 1: [1, 2], 2: [3]}

    def test_depth_zero_rejected(self):
        """测试深度 0 的模型无法定义生成元"""
        with pytest.raises(DepthInsufficientError):
            definable_atom_classes(universal(2, 0))


class TestSubalgebraClosure:
    """测试子代数闭包"""

    def test_trivial(self):
        """测试只由 0 生成的子代数是 {0, 1}"""
        closure = subalgebra_closure([zero(K1)])
        assert [x.bits for x in closure] == [0, K1.full]

    def test_generated_by_variable(self):
        """测试 n=1 深度 2 时 p1 生成整个 F^2_1"""
        m = universal(1, 2)
        closure = subalgebra_closure([eval_formula(parse_formula("p1"), m)])
        assert {x.bits for x in closure} == set(enumerate_downsets(m.poset))

    def test_cap(self):
        """测试超出上限时报告资源错误"""
        with pytest.raises(ResourceLimitError):
            subalgebra_closure([eval_formula(parse_formula("p1"), universal(1, 3))], cap=3)

    def test_window_must_be_downset(self):
        """测试窗口必须向下封闭"""
        with pytest.raises(PreconditionError):
            subalgebra_closure([one(K1)], within=0b100)

    def test_window(self):
        """测试窗口闭包是完整闭包在窗口上的像"""
        m = universal(1, 3)
        gens = [principal(m, 2), coprincipal(m, 3)]
        window = m.level_index(1)
        full = {x.bits & window for x in subalgebra_closure(gens)}
        assert {x.bits for x in subalgebra_closure(gens, within=window)} == full

    def test_empty_generators(self):
        """测试空生成元列表"""
        with pytest.raises(PreconditionError):
            subalgebra_closure([])


class TestRegularElements:
    """测试正则元"""

    @pytest.mark.parametrize(
        "n,d,count",
        [(1, 2, 4), (2, 1, 16), pytest.param(2, 2, 16, marks=pytest.mark.slow)],
    )
    def test_count_and_fixed(self, n, d, count):
        """测试正则元个数为 2^(2^n) 且是 ¬¬ 的不动点"""
        found = regular_elements(universal(n, d))
        assert len(set(found)) == count
        for x in found:
            assert neg(neg(x)) == x


class TestSpectrum:
    """测试由交不可约元重建谱"""

    @pytest.mark.parametrize("d", [0, 1, 2])
    def test_one_variable(self, d):
        """测试 n=1 时谱与模型同构"""
        report = spectrum_check(universal(1, d))
        assert report.passed
        assert report.meet_irreducibles == universal(1, d).size

    def test_finite_model(self):
        """测试任意有限模型"""
        model = FiniteKripkeModel.from_relation(2, [0b11, 0b01, 0b10, 0], [(0, 3), (1, 3), (2, 3)])
        report = spectrum_check(model)
        assert report.passed, report.problems

    @pytest.mark.slow
    def test_two_variables(self, k2):
        """测试 K_2^1 的谱"""
        assert spectrum_check(k2).passed
