"""poset 单元测试"""

from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kripkeu.core.errors import InvalidPosetError, ResourceLimitError
from kripkeu.core.poset import (
    Poset,
    count_downsets,
    down_closure,
    enumerate_downsets,
    extremal,
    from_indices,
    is_antichain,
    is_downset,
    members,
    up_closure,
)

DIAMOND = [(0, 1), (0, 2), (1, 3), (2, 3)]


def brute_force_downsets(p: Poset) -> set:
    return {s for s in range(1 << p.size) if is_downset(s, p)}


relations = st.lists(
    st.tuples(st.integers(0, 5), st.integers(0, 5)).filter(lambda pair: pair[0] < pair[1]),
    max_size=10,
)


class TestBitmaps:
    """测试位图辅助函数"""

    def test_members_ascending(self):
        """测试成员按升序返回"""
        assert members(0) == []
        assert members(0b101001) == [0, 3, 5]

    def test_from_indices(self):
        """测试由编号构造位图"""
        assert from_indices([0, 3, 5], 6) == 0b101001
        assert from_indices([], 4) == 0

    def test_from_indices_out_of_range(self):
        """测试编号越界"""
        with pytest.raises(IndexError):
            from_indices([4], 4)

    def test_members_negative(self):
        """测试负数集合"""
        with pytest.raises(ValueError):
            members(-1)


class TestPosetConstruction:
    """测试偏序集构造与秩"""

    def test_chain_ranks(self):
        """测试链的秩"""
        p = Poset.from_relation(4, [(0, 1), (1, 2), (2, 3)])
        assert p.rank == (0, 1, 2, 3)
        assert p.strict_down[3] == 0b0111
        assert p == Poset.chain(4)

    def test_diamond_ranks(self):
        """测试菱形的秩与覆盖关系"""
        p = Poset.from_relation(4, DIAMOND)
        assert p.rank == (0, 1, 1, 2)
        assert p.lower_covers[3] == 0b0110
        assert p.max_rank == 2

    def test_cycle_rejected(self):
        """测试含环关系被拒绝"""
        with pytest.raises(InvalidPosetError):
            Poset.from_relation(3, [(0, 1), (1, 2), (2, 0)])

    def test_non_transitive_rejected(self):
        """测试不传递的下集映射被拒绝"""
        with pytest.raises(InvalidPosetError):
            Poset.from_strict_down([0, 0b001, 0b010])

    def test_reflexive_rejected(self):
        """测试元素严格小于自身被拒绝"""
        with pytest.raises(InvalidPosetError):
            Poset.from_strict_down([0b1])

    def test_empty_poset(self):
        """测试空偏序集"""
        p = Poset.from_strict_down([])
        assert p.size == 0
        assert p.max_rank == -1
        assert list(enumerate_downsets(p)) == [0]


class TestClosures:
    """测试上下闭包与极值元"""

    def test_down_and_up(self):
        """测试菱形上的闭包"""
        p = Poset.from_relation(4, DIAMOND)
        assert down_closure(0b1000, p) == 0b1111
        assert down_closure(0b0010, p) == 0b0011
        assert up_closure(0b0001, p) == 0b1111
        assert up_closure(0b0100, p) == 0b1100
        assert up_closure(0, p) == 0

    def test_extremal(self):
        """测试极小元与极大元"""
        p = Poset.from_relation(4, DIAMOND)
        assert extremal(0b0111, p, "max") == 0b0110
        assert extremal(0b1110, p, "min") == 0b0110
        assert extremal(0, p, "min") == 0

    def test_antichain(self):
        """测试反链判定"""
        p = Poset.from_relation(4, DIAMOND)
        assert is_antichain(0b0110, p)
        assert not is_antichain(0b0011, p)

    def test_out_of_range_set(self):
        """测试越界集合"""
        p = Poset.antichain(2)
        with pytest.raises(IndexError):
            down_closure(0b100, p)


class TestEnumerateDownsets:
    """测试下集枚举"""

    @pytest.mark.parametrize("size", [0, 1, 3, 6])
    def test_antichain_count(self, size):
        """测试反链的下集个数为 2^k"""
        assert count_downsets(Poset.antichain(size)) == 1 << size

    @pytest.mark.parametrize("size", [1, 4, 7])
    def test_chain_count(self, size):
        """测试链的下集个数为 k+1"""
        assert count_downsets(Poset.chain(size)) == size + 1

    def test_diamond(self):
        """测试菱形的六个下集"""
        p = Poset.from_relation(4, DIAMOND)
        found = list(enumerate_downsets(p))
        assert sorted(found) == sorted([0, 0b0001, 0b0011, 0b0101, 0b0111, 0b1111])
        assert len(found) == len(set(found))

    def test_predicate(self):
        """测试带谓词的枚举"""
        p = Poset.antichain(3)
        found = set(enumerate_downsets(p, lambda s: bool(s & 0b100)))
        assert found == {0b100, 0b101, 0b110, 0b111}

    def test_limit(self):
        """测试超出上限时报告资源错误"""
        with pytest.raises(ResourceLimitError) as info:
            list(enumerate_downsets(Poset.antichain(5), limit=10))
        assert info.value.counts == (10,)

    @settings(max_examples=60, deadline=None)
    @given(relations)
    def test_matches_brute_force(self, pairs):
        """测试枚举结果与暴力检查一致且不重复"""
        p = Poset.from_relation(6, pairs)
        found = list(enumerate_downsets(p))
        assert len(found) == len(set(found))
        assert set(found) == brute_force_downsets(p)

    @settings(max_examples=40, deadline=None)
    @given(relations)
    def test_ranks_are_foundation_ranks(self, pairs):
        """测试秩等于 1 + 下方元素的最大秩"""
        p = Poset.from_relation(6, pairs)
        for v in range(p.size):
            below = members(p.strict_down[v])
            expected = 1 + max(p.rank[u] for u in below) if below else 0
            assert p.rank[v] == expected
        for u, v in combinations(range(p.size), 2):
            if p.leq(u, v) and u != v:
                assert p.rank[u] < p.rank[v]
