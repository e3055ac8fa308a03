import os
import sys

import pytest

sys.path.insert(0, os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "src"))

from kripkeu.core.universal import universal  # noqa: E402


@pytest.fixture(scope="session")
def k1():
    """K_1^4"""
    return universal(1, 4)


@pytest.fixture(scope="session")
def k2():
    """K_2^1"""
    return universal(2, 1)


@pytest.fixture(scope="session")
def k2_deep():
    """K_2^2，构造约需十秒，只在 slow 测试中使用"""
    return universal(2, 2)
