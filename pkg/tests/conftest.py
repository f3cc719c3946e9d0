import os
import sys

import pytest

# 测试直接从 src 导入，与 setup.py 的 package_dir 一致
SRC_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "src")
if SRC_DIR not in sys.path:
    sys.path.insert(0, SRC_DIR)

from quadrature import gauss_hermite_rule  # noqa: E402
from targets import make_target  # noqa: E402


@pytest.fixture(scope="session")
def rule200():
    return gauss_hermite_rule(200)


@pytest.fixture(scope="session")
def rule60():
    return gauss_hermite_rule(60)


@pytest.fixture
def sign():
    return make_target("sign")


@pytest.fixture
def sigmoid():
    return make_target("sigmoid")
