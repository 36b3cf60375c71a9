"""
测试公共设施：包根目录加入导入路径，提供种类上下文、语料与随机类型生成器
"""

import os
import random
import sys

import pytest

PACKAGE_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, PACKAGE_ROOT)
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from config.fmo_config import FmoConfig  # noqa: E402
from core.type_parser import parse_kind  # noqa: E402
from models.types import UserVar  # noqa: E402

CORPUS_DIR = os.path.join(PACKAGE_ROOT, "examples")

TREE_C = r"\a:T. mu t:S. &{Leaf: Skip, Node: t ; ?a ; t}"
STREAM = r"\a:T. mu s:S. &{Done: Skip, More: ?a ; s}"


def corpus_path(name: str) -> str:
    return os.path.join(CORPUS_DIR, name)


def read_corpus(name: str) -> str:
    with open(corpus_path(name), "r", encoding="utf-8") as f:
        return f.read()


@pytest.fixture
def config() -> FmoConfig:
    return FmoConfig()


@pytest.fixture
def delta(config):
    """默认种类上下文，另加几个测试用的变量"""
    context = config.default_kind_context()
    context[UserVar("a")] = parse_kind("S=>S")
    context[UserVar("x")] = parse_kind("S")
    context[UserVar("y")] = parse_kind("S")
    return context


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20240917)
