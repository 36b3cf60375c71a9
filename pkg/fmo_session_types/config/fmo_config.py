"""
运行配置管理模块

统一管理等价判定后端、各阶段上限、求值种子与输出格式，
默认值来自 config.yml，命令行参数可以逐项覆盖
"""

from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from typing import Any, Dict

from config.base_config import EquivalenceConfig, OutputConfig, RuntimeConfig, TypeContextConfig
from core.type_parser import parse_kind
from models.types import UserVar


class Backend(Enum):
    """等价判定后端"""
    AUTO = "auto"          # FSA → 文法 → 有界互模拟
    GRAMMAR = "grammar"
    FSA = "fsa"
    ORACLE = "oracle"


class OutputFormat(Enum):
    TEXT = "text"
    JSON = "json"


@dataclass(frozen=True)
class FmoConfig:
    """配置类 - 一次命令调用使用的全部参数"""

    backend: Backend = Backend(EquivalenceConfig.get("backend", "auto"))
    oracle_depth: int = EquivalenceConfig.get("oracle_depth", 64)
    node_cap: int = EquivalenceConfig.get("node_cap", 100_000)
    fsa_cap: int = EquivalenceConfig.get("fsa_cap", 4096)
    depth_cap: int = EquivalenceConfig.get("depth_cap", 1000)
    norm_fuel: int = EquivalenceConfig.get("norm_fuel", 100_000)
    workers: int = EquivalenceConfig.get("workers", 4)

    seed: int = RuntimeConfig.get("seed", 0)
    fuel: int = RuntimeConfig.get("fuel", 100_000)

    format: OutputFormat = OutputFormat(OutputConfig.get("format", "text"))
    explain: bool = False

    type_context: Dict[str, str] = field(default_factory=lambda: dict(TypeContextConfig))

    def validate(self) -> "FmoConfig":
        """
        检查各项上限

        Raises:
            ValueError: 任一上限不是正整数
        """
        for name in ("oracle_depth", "node_cap", "fsa_cap", "depth_cap", "norm_fuel", "workers", "fuel"):
            value = getattr(self, name)
            if not isinstance(value, int) or value <= 0:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")
        if self.seed < 0:
            raise ValueError(f"seed must be non-negative, got {self.seed}")
        return self

    def with_overrides(self, **overrides: Any) -> "FmoConfig":
        """返回替换了部分字段的新配置，值为 None 的项被忽略"""
        changes = {key: value for key, value in overrides.items() if value is not None}
        if isinstance(changes.get("backend"), str):
            changes["backend"] = Backend(changes["backend"])
        if isinstance(changes.get("format"), str):
            changes["format"] = OutputFormat(changes["format"])
        return replace(self, **changes).validate()

    @classmethod
    def from_args(cls, args) -> "FmoConfig":
        """从 argparse 的命名空间构造配置，未给出的参数取配置文件默认值"""
        names = ("backend", "oracle_depth", "node_cap", "fsa_cap", "norm_fuel", "seed", "fuel", "format")
        overrides = {name: getattr(args, name, None) for name in names}
        overrides["explain"] = getattr(args, "explain", None) or None
        return cls().with_overrides(**overrides)

    def default_kind_context(self):
        """把 type_context 解析为种类上下文 Δ"""
        return {UserVar(name): parse_kind(str(kind)) for name, kind in self.type_context.items()}

    def to_dict(self) -> Dict[str, Any]:
        """转换为字典格式，便于序列化"""
        data = asdict(self)
        data["backend"] = self.backend.value
        data["format"] = self.format.value
        return data
