"""
异常类型定义

所有模块抛出的异常都继承自 FmoError，CLI 在边界处统一捕获并映射为退出码
"""

from enum import Enum
from typing import Any, Optional


class FmoError(Exception):
    """库内所有异常的基类"""


class ParseError(FmoError):
    """语法解析失败，携带行号和列号"""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.message = message
        self.line = line
        self.column = column
        location = f" (line {line}, column {column})" if line else ""
        super().__init__(f"{message}{location}")


class KindErrorReason(Enum):
    """种类检查失败原因"""
    NOT_PRE_KINDED = "not-pre-kinded"
    NON_NORMALISING = "non-normalising"
    HIGHER_KIND_RECURSION = "higher-kind-recursion"


class KindError(FmoError):
    """类型不满足种类规则"""

    def __init__(self, reason: KindErrorReason, witness: Any = None, detail: str = ""):
        self.reason = reason
        self.witness = witness
        message = reason.value
        if detail:
            message = f"{message}: {detail}"
        super().__init__(message)


class DivergenceError(FmoError):
    """规范化过程中重复遇到同一个被标记的 μ 子项"""

    def __init__(self, witness: Any):
        self.witness = witness
        super().__init__("normalisation diverges")


class NormalizationLimit(FmoError):
    """规范化步数耗尽"""

    def __init__(self, steps: int):
        self.steps = steps
        super().__init__(f"normalisation gave up after {steps} steps")


class FragmentError(FmoError):
    """类型超出文法翻译支持的片段（高阶递归）"""


class FogError(FmoError):
    """一阶文法不合法"""


class TypingError(FmoError):
    """项类型检查失败"""

    def __init__(self, message: str, binding: Optional[str] = None):
        self.binding = binding
        self.message = message
        super().__init__(message)

    def with_binding(self, binding: str) -> "TypingError":
        """附加出错的顶层绑定名"""
        if self.binding is None:
            self.binding = binding
            self.args = (f"{binding}: {self.message}",)
        return self


class UnboundVariable(TypingError):
    pass


class LinearityViolation(TypingError):
    pass


class EquivalenceUnknown(TypingError):
    pass


class LabelMismatch(TypingError):
    pass


class MissingSignature(TypingError):
    pass


class TypeMismatch(TypingError):
    pass


class RunError(FmoError):
    """程序无法运行：缺少 main 定义或 main 只是公理"""
