"""
项变量上下文 Γ

绑定分为线性（恰好使用一次）与非受限（可以丢弃和复制）两种。
上下文是不可变的，算法化的类型判断返回剩余的上下文。
"""

from dataclasses import dataclass, field
from typing import Dict, Iterator, Mapping, Optional, Tuple

from models.types import Type


@dataclass(frozen=True)
class Binding:
    type: Type
    linear: bool


@dataclass(frozen=True)
class TypingContext:
    bindings: Tuple[Tuple[str, Binding], ...] = ()
    _index: Dict[str, Binding] = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", dict(self.bindings))

    @classmethod
    def of(cls, entries: Mapping[str, Tuple[Type, bool]]) -> "TypingContext":
        return cls(tuple((name, Binding(t, linear)) for name, (t, linear) in entries.items()))

    def lookup(self, name: str) -> Optional[Binding]:
        return self._index.get(name)

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def __iter__(self) -> Iterator[Tuple[str, Binding]]:
        return iter(self.bindings)

    def extend(self, name: str, t: Type, linear: bool) -> "TypingContext":
        """Γ, x:T，同名的旧绑定被遮蔽"""
        kept = tuple((n, b) for n, b in self.bindings if n != name)
        return TypingContext(kept + ((name, Binding(t, linear)),))

    def remove(self, name: str) -> "TypingContext":
        return TypingContext(tuple((n, b) for n, b in self.bindings if n != name))

    def restore(self, name: str, saved: Optional[Binding]) -> "TypingContext":
        """去掉 name 的当前绑定，并放回被遮蔽的旧绑定（若有）"""
        context = self.remove(name)
        if saved is None:
            return context
        return TypingContext(context.bindings + ((name, saved),))

    def linear(self) -> Dict[str, Type]:
        return {name: binding.type for name, binding in self.bindings if binding.linear}

    def same_linear(self, other: "TypingContext") -> bool:
        return self.linear() == other.linear()
