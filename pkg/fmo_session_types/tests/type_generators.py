"""
随机生成封闭、种类为 S 的会话类型

生成的类型只含 Int/Bool 载荷、Skip、End、顺序组合、二元选择、Dual
以及尾递归的 μ，保证规范化终止且状态空间有限。
"""

import random
from typing import Tuple

from models.types import (
    END, S_KIND, SKIP, Polarity, Type, View, choice, dual, msg, mu, seq, var,
)

PAYLOADS = (var("Int"), var("Bool"))


def message(rng: random.Random) -> Type:
    polarity = rng.choice((Polarity.IN, Polarity.OUT))
    return msg(polarity, rng.choice(PAYLOADS))


def session(rng: random.Random, size: int = 4) -> Type:
    """大小不超过 size 的有限会话类型"""
    if size <= 1:
        return rng.choice((SKIP, END, message(rng), message(rng)))
    shape = rng.randrange(5)
    if shape == 0:
        split = rng.randint(1, size - 1)
        return seq(session(rng, split), session(rng, size - split))
    if shape == 1:
        view = rng.choice((View.EXTERNAL, View.INTERNAL))
        return choice(view, {"A": session(rng, size - 1), "B": session(rng, size // 2)})
    if shape == 2:
        return dual(session(rng, size - 1))
    if shape == 3:
        return stream(rng)
    return seq(message(rng), session(rng, size - 1))


def stream(rng: random.Random) -> Type:
    """μs:S. ⊙{Done: Skip, More: ♯P ; s}"""
    view = rng.choice((View.EXTERNAL, View.INTERNAL))
    body = choice(view, {"Done": SKIP, "More": seq(message(rng), var("s"))})
    return mu("s", S_KIND, body)


def equivalent_variant(rng: random.Random, t: Type) -> Type:
    """按公理改写出一个与 t 互模拟的类型"""
    rewrite = rng.randrange(4)
    if rewrite == 0:
        return seq(SKIP, t)
    if rewrite == 1:
        return seq(t, SKIP)
    if rewrite == 2:
        return dual(dual(t))
    return seq(seq(SKIP, t), SKIP)


def session_pair(rng: random.Random, size: int = 4) -> Tuple[Type, Type]:
    """一半概率给出等价对，其余为独立生成的两个类型"""
    t = session(rng, size)
    if rng.random() < 0.5:
        return t, equivalent_variant(rng, t)
    return t, session(rng, size)
