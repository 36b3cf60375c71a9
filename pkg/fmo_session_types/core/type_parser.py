"""
类型与种类的表层语法解析

使用 lark 的 LALR 解析器。优先级由低到高：绑定（\\ mu forall） < -> < ; < 应用 < 前缀 ?/! < 原子。
μ 和 ∀ 在这里展开为常量作用于抽象，选择/记录/变体的标签在这里排序。
"""

from functools import lru_cache
from typing import List, Optional, Tuple

from lark import Lark, Token, Transformer, v_args
from lark.exceptions import UnexpectedInput, VisitError

from models.errors import FmoError, ParseError
from models.types import (
    ARROW, DUAL, END, SEMI, SKIP, Abs, ArrowK, CanonicalVar, ChoiceC, Const, ForallC, Kind,
    MsgC, MuC, Polarity, RecordC, S_KIND, T_KIND, Type, UserVar, Var, VariantC, View,
    app, arrow, choice, msg, pair, record, seq, variant,
)

TYPE_GRAMMAR = r"""
?type: binder
     | arrow_type

?binder: "\\" binder_name ":" kind "." type      -> lam
       | "mu" binder_name ":" kind "." type       -> mu
       | "forall" binder_name ":" kind "." type   -> forall

?arrow_type: seq_type "->" arrow_type   -> arrow
           | seq_type "->" binder       -> arrow
           | seq_type

?seq_type: app_type ";" seq_type   -> seq
         | app_type ";" binder     -> seq
         | app_type

?app_type: app_type prefix_type   -> tapp
         | prefix_type

?prefix_type: "?" atom_type   -> recv
            | "!" atom_type   -> send
            | atom_type

?atom_type: "Skip"                      -> skip
          | "End"                       -> end
          | "Dual"                      -> dual_const
          | NAME                        -> tvar
          | CANON                       -> canon
          | "&{" [fields] "}"           -> ext_choice
          | "+{" [fields] "}"           -> int_choice
          | "{" [fields] "}"            -> record_type
          | "<" [fields] ">"            -> variant_type
          | "(" type ")"
          | "(" type "," type ")"       -> pair_type
          | "(" ";" ")"                 -> semi_section
          | "(" "->" ")"                -> arrow_section
          | "(" "?" ")"                 -> recv_section
          | "(" "!" ")"                 -> send_section
          | "(" "&{" labels "}" ")"     -> ext_section
          | "(" "+{" labels "}" ")"     -> int_section
          | "(" "{" labels "}" ")"      -> record_section
          | "(" "<" labels ">" ")"      -> variant_section
          | "(" "mu" kind ")"           -> mu_section
          | "(" "forall" kind ")"       -> forall_section

binder_name: NAME | CANON

fields: field ("," field)*
field: NAME ":" type
labels: NAME ("," NAME)*

?kind: kind_atom "=>" kind   -> karrow
     | kind_atom

?kind_atom: "S"            -> kind_s
          | "T"            -> kind_t
          | "(" kind ")"

NAME: /[A-Za-z][A-Za-z0-9_]*/
CANON: /\$[1-9][0-9]*/

%import common.WS
%ignore WS
"""


def _check_unique(names: List[Token]) -> None:
    seen = set()
    for token in names:
        if str(token) in seen:
            raise ParseError(f"duplicate label '{token}'", token.line, token.column)
        seen.add(str(token))


@v_args(inline=True)
class TypeTransformer(Transformer):
    """把 lark 语法树转换为类型 AST"""

    def binder_name(self, token):
        if token.type == "CANON":
            return CanonicalVar(int(token[1:]))
        return UserVar(str(token))

    def lam(self, name, kind, body):
        return Abs(name, kind, body)

    def mu(self, name, kind, body):
        return app(Const(MuC(kind)), Abs(name, kind, body))

    def forall(self, name, kind, body):
        return app(Const(ForallC(kind)), Abs(name, kind, body))

    def arrow(self, domain, codomain):
        return arrow(domain, codomain)

    def seq(self, first, second):
        return seq(first, second)

    def tapp(self, fun, arg):
        return app(fun, arg)

    def recv(self, payload):
        return msg(Polarity.IN, payload)

    def send(self, payload):
        return msg(Polarity.OUT, payload)

    def skip(self):
        return SKIP

    def end(self):
        return END

    def dual_const(self):
        return DUAL

    def tvar(self, token):
        return Var(UserVar(str(token)))

    def canon(self, token):
        return Var(CanonicalVar(int(token[1:])))

    def field(self, name, body):
        return name, body

    def fields(self, *items):
        _check_unique([name for name, _ in items])
        return [(str(name), body) for name, body in items]

    def labels(self, *names):
        _check_unique(list(names))
        return tuple(sorted(str(name) for name in names))

    def ext_choice(self, items=None):
        return choice(View.EXTERNAL, items or [])

    def int_choice(self, items=None):
        return choice(View.INTERNAL, items or [])

    def record_type(self, items=None):
        return record(items or [])

    def variant_type(self, items=None):
        return variant(items or [])

    def pair_type(self, first, second):
        return pair(first, second)

    def semi_section(self):
        return SEMI

    def arrow_section(self):
        return ARROW

    def recv_section(self):
        return Const(MsgC(Polarity.IN))

    def send_section(self):
        return Const(MsgC(Polarity.OUT))

    def ext_section(self, labels):
        return Const(ChoiceC(View.EXTERNAL, labels))

    def int_section(self, labels):
        return Const(ChoiceC(View.INTERNAL, labels))

    def record_section(self, labels):
        return Const(RecordC(labels))

    def variant_section(self, labels):
        return Const(VariantC(labels))

    def mu_section(self, kind):
        return Const(MuC(kind))

    def forall_section(self, kind):
        return Const(ForallC(kind))

    def karrow(self, domain, codomain):
        return ArrowK(domain, codomain)

    def kind_s(self):
        return S_KIND

    def kind_t(self):
        return T_KIND


@lru_cache(maxsize=1)
def _type_parser() -> Lark:
    return Lark(TYPE_GRAMMAR, start=["type", "kind"], parser="lalr")


def run_parser(parser: Lark, text: str, start: str, transformer: Transformer):
    """
    解析并转换，把 lark 的异常统一为 ParseError

    Raises:
        ParseError: 语法错误或转换阶段发现的错误（如重复标签）
    """
    try:
        tree = parser.parse(text, start=start)
    except UnexpectedInput as exc:
        line = max(getattr(exc, "line", 0) or 0, 0)
        column = max(getattr(exc, "column", 0) or 0, 0)
        raise ParseError(f"unexpected input: {_describe(exc)}", line, column) from None
    try:
        return transformer.transform(tree)
    except VisitError as exc:
        if isinstance(exc.orig_exc, FmoError):
            raise exc.orig_exc from None
        raise


def _describe(exc: UnexpectedInput) -> str:
    token = getattr(exc, "token", None)
    if token is not None:
        return repr(str(token)) if str(token) else "end of input"
    char = getattr(exc, "char", None)
    if char is not None:
        return repr(char)
    return "end of input"


def parse_type(text: str) -> Type:
    """
    解析类型表层语法

    Args:
        text: 类型文本，例如 "&{Leaf: Skip, Node: b;?a;b}"

    Returns:
        类型 AST，μ/∀ 已展开，标签已排序

    Raises:
        ParseError: 语法错误或重复标签
    """
    return run_parser(_type_parser(), text, "type", TypeTransformer())


def parse_kind(text: str) -> Kind:
    """解析种类，例如 "T=>S" """
    return run_parser(_type_parser(), text, "kind", TypeTransformer())
