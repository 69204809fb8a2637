"""A small parser for group-ring expressions such as ``"2 - t - t^-1"``.

Grammar::

    expr     := ['+' | '-'] term (('+' | '-') term)*
    term     := power (['*'] power)*          # juxtaposition multiplies
    power    := primary ('^' exponent)*
    exponent := '*' | ['-'] INT | '(' ['-'] INT ')'
    primary  := NUMBER | NAME | '(' expr ')'

``x^*`` is the involution.  Names are the model's generators (``t`` or
``t1..td`` for lattices, ``a b c`` for the Heisenberg group, ``g<i>`` and ``e``
for table groups); ``i`` is the imaginary unit.
"""

from __future__ import annotations

import re

from .errors import ConfigError
from .groups import GroupModel
from .ring import RingElement, involution

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+\.\d*(?:[eE][-+]?\d+)?|\.\d+(?:[eE][-+]?\d+)?|\d+(?:[eE][-+]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*^()]))"
)


def _tokenize(text: str) -> list[tuple[str, str]]:
    pos = 0
    out = []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ConfigError(f"unexpected character at position {pos} in {text!r}")
        kind = m.lastgroup
        out.append((kind, m.group(kind)))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text: str, model: GroupModel):
        self.text = text
        self.model = model
        self.gens = model.generators()
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self) -> tuple[str, str] | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, value: str | None = None) -> tuple[str, str]:
        tok = self.peek()
        if tok is None or (value is not None and tok[1] != value):
            want = value or "a token"
            raise ConfigError(f"expected {want} in {self.text!r}")
        self.i += 1
        return tok

    def parse(self) -> RingElement:
        if not self.toks:
            raise ConfigError("empty expression")
        x = self.expr()
        if self.peek() is not None:
            raise ConfigError(f"unexpected {self.peek()[1]!r} in {self.text!r}")
        return x

    def expr(self) -> RingElement:
        sign = 1
        if self.peek() and self.peek()[1] in "+-":
            sign = -1 if self.take()[1] == "-" else 1
        x = self.term() * sign
        while self.peek() and self.peek()[1] in "+-":
            op = self.take()[1]
            y = self.term()
            x = x + y if op == "+" else x - y
        return x

    def _starts_primary(self) -> bool:
        tok = self.peek()
        return tok is not None and (tok[0] in ("num", "name") or tok[1] == "(")

    def term(self) -> RingElement:
        x = self.power()
        while True:
            if self.peek() and self.peek()[1] == "*":
                self.take()
                x = x * self.power()
            elif self._starts_primary():
                x = x * self.power()
            else:
                return x

    def power(self) -> RingElement:
        x = self.primary()
        while self.peek() and self.peek()[1] == "^":
            self.take()
            tok = self.peek()
            if tok and tok[1] == "*":
                self.take()
                x = involution(x)
                continue
            paren = bool(tok and tok[1] == "(")
            if paren:
                self.take()
            neg = bool(self.peek() and self.peek()[1] == "-")
            if neg:
                self.take()
            kind, val = self.take()
            if kind != "num" or not val.isdigit():
                raise ConfigError(f"exponent must be an integer or '*' in {self.text!r}")
            if paren:
                self.take(")")
            x = x ** (-int(val) if neg else int(val))
        return x

    def primary(self) -> RingElement:
        kind, val = self.take()
        if kind == "num":
            return RingElement.one(self.model) * float(val)
        if kind == "name":
            if val in self.gens:
                return RingElement.monomial(self.model, self.gens[val])
            if val == "i":
                return RingElement.one(self.model) * 1j
            raise ConfigError(f"unknown generator {val!r}; known: {sorted(self.gens)}")
        if val == "(":
            x = self.expr()
            self.take(")")
            return x
        raise ConfigError(f"unexpected {val!r} in {self.text!r}")


def parse_element(text: str, model: GroupModel) -> RingElement:
    """Compile an expression to an element of the group ring of ``model``."""
    return _Parser(text, model).parse()
