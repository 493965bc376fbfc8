"""Concrete syntax: parsing `.imp` source and canonical pretty printing."""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from .lang import (
    ARITH_OPS, CMP_OPS, HOLE, RESERVED, SKIP, And, ArrayAssign, ArrayRead,
    Assign, BinOp, BoolConst, Bottom, Cmp, Hole, If, IntConst, Not, Or, Seq,
    Skip, Var, While, make_seq, normalize, seq_items,
)

HOLE_TEXT = "<?HOLE?>"

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>//[^\n]*)
  | (?P<hole><\?HOLE\?>)
  | (?P<int>[0-9]+)
  | (?P<id>[A-Za-z_][A-Za-z0-9_]*(?:\#[0-9]+)?)
  | (?P<op>:=|==|!=|<=|>=|&&|\|\||[<>!+\-*()\[\]{};])
""", re.VERBOSE)


class ParseError(Exception):
    def __init__(self, line, col, expected, found):
        self.line = line
        self.col = col
        self.expected = frozenset(expected)
        self.found = found
        exp = ", ".join(sorted(self.expected)) or "nothing"
        super().__init__(f"{line}:{col}: expected {exp}, found {found}")


@dataclass(frozen=True)
class Token:
    kind: str  # 'int' | 'id' | 'kw' | 'op' | 'hole' | 'eof'
    text: str
    line: int
    col: int


def tokenize(text: str) -> list:
    tokens = []
    pos, line, line_start = 0, 1, 0
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(line, pos - line_start + 1, {"token"}, repr(text[pos]))
        kind = m.lastgroup
        lexeme = m.group()
        if kind not in ("ws", "comment"):
            if kind == "id" and lexeme in RESERVED:
                kind = "kw"
            tokens.append(Token(kind, lexeme, line, pos - line_start + 1))
        nl = lexeme.count("\n")
        if nl:
            line += nl
            line_start = pos + lexeme.rfind("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, tokens):
        self.toks = tokens
        self.i = 0
        self.expected = set()
        self.far = 0

    # -- helpers
    def peek(self, k=0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def _note(self, what):
        if self.i > self.far:
            self.far = self.i
            self.expected = set()
        if self.i == self.far:
            self.expected.add(what)

    def at(self, text):
        tok = self.peek()
        if tok.kind in ("op", "kw") and tok.text == text:
            return True
        self._note(repr(text))
        return False

    def eat(self, text):
        if not self.at(text):
            self.fail()
        self.i += 1

    def fail(self):
        tok = self.toks[min(self.far, len(self.toks) - 1)]
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise ParseError(tok.line, tok.col, self.expected, found)

    def ident(self):
        tok = self.peek()
        if tok.kind == "id":
            self.i += 1
            return tok.text
        self._note("identifier")
        self.fail()

    # -- statements
    def program(self, closing):
        items = []
        while True:
            tok = self.peek()
            if tok.kind == "eof" and closing is None:
                break
            if closing and self.at(closing):
                break
            items.append(self.stmt())
        return make_seq(items)

    def stmt(self):
        tok = self.peek()
        if tok.kind == "hole":
            self.i += 1
            if self.at(";"):
                self.i += 1
            return HOLE
        if self.at("skip"):
            self.i += 1
            self.eat(";")
            return SKIP
        if self.at("if"):
            self.i += 1
            self.eat("(")
            cond = self.pred()
            self.eat(")")
            self.eat("{")
            then = self.program("}")
            self.eat("}")
            self.eat("else")
            self.eat("{")
            els = self.program("}")
            self.eat("}")
            return If(cond, then, els)
        if self.at("while"):
            self.i += 1
            self.eat("(")
            cond = self.pred()
            self.eat(")")
            self.eat("{")
            body = self.program("}")
            self.eat("}")
            return While(cond, body)
        if tok.kind == "kw" and tok.text == "out":
            self.i += 1
            return self._array_assign("out")
        if tok.kind == "id":
            self.i += 1
            if self.at("["):
                return self._array_assign(tok.text)
            self.eat(":=")
            rhs = self.expr()
            self.eat(";")
            return Assign(tok.text, rhs)
        self._note("statement")
        self.fail()

    def _array_assign(self, name):
        self.eat("[")
        idx = self.expr()
        self.eat("]")
        self.eat(":=")
        rhs = self.expr()
        self.eat(";")
        return ArrayAssign(name, idx, rhs)

    # -- expressions
    def expr(self):
        lhs = self.term()
        while True:
            if self.at("+"):
                op = "+"
            elif self.at("-"):
                op = "-"
            else:
                return lhs
            self.i += 1
            lhs = BinOp(op, lhs, self.term())

    def term(self):
        lhs = self.factor()
        while self.at("*"):
            self.i += 1
            lhs = BinOp("*", lhs, self.factor())
        return lhs

    def factor(self):
        tok = self.peek()
        if tok.kind == "int":
            self.i += 1
            return IntConst(int(tok.text))
        if self.at("-"):
            self.i += 1
            inner = self.factor()
            if isinstance(inner, IntConst):
                return IntConst(-inner.value)
            return BinOp("-", IntConst(0), inner)
        if self.at("("):
            self.i += 1
            e = self.expr()
            self.eat(")")
            return e
        if tok.kind == "kw" and tok.text == "out":
            self.i += 1
            self.eat("[")
            idx = self.expr()
            self.eat("]")
            return ArrayRead("out", idx)
        if tok.kind == "id":
            self.i += 1
            if self.at("["):
                self.i += 1
                idx = self.expr()
                self.eat("]")
                return ArrayRead(tok.text, idx)
            return Var(tok.text)
        self._note("expression")
        self.fail()

    # -- predicates
    def pred(self):
        lhs = self.conj()
        while self.at("||"):
            self.i += 1
            lhs = Or(lhs, self.conj())
        return lhs

    def conj(self):
        lhs = self.neg()
        while self.at("&&"):
            self.i += 1
            lhs = And(lhs, self.neg())
        return lhs

    def neg(self):
        if self.at("!"):
            self.i += 1
            return Not(self.neg())
        if self.at("true"):
            self.i += 1
            return BoolConst(True)
        if self.at("false"):
            self.i += 1
            return BoolConst(False)
        if self.at("("):
            # Either a parenthesized predicate or an expression starting with
            # "(". Try the predicate reading first and backtrack if the next
            # token shows the parenthesis belonged to an expression.
            save = self.i
            try:
                self.i += 1
                p = self.pred()
                self.eat(")")
                nxt = self.peek()
                if not (nxt.kind == "op" and (nxt.text in CMP_OPS or nxt.text in ARITH_OPS)):
                    return p
            except ParseError:
                pass
            self.i = save
        lhs = self.expr()
        tok = self.peek()
        if tok.kind == "op" and tok.text in CMP_OPS:
            self.i += 1
            return Cmp(tok.text, lhs, self.expr())
        for op in CMP_OPS:
            self._note(repr(op))
        self.fail()


def parse(text: str):
    """Parse program text into a statement tree."""
    try:
        parser = _Parser(tokenize(text))
        prog = parser.program(None)
        return prog
    except RecursionError:
        raise ParseError(0, 0, {"shallower nesting"}, "nesting too deep") from None


def parse_file(path) -> "SourceUnit":
    p = Path(path)
    text = p.read_text(encoding="utf-8")
    return SourceUnit(p, text, parse(text))


@dataclass(frozen=True)
class SourceUnit:
    path: Path
    text: str
    ast: object


# ---------------------------------------------------------------- printing

_PREC = {"+": 1, "-": 1, "*": 2}


def expr_str(e, ctx=0) -> str:
    if isinstance(e, IntConst):
        return str(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, ArrayRead):
        return f"{e.array}[{expr_str(e.index)}]"
    if isinstance(e, Bottom):
        return "BOTTOM"
    prec = _PREC[e.op]
    # left-associative: the right operand needs one more level of binding
    text = f"{expr_str(e.lhs, prec)} {e.op} {expr_str(e.rhs, prec + 1)}"
    return f"({text})" if prec < ctx else text


def pred_str(p, ctx=0) -> str:
    if isinstance(p, Cmp):
        return f"{expr_str(p.lhs)} {p.op} {expr_str(p.rhs)}"
    if isinstance(p, BoolConst):
        return "true" if p.value else "false"
    if isinstance(p, Not):
        inner = pred_str(p.arg, 3)
        if isinstance(p.arg, Cmp):
            inner = f"({inner})"
        return "!" + inner
    if isinstance(p, Or):
        text = f"{pred_str(p.lhs, 1)} || {pred_str(p.rhs, 2)}"
        return f"({text})" if ctx > 1 else text
    text = f"{pred_str(p.lhs, 2)} && {pred_str(p.rhs, 3)}"
    return f"({text})" if ctx > 2 else text


def _lines(s, depth, out, indent):
    pad = " " * (indent * depth)
    for node in seq_items(s):
        if isinstance(node, Skip):
            out.append(pad + "skip;")
        elif isinstance(node, Hole):
            out.append(pad + HOLE_TEXT)
        elif isinstance(node, Assign):
            out.append(f"{pad}{node.var} := {expr_str(node.rhs)};")
        elif isinstance(node, ArrayAssign):
            out.append(f"{pad}{node.array}[{expr_str(node.index)}] := {expr_str(node.rhs)};")
        elif isinstance(node, If):
            out.append(f"{pad}if ({pred_str(node.cond)}) {{")
            _lines(node.then, depth + 1, out, indent)
            out.append(pad + "} else {")
            _lines(node.els, depth + 1, out, indent)
            out.append(pad + "}")
        elif isinstance(node, While):
            out.append(f"{pad}while ({pred_str(node.cond)}) {{")
            _lines(node.body, depth + 1, out, indent)
            out.append(pad + "}")
        else:
            raise TypeError(f"not a statement: {node!r}")


def pretty_print(program, multiline: bool = False, indent: int = 2) -> str:
    """Canonical, skip-normalized source text.

    The default form is a single line, e.g.
    ``if (c > 0) { <?HOLE?> } else { y := 2; } <?HOLE?>``."""
    norm = normalize(program)
    lines: list = []
    _lines(norm, 0, lines, indent)
    if multiline:
        return "\n".join(lines) + "\n"
    return " ".join(line.strip() for line in lines)


def edit_str(edit) -> str:
    """``[x := 2, y := 3, skip]``: one-line entries without the final `;`."""
    return "[" + ", ".join(pretty_print(s).removesuffix(";") for s in edit) + "]"
