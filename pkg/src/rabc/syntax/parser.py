"""Hand-written lexer and recursive-descent parser for `.rabc` sources."""
from __future__ import annotations

import re
from dataclasses import dataclass

from .ast import (
    Assign, AssignCall, AssignCons, BinOp, BoolLit, BoolT, BorrowMut, BorrowShared,
    BoxE, BoxListT, Copy, Deref, Drop, Function, If, IntLit, IntT, ListT, Match, Move,
    MutRefT, Nil, Param, Pos, Program, Return, SharedRefT, Tick, UnitT, Var,
)

KEYWORDS = {
    "fn", "let", "i32", "bool", "list", "box", "unit", "mut", "tick", "return",
    "drop", "if", "else", "match", "nil", "cons", "true", "false", "copy", "move",
}

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n]+|//[^\n]*)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<sym>:=|=>|->|<=|==|[(){},;:*&+\-<])
""", re.VERBOSE)


class ParseError(Exception):
    def __init__(self, message: str, pos: Pos | None = None, expected: tuple = ()):
        self.message = message
        self.pos = pos
        self.expected = tuple(expected)
        where = f"{pos}: " if pos else ""
        exp = f" (expected {', '.join(expected)})" if expected else ""
        super().__init__(f"{where}{message}{exp}")


@dataclass(frozen=True)
class Token:
    kind: str      # "int", "ident", "kw", "sym", "eof"
    text: str
    pos: Pos


def tokenize(src: str) -> list[Token]:
    out = []
    i, line, col = 0, 1, 1
    while i < len(src):
        m = _TOKEN_RE.match(src, i)
        if not m:
            raise ParseError(f"unexpected character {src[i]!r}", Pos(line, col))
        text = m.group()
        kind = m.lastgroup
        if kind != "ws":
            if kind == "ident" and text in KEYWORDS:
                kind = "kw"
            out.append(Token(kind, text, Pos(line, col)))
        nl = text.count("\n")
        if nl:
            line += nl
            col = len(text) - text.rfind("\n")
        else:
            col += len(text)
        i = m.end()
    out.append(Token("eof", "", Pos(line, col)))
    return out


_PREC = {"<": 1, "<=": 1, "==": 1, "+": 2, "-": 2, "*": 3}


class Parser:
    def __init__(self, src: str):
        self.toks = tokenize(src)
        self.i = 0

    # token helpers
    def peek(self, k: int = 0) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, text: str) -> bool:
        t = self.peek()
        return t.kind in ("sym", "kw") and t.text == text

    def next(self) -> Token:
        t = self.peek()
        self.i += 1
        return t

    def expect(self, text: str) -> Token:
        t = self.peek()
        if t.kind in ("sym", "kw") and t.text == text:
            return self.next()
        raise ParseError(f"unexpected {self._show(t)}", t.pos, (repr(text),))

    def ident(self) -> Token:
        t = self.peek()
        if t.kind != "ident":
            raise ParseError(f"unexpected {self._show(t)}", t.pos, ("identifier",))
        return self.next()

    @staticmethod
    def _show(t: Token) -> str:
        return "end of input" if t.kind == "eof" else repr(t.text)

    # grammar
    def program(self) -> Program:
        fns = []
        while self.peek().kind != "eof":
            fns.append(self.function())
        return Program(tuple(fns))

    def function(self) -> Function:
        start = self.expect("fn").pos
        name = self.ident().text
        self.expect("(")
        params = []
        if not self.at(")"):
            while True:
                t = self.ident()
                self.expect(":")
                params.append(Param(t.text, self.type_(), t.pos))
                if not self.at(","):
                    break
                self.next()
        self.expect(")")
        self.expect("->")
        ret = self.type_()
        self.expect("{")
        decls = []
        while self.at("let"):
            self.next()
            t = self.ident()
            self.expect(":")
            decls.append(Param(t.text, self.type_(), t.pos))
            self.expect(";")
        body = self.stmts()
        self.expect("}")
        return Function(name, tuple(params), tuple(decls), ret, body, start)

    def type_(self):
        t = self.peek()
        if self.at("&"):
            self.next()
            if self.at("mut"):
                self.next()
                return MutRefT(self.type_())
            return SharedRefT(self.type_())
        if t.kind == "kw":
            if t.text == "i32":
                self.next()
                return IntT()
            if t.text == "bool":
                self.next()
                return BoolT()
            if t.text == "unit":
                self.next()
                return UnitT()
            if t.text == "list":
                self.next()
                return ListT()
            if t.text == "box":
                self.next()
                self.expect("list")
                return BoxListT()
        raise ParseError(f"unexpected {self._show(t)}", t.pos,
                         ("i32", "bool", "unit", "list", "box list", "&", "&mut"))

    def block(self) -> tuple:
        self.expect("{")
        if self.at("let"):
            raise ParseError("declarations are only allowed at the top of a function body",
                             self.peek().pos)
        body = self.stmts()
        self.expect("}")
        return body

    def stmts(self) -> tuple:
        out = []
        while not self.at("}"):
            s = self.stmt()
            out.append(s)
            if isinstance(s, (If, Match)):
                if self.at(";"):
                    self.next()
            else:
                self.expect(";")
        return tuple(out)

    def stmt(self):
        t = self.peek()
        if t.kind == "kw":
            if t.text == "tick":
                self.next()
                self.expect("(")
                neg = False
                if self.at("-"):
                    self.next()
                    neg = True
                n = self.peek()
                if n.kind != "int":
                    raise ParseError(f"unexpected {self._show(n)}", n.pos, ("integer",))
                self.next()
                self.expect(")")
                v = int(n.text)
                return Tick(-v if neg else v, t.pos)
            if t.text == "return":
                self.next()
                return Return(t.pos)
            if t.text == "drop":
                self.next()
                return Drop(self.place(), t.pos)
            if t.text == "if":
                self.next()
                cond = self.place()
                then = self.block()
                self.expect("else")
                return If(cond, then, self.block(), t.pos)
            if t.text == "match":
                return self.match()
        if t.kind == "ident" or self.at("*"):
            p = self.place()
            self.expect(":=")
            if self.at("cons"):
                self.next()
                self.expect("(")
                h = self.expr()
                self.expect(",")
                tl = self.expr()
                self.expect(")")
                return AssignCons(p, h, tl, t.pos)
            if self.peek().kind == "ident":
                fn = self.next().text
                self.expect("(")
                args = []
                if not self.at(")"):
                    while True:
                        args.append(self.expr())
                        if not self.at(","):
                            break
                        self.next()
                self.expect(")")
                return AssignCall(p, fn, tuple(args), t.pos)
            return Assign(p, self.expr(), t.pos)
        raise ParseError(f"unexpected {self._show(t)}", t.pos,
                         ("statement",))

    def match(self):
        start = self.expect("match").pos
        scrut = self.place()
        self.expect("{")
        self.expect("nil")
        self.expect("=>")
        nil_arm = self.block()
        self.expect(",")
        self.expect("cons")
        self.expect("(")
        hd = self.ident().text
        self.expect(",")
        tl = self.ident().text
        self.expect(")")
        self.expect("=>")
        cons_arm = self.block()
        if self.at(","):
            self.next()
        self.expect("}")
        return Match(scrut, nil_arm, hd, tl, cons_arm, start)

    def place(self):
        t = self.peek()
        if self.at("*"):
            self.next()
            return Deref(self.place(), t.pos)
        return Var(self.ident().text, t.pos)

    def expr(self, min_prec: int = 1):
        left = self.atom()
        while True:
            t = self.peek()
            prec = _PREC.get(t.text) if t.kind == "sym" else None
            if prec is None or prec < min_prec:
                return left
            self.next()
            right = self.expr(prec + 1)
            left = BinOp(t.text, left, right, t.pos)

    def atom(self):
        t = self.peek()
        if t.kind == "int":
            self.next()
            return IntLit(int(t.text), t.pos)
        if self.at("-") and self.peek(1).kind == "int":
            self.next()
            return IntLit(-int(self.next().text), t.pos)
        if self.at("("):
            self.next()
            e = self.expr()
            self.expect(")")
            return e
        if t.kind == "kw":
            if t.text in ("true", "false"):
                self.next()
                return BoolLit(t.text == "true", t.pos)
            if t.text == "nil":
                self.next()
                return Nil(t.pos)
            if t.text == "box":
                self.next()
                self.expect("(")
                e = self.expr()
                self.expect(")")
                return BoxE(e, t.pos)
            if t.text == "copy":
                self.next()
                return Copy(self.place(), t.pos)
            if t.text == "move":
                self.next()
                return Move(self.place(), t.pos)
        if self.at("&"):
            self.next()
            if self.at("mut"):
                self.next()
                return BorrowMut(self.place(), t.pos)
            return BorrowShared(self.place(), t.pos)
        raise ParseError(f"unexpected {self._show(t)}", t.pos,
                         ("integer", "true", "false", "nil", "box", "copy", "move", "&", "&mut"))


def parse_program(src: str) -> Program:
    return Parser(src).program()
