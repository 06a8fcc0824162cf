"""Abstract syntax and concrete parsing for the .nt mini-language.

A program is a single function over mathematical (unbounded) integers:

    fn name(p1, p2) {
      var l1, l2;          // optional local declarations, hoisted, default 0
      ...statements...
    }

Statements are assignments, if/else, while, and skip.  Conditions are
comparisons combined with !, &&, || -- a bare expression is not a condition.
Expressions are +, -, * over integer literals and variables.
"""

from __future__ import annotations

from dataclasses import dataclass, field


class ParseError(Exception):
    """Raised on any lexical, syntactic, or name-resolution error."""

    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {msg}")
        self.line = line
        self.col = col


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class IntLit:
    value: int


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - *
    left: "Expr"
    right: "Expr"


Expr = IntLit | Var | Neg | BinOp


@dataclass(frozen=True)
class Cmp:
    op: str  # one of < <= > >= == !=
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Not:
    operand: "Cond"


@dataclass(frozen=True)
class And:
    left: "Cond"
    right: "Cond"


@dataclass(frozen=True)
class Or:
    left: "Cond"
    right: "Cond"


Cond = Cmp | Not | And | Or


@dataclass(frozen=True)
class Assign:
    var: str
    expr: Expr


@dataclass(frozen=True)
class If:
    cond: Cond
    then_body: tuple["Stmt", ...]
    else_body: tuple["Stmt", ...]


@dataclass(frozen=True)
class While:
    cond: Cond
    body: tuple["Stmt", ...]
    loop_id: int  # unique per program, assigned in source order


@dataclass(frozen=True)
class Skip:
    pass


Stmt = Assign | If | While | Skip


@dataclass(frozen=True)
class Program:
    name: str
    params: tuple[str, ...]
    locals: tuple[str, ...]
    body: tuple[Stmt, ...]

    @property
    def variables(self) -> tuple[str, ...]:
        """All variables in observation order: params first, then locals."""
        return self.params + self.locals


# ---------------------------------------------------------------------------
# Lexer

_KEYWORDS = {"fn", "var", "while", "if", "else", "skip"}
_TWO_CHAR = {"<=", ">=", "==", "!=", "&&", "||"}
_ONE_CHAR = set("(){},;=<>!+-*")


@dataclass
class _Tok:
    kind: str  # 'ident' | 'int' | 'kw' | 'op' | 'eof'
    text: str
    line: int
    col: int


def _lex(src: str) -> list[_Tok]:
    toks: list[_Tok] = []
    i, line, col = 0, 1, 1
    n = len(src)
    while i < n:
        c = src[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if src.startswith("//", i):
            while i < n and src[i] != "\n":
                i += 1
            continue
        start_line, start_col = line, col
        if c.isdigit():
            j = i
            while j < n and src[j].isdigit():
                j += 1
            toks.append(_Tok("int", src[i:j], start_line, start_col))
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (src[j].isalnum() or src[j] == "_"):
                j += 1
            text = src[i:j]
            toks.append(_Tok("kw" if text in _KEYWORDS else "ident", text, start_line, start_col))
            col += j - i
            i = j
            continue
        if src[i : i + 2] in _TWO_CHAR:
            toks.append(_Tok("op", src[i : i + 2], start_line, start_col))
            i += 2
            col += 2
            continue
        if c in _ONE_CHAR:
            toks.append(_Tok("op", c, start_line, start_col))
            i += 1
            col += 1
            continue
        raise ParseError(f"unexpected character {c!r}", line, col)
    toks.append(_Tok("eof", "", line, col))
    return toks


# ---------------------------------------------------------------------------
# Parser (recursive descent; parenthesized conditions are disambiguated from
# parenthesized expressions by backtracking, which is cheap at this scale)


class _Parser:
    def __init__(self, toks: list[_Tok]):
        self.toks = toks
        self.pos = 0
        self.next_loop_id = 0

    def peek(self) -> _Tok:
        return self.toks[self.pos]

    def take(self) -> _Tok:
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def expect(self, text: str) -> _Tok:
        t = self.peek()
        if t.text != text or t.kind == "eof":
            raise ParseError(f"expected {text!r}, found {t.text or 'end of input'!r}", t.line, t.col)
        return self.take()

    def expect_ident(self) -> _Tok:
        t = self.peek()
        if t.kind != "ident":
            raise ParseError(f"expected identifier, found {t.text or 'end of input'!r}", t.line, t.col)
        return self.take()

    # program ------------------------------------------------------------

    def program(self) -> Program:
        self.expect("fn")
        name = self.expect_ident().text
        self.expect("(")
        params: list[str] = []
        seen: dict[str, _Tok] = {}
        if self.peek().text != ")":
            while True:
                t = self.expect_ident()
                if t.text in seen:
                    raise ParseError(f"duplicate variable declaration {t.text!r}", t.line, t.col)
                seen[t.text] = t
                params.append(t.text)
                if self.peek().text != ",":
                    break
                self.take()
        self.expect(")")
        self.expect("{")
        locals_: list[str] = []
        while self.peek().text == "var":
            self.take()
            while True:
                t = self.expect_ident()
                if t.text in seen:
                    raise ParseError(f"duplicate variable declaration {t.text!r}", t.line, t.col)
                seen[t.text] = t
                locals_.append(t.text)
                if self.peek().text != ",":
                    break
                self.take()
            self.expect(";")
        body = self.stmt_seq()
        self.expect("}")
        t = self.peek()
        if t.kind != "eof":
            raise ParseError(f"trailing input after program: {t.text!r}", t.line, t.col)
        prog = Program(name, tuple(params), tuple(locals_), body)
        _check_names(prog, set(seen))
        return prog

    def stmt_seq(self) -> tuple[Stmt, ...]:
        out: list[Stmt] = []
        while True:
            t = self.peek()
            if t.text == "}" or t.kind == "eof":
                break
            out.append(self.stmt())
        return tuple(out)

    def stmt(self) -> Stmt:
        t = self.peek()
        if t.text == "skip":
            self.take()
            self.expect(";")
            return Skip()
        if t.text == "while":
            self.take()
            loop_id = self.next_loop_id
            self.next_loop_id += 1
            self.expect("(")
            cond = self.cond()
            self.expect(")")
            body = self.block()
            return While(cond, body, loop_id)
        if t.text == "if":
            self.take()
            self.expect("(")
            cond = self.cond()
            self.expect(")")
            then_body = self.block()
            else_body: tuple[Stmt, ...] = ()
            if self.peek().text == "else":
                self.take()
                if self.peek().text == "if":  # else-if chains nest directly
                    else_body = (self.stmt(),)
                else:
                    else_body = self.block()
            return If(cond, then_body, else_body)
        if t.text == "var":
            raise ParseError("var declarations must precede all statements", t.line, t.col)
        if t.kind == "ident":
            name = self.take().text
            self.expect("=")
            e = self.expr()
            self.expect(";")
            return Assign(name, e)
        raise ParseError(f"expected a statement, found {t.text or 'end of input'!r}", t.line, t.col)

    def block(self) -> tuple[Stmt, ...]:
        self.expect("{")
        body = self.stmt_seq()
        self.expect("}")
        return body

    # conditions ----------------------------------------------------------

    def cond(self) -> Cond:
        left = self.and_cond()
        while self.peek().text == "||":
            self.take()
            left = Or(left, self.and_cond())
        return left

    def and_cond(self) -> Cond:
        left = self.atom_cond()
        while self.peek().text == "&&":
            self.take()
            left = And(left, self.atom_cond())
        return left

    def atom_cond(self) -> Cond:
        t = self.peek()
        if t.text == "!":
            self.take()
            return Not(self.atom_cond())
        if t.text == "(":
            # try '(' cond ')' first; fall back to a parenthesized expression
            # opening a comparison
            save = self.pos
            self.take()
            try:
                inner = self.cond()
                self.expect(")")
                return inner
            except ParseError:
                self.pos = save
        return self.comparison()

    def comparison(self) -> Cond:
        left = self.expr()
        t = self.peek()
        if t.text not in ("<", "<=", ">", ">=", "==", "!="):
            raise ParseError(
                f"expected comparison operator, found {t.text or 'end of input'!r}", t.line, t.col
            )
        op = self.take().text
        right = self.expr()
        return Cmp(op, left, right)

    # expressions ---------------------------------------------------------

    def expr(self) -> Expr:
        left = self.term()
        while self.peek().text in ("+", "-"):
            op = self.take().text
            left = BinOp(op, left, self.term())
        return left

    def term(self) -> Expr:
        left = self.factor()
        while self.peek().text == "*":
            self.take()
            left = BinOp("*", left, self.factor())
        return left

    def factor(self) -> Expr:
        t = self.peek()
        if t.text == "-":
            self.take()
            return Neg(self.factor())
        if t.text == "(":
            self.take()
            e = self.expr()
            self.expect(")")
            return e
        if t.kind == "int":
            self.take()
            return IntLit(int(t.text))
        if t.kind == "ident":
            self.take()
            return Var(t.text)
        raise ParseError(f"expected expression, found {t.text or 'end of input'!r}", t.line, t.col)


def _check_names(prog: Program, declared: set[str]) -> None:
    def expr_vars(e: Expr):
        match e:
            case Var(name):
                yield name
            case Neg(x):
                yield from expr_vars(x)
            case BinOp(_, l, r):
                yield from expr_vars(l)
                yield from expr_vars(r)
            case IntLit(_):
                return

    def cond_vars(c: Cond):
        match c:
            case Cmp(_, l, r):
                yield from expr_vars(l)
                yield from expr_vars(r)
            case Not(x):
                yield from cond_vars(x)
            case And(l, r) | Or(l, r):
                yield from cond_vars(l)
                yield from cond_vars(r)

    def walk(stmts: tuple[Stmt, ...]):
        for s in stmts:
            match s:
                case Assign(var, e):
                    yield var
                    yield from expr_vars(e)
                case If(c, t, f):
                    yield from cond_vars(c)
                    yield from walk(t)
                    yield from walk(f)
                case While(c, b, _):
                    yield from cond_vars(c)
                    yield from walk(b)
                case Skip():
                    continue

    for name in walk(prog.body):
        if name not in declared:
            raise ParseError(f"reference to undeclared variable {name!r}", 0, 0)


def parse_program(src: str) -> Program:
    """Parse source text into a Program; raises ParseError with line:col."""
    return _Parser(_lex(src)).program()


# ---------------------------------------------------------------------------
# Pretty printer.  Emits canonical source that re-parses to a structurally
# identical AST (loop ids are re-assigned in the same source order).

_EXPR_PREC = {"+": 1, "-": 1, "*": 2}


def _fmt_expr(e: Expr, parent_prec: int = 0, right_side: bool = False) -> str:
    match e:
        case IntLit(v):
            return str(v)
        case Var(name):
            return name
        case Neg(x):
            inner = _fmt_expr(x, 3)
            if isinstance(x, (IntLit, Var)):
                return f"-{inner}"
            return f"-({_fmt_expr(x, 0)})"
        case BinOp(op, l, r):
            prec = _EXPR_PREC[op]
            s = f"{_fmt_expr(l, prec)} {op} {_fmt_expr(r, prec, right_side=True)}"
            # - and * are left-associative; the right operand of equal
            # precedence needs parens to survive a round trip
            if prec < parent_prec or (right_side and prec == parent_prec):
                return f"({s})"
            return s
    raise AssertionError(e)


def _fmt_cond(c: Cond, parent_prec: int = 0) -> str:
    # precedence: || = 1, && = 2, ! = 3, comparisons are atomic
    match c:
        case Cmp(op, l, r):
            return f"{_fmt_expr(l)} {op} {_fmt_expr(r)}"
        case Not(x):
            if isinstance(x, Not):
                return f"!{_fmt_cond(x, 3)}"
            return f"!({_fmt_cond(x, 0)})"
        case And(l, r):
            s = f"{_fmt_cond(l, 2)} && {_fmt_cond(r, 2)}"
            return f"({s})" if parent_prec > 2 else s
        case Or(l, r):
            s = f"{_fmt_cond(l, 1)} || {_fmt_cond(r, 1)}"
            return f"({s})" if parent_prec > 1 else s
    raise AssertionError(c)


def _fmt_block(stmts: tuple[Stmt, ...], indent: int) -> list[str]:
    pad = "  " * indent
    lines: list[str] = []
    for s in stmts:
        match s:
            case Skip():
                lines.append(f"{pad}skip;")
            case Assign(var, e):
                lines.append(f"{pad}{var} = {_fmt_expr(e)};")
            case If(c, t, f):
                if not t and not f:
                    lines.append(f"{pad}if ({_fmt_cond(c)}) {{ }}")
                    continue
                head = f"{pad}if ({_fmt_cond(c)}) {{"
                if not t:
                    head = f"{pad}if ({_fmt_cond(c)}) {{ }}"
                    lines.append(head + " else {")
                    lines.extend(_fmt_block(f, indent + 1))
                    lines.append(f"{pad}}}")
                    continue
                lines.append(head)
                lines.extend(_fmt_block(t, indent + 1))
                if f:
                    lines.append(f"{pad}}} else {{")
                    lines.extend(_fmt_block(f, indent + 1))
                lines.append(f"{pad}}}")
            case While(c, b, _):
                if not b:
                    lines.append(f"{pad}while ({_fmt_cond(c)}) {{ }}")
                    continue
                lines.append(f"{pad}while ({_fmt_cond(c)}) {{")
                lines.extend(_fmt_block(b, indent + 1))
                lines.append(f"{pad}}}")
    return lines


def pretty_print(prog: Program) -> str:
    """Render canonical source text (stable 2-space indentation)."""
    params = ", ".join(prog.params)
    if not prog.body and not prog.locals:
        return f"fn {prog.name}({params}){{ }}\n"
    lines = [f"fn {prog.name}({params}){{"]
    if prog.locals:
        lines.append("  var " + ", ".join(prog.locals) + ";")
    lines.extend(_fmt_block(prog.body, 1))
    lines.append("}")
    return "\n".join(lines) + "\n"
