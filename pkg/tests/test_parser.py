import pytest

from neuroterm.syntax import (
    And,
    Assign,
    BinOp,
    Cmp,
    If,
    IntLit,
    Neg,
    Not,
    Or,
    ParseError,
    Skip,
    Var,
    While,
    parse_program,
    pretty_print,
)

from conftest import PROGRAMS, read_program


def test_countdown_shape():
    prog = parse_program("fn countdown(x) { while (x > 0) { x = x - 1; } }")
    assert prog.name == "countdown"
    assert prog.params == ("x",)
    assert prog.locals == ()
    assert prog.variables == ("x",)
    (loop,) = prog.body
    assert isinstance(loop, While)
    assert loop.cond == Cmp(">", Var("x"), IntLit(0))
    (body,) = loop.body
    assert body == Assign("x", BinOp("-", Var("x"), IntLit(1)))


def test_locals_declared_before_statements():
    prog = parse_program(read_program("gauss_sum"))
    assert prog.params == ("n",)
    assert prog.locals == ("s", "i")
    assert prog.variables == ("n", "s", "i")


def test_comma_var_list_matches_separate_declarations():
    joined = parse_program("fn f(a) { var x, y; x = a; y = x; }")
    split = parse_program("fn f(a) { var x; var y; x = a; y = x; }")
    assert joined.locals == split.locals == ("x", "y")
    assert joined.body == split.body


def test_else_if_chain_nests_right():
    prog = parse_program(
        "fn f(x) { if (x > 0) { x = 1; } else if (x < 0) { x = 2; } else { x = 3; } }"
    )
    (top,) = prog.body
    assert isinstance(top, If)
    (nested,) = top.else_body
    assert isinstance(nested, If)
    assert nested.then_body == (Assign("x", IntLit(2)),)
    assert nested.else_body == (Assign("x", IntLit(3)),)


def test_if_without_else_gets_empty_branch():
    prog = parse_program("fn f(x) { if (x > 0) { x = 0; } }")
    (top,) = prog.body
    assert top.else_body == ()


def test_boolean_connectives_and_precedence():
    prog = parse_program("fn f(x, y, z) { while (x > 0 && y > 0 || z > 0) { skip; } }")
    (loop,) = prog.body
    # && binds tighter than ||
    assert isinstance(loop.cond, Or)
    assert isinstance(loop.cond.left, And)
    assert isinstance(loop.body[0], Skip)


def test_negated_condition_and_unary_minus():
    prog = parse_program("fn f(x) { while (!(x <= 0)) { x = -x + -2; } }")
    (loop,) = prog.body
    assert isinstance(loop.cond, Not)
    assign = loop.body[0]
    assert assign.expr == BinOp("+", Neg(Var("x")), Neg(IntLit(2)))


def test_multiplication_parses():
    prog = parse_program("fn f(i, n) { while (i * i < n) { i = i + 1; } }")
    (loop,) = prog.body
    assert loop.cond == Cmp("<", BinOp("*", Var("i"), Var("i")), Var("n"))


def test_loop_ids_assigned_in_source_order():
    prog = parse_program(read_program("nested_counting"))
    loops = []

    def walk(stmts):
        for s in stmts:
            if isinstance(s, While):
                loops.append(s.loop_id)
                walk(s.body)
            elif isinstance(s, If):
                walk(s.then_body)
                walk(s.else_body)

    walk(prog.body)
    assert loops == sorted(loops)
    assert len(set(loops)) == len(loops) == 2


def test_line_comments_ignored():
    prog = parse_program("// intro\nfn f(x) { // inline\n while (x > 0) { x = x - 1; } }")
    assert prog.name == "f"


@pytest.mark.parametrize(
    "src",
    [
        "fn f(x) { y = 1; }",  # undeclared variable
        "fn f(x) { var x; }",  # shadows a parameter
        "fn f(x) { var y; var y; }",  # duplicate local
        "fn f(x) { x = 1 }",  # missing semicolon
        "fn f(x) { while x > 0 { } }",  # missing parens
        "fn f(x) { x = 1; var y; }",  # declaration after statement
        "fn f(x) { x = 1; } trailing",
        "fn f(x) { if (x) { } }",  # conditions are comparisons, not exprs
        "fn f(x { }",
        "",
    ],
)
def test_rejects_malformed(src):
    with pytest.raises(ParseError):
        parse_program(src)


def test_parse_error_carries_position():
    try:
        parse_program("fn f(x) {\n  x = 1\n}")
    except ParseError as e:
        assert e.line >= 2
    else:
        raise AssertionError("expected ParseError")


def test_pretty_print_round_trips_corpus():
    for path in sorted(PROGRAMS.glob("*.nt")):
        prog = parse_program(path.read_text())
        again = parse_program(pretty_print(prog))
        assert again == prog, path.name


def test_corpus_parses_and_names_match_files():
    files = sorted(PROGRAMS.glob("*.nt"))
    assert len(files) >= 15
    for path in files:
        prog = parse_program(path.read_text())
        assert prog.name == path.stem
