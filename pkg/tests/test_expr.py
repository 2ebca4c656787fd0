"""Expression parser and evaluator."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tractorlab import expr


def test_parse_add_pow():
    tree = expr.parse("1 + x0^2")
    assert tree == expr.BinOp("+", expr.Const(1.0), expr.Pow(expr.Coord(0), 2))


def test_parse_functions():
    tree = expr.parse("sin(x1)*exp(-x0)")
    assert tree == expr.BinOp(
        "*", expr.Call("sin", expr.Coord(1)), expr.Call("exp", expr.Neg(expr.Coord(0)))
    )


def test_syntax_error_offset():
    with pytest.raises(expr.ExprSyntaxError) as err:
        expr.parse("x0 +")
    assert err.value.offset == 4


def test_unknown_identifier():
    with pytest.raises(expr.UnknownIdentifierError):
        expr.parse("foo + 1")


def test_empty_and_malformed():
    with pytest.raises(expr.ExprSyntaxError):
        expr.parse("   ")
    with pytest.raises(expr.ExprSyntaxError):
        expr.parse("(x0")
    with pytest.raises(expr.ExprSyntaxError):
        expr.parse("x0^x1")  # integer exponents only
    with pytest.raises(expr.ExprSyntaxError):
        expr.parse("exp(x0, x1)")


def test_precedence():
    assert expr.parse("-x0^2") == expr.Neg(expr.Pow(expr.Coord(0), 2))
    assert expr.parse("2*x0 + 1") == expr.BinOp(
        "+", expr.BinOp("*", expr.Const(2.0), expr.Coord(0)), expr.Const(1.0)
    )
    # left associativity
    assert expr.parse("1 - 2 - 3") == expr.BinOp(
        "-", expr.BinOp("-", expr.Const(1.0), expr.Const(2.0)), expr.Const(3.0)
    )


def _leaf():
    return st.one_of(
        st.integers(0, 3).map(expr.Coord),
        st.floats(0, 10, allow_nan=False).map(lambda v: expr.Const(round(v, 3))),
    )


def _tree():
    return st.recursive(
        _leaf(),
        lambda children: st.one_of(
            st.tuples(st.sampled_from("+-*/"), children, children).map(
                lambda t: expr.BinOp(t[0], t[1], t[2])
            ),
            st.tuples(children, st.integers(0, 4)).map(lambda t: expr.Pow(t[0], t[1])),
            children.map(expr.Neg),
            st.tuples(st.sampled_from(expr.FUNCTIONS), children).map(
                lambda t: expr.Call(t[0], t[1])
            ),
        ),
        max_leaves=25,
    )


@given(_tree())
@settings(max_examples=200, deadline=None)
def test_roundtrip(tree):
    printed = expr.to_string(tree)
    assert expr.parse(printed) == tree


def test_eval_product():
    j = expr.evaluate(expr.parse("x0*x1"), (2.0, 3.0), 1)
    assert j.value == 6.0
    assert j.partial((1, 0)) == 3.0
    assert j.partial((0, 1)) == 2.0


def test_eval_exp_series():
    j = expr.evaluate(expr.parse("exp(x0)"), (0.0,), 3)
    assert np.allclose(j.coeffs, [1, 1, 0.5, 1 / 6])


def test_eval_domain_error_names_subexpression():
    with pytest.raises(expr.ExprEvalError) as err:
        expr.evaluate(expr.parse("ln(x0)"), (0.0,), 2)
    assert "ln(x0)" in str(err.value)


def test_eval_coordinate_out_of_range():
    with pytest.raises(expr.ExprError):
        expr.evaluate(expr.parse("x5"), (0.0, 0.0), 1)


def test_polynomial_builder_roundtrips():
    coeffs = {(0, 0): -0.5, (1, 0): 2.0, (1, 2): -1.25}
    tree = expr.polynomial(coeffs)
    assert expr.parse(expr.to_string(tree)) == tree
    j = expr.evaluate(tree, (0.5, -1.0), 2)
    assert j.value == pytest.approx(-0.5 + 2 * 0.5 - 1.25 * 0.5 * 1.0)
