import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from singdet import expr as ex
from singdet import _kernels as K
from singdet.errors import ParseError


def ev(src, x):
    return float(ex.evaluate(ex.parse(src), x))


@pytest.mark.parametrize("src,x,val", [
    ("0", 0.7, 0.0),
    ("x^2 - 1", 0.5, -0.75),
    ("sin(x)*exp(-x)", 1.0, math.sin(1.0) * math.exp(-1.0)),
    ("-x^2", 3.0, -9.0),
    ("2^3^2", 0.0, 512.0),
    ("2^-1", 0.0, 0.5),
    ("1 - 2 - 3", 0.0, -4.0),
    ("8 / 4 / 2", 0.0, 1.0),
    ("sqrt(x) + log(x)", 4.0, 2.0 + math.log(4.0)),
    ("2*pi*x", 0.5, math.pi),
    ("1e-3*x", 2.0, 2e-3),
    ("+x", 2.0, 2.0),
    ("cos(x)^2 + sin(x)^2", 0.37, 1.0),
])
def test_evaluate(src, x, val):
    assert abs(ev(src, x) - val) <= 1e-15 * max(1.0, abs(val))


def test_example_closed_form():
    assert abs(ev("sin(x)*exp(-x)", 1.0) - 0.3095598757) < 1e-10


@pytest.mark.parametrize("src,pos", [
    ("x+", 2), ("", 0), ("2*(x", 4), ("foo(x)", 0), ("x $ 2", 2), ("sin x", 4),
    ("(x))", 3), ("\u00a0x+", 4),
])
def test_parse_errors_carry_byte_offsets(src, pos):
    with pytest.raises(ParseError) as info:
        ex.parse(src)
    assert info.value.position == pos
    assert isinstance(info.value, ValueError)


def test_unknown_identifier_message():
    with pytest.raises(ParseError, match="unknown identifier 'y'"):
        ex.parse("x + y")


def test_vectorised_evaluation():
    xs = np.linspace(0.1, 1.0, 7)
    np.testing.assert_allclose(ex.evaluate(ex.parse("x*exp(x)"), xs), xs * np.exp(xs), rtol=1e-15)


@pytest.mark.parametrize("src", ["x^2*sin(x)", "exp(-x)/(1+x)", "sqrt(1+x^2)", "log(2+x)^3",
                                 "x^0.5", "cos(3*x)-x", "1/x", "x^x"])
def test_symbolic_derivative_matches_finite_difference(src):
    node = ex.parse(src)
    d = ex.derivative(node)
    for x in (0.3, 0.7, 1.1):
        h = 1e-5
        fd = (ex.evaluate(node, x + h) - ex.evaluate(node, x - h)) / (2 * h)
        assert abs(float(ex.evaluate(d, x)) - fd) <= 1e-8 * max(1.0, abs(fd))


@pytest.mark.parametrize("src", ["x^2*sin(x)", "exp(-x)/(1+x)", "sqrt(1+x^2)", "x^-3 + x^0.5",
                                 "-(x - 2)^5", "log(x)*cos(x)", "pi*x", "x^2.5 - 3"])
def test_compiled_program_matches_tree(src):
    node = ex.parse(src)
    code, arg = ex.compile_program(node)
    xs = np.linspace(0.05, 1.5, 31)
    np.testing.assert_allclose(K.eval_program_array(code, arg, xs), ex.evaluate(node, xs),
                               rtol=1e-14, atol=1e-300)


def test_constant_detection():
    assert ex.is_const(ex.parse("2*pi/3"))
    assert not ex.is_const(ex.parse("2*x"))


# ---------------------------------------------------------------- round trip

_leaf = st.one_of(st.just("x"), st.just("pi"),
                  st.integers(0, 999).map(str),
                  st.floats(0, 1e6, allow_nan=False, allow_infinity=False).map(repr))


def _grow(children):
    return st.one_of(
        st.tuples(children, st.sampled_from("+-*/^"), children).map(
            lambda t: f"{t[0]} {t[1]} {t[2]}"),
        children.map(lambda c: f"-{c}"),
        children.map(lambda c: f"({c})"),
        st.tuples(st.sampled_from(ex.FUNCTIONS), children).map(lambda t: f"{t[0]}({t[1]})"),
    )


expressions = st.recursive(_leaf, _grow, max_leaves=12)


@settings(max_examples=300, deadline=None)
@given(expressions)
def test_parse_serialize_parse_is_idempotent(src):
    tree = ex.parse(src)
    text = ex.serialize(tree)
    assert ex.parse(text) == tree
    assert ex.serialize(ex.parse(text)) == text


@settings(max_examples=200, deadline=None)
@given(expressions, st.floats(0.05, 1.0))
def test_serialized_evaluates_identically(src, x):
    a = ex.evaluate(ex.parse(src), x)
    b = ex.evaluate(ex.parse(ex.serialize(ex.parse(src))), x)
    assert (np.isnan(a) and np.isnan(b)) or a == b


def test_serialize_minimal_parentheses():
    assert ex.serialize(ex.parse("((x) + (2*x))")) == "x+2*x"
    assert ex.serialize(ex.parse("(x - 1) - (x - 2)")) == "x-1-(x-2)"
    assert ex.serialize(ex.parse("(2^3)^2")) == "(2^3)^2"
    assert ex.serialize(ex.parse("-(x^2)")) == "-x^2"
