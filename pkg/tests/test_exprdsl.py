import math

import numpy as np
import pytest

from oscdeform.errors import (
    EvalDomainError,
    ExprSyntaxError,
    UnboundNameError,
    UnknownFunctionError,
)
from oscdeform.exprdsl import (
    Add,
    Call,
    Mul,
    Neg,
    Num,
    Param,
    Pow,
    Var,
    depends_on,
    differentiate,
    evaluate,
    parameters,
    parse,
    substitute_params,
    to_str,
    variables,
)


def test_parse_number_forms():
    assert evaluate(parse("3"), {}) == 3.0
    assert evaluate(parse("3.5"), {}) == 3.5
    assert evaluate(parse(".5"), {}) == 0.5
    assert evaluate(parse("2e-3"), {}) == 2e-3
    assert evaluate(parse("1.25E2"), {}) == 125.0


def test_parse_precedence_and_associativity():
    # left-assoc chains
    assert evaluate(parse("10 - 4 - 3"), {}) == 3.0
    assert evaluate(parse("24/4/2"), {}) == 3.0
    # * binds tighter than +
    assert evaluate(parse("2 + 3*4"), {}) == 14.0
    # ^ binds tighter than *, and is right-associative
    assert evaluate(parse("2*3^2"), {}) == 18.0
    assert evaluate(parse("2^3^2"), {}) == 512.0


def test_unary_minus_binds_before_power():
    # the grammar reads '-x^2' as (-x)^2
    assert evaluate(parse("-x^2"), {"x": 3.0}) == 9.0
    assert evaluate(parse("-(x^2)"), {"x": 3.0}) == -9.0
    assert evaluate(parse("x^-1"), {"x": 4.0}) == 0.25


def test_variables_vs_parameters():
    e = parse("mu*x^2 + nu - v*sin(t)")
    assert variables(e) == {"x", "v", "t"}
    assert parameters(e) == {"mu", "nu"}
    assert depends_on(e, "x")
    assert not depends_on(e, "u")


def test_all_functions_evaluate():
    vals = {
        "sin": math.sin(0.7),
        "cos": math.cos(0.7),
        "tan": math.tan(0.7),
        "cot": math.cos(0.7) / math.sin(0.7),
        "exp": math.exp(0.7),
        "ln": math.log(0.7),
        "sqrt": math.sqrt(0.7),
        "abs": 0.7,
        "asinh": math.asinh(0.7),
        "sinh": math.sinh(0.7),
        "cosh": math.cosh(0.7),
        "tanh": math.tanh(0.7),
    }
    for name, expected in vals.items():
        got = evaluate(parse("%s(z)" % name), {"z": 0.7})
        assert got == pytest.approx(expected, rel=0, abs=0)


def test_syntax_errors_carry_offsets():
    with pytest.raises(ExprSyntaxError) as exc:
        parse("x + * y")
    assert exc.value.offset == 4
    with pytest.raises(ExprSyntaxError):
        parse("(x + y")
    with pytest.raises(ExprSyntaxError):
        parse("x @ y")
    with pytest.raises(UnknownFunctionError):
        parse("gamma(x)")


def test_unbound_name():
    with pytest.raises(UnboundNameError) as exc:
        evaluate(parse("mu*x"), {"x": 2.0})
    assert exc.value.name == "mu"


def test_domain_errors():
    with pytest.raises(EvalDomainError):
        evaluate(parse("ln(x)"), {"x": 0.0})
    with pytest.raises(EvalDomainError):
        evaluate(parse("sqrt(x)"), {"x": -1.0})
    with pytest.raises(EvalDomainError):
        evaluate(parse("1/x"), {"x": 0.0})
    with pytest.raises(EvalDomainError):
        evaluate(parse("cot(t)"), {"t": 0.0})
    with pytest.raises(EvalDomainError):
        evaluate(parse("x^0.5"), {"x": -2.0})
    with pytest.raises(EvalDomainError):
        evaluate(parse("x^p"), {"x": 0.0, "p": -1.0})


def test_integer_exponent_of_negative_base_allowed():
    assert evaluate(parse("x^3"), {"x": -2.0}) == -8.0
    assert evaluate(parse("x^-2"), {"x": -2.0}) == 0.25


def _check_derivative(text, var, bindings, h=1e-6):
    e = parse(text)
    d = differentiate(e, var)
    up = dict(bindings)
    dn = dict(bindings)
    up[var] = bindings[var] + h
    dn[var] = bindings[var] - h
    fd = (evaluate(e, up) - evaluate(e, dn)) / (2 * h)
    sym = evaluate(d, bindings)
    assert sym == pytest.approx(fd, rel=1e-7, abs=1e-7)


def test_differentiate_matches_finite_differences():
    rng = np.random.default_rng(20240817)
    cases = [
        ("x^3 + 2*x*v - sin(t)", "x"),
        ("x^3 + 2*x*v - sin(t)", "v"),
        ("cos(w*t)*exp(-t)", "t"),
        ("cot(t + 0.3)", "t"),
        ("sqrt(1 + x^2)", "x"),
        ("asinh(2*x)/x", "x"),
        ("tanh(x)*sinh(x) + cosh(x)", "x"),
        ("ln(x^2 + 1)", "x"),
        ("x^v", "x"),
        ("x^v", "v"),
        ("abs(x)^3", "x"),
        ("tan(x/4)", "x"),
    ]
    for text, var in cases:
        for _ in range(4):
            bindings = {
                "t": float(rng.uniform(0.2, 1.2)),
                "x": float(rng.uniform(0.5, 2.0)),
                "v": float(rng.uniform(0.5, 2.0)),
                "w": 2.0,
            }
            _check_derivative(text, var, bindings)


def test_differentiate_constant_and_param():
    assert evaluate(differentiate(parse("mu"), "x"), {"mu": 3.0}) == 0.0
    assert evaluate(differentiate(parse("7"), "t"), {}) == 0.0
    with pytest.raises(ValueError):
        differentiate(parse("x"), "mu")


def test_folding_keeps_trees_small():
    # d/dx of a t-only expression collapses to the literal zero node
    d = differentiate(parse("sin(w*t) + cos(t)^2"), "x")
    assert isinstance(d, Num) and d.value == 0.0
    d2 = differentiate(parse("x"), "x")
    assert isinstance(d2, Num) and d2.value == 1.0


def test_print_round_trip_exact_evaluation():
    rng = np.random.default_rng(11)
    texts = [
        "x - (y - z)",
        "x - y - z",
        "a/(b*c)",
        "a/b*c",
        "(x^2)^3",
        "x^2^3",
        "-x^2",
        "-(x^2)",
        "2^-2",
        "-x - -y",
        "(a + b)*(a - b)",
        "sin(x)^2 + cos(x)^2",
        "1/(1 + cot(t)^2)",
        "x*y/(z + 1) - 4.25e-2*x",
        "sqrt(abs(x - y))",
    ]
    for text in texts:
        e = parse(text)
        printed = to_str(e)
        e2 = parse(printed)
        for _ in range(5):
            b = {
                "x": float(rng.uniform(0.2, 2.0)),
                "y": float(rng.uniform(0.2, 2.0)),
                "z": float(rng.uniform(0.2, 2.0)),
                "a": float(rng.uniform(0.2, 2.0)),
                "b": float(rng.uniform(0.2, 2.0)),
                "c": float(rng.uniform(0.2, 2.0)),
                "t": float(rng.uniform(0.2, 1.2)),
            }
            assert evaluate(e, b) == evaluate(e2, b)


def test_print_round_trip_random_trees():
    rng = np.random.default_rng(7)

    def rand_tree(depth):
        if depth == 0:
            k = rng.integers(0, 3)
            if k == 0:
                return Num(round(float(rng.uniform(-3, 3)), 3))
            if k == 1:
                return Var("x")
            return Param("k1")
        kind = rng.integers(0, 6)
        if kind == 0:
            return Neg(rand_tree(depth - 1))
        if kind == 1:
            return Call("sin", rand_tree(depth - 1))
        a = rand_tree(depth - 1)
        b = rand_tree(depth - 1)
        if kind == 2:
            return Add(a, b)
        if kind == 3:
            return Mul(a, b)
        if kind == 4:
            return Pow(a, Num(float(rng.integers(0, 4))))
        return Pow(Call("abs", a), Num(round(float(rng.uniform(0.5, 2.0)), 2)))

    for _ in range(200):
        e = rand_tree(int(rng.integers(1, 5)))
        printed = to_str(e)
        e2 = parse(printed)
        b = {"x": float(rng.uniform(0.3, 1.7)), "k1": 1.25}
        try:
            want = evaluate(e, b)
        except EvalDomainError:
            continue
        assert evaluate(e2, b) == want, printed


def test_substitute_params():
    e = parse("mu*x^2 + nu*v")
    e2 = substitute_params(e, {"mu": 2.0, "nu": -1.5})
    assert parameters(e2) == set()
    assert evaluate(e2, {"x": 3.0, "v": 2.0}) == 2.0 * 9.0 - 1.5 * 2.0
    # partial substitution leaves the rest alone
    e3 = substitute_params(e, {"mu": 2.0})
    assert parameters(e3) == {"nu"}


def test_str_dunder_is_printer():
    e = parse("x + 2*v")
    assert str(e) == to_str(e)
