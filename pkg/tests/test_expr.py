import math
import random

import pytest

from ppcsat import expr
from ppcsat.expr import (
    BinOp,
    Call,
    Const,
    DifferentiationError,
    EvalError,
    ExprSyntaxError,
    Neg,
    Var,
    compile_fn,
    differentiate,
    evaluate,
    parse,
    to_source,
    variables,
)


class TestParse:
    def test_literal_zero(self):
        assert parse("0") == Const(0.0)

    def test_example_plant_nonlinearity_tree(self):
        node = parse("-0.5*(sin(x1)+x2)")
        assert node == BinOp(
            "*", Neg(Const(0.5)), BinOp("+", Call("sin", Var("x1")), Var("x2"))
        )

    def test_power_right_associative(self):
        assert evaluate(parse("2^3^2"), {}) == 512.0

    def test_unary_minus_binds_tighter_than_mul(self):
        assert evaluate(parse("-2*3"), {}) == -6.0

    def test_power_binds_tighter_than_unary_minus(self):
        assert evaluate(parse("-2^2"), {}) == -4.0

    def test_scientific_notation(self):
        assert evaluate(parse("1.5e-3"), {}) == 1.5e-3

    def test_constants(self):
        assert evaluate(parse("pi"), {}) == math.pi
        assert evaluate(parse("e"), {}) == math.e

    def test_whitespace_insensitive(self):
        assert parse(" 1 + 2 * x ") == parse("1+2*x")

    def test_empty_input(self):
        with pytest.raises(ExprSyntaxError):
            parse("   ")

    def test_unknown_function(self):
        with pytest.raises(ExprSyntaxError, match="unknown function"):
            parse("sinh(x)")

    def test_syntax_error_carries_offset(self):
        with pytest.raises(ExprSyntaxError) as err:
            parse("1+*2")
        assert err.value.offset == 2

    def test_trailing_garbage(self):
        with pytest.raises(ExprSyntaxError):
            parse("1+2)")


class TestEvaluate:
    def test_example_nonlinearity_value(self):
        node = parse("-0.5*(sin(x1)+x2)")
        assert evaluate(node, {"x1": 1.0, "x2": 2.0}) == pytest.approx(
            -1.420735492, abs=1e-9
        )

    def test_identity(self):
        assert evaluate(parse("x1"), {"x1": 7.0}) == 7.0

    def test_example_gain_at_origin(self):
        assert evaluate(parse("3+cos(x2)"), {"x2": 0.0}) == 4.0

    def test_unbound_variable(self):
        with pytest.raises(EvalError, match="unbound"):
            evaluate(parse("x1+x2"), {"x1": 1.0})

    def test_ln_domain_error(self):
        with pytest.raises(EvalError, match="ln"):
            evaluate(parse("ln(x)"), {"x": -1.0})

    def test_division_by_zero(self):
        with pytest.raises(EvalError, match="division"):
            evaluate(parse("1/x"), {"x": 0.0})

    def test_sqrt_domain_error(self):
        with pytest.raises(EvalError, match="sqrt"):
            evaluate(parse("sqrt(x)"), {"x": -4.0})

    def test_sign(self):
        assert evaluate(parse("sign(x)"), {"x": -3.0}) == -1.0
        assert evaluate(parse("sign(x)"), {"x": 0.0}) == 0.0

    def test_pure_bit_identical(self):
        node = parse("sin(x)*exp(x/3)-x^2")
        env = {"x": 1.2345}
        assert evaluate(node, env) == evaluate(node, env)


class TestDifferentiate:
    def test_trajectory_derivative(self):
        d = differentiate(parse("0.5*sin(t)"), "t")
        for t in (0.0, 0.7, 2.1):
            assert evaluate(d, {"t": t}) == pytest.approx(0.5 * math.cos(t), abs=1e-12)

    def test_linear(self):
        d = differentiate(parse("t"), "t")
        assert evaluate(d, {"t": 123.0}) == 1.0

    def test_second_derivative(self):
        d2 = differentiate(differentiate(parse("0.5*sin(t)"), "t"), "t")
        assert evaluate(d2, {"t": math.pi / 2}) == pytest.approx(-0.5, abs=1e-12)

    def test_other_variable_is_constant(self):
        assert evaluate(differentiate(parse("y"), "t"), {"y": 5.0}) == 0.0

    def test_quotient_rule(self):
        d = differentiate(parse("x/(1+x)"), "x")
        assert evaluate(d, {"x": 2.0}) == pytest.approx(1.0 / 9.0, abs=1e-12)

    def test_power_rule(self):
        d = differentiate(parse("x^3"), "x")
        assert evaluate(d, {"x": 2.0}) == pytest.approx(12.0)

    def test_general_power(self):
        d = differentiate(parse("x^x"), "x")
        assert evaluate(d, {"x": 2.0}) == pytest.approx(4.0 * (math.log(2) + 1))

    def test_abs_rejected(self):
        with pytest.raises(DifferentiationError):
            differentiate(parse("abs(x)"), "x")

    def test_sign_rejected(self):
        with pytest.raises(DifferentiationError):
            differentiate(parse("sign(x)"), "x")


def _random_tree(rng: random.Random, depth: int):
    """Random tree over safe primitives (no domain failures on (-3, 3))."""
    if depth == 0 or rng.random() < 0.25:
        if rng.random() < 0.5:
            return Const(round(rng.uniform(-2.0, 2.0), 3))
        return Var(rng.choice(["t", "x", "y"]))
    pick = rng.random()
    if pick < 0.55:
        op = rng.choice("+-*")
        return BinOp(op, _random_tree(rng, depth - 1), _random_tree(rng, depth - 1))
    if pick < 0.85:
        func = rng.choice(["sin", "cos"])
        return Call(func, _random_tree(rng, depth - 1))
    return Neg(_random_tree(rng, depth - 1))


class TestProperties:
    def test_symbolic_derivative_matches_finite_difference(self):
        rng = random.Random(1234)
        for _ in range(1000):
            tree = _random_tree(rng, rng.randint(1, 6))
            d = differentiate(tree, "t")
            env = {name: rng.uniform(-2.0, 2.0) for name in ("t", "x", "y")}
            h = 1e-6
            hi = dict(env, t=env["t"] + h)
            lo = dict(env, t=env["t"] - h)
            fd = (evaluate(tree, hi) - evaluate(tree, lo)) / (2 * h)
            sym = evaluate(d, env)
            assert abs(sym - fd) <= 1e-5 * (1.0 + abs(sym))

    def test_print_parse_round_trip(self):
        rng = random.Random(99)
        for _ in range(300):
            tree = _random_tree(rng, rng.randint(1, 6))
            reparsed = parse(to_source(tree))
            env = {name: rng.uniform(-2.0, 2.0) for name in ("t", "x", "y")}
            assert evaluate(reparsed, env) == evaluate(tree, env)

    def test_compiled_matches_interpreter(self):
        rng = random.Random(7)
        params = ("t", "x", "y")
        for _ in range(300):
            tree = _random_tree(rng, rng.randint(1, 5))
            fn = compile_fn(tree, params)
            args = [rng.uniform(-2.0, 2.0) for _ in params]
            assert fn(*args) == evaluate(tree, dict(zip(params, args)))

    def test_variables(self):
        assert variables(parse("sin(x1)+x2*t")) == {"x1", "x2", "t"}

    def test_compile_rejects_unbound(self):
        with pytest.raises(EvalError):
            compile_fn(parse("x+z"), ("x",))
