import math

import numpy as np
import pytest

from expression_corpus import CORPUS, MALFORMED

from conefix.errors import (
    EvaluationError,
    ExpressionSyntaxError,
    UnknownIdentifierError,
)
from conefix.expressions import (
    BinOp,
    Call,
    Neg,
    Num,
    Var,
    eval_array,
    eval_node,
    parse_expression,
    unparse,
)


class TestParsing:
    def test_successor_ast_shape(self):
        assert parse_expression("x+1") == BinOp("+", Var(), Num(1.0))

    def test_scaled_exponential_ast_shape(self):
        assert parse_expression("2*exp(-x)") == BinOp("*", Num(2.0), Call("exp", Neg(Var())))

    def test_power_right_associative(self):
        assert parse_expression("2^3^2") == BinOp("^", Num(2.0), BinOp("^", Num(3.0), Num(2.0)))

    def test_unary_minus_binds_looser_than_power(self):
        assert parse_expression("-x^2") == Neg(BinOp("^", Var(), Num(2.0)))

    def test_double_negation(self):
        assert parse_expression("--x") == Neg(Neg(Var()))

    def test_whitespace_ignored(self):
        assert parse_expression(" x  + 1 ") == parse_expression("x+1")

    @pytest.mark.parametrize("text,pos", MALFORMED)
    def test_malformed_inputs_carry_position(self, text, pos):
        with pytest.raises(ExpressionSyntaxError) as exc:
            parse_expression(text)
        assert exc.value.position == pos

    def test_unknown_identifier(self):
        with pytest.raises(UnknownIdentifierError) as exc:
            parse_expression("foo(2)")
        assert exc.value.position == 1

    def test_unknown_character(self):
        with pytest.raises(ExpressionSyntaxError) as exc:
            parse_expression("x + $")
        assert exc.value.position == 5

    def test_empty_input(self):
        with pytest.raises(ExpressionSyntaxError):
            parse_expression("   ")


class TestEvaluation:
    @pytest.mark.parametrize("text,x,expected", CORPUS)
    def test_corpus_against_independent_values(self, text, x, expected):
        got = eval_node(parse_expression(text), x)
        assert got == pytest.approx(expected, abs=1e-12)

    def test_division_by_zero(self):
        with pytest.raises(EvaluationError):
            eval_node(parse_expression("1/x"), 0.0)

    def test_log_of_nonpositive(self):
        with pytest.raises(EvaluationError):
            eval_node(parse_expression("log(x)"), -1.0)
        with pytest.raises(EvaluationError):
            eval_node(parse_expression("log(x)"), 0.0)

    def test_sqrt_of_negative(self):
        with pytest.raises(EvaluationError):
            eval_node(parse_expression("sqrt(x)"), -4.0)

    def test_exp_overflow(self):
        with pytest.raises(EvaluationError):
            eval_node(parse_expression("exp(x)"), 1e4)

    def test_zero_to_negative_power(self):
        with pytest.raises(EvaluationError):
            eval_node(parse_expression("x^-1"), 0.0)

    def test_negative_base_fractional_power(self):
        with pytest.raises(EvaluationError):
            eval_node(parse_expression("x^0.5"), -2.0)

    def test_errors_carry_the_point(self):
        with pytest.raises(EvaluationError) as exc:
            eval_node(parse_expression("1/x"), 0.0)
        assert exc.value.x == 0.0


class TestArrayEvaluation:
    @pytest.mark.parametrize("text,x,expected", CORPUS)
    def test_matches_scalar_eval(self, text, x, expected):
        node = parse_expression(text)
        out = eval_array(node, np.array([x, x]))
        assert out[0] == eval_node(node, x)

    def test_vectorized_grid(self):
        # numpy's exp may differ from math.exp by an ulp; allow exactly that
        node = parse_expression("exp(-x)")
        xs = np.linspace(-2, 2, 101)
        out = eval_array(node, xs)
        scalar = np.array([eval_node(node, float(v)) for v in xs])
        np.testing.assert_allclose(out, scalar, rtol=1e-15)

    def test_error_carries_offending_point(self):
        node = parse_expression("log(x)")
        with pytest.raises(EvaluationError) as exc:
            eval_array(node, np.array([1.0, 2.0, -3.0]))
        assert exc.value.x == -3.0


class TestUnparse:
    @pytest.mark.parametrize("text,x,expected", CORPUS)
    def test_roundtrip_on_corpus(self, text, x, expected):
        node = parse_expression(text)
        assert parse_expression(unparse(node)) == node

    def test_minimal_parentheses(self):
        assert unparse(parse_expression("(x+1)*2")) == "(x+1.0)*2.0"
        assert unparse(parse_expression("x+1*2")) == "x+1.0*2.0"

    def test_roundtrip_on_random_trees(self):
        rng = np.random.default_rng(12)

        def gen(depth):
            if depth == 0 or rng.random() < 0.3:
                return Var() if rng.random() < 0.5 else Num(float(rng.integers(0, 9)))
            pick = rng.random()
            if pick < 0.55:
                op = ["+", "-", "*", "/", "^"][rng.integers(0, 5)]
                return BinOp(op, gen(depth - 1), gen(depth - 1))
            if pick < 0.75:
                return Neg(gen(depth - 1))
            fn = ["exp", "log", "sin", "cos", "abs", "sqrt"][rng.integers(0, 6)]
            return Call(fn, gen(depth - 1))

        for _ in range(400):
            node = gen(5)
            assert parse_expression(unparse(node)) == node
