import numpy as np
import pytest

from cauchyleray.expr import ExpressionError, compile_expression, form_from_expressions, parse_index

Z = np.array([[0.3 + 0.4j, -0.5 + 0.1j], [1.0 + 0j, 2j]])


@pytest.mark.parametrize("text,expected", [
    ("z1*z2", Z[:, 0] * Z[:, 1]),
    ("zb1", np.conj(Z[:, 0])),
    ("conj(z2)**2", np.conj(Z[:, 1]) ** 2),
    ("abs2(z1) + x2 - y2", np.abs(Z[:, 0]) ** 2 + Z[:, 1].real - Z[:, 1].imag),
    ("2j*z1 - 1.5", 2j * Z[:, 0] - 1.5),
    ("abs(z1)**0.5", np.abs(Z[:, 0]) ** 0.5),
    ("exp(i*pi)", np.full(2, -1 + 0j)),
    ("re(z2) + im(z2)", Z[:, 1].real + Z[:, 1].imag),
    ("z1^2", Z[:, 0] ** 2),
])
def test_expressions(text, expected):
    assert np.allclose(compile_expression(text, 2)(Z), expected, atol=1e-14)


@pytest.mark.parametrize("text", ["__import__('os')", "z3", "foo(z1)", "z1.real", "[z1]", "",
                                  "lambda: 1", "z1 if z2 else 1", "'a'"])
def test_rejected(text):
    with pytest.raises(ExpressionError):
        compile_expression(text, 2)


def test_negative_integer_power():
    f = compile_expression("z1**-2", 2)
    assert np.allclose(f(Z), Z[:, 0] ** -2.0)


def test_form_from_expressions_sign_and_layout():
    phi = form_from_expressions(2, 1, {"1": "z2", "2": "zb1"})
    v = phi(Z)
    assert np.allclose(v[:, 0], Z[:, 1]) and np.allclose(v[:, 1], np.conj(Z[:, 0]))
    psi = form_from_expressions(2, 2, {"2-1": "1"})
    assert np.allclose(psi(Z), -1)
    lst = form_from_expressions(2, 1, ["1", "2"])
    assert np.allclose(lst(Z), [[1, 2], [1, 2]])


def test_form_errors():
    with pytest.raises(ExpressionError):
        form_from_expressions(2, 1, {"1-2": "1"})
    with pytest.raises(ExpressionError):
        form_from_expressions(2, 1, "z1")
    with pytest.raises(ExpressionError):
        parse_index("3", 2)
    assert parse_index("0", 2) == ()
