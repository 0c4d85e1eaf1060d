import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fwsystem.errors import ParseError
from fwsystem.initdata import evaluate_constant, init_expression, periodic_gaussian, slope_profile
from fwsystem.spectral import Grid

G = Grid(np.pi, 64)


def test_zero():
    assert np.all(init_expression("0", G).values == 0.0)


def test_trig_expression():
    v = init_expression("1 + 0.5*cos(2*x)", G).values
    assert np.max(np.abs(v - (1 + 0.5 * np.cos(2 * G.x)))) < 1e-15


@pytest.mark.parametrize("expr,val", [
    ("2^3", 8.0), ("-2^2", -4.0), ("2^-1", 0.5), ("(1+2)*3", 9.0), ("1 - 2 - 3", -4.0),
    ("8/2/2", 2.0), ("4*pi", 4 * np.pi), ("exp(0) + sin(0)", 1.0), ("1e-3 * 2", 2e-3), (".5", 0.5),
])
def test_constants(expr, val):
    assert evaluate_constant(expr) == pytest.approx(val, rel=1e-15)


@pytest.mark.parametrize("expr,pos", [("1 +", 3), ("sin(x", 5), ("foo(1)", 0), ("1 $ 2", 2), ("", 0),
                                      ("2 3", 2), ("gauss(x, 1)", 0), ("gauss(0, -1)", 0)])
def test_parse_errors_report_position(expr, pos):
    with pytest.raises(ParseError) as exc:
        init_expression(expr, G)
    assert exc.value.position == pos


def test_constant_rejects_x():
    with pytest.raises(ParseError):
        evaluate_constant("x + 1")


@pytest.mark.parametrize("L", [np.pi, 4 * np.pi])
def test_gauss_images_converge(L):
    g = Grid(L, 256)
    vals, n, tail = periodic_gaussian(g.x, 0.0, 0.5, L)
    assert tail < 1e-14 and n >= 1
    v = init_expression("gauss(0, 0.5)", g).values
    assert np.array_equal(v, vals)
    assert v[np.argmin(np.abs(g.x))] == pytest.approx(1.0, abs=1e-14)


def test_wide_gauss_needs_many_images():
    _, n, tail = periodic_gaussian(G.x, 0.0, 20.0, np.pi)
    assert n > 10 and tail < 1e-14


@settings(max_examples=40, deadline=None)
@given(x0=st.floats(-10, 10), w=st.floats(0.05, 3.0))
def test_gauss_periodic_and_shift_consistent(x0, w):
    a, _, _ = periodic_gaussian(G.x, x0, w, np.pi)
    b, _, _ = periodic_gaussian(G.x, x0 + 2 * np.pi, w, np.pi)
    assert np.allclose(a, b, atol=1e-12)
    assert np.all(a >= 0) and np.max(a) > 0


def test_slope_profile_extrema():
    from fwsystem.diagnostics import slope_extrema

    g = Grid(np.pi, 1024)
    u = slope_profile(g, -3.0, 0.5).values
    m, xm, M, _ = slope_extrema(g, u, refine="newton")
    assert m == pytest.approx(-3.0, abs=1e-9) and M == pytest.approx(0.5, abs=1e-9)
    assert abs(xm) < 1e-9
    assert abs(np.mean(u)) < 1e-15
    with pytest.raises(ValueError):
        slope_profile(g, 1.0, 2.0)
