import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fwsystem.errors import InvalidField, InvalidGrid, InvalidMollifier
from fwsystem.spectral import (Field, Grid, MollifierSpec, derivative, helmholtz_inverse, inverse, mollify,
                               nonlocal_T, second_deriv_helmholtz, sobolev_norm, transform)

G = Grid(np.pi, 64)


def f(vals, grid=G):
    return Field(grid, vals)


# -- grid and field validation ---------------------------------------------

@pytest.mark.parametrize("n", [7, 6, 0, 9, 10.5])
def test_grid_rejects_bad_sizes(n):
    with pytest.raises(InvalidGrid):
        Grid(np.pi, n)


@pytest.mark.parametrize("L", [0.0, -1.0, np.inf, np.nan])
def test_grid_rejects_bad_period(L):
    with pytest.raises(InvalidGrid):
        Grid(L, 16)


def test_grid_non_power_of_two_allowed():
    g = Grid(2.0, 24)
    assert g.x[0] == -2.0 and g.x.size == 24
    assert np.isclose(g.dx, 4.0 / 24)


@pytest.mark.parametrize("bad", [np.nan, np.inf, -np.inf])
def test_field_rejects_non_finite(bad):
    v = np.zeros(G.n_points)
    v[3] = bad
    with pytest.raises(InvalidField):
        Field(G, v)


def test_field_rejects_wrong_shape():
    with pytest.raises(InvalidField):
        Field(G, np.zeros(G.n_points + 1))


def test_field_is_immutable():
    fld = f(np.zeros(G.n_points))
    with pytest.raises(ValueError):
        fld.values[0] = 1.0


# -- transform -------------------------------------------------------------

def test_constant_spectrum_at_zero_mode():
    sp = transform(f(np.ones(G.n_points)))
    assert sp.at(0) == pytest.approx(1.0, abs=1e-15)
    others = np.delete(sp.coeffs, np.where(sp.grid.modes == 0)[0])
    assert np.max(np.abs(others)) < 1e-15


def test_cos_spectrum_on_unit_modes():
    sp = transform(f(np.cos(G.x)))
    assert sp.at(1) == pytest.approx(0.5, abs=1e-15)
    assert sp.at(-1) == pytest.approx(0.5, abs=1e-15)
    mask = np.abs(sp.grid.modes) != 1
    assert np.max(np.abs(sp.coeffs[mask])) < 1e-15


def test_round_trip_random(rng):
    v = rng.standard_normal(G.n_points)
    back = inverse(transform(f(v))).values
    assert np.max(np.abs(back - v)) <= 1e-12 * np.max(np.abs(v))


def test_hermitian_symmetry(rng):
    sp = transform(f(rng.standard_normal(G.n_points)))
    for n in range(1, G.n_points // 2):
        assert sp.at(-n) == pytest.approx(np.conj(sp.at(n)), abs=1e-15)


def test_parseval(rng):
    v = rng.standard_normal(G.n_points)
    sp = transform(f(v))
    lhs = np.sqrt(G.length * np.sum(np.abs(sp.coeffs) ** 2))
    assert lhs == pytest.approx(G.l2_norm(v), rel=1e-12)


# -- multiplier operators --------------------------------------------------

@pytest.mark.parametrize("op", [derivative, nonlocal_T, second_deriv_helmholtz])
def test_constants_annihilated(op):
    out = op(f(np.full(G.n_points, 2.5))).values
    assert np.max(np.abs(out)) < 1e-14


def test_derivative_examples():
    x = G.x
    assert np.max(np.abs(derivative(f(np.sin(x))).values - np.cos(x))) < 1e-12
    assert np.max(np.abs(derivative(f(np.sin(3 * x))).values - 3 * np.cos(3 * x))) < 1e-12


def test_derivative_scales_with_period():
    g = Grid(4.0, 64)
    k = np.pi / 4.0
    out = derivative(Field(g, np.sin(k * g.x))).values
    assert np.max(np.abs(out - k * np.cos(k * g.x))) < 1e-12


def test_helmholtz_inverse_examples():
    x = G.x
    assert np.allclose(helmholtz_inverse(f(np.full(G.n_points, 3.0))).values, 3.0, atol=1e-14)
    assert np.max(np.abs(helmholtz_inverse(f(np.cos(x))).values - np.cos(x) / 2)) < 1e-14
    assert np.max(np.abs(helmholtz_inverse(f(np.cos(2 * x))).values - np.cos(2 * x) / 5)) < 1e-14


def test_nonlocal_examples():
    x = G.x
    assert np.max(np.abs(nonlocal_T(f(np.sin(x))).values - np.cos(x) / 2)) < 1e-14
    assert np.max(np.abs(nonlocal_T(f(np.sin(2 * x))).values - 0.4 * np.cos(2 * x))) < 1e-14


def test_second_helmholtz_examples(rng):
    x = G.x
    assert np.max(np.abs(second_deriv_helmholtz(f(np.cos(x))).values + np.cos(x) / 2)) < 1e-14
    v = f(rng.standard_normal(G.n_points))
    ident = second_deriv_helmholtz(v).values - (helmholtz_inverse(v).values - v.values)
    assert np.max(np.abs(ident)) < 1e-12


def test_nonlocal_symbol_all_modes():
    g = Grid(np.pi, 128)
    for n in range(g.n_points // 2):
        e = np.exp(1j * n * g.x)
        a = 1j * n / (1 + n * n)
        out = g.nonlocal_op(e.real) + 1j * g.nonlocal_op(e.imag)
        assert np.max(np.abs(out - a * e)) < 1e-12


def test_nyquist_mode_odd_operators_zero():
    g = Grid(np.pi, 16)
    nyq = np.cos(8 * g.x)
    assert np.max(np.abs(g.dx_op(nyq))) < 1e-14
    assert np.max(np.abs(g.nonlocal_op(nyq))) < 1e-14


def test_operators_commute(rng):
    v = rng.standard_normal(G.n_points)
    ops = [G.dx_op, G.helmholtz_inverse_op, G.nonlocal_op, G.second_helmholtz_op]
    for a in ops:
        for b in ops:
            assert np.max(np.abs(a(b(v)) - b(a(v)))) < 1e-12


# -- products --------------------------------------------------------------

def test_dealiased_product_exact_for_resolved_modes():
    x = G.x
    out = G.product(np.cos(5 * x), np.sin(7 * x))
    assert np.max(np.abs(out - np.sin(7 * x) * np.cos(5 * x))) < 1e-13


def test_dealiased_product_removes_aliases():
    g = Grid(np.pi, 16)
    a = np.cos(6 * g.x)
    # cos^2(6x) = 1/2 + cos(12x)/2; mode 12 aliases to 4 on 16 points.
    assert np.max(np.abs(g.product(a, a) - 0.5)) < 1e-14
    assert np.max(np.abs(g.product(a, a, dealias=False) - a * a)) < 1e-14


# -- mollifier -------------------------------------------------------------

@pytest.mark.parametrize("eps", [0.0, -0.1, 1.5, np.nan])
def test_mollifier_rejects_bad_eps(eps):
    with pytest.raises(InvalidMollifier):
        MollifierSpec(eps)


def test_mollifier_rejects_unknown_kind():
    with pytest.raises(InvalidMollifier):
        MollifierSpec(0.5, "boxcar")


def test_mollifier_identity_surrogate(rng):
    v = f(rng.standard_normal(G.n_points))
    out = mollify(v, MollifierSpec.identity_for(G))
    assert np.array_equal(out.values, v.values) or np.max(np.abs(out.values - v.values)) < 1e-14


def test_mollifier_gaussian_on_cos():
    eps = 0.3
    out = mollify(f(np.cos(G.x)), MollifierSpec(eps))
    assert np.max(np.abs(out.values - np.exp(-eps**2) * np.cos(G.x))) < 1e-14


@pytest.mark.parametrize("kind", ["gaussian", "sharp_cutoff"])
@pytest.mark.parametrize("eps", [0.05, 0.5, 1.0])
def test_mollifier_preserves_constants(kind, eps):
    out = mollify(f(np.full(G.n_points, 0.7)), MollifierSpec(eps, kind))
    assert np.allclose(out.values, 0.7, atol=1e-14)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), eps=st.floats(0.01, 1.0), s=st.floats(-1.0, 3.0),
       kind=st.sampled_from(["gaussian", "sharp_cutoff"]))
def test_mollifier_contraction(seed, eps, s, kind):
    v = f(np.random.default_rng(seed).standard_normal(G.n_points))
    assert sobolev_norm(mollify(v, MollifierSpec(eps, kind)), s) <= sobolev_norm(v, s) * (1 + 1e-12)


# -- Sobolev norms ---------------------------------------------------------

def test_sobolev_constant():
    assert sobolev_norm(f(np.ones(G.n_points)), 0) == pytest.approx(np.sqrt(2 * np.pi), rel=1e-14)


def test_sobolev_single_mode():
    c = f(np.cos(G.x))
    assert sobolev_norm(c, 1) == pytest.approx(np.sqrt(2) * sobolev_norm(c, 0), rel=1e-14)
    assert sobolev_norm(c, 0) == pytest.approx(np.sqrt(np.pi), rel=1e-14)


def test_sobolev_zero_matches_trapezoid(rng):
    v = rng.standard_normal(G.n_points)
    assert sobolev_norm(f(v), 0) == pytest.approx(np.sqrt(G.dx * np.sum(v * v)), rel=1e-12)


def test_interpolation_inequality_100_fields():
    rng = np.random.default_rng(7)
    for _ in range(100):
        decay = (1 + np.abs(G.modes)) ** -rng.uniform(0.5, 3.0)
        v = np.real(np.fft.ifft(np.fft.fft(rng.standard_normal(G.n_points)) * np.fft.ifftshift(decay)))
        fld = f(v)
        h0, h1, h2 = (sobolev_norm(fld, s) for s in (0, 1, 2))
        assert h1 <= np.sqrt(h0 * h2) * (1 + 1e-12)


# -- interpolation and shifts ----------------------------------------------

def test_interpolate_band_limited(rng):
    x = G.x
    v = np.sin(x) + 0.3 * np.cos(5 * x)
    pts = rng.uniform(-np.pi, np.pi, 20)
    assert np.max(np.abs(G.interpolate(v, pts) - (np.sin(pts) + 0.3 * np.cos(5 * pts)))) < 1e-13


def test_shift_translates():
    v = np.sin(G.x)
    assert np.max(np.abs(G.shift(v, 0.4) - np.sin(G.x - 0.4))) < 1e-13


def test_field_arithmetic():
    a = f(np.ones(G.n_points))
    b = a + a * 2.0 - a
    assert np.allclose(b.values, 2.0)
    assert np.allclose((-b).values, -2.0)
