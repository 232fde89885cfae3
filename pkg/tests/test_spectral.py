import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from ewisp.errors import ConfigurationError
from ewisp.spectral import (
    Grid,
    GridField,
    SpectralField,
    build_grid,
    discrete_l2_norm,
    discrete_semi_h1_norm,
    dst1,
    dst_forward,
    dst_inverse,
    forward_modes,
    inverse_modes,
    linf_norm,
    prolong_modes,
    restrict_modes,
    sample_nodes,
    spectral_l2_norm,
    spectral_semi_h1_norm,
)

from oracles import direct_dst_modes

trapezoid = getattr(np, "trapezoid", None) or np.trapz  # numpy < 2 fallback

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


def random_field(rng, M):
    return rng.standard_normal(M - 1) + 1j * rng.standard_normal(M - 1)


# --- grid -------------------------------------------------------------------

def test_grid_basic_properties():
    g = build_grid(-16, 16, 8)
    assert g.h == 4.0
    assert g.length == 32.0
    np.testing.assert_allclose(g.x, [-12, -8, -4, 0, 4, 8, 12])
    np.testing.assert_allclose(g.x_full[[0, -1]], [-16, 16])
    np.testing.assert_allclose(g.mu, np.pi * np.arange(1, 8) / 32)


@pytest.mark.parametrize("M", [0, 2, 3, 6, 12, 100, 2.5, True])
def test_grid_rejects_bad_sizes(M):
    with pytest.raises(ConfigurationError):
        Grid(0.0, 1.0, M)


@pytest.mark.parametrize("a,b", [(1.0, 1.0), (2.0, 1.0), (0.0, np.inf), (np.nan, 1.0)])
def test_grid_rejects_degenerate_intervals(a, b):
    with pytest.raises(ConfigurationError):
        Grid(a, b, 8)


def test_grid_arrays_are_read_only():
    g = build_grid(0, 1, 8)
    with pytest.raises(ValueError):
        g.mu[0] = 1.0


def test_nesting():
    fine = build_grid(-16, 16, 64)
    assert fine.nests(build_grid(-16, 16, 16))
    assert fine.nests(fine)
    assert not fine.nests(build_grid(-16, 16, 128))
    assert not fine.nests(build_grid(-8, 16, 16))


def test_field_length_is_checked():
    g = build_grid(0, 1, 8)
    with pytest.raises(ConfigurationError):
        GridField(g, np.zeros(8))
    with pytest.raises(ConfigurationError):
        SpectralField(g, np.zeros(6))


# --- transforms ---------------------------------------------------------------

def test_single_mode_is_recovered():
    g = build_grid(-16, 16, 32)
    u = GridField.from_function(g, lambda x: np.sin(3 * np.pi * (x + 16) / 32))
    c = dst_forward(u).modes
    expected = np.zeros(31)
    expected[2] = 1.0
    np.testing.assert_allclose(c, expected, atol=1e-14)


@pytest.mark.parametrize("M", [4, 8, 16, 32, 64])
def test_forward_matches_direct_sum(M):
    rng = np.random.default_rng(M)
    u = random_field(rng, M)
    np.testing.assert_allclose(forward_modes(u), direct_dst_modes(u), rtol=0, atol=1e-13)


@pytest.mark.parametrize("M", [32, 256, 1024])
def test_fft_path_matches_matrix_path(M):
    rng = np.random.default_rng(1)
    u = random_field(rng, M)
    scale = np.max(np.abs(u)) * M
    assert np.max(np.abs(dst1(u, direct=False) - dst1(u, direct=True))) < 1e-13 * scale


@given(st.sampled_from([4, 8, 16, 32, 128]), st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_round_trip(M, seed):
    g = build_grid(-16, 16, M)
    u = GridField(g, random_field(np.random.default_rng(seed), M))
    back = dst_inverse(dst_forward(u)).values
    assert np.max(np.abs(back - u.values)) <= 1e-12 * max(1.0, np.max(np.abs(u.values)))


@given(arrays(np.float64, 15, elements=finite), arrays(np.float64, 15, elements=finite), finite)
@settings(max_examples=60, deadline=None)
def test_forward_is_linear(u, v, s):
    lhs = forward_modes(u + s * v)
    rhs = forward_modes(u) + s * forward_modes(v)
    scale = 1 + np.max(np.abs(u)) + abs(s) * np.max(np.abs(v))
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * scale


@given(st.sampled_from([8, 32, 128]), st.integers(0, 2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_parseval(M, seed):
    """Spectral L2 norm equals the trapezoidal nodal norm for the interpolant."""
    g = build_grid(-3, 5, M)
    u = GridField(g, random_field(np.random.default_rng(seed), M))
    np.testing.assert_allclose(spectral_l2_norm(dst_forward(u)), discrete_l2_norm(u), rtol=1e-12)


def test_norms_of_analytic_interpolant_by_quadrature():
    """Compare with dense quadrature of the interpolant and its derivative."""
    g = build_grid(-2, 3, 16)
    rng = np.random.default_rng(7)
    c = random_field(rng, 16)
    xs = np.linspace(g.a, g.b, 40001)
    phase = np.outer(xs - g.a, g.mu)
    u = np.sin(phase) @ c
    du = (np.cos(phase) * g.mu) @ c
    l2 = np.sqrt(trapezoid(np.abs(u) ** 2, xs))
    h1 = np.sqrt(trapezoid(np.abs(du) ** 2, xs))
    f = SpectralField(g, c)
    np.testing.assert_allclose(spectral_l2_norm(f), l2, rtol=1e-8)
    np.testing.assert_allclose(spectral_semi_h1_norm(f), h1, rtol=1e-8)


@pytest.mark.parametrize("M", [8, 64, 512])
def test_semi_h1_norm_equivalence(M):
    """||delta+ u|| <= ||d/dx I u|| <= pi/2 ||delta+ u|| for random nodal data."""
    g = build_grid(-16, 16, M)
    rng = np.random.default_rng(M)
    for _ in range(100):
        u = GridField(g, random_field(rng, M))
        fd = discrete_semi_h1_norm(u)
        sp = spectral_semi_h1_norm(dst_forward(u))
        assert fd <= sp * (1 + 1e-12)
        assert sp <= np.pi / 2 * fd * (1 + 1e-12)


def test_discrete_seminorm_includes_boundary_cells():
    g = build_grid(0, 4, 4)  # h = 1, interior nodes 1..3
    u = GridField(g, np.array([1.0, 1.0, 1.0]))
    # differences: 1, 0, 0, -1
    assert discrete_semi_h1_norm(u) == pytest.approx(np.sqrt(2.0))
    assert linf_norm(u) == 1.0


# --- restriction ----------------------------------------------------------------

def test_restrict_and_prolong():
    fine = build_grid(-16, 16, 32)
    coarse = build_grid(-16, 16, 8)
    c = SpectralField(fine, np.arange(1, 32, dtype=complex))
    r = restrict_modes(c, coarse)
    np.testing.assert_array_equal(r.modes, np.arange(1, 8))
    p = prolong_modes(r, fine)
    np.testing.assert_array_equal(p.modes[:7], np.arange(1, 8))
    assert not np.any(p.modes[7:])
    with pytest.raises(ConfigurationError):
        restrict_modes(r, fine)
    with pytest.raises(ConfigurationError):
        prolong_modes(c, coarse)


def test_sample_nodes_picks_shared_points():
    fine = build_grid(-16, 16, 32)
    coarse = build_grid(-16, 16, 8)
    u = GridField.from_function(fine, lambda x: x)
    np.testing.assert_allclose(sample_nodes(u, coarse).values, coarse.x)
    with pytest.raises(ConfigurationError):
        sample_nodes(u, build_grid(-16, 16, 64))


def test_restriction_of_band_limited_field_is_exact():
    fine = build_grid(0, 1, 64)
    coarse = build_grid(0, 1, 16)
    f = lambda x: np.sin(np.pi * x) - 0.3 * np.sin(5 * np.pi * x)
    u = dst_forward(GridField.from_function(fine, f))
    ref = dst_forward(GridField.from_function(coarse, f))
    np.testing.assert_allclose(restrict_modes(u, coarse).modes, ref.modes, atol=1e-14)
