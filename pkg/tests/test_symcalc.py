import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sjolab.grid import GridSpec, SampledFunction, lp_norm, random_bandlimited, sample
from sjolab.modnorm import swp_norm
from sjolab.pdo import Symbol2D, phase_space, quantize, schatten_norm
from sjolab.rng import make_rng
from sjolab.symcalc import (ChirpSpec, MixedSobolevSpec, chirp_SA, chirp_TA, chirp_continuity,
                            compose_linear, cordes_build, cordes_l1_check, cordes_tensor_symbol,
                            embedding_check, holder_product, isometry_equivariance, peetre_slack,
                            product, quantization_change, restrict, sobolev_norm, tensor, young_convolve)
from sjolab.windows import make_bump

from conftest import rel

SPEC = GridSpec((32.0,), (256,))
CHI = make_bump(SPEC, 2.0)


def gauss(spec=SPEC, a=1.0):
    return sample(spec, lambda x: np.exp(-a * x ** 2 / 2))


# ---------------------------------------------------------------- coordinate maps

def test_compose_identity(rand1):
    v, r = compose_linear(rand1, [[1.0]], CHI, 1)
    assert rel(v.values, rand1.values) < 1e-12
    assert abs(r.ratio - 1) < 1e-12


@pytest.mark.parametrize("p", [1, 2, np.inf])
def test_compose_reflection_keeps_norm(rand1, p):
    _, r = compose_linear(rand1, [[-1.0]], CHI, p)
    assert abs(r.ratio - 1) < 1e-9


def test_compose_dilation_values_and_ceiling():
    u = gauss(a=2.0)
    v, r = compose_linear(u, [[2.0]], CHI, 1)
    # u is periodic, so u(2x) on the torus holds two copies of the dilated bump
    y = (2 * SPEC.axis(0) + 16) % 32 - 16
    assert rel(v.values, np.exp(-y ** 2)) < 1e-12
    assert r.ceiling_factor == pytest.approx(1.5)
    assert 0 < r.measured_constant < np.inf


def test_compose_2d_rotation_matches_function():
    s = GridSpec((24.0, 24.0), (96, 96))
    u = sample(s, lambda x, y: np.exp(-(x ** 2 + 2 * y ** 2) / 2))
    th = 0.4
    lam = [[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]]
    v, _ = compose_linear(u, lam)
    X, Y = s.mesh()
    xr, yr = np.cos(th) * X - np.sin(th) * Y, np.sin(th) * X + np.cos(th) * Y
    assert np.abs(v.values - np.exp(-(xr ** 2 + 2 * yr ** 2) / 2)).max() < 1e-10


def test_compose_singular():
    with pytest.raises(ValueError, match="singular"):
        compose_linear(gauss(), [[0.0]])


def test_tensor_norm_factorizes():
    s = GridSpec((16.0,), (64,))
    chi = make_bump(s, 2.0)
    g, h = sample(s, lambda x: np.exp(-x ** 2)), sample(s, lambda x: np.exp(-(x - 1) ** 2 / 3))
    t = tensor(g, h)
    chi2 = SampledFunction(t.spec, np.multiply.outer(chi.values, chi.values))
    for p in (1, 2):
        lhs = swp_norm(t, chi2, p).value
        rhs = swp_norm(g, chi, p).value * swp_norm(h, chi, p).value
        assert abs(lhs - rhs) / rhs < 1e-8


def test_tensor_trivial():
    s = GridSpec((4.0,), (8,))
    one = sample(s, np.ones_like)
    assert np.all(tensor(one, one).values == 1)
    assert np.all(tensor(one, one._like(np.zeros(8))).values == 0)


def test_restrict_tensor():
    s = GridSpec((16.0,), (64,))
    g, h = gauss(s), sample(s, lambda x: np.cos(x) + 2)
    r, _ = restrict(tensor(g, h), axis=1)
    assert np.array_equal(r.values, g.values * h.values[32])


def test_restrict_ratio_reported():
    s = GridSpec((16.0,), (64,))
    chi = make_bump(s, 2.0)
    t = tensor(gauss(s), gauss(s))
    chi2 = SampledFunction(t.spec, np.multiply.outer(chi.values, chi.values))
    _, rep = restrict(t, 1, chi2, chi, 1)
    assert 0 < rep.ratio < np.inf


# ---------------------------------------------------------------- algebra

def test_product_with_one(rand1):
    one = sample(SPEC, np.ones_like)
    uv, rep = product(rand1, one, CHI, 1)
    assert np.array_equal(uv.values, rand1.values)
    assert rep.slack >= -1e-9


@pytest.mark.parametrize("p", [1, 2, np.inf])
def test_ideal_bound(rng, p):
    for _ in range(5):
        u, v = random_bandlimited(SPEC, rng, band=32), random_bandlimited(SPEC, rng, band=32)
        assert product(u, v, CHI, p)[1].slack >= -1e-9


def test_holder_gaussians():
    _, rep, r = holder_product(gauss(), 2, gauss(a=2.0), 2, CHI)
    assert r == 1 and 0 < rep.ratio < np.inf


def test_holder_exponent_mismatch(rand1):
    with pytest.raises(ValueError, match="1/r"):
        holder_product(rand1, 1, rand1, 1, CHI)


def test_young_delta_is_identity(rand1):
    h = SPEC.spacing[0]
    delta = np.zeros(256)
    delta[128] = 1 / h
    w, rep, r = young_convolve(SampledFunction(SPEC, delta), 1, rand1, 2, CHI)
    assert r == 2
    assert rel(w.values, rand1.values) < 1e-12
    assert abs(rep.ratio - 1) < 1e-12


def test_young_exponent_mismatch(rand1):
    with pytest.raises(ValueError, match="1/r"):
        young_convolve(rand1, np.inf, rand1, np.inf, CHI)


# ---------------------------------------------------------------- chirps

def chirp_gaussian_oracle(x, a):
    """T_A e^{-x^2/2} for A = [a]: the spectrum sqrt(2 pi) e^{-xi^2 (1 + i/a) / 2} inverted in closed form."""
    z = 1 + 1j / a
    return z ** -0.5 * np.exp(-x ** 2 / (2 * z))


@pytest.mark.parametrize("a", [0.7, 2.0, -1.5])
def test_chirp_gaussian_closed_form(a):
    v = chirp_TA(gauss(), [[a]])
    assert np.abs(v.values - chirp_gaussian_oracle(SPEC.axis(0), a)).max() < 1e-10


def test_chirp_inverse_and_isometry(rand1):
    A = ChirpSpec([[0.3]])
    assert rel(chirp_TA(chirp_TA(rand1, A), -A).values, rand1.values) < 1e-12
    assert abs(lp_norm(chirp_TA(rand1, A), 2) / lp_norm(rand1, 2) - 1) < 1e-12


def test_chirp_2d_roundtrip(rng):
    s = GridSpec((8.0, 8.0), (32, 32))
    u = random_bandlimited(s, rng)
    A = ChirpSpec([[1.0, 0.3], [0.3, -0.5]])
    assert A.sgn == 0
    assert rel(chirp_TA(chirp_TA(u, A), -A).values, u.values) < 1e-12


@pytest.mark.parametrize("A,msg", [([[1.0, 0.2], [0.0, 1.0]], "symmetric"), ([[1e-10]], "singular"),
                                   ([[1.0, 2.0], [2.0, 4.0]], "singular")])
def test_chirp_spec_rejects(A, msg):
    with pytest.raises(ValueError, match=msg):
        ChirpSpec(A)


def test_chirp_zero():
    z = SampledFunction(SPEC, np.zeros(256))
    assert np.all(chirp_TA(z, [[1.0]]).values == 0)


def test_SA_factorizes():
    s = GridSpec((16.0,), (64,))
    g, h = gauss(s), sample(s, lambda x: np.exp(-(x - 1) ** 2))
    A = ChirpSpec([[0.8]])
    lhs = chirp_SA(tensor(g, h), A)
    rhs = tensor(g, chirp_TA(h, A))
    assert rel(lhs.values, rhs.values) < 1e-11
    assert rel(chirp_SA(lhs, -A).values, tensor(g, h).values) < 1e-11


def test_chirp_continuity_monotone():
    u = sample(SPEC, lambda x: np.exp(-x ** 2 / 2) * (1 + 0.5 * np.cos(2 * x)))
    d = chirp_continuity(u, [[1.0]], [[0.7]], CHI, 1, [2.0 ** -k for k in range(2, 32, 2)])
    assert np.all(np.diff(d) < 0) and d[-1] < 1e-6


def test_chirp_norm_bounded_over_compact_set(rand1):
    n = swp_norm(rand1, CHI, 1).value
    ratios = [swp_norm(chirp_TA(rand1, [[a]]), CHI, 1).value / n for a in (0.5, 1.0, 2.0, -1.0)]
    assert max(ratios) < 20


# ---------------------------------------------------------------- quantization change

def test_quantization_change_identity(rng):
    ps = phase_space(GridSpec((16.0,), (64,)))
    a = random_bandlimited(ps, rng, band=8)
    assert quantization_change(a, 0.3, 0.3) is a


@settings(max_examples=20, deadline=None)
@given(t1=st.floats(-2, 2), t2=st.floats(-2, 2), t3=st.floats(-2, 2))
def test_quantization_change_group_law(t1, t2, t3):
    ps = phase_space(GridSpec((16.0,), (64,)))
    a = random_bandlimited(ps, make_rng(4), band=8)
    two = quantization_change(quantization_change(a, t1, t2), t2, t3)
    assert rel(two.values, quantization_change(a, t1, t3).values) < 1e-12


@pytest.mark.parametrize("t0,t1", [(0.0, 0.5), (0.5, 0.0), (-1.0, 2.0), (0.25, 1.0)])
def test_quantization_change_matches_operators(rng, t0, t1):
    ps = phase_space(GridSpec((16.0,), (64,)))
    a = random_bandlimited(ps, rng, band=8)
    b = quantization_change(a, t0, t1)
    assert np.abs(quantize(Symbol2D(a), t0).matrix - quantize(Symbol2D(b), t1).matrix).max() < 1e-8


# ---------------------------------------------------------------- Sobolev

def test_sobolev_t0_is_lp(rand1):
    for p in (1, 2, np.inf):
        assert abs(sobolev_norm(rand1, MixedSobolevSpec.isotropic(1, 0.0, p)) - lp_norm(rand1, p)) < 1e-10


def test_sobolev_pure_mode():
    xi0 = 5 * SPEC.freq_step[0]
    u = sample(SPEC, lambda x: np.exp(1j * xi0 * x))
    s = MixedSobolevSpec.isotropic(1, 1.5, 2)
    assert abs(sobolev_norm(u, s) - (1 + xi0 ** 2) ** 0.75 * lp_norm(u, 2)) < 1e-10


def test_sobolev_gaussian_closed_form():
    # int (1 + xi^2)^2 e^{-xi^2} dxi = sqrt(pi) (1 + 1 + 3/4)
    assert abs(sobolev_norm(gauss(), MixedSobolevSpec.isotropic(1, 2.0, 2)) - np.sqrt(2.75 * np.sqrt(np.pi))) < 1e-10


def test_mixed_blocks_pure_mode():
    s = GridSpec((8.0, 8.0), (32, 32))
    k1, k2 = 2 * s.freq_step[0], 3 * s.freq_step[1]
    u = sample(s, lambda x, y: np.exp(1j * (k1 * x + k2 * y)))
    spec = MixedSobolevSpec(((0,), (1,)), (2.0, 3.0), 2)
    expected = (1 + k1 ** 2) * (1 + k2 ** 2) ** 1.5 * lp_norm(u, 2)
    assert abs(sobolev_norm(u, spec) - expected) / expected < 1e-12
    assert spec.embeds


@pytest.mark.parametrize("blocks,t", [(((0,), (0,)), (1, 1)), (((0, 1),), (1, 2))])
def test_mixed_spec_rejects(blocks, t):
    with pytest.raises(ValueError):
        MixedSobolevSpec(blocks, t)


@pytest.mark.parametrize("t", [1.0, 0.5])
def test_embedding_precondition(rand1, t):
    with pytest.raises(ValueError, match="t_i"):
        embedding_check(rand1, t, 1, CHI)


def test_embedding_ratio_finite(rand1):
    assert 0 < embedding_check(rand1, 2.0, 1, CHI).ratio < np.inf


# ---------------------------------------------------------------- Cordes

CORDES = GridSpec((64.0,), (512,))


def test_cordes_inverse_transform_closed_form():
    from sjolab.grid import FourierCoefficients, idft
    a = cordes_build(CORDES, -2.0)
    g = idft(FourierCoefficients(CORDES, a.values)).values.real
    x = CORDES.axis(0)
    L = 64.0
    # e^{-|x|}/2 periodized with period L
    oracle = np.cosh(L / 2 - np.abs(x)) / (2 * np.sinh(L / 2))
    # truncation at |xi| = pi N / L smears the kink at the origin; away from it the error is small
    err = np.abs(g - oracle)
    assert err.max() < 2e-2
    assert err[np.abs(x) > 2].max() < 2e-4
    assert abs(cordes_l1_check(a).l1_norm - 1) < 1e-4


def test_cordes_seminorms():
    a = cordes_build(CORDES, -2.0)
    s0, s1, s2 = a.seminorms
    assert s0 == pytest.approx(1.0)
    # sup 2|xi| / <xi> -> 2 and sup |6 xi^2 - 2| / <xi>^2 -> 6
    assert s1 == pytest.approx(2.0, rel=1e-2)
    assert s2 == pytest.approx(6.0, rel=2e-2)


def test_cordes_order_precondition():
    with pytest.raises(ValueError):
        cordes_l1_check(cordes_build(CORDES, -2.0), s=2.0)
    with pytest.raises(ValueError, match="S_w"):
        cordes_l1_check(cordes_build(CORDES, -3.0), s=0.5, chi=make_bump(CORDES, 2.0))


def test_cordes_embedding_half():
    a = cordes_build(CORDES, -3.0, profile="bracket-osc")
    rep = cordes_l1_check(a, s=1.5, chi=make_bump(CORDES, 2.0))
    assert np.isfinite(rep.l1_norm) and 0 < rep.swp1_norm < np.inf


def test_cordes_grid_stable():
    vals = [cordes_l1_check(cordes_build(GridSpec((64.0,), (n,)), -2.5), s=0.0).l1_norm for n in (256, 512)]
    assert abs(vals[0] / vals[1] - 1) < 0.05


def test_cordes_tensor_symbol_in_feichtinger():
    ps = phase_space(GridSpec((16.0,), (64,)))
    a1 = cordes_build(GridSpec((64.0,), (512,)), -3.0)
    g = cordes_tensor_symbol(a1, a1, ps)
    chi, lat = make_bump(ps, (2.0, np.pi / 2)), None
    assert 0 < swp_norm(g, chi, 1).value < np.inf
    assert 0 < schatten_norm(quantize(Symbol2D(g), 0.5), 1).value < np.inf


# ---------------------------------------------------------------- isometries

S2 = GridSpec((32.0, 32.0), (128, 128))
G2 = sample(S2, lambda x, y: np.exp(-(x ** 2 + 2 * y ** 2) / 2) * np.cos(x))


def test_isometry_identity():
    assert isometry_equivariance(G2, np.eye(2), lambda r: 1 / (1 + r ** 2)) < 1e-14


def test_isometry_quarter_turn():
    assert isometry_equivariance(G2, [[0, -1], [1, 0]], lambda r: 1 / (1 + r ** 2)) < 1e-10


def test_isometry_thirty_degrees():
    th = np.pi / 6
    lam = [[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]]
    assert isometry_equivariance(G2, lam, lambda r: np.exp(-r ** 2 / 2)) < 1e-6


def test_isometry_rejects_non_orthogonal():
    with pytest.raises(ValueError, match="orthogonal"):
        isometry_equivariance(G2, [[2, 0], [0, 1]], lambda r: r)


# ---------------------------------------------------------------- Peetre

def test_peetre_1000(rng):
    X, Y = rng.normal(0, 5, (1000, 3)), rng.normal(0, 5, (1000, 3))
    assert peetre_slack(X, Y, rng.uniform(-6, 6, 1000)).min() >= 0


@settings(max_examples=200, deadline=None)
@given(x=st.floats(-1e3, 1e3), y=st.floats(-1e3, 1e3), n=st.floats(-6, 6))
def test_peetre_property(x, y, n):
    slack = peetre_slack([[x]], [[y]], n)[0]
    lhs = (1 + (x + y) ** 2) ** (n / 2)
    assert slack >= -1e-12 * max(1.0, lhs)
