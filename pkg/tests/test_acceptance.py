"""End-to-end acceptance criteria; each test records a one-line verdict for the terminal summary."""
import time

import numpy as np
import pytest
from conftest import record

from sjolab import decomp, modnorm, pdo, symcalc, windows
from sjolab.grid import (GridSpec, SampledFunction, convolve, dft, idft, lp_norm, random_bandlimited,
                         resample, sample)
from sjolab.rng import make_rng
from sjolab.suites import periodization_partial_sum

SPEC = GridSpec((32.0,), (256,))
FINE = GridSpec((32.0,), (512,))
SEED = 20240611
TAUS = [-1.0, 0.0, 0.25, 0.5, 1.0, 2.0]


def inputs(n, stream, spec=SPEC, band=32):
    rng = make_rng(SEED, stream)
    return [random_bandlimited(spec, rng, band=band) for _ in range(n)]


def rel(a, b):
    return float(np.abs(a - b).max() / np.abs(b).max())


def test_01_transform_identities():
    t0 = time.perf_counter()
    us, vs = inputs(100, 1), inputs(100, 2)
    err = 0.0
    for u, v in zip(us, vs):
        c = dft(u)
        e = lp_norm(u, 2) ** 2
        err = max(err, abs(e - SPEC.freq_cell / (2 * np.pi) * np.sum(np.abs(c.coeffs) ** 2)) / e,
                  rel(dft(convolve(u, v)).coeffs, c.coeffs * dft(v).coeffs),
                  rel(idft(c).values, u.values))
    dt = time.perf_counter() - t0
    ok = err <= 1e-11 and dt < 5
    record(1, "transform identities", ok, f"max rel err {err:.1e} (tol 1e-11), {dt:.2f} s (< 5 s)")
    assert ok


def test_02_frequency_localization():
    chi = windows.make_bump(SPEC, 2.0)
    rng = make_rng(SEED, 3)
    err = 0.0
    for u in inputs(50, 4):
        for k in rng.integers(-64, 64, 8):
            xi0 = float(k * SPEC.freq_step[0])
            d = modnorm.freq_localize(u, chi, xi0).values - modnorm.freq_localize_rhs(u, chi, xi0).values
            err = max(err, np.abs(d).max() / np.abs(u.values).max())
    ok = err <= 1e-9
    record(2, "frequency localization", ok, f"max err {err:.1e} (tol 1e-9)")
    assert ok


def _band_ratios(us, spec, chi_radius=2.0):
    pou = windows.make_pou(spec.dual(), windows.Lattice(spec.dual(), np.pi / 2))
    chi = windows.make_bump(spec, chi_radius)
    rec, ratios = 0.0, {p: [] for p in (1, 2, np.inf)}
    for u in us:
        dec = decomp.decompose(u, pou)
        rec = max(rec, rel(decomp.reconstruct(dec).values, u.values))
        for p in ratios:
            ratios[p].append(decomp.decomposition_norm(dec, p) / modnorm.swp_norm(u, chi, p).value)
    return rec, {p: (min(r), max(r)) for p, r in ratios.items()}


def test_03_spectral_characterization():
    us = inputs(100, 5)
    rec, br = _band_ratios(us, SPEC)
    rec2, br2 = _band_ratios([resample(u, FINE) for u in us], FINE)
    drift = max(max(br2[p][1] / br[p][1], br[p][1] / br2[p][1], br2[p][0] / br[p][0], br[p][0] / br2[p][0])
                for p in br)
    spread = max(hi / lo for lo, hi in br.values())
    ok = max(rec, rec2) <= 1e-10 and all(np.isfinite(b).all() and b[0] > 0 for b in br.values()) and drift < 2
    record(3, "spectral characterization", ok,
           f"residual {max(rec, rec2):.1e}, bracket spread {spread:.2f}, drift 256->512 x{drift:.3f} (< 2)")
    assert ok


def test_04_norm_comparison():
    spec = SPEC
    pou = windows.make_pou(spec, windows.Lattice(spec, 1.0))
    psi = windows.make_plateau(spec, 0.75 + 0.5 + 0.05, 0.75 + 0.5 + 1.0)
    up = low = 0.0
    mu = ml = np.inf
    for u in inputs(50, 6):
        for p in (1, 2, np.inf):
            r = modnorm.equivalence_report(u, pou, psi, p)
            up, low = max(up, r.residual_upper), max(low, r.residual_lower)
            mu, ml = min(mu, r.margin_upper), min(ml, r.margin_lower)
    ok = up <= 1e-8 and low <= 1e-8
    record(4, "continuous/discrete comparison", ok,
           f"residuals {up:.1e} / {low:.1e} (tol 1e-8), min relative margins {mu:.2e} / {ml:.2e}")
    assert ok


def _inclusion_constants(us, vs, chi):
    h = max(symcalc.holder_product(u, 2, v, 2, chi)[1].ratio for u, v in zip(us, vs))
    y = max(symcalc.young_convolve(v, 1, u, 2, chi)[1].ratio for u, v in zip(us, vs))
    return h, y


def test_05_ideal_and_inclusions():
    chi = windows.make_bump(SPEC, 2.0)
    us, vs = inputs(50, 7), inputs(50, 8)
    slack = min(symcalc.product(u, v, chi, p)[1].slack for u, v in zip(us, vs) for p in (1, 2, np.inf))
    h, y = _inclusion_constants(us[:10], vs[:10], chi)
    hf, yf = _inclusion_constants([resample(u, FINE) for u in us[:10]], [resample(v, FINE) for v in vs[:10]],
                                  windows.make_bump(FINE, 2.0))
    drift = max(hf / h, h / hf, yf / y, y / yf)
    ok = slack >= -1e-9 and np.isfinite([h, y]).all() and drift < 2
    record(5, "ideal bound and inclusions", ok,
           f"min slack {slack:.2e}, Holder C {h:.3f}, Young C {y:.3f}, refinement drift x{drift:.3f}")
    assert ok


def test_06_chirps():
    A = symcalc.ChirpSpec([[0.7]])
    us = inputs(50, 9)
    inv = max(rel(symcalc.chirp_TA(symcalc.chirp_TA(u, A), -A).values, u.values) for u in us)
    iso = max(abs(lp_norm(symcalc.chirp_TA(u, A), 2) / lp_norm(u, 2) - 1) for u in us)
    g = sample(SPEC, lambda x: np.exp(-x ** 2 / 2) * (1 + 0.5 * np.cos(2 * x)))
    d = symcalc.chirp_continuity(g, [[1.0]], [[0.7]], windows.make_bump(SPEC, 2.0), 1,
                                 [2.0 ** -k for k in range(2, 32, 2)])
    mono = bool(np.all(np.diff(d) < 0))
    ok = inv <= 1e-11 and iso <= 1e-11 and mono and d[-1] < 1e-6
    record(6, "chirp operators", ok,
           f"inverse {inv:.1e}, isometry {iso:.1e}, continuity monotone={mono} final {d[-1]:.1e}")
    assert ok


def test_07_quantization_oracles():
    sig = GridSpec((16.0,), (64,))
    x = sig.axis(0)
    m = np.exp(np.cos(2 * np.pi * x / 16))
    mult = pdo.Symbol2D.from_function(sig, lambda x, xi: np.exp(np.cos(2 * np.pi * x / 16)) + 0 * xi)
    diag = max(np.abs(pdo.quantize(mult, t).matrix - np.diag(m)).max() for t in TAUS)
    fm = pdo.Symbol2D.from_function(sig, lambda x, xi: 1 / (1 + xi ** 2) + 0 * x)
    F = np.fft.fftshift(np.fft.fft(np.fft.ifftshift(np.eye(64), axes=0), axis=0), axes=0)
    Fi = np.linalg.inv(F)
    fmd = max(np.abs(F @ pdo.quantize(fm, t).matrix @ Fi - np.diag(1 / (1 + sig.freq_axis(0) ** 2))).max()
              for t in TAUS)
    s1 = s2 = 0.0
    for N in (64, 128, 256):
        g = pdo.Symbol2D.from_function(GridSpec((16.0,), (N,)), lambda x, xi: 2 * np.exp(-(x ** 2 + xi ** 2)))
        sv = pdo.schatten_norm(pdo.quantize(g, 0.5), 1).singular_values
        s1, s2 = max(s1, abs(sv[0] - 1)), max(s2, sv[1])
    ok = diag <= 1e-13 and fmd <= 1e-10 and s1 <= 1e-6 and s2 <= 1e-6
    record(7, "quantization oracles", ok,
           f"diag {diag:.1e}, multiplier {fmd:.1e}, |s1-1| {s1:.1e}, s2 {s2:.1e}")
    assert ok


def test_08_conjugation():
    sig = GridSpec((32.0,), (128,))
    b = pdo.Symbol2D.from_function(sig, lambda x, xi: np.exp(-(x ** 2 + xi ** 2) / 2))
    cases = [(t, k, l) for t in (0.0, 0.25, 0.5, 1.0)
             for k, l in ((3 * 2 * np.pi / 32, 0.25), (1.0, 0.7), (-0.6, -1.3))]
    err = max(pdo.conjugation_check(b, t, k, l) for t, k, l in cases)
    ok = len(cases) == 12 and err <= 1e-8
    record(8, "conjugation identity", ok, f"max residual {err:.1e} over {len(cases)} cases (tol 1e-8)")
    assert ok


def _ratios(sig, seeds):
    # (symbol, tau, p) -> ratio; the symbol norm is computed once per symbol inside bound_check
    out = np.empty((len(seeds), len(TAUS), 2))
    for i, s in enumerate(seeds):
        a = pdo.random_symbol(sig, make_rng(SEED, 100 + s))
        for j, p in enumerate((1, 2)):
            out[i, :, j] = [r.ratio for r in pdo.bound_check(a, TAUS, p)]
    return out


def test_09_schatten_bound():
    seeds = range(30)
    r64 = _ratios(GridSpec((16.0,), (64,)), seeds)
    r128 = _ratios(GridSpec((16.0,), (128,)), seeds)
    spread = float((r128.max(axis=1) / r128.min(axis=1)).max())
    drift = float(np.maximum(r128 / r64, r64 / r128).max())
    ok = np.isfinite(r128).all() and r128.min() > 0 and spread < 4 and drift < 2
    record(9, "Schatten bound", ok, f"ratio range [{r128.min():.3g}, {r128.max():.3g}], "
                                    f"tau spread x{spread:.2f} (< 4), drift 64->128 x{drift:.3f} (< 2)")
    assert ok


def test_10_tau_continuity():
    slow = pdo.Symbol2D.from_function(
        GridSpec((16.0,), (128,)),
        lambda x, xi: (np.exp(np.cos(2 * np.pi * x / 16)) + np.exp(np.cos(xi / 8))
                       + 0.5 * np.cos(2 * np.pi * x / 16) * np.cos(xi / 8)))
    tab = pdo.tau_continuity(slow, 0.5, [1 / 8, 1 / 16, 1 / 32, 1 / 64], 1)
    worst = float(tab.step_ratios.max())
    ok = worst <= 0.75 and tab.relative[-1] <= 1e-4
    record(10, "tau continuity", ok, f"max step ratio {worst:.3f} (<= 0.75), final {tab.relative[-1]:.1e} (<= 1e-4)")
    assert ok


def test_11_amplitude_reduction():
    asig = GridSpec((8.0,), (8,))
    spec3 = pdo.Amplitude3.from_function(asig, lambda x, y, t: 0 * x).spec
    chi = windows.make_bump(spec3, (2.0, 2.0, 1.5))
    err, ratios = 0.0, []
    for s in range(8):
        a3 = pdo.Amplitude3(random_bandlimited(spec3, make_rng(SEED, 200 + s)))
        M = pdo.amplitude_quantize(a3)
        err = max(err, float(np.abs(M.matrix - pdo.amplitude_direct(a3)).max()))
        ratios.append(pdo.schatten_norm(M, 1).value / modnorm.swp_norm(a3.f, chi, 1).value)
    spread = max(ratios) / min(ratios)
    ok = err <= 1e-6 and np.isfinite(ratios).all() and min(ratios) > 0
    record(11, "amplitude reduction", ok,
           f"path vs direct {err:.1e} (tol 1e-6), B_1 ratio in [{min(ratios):.3g}, {max(ratios):.3g}] "
           f"(spread x{spread:.2f})")
    assert ok


def test_12_embedding():
    us = inputs(50, 10)
    chi, chif = windows.make_bump(SPEC, 2.0), windows.make_bump(FINE, 2.0)
    res = {}
    for p in (1, 2):
        c = [symcalc.embedding_check(u, 2, p, chi).ratio for u in us]
        cf = [symcalc.embedding_check(resample(u, FINE), 2, p, chif).ratio for u in us]
        res[p] = (max(c), max(max(a / b, b / a) for a, b in zip(c, cf)))
    with pytest.raises(ValueError, match="embedding"):
        symcalc.embedding_check(us[0], 1, 2, chi)
    ok = all(np.isfinite(c) and d < 2 for c, d in res.values())
    record(12, "Sobolev embedding", ok, ", ".join(f"p={p}: max ratio {c:.3g}, drift x{d:.4f}"
                                                  for p, (c, d) in res.items()) + ", t=1 rejected")
    assert ok


def test_13_periodization():
    f2 = windows.periodize_weight(1.0, 2.0, 0.0)
    ps = periodization_partial_sum()
    lo, hi = windows.periodization_bracket(1.0, 2.0)
    xs = make_rng(SEED, 11).uniform(-50, 50, 1000)
    v = windows.periodize_weight(1.0, 2.0, xs)
    worst = float(max(np.max(lo - v), np.max(v - hi)))
    ok = abs(f2 - 3.15334809) <= 1e-6 and abs(f2 - ps) <= 1e-6 and worst <= 0
    record(13, "periodization", ok, f"f2(0) = {f2:.10f} (partial sum {ps:.10f}), bracket violation {worst:.2e}")
    assert ok
