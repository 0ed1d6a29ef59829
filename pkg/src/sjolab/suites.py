"""Experiment configuration and the per-module verification suites."""
from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import decomp, modnorm, pdo, symcalc, windows
from .grid import (GridSpec, SampledFunction, convolve, dft, eval_trig, idft,
                   lp_norm, random_bandlimited, sample, translate)
from .rng import make_rng

__all__ = [
    "SUITES",
    "ConfigError",
    "ExperimentConfig",
    "Check",
    "VerificationReport",
    "run_suite",
    "emit_plots_data",
]

SUITES = ("grid", "windows", "modnorm", "decomp", "symcalc", "pdo")
WINDOW_KINDS = ("bump", "gaussian")


class ConfigError(ValueError):
    """Invalid configuration value; ``field`` names the offending entry."""

    def __init__(self, field: str, msg: str):
        super().__init__(f"{field}: {msg}")
        self.field = field
        self.msg = msg


def _parse_p(v) -> float:
    if isinstance(v, str) and v.lower() in ("inf", "infinity"):
        return math.inf
    return float(v)


@dataclass
class ExperimentConfig:
    L: float = 32.0
    N: int = 256
    window: str = "bump"
    radius: float = 2.0
    lattice_step: float = 1.0
    freq_step: float = math.pi / 2
    p: list = field(default_factory=lambda: [1.0, 2.0, math.inf])
    tau: list = field(default_factory=lambda: [-1.0, 0.0, 0.25, 0.5, 1.0, 2.0])
    seed: int = 20240611
    samples: int = 8
    symbol_L: float = 16.0
    symbol_N: int = 64
    suite: str = "all"
    out: str = "sjolab-out"

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise ConfigError(sorted(extra)[0], "unknown configuration key")
        cfg = cls(**d)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            d = json.loads(Path(path).read_text())
        except OSError as e:
            raise ConfigError("config", f"cannot read {path}: {e}") from e
        except json.JSONDecodeError as e:
            raise ConfigError("config", f"{path} is not valid JSON: {e}") from e
        return cls.from_dict(d)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["p"] = ["inf" if math.isinf(v) else v for v in self.p]
        return d

    def validate(self) -> "ExperimentConfig":
        """Check every field against the module preconditions; raises :class:`ConfigError`."""
        try:
            self.p = [modnorm.check_p(_parse_p(v)) for v in np.atleast_1d(self.p).tolist()]
        except (TypeError, ValueError) as e:
            raise ConfigError("p", str(e)) from None
        if not self.p:
            raise ConfigError("p", "at least one exponent is required")
        try:
            self.tau = [float(t) for t in np.atleast_1d(self.tau).tolist()]
        except (TypeError, ValueError) as e:
            raise ConfigError("tau", str(e)) from None
        for t in self.tau:
            if abs(t) > pdo.TAU_MAX:
                raise ConfigError("tau", f"|tau| must not exceed {pdo.TAU_MAX}, got {t}")
        for name in ("N", "symbol_N"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 8 or v % 2:
                raise ConfigError(name, f"must be an even integer >= 8, got {v!r}")
        for name in ("L", "symbol_L", "radius", "lattice_step", "freq_step"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not v > 0 or not math.isfinite(v):
                raise ConfigError(name, f"must be a positive number, got {v!r}")
        if self.window not in WINDOW_KINDS:
            raise ConfigError("window", f"must be one of {WINDOW_KINDS}, got {self.window!r}")
        if self.window == "bump" and not self.radius < self.L / 2:
            raise ConfigError("radius", f"bump radius must be below L/2 = {self.L / 2}")
        if not isinstance(self.seed, (int, np.integer)) or not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed", "must be an integer in [0, 2^64)")
        if not isinstance(self.samples, (int, np.integer)) or self.samples < 1:
            raise ConfigError("samples", "must be a positive integer")
        if self.suite not in SUITES + ("all",):
            raise ConfigError("suite", f"must be one of {SUITES + ('all',)}, got {self.suite!r}")
        try:
            spec = self.spec()
            windows.Lattice(spec, self.lattice_step)
            windows.Lattice(spec.dual(), self.freq_step)
        except (ValueError, MemoryError) as e:
            raise ConfigError("lattice_step" if "step" in str(e) else "N", str(e)) from None
        return self

    def spec(self) -> GridSpec:
        return GridSpec((float(self.L),), (int(self.N),))

    def make_window(self, spec: GridSpec | None = None):
        spec = spec or self.spec()
        if self.window == "bump":
            return windows.make_bump(spec, self.radius)
        return windows.make_gaussian(spec, self.radius)


@dataclass
class Check:
    name: str
    passed: bool
    value: float
    tol: float
    anchor: str

    def to_dict(self) -> dict:
        return {"name": self.name, "status": "pass" if self.passed else "fail",
                "value": _num(self.value), "tol": _num(self.tol), "anchor": self.anchor}


def _num(v):
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


@dataclass
class VerificationReport:
    suite: str
    checks: list = field(default_factory=list)
    wall_time: float = 0.0
    data: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self, timing: bool = False) -> dict:
        d = {"suite": self.suite, "status": "pass" if self.ok else "fail",
             "checks": [c.to_dict() for c in self.checks], "data": self.data}
        if timing:
            d["wall_time"] = self.wall_time
        return d

    def to_json(self) -> str:
        """Deterministic JSON (wall time excluded so fixed seeds give identical bytes)."""
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def table(self) -> str:
        w = max([len(c.name) for c in self.checks] + [5])
        lines = [f"{'check':<{w}}  status  {'value':>12}  {'tol':>9}"]
        for c in self.checks:
            lines.append(f"{c.name:<{w}}  {'pass' if c.passed else 'FAIL':<6}  {c.value:>12.4e}  {c.tol:>9.1e}")
        lines.append(f"suite {self.suite}: {'PASS' if self.ok else 'FAIL'} "
                     f"({sum(c.passed for c in self.checks)}/{len(self.checks)}) in {self.wall_time:.2f} s")
        return "\n".join(lines)


def _le(name, value, tol, anchor) -> Check:
    return Check(name, bool(value <= tol), float(value), float(tol), anchor)


def _rel(a, b) -> float:
    a, b = np.asarray(a), np.asarray(b)
    den = np.abs(b).max()
    return float(np.abs(a - b).max() / den) if den > 0 else float(np.abs(a).max())


def _inputs(cfg, spec=None, stream=0, band=None):
    spec = spec or cfg.spec()
    rng = make_rng(cfg.seed, stream)
    band = band or spec.samples[0] // 8
    return [random_bandlimited(spec, rng, band=band) for _ in range(cfg.samples)]


# ---------------------------------------------------------------- suites


def _suite_grid(cfg):
    spec = cfg.spec()
    us = _inputs(cfg, stream=1)
    vs = _inputs(cfg, stream=2)
    pars, conv, inv, nodes, shift = [], [], [], [], []
    for u, v in zip(us, vs):
        c = dft(u)
        e_phys = lp_norm(u, 2) ** 2
        e_freq = spec.freq_cell / (2 * np.pi) * np.sum(np.abs(c.coeffs) ** 2)
        pars.append(abs(e_phys - e_freq) / e_phys)
        conv.append(_rel(dft(convolve(u, v)).coeffs, c.coeffs * dft(v).coeffs))
        inv.append(_rel(idft(c).values, u.values))
        nodes.append(_rel(eval_trig(c, spec.axis(0)[::7]), u.values[::7]))
        shift.append(_rel(translate(u, 3 * spec.spacing[0]).values, np.roll(u.values, 3)))
    return [
        _le("parseval", max(pars), 1e-11, "Parseval identity for the torus transform"),
        _le("convolution_theorem", max(conv), 1e-11, "transform of a convolution is the product"),
        _le("inversion", max(inv), 1e-11, "inverse transform recovers the samples"),
        _le("trig_interpolation_nodes", max(nodes), 1e-11, "interpolant reproduces grid samples"),
        _le("translation_grid_shift", max(shift), 1e-11, "translation by a grid step is an index roll"),
    ], {}


F2_ORIGIN = 3.1533480949371624  # pi coth pi


def periodization_partial_sum(K: int = 10 ** 6) -> float:
    """``sum_{|k| <= K} (1 + k^2)^{-1}`` plus the integral tail ``2 / (K + 1/2)``."""
    k = np.arange(1, K + 1, dtype=float)
    return float(1 + 2 * np.sum(1 / (1 + k ** 2)[::-1]) + 2 / (K + 0.5))


def _suite_windows(cfg):
    spec = cfg.spec()
    lat = windows.Lattice(spec, cfg.lattice_step)
    pou = windows.make_pou(spec, lat)
    f2 = windows.periodize_weight(1.0, 2.0, 0.0)
    rng = make_rng(cfg.seed, 3)
    lo, hi = windows.periodization_bracket(1.0, 2.0)
    xs = rng.uniform(-50, 50, 1000)
    vals = windows.periodize_weight(1.0, 2.0, xs)
    worst = float(max(np.max(lo - vals), np.max(vals - hi)))
    return [
        _le("pou_residual", pou.residual, 1e-10, "lattice translates of the window sum to one"),
        _le("f2_origin_partial_sum", abs(f2 - periodization_partial_sum()), 1e-6,
            "periodized weight at the origin"),
        _le("f2_origin_closed_form", abs(f2 - F2_ORIGIN), 1e-10, "periodized weight equals pi coth pi"),
        _le("periodization_bracket", worst, 0.0, "two-sided bound on the periodized weight at 1000 points"),
    ], {}


def _suite_modnorm(cfg):
    spec = cfg.spec()
    chi = cfg.make_window(spec)
    us = _inputs(cfg, stream=4)
    rng = make_rng(cfg.seed, 5)
    fl = 0.0
    for u in us:
        for k in rng.integers(-spec.samples[0] // 4, spec.samples[0] // 4, 4):
            xi0 = float(k * spec.freq_step[0])
            # scale by |u| rather than the localized band, which may be empty
            err = np.abs(modnorm.freq_localize(u, chi, xi0).values
                         - modnorm.freq_localize_rhs(u, chi, xi0).values).max()
            fl = max(fl, err / np.abs(u.values).max())
    lat = windows.Lattice(spec, 1.0)
    pou = windows.make_pou(spec, lat)
    psi = windows.make_plateau(spec, 0.75 + 0.5 + 0.05, 0.75 + 0.5 + 1.0)
    up, low = 0.0, 0.0
    for u in us[:4]:
        for p in cfg.p:
            r = modnorm.equivalence_report(u, pou, psi, p)
            up, low = max(up, r.residual_upper), max(low, r.residual_lower)
    one = sample(spec, lambda x: np.ones_like(x))
    prof = modnorm.profile_continuous(one, chi, np.inf)
    ref = np.abs(dft(chi.f).coeffs)
    data = {"profile": {"p": _num(cfg.p[0]), "xi": spec.freq_axis(0).tolist(),
                        "U": modnorm.profile_continuous(us[0], chi, cfg.p[0]).tolist()}}
    return [
        _le("frequency_localization", fl, 1e-9, "frequency localization through the windowed transform"),
        _le("comparison_upper", up, 1e-8, "continuous norm dominated by the lattice norm"),
        _le("comparison_lower", low, 1e-8, "lattice norm dominated by the continuous norm"),
        _le("constant_profile", _rel(prof, ref), 1e-10, "profile of u = 1 is the window transform"),
    ], data


def _suite_decomp(cfg):
    spec = cfg.spec()
    flat = windows.Lattice(spec.dual(), cfg.freq_step)
    pou = windows.make_pou(spec.dual(), flat)
    cover = decomp.cover_window(pou)
    us = _inputs(cfg, stream=6)
    rec, ret, slack = 0.0, 0.0, np.inf
    for u in us:
        dec = decomp.decompose(u, pou)
        rec = max(rec, _rel(decomp.reconstruct(dec).values, u.values))
        ret = max(ret, decomp.retract_roundtrip(u, pou, cover) / np.abs(u.values).max())
        for alpha in (1, 2):
            slack = min(slack, decomp.derivative_bound_check(decomp.demodulate(dec), alpha, 2, cover).min_slack)
    return [
        _le("reconstruction", rec, 1e-10, "bands sum back to the signal"),
        _le("retract_roundtrip", ret, 1e-10, "synthesis after analysis is the identity"),
        _le("derivative_bound", -slack, 1e-9, "derivatives of demodulated bands are uniformly bounded"),
    ], {}


def _suite_symcalc(cfg):
    spec = cfg.spec()
    chi = cfg.make_window(spec)
    us = _inputs(cfg, stream=7)
    vs = _inputs(cfg, stream=8)
    A = symcalc.ChirpSpec([[0.7]])
    rt = max(_rel(symcalc.chirp_TA(symcalc.chirp_TA(u, A), -A).values, u.values) for u in us)
    iso = max(abs(lp_norm(symcalc.chirp_TA(u, A), 2) / lp_norm(u, 2) - 1) for u in us)
    g = sample(spec, lambda x: np.exp(-x ** 2 / 2) * (1 + 0.5 * np.cos(2 * x)))
    ts = [2.0 ** -k for k in range(2, 32, 2)]
    d = symcalc.chirp_continuity(g, [[1.0]], [[0.7]], chi, 1, ts)
    mono = bool(np.all(np.diff(d) < 0))
    slack = min(symcalc.product(u, v, chi, p)[1].slack for u, v in zip(us, vs) for p in cfg.p)
    ps = pdo.phase_space(GridSpec((cfg.symbol_L,), (cfg.symbol_N,)))
    a = random_bandlimited(ps, make_rng(cfg.seed, 9), band=cfg.symbol_N // 8)
    qc = symcalc.quantization_change
    group = _rel(qc(qc(a, 0.0, 0.5), 0.5, 1.0).values, qc(a, 0.0, 1.0).values)
    rng = make_rng(cfg.seed, 10)
    X, Y = rng.normal(0, 5, (1000, 3)), rng.normal(0, 5, (1000, 3))
    peetre = float(symcalc.peetre_slack(X, Y, rng.uniform(-6, 6, 1000)).min())
    s2 = GridSpec((16.0, 16.0), (64, 64))
    gg = sample(s2, lambda x, y: np.exp(-(x ** 2 + 2 * y ** 2) / 2) * np.cos(x))
    iso90 = symcalc.isometry_equivariance(gg, [[0, -1], [1, 0]], lambda r: 1 / (1 + r ** 2))
    return [
        _le("chirp_inverse", rt, 1e-11, "T_{-A} T_A is the identity"),
        _le("chirp_l2_isometry", iso, 1e-11, "unimodular multiplier preserves L2"),
        Check("chirp_continuity", mono and d[-1] < 1e-6, float(d[-1]), 1e-6,
              "chirp depends continuously on A"),
        _le("ideal_bound", -slack, 1e-9, "product bound with squared window"),
        _le("quantization_group_law", group, 1e-12, "quantization changes compose"),
        _le("peetre", -peetre, 0.0, "Peetre inequality"),
        _le("rotation_equivariance_90", iso90, 1e-10, "radial multipliers commute with rotations"),
    ], {}


def _suite_pdo(cfg):
    sig = GridSpec((cfg.symbol_L,), (cfg.symbol_N,))
    ps = pdo.phase_space(sig)
    x = sig.axis(0)
    L = cfg.symbol_L
    mult = pdo.Symbol2D.from_function(sig, lambda x, xi: np.exp(np.cos(2 * np.pi * x / L)) + 0 * xi)
    diag_err = 0.0
    for t in cfg.tau:
        M = pdo.quantize(mult, t).matrix
        diag_err = max(diag_err, np.abs(M - np.diag(np.exp(np.cos(2 * np.pi * x / L)))).max())
    fm = pdo.Symbol2D.from_function(sig, lambda x, xi: 0 * x + 1 / (1 + xi ** 2))
    N = cfg.symbol_N
    F = np.fft.fftshift(np.fft.fft(np.fft.ifftshift(np.eye(N), axes=0), axis=0), axes=0)
    Finv = np.linalg.inv(F)
    fm_err = max(np.abs(F @ pdo.quantize(fm, t).matrix @ Finv - np.diag(1 / (1 + sig.freq_axis(0) ** 2))).max()
                 for t in cfg.tau)
    gauss = pdo.Symbol2D.from_function(sig, lambda x, xi: 2 * np.exp(-(x ** 2 + xi ** 2)), "gaussian")
    rep = pdo.schatten_norm(pdo.quantize(gauss, 0.5), 1)
    sv = rep.singular_values
    # conjugation on a localized symbol
    csig = GridSpec((32.0,), (128,))
    b = pdo.Symbol2D.from_function(csig, lambda x, xi: np.exp(-(x ** 2 + xi ** 2) / 2))
    conj = 0.0
    for t in (0.0, 0.5, 1.0):
        for k, l in ((3 * 2 * np.pi / 32, 0.25), (1.0, 0.7)):
            conj = max(conj, pdo.conjugation_check(b, t, k, l))
    rng = make_rng(cfg.seed, 11)
    a = pdo.random_symbol(sig, rng)
    M = pdo.quantize(a, 0.25)
    s = pdo.schatten_norm(M, 1).singular_values
    norms = [pdo.schatten_norm(M, p, s).value for p in (1, 1.5, 2, 4, np.inf)]
    mono = float(max(np.diff(norms).max(), 0.0))
    frob = abs(pdo.schatten_norm(M, 2, s).value - np.linalg.norm(M.matrix)) / np.linalg.norm(M.matrix)
    # tighter envelope so the symbol is negligible at the x-boundary
    real = pdo.random_symbol(sig, rng, width=1.2)
    real = pdo.Symbol2D(SampledFunction(ps, real.f.values.real))
    Mw = pdo.quantize(real, 0.5).matrix
    herm = float(np.abs(Mw - Mw.conj().T).max())
    a_half = pdo.Symbol2D(symcalc.quantization_change(a.f, 0.25, 0.5))
    cross = abs(pdo.schatten_norm(pdo.quantize(a_half, 0.5), 1).value - norms[0]) / norms[0]
    slow = pdo.Symbol2D.from_function(
        GridSpec((16.0,), (128,)),
        lambda x, xi: (np.exp(np.cos(2 * np.pi * x / 16)) + np.exp(np.cos(xi * 16 / 128))
                       + 0.5 * np.cos(2 * np.pi * x / 16) * np.cos(xi * 16 / 128)))
    deltas = [1 / 8, 1 / 16, 1 / 32, 1 / 64]
    tab = pdo.tau_continuity(slow, 0.5, deltas, 1)
    cont_ok = bool(np.all(tab.step_ratios <= 0.75)) and tab.relative[-1] <= 1e-4
    asig = GridSpec((8.0,), (8,))
    a3 = pdo.Amplitude3(random_bandlimited(
        pdo.Amplitude3.from_function(asig, lambda x, y, t: 0 * x).spec, make_rng(cfg.seed, 12)))
    amp = float(np.abs(pdo.amplitude_quantize(a3).matrix - pdo.amplitude_direct(a3)).max())
    data = {"singular_values": sv.tolist(),
            "tau_continuity": {"delta": deltas, "diff": tab.diffs.tolist(),
                               "relative": tab.relative.tolist()}}
    return [
        _le("multiplication_diagonal", diag_err, 1e-12, "x-only symbols quantize to diagonal matrices"),
        _le("multiplier_diagonalized", fm_err, 1e-10, "xi-only symbols are diagonal in the Fourier basis"),
        _le("gaussian_sigma1", abs(sv[0] - 1), 1e-6, "Gaussian Weyl symbol is a rank-one projector"),
        _le("gaussian_sigma2", sv[1], 1e-6, "Gaussian Weyl symbol is a rank-one projector"),
        _le("conjugation", conj, 1e-8, "modulated symbols are unitary conjugates"),
        _le("schatten_monotone", mono, 1e-12, "Schatten norms decrease in p"),
        _le("hilbert_schmidt_frobenius", frob, 1e-10, "B_2 norm is the Frobenius norm"),
        _le("weyl_hermitian", herm, 1e-9, "real Weyl symbols give self-adjoint operators"),
        _le("cross_quantization", cross, 1e-7, "quantization change preserves the operator"),
        Check("tau_continuity", cont_ok, float(tab.relative[-1]), 1e-4, "operators depend continuously on tau"),
        _le("amplitude_reduction", amp, 1e-6, "amplitude operator equals the reduced symbol operator"),
    ], data


_RUNNERS = {"grid": _suite_grid, "windows": _suite_windows, "modnorm": _suite_modnorm,
            "decomp": _suite_decomp, "symcalc": _suite_symcalc, "pdo": _suite_pdo}


def run_suite(cfg: ExperimentConfig, suite: str | None = None) -> VerificationReport:
    """Run one module suite (or ``"all"``) and collect its checks."""
    suite = suite or cfg.suite
    if suite not in SUITES + ("all",):
        raise ConfigError("suite", f"unknown suite {suite!r}")
    names = SUITES if suite == "all" else (suite,)
    rep = VerificationReport(suite)
    t0 = time.perf_counter()
    for name in names:
        checks, data = _RUNNERS[name](cfg)
        for c in checks:
            c.name = f"{name}.{c.name}" if suite == "all" else c.name
        rep.checks.extend(checks)
        rep.data.update(data)
    rep.wall_time = time.perf_counter() - t0
    return rep


# ---------------------------------------------------------------- CSV


def _fmt(v) -> str:
    return format(float(v), ".15g")


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for r in rows:
                w.writerow([_fmt(v) for v in r])
    except OSError as e:
        raise OSError(f"cannot write {path}: {e}") from e
    return path


def emit_plots_data(report, outdir) -> list:
    """Write singular-value, profile and tau-continuity CSVs; missing data gives header-only files."""
    data = report.data if isinstance(report, VerificationReport) else report.get("data", {})
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    sv = data.get("singular_values", [])
    prof = data.get("profile", {})
    tc = data.get("tau_continuity", {})
    return [
        write_csv(out / "singular_values.csv", ["index", "sigma"], [(i, s) for i, s in enumerate(sv)]),
        write_csv(out / "profile.csv", ["xi", "U"], zip(prof.get("xi", []), prof.get("U", []))),
        write_csv(out / "tau_continuity.csv", ["delta", "diff", "relative"],
                  zip(tc.get("delta", []), tc.get("diff", []), tc.get("relative", []))),
    ]
