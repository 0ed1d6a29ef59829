"""Matrices of tau-quantized symbols and amplitude operators; Schatten norms by SVD.

Matrices act on h-weighted l^2, i.e. ``M_ij = h K(x_i, x_j)``, so their
singular values approximate those of the continuum operator on ``L^2``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg

from .grid import FourierCoefficients, GridSpec, SampledFunction, dft, idft, sample_cap
from .modnorm import check_p, swp_norm
from .symcalc import chirp_TA
from .windows import Lattice, make_bump

__all__ = [
    "TAU_MAX",
    "phase_space",
    "Symbol2D",
    "Amplitude3",
    "OperatorMatrix",
    "SchattenReport",
    "quantize",
    "schatten_norm",
    "conjugation_check",
    "bound_check",
    "phase_window",
    "random_symbol",
    "tau_continuity",
    "amplitude_reduce",
    "amplitude_quantize",
    "amplitude_direct",
    "write_matrix",
    "read_matrix",
]

TAU_MAX = 4.0


def phase_space(signal: GridSpec) -> GridSpec:
    """Phase-space grid whose xi-axis nodes are the frequencies of ``signal``."""
    if signal.dim != 1:
        raise ValueError("operators are discretized for 1-D signals only")
    L, N = signal.periods[0], signal.samples[0]
    return GridSpec((L, 2 * np.pi * N / L), (N, N))


def _signal_spec(phase: GridSpec) -> GridSpec:
    return GridSpec((phase.periods[0],), (phase.samples[0],))


def _check_phase(spec: GridSpec):
    if spec.dim != 2 or spec.samples[0] != spec.samples[1]:
        raise ValueError("symbol must live on a square 2-D phase-space grid")
    L, P = spec.periods
    N = spec.samples[0]
    if abs(L * P - 2 * np.pi * N) > 1e-9 * L * P:
        raise ValueError("xi-axis period must equal 2 pi N / L so its nodes are the signal frequencies")


@dataclass(frozen=True)
class Symbol2D:
    """Symbol ``a(x, xi)`` sampled on a phase-space grid."""

    f: SampledFunction
    name: str = "symbol"

    def __post_init__(self):
        _check_phase(self.f.spec)

    @property
    def spec(self) -> GridSpec:
        return self.f.spec

    @classmethod
    def from_function(cls, signal: GridSpec, fn, name: str = "symbol") -> "Symbol2D":
        ps = phase_space(signal)
        x, xi = ps.mesh()
        return cls(SampledFunction(ps, fn(x, xi)), name)

    def band_fraction(self) -> float:
        """Fraction of x-spectral energy above half the Nyquist frequency."""
        c = np.abs(dft(self.f).coeffs) ** 2
        k = np.abs(self.spec.index_axis(0))
        tot = c.sum()
        return float(c[k > self.spec.samples[0] // 4].sum() / tot) if tot > 0 else 0.0


def _as_symbol(a) -> Symbol2D:
    return a if isinstance(a, Symbol2D) else Symbol2D(a)


@dataclass(frozen=True)
class OperatorMatrix:
    matrix: np.ndarray = field(repr=False)
    tau: float | None = None
    source: str = ""
    normalization: str = "h-weighted l2"

    @property
    def shape(self) -> tuple:
        return self.matrix.shape


def quantize(a, tau: float, band_tol: float | None = None) -> OperatorMatrix:
    """Matrix of ``Op_tau(a)`` on the signal grid.

    ``M_ij = (h / L) sum_k e^{i s eta_k} a(x_i - tau s, eta_k)`` with
    ``s = x_i - x_j`` wrapped into ``[-L/2, L/2)``.  The midpoint is evaluated
    by exact trigonometric interpolation in ``x``; the ``eta``-sum for every
    offset ``s`` is one FFT.

    Parameters
    ----------
    band_tol : float, optional
        If given, reject symbols whose x-spectrum puts more than this fraction
        of energy above half-Nyquist (off-grid evaluation would be unreliable).
    """
    a = _as_symbol(a)
    tau = float(tau)
    if abs(tau) > TAU_MAX:
        raise ValueError(f"|tau| must not exceed {TAU_MAX}, got {tau}")
    if band_tol is not None and tau != round(tau) and a.band_fraction() > band_tol:
        raise ValueError("symbol band exceeds half-Nyquist; refine the grid")
    spec = a.spec
    N = spec.samples[0]
    L = spec.periods[0]
    h = L / N
    vals = a.f.values
    # spectrum in x, samples in eta
    c = h * np.fft.fftshift(np.fft.fft(np.fft.ifftshift(vals, axes=0), axis=0), axes=0)
    # g[zeta, m] = sum_k e^{2 pi i k m / N} c[zeta, k], m taken mod N
    g = N * np.fft.ifft(np.fft.ifftshift(c, axes=1), axis=1)
    m = np.arange(N)
    m = np.where(m >= N // 2, m - N, m)
    zeta = spec.freq_axis(0)
    g = g * np.exp(-1j * tau * np.multiply.outer(zeta, m * h))
    # H[i, m] = (1/L) sum_zeta e^{i x_i zeta} g[zeta, m]
    H = np.fft.fftshift(np.fft.ifft(np.fft.ifftshift(g, axes=0), axis=0), axes=0) / h
    i = np.arange(N)
    M = (h / L) * H[i[:, None], (i[:, None] - i[None, :]) % N]
    return OperatorMatrix(M, tau, a.name)


@dataclass(frozen=True)
class SchattenReport:
    p: float
    value: float
    singular_values: np.ndarray = field(repr=False)
    source: str = ""

    def to_dict(self) -> dict:
        return {"p": self.p, "value": self.value, "source": self.source,
                "singular_values": self.singular_values.tolist()}


def _matrix(M) -> np.ndarray:
    return M.matrix if isinstance(M, OperatorMatrix) else np.asarray(M)


def schatten_norm(M, p, singular_values: np.ndarray | None = None) -> SchattenReport:
    """``(sum sigma_i^p)^{1/p}`` from a dense SVD (largest singular value for ``p = inf``)."""
    p = check_p(p)
    A = _matrix(M)
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    s = scipy.linalg.svdvals(A) if singular_values is None else singular_values
    if np.isinf(p):
        val = float(s[0]) if s.size else 0.0
    else:
        # scale by sigma_1 so large p does not overflow
        top = s[0] if s.size else 0.0
        val = float(top * np.sum((s / top) ** p) ** (1 / p)) if top > 0 else 0.0
    return SchattenReport(p, val, s, getattr(M, "source", ""))


# ---------------------------------------------------------------- conjugation


def _translation_matrix(spec: GridSpec, a: float) -> np.ndarray:
    """``(T f)(x) = f(x + a)`` on the grid by trigonometric interpolation."""
    N = spec.samples[0]
    F = np.fft.fftshift(np.fft.fft(np.fft.ifftshift(np.eye(N), axes=0), axis=0), axes=0)
    F = F * np.exp(1j * a * spec.freq_axis(0))[:, None]
    return np.fft.fftshift(np.fft.ifft(np.fft.ifftshift(F, axes=0), axis=0), axes=0)


def conjugation_matrices(signal: GridSpec, tau: float, k: float, l: float):
    """Unitaries ``W, V`` with ``Op_tau(e^{i(xk + l eta)} b) = W Op_tau(b) V``.

    ``(W f)(x) = e^{i(1 - tau)(x + tau l) k} f(x + tau l)`` and
    ``(V v)(y) = e^{i tau y k} v(y + (1 - tau) l)``.
    """
    x = signal.axis(0)
    W = np.exp(1j * (1 - tau) * (x + tau * l) * k)[:, None] * _translation_matrix(signal, tau * l)
    V = np.exp(1j * tau * x * k)[:, None] * _translation_matrix(signal, (1 - tau) * l)
    return W, V


def conjugation_check(b, tau: float, k: float, l: float) -> float:
    """Max-entry residual between ``Op_tau(e^{i(xk + l eta)} b)`` and ``W Op_tau(b) V``.

    The identity is exact on the line; on the torus it holds up to the tails of
    ``b``, so ``b`` should be localized in ``x`` well inside the period.
    """
    b = _as_symbol(b)
    x, eta = b.spec.mesh()
    mod = Symbol2D(SampledFunction(b.spec, np.exp(1j * (x * k + l * eta)) * b.f.values), b.name)
    W, V = conjugation_matrices(_signal_spec(b.spec), tau, k, l)
    lhs = quantize(mod, tau).matrix
    rhs = W @ quantize(b, tau).matrix @ V
    return float(np.abs(lhs - rhs).max())


# ---------------------------------------------------------------- bounds


def random_symbol(signal: GridSpec, rng: np.random.Generator, band: int = 4, width: float = 2.0,
                  box: float = 16.0) -> Symbol2D:
    """Random trigonometric polynomial on ``[-box/2, box/2)^2`` times a Gaussian envelope.

    The symbol is a fixed smooth function of ``(x, xi)``, so it can be sampled
    on any phase-space grid (refinement keeps the same function).
    """
    k = np.arange(-band, band + 1)
    c = rng.standard_normal((k.size, k.size)) + 1j * rng.standard_normal((k.size, k.size))
    c /= k.size

    def fn(x, xi):
        w = 2 * np.pi / box
        ex = np.exp(1j * w * np.multiply.outer(x, k))
        exi = np.exp(1j * w * np.multiply.outer(xi, k))
        poly = np.einsum("...a,...b,ab->...", ex, exi, c)
        return poly * np.exp(-(x ** 2 + xi ** 2) / (2 * width ** 2))

    return Symbol2D.from_function(signal, fn, "random")



def phase_window(spec: GridSpec, step=None):
    """Default window and lattice for symbol norms: a bump of radius one lattice step."""
    if step is None:
        # fixed physical step (L/8 in x, four frequency cells in xi) so refinement keeps the window
        L = spec.periods[0]
        step = (L / 8, 8 * np.pi / L)
    lat = Lattice(spec, step)
    return make_bump(spec, tuple(lat.step)), lat


@dataclass(frozen=True)
class BoundReport:
    tau: float
    p: float
    operator_norm: float
    symbol_norm: float

    @property
    def ratio(self) -> float:
        return self.operator_norm / self.symbol_norm


def bound_check(a, tau, p, chi=None, lattice=None, method: str = "discrete"):
    """``||Op_tau(a)||_{B_p} / ||a||_{S_w^p}`` on phase space.

    ``tau`` may be a sequence; the symbol norm is then computed once and a list
    of reports is returned.
    """
    a = _as_symbol(a)
    p = check_p(p)
    if chi is None:
        chi, lat = phase_window(a.spec)
        lattice = lattice or lat
    sym = swp_norm(a.f, chi, p, method=method, lattice=lattice).value
    if sym == 0:
        raise ValueError("zero symbol: the ratio is undefined")
    taus = np.atleast_1d(tau)
    out = [BoundReport(float(t), p, schatten_norm(quantize(a, t), p).value, sym) for t in taus]
    return out if np.ndim(tau) else out[0]


@dataclass(frozen=True)
class ContinuityTable:
    tau0: float
    p: float
    deltas: np.ndarray
    diffs: np.ndarray
    base_norm: float

    @property
    def step_ratios(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.diffs[1:] / self.diffs[:-1]

    @property
    def relative(self) -> np.ndarray:
        return self.diffs / self.base_norm


def tau_continuity(a, tau0: float, deltas, p=1) -> ContinuityTable:
    """``||Op_{tau0 + delta}(a) - Op_{tau0}(a)||_{B_p}`` for each ``delta``."""
    a = _as_symbol(a)
    p = check_p(p)
    base = quantize(a, tau0).matrix
    diffs = np.array([schatten_norm(quantize(a, tau0 + d).matrix - base, p).value if d != 0 else 0.0
                      for d in deltas])
    return ContinuityTable(float(tau0), p, np.asarray(deltas, dtype=float), diffs,
                           schatten_norm(base, p).value)


# ---------------------------------------------------------------- amplitudes


AMPLITUDE_CAP = 32 ** 3


@dataclass(frozen=True)
class Amplitude3:
    """Amplitude ``a(x, y, theta)`` on the grid ``(L, L, 2 pi N / L)``."""

    f: SampledFunction
    name: str = "amplitude"

    def __post_init__(self):
        s = self.f.spec
        if s.dim != 3 or len(set(s.samples)) != 1 or s.periods[0] != s.periods[1]:
            raise ValueError("amplitude must live on an (L, L, 2 pi N / L) grid with equal sample counts")
        if s.size > min(AMPLITUDE_CAP, sample_cap()):
            raise MemoryError(f"amplitude grid {s.samples} exceeds the cap of {AMPLITUDE_CAP} samples")
        _check_phase(GridSpec((s.periods[0], s.periods[2]), (s.samples[0], s.samples[2])))

    @property
    def spec(self) -> GridSpec:
        return self.f.spec

    @classmethod
    def from_function(cls, signal: GridSpec, fn, name: str = "amplitude") -> "Amplitude3":
        L, N = signal.periods[0], signal.samples[0]
        spec = GridSpec((L, L, 2 * np.pi * N / L), (N, N, N))
        return cls(SampledFunction(spec, fn(*spec.mesh())), name)


def amplitude_reduce(a3: Amplitude3) -> Symbol2D:
    """``a_0(x, xi)``: chirp the ``(y, theta)`` variables, then restrict to ``y = x``.

    The chirp multiplies the spectrum by ``e^{i zeta_y zeta_theta}``, the
    transform of the phase ``-<y, theta>``; ``Op_0(a_0)`` equals the amplitude operator.
    """
    A = np.array([[0.0, 1.0], [1.0, 0.0]])
    b = chirp_TA(a3.f, -A, axes=(1, 2))
    N = a3.spec.samples[0]
    i = np.arange(N)
    vals = b.values[i, i, :]
    ps = GridSpec((a3.spec.periods[0], a3.spec.periods[2]), (N, N))
    return Symbol2D(SampledFunction(ps, vals), a3.name + ":reduced")


def amplitude_quantize(a3: Amplitude3) -> OperatorMatrix:
    """Matrix of the amplitude operator via ``Op_0`` of the reduced symbol."""
    M = quantize(amplitude_reduce(a3), 0.0)
    return OperatorMatrix(M.matrix, None, a3.name)


def amplitude_direct(a3: Amplitude3) -> np.ndarray:
    """Oracle: ``M_ij = (h / L) sum_k e^{i (x_i - x_j) theta_k} a(x_i, x_j, theta_k)``."""
    L = a3.spec.periods[0]
    N = a3.spec.samples[0]
    h = L / N
    x = a3.spec.axis(0)
    th = a3.spec.axis(2)
    ph = np.exp(1j * (x[:, None, None] - x[None, :, None]) * th[None, None, :])
    return (h / L) * np.sum(ph * a3.f.values, axis=2)


# ---------------------------------------------------------------- I/O


def write_matrix(path, M) -> Path:
    """Little-endian complex64 row-major payload plus a ``.json`` sidecar."""
    path = Path(path)
    A = _matrix(M)
    try:
        path.write_bytes(np.ascontiguousarray(A, dtype="<c8").tobytes())
        meta = {"rows": A.shape[0], "cols": A.shape[1], "dtype": "complex64", "byteorder": "little",
                "order": "row-major",
                "tau": getattr(M, "tau", None), "source": getattr(M, "source", ""),
                "normalization": getattr(M, "normalization", "h-weighted l2")}
        path.with_suffix(path.suffix + ".json").write_text(json.dumps(meta, indent=2, sort_keys=True))
    except OSError as e:
        raise OSError(f"cannot write matrix to {path}: {e}") from e
    return path


def read_matrix(path) -> OperatorMatrix:
    path = Path(path)
    side = path.with_suffix(path.suffix + ".json")
    try:
        meta = json.loads(side.read_text())
        raw = np.frombuffer(path.read_bytes(), dtype="<c8")
    except OSError as e:
        raise OSError(f"cannot read matrix {path}: {e}") from e
    A = raw.reshape(meta["rows"], meta["cols"]).astype(complex)
    return OperatorMatrix(A, meta.get("tau"), meta.get("source", ""), meta.get("normalization", ""))
