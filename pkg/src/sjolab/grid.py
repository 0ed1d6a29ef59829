"""Sampled periodic functions on the torus [-L/2, L/2)^d and their Fourier analysis.

Conventions
-----------
Grid nodes are ``x_j = -L/2 + j h`` with ``h = L/N``; the origin is node ``N/2``.
Frequencies are ``xi_k = 2 pi k / L`` for ``k`` in ``[-N/2, N/2)`` and every
coefficient array is stored in that centered order.

The forward transform is the quadrature of ``int e^{-i<x,xi>} f(x) dx``::

    c_k = h^d sum_j e^{-i<x_j, xi_k>} f_j

and the inverse carries ``(2 pi)^{-d}`` times the frequency step ``(2 pi/L)^d``,
i.e. ``f_j = L^{-d} sum_k c_k e^{i<x_j, xi_k>}``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "GridSpec",
    "SampledFunction",
    "FourierCoefficients",
    "dft",
    "idft",
    "eval_trig",
    "lp_norm",
    "translate",
    "modulate",
    "convolve",
    "pointwise_mul",
    "pairing",
    "fourier_multiplier",
    "sample",
    "random_bandlimited",
    "resample",
    "sample_cap",
    "set_sample_cap",
]

_SAMPLE_CAP = 1 << 24


def sample_cap() -> int:
    """Largest total sample count a GridSpec may have."""
    return _SAMPLE_CAP


def set_sample_cap(cap: int) -> int:
    """Change the memory budget for grids, returning the previous cap."""
    global _SAMPLE_CAP
    if cap < 8:
        raise ValueError("sample cap must be at least 8")
    old, _SAMPLE_CAP = _SAMPLE_CAP, int(cap)
    return old


def _as_tuple(v, d=None, kind=float):
    if np.ndim(v) == 0:
        v = [v] * (1 if d is None else d)
    return tuple(kind(t) for t in v)


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid with per-axis period ``L_i`` and ``N_i`` samples.

    Parameters
    ----------
    periods : sequence of float
        Period ``L_i`` of each axis.
    samples : sequence of int
        Number of samples ``N_i`` of each axis, even and at least 8.
    """

    periods: tuple
    samples: tuple

    def __post_init__(self):
        periods = _as_tuple(self.periods)
        samples = _as_tuple(self.samples, len(periods), int)
        if len(periods) != len(samples):
            raise ValueError("periods and samples must have the same length")
        if not 1 <= len(periods) <= 3:
            raise ValueError(f"dimension must be 1, 2 or 3, got {len(periods)}")
        for L in periods:
            if not (np.isfinite(L) and L > 0):
                raise ValueError(f"period must be positive, got {L}")
        for N in samples:
            if N < 8 or N % 2:
                raise ValueError(f"samples per axis must be even and >= 8, got {N}")
        if int(np.prod(samples)) > _SAMPLE_CAP:
            raise MemoryError(
                f"grid of {int(np.prod(samples))} samples exceeds the cap of {_SAMPLE_CAP}"
            )
        object.__setattr__(self, "periods", periods)
        object.__setattr__(self, "samples", samples)

    @classmethod
    def cube(cls, d: int, L: float, N: int) -> "GridSpec":
        return cls((float(L),) * d, (int(N),) * d)

    @property
    def dim(self) -> int:
        return len(self.samples)

    @property
    def shape(self) -> tuple:
        return self.samples

    @property
    def size(self) -> int:
        return int(np.prod(self.samples))

    @property
    def spacing(self) -> tuple:
        return tuple(L / N for L, N in zip(self.periods, self.samples))

    @property
    def freq_step(self) -> tuple:
        return tuple(2 * np.pi / L for L in self.periods)

    @property
    def cell(self) -> float:
        """Volume ``h^d`` of one grid cell."""
        return float(np.prod(self.spacing))

    @property
    def freq_cell(self) -> float:
        """Volume ``(2 pi / L)^d`` of one frequency cell."""
        return float(np.prod(self.freq_step))

    def axis(self, i: int) -> np.ndarray:
        N, h = self.samples[i], self.spacing[i]
        return (np.arange(N) - N // 2) * h

    def freq_axis(self, i: int) -> np.ndarray:
        N = self.samples[i]
        return (np.arange(N) - N // 2) * self.freq_step[i]

    def index_axis(self, i: int) -> np.ndarray:
        N = self.samples[i]
        return np.arange(N) - N // 2

    def mesh(self) -> tuple:
        return tuple(np.meshgrid(*[self.axis(i) for i in range(self.dim)], indexing="ij"))

    def freq_mesh(self) -> tuple:
        return tuple(np.meshgrid(*[self.freq_axis(i) for i in range(self.dim)], indexing="ij"))

    def dual(self) -> "GridSpec":
        """The frequency grid viewed as a periodic grid of its own.

        Its nodes coincide with the frequencies ``xi_k``, so windows built on
        the dual spec act as Fourier multipliers on this one.
        """
        return GridSpec(tuple(2 * np.pi * N / L for L, N in zip(self.periods, self.samples)),
                        self.samples)

    def refine(self, factor: int = 2) -> "GridSpec":
        return GridSpec(self.periods, tuple(N * factor for N in self.samples))

    def to_dict(self) -> dict:
        return {"periods": list(self.periods), "samples": list(self.samples)}

    @classmethod
    def from_dict(cls, d: dict) -> "GridSpec":
        return cls(tuple(d["periods"]), tuple(d["samples"]))


def _check_values(spec: GridSpec, values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=complex)
    if arr.size != spec.size:
        raise ValueError(f"{name} has {arr.size} entries, expected {spec.size}")
    arr = arr.reshape(spec.shape)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SampledFunction:
    """Complex samples of a periodic function on ``spec``'s grid (row-major)."""

    spec: GridSpec
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "values", _check_values(self.spec, self.values, "values"))

    def _like(self, values) -> "SampledFunction":
        return SampledFunction(self.spec, values)

    def _other(self, other):
        if isinstance(other, SampledFunction):
            _same_spec(self, other)
            return other.values
        return other

    def __add__(self, other):
        return self._like(self.values + self._other(other))

    def __sub__(self, other):
        return self._like(self.values - self._other(other))

    def __mul__(self, other):
        return self._like(self.values * self._other(other))

    __rmul__ = __mul__
    __radd__ = __add__

    def __neg__(self):
        return self._like(-self.values)

    def conj(self) -> "SampledFunction":
        return self._like(self.values.conj())

    def to_json(self) -> str:
        flat = np.empty(2 * self.spec.size)
        flat[0::2] = self.values.real.ravel()
        flat[1::2] = self.values.imag.ravel()
        return json.dumps({"spec": self.spec.to_dict(), "values": [float(v) for v in flat]})

    @classmethod
    def from_json(cls, text: str) -> "SampledFunction":
        d = json.loads(text)
        spec = GridSpec.from_dict(d["spec"])
        flat = np.asarray(d["values"], dtype=float)
        if flat.size != 2 * spec.size:
            raise ValueError(f"expected {2 * spec.size} interleaved values, got {flat.size}")
        return cls(spec, flat[0::2] + 1j * flat[1::2])


@dataclass(frozen=True)
class FourierCoefficients:
    """Coefficients ``c_k`` at ``xi_k = 2 pi k / L``, centered order ``k in [-N/2, N/2)``."""

    spec: GridSpec
    coeffs: np.ndarray = field(repr=False)
    convention: str = "forward e^{-i<x,xi>} dx; inverse (2pi)^{-d} dxi"

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _check_values(self.spec, self.coeffs, "coeffs"))

    def at(self, k: Sequence[int]) -> complex:
        """Coefficient at integer frequency index ``k``."""
        k = _as_tuple(k, self.spec.dim, int)
        return complex(self.coeffs[tuple(ki + N // 2 for ki, N in zip(k, self.spec.samples))])


def _same_spec(f, g):
    if f.spec != g.spec:
        raise ValueError("inputs live on different grids")


def _axes(spec):
    return tuple(range(spec.dim))


def dft(f: SampledFunction) -> FourierCoefficients:
    """Quadrature Fourier transform ``c_k = h^d sum_j e^{-i<x_j,xi_k>} f_j``."""
    ax = _axes(f.spec)
    c = np.fft.fftshift(np.fft.fftn(np.fft.ifftshift(f.values, axes=ax), axes=ax), axes=ax)
    return FourierCoefficients(f.spec, c * f.spec.cell)


def idft(c: FourierCoefficients) -> SampledFunction:
    """Inverse of :func:`dft`: ``f_j = L^{-d} sum_k c_k e^{i<x_j,xi_k>}``."""
    ax = _axes(c.spec)
    v = np.fft.fftshift(np.fft.ifftn(np.fft.ifftshift(c.coeffs, axes=ax), axes=ax), axes=ax)
    return SampledFunction(c.spec, v / c.spec.cell)


def eval_trig(c: FourierCoefficients, point, chunk: int = 4096) -> np.ndarray | complex:
    """Evaluate the trigonometric interpolant ``L^{-d} sum_k c_k e^{i<x,xi_k>}``.

    Parameters
    ----------
    c : FourierCoefficients
    point : array_like
        One point of shape ``(d,)`` or a batch of shape ``(..., d)``.  For
        ``d = 1`` the input is a scalar or an array of abscissae.

    Returns
    -------
    complex or ndarray
        Values at the points; a scalar for a single point.
    """
    spec = c.spec
    d = spec.dim
    pts = np.asarray(point, dtype=float)
    if d == 1:
        scalar = pts.ndim == 0
        pts = pts[..., None]
    else:
        scalar = pts.ndim == 1
        if pts.shape[-1] != d:
            raise ValueError(f"points must have trailing dimension {d}")
    out_shape = pts.shape[:-1]
    pts = pts.reshape(-1, d)
    freqs = [spec.freq_axis(i) for i in range(d)]
    out = np.empty(pts.shape[0], dtype=complex)
    letters = "abc"[:d]
    expr = ",".join(f"p{a}" for a in letters) + "," + letters + "->p"
    for s in range(0, pts.shape[0], chunk):
        p = pts[s:s + chunk]
        E = [np.exp(1j * np.outer(p[:, i], freqs[i])) for i in range(d)]
        out[s:s + chunk] = np.einsum(expr, *E, c.coeffs, optimize=True)
    out /= float(np.prod(spec.periods))
    if scalar:
        return complex(out[0])
    return out.reshape(out_shape)


def lp_norm(f: SampledFunction, p: float) -> float:
    """Riemann ``L^p`` norm ``(h^d sum |f_j|^p)^{1/p}``; the max modulus for ``p = inf``."""
    p = float(p)
    if not p >= 1:
        raise ValueError(f"p must lie in [1, inf], got {p}")
    a = np.abs(f.values).ravel()
    if np.isinf(p):
        return float(a.max())
    if p == 1:
        return float(f.spec.cell * a.sum())
    if p == 2:
        return float(np.sqrt(f.spec.cell * np.sum(a * a)))
    m = a.max()
    if m == 0:
        return 0.0
    return float(m * (f.spec.cell * np.sum((a / m) ** p)) ** (1 / p))


def _phase(spec: GridSpec, y) -> np.ndarray:
    y = _as_tuple(y, spec.dim)
    ph = np.ones(spec.shape, dtype=complex)
    for i, yi in enumerate(y):
        shape = [1] * spec.dim
        shape[i] = -1
        ph = ph * np.exp(-1j * yi * spec.freq_axis(i)).reshape(shape)
    return ph


def translate(f: SampledFunction, y) -> SampledFunction:
    """``(tau_y f)(x) = f(x - y)`` via the frequency-side phase ``e^{-i<y,xi_k>}``."""
    c = dft(f)
    return idft(FourierCoefficients(f.spec, c.coeffs * _phase(f.spec, y)))


def modulate(f: SampledFunction, xi0) -> SampledFunction:
    """Multiply by ``e^{i<x,xi0>}``; ``xi0`` must lie on the frequency grid."""
    spec = f.spec
    xi0 = _as_tuple(xi0, spec.dim)
    ph = np.ones(spec.shape, dtype=complex)
    for i, (x, s) in enumerate(zip(xi0, spec.freq_step)):
        k = x / s
        if abs(k - round(k)) > 1e-9 * max(1.0, abs(k)):
            raise ValueError(f"frequency {x} is not on the grid (step {s})")
        shape = [1] * spec.dim
        shape[i] = -1
        ph = ph * np.exp(1j * round(k) * s * spec.axis(i)).reshape(shape)
    return f._like(f.values * ph)


def convolve(f: SampledFunction, g: SampledFunction) -> SampledFunction:
    """Periodic convolution ``h^d sum_j f(x_j) g(x - x_j)`` through the DFT."""
    _same_spec(f, g)
    return idft(FourierCoefficients(f.spec, dft(f).coeffs * dft(g).coeffs))


def pointwise_mul(f: SampledFunction, g: SampledFunction) -> SampledFunction:
    _same_spec(f, g)
    return f._like(f.values * g.values)


def pairing(u: SampledFunction, phi: SampledFunction) -> complex:
    """Bilinear pairing ``<u, phi> = h^d sum u phi``."""
    _same_spec(u, phi)
    return complex(u.spec.cell * np.sum(u.values * phi.values))


def fourier_multiplier(f: SampledFunction, m) -> SampledFunction:
    """Apply ``m(D)``; ``m`` is an array on the centered frequency grid or a callable of the frequency mesh."""
    if callable(m):
        m = m(*f.spec.freq_mesh())
    m = np.broadcast_to(np.asarray(m), f.spec.shape)
    return idft(FourierCoefficients(f.spec, dft(f).coeffs * m))


def sample(spec: GridSpec, fn: Callable[..., np.ndarray]) -> SampledFunction:
    """Sample ``fn(x_1, ..., x_d)`` on the grid mesh."""
    return SampledFunction(spec, np.broadcast_to(fn(*spec.mesh()), spec.shape))


def random_bandlimited(spec: GridSpec, rng: np.random.Generator, band: int | None = None,
                       real: bool = False) -> SampledFunction:
    """Random function whose coefficients vanish for ``|k_i| > band``.

    The nonzero coefficients are standard complex Gaussians scaled by the
    period volume, so sample values are O(1) regardless of grid size.
    """
    if band is None:
        band = min(spec.samples) // 4
    c = rng.standard_normal(spec.shape) + 1j * rng.standard_normal(spec.shape)
    mask = np.ones(spec.shape, dtype=bool)
    for i in range(spec.dim):
        shape = [1] * spec.dim
        shape[i] = -1
        mask &= (np.abs(spec.index_axis(i)) <= band).reshape(shape)
    count = max(int(mask.sum()), 1)
    c = np.where(mask, c, 0) * float(np.prod(spec.periods)) / np.sqrt(count)
    f = idft(FourierCoefficients(spec, c))
    if real:
        f = f._like(f.values.real)
    return f


def resample(f: SampledFunction, spec: GridSpec) -> SampledFunction:
    """Trigonometric interpolant of ``f`` sampled on a finer grid with the same periods.

    Coefficients are copied into the larger centered array, so the result
    agrees with :func:`eval_trig` at the new nodes.
    """
    if spec.periods != f.spec.periods:
        raise ValueError("resampling keeps the periods fixed")
    if any(m < n for m, n in zip(spec.samples, f.spec.samples)):
        raise ValueError("resample only refines; every axis needs at least as many samples")
    c = dft(f).coeffs
    out = np.zeros(spec.shape, dtype=complex)
    idx = tuple(slice((m - n) // 2, (m - n) // 2 + n) for m, n in zip(spec.samples, f.spec.samples))
    out[idx] = c
    return idft(FourierCoefficients(spec, out))
