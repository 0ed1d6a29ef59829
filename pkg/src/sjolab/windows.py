"""Lattices, compactly supported windows, partitions of unity and the periodized weight."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product as iproduct

import numpy as np
from scipy.special import gamma as gamma_fn, kv

from .grid import GridSpec, SampledFunction, _as_tuple

__all__ = [
    "Lattice",
    "Window",
    "PartitionOfUnity",
    "make_bump",
    "make_gaussian",
    "make_plateau",
    "make_pou",
    "periodize",
    "periodize_weight",
    "weight_integral",
    "periodization_bracket",
    "decay_seminorm",
    "phi_bound_constant",
]


@dataclass(frozen=True)
class Lattice:
    """Axis-aligned lattice with step ``s_i = L_i / M_i`` sitting on the sample grid."""

    spec: GridSpec
    step: tuple

    def __post_init__(self):
        step = _as_tuple(self.step, self.spec.dim)
        if len(step) != self.spec.dim:
            raise ValueError("lattice step must have one entry per axis")
        for s, L, h in zip(step, self.spec.periods, self.spec.spacing):
            if not s > 0:
                raise ValueError(f"lattice step must be positive, got {s}")
            M, r = L / s, s / h
            if abs(M - round(M)) > 1e-9 * M or abs(r - round(r)) > 1e-9 * r:
                raise ValueError(f"lattice step {s} is not commensurate with period {L} and spacing {h}")
            if round(M) < 2:
                raise ValueError(f"lattice needs at least 2 nodes per period, step {s} gives {round(M)}")
        object.__setattr__(self, "step", step)

    @property
    def counts(self) -> tuple:
        """Nodes per axis ``M_i``."""
        return tuple(int(round(L / s)) for L, s in zip(self.spec.periods, self.step))

    @property
    def shifts(self) -> tuple:
        """Grid index offset of one lattice step per axis."""
        return tuple(int(round(s / h)) for s, h in zip(self.step, self.spec.spacing))

    @property
    def size(self) -> int:
        return int(np.prod(self.counts))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.step))

    def node_indices(self) -> list:
        """Integer multi-indices ``m`` with ``gamma = m * step`` inside one period."""
        ranges = [np.arange(M) - M // 2 for M in self.counts]
        return [tuple(int(v) for v in m) for m in iproduct(*ranges)]

    def points(self) -> np.ndarray:
        return np.array([[mi * si for mi, si in zip(m, self.step)] for m in self.node_indices()])

    def shift_array(self, a: np.ndarray, m) -> np.ndarray:
        """Translate grid samples by the lattice vector ``m * step`` (exact index shift)."""
        return np.roll(a, tuple(mi * r for mi, r in zip(m, self.shifts)), axis=tuple(range(a.ndim)))


@dataclass(frozen=True)
class Window:
    f: SampledFunction
    kind: str = "custom"
    radius: tuple | None = None

    @property
    def spec(self) -> GridSpec:
        return self.f.spec

    @property
    def values(self) -> np.ndarray:
        return self.f.values


def _bump_profile(t: np.ndarray, r: float) -> np.ndarray:
    u = np.clip(np.abs(t) / r, 0, 1)
    inside = u < 1
    out = np.zeros_like(u)
    out[inside] = np.exp(1 - 1 / (1 - u[inside] ** 2))
    return out


def make_bump(spec: GridSpec, radius) -> Window:
    """Tensor product of ``exp(1 - 1/(1 - (t/r)^2))`` on ``|t| < r``, zero elsewhere."""
    radius = _as_tuple(radius, spec.dim)
    for r, L in zip(radius, spec.periods):
        if not 0 < r < L / 2:
            raise ValueError(f"bump radius must lie in (0, L/2) = (0, {L / 2}), got {r}")
    vals = np.ones(spec.shape)
    for i, r in enumerate(radius):
        shape = [1] * spec.dim
        shape[i] = -1
        vals = vals * _bump_profile(spec.axis(i), r).reshape(shape)
    return Window(SampledFunction(spec, vals), "smooth-bump", radius)


def make_gaussian(spec: GridSpec, width: float = 1.0) -> Window:
    """Gaussian ``exp(-|x|^2 / (2 width^2))`` sampled on the torus."""
    r2 = sum(x ** 2 for x in spec.mesh())
    return Window(SampledFunction(spec, np.exp(-r2 / (2 * width ** 2))), "periodized-gaussian")


def _smooth_step(t: np.ndarray) -> np.ndarray:
    # C-infinity transition from 0 (t <= 0) to 1 (t >= 1)
    t = np.clip(t, 0, 1)
    a = np.where(t > 0, np.exp(-1 / np.where(t > 0, t, 1)), 0.0)
    b = np.where(t < 1, np.exp(-1 / np.where(t < 1, 1 - t, 1)), 0.0)
    return a / (a + b)


def make_plateau(spec: GridSpec, inner, outer) -> Window:
    """Tensor window equal to 1 on ``|t| <= inner`` and 0 on ``|t| >= outer``."""
    inner = _as_tuple(inner, spec.dim)
    outer = _as_tuple(outer, spec.dim)
    vals = np.ones(spec.shape)
    for i, (a, b) in enumerate(zip(inner, outer)):
        if not 0 < a < b < spec.periods[i] / 2:
            raise ValueError(f"plateau needs 0 < inner < outer < L/2, got {a}, {b}")
        shape = [1] * spec.dim
        shape[i] = -1
        vals = vals * _smooth_step((b - np.abs(spec.axis(i))) / (b - a)).reshape(shape)
    return Window(SampledFunction(spec, vals), "smooth-plateau", outer)


def periodize(lattice: Lattice, a: np.ndarray) -> np.ndarray:
    """``sum_gamma tau_gamma a`` over the lattice nodes of one period."""
    out = np.asarray(a)
    for ax, (M, r) in enumerate(zip(lattice.counts, lattice.shifts)):
        out = sum(np.roll(out, m * r, axis=ax) for m in range(M))
    return out


@dataclass(frozen=True)
class PartitionOfUnity:
    """Nonnegative window whose lattice translates sum to one."""

    lattice: Lattice
    chi: Window
    residual: float

    @property
    def spec(self) -> GridSpec:
        return self.lattice.spec

    def phi(self) -> np.ndarray:
        """``Phi = sum_gamma |tau_gamma chi|`` on the grid."""
        return periodize(self.lattice, np.abs(self.chi.values))

    def support_radius(self) -> tuple:
        return self.chi.radius


def make_pou(spec: GridSpec, lattice: Lattice, radius_factor: float = 0.75,
             tol: float = 1e-10) -> PartitionOfUnity:
    """Normalize a bump of radius ``radius_factor * step`` by the sum of its translates.

    Raises
    ------
    ValueError
        If the translates leave a gap (the normalizing sum vanishes somewhere).
    """
    if lattice.spec != spec:
        raise ValueError("lattice lives on a different grid")
    radius = tuple(radius_factor * s for s in lattice.step)
    phi = make_bump(spec, radius).values.real
    total = periodize(lattice, phi)
    if total.min() <= 1e-12:
        raise ValueError(f"translates of the bump do not cover the torus (radius factor {radius_factor})")
    chi = phi / total
    residual = float(np.abs(periodize(lattice, chi) - 1).max())
    if residual > tol:
        raise ValueError(f"partition residual {residual:.3e} exceeds {tol:.1e}")
    return PartitionOfUnity(lattice, Window(SampledFunction(spec, chi), "smooth-bump", radius), residual)


def weight_integral(s: float, d: int) -> float:
    """``int_{R^d} <y>^{-s} dy`` for ``s > d``."""
    return float(np.pi ** (d / 2) * gamma_fn((s - d) / 2) / gamma_fn(s / 2))


def _weight_transform(r: np.ndarray, s: float, d: int) -> np.ndarray:
    # Fourier transform of <y>^{-s}: a Matern kernel in |xi|
    nu = (s - d) / 2
    c = (2 * np.pi) ** (d / 2) * 2 ** (1 - s / 2) / gamma_fn(s / 2)
    out = np.empty_like(r)
    zero = r == 0
    out[zero] = weight_integral(s, d)
    rr = r[~zero]
    out[~zero] = c * rr ** nu * kv(nu, rr)
    return out


def periodize_weight(step, s: float, x, *, return_error: bool = False):
    """``f_s(x) = sum_gamma <x + gamma>^{-s}`` over the lattice ``(+) step_i Z``.

    The sum is evaluated through its dual series, whose terms decay like
    ``e^{-2 pi |k| / step}``, so truncation at the dual radius used here leaves
    a tail far below 1e-10.

    Parameters
    ----------
    step : float or sequence of float, or Lattice
        Lattice step per axis.
    s : float
        Decay exponent, must exceed the dimension.
    x : array_like
        Point(s) of shape ``(d,)`` or ``(..., d)``; scalars allowed for d = 1.
    return_error : bool
        Also return a bound on the omitted dual tail.
    """
    if isinstance(step, Lattice):
        step = step.step
    step = _as_tuple(step)
    d = len(step)
    if not s > d:
        raise ValueError(f"decay exponent s must exceed the dimension {d}, got {s}")
    pts = np.asarray(x, dtype=float)
    scalar = pts.ndim == 0 if d == 1 else pts.ndim == 1
    if d == 1:
        pts = pts[..., None] if pts.ndim == 0 or pts.shape[-1] != 1 else pts
    shape = pts.shape[:-1]
    pts = pts.reshape(-1, d)
    cut = 60.0
    K = [int(np.ceil(cut * si / (2 * np.pi))) for si in step]
    ks = np.array(list(iproduct(*[np.arange(-k, k + 1) for k in K])), dtype=float)
    xis = ks * (2 * np.pi / np.asarray(step))
    r = np.linalg.norm(xis, axis=1)
    keep = r <= cut
    xis, r = xis[keep], r[keep]
    w = _weight_transform(r, s, d) / float(np.prod(step))
    vals = np.cos(pts @ xis.T) @ w
    # the dropped terms lie beyond |xi| = cut, where the transform is below
    # cut^nu e^{-cut} times a shell count bounded by a polynomial in cut
    nu = (s - d) / 2
    err = float(2 * d * (2 * cut) ** d * _weight_transform(np.array([cut]), s, d)[0] / np.prod(step)
                * max(1.0, nu))
    vals = vals.reshape(shape)
    if scalar:
        vals = float(vals)
    return (vals, err) if return_error else vals


def periodization_bracket(step, s: float) -> tuple:
    """Two-sided bound on ``f_s`` from the fundamental cell ``prod [0, step_i]``."""
    if isinstance(step, Lattice):
        step = step.step
    step = _as_tuple(step)
    d = len(step)
    if not s > d:
        raise ValueError(f"decay exponent s must exceed the dimension {d}, got {s}")
    sup = (1 + sum(si ** 2 for si in step)) ** (s / 2)
    vol = float(np.prod(step))
    I = weight_integral(s, d)
    return 2.0 ** (-s) / sup ** 2 / vol * I, 2.0 ** s * sup ** 2 / vol * I


def decay_seminorm(w: Window, order: float) -> float:
    """``sup_x <x>^order |w(x)|`` over the grid."""
    r2 = sum(x ** 2 for x in w.spec.mesh())
    return float(np.max((1 + r2) ** (order / 2) * np.abs(w.values)))


def phi_bound_constant(lattice: Lattice) -> float:
    """Constant ``C`` with ``sum_gamma |tau_gamma chi| <= C sup <x>^{d+1} |chi|``."""
    d = lattice.spec.dim
    return periodization_bracket(lattice.step, d + 1)[1]
