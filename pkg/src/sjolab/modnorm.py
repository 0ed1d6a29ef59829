"""Short-time Fourier profiles and the S_w^p norms built from them.

For a window ``chi`` the STFT is ``V(y, xi) = dft(u tau_y chi)(xi)`` with ``y``
on the sample grid.  The continuous profile aggregates ``|V|`` over all ``y``
with the quadrature weight ``h^d``; the discrete profile aggregates over the
nodes of a lattice with unit weights.  A norm is the frequency-step weighted
sum of a profile.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product as iproduct

import numpy as np

from .grid import (FourierCoefficients, GridSpec, SampledFunction, _as_tuple, _same_spec, dft,
                   idft, sample_cap)
from .windows import Lattice, PartitionOfUnity, Window, periodize

__all__ = [
    "StftGrid",
    "ModNorm",
    "stft",
    "profile_continuous",
    "profile_discrete",
    "swp_norm",
    "freq_localize",
    "freq_localize_rhs",
    "EquivalenceReport",
    "equivalence_report",
    "check_p",
]


def check_p(p) -> float:
    """Validate an exponent in ``[1, inf]``."""
    try:
        p = float(p)
    except (TypeError, ValueError):
        raise ValueError(f"p must be a number in [1, inf], got {p!r}") from None
    if not p >= 1:
        raise ValueError(f"p must lie in [1, inf], got {p}")
    return p


def _values(w) -> np.ndarray:
    if isinstance(w, (Window, SampledFunction)):
        return w.values
    return np.asarray(w)


def _window_id(w) -> str:
    if isinstance(w, Window):
        r = "" if w.radius is None else f"(r={','.join(f'{v:g}' for v in w.radius)})"
        return w.kind + r
    return "custom"


def _translates(chi: np.ndarray, shifts: np.ndarray) -> np.ndarray:
    """Stack ``chi(x - y)`` for grid shifts ``y = shift * h`` (rows of ``shifts``)."""
    d = chi.ndim
    idx = []
    for ax in range(d):
        n = chi.shape[ax]
        shape = [shifts.shape[0]] + [1] * d
        shape[1 + ax] = n
        idx.append(((np.arange(n)[None, :] - shifts[:, ax:ax + 1]) % n).reshape(shape))
    return chi[tuple(idx)]


def _stft_batches(u: SampledFunction, chi: np.ndarray, shifts: np.ndarray, budget: int = 1 << 22):
    spec = u.spec
    ax = tuple(range(1, spec.dim + 1))
    b = max(1, budget // spec.size)
    for s in range(0, shifts.shape[0], b):
        prod = u.values[None] * _translates(chi, shifts[s:s + b])
        V = np.fft.fftshift(np.fft.fftn(np.fft.ifftshift(prod, axes=ax), axes=ax), axes=ax)
        yield V * spec.cell


def _all_shifts(spec: GridSpec) -> np.ndarray:
    return np.array(list(iproduct(*[range(-N // 2, N // 2) for N in spec.samples])), dtype=int)


def _lattice_shifts(lattice: Lattice) -> np.ndarray:
    return np.array([[mi * r for mi, r in zip(m, lattice.shifts)] for m in lattice.node_indices()],
                    dtype=int)


@dataclass(frozen=True)
class StftGrid:
    """``V(y_j, xi_k)``; the first ``d`` axes index ``y``, the last ``d`` index ``xi``."""

    spec: GridSpec
    values: np.ndarray = field(repr=False)
    window: str = "custom"


def stft(u: SampledFunction, chi) -> StftGrid:
    """Full STFT table over the translation grid times the frequency grid."""
    c = _values(chi)
    if c.shape != u.spec.shape:
        raise ValueError("signal and window live on different grids")
    if u.spec.size ** 2 > 4 * sample_cap():
        raise MemoryError("STFT table exceeds the memory cap; use the profile functions")
    shifts = _all_shifts(u.spec)
    V = np.concatenate(list(_stft_batches(u, c, shifts)), axis=0)
    return StftGrid(u.spec, V.reshape(u.spec.shape + u.spec.shape), _window_id(chi))


def _profile(u, chi, p, shifts, weight):
    p = check_p(p)
    c = _values(chi)
    if c.shape != u.spec.shape:
        raise ValueError("signal and window live on different grids")
    acc = np.zeros(u.spec.shape)
    for V in _stft_batches(u, c, shifts):
        a = np.abs(V)
        if np.isinf(p):
            np.maximum(acc, a.max(axis=0), out=acc)
        else:
            acc += np.sum(a ** p, axis=0)
    if np.isinf(p):
        return acc
    return (weight * acc) ** (1 / p)


def profile_continuous(u: SampledFunction, chi, p) -> np.ndarray:
    """``U(xi) = (h^d sum_y |V(y, xi)|^p)^{1/p}`` over every grid translation."""
    return _profile(u, chi, p, _all_shifts(u.spec), u.spec.cell)


def profile_discrete(u: SampledFunction, chi, lattice: Lattice, p) -> np.ndarray:
    """``U(xi) = (sum_gamma |V(gamma, xi)|^p)^{1/p}`` over the lattice nodes.

    Raises
    ------
    ValueError
        If the lattice translates of ``|chi|`` leave a gap.
    """
    if lattice.spec != u.spec:
        raise ValueError("lattice lives on a different grid")
    if periodize(lattice, np.abs(_values(chi))).min() <= 0:
        raise ValueError("lattice translates of the window do not cover the torus")
    return _profile(u, chi, p, _lattice_shifts(lattice), 1.0)


@dataclass(frozen=True)
class ModNorm:
    p: float
    value: float
    method: str
    window: str
    lattice: tuple | None = None
    profile: np.ndarray | None = field(default=None, repr=False)


def swp_norm(u: SampledFunction, chi, p, method: str = "continuous",
             lattice: Lattice | None = None) -> ModNorm:
    """``||u||_{S_w^p}``: the frequency-step weighted sum of the STFT profile.

    Parameters
    ----------
    method : {"continuous", "discrete"}
        Aggregate over every grid translation or over ``lattice`` only.
    """
    if method == "continuous":
        prof = profile_continuous(u, chi, p)
    elif method == "discrete":
        if lattice is None:
            raise ValueError("the discrete method needs a lattice")
        prof = profile_discrete(u, chi, lattice, p)
    else:
        raise ValueError(f"unknown method {method!r}")
    value = float(u.spec.freq_cell * prof.sum())
    return ModNorm(check_p(p), value, method, _window_id(chi),
                   None if lattice is None or method == "continuous" else lattice.step, prof)


def _grid_freq_index(spec: GridSpec, xi0) -> tuple:
    xi0 = _as_tuple(xi0, spec.dim)
    out = []
    for x, s in zip(xi0, spec.freq_step):
        k = x / s
        if abs(k - round(k)) > 1e-9 * max(1.0, abs(k)):
            raise ValueError(f"frequency {x} is not on the grid (step {s})")
        out.append(int(round(k)))
    return tuple(out)


def freq_localize(u: SampledFunction, chi, xi0) -> SampledFunction:
    """``chi(D - xi0) u`` for a window ``chi`` sampled on the frequency grid."""
    spec = u.spec
    k0 = _grid_freq_index(spec, xi0)
    m = np.roll(_values(chi), k0, axis=tuple(range(spec.dim)))
    return idft(FourierCoefficients(spec, dft(u).coeffs * m))


def freq_localize_rhs(u: SampledFunction, chi, xi0) -> SampledFunction:
    """Right side ``(2 pi)^{-d} e^{i<x,xi0>} (u tau_x chi_hat)^(xi0)`` evaluated pointwise.

    ``chi_hat(y) = (2 pi / L)^d sum_k e^{-i<y, xi_k>} chi(xi_k)`` is the transform
    of the frequency window, sampled on the spatial grid; the STFT at the single
    frequency ``xi0`` is then a direct sum for every ``x``.
    """
    spec = u.spec
    k0 = _grid_freq_index(spec, xi0)
    c = _values(chi)
    # chi_hat on the spatial grid by an explicit sum (no FFT)
    E = []
    for i in range(spec.dim):
        x, xi = spec.axis(i), spec.freq_axis(i)
        E.append(np.exp(-1j * np.outer(x, xi)))
    letters = "abc"[:spec.dim]
    upper = "ABC"[:spec.dim]
    chat = np.einsum(",".join(f"{a}{A}" for a, A in zip(letters, upper)) + "," + upper + "->" + letters,
                     *E, c) * spec.freq_cell
    xi0v = [k * s for k, s in zip(k0, spec.freq_step)]
    ph = np.ones(spec.shape, dtype=complex)
    for i in range(spec.dim):
        shape = [1] * spec.dim
        shape[i] = -1
        ph = ph * np.exp(-1j * xi0v[i] * spec.axis(i)).reshape(shape)
    weighted = u.values * ph
    shifts = _all_shifts(spec)
    out = np.empty(spec.size, dtype=complex)
    b = max(1, (1 << 22) // spec.size)
    for s in range(0, spec.size, b):
        T = _translates(chat, shifts[s:s + b])
        out[s:s + b] = spec.cell * (T.reshape(T.shape[0], -1) @ weighted.ravel())
    # shifts enumerate x in grid order, so out is already row-major over x
    out = out.reshape(spec.shape) * np.conj(ph) / (2 * np.pi) ** spec.dim
    return SampledFunction(spec, out)


def _cyclic_conv(F: np.ndarray, G: np.ndarray, step: float) -> np.ndarray:
    """``(F * G)(xi) = step sum_eta F(eta) G(xi - eta)`` on the centered frequency grid."""
    ax = tuple(range(F.ndim))
    Fa = np.fft.ifftshift(F, axes=ax)
    Ga = np.fft.ifftshift(G, axes=ax)
    out = np.fft.ifftn(np.fft.fftn(Fa) * np.fft.fftn(Ga)).real * step
    return np.fft.fftshift(out, axes=ax)


@dataclass(frozen=True)
class EquivalenceReport:
    """Residuals ``max(0, LHS - C * RHS)`` of the two profile dominations."""

    p: float
    const_upper: float
    const_lower: float
    residual_upper: float
    residual_lower: float
    margin_upper: float
    margin_lower: float

    @property
    def ok(self) -> bool:
        return max(self.residual_upper, self.residual_lower) <= 1e-8


def equivalence_report(u: SampledFunction, pou: PartitionOfUnity, psi, p) -> EquivalenceReport:
    """Compare continuous and lattice profiles in both directions.

    With ``chi`` the partition window on the unit lattice, supported in
    ``[-delta, delta]^d``, checks::

        U_chi       <= (2 pi)^{-d} N(2 delta)^{1/q} |K|^{1/p} (U_disc * |chi_hat|)
        U_disc      <= (2 pi)^{-d} (U_psi * |chi_hat|)

    where ``N(t) = (2([t] + 1))^d``, ``|K| = (4 delta)^d`` and ``psi = 1`` on
    ``supp chi - [-1/2, 1/2]^d``.  The convolutions are cyclic sums over the
    frequency grid weighted by the frequency step.
    """
    p = check_p(p)
    spec = u.spec
    lattice = pou.lattice
    if any(abs(s - 1.0) > 1e-12 for s in lattice.step):
        raise ValueError("the comparison constants are stated for the unit lattice")
    chi = pou.chi.values
    delta = max(pou.chi.radius)
    psi_v = _values(psi)
    need = np.ones(spec.shape, dtype=bool)
    for i in range(spec.dim):
        shape = [1] * spec.dim
        shape[i] = -1
        need &= (np.abs(spec.axis(i)) <= delta + 0.5).reshape(shape)
    if np.abs(psi_v[need] - 1).max() > 1e-12:
        raise ValueError("psi must equal 1 on supp chi - [-1/2, 1/2]^d")
    d = spec.dim
    q = np.inf if p == 1 else (1.0 if np.isinf(p) else p / (p - 1))
    n2d = (2 * (np.floor(2 * delta) + 1)) ** d
    K = (4 * delta) ** d
    c_up = (2 * np.pi) ** -d * n2d ** (0 if np.isinf(q) else 1 / q) * K ** (0 if np.isinf(p) else 1 / p)
    c_lo = (2 * np.pi) ** -d
    chat = np.abs(dft(pou.chi.f).coeffs)
    step = spec.freq_cell
    U = profile_continuous(u, chi, p)
    Ud = profile_discrete(u, chi, lattice, p)
    Upsi = profile_continuous(u, psi_v, p)
    rhs_up = c_up * _cyclic_conv(Ud, chat, step)
    rhs_lo = c_lo * _cyclic_conv(Upsi, chat, step)
    scale_up = max(rhs_up.max(), 1e-300)
    scale_lo = max(rhs_lo.max(), 1e-300)
    return EquivalenceReport(
        p, float(c_up), float(c_lo),
        float(max(0.0, (U - rhs_up).max())), float(max(0.0, (Ud - rhs_lo).max())),
        float((rhs_up - U).min() / scale_up), float((rhs_lo - Ud).min() / scale_lo),
    )
