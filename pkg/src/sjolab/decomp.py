"""Uniform frequency decomposition ``u = sum_gamma chi_Gamma(D - gamma) u`` and its relatives.

The partition of unity lives on the frequency grid (``spec.dual()``), so each
band is an exact Fourier multiplier and reconstruction is exact up to
roundoff.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import FourierCoefficients, SampledFunction, dft, idft, lp_norm, modulate
from .windows import PartitionOfUnity, Window, make_plateau

__all__ = [
    "BandDecomposition",
    "ModulatedDecomposition",
    "decompose",
    "reconstruct",
    "decomposition_norm",
    "demodulate",
    "remodulate",
    "DerivativeReport",
    "derivative_bound_check",
    "analysis",
    "synthesis",
    "retract_roundtrip",
    "cover_window",
]


@dataclass(frozen=True)
class BandDecomposition:
    pou: PartitionOfUnity
    pieces: list = field(repr=False)
    spectrum_radius: tuple = ()

    def __len__(self):
        return len(self.pieces)


@dataclass(frozen=True)
class ModulatedDecomposition:
    pieces: list = field(repr=False)
    spectrum_radius: tuple = ()


def _check_pou(u: SampledFunction, pou: PartitionOfUnity, tol: float = 1e-10):
    if pou.spec != u.spec.dual():
        raise ValueError("the partition must live on the frequency grid of the signal")
    if pou.residual > tol:
        raise ValueError(f"partition residual {pou.residual:.2e} exceeds {tol:.0e}")


def _band_multipliers(pou: PartitionOfUnity):
    lat = pou.lattice
    for m in lat.node_indices():
        gamma = tuple(mi * s for mi, s in zip(m, lat.step))
        yield gamma, lat.shift_array(pou.chi.values, m)


def decompose(u: SampledFunction, pou: PartitionOfUnity) -> BandDecomposition:
    """Split ``u`` into the bands ``u_gamma = chi_Gamma(D - gamma) u``."""
    _check_pou(u, pou)
    c = dft(u).coeffs
    pieces = [(g, idft(FourierCoefficients(u.spec, c * m))) for g, m in _band_multipliers(pou)]
    return BandDecomposition(pou, pieces, pou.chi.radius)


def reconstruct(dec) -> SampledFunction:
    """Sum of the pieces of a band decomposition."""
    it = iter(dec.pieces)
    _, acc = next(it)
    total = acc.values.copy()
    for _, f in it:
        total = total + f.values
    return SampledFunction(acc.spec, total)


def decomposition_norm(dec: BandDecomposition, p) -> float:
    """``sum_gamma ||u_gamma||_{L^p}``."""
    return float(sum(lp_norm(f, p) for _, f in dec.pieces))


def demodulate(dec: BandDecomposition) -> ModulatedDecomposition:
    """Shift every band to the origin: ``u_k = e^{-i<x, gamma>} u_gamma``."""
    pieces = [(g, modulate(f, tuple(-gi for gi in g))) for g, f in dec.pieces]
    return ModulatedDecomposition(pieces, dec.spectrum_radius)


def remodulate(mdec: ModulatedDecomposition) -> SampledFunction:
    """``sum_k e^{i<x, k>} u_k``."""
    return reconstruct(BandDecomposition(None, [(g, modulate(f, g)) for g, f in mdec.pieces]))


def cover_window(pou: PartitionOfUnity, margin: float | None = None) -> Window:
    """Smooth frequency window equal to 1 on the support box of the partition window."""
    inner = pou.chi.radius
    if margin is None:
        margin = 0.5 * min(pou.lattice.step)
    return make_plateau(pou.spec, inner, tuple(r + margin for r in inner))


@dataclass(frozen=True)
class DerivativeReport:
    alpha: tuple
    constant: float
    min_slack: float
    slacks: np.ndarray = field(repr=False)

    @property
    def ok(self) -> bool:
        return self.min_slack >= -1e-9


def _symbol_power(spec, alpha) -> np.ndarray:
    xi = spec.freq_mesh()
    out = np.ones(spec.shape, dtype=complex)
    for a, x in zip(alpha, xi):
        out = out * (1j * x) ** a
    return out


def derivative_bound_check(mdec: ModulatedDecomposition, alpha, p=2,
                           cover: Window | None = None, pou: PartitionOfUnity | None = None
                           ) -> DerivativeReport:
    """Check ``||d^alpha u_k||_{L^p} <= C_alpha ||u_k||_{L^p}`` for every piece.

    ``C_alpha = ||F^{-1}(xi^alpha cover)||_{L^1}`` with ``cover = 1`` on the
    common spectrum of the pieces.  Slacks are relative to ``C_alpha ||u_k||``.
    """
    spec = mdec.pieces[0][1].spec
    alpha = tuple(int(a) for a in np.broadcast_to(alpha, (spec.dim,)))
    if sum(alpha) > 2 or min(alpha) < 0:
        raise ValueError("derivative order must be at most 2")
    if cover is None:
        if pou is None:
            raise ValueError("need either a cover window or the partition")
        cover = cover_window(pou)
    sym = _symbol_power(spec, alpha)
    kernel = idft(FourierCoefficients(spec, sym * cover.values))
    C = lp_norm(kernel, 1)
    slacks = []
    for _, f in mdec.pieces:
        df = idft(FourierCoefficients(spec, dft(f).coeffs * sym))
        base = C * lp_norm(f, p)
        slacks.append((base - lp_norm(df, p)) / base if base > 0 else 0.0)
    slacks = np.asarray(slacks)
    return DerivativeReport(alpha, C, float(slacks.min()), slacks)


def analysis(u: SampledFunction, pou: PartitionOfUnity) -> list:
    """``S u = (chi_Gamma(D) e^{-i<x, k>} u)_k`` over the lattice nodes ``k``."""
    _check_pou(u, pou)
    chi = pou.chi.values
    out = []
    for m in pou.lattice.node_indices():
        k = tuple(mi * s for mi, s in zip(m, pou.lattice.step))
        v = modulate(u, tuple(-ki for ki in k))
        out.append((k, idft(FourierCoefficients(u.spec, dft(v).coeffs * chi))))
    return out


def synthesis(seq: list, cover) -> SampledFunction:
    """``R (v_k) = sum_k e^{i<x, k>} cover(D) v_k``."""
    cv = cover.values if hasattr(cover, "values") else np.asarray(cover)
    pieces = []
    for k, v in seq:
        w = idft(FourierCoefficients(v.spec, dft(v).coeffs * cv))
        pieces.append((k, modulate(w, k)))
    return reconstruct(BandDecomposition(None, pieces))


def retract_roundtrip(u: SampledFunction, pou: PartitionOfUnity, cover) -> float:
    """``max |R(S u) - u|``; requires ``cover = 1`` wherever the partition window is nonzero."""
    cv = cover.values if hasattr(cover, "values") else np.asarray(cover)
    if np.abs(cv[np.abs(pou.chi.values) > 0] - 1).max(initial=0) > 1e-12:
        raise ValueError("cover window must equal 1 on the support of the partition window")
    return float(np.abs(synthesis(analysis(u, pou), cv).values - u.values).max())
