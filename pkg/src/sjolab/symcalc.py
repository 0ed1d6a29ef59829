"""Operations on S_w^p representatives: algebra, coordinate changes, chirps, Sobolev norms.

Norm reports always name the window they were computed with; constants that
are only known to exist are returned as measured ratios.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import (FourierCoefficients, GridSpec, SampledFunction, _same_spec, convolve, dft,
                   eval_trig, idft, lp_norm)
from .modnorm import check_p, swp_norm
from .windows import Window

__all__ = [
    "ChirpSpec",
    "BoundReport",
    "compose_linear",
    "tensor",
    "restrict",
    "product",
    "holder_product",
    "young_convolve",
    "chirp_TA",
    "chirp_SA",
    "chirp_continuity",
    "quantization_change",
    "MixedSobolevSpec",
    "sobolev_norm",
    "embedding_check",
    "CordesSymbol",
    "cordes_build",
    "cordes_l1_check",
    "cordes_tensor_symbol",
    "isometry_equivariance",
    "peetre_slack",
    "conjugate_exponent",
]


def conjugate_exponent(p: float) -> float:
    p = check_p(p)
    if p == 1:
        return np.inf
    if np.isinf(p):
        return 1.0
    return p / (p - 1)


@dataclass(frozen=True)
class BoundReport:
    """``lhs <= const * rhs`` style comparison; ``ratio = lhs / rhs``."""

    lhs: float
    rhs: float
    const: float = 1.0

    @property
    def ratio(self) -> float:
        return self.lhs / self.rhs if self.rhs > 0 else (0.0 if self.lhs == 0 else np.inf)

    @property
    def slack(self) -> float:
        """``const * rhs - lhs`` relative to ``const * rhs`` (nonnegative when the bound holds)."""
        b = self.const * self.rhs
        return (b - self.lhs) / b if b > 0 else (0.0 if self.lhs == 0 else -np.inf)


def _norm(u, chi, p):
    return swp_norm(u, chi, p).value


# ---------------------------------------------------------------- coordinate maps


@dataclass(frozen=True)
class LinearChangeReport(BoundReport):
    ceiling_factor: float = 1.0

    @property
    def measured_constant(self) -> float:
        """Smallest ``C`` with ``||u o lambda|| <= C |det|^{-1/p} (1 + ||lambda||)^d ||u||``."""
        return self.ratio / self.ceiling_factor


def compose_linear(u: SampledFunction, lam, chi=None, p=1):
    """``(u o lambda)(x) = u(lambda x)`` by trigonometric interpolation.

    Returns the new samples and, when a window is given, the norm ratio
    together with the dilation ceiling ``|det lambda|^{-1/p} (1 + ||lambda||)^d``.
    """
    lam = np.atleast_2d(np.asarray(lam, dtype=float))
    d = u.spec.dim
    if lam.shape != (d, d):
        raise ValueError(f"lambda must be {d}x{d}")
    det = np.linalg.det(lam)
    if abs(det) < 1e-12:
        raise ValueError("lambda is singular")
    mesh = np.stack(u.spec.mesh(), axis=-1)
    pts = mesh @ lam.T
    c = dft(u)
    vals = eval_trig(c, pts[..., 0] if d == 1 else pts)
    out = SampledFunction(u.spec, vals)
    if chi is None:
        return out, None
    p = check_p(p)
    expo = 0.0 if np.isinf(p) else 1 / p
    ceiling = abs(det) ** (-expo) * (1 + np.linalg.norm(lam, 2)) ** d
    return out, LinearChangeReport(_norm(out, chi, p), _norm(u, chi, p), 1.0, ceiling)


def tensor(u1: SampledFunction, u2: SampledFunction) -> SampledFunction:
    """``(u1 (x) u2)(x', x'') = u1(x') u2(x'')`` on the product grid."""
    spec = GridSpec(u1.spec.periods + u2.spec.periods, u1.spec.samples + u2.spec.samples)
    return SampledFunction(spec, np.multiply.outer(u1.values, u2.values))


def restrict(u: SampledFunction, axis: int = 1, chi_full=None, chi_line=None, p=1):
    """Samples on the hyperplane ``{x_axis = 0}`` of a 2-D function.

    With windows for both grids, also returns the ratio
    ``||u|_L||_{S_w^p} / ||u||_{S_w^p}``.
    """
    if u.spec.dim != 2:
        raise ValueError("restriction is defined for 2-D inputs")
    keep = 1 - axis
    spec = GridSpec((u.spec.periods[keep],), (u.spec.samples[keep],))
    zero = u.spec.samples[axis] // 2
    vals = np.take(u.values, zero, axis=axis)
    out = SampledFunction(spec, vals)
    if chi_full is None or chi_line is None:
        return out, None
    return out, BoundReport(_norm(out, chi_line, p), _norm(u, chi_full, p))


# ---------------------------------------------------------------- algebra


def _window_values(chi):
    return chi.values if hasattr(chi, "values") else np.asarray(chi)


def product(u: SampledFunction, v: SampledFunction, chi, p=1):
    """Pointwise product with the ideal bound.

    ``||uv||_{S_w^p, chi^2} <= (2 pi)^{-d} ||u||_{S_w^p, chi} ||v||_{S_w^inf, chi}``
    """
    _same_spec(u, v)
    uv = u * v
    w = _window_values(chi)
    lhs = _norm(uv, w * w, p)
    rhs = _norm(u, w, p) * _norm(v, w, np.inf)
    return uv, BoundReport(lhs, rhs, (2 * np.pi) ** -u.spec.dim)


def holder_product(u: SampledFunction, p, v: SampledFunction, q, chi):
    """Ratio ``||uv||_{S_w^r} / (||u||_{S_w^p} ||v||_{S_w^q})`` with ``1/r = 1/p + 1/q``."""
    _same_spec(u, v)
    p, q = check_p(p), check_p(q)
    inv_r = 1 / p + 1 / q
    if inv_r > 1 + 1e-12:
        raise ValueError(f"exponents p={p}, q={q} give 1/r = {inv_r} > 1")
    r = np.inf if inv_r == 0 else 1 / inv_r
    uv = u * v
    return uv, BoundReport(_norm(uv, chi, r), _norm(u, chi, p) * _norm(v, chi, q)), r


def young_convolve(v: SampledFunction, q, u: SampledFunction, p, chi):
    """Ratio ``||v * u||_{S_w^r} / (||v||_{L^q} ||u||_{S_w^p})`` with ``1/p + 1/q = 1 + 1/r``."""
    _same_spec(u, v)
    p, q = check_p(p), check_p(q)
    inv_r = 1 / p + 1 / q - 1
    if inv_r < -1e-12:
        raise ValueError(f"exponents p={p}, q={q} give 1/r = {inv_r} < 0")
    r = np.inf if abs(inv_r) < 1e-15 else 1 / inv_r
    w = convolve(v, u)
    return w, BoundReport(_norm(w, chi, r), lp_norm(v, q) * _norm(u, chi, p)), r


# ---------------------------------------------------------------- chirps


@dataclass(frozen=True)
class ChirpSpec:
    """Real symmetric invertible ``A`` defining the phase ``-<Ax, x>/2``."""

    A: np.ndarray = field(repr=False)

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        if A.shape[0] != A.shape[1]:
            raise ValueError("A must be square")
        if np.abs(A - A.T).max() > 1e-12:
            raise ValueError("A must be symmetric")
        if abs(np.linalg.det(A)) <= 1e-8:
            raise ValueError("A is singular or nearly so")
        A.setflags(write=False)
        object.__setattr__(self, "A", A)

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.A))

    @property
    def sgn(self) -> int:
        ev = np.linalg.eigvalsh(self.A)
        return int((ev > 0).sum() - (ev < 0).sum())

    @property
    def inverse(self) -> np.ndarray:
        return np.linalg.inv(self.A)

    def __neg__(self):
        return ChirpSpec(-self.A)


def _chirp_multiplier(spec: GridSpec, A: ChirpSpec, axes) -> np.ndarray:
    if len(axes) != A.A.shape[0]:
        raise ValueError(f"A is {A.A.shape[0]}x{A.A.shape[0]} but {len(axes)} axes were selected")
    mesh = spec.freq_mesh()
    xi = [mesh[a] for a in axes]
    B = A.inverse
    quad = sum(B[i, j] * xi[i] * xi[j] for i in range(len(axes)) for j in range(len(axes)))
    return np.exp(-0.5j * quad)


def chirp_TA(u: SampledFunction, A, axes=None) -> SampledFunction:
    """``T_A``: multiply the spectrum by ``e^{-i<A^{-1} xi, xi>/2}`` on the chosen axes."""
    if not isinstance(A, ChirpSpec):
        A = ChirpSpec(A)
    axes = tuple(range(u.spec.dim)) if axes is None else tuple(axes)
    m = _chirp_multiplier(u.spec, A, axes)
    return idft(FourierCoefficients(u.spec, dft(u).coeffs * m))


def chirp_SA(u: SampledFunction, A) -> SampledFunction:
    """``S_A``: the chirp acting on the second variable of a 2-D function only."""
    if u.spec.dim != 2:
        raise ValueError("S_A acts on 2-D inputs")
    return chirp_TA(u, A, axes=(1,))


def chirp_continuity(u: SampledFunction, A, A0, chi, p, ts) -> np.ndarray:
    """``||T_{A0 + t(A - A0)} u - T_{A0} u||_{S_w^p}`` for each ``t`` in ``ts``."""
    A, A0 = (np.atleast_2d(np.asarray(M, dtype=float)) for M in (A, A0))
    base = chirp_TA(u, A0)
    return np.array([_norm(chirp_TA(u, A0 + t * (A - A0)) - base, chi, p) for t in ts])


# ---------------------------------------------------------------- quantization change


def quantization_change(a: SampledFunction, tau_from: float, tau_to: float) -> SampledFunction:
    """Symbol ``a'`` with ``Op_{tau_to}(a') = Op_{tau_from}(a)``.

    ``a`` is sampled on a phase-space grid ``(x, xi)``.  Its 2-D spectrum is
    multiplied by ``e^{i (tau_from - tau_to) zeta_x zeta_xi}``, where the
    ``xi``-dual variable ``zeta_xi`` is a spatial offset taken in ``(-L/2, L/2]``.
    """
    if a.spec.dim != 2:
        raise ValueError("symbols live on a 2-D phase-space grid")
    sigma = float(tau_from) - float(tau_to)
    if sigma == 0:
        return a
    zx = a.spec.freq_axis(0)
    L = a.spec.periods[0]
    off = a.spec.freq_axis(1)
    # the xi-dual grid step is h; representatives must match the offsets x_i - x_j
    # wrapped into [-L/2, L/2), which are the negatives of these
    off = -((-off + L / 2) % L - L / 2)
    phase = np.exp(1j * sigma * np.multiply.outer(zx, off))
    return idft(FourierCoefficients(a.spec, dft(a).coeffs * phase))


# ---------------------------------------------------------------- Sobolev


@dataclass(frozen=True)
class MixedSobolevSpec:
    """Axis blocks with exponents ``t_i`` for ``<<D>>^t = prod_i <D_{block i}>^{t_i}``."""

    blocks: tuple
    t: tuple
    p: float = 2.0

    def __post_init__(self):
        blocks = tuple(tuple(int(a) for a in b) for b in self.blocks)
        t = tuple(float(v) for v in np.atleast_1d(self.t))
        if len(blocks) != len(t):
            raise ValueError("one exponent per block is required")
        axes = sorted(a for b in blocks for a in b)
        if axes != list(range(len(axes))):
            raise ValueError(f"blocks must partition the axes, got {blocks}")
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "p", check_p(self.p))

    @classmethod
    def isotropic(cls, d: int, t: float, p: float = 2.0) -> "MixedSobolevSpec":
        return cls((tuple(range(d)),), (t,), p)

    @property
    def embeds(self) -> bool:
        """Whether every exponent exceeds its block dimension."""
        return all(ti > len(b) for ti, b in zip(self.t, self.blocks))


def _sobolev_weight(spec: GridSpec, s: MixedSobolevSpec) -> np.ndarray:
    if sum(len(b) for b in s.blocks) != spec.dim:
        raise ValueError("Sobolev blocks do not match the grid dimension")
    mesh = spec.freq_mesh()
    w = np.ones(spec.shape)
    for b, t in zip(s.blocks, s.t):
        r2 = sum(mesh[a] ** 2 for a in b)
        w = w * (1 + r2) ** (t / 2)
    return w


def sobolev_norm(u: SampledFunction, s: MixedSobolevSpec) -> float:
    """``||<<D>>^t u||_{L^p}``."""
    w = _sobolev_weight(u.spec, s)
    return lp_norm(idft(FourierCoefficients(u.spec, dft(u).coeffs * w)), s.p)


def embedding_check(u: SampledFunction, t, p, chi, blocks=None) -> BoundReport:
    """Ratio ``||u||_{S_w^p} / ||u||_{H_p^t}``; needs ``t_i`` above each block dimension."""
    d = u.spec.dim
    if blocks is None:
        blocks = (tuple(range(d)),)
    s = MixedSobolevSpec(blocks, t, p)
    if not s.embeds:
        raise ValueError(f"embedding needs t_i > block dimension, got t={s.t} for blocks {s.blocks}")
    return BoundReport(_norm(u, chi, p), sobolev_norm(u, s))


# ---------------------------------------------------------------- Cordes symbols


@dataclass(frozen=True)
class CordesSymbol:
    """Symbol of order ``m`` sampled on a frequency grid, with its seminorm table."""

    order: float
    spec: GridSpec
    values: np.ndarray = field(repr=False)
    seminorms: tuple = ()
    profile: str = "bracket"

    def freqs(self) -> np.ndarray:
        return self.spec.freq_axis(0)


_PROFILES = {
    "bracket": lambda xi, m: (1 + xi ** 2) ** (m / 2),
    "bracket-osc": lambda xi, m: (1 + xi ** 2) ** (m / 2) * (1.5 + np.cos(np.log1p(xi ** 2))),
}


def cordes_build(spec: GridSpec, m: float, profile: str = "bracket", alpha_max: int = 2
                 ) -> CordesSymbol:
    """Sample a built-in symbol of order ``m`` on the 1-D frequency grid of ``spec``.

    Seminorms ``sup <xi>^{|alpha| - m} |d^alpha a|`` use centered finite differences.
    """
    if spec.dim != 1:
        raise ValueError("Cordes symbols are built on 1-D grids")
    if profile not in _PROFILES:
        raise ValueError(f"unknown profile {profile!r}; choose from {sorted(_PROFILES)}")
    xi = spec.freq_axis(0)
    a = _PROFILES[profile](xi, m)
    dxi = spec.freq_step[0]
    semis, der = [], a
    for k in range(alpha_max + 1):
        semis.append(float(np.max((1 + xi ** 2) ** ((k - m) / 2) * np.abs(der))))
        der = np.gradient(der, dxi, edge_order=2)
    return CordesSymbol(float(m), spec, a, tuple(semis), profile)


@dataclass(frozen=True)
class CordesReport:
    l1_norm: float
    s: float
    swp1_norm: float | None = None


def cordes_l1_check(a: CordesSymbol, s: float = 0.0, chi=None) -> CordesReport:
    """``||F^{-1}(<xi>^s a)||_{L^1}`` for ``s + m < 0``.

    With a window and ``s`` above the dimension, also returns the S_w^1 norm of
    ``F^{-1} a``, which the embedding controls.
    """
    if not a.order + s < 0:
        raise ValueError(f"need s + m < 0, got s={s}, m={a.order}")
    xi = a.freqs()
    g = idft(FourierCoefficients(a.spec, (1 + xi ** 2) ** (s / 2) * a.values))
    l1 = lp_norm(g, 1)
    w1 = None
    if chi is not None:
        if not s > a.spec.dim:
            raise ValueError(f"the S_w^1 half needs s > {a.spec.dim}, got {s}")
        w1 = _norm(idft(FourierCoefficients(a.spec, a.values)), chi, 1)
    return CordesReport(l1, s, w1)


def cordes_tensor_symbol(a1: CordesSymbol, a2: CordesSymbol, phase_spec: GridSpec,
                         transforms=("inverse", "inverse")) -> SampledFunction:
    """``g = F+(a1) (x) F+(a2)`` sampled on a phase-space grid.

    Each factor is the forward or inverse transform of the symbol, evaluated on
    the matching phase-space axis by trigonometric interpolation.
    """
    if phase_spec.dim != 2:
        raise ValueError("phase space must be 2-D")
    factors = []
    for ax, (a, kind) in enumerate(zip((a1, a2), transforms)):
        c = FourierCoefficients(a.spec, a.values)
        pts = phase_spec.axis(ax)
        if kind == "inverse":
            vals = eval_trig(c, pts)
        elif kind == "forward":
            # F = (2 pi)^d R F^{-1}, with R the reflection
            vals = (2 * np.pi) * eval_trig(c, -pts)
        else:
            raise ValueError(f"transform must be 'forward' or 'inverse', got {kind!r}")
        factors.append(vals)
    return SampledFunction(phase_spec, np.multiply.outer(*factors))


# ---------------------------------------------------------------- misc


def isometry_equivariance(u: SampledFunction, lam, b) -> float:
    """``max |b(|D|)(u o lambda) - (b(|D|) u) o lambda|`` for orthogonal ``lambda``."""
    lam = np.atleast_2d(np.asarray(lam, dtype=float))
    if np.abs(lam @ lam.T - np.eye(lam.shape[0])).max() > 1e-10:
        raise ValueError("lambda must be orthogonal")
    mesh = u.spec.freq_mesh()
    rad = np.sqrt(sum(x ** 2 for x in mesh))
    mult = b(rad)

    def apply(f):
        return idft(FourierCoefficients(f.spec, dft(f).coeffs * mult))

    lhs = apply(compose_linear(u, lam)[0])
    rhs = compose_linear(apply(u), lam)[0]
    return float(np.abs(lhs.values - rhs.values).max())


def peetre_slack(X, Y, N) -> np.ndarray:
    """``2^{|N|/2} <X>^N <Y>^{|N|} - <X + Y>^N`` (nonnegative by Peetre's inequality)."""
    X, Y = np.atleast_2d(X), np.atleast_2d(Y)
    N = np.asarray(N, dtype=float)

    def br(z):
        return np.sqrt(1 + np.sum(z ** 2, axis=-1))

    return 2 ** (np.abs(N) / 2) * br(X) ** N * br(Y) ** np.abs(N) - br(X + Y) ** N
