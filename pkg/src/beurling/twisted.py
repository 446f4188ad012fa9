"""Twisted convolution on ``Z^{2d}``.

A sequence ``a = (a_{kl})`` with ``k, l in Z^d`` is stored as a dense array
of shape ``(2N+1,) * 2d`` over the window ``[-N, N]^{2d}``; axis order is
``(k_1..k_d, l_1..l_d)``, so C-order flattening follows the lattice id rule.
The product is

    (a *_theta b)(m, n) = sum_{k,l} a_{kl} b_{m-k, n-l} exp(2 pi i theta (m-k).l)

and the involution is ``a*_{kl} = conj(a_{-k,-l}) exp(2 pi i theta k.l)``.
Weights on ``Z^{2d}`` are evaluated at the full point ``(k, l)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .algebra import FiniteMetricSpace, Kernel
from .errors import ConvergenceError, UsageError
from .rng import Xoshiro256
from .spectral import solve


def _phase(x):
    """``exp(2 pi i x)`` with the argument reduced mod 1 first."""
    frac = np.mod(x, 1.0)
    return np.exp(2j * math.pi * frac)


@dataclass(frozen=True, eq=False)
class TwistedSequence:
    d: int
    theta: float
    radius: int
    values: np.ndarray

    def __post_init__(self):
        if self.d < 1 or self.radius < 0:
            raise UsageError("need d >= 1 and radius >= 0")
        if self.theta < 0:
            raise UsageError("theta must be nonnegative")
        shape = (2 * self.radius + 1,) * (2 * self.d)
        v = np.array(self.values, dtype=complex)
        if v.size != math.prod(shape):
            raise UsageError(f"{v.size} values for a window of shape {shape}")
        v = v.reshape(shape)
        if not np.all(np.isfinite(v)):
            raise UsageError("sequence values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def zeros(cls, d, theta, radius):
        return cls(d, theta, radius, np.zeros((2 * radius + 1,) * (2 * d), dtype=complex))

    @classmethod
    def from_dict(cls, d, theta, terms, radius=None):
        """Sequence from ``{(k..., l...): value}`` with 2d-tuples as keys."""
        keys = [tuple(int(c) for c in key) for key in terms]
        for key in keys:
            if len(key) != 2 * d:
                raise UsageError(f"index {key} is not a point of Z^{2 * d}")
        need = max((max(abs(c) for c in key) for key in keys), default=0)
        radius = need if radius is None else int(radius)
        if need > radius:
            raise UsageError(f"support radius {need} exceeds declared radius {radius}")
        out = np.zeros((2 * radius + 1,) * (2 * d), dtype=complex)
        for key, val in zip(keys, terms.values()):
            out[tuple(c + radius for c in key)] += complex(val)
        return cls(d, theta, radius, out)

    @classmethod
    def delta0(cls, d, theta, radius=0):
        return cls.from_dict(d, theta, {(0,) * (2 * d): 1.0}, radius)

    @property
    def window_side(self):
        return 2 * self.radius + 1

    def points(self):
        """All window points in id order, shape ``(W, 2d)``."""
        axes = [np.arange(-self.radius, self.radius + 1)] * (2 * self.d)
        grid = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.ravel() for g in grid], axis=-1)

    def flat(self):
        return self.values.ravel()

    def __getitem__(self, index):
        index = tuple(int(c) for c in index)
        if len(index) != 2 * self.d:
            raise UsageError("index dimension mismatch")
        if max(abs(c) for c in index) > self.radius:
            return 0j
        return complex(self.values[tuple(c + self.radius for c in index)])

    def support_radius(self, atol=0.0):
        nz = np.argwhere(np.abs(self.values) > atol)
        if nz.size == 0:
            return 0
        return int(np.max(np.abs(nz - self.radius)))

    def embed(self, radius):
        """Same sequence on the larger window ``[-radius, radius]^{2d}``."""
        if radius < self.radius:
            raise UsageError("embed needs a radius at least the current one")
        pad = radius - self.radius
        return TwistedSequence(self.d, self.theta, radius, np.pad(self.values, pad))

    def crop(self, radius):
        """Restriction to ``[-radius, radius]^{2d}`` (entries outside are dropped)."""
        if radius >= self.radius:
            return self.embed(radius)
        cut = self.radius - radius
        sl = tuple(slice(cut, cut + 2 * radius + 1) for _ in range(2 * self.d))
        return TwistedSequence(self.d, self.theta, radius, self.values[sl])

    def __add__(self, other):
        _compatible(self, other)
        r = max(self.radius, other.radius)
        return TwistedSequence(self.d, self.theta, r, self.embed(r).values + other.embed(r).values)

    def __sub__(self, other):
        return self + (-1.0) * other

    def __mul__(self, alpha):
        return TwistedSequence(self.d, self.theta, self.radius, complex(alpha) * self.values)

    __rmul__ = __mul__

    def __matmul__(self, other):
        return twisted_convolve(self, other)


def _compatible(a, b):
    if a.d != b.d:
        raise UsageError(f"half-dimension mismatch: {a.d} vs {b.d}")
    if a.theta != b.theta:
        raise UsageError(f"twist mismatch: {a.theta} vs {b.theta}")


def max_abs_diff(a, b):
    """Sup-norm distance of two sequences on the union of their windows."""
    r = max(a.radius, b.radius)
    return float(np.max(np.abs(a.embed(r).values - b.embed(r).values)))


def twisted_convolve(a, b):
    """``a *_theta b`` on the window of radius ``N_a + N_b`` (exact double sum)."""
    _compatible(a, b)
    d, Na, Nb = a.d, a.radius, b.radius
    R = Na + Nb
    out = np.zeros((2 * R + 1,) * (2 * d), dtype=complex)
    u = np.arange(-Nb, Nb + 1)
    # u . l for the b-index first half u, as an array over b's window
    grids = np.meshgrid(*([u] * d), indexing="ij")
    ucoords = [g.reshape(g.shape + (1,) * d) for g in grids]
    side_b = 2 * Nb + 1
    for idx in np.argwhere(a.values != 0):
        kl = idx - Na
        l = kl[d:]
        dot = sum(ucoords[i] * l[i] for i in range(d))
        phase = _phase(a.theta * dot) if a.theta else 1.0
        start = tuple(int(c) + R - Nb for c in kl)
        sl = tuple(slice(s, s + side_b) for s in start)
        out[sl] += a.values[tuple(idx)] * (phase * b.values)
    return TwistedSequence(d, a.theta, R, out)


def twisted_involution(a):
    """``a*_{kl} = conj(a_{-k,-l}) exp(2 pi i theta k.l)``."""
    d, N = a.d, a.radius
    flipped = np.conj(a.values[(slice(None, None, -1),) * (2 * d)])
    axis = np.arange(-N, N + 1)
    grids = np.meshgrid(*([axis] * (2 * d)), indexing="ij")
    dot = sum(grids[i] * grids[d + i] for i in range(d))
    phase = _phase(a.theta * dot) if a.theta else 1.0
    return TwistedSequence(d, a.theta, N, flipped * phase)


def _log_weight_grid(a, w):
    if w is None:
        return None
    if not w.is_radial or w.dim != 2 * a.d:
        raise UsageError(f"weight must be radial-lattice on Z^{2 * a.d}")
    return w.log_lattice(a.points()).reshape(a.values.shape)


def weighted_lp_norm(a, p, w=None):
    """``sum_{k,l} |a_{kl}|^p w(k, l)^p`` (no outer root)."""
    if not 0 < p <= 1:
        raise UsageError("p must lie in (0, 1]")
    mag = np.abs(a.values)
    nz = mag > 0
    logs = np.log(mag[nz])
    logw = _log_weight_grid(a, w)
    if logw is not None:
        logs = logs + logw[nz]
    return float(np.sum(np.exp(p * logs)))


def lq_norm(a, q):
    """Plain ``l^q`` norm with the root, ``q >= 1``."""
    if q < 1:
        raise UsageError("lq_norm needs q >= 1")
    return float(np.sum(np.abs(a.values) ** q) ** (1.0 / q))


def materialize_twisted_operator(a, op_radius):
    """Matrix of ``b -> a *_theta b`` on the window ``[-R, R]^{2d}``.

    Row ``(m, n)``, column ``(k, l)`` holds ``a_{m-k, n-l} exp(2 pi i theta k.(n-l))``,
    so that ``apply(K, b.flat())`` is the product restricted to the window.
    """
    R = int(op_radius)
    if R < a.radius:
        raise UsageError(f"op_radius {R} is smaller than the support radius {a.radius}")
    d = a.d
    space = FiniteMetricSpace.lattice_window(2 * d, R)
    pts = space.points
    n = space.size
    entries = np.zeros((n, n), dtype=complex)
    cols = np.arange(n)
    for idx in np.argwhere(a.values != 0):
        off = idx - a.radius
        target = pts + off
        inside = np.all(np.abs(target) <= R, axis=1)
        k = pts[inside, :d]
        v = off[d:]
        phase = _phase(a.theta * (k @ v)) if a.theta else 1.0
        rows = space.index_of(target[inside])
        entries[rows, cols[inside]] += a.values[tuple(idx)] * phase
    return Kernel(space, entries)


def sequence_from_vector(vec, d, theta, radius):
    return TwistedSequence(d, theta, radius, np.asarray(vec).reshape((2 * radius + 1,) * (2 * d)))


def inner_residual(a, b):
    """``max |a *_theta b - delta_0|`` over points at distance >= ``N_a`` from b's window boundary."""
    prod = twisted_convolve(a, b)
    inner = b.radius - a.radius
    if inner < 0:
        raise UsageError("window smaller than the support of a")
    diff = prod.crop(inner).values.copy()
    diff[(inner,) * (2 * a.d)] -= 1.0
    return float(np.max(np.abs(diff)))


def twisted_inverse(a, op_radius, tol=1e-8):
    """Finite-section inverse: solve ``L_a b = delta_0`` on ``[-R, R]^{2d}``.

    Only the single column ``delta_0`` is solved.  Raises ConvergenceError
    when the inner residual exceeds ``tol``.
    """
    K = materialize_twisted_operator(a, op_radius)
    rhs = np.zeros(K.size, dtype=complex)
    rhs[K.size // 2] = 1.0
    x = solve(K, rhs)
    b = sequence_from_vector(x, a.d, a.theta, int(op_radius))
    res = inner_residual(a, b)
    if not res <= tol:
        raise ConvergenceError(f"inner residual {res:.3e} exceeds {tol:.1e}; enlarge the window", residual=res)
    return b


def neumann_inverse(a, terms=40):
    """Truncated Neumann series for ``a = c delta_0 + h``: ``c^-1 sum_{n<=terms} (-h/c)^{*n}``.

    Converges when ``sum |h/c| < 1``; used as an independent check of
    ``twisted_inverse``.
    """
    c = a[(0,) * (2 * a.d)]
    if c == 0:
        raise UsageError("Neumann oracle needs a nonzero delta_0 coefficient")
    h = a - c * TwistedSequence.delta0(a.d, a.theta, a.radius)
    step = (-1.0 / c) * h
    power = TwistedSequence.delta0(a.d, a.theta)
    total = power
    for _ in range(terms):
        power = twisted_convolve(step, power)
        total = total + power
    return (1.0 / c) * total


def random_sequence(d, theta, radius, seed, scale=1.0):
    """Seeded sequence with entries ``scale * u * exp(2 pi i phi)`` on the window."""
    n = (2 * radius + 1) ** (2 * d)
    z = Xoshiro256(seed).complex_unit_disk(n)
    return TwistedSequence(d, theta, radius, scale * z)
