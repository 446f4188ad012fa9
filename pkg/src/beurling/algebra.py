"""Finite sections of weighted p-Beurling algebras of kernels.

A kernel lives on a finite metric space with counting measure and is stored
as a dense complex ``N x N`` array.  Lattice spaces are boxes in ``Z^d``
whose points are enumerated lexicographically: the id of ``k`` is
``sum_i (k_i - lo) * (hi - lo + 1)**(d - 1 - i)``, which for the symmetric
window ``[-N, N]^d`` is the fixed rule ``sum_i (k_i + N)(2N + 1)**(d-1-i)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import UsageError
from .rng import Xoshiro256
from .weights import NORMS, Weight

METRIC_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class FiniteMetricSpace:
    """A finite metric space with counting measure.

    ``kind`` is ``"lattice-window"`` (box ``[lo, hi]^d`` in ``Z^d`` with the
    given vector norm) or ``"point-cloud"`` (explicit distances, optionally
    with coordinates).
    """

    kind: str
    d: int = 1
    lo: int = 0
    hi: int = 0
    norm: str = "sup"
    coords: np.ndarray | None = None
    dist: np.ndarray | None = None

    @classmethod
    def lattice_window(cls, d, radius, norm="sup"):
        """The window ``[-radius, radius]^d``."""
        return cls.lattice_box(d, -int(radius), int(radius), norm)

    @classmethod
    def lattice_box(cls, d, lo, hi, norm="sup"):
        if d < 1 or hi < lo:
            raise UsageError("lattice box needs d >= 1 and hi >= lo")
        if norm not in NORMS:
            raise UsageError(f"unknown norm {norm!r}")
        return cls("lattice-window", d=int(d), lo=int(lo), hi=int(hi), norm=norm)

    @classmethod
    def segment(cls, n):
        """The integer segment ``{0, ..., n-1}``."""
        return cls.lattice_box(1, 0, int(n) - 1)

    @classmethod
    def point_cloud(cls, coords):
        """Points of ``R^m`` with the Euclidean metric."""
        coords = np.atleast_2d(np.asarray(coords, dtype=float))
        diff = coords[:, None, :] - coords[None, :, :]
        dist = np.sqrt(np.sum(diff * diff, axis=-1))
        return cls("point-cloud", d=coords.shape[1], coords=coords, dist=dist)

    @classmethod
    def from_distance(cls, dist, check=True):
        dist = np.array(dist, dtype=float)
        if dist.ndim != 2 or dist.shape[0] != dist.shape[1]:
            raise UsageError("distance matrix must be square")
        space = cls("point-cloud", d=0, dist=dist)
        if check and not is_metric(space):
            raise UsageError("distance matrix violates the metric axioms")
        return space

    @property
    def is_lattice(self):
        return self.kind == "lattice-window"

    @property
    def side(self):
        return self.hi - self.lo + 1

    @cached_property
    def size(self):
        if self.is_lattice:
            return self.side**self.d
        return self.dist.shape[0]

    @cached_property
    def points(self):
        """Lattice points in id order, shape ``(N, d)``."""
        if not self.is_lattice:
            if self.coords is None:
                raise UsageError("point cloud built from distances has no coordinates")
            return self.coords
        axes = [np.arange(self.lo, self.hi + 1)] * self.d
        grid = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.ravel() for g in grid], axis=-1)

    def index_of(self, point):
        """Id of lattice point(s) ``point`` (last axis = coordinates)."""
        pt = np.asarray(point)
        if pt.shape[-1] != self.d:
            raise UsageError("point dimension does not match the window")
        if np.any(pt < self.lo) or np.any(pt > self.hi):
            raise UsageError("point outside the window")
        scale = self.side ** np.arange(self.d - 1, -1, -1)
        return np.sum((pt - self.lo) * scale, axis=-1)

    def offset_norms(self, norm=None):
        """``|x - y|`` for all id pairs, in the given vector norm (default: the space's)."""
        norm = norm or self.norm
        pts = self.points
        if norm == "sup":
            out = np.zeros((self.size, self.size))
            for i in range(self.d):
                np.maximum(out, np.abs(pts[:, i][:, None] - pts[:, i][None, :]), out=out)
            return out
        acc = np.zeros((self.size, self.size))
        for i in range(self.d):
            diff = (pts[:, i][:, None] - pts[:, i][None, :]).astype(float)
            acc += np.abs(diff) if norm == "sum" else diff * diff
        return acc if norm == "sum" else np.sqrt(acc)

    @cached_property
    def distance(self):
        if self.is_lattice:
            return self.offset_norms()
        return self.dist

    def to_spec(self):
        if self.is_lattice:
            return {"kind": "lattice-window", "d": self.d, "lo": self.lo, "hi": self.hi, "norm": self.norm}
        if self.coords is not None:
            return {"kind": "point-cloud", "points": self.coords.tolist()}
        return {"kind": "point-cloud", "distance": self.dist.tolist()}


def is_metric(space, seed=0, n_triples=100_000):
    """Metric axioms: exhaustive triangle check for N <= 64, sampled triples otherwise."""
    D = space.distance
    n = D.shape[0]
    if np.any(np.diag(D) != 0) or np.any(D != D.T) or np.any(D < 0) or not np.all(np.isfinite(D)):
        return False
    if n <= 64:
        return bool(np.all(D[:, None, :] <= D[:, :, None] + D[None, :, :] + METRIC_TOL))
    idx = Xoshiro256(seed).integers(0, n - 1, 3 * n_triples).reshape(3, n_triples)
    x, y, z = idx
    return bool(np.all(D[x, y] <= D[x, z] + D[z, y] + METRIC_TOL))


@dataclass(frozen=True, eq=False)
class Kernel:
    """Complex kernel ``K(x, y)`` on a finite metric space, dense storage."""

    space: FiniteMetricSpace
    entries: np.ndarray

    def __post_init__(self):
        e = np.array(self.entries, dtype=complex)
        n = self.space.size
        if e.shape != (n, n):
            raise UsageError(f"kernel entries of shape {e.shape} on a space of size {n}")
        if not np.all(np.isfinite(e)):
            raise UsageError("kernel entries must be finite")
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    @property
    def size(self):
        return self.space.size

    def __add__(self, other):
        if not isinstance(other, Kernel):
            return NotImplemented
        _same_space(self, other)
        return Kernel(self.space, self.entries + other.entries)

    def __sub__(self, other):
        if not isinstance(other, Kernel):
            return NotImplemented
        _same_space(self, other)
        return Kernel(self.space, self.entries - other.entries)

    def __neg__(self):
        return Kernel(self.space, -self.entries)

    def __mul__(self, alpha):
        if isinstance(alpha, Kernel):
            return NotImplemented
        return Kernel(self.space, complex(alpha) * self.entries)

    __rmul__ = __mul__

    def __matmul__(self, other):
        return convolve(self, other)

    def is_hermitian(self, rtol=1e-10):
        e = self.entries
        scale = np.max(np.abs(e)) if e.size else 0.0
        return bool(np.max(np.abs(e - e.conj().T), initial=0.0) <= rtol * scale)


def _same_space(K, J):
    if not isinstance(J, Kernel) or not isinstance(K, Kernel):
        raise UsageError("expected two kernels")
    if J.space is not K.space and J.space.to_spec() != K.space.to_spec():
        raise UsageError("kernels live on different spaces")


def identity_kernel(space):
    return Kernel(space, np.eye(space.size, dtype=complex))


def zero_kernel(space):
    return Kernel(space, np.zeros((space.size, space.size), dtype=complex))


def log_weight_matrix(space, w):
    """``log w`` on all id pairs; ``None`` encodes the trivial weight."""
    if w is None:
        return None
    if not isinstance(w, Weight):
        raise UsageError("weight must be a Weight")
    if w.is_radial:
        if not space.is_lattice:
            raise UsageError("radial-lattice weights need a lattice-window space")
        if w.dim != space.d:
            raise UsageError(f"weight on Z^{w.dim} used on a window in Z^{space.d}")
        return w.profile(space.offset_norms(w.norm))
    return w.log_pair(space.distance)


def _pnorm_entries(entries, p, logw=None):
    mag = np.abs(entries)
    terms = np.zeros(mag.shape)
    nz = mag > 0
    logs = np.log(mag[nz])
    if logw is not None:
        logs = logs + logw[nz]
    terms[nz] = np.exp(p * logs)
    return _row_col_max(terms)


def _row_col_max(terms):
    # both sums run along contiguous rows, so K and K* give bit-identical norms
    rows = terms.sum(axis=1)
    cols = np.ascontiguousarray(terms.T).sum(axis=1)
    return max(float(np.max(rows, initial=0.0)), float(np.max(cols, initial=0.0)))


def schur_pnorm(K, p, w=None):
    """Weighted Schur p-norm: the larger of the sup row and sup column sums of ``|K|^p w^p``."""
    if not 0 < p <= 1:
        raise UsageError("p must lie in (0, 1]")
    return _pnorm_entries(K.entries, p, log_weight_matrix(K.space, w))


def unweighted_pnorm(K, q):
    """``max{sup_x sum_y |K|^q, sup_y sum_x |K|^q}`` for ``q <= 1``; the q-th root of it for ``q > 1``."""
    if not q > 0:
        raise UsageError("q must be positive")
    val = _pnorm_entries(K.entries, q)
    if q <= 1:
        return val
    return _row_col_max(np.abs(K.entries) ** q) ** (1.0 / q)


def convolve(K, J):
    """``(K * J)(x, y) = sum_z K(x, z) J(z, y)``."""
    _same_space(K, J)
    return Kernel(K.space, K.entries @ J.entries)


def involution(K):
    """``K*(x, y) = conj(K(y, x))``."""
    return Kernel(K.space, K.entries.conj().T)


def apply(K, f):
    """``sum_y K(x, y) f(y)``."""
    f = np.asarray(f, dtype=complex)
    if f.shape != (K.size,):
        raise UsageError(f"vector of length {f.shape} for a kernel of size {K.size}")
    return K.entries @ f


@dataclass(frozen=True)
class GrowthReport:
    b: float
    C_min: float
    worst_x: int
    worst_delta: float
    deltas: tuple


def growth_constants(space, b):
    """Smallest ``C`` with ``|Gamma_x[delta]| <= C delta^b`` over all x and ``delta >= 1``.

    ``delta`` runs over 1 and every distinct pairwise distance >= 1; between
    consecutive grid values the ball count is constant while ``delta^b``
    grows, so the grid attains the maximum.
    """
    if not b > 0:
        raise UsageError("b must be positive")
    D = space.distance
    vals = np.unique(np.round(D[D >= 1.0], 12))
    deltas = np.unique(np.concatenate([[1.0], vals]))
    rows = np.sort(D, axis=1)
    best, worst = -1.0, (0, 1.0)
    bound = deltas * (1 + METRIC_TOL)
    power = deltas**b
    for x in range(space.size):
        counts = np.searchsorted(rows[x], bound, side="right")
        ratio = counts / power
        j = int(np.argmax(ratio))
        if ratio[j] > best:
            best, worst = float(ratio[j]), (x, float(deltas[j]))
    return GrowthReport(float(b), best, worst[0], worst[1], tuple(float(v) for v in deltas))


def _normalize_offset(key, d):
    if isinstance(key, (int, np.integer)):
        key = (int(key),)
    key = tuple(int(v) for v in key)
    if len(key) != d:
        raise UsageError(f"offset {key} does not have dimension {d}")
    return key


def toeplitz_from_symbol(coeffs, window):
    """Lattice kernel ``K(k, l) = c_{k-l}`` from finitely many coefficients.

    ``coeffs`` maps offsets (ints for d = 1, tuples otherwise) to complex values.
    """
    if not window.is_lattice:
        raise UsageError("toeplitz_from_symbol needs a lattice-window space")
    d, extent = window.d, window.hi - window.lo
    pts = window.points
    entries = np.zeros((window.size, window.size), dtype=complex)
    for key, value in coeffs.items():
        u = np.array(_normalize_offset(key, d))
        if np.any(np.abs(u) > extent):
            raise UsageError(f"coefficient offset {tuple(u)} exceeds the window diameter {extent}")
        src = pts - u
        inside = np.all((src >= window.lo) & (src <= window.hi), axis=1)
        rows = np.nonzero(inside)[0]
        cols = window.index_of(src[inside])
        entries[rows, cols] += complex(value)
    return Kernel(window, entries)


@dataclass(frozen=True)
class Envelope:
    """Decay envelope: ``r**t`` (exponential, 0 < r < 1) or ``(1 + t)**-s`` (polynomial, s > 0)."""

    kind: str
    param: float

    def __post_init__(self):
        if self.kind == "exponential":
            if not 0 < self.param < 1:
                raise UsageError("exponential envelope needs 0 < r < 1")
        elif self.kind == "polynomial":
            if not self.param > 0:
                raise UsageError("polynomial envelope needs s > 0")
        else:
            raise UsageError(f"unknown envelope {self.kind!r}")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "exponential":
            return np.power(self.param, t)
        return np.power(1.0 + t, -self.param)


def random_decaying_kernel(space, envelope, seed, hermitian=False, bandwidth=None):
    """Seeded kernel with ``|K(x, y)| <= envelope(d(x, y))``.

    Entries are ``u * envelope(d) * exp(2 pi i phi)`` with ``u`` then ``phi``
    drawn row-major from ``Xoshiro256(seed)`` (all moduli first, then all
    phases).  Entries with ``d > bandwidth`` are zeroed after drawing, so the
    stream does not depend on the bandwidth.
    """
    n = space.size
    z = Xoshiro256(seed).complex_unit_disk(n * n).reshape(n, n)
    D = space.distance
    entries = z * envelope(D)
    if bandwidth is not None:
        entries[D > bandwidth + METRIC_TOL] = 0.0
    if hermitian:
        entries = 0.5 * (entries + entries.conj().T)
    return Kernel(space, entries)


def kernel_offsets_constant(K):
    """True if a lattice kernel depends only on ``x - y``."""
    space = K.space
    pts = space.points
    seen = {}
    e = K.entries
    for i, j in itertools.product(range(space.size), repeat=2):
        key = tuple(pts[i] - pts[j])
        if key in seen:
            if abs(seen[key] - e[i, j]) > 1e-14 * max(1.0, abs(seen[key])):
                return False
        else:
            seen[key] = e[i, j]
    return True
