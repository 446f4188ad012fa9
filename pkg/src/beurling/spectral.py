"""Spectral quantities of finite sections.

The algebra spectral radius is approximated by norm roots
``s_j = ||K^(2^j)||^(1/2^j)`` computed by repeated squaring with rescaling.
The l2 side uses power iteration for the operator norm and a cyclic Jacobi
eigensolver for hermitian kernels.  Inversion goes through LAPACK's LU with
partial pivoting.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, replace

import numpy as np
import scipy.linalg

from .algebra import Kernel, _pnorm_entries, log_weight_matrix
from .errors import DomainError, NumericalError, SingularKernelError, UsageError
from .rng import Xoshiro256

PIVOT_RTOL = 1e-12
JACOBI_SWEEPS = 50


@dataclass(frozen=True)
class SpectralReport:
    """Norm roots of one kernel together with its l2 data.

    ``norm_roots`` holds ``(n_j, s_j)`` with ``n_j = 2**j``.  ``eig_oracle`` is
    ``max|lambda|**p`` from the Jacobi eigensolver and is only present for
    hermitian kernels.
    """

    p: float
    norm_roots: tuple
    r_alg_estimate: float
    eig_oracle: float | None = None
    op_norm: float | None = None
    op_norm_p: float | None = None
    weight_label: str = "1"

    @property
    def s(self):
        return [s for _, s in self.norm_roots]

    def to_dict(self):
        out = asdict(self)
        out["norm_roots"] = [[n, s] for n, s in self.norm_roots]
        return out


def norm_root_sequence(K, p, w=None, j_max=8):
    """``s_j = ||K^(2^j)||_{pw}^(1/2^j)`` for ``j = 0..j_max``.

    Every squaring is followed by division with ``||M||^(1/p)`` whose log is
    carried separately, so neither overflow (radius > 1) nor underflow
    (radius < 1) occurs for moderate ``j_max``.  A zero power makes all later
    roots zero.
    """
    if not 0 < p <= 1:
        raise UsageError("p must lie in (0, 1]")
    if not 0 <= j_max <= 12:
        raise UsageError("j_max must lie in 0..12")
    logw = log_weight_matrix(K.space, w)
    M = np.array(K.entries)
    log_scale = 0.0  # K^(2^j) = exp(log_scale) * M
    roots = []
    for j in range(j_max + 1):
        n = 2**j
        norm = _pnorm_entries(M, p, logw)
        if not math.isfinite(norm):
            raise NumericalError(f"norm overflow at power 2^{j} despite rescaling", estimate=roots)
        if norm == 0.0:
            roots.extend((2**i, 0.0) for i in range(j, j_max + 1))
            break
        roots.append((n, math.exp((p * log_scale + math.log(norm)) / n)))
        if j == j_max:
            break
        c = norm ** (1.0 / p)
        M = M / c
        log_scale += math.log(c)
        M = M @ M
        log_scale *= 2.0
    r_est = min(s for _, s in roots)
    label = "1" if w is None else w.label()
    return SpectralReport(p=float(p), norm_roots=tuple(roots), r_alg_estimate=r_est, weight_label=label)


def _deterministic_start(n, seed=0x5EED):
    rng = Xoshiro256(seed)
    v = 1.0 + 0.5 * rng.random_array(n) + 0.5j * rng.random_array(n)
    return v / np.linalg.norm(v)


@dataclass(frozen=True)
class OperatorNorm:
    op_norm: float
    iterations: int
    crosscheck: float | None = None

    def op_norm_p(self, p):
        return self.op_norm**p


def operator_norm_l2(K, tol=1e-10, max_iter=10_000, crosscheck_limit=128):
    """Largest singular value of ``K`` by power iteration on ``K* K``.

    When the iteration stalls (slow spectral gap) the iterated matrix is
    squared, which keeps the method a power iteration on a power of ``K* K``;
    the final value is the Rayleigh quotient of the unsquared ``K* K``.  For
    sizes up to ``crosscheck_limit`` the result is compared with the Jacobi
    eigensolver applied to ``K* K``.
    """
    if not tol > 0:
        raise UsageError("tol must be positive")
    A = K.entries
    n = A.shape[0]
    G = A.conj().T @ A
    top = float(np.max(np.abs(G), initial=0.0))
    if top == 0.0:
        return OperatorNorm(0.0, 0)
    B = G / top
    v = _deterministic_start(n)
    lam_prev = None
    stall, it = 0, 0
    converged = False
    for it in range(1, max_iter + 1):
        y = B @ v
        ny = np.linalg.norm(y)
        if ny == 0.0:
            v = _deterministic_start(n, seed=it)
            continue
        lam = float(np.real(np.vdot(v, y)))
        v = y / ny
        if lam_prev is not None and abs(lam - lam_prev) <= tol * abs(lam):
            converged = True
            break
        lam_prev = lam
        stall += 1
        if stall >= 50 and n <= 2048:
            B = B @ B
            B = B / np.max(np.abs(B))
            stall, lam_prev = 0, None
    rq = float(np.real(np.vdot(v, G @ v)))
    sigma = math.sqrt(max(rq, 0.0))
    if not converged:
        raise NumericalError(f"power iteration did not converge in {max_iter} steps", estimate=sigma)
    check = None
    if n <= crosscheck_limit:
        vals = hermitian_spectrum(Kernel(K.space, G))
        check = math.sqrt(max(float(vals[-1]), 0.0))
        if abs(check - sigma) > 1e-8 * max(check, 1e-300):
            raise NumericalError(f"power iteration {sigma} disagrees with Jacobi {check}", estimate=sigma)
    return OperatorNorm(sigma, it, check)


def _offdiag_norm(A):
    off = A - np.diag(np.diag(A))
    return float(np.sqrt(np.sum(np.abs(off) ** 2)))


def hermitian_eigh(K, tol=1e-12, max_sweeps=JACOBI_SWEEPS):
    """Eigenvalues (ascending) and eigenvectors of a hermitian kernel by cyclic Jacobi.

    Each rotation first makes ``A[p, q]`` real with a diagonal phase and
    then annihilates it with a real plane rotation.  Sweeps visit pairs in
    row-major order; iteration stops once the off-diagonal Frobenius mass
    is at most ``tol`` times the Frobenius norm.
    """
    E = np.asarray(K.entries if isinstance(K, Kernel) else K)
    scale = float(np.max(np.abs(E), initial=0.0))
    if np.max(np.abs(E - E.conj().T), initial=0.0) > 1e-10 * scale:
        raise UsageError("hermitian_spectrum needs a hermitian kernel")
    n = E.shape[0]
    A = 0.5 * (E + E.conj().T)
    A = A.astype(complex)
    V = np.eye(n, dtype=complex)
    total = float(np.sqrt(np.sum(np.abs(A) ** 2)))
    if total == 0.0:
        return np.zeros(n), V
    target = tol * total
    for _ in range(max_sweeps):
        if _offdiag_norm(A) <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                r = abs(apq)
                if r <= 1e-300 or r <= 1e-18 * total:
                    continue
                phase = apq / r
                app, aqq = A[p, p].real, A[q, q].real
                tau = (aqq - app) / (2.0 * r)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                # columns p, q <- [a_p, a_q] @ U with U = diag(1, conj(phase)) @ [[c, s], [-s, c]]
                U = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
                cols = A[:, [p, q]] @ U
                A[:, p], A[:, q] = cols[:, 0], cols[:, 1]
                rows = U.conj().T @ A[[p, q], :]
                A[p, :], A[q, :] = rows[0], rows[1]
                A[p, q] = A[q, p] = 0.0
                A[p, p] = A[p, p].real
                A[q, q] = A[q, q].real
                vc = V[:, [p, q]] @ U
                V[:, p], V[:, q] = vc[:, 0], vc[:, 1]
    else:
        if _offdiag_norm(A) > target:
            raise NumericalError(f"Jacobi did not converge in {max_sweeps} sweeps", estimate=np.sort(np.diag(A).real))
    vals = np.diag(A).real
    order = np.argsort(vals, kind="stable")
    return vals[order], V[:, order]


def hermitian_spectrum(K, tol=1e-12):
    """Sorted real eigenvalues of a hermitian kernel."""
    return hermitian_eigh(K, tol)[0]


def lu_factor_checked(A):
    """LU with partial pivoting; raises SingularKernelError on a tiny pivot."""
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise UsageError("LU needs a square matrix")
    with warnings.catch_warnings():
        # exact zero pivots are reported below through SingularKernelError
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(A, check_finite=True)
    thresh = PIVOT_RTOL * float(np.max(np.abs(A), initial=0.0))
    small = np.nonzero(np.abs(np.diag(lu)) < thresh)[0]
    if small.size or thresh == 0.0:
        step = int(small[0]) if small.size else 0
        raise SingularKernelError(f"pivot at step {step} is below {thresh:.3e}; section is singular", step=step)
    return lu, piv


def invert(K, tol=1e-8):
    """Inverse kernel by complex LU with partial pivoting.

    The residuals ``||K B - E||_max`` and ``||B K - E||_max`` must stay below
    ``tol * max(1, ||K||_inf ||B||_inf)``.
    """
    lu, piv = lu_factor_checked(K.entries)
    n = K.size
    B = scipy.linalg.lu_solve((lu, piv), np.eye(n, dtype=complex))
    A = K.entries
    cond = np.max(np.abs(A).sum(axis=1)) * np.max(np.abs(B).sum(axis=1))
    bound = tol * max(1.0, float(cond))
    eye = np.eye(n)
    res = max(float(np.max(np.abs(A @ B - eye))), float(np.max(np.abs(B @ A - eye))))
    if res > bound:
        raise NumericalError(f"inverse residual {res:.3e} exceeds {bound:.3e}", estimate=res)
    return Kernel(K.space, B)


def solve(K, rhs):
    """Solve ``K x = rhs`` with the checked LU."""
    lu, piv = lu_factor_checked(K.entries)
    return scipy.linalg.lu_solve((lu, piv), np.asarray(rhs, dtype=complex))


@dataclass(frozen=True)
class DecayFit:
    log_amplitude: float
    rate: float
    residual: float

    @property
    def ratio(self):
        return math.exp(self.rate)


@dataclass(frozen=True)
class DecayProfile:
    bins: tuple
    fit: DecayFit | None
    floor: float
    bin_width: float = 1.0

    def to_dict(self):
        return {
            "bins": [[t, m] for t, m in self.bins],
            "fit": None if self.fit is None else asdict(self.fit),
            "floor": self.floor,
            "bin_width": self.bin_width,
        }


def decay_profile(K, floor=1e-14, rows=None, include_diagonal=False):
    """Largest entry modulus per distance bin and a log-linear fit of it.

    Lattice spaces bin by exact distance; point clouds use the median
    nearest-neighbour distance as bin width.  ``rows`` restricts the profile
    to a subset of row ids (e.g. the middle rows of a section).
    """
    if not floor > 0:
        raise UsageError("floor must be positive")
    D = K.space.distance
    mag = np.abs(K.entries)
    if rows is not None:
        rows = np.asarray(rows)
        D, mag = D[rows], mag[rows]
    if K.space.is_lattice:
        width = 1.0
    else:
        full = K.space.distance.copy()
        np.fill_diagonal(full, np.inf)
        nn = full.min(axis=1)
        width = float(np.median(nn[np.isfinite(nn)])) if full.shape[0] > 1 else 1.0
    idx = np.rint(D / width).astype(np.int64)
    nbins = int(idx.max()) + 1 if idx.size else 0
    best = np.zeros(nbins)
    np.maximum.at(best, idx.ravel(), mag.ravel())
    present = np.zeros(nbins, dtype=bool)
    present[np.unique(idx)] = True
    bins = tuple((float(t * width), float(best[t])) for t in range(nbins) if present[t])
    ts = np.array([t for t, m in bins if m > floor and (include_diagonal or t > 0)])
    ms = np.array([m for t, m in bins if m > floor and (include_diagonal or t > 0)])
    fit = None
    if ts.size >= 3:
        X = np.stack([np.ones_like(ts), ts], axis=1)
        coef, *_ = np.linalg.lstsq(X, np.log(ms), rcond=None)
        resid = float(np.sqrt(np.mean((X @ coef - np.log(ms)) ** 2)))
        fit = DecayFit(float(coef[0]), float(coef[1]), resid)
    return DecayProfile(bins, fit, float(floor), width)


def power_function(K, alpha, tol=1e-12):
    """``K**alpha = V diag(lambda**alpha) V*`` for hermitian ``K``.

    Fractional and negative exponents require ``K`` positive definite
    (smallest eigenvalue at least ``1e-10`` times the largest).
    """
    vals, V = hermitian_eigh(K, tol)
    alpha = float(alpha)
    integral = alpha.is_integer() and alpha >= 0
    if not integral:
        if vals[-1] <= 0 or vals[0] < 1e-10 * vals[-1]:
            raise DomainError(f"K**{alpha:g} needs a positive definite kernel (eigenvalues in [{vals[0]:.3e}, {vals[-1]:.3e}])")
        lam = np.exp(alpha * np.log(vals))
    else:
        lam = vals ** int(alpha)
    return Kernel(K.space, (V * lam) @ V.conj().T)


def barnes_m(p):
    """The integer ``m`` with ``2**-m < p <= 2**(1-m)``."""
    if not 0 < p <= 1:
        raise UsageError("p must lie in (0, 1]")
    m = 1
    while p <= 2.0**-m:
        m += 1
    return m


def barnes_bound(p, delta, b):
    """``(2**b)**(sum_{i<=m} 2**-i) / (1 - 2**(-p*delta))`` with ``m = barnes_m(p)``."""
    if not 0 < delta <= 1:
        raise UsageError("delta must lie in (0, 1]")
    if not b > 0:
        raise UsageError("b must be positive")
    m = barnes_m(p)
    exponent = sum(2.0**-i for i in range(1, m + 1))
    return 2.0 ** (b * exponent) / (1.0 - 2.0 ** (-p * delta))


def spectral_radius_algebra(K, p, w=None, j_max=8, eig_limit=256):
    """Norm roots, l2 operator norm and (hermitian case) eigen oracle of one kernel.

    For hermitian ``K`` the triple ``(r_alg_estimate, op_norm_p, eig_oracle)``
    should agree in the limit.  The Jacobi oracle is skipped above
    ``eig_limit`` points.
    """
    rep = norm_root_sequence(K, p, w, j_max)
    op = operator_norm_l2(K)
    eig = None
    if K.size <= eig_limit and K.is_hermitian():
        vals = hermitian_spectrum(K)
        eig = float(max(abs(vals[0]), abs(vals[-1]))) ** p
    return replace(rep, op_norm=op.op_norm, op_norm_p=op.op_norm**p, eig_oracle=eig)


__all__ = [
    "SpectralReport", "OperatorNorm", "DecayFit", "DecayProfile",
    "norm_root_sequence", "operator_norm_l2", "hermitian_eigh", "hermitian_spectrum",
    "invert", "solve", "lu_factor_checked", "decay_profile", "power_function",
    "barnes_m", "barnes_bound", "spectral_radius_algebra",
]
