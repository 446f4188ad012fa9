"""Submultiplicative weights: radial profiles, lattice weights and metric-pair weights.

A radial weight on ``Z^m`` has the form ``w(x) = exp(rho(|x|))`` with ``rho``
concave, ``rho(0) = 0``.  The pair weights ``(1 + eps*d(x, y))**delta`` act on
kernels over a finite metric space.  Everything here is immutable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConstructionError, UsageError
from .rng import Xoshiro256

FAMILIES = ("zero", "log-poly", "root", "linear", "piecewise-aux")
NORMS = ("sup", "sum", "euclid")
KINDS = ("radial-lattice", "pair-metric", "eps-pair-metric")

INVERSE_CAP = 2.0**60
SUBMULT_RTOL = 1e-12


def ppow(x, p):
    """``|x|**p`` computed as ``exp(p*log|x|)`` with an exact zero for ``x == 0``.

    Works elementwise on complex arrays; ``np.abs`` evaluates the modulus with
    ``hypot`` so no intermediate square overflows.
    """
    mag = np.abs(np.asarray(x))
    if p == 1:
        out = mag.astype(float)
        return out if out.ndim else float(out)
    out = np.zeros(mag.shape, dtype=float)
    nz = mag > 0
    out[nz] = np.exp(p * np.log(mag[nz]))
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class RadialProfile:
    """Concave radial function ``rho`` with ``rho(0) = 0``.

    ``params`` per family: ``log-poly (s,)`` gives ``s*log(1+t)``; ``root (a, b)``
    gives ``a*t**b``; ``linear (a,)`` gives ``a*t``; ``piecewise-aux
    (gamma, beta)`` together with ``base`` and ``level`` gives ``gamma*t`` up to
    ``beta`` and ``base(t) - level`` beyond.
    """

    family: str
    params: tuple = ()
    base: "RadialProfile | None" = None
    level: int = 0

    def __post_init__(self):
        fam, prm = self.family, tuple(float(v) for v in self.params)
        object.__setattr__(self, "params", prm)
        if fam not in FAMILIES:
            raise UsageError(f"unknown profile family {fam!r}; expected one of {FAMILIES}")
        expected = {"zero": 0, "log-poly": 1, "root": 2, "linear": 1, "piecewise-aux": 2}[fam]
        if len(prm) != expected:
            raise UsageError(f"{fam} profile takes {expected} parameters, got {len(prm)}")
        if fam == "log-poly" and not prm[0] > 0:
            raise UsageError("log-poly profile needs s > 0")
        if fam == "root" and not (prm[0] > 0 and 0 < prm[1] < 1):
            raise UsageError("root profile needs a > 0 and 0 < b < 1")
        if fam == "linear" and not prm[0] > 0:
            raise UsageError("linear profile needs a > 0")
        if fam == "piecewise-aux":
            gamma, beta = prm
            if not (gamma > 0 and beta > 0) or self.base is None or self.level < 1:
                raise UsageError("piecewise-aux profile needs gamma > 0, beta > 0, a base profile and level >= 1")
            left, right = gamma * beta, float(self.base(beta)) - self.level
            if abs(left - right) > 1e-9 * max(abs(left), abs(right), 1e-300):
                raise ConstructionError(f"piecewise-aux branches disagree at beta: {left} vs {right}")

    @classmethod
    def zero(cls):
        return cls("zero")

    @classmethod
    def log_poly(cls, s):
        return cls("log-poly", (s,))

    @classmethod
    def root(cls, a, b):
        return cls("root", (a, b))

    @classmethod
    def linear(cls, a):
        return cls("linear", (a,))

    @classmethod
    def piecewise_aux(cls, gamma, beta, base, level):
        return cls("piecewise-aux", (gamma, beta), base=base, level=int(level))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        fam = self.family
        if fam == "zero":
            out = np.zeros_like(t)
        elif fam == "log-poly":
            out = self.params[0] * np.log1p(t)
        elif fam == "root":
            a, b = self.params
            out = a * np.power(t, b)
        elif fam == "linear":
            out = self.params[0] * t
        else:
            gamma, beta = self.params
            out = np.where(t <= beta, gamma * t, self.base(t) - self.level)
        return out if out.ndim else float(out)

    def inverse(self, level):
        """Smallest ``t`` with ``rho(t) = level``, by bisection on [0, 2**60].

        Raises ConstructionError when ``rho`` stays below ``level`` on the
        whole search interval (a bounded profile).
        """
        level = float(level)
        if level <= 0:
            return 0.0
        if self(INVERSE_CAP) < level:
            raise ConstructionError(
                f"{self.family} profile is bounded below {level} on [0, 2^60]; no inverse"
            )
        lo, hi = 0.0, INVERSE_CAP
        for _ in range(2000):
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            if self(mid) < level:
                lo = mid
            else:
                hi = mid
        return hi

    def to_spec(self):
        names = {"log-poly": ("s",), "root": ("a", "b"), "linear": ("a",), "zero": ()}
        if self.family not in names:
            raise UsageError("piecewise-aux profiles have no external spec form")
        return {"family": self.family, "params": dict(zip(names[self.family], self.params))}


def vector_norm(x, norm="sup"):
    """Norm of the last axis of an integer or float array."""
    x = np.asarray(x, dtype=float)
    if norm == "sup":
        return np.max(np.abs(x), axis=-1) if x.shape[-1] else np.zeros(x.shape[:-1])
    if norm == "sum":
        return np.sum(np.abs(x), axis=-1)
    if norm == "euclid":
        return np.sqrt(np.sum(x * x, axis=-1))
    raise UsageError(f"unknown norm {norm!r}; expected one of {NORMS}")


@dataclass(frozen=True)
class Weight:
    """A weight on ``Z^dim`` (radial-lattice) or on point pairs of a metric space."""

    kind: str
    profile: RadialProfile | None = None
    norm: str = "sup"
    dim: int = 1
    delta: float = 1.0
    eps: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise UsageError(f"unknown weight kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "radial-lattice":
            if self.profile is None:
                raise UsageError("radial-lattice weight needs a profile")
            if self.norm not in NORMS:
                raise UsageError(f"unknown norm {self.norm!r}; expected one of {NORMS}")
            if int(self.dim) != self.dim or self.dim < 1:
                raise UsageError("lattice dimension must be a positive integer")
        else:
            if not 0 < self.delta <= 1:
                raise UsageError("delta must lie in (0, 1]")
            if not 0 < self.eps <= 1:
                raise UsageError("eps must lie in (0, 1]")
            if self.kind == "pair-metric" and self.eps != 1.0:
                raise UsageError("pair-metric weight has eps = 1; use eps_weight")

    @property
    def is_radial(self):
        return self.kind == "radial-lattice"

    def log_lattice(self, x):
        """``rho(|x|)`` for lattice points stacked on the last axis."""
        if not self.is_radial:
            raise UsageError(f"{self.kind} weight is evaluated on distances, not lattice points")
        x = np.asarray(x)
        if x.ndim == 0 or x.shape[-1] != self.dim:
            raise UsageError(f"lattice point of dimension {x.shape[-1] if x.ndim else 0} for a weight on Z^{self.dim}")
        return self.profile(vector_norm(x, self.norm))

    def lattice(self, x):
        return np.exp(self.log_lattice(x))

    def log_pair(self, dist):
        """``delta*log(1 + eps*d)`` for an array of distances."""
        if self.is_radial:
            raise UsageError("radial-lattice weight is evaluated on lattice points")
        dist = np.asarray(dist, dtype=float)
        if np.any(dist < 0):
            raise UsageError("distances must be nonnegative")
        return self.delta * np.log1p(self.eps * dist)

    def pair(self, dist):
        return np.power(1.0 + self.eps * np.asarray(dist, dtype=float), self.delta)

    def label(self):
        if self.kind == "radial-lattice":
            prm = ",".join(f"{v:g}" for v in self.profile.params)
            return f"{self.profile.family}({prm})/{self.norm}"
        if self.kind == "pair-metric":
            return f"pair(delta={self.delta:g})"
        return f"pair(delta={self.delta:g},eps={self.eps:g})"


def radial_weight(profile, norm="sup", dim=1):
    return Weight("radial-lattice", profile=profile, norm=norm, dim=int(dim))


def pair_weight(delta):
    """The kernel weight ``(1 + d(x, y))**delta``."""
    return Weight("pair-metric", delta=float(delta))


def eps_weight(delta, eps):
    """The deformed kernel weight ``(1 + eps*d(x, y))**delta``."""
    return Weight("eps-pair-metric", delta=float(delta), eps=float(eps))


def eval_weight(w, arg):
    """Evaluate ``w`` at a lattice point (radial kinds) or at a distance ``d(x, y)`` (pair kinds)."""
    if w.is_radial:
        return float(w.lattice(np.asarray(arg)))
    d = float(arg)
    return float(w.pair(d))


# ---------------------------------------------------------------------------
# audits

@dataclass(frozen=True)
class AuditGrid:
    """Sampling plan for the admissibility and growth audits."""

    t_max: float = 2.0**20
    n_linear: int = 257
    n_log: int = 400
    n_samples: int = 10_000
    coord_max: int = 1 << 20
    seed: int = 0

    def radii(self):
        lin = np.linspace(0.0, 64.0, self.n_linear)
        geo = np.geomspace(1.0, self.t_max, self.n_log)
        return np.unique(np.concatenate([lin, geo, [self.t_max]]))


@dataclass(frozen=True)
class AdmissibilityAudit:
    concave_ok: bool
    grs_ok: bool
    submult_ok: bool
    even_ok: bool
    grs_ratios: tuple = field(default=(), repr=False)

    @property
    def admissible(self):
        return self.concave_ok and self.grs_ok and self.submult_ok and self.even_ok


def _profile_shape_ok(profile, grid):
    t = grid.radii()
    r = profile(t)
    if profile(0.0) != 0.0:
        return False
    scale = 1e-12 * (1.0 + np.abs(r))
    if np.any(np.diff(r) < -scale[1:]):
        return False
    mid = profile(0.5 * (t[:, None] + t[None, :]))
    chord = 0.5 * (r[:, None] + r[None, :])
    tol = 1e-12 * (1.0 + np.abs(chord))
    return bool(np.all(mid >= chord - tol))


def grs_ratios(profile):
    """``rho(alpha)/alpha`` at ``alpha = 2**j``, ``j = 10..40``."""
    alpha = 2.0 ** np.arange(10, 41)
    return profile(alpha) / alpha


def _lattice_samples(w, n, coord_max, seed):
    rng = Xoshiro256(seed)
    pts = rng.integers(-coord_max, coord_max, 2 * n * w.dim)
    return pts[: n * w.dim].reshape(n, w.dim), pts[n * w.dim:].reshape(n, w.dim)


def check_admissible(w, grid=None):
    """Numeric admissibility audit of a radial-lattice weight.

    ``grs_ok`` requires ``rho(2**j)/2**j`` to be nonincreasing over
    ``j = 10..40`` and below ``1e-3`` at ``j = 40``; the GRS limit itself
    cannot be certified on a finite grid.  Submultiplicativity and evenness
    are checked on seeded random lattice points (in log scale, so huge
    radii do not overflow).
    """
    if not isinstance(w, Weight) or not w.is_radial:
        raise UsageError("check_admissible needs a radial-lattice weight")
    grid = grid or AuditGrid()
    concave_ok = _profile_shape_ok(w.profile, grid)

    ratios = grs_ratios(w.profile)
    monotone = bool(np.all(ratios[1:] <= ratios[:-1] * (1 + 1e-12) + 1e-300))
    grs_ok = monotone and bool(ratios[-1] < 1e-3)

    x, y = _lattice_samples(w, grid.n_samples, grid.coord_max, grid.seed)
    lx, ly, lxy = w.log_lattice(x), w.log_lattice(y), w.log_lattice(x + y)
    submult_ok = bool(np.all(lxy <= lx + ly + math.log1p(SUBMULT_RTOL)))
    even_ok = bool(np.all(w.log_lattice(-x) == lx)) and float(w.log_lattice(np.zeros(w.dim, dtype=int))) == 0.0
    return AdmissibilityAudit(concave_ok, grs_ok, submult_ok, even_ok, tuple(float(v) for v in ratios))


@dataclass(frozen=True)
class WeakGrowth:
    ok: bool
    C_min: float
    last_decade_decrease: float


def check_weak_growth(w, delta, grid=None):
    """Audit ``w(x) >= C (1 + |x|)**delta`` along the radii of the grid.

    For a radial weight the ratio only depends on ``|x|``, so it is scanned
    on integer radii up to 1024 and log-spaced radii up to ``grid.t_max``.
    """
    if not isinstance(w, Weight) or not w.is_radial:
        raise UsageError("check_weak_growth needs a radial-lattice weight")
    if not 0 < delta <= 1:
        raise UsageError("delta must lie in (0, 1]")
    grid = grid or AuditGrid()
    if grid.t_max < 2.0**20:
        raise UsageError("weak growth grid must reach |x| = 2^20")
    t = np.unique(np.concatenate([np.arange(0, 1025), np.round(np.geomspace(1024, grid.t_max, 1000))]))
    log_ratio = w.profile(t) - delta * np.log1p(t)
    c_min = float(np.exp(np.min(log_ratio)))
    t_end = t[-1]
    start = log_ratio[np.searchsorted(t, t_end / 10.0)]
    decrease = float(1.0 - math.exp(min(0.0, log_ratio[-1] - start)))
    ok = c_min >= 1e-9 and decrease < 0.1
    return WeakGrowth(ok, c_min, decrease)


# ---------------------------------------------------------------------------
# auxiliary weights

@dataclass(frozen=True)
class AuxWeightStep:
    """One auxiliary weight ``w_n`` with ``w_n <= w <= c_n * w_n``."""

    level: int
    gamma: float
    beta: float
    c: float
    weight: Weight


def _golden_max(f, lo, hi, rtol=1e-10):
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(500):
        if b - a <= rtol * b:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def _unimodal(values):
    peak = int(np.argmax(values))
    tol = 1e-13 * max(1.0, float(np.max(np.abs(values))))
    rising = np.all(np.diff(values[: peak + 1]) >= -tol)
    falling = np.all(np.diff(values[peak:]) <= tol)
    return bool(rising and falling)


def aux_weight(base, n, norm="sup", dim=1):
    """Auxiliary weight of level ``n`` built from an unbounded admissible profile.

    ``gamma_n = sup_{mu >= rho^-1(n)} (rho(mu) - n)/mu`` is located by a
    golden-section search: the objective is the slope of the chord from
    ``(0, n)`` to the concave graph, hence unimodal.  The bracket's right
    end is doubled until the objective decreases.
    """
    if not isinstance(base, RadialProfile):
        raise UsageError("aux_weight needs a RadialProfile")
    n = int(n)
    if n < 1:
        raise UsageError("level n must be a positive integer")
    if base.family == "linear":
        raise UsageError("linear profiles violate the GRS condition; no auxiliary weights")
    lo = base.inverse(n)

    def slope(mu):
        return (float(base(mu)) - n) / mu

    hi = 2.0 * lo
    while slope(2.0 * hi) > slope(hi):
        hi *= 2.0
        if hi > INVERSE_CAP:
            raise ConstructionError("chord slope keeps increasing up to 2^60; profile not admissible")
    hi *= 2.0

    probe = np.linspace(lo, hi, 129)
    if _unimodal(np.array([slope(m) for m in probe])):
        beta = _golden_max(slope, lo, hi)
    else:
        mus = np.geomspace(lo, hi, 2**14)
        beta = float(mus[int(np.argmax([slope(m) for m in mus]))])
    beta = max(beta, lo)
    gamma = slope(beta)
    if not gamma > 0:
        raise ConstructionError(f"non-positive gamma_{n} = {gamma}")
    profile = RadialProfile.piecewise_aux(gamma, beta, base, n)
    return AuxWeightStep(level=n, gamma=gamma, beta=beta, c=math.exp(n),
                         weight=radial_weight(profile, norm=norm, dim=dim))


def weight_from_spec(spec):
    """Build a Weight from its external dict form.

    ``{"family": "log-poly"|"root"|"linear"|"zero", "params": {...},
    "norm": "sup"|"sum"|"euclid", "dim": m}``; additionally
    ``{"family": "pair-metric", "params": {"delta": d}}`` and
    ``{"family": "eps-pair-metric", "params": {"delta": d, "eps": e}}``.
    """
    if not isinstance(spec, dict):
        raise UsageError("weight spec must be a JSON object")
    unknown = set(spec) - {"family", "params", "norm", "dim"}
    if unknown:
        raise UsageError(f"unknown weight spec keys {sorted(unknown)}")
    fam = spec.get("family")
    params = spec.get("params", {}) or {}
    if not isinstance(params, dict):
        raise UsageError("weight params must be an object")
    names = {
        "zero": (), "log-poly": ("s",), "root": ("a", "b"), "linear": ("a",),
        "pair-metric": ("delta",), "eps-pair-metric": ("delta", "eps"),
    }
    if fam not in names:
        raise UsageError(f"unknown weight family {fam!r}; expected one of {sorted(names)}")
    if set(params) != set(names[fam]):
        raise UsageError(f"{fam} weight params must be exactly {list(names[fam])}, got {sorted(params)}")
    for key, val in params.items():
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            raise UsageError(f"weight param {key!r} must be a number")
    if fam == "pair-metric":
        return pair_weight(params["delta"])
    if fam == "eps-pair-metric":
        return eps_weight(params["delta"], params["eps"])
    dim = spec.get("dim", 1)
    if isinstance(dim, bool) or not isinstance(dim, int):
        raise UsageError("weight dim must be an integer")
    profile = RadialProfile(fam, tuple(params[k] for k in names[fam]))
    return radial_weight(profile, norm=spec.get("norm", "sup"), dim=dim)


def weight_to_spec(w):
    if w.kind == "pair-metric":
        return {"family": "pair-metric", "params": {"delta": w.delta}}
    if w.kind == "eps-pair-metric":
        return {"family": "eps-pair-metric", "params": {"delta": w.delta, "eps": w.eps}}
    spec = w.profile.to_spec()
    spec.update(norm=w.norm, dim=w.dim)
    return spec
