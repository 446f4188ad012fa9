"""Experiment drivers.

Every experiment is split into independent cells.  A cell rebuilds the
objects it needs from the (picklable) config, so cells can run in worker
processes; rows are assembled in cell order, which makes the output
independent of the number of workers.  Random instance ``i`` is drawn from
the stream seeded with ``mix(seed, i)``.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .algebra import (
    Envelope, FiniteMetricSpace, Kernel, random_decaying_kernel, schur_pnorm, toeplitz_from_symbol,
)
from .errors import BeurlingError, UsageError
from .results import ResultTable
from .rng import Xoshiro256, mix
from .spectral import barnes_bound, decay_profile, invert, norm_root_sequence, spectral_radius_algebra
from .twisted import (
    TwistedSequence, inner_residual, max_abs_diff, neumann_inverse, twisted_inverse, weighted_lp_norm,
)
from .weights import (
    AuditGrid, aux_weight, check_admissible, check_weak_growth, eps_weight, weight_from_spec,
)


def library_version():
    from . import __version__

    return __version__


# ---------------------------------------------------------------------------
# instances

def _offset_key(key):
    parts = tuple(int(c) for c in key.split(","))
    return parts[0] if len(parts) == 1 else parts


def matrix_instances(spec, seed):
    """``[(label, builder)]`` for a MatrixSpec; builders are cheap zero-arg calls."""
    g = spec.generator
    if g == "toeplitz":
        coeffs = {_offset_key(k): complex(*v) for k, v in spec.coeffs}
        return [
            (f"toeplitz-{n}", lambda n=n: toeplitz_from_symbol(
                coeffs, FiniteMetricSpace.lattice_box(spec.d, 0, n - 1, spec.norm)))
            for n in spec.sizes
        ]
    if g == "diag":
        vals = [complex(*v) for v in spec.values]
        return [(f"diag-{len(vals)}", lambda: Kernel(FiniteMetricSpace.segment(len(vals)), np.diag(vals)))]
    if g == "dense":
        rows = [[complex(*v) for v in r] for r in spec.entries]
        return [(f"dense-{len(rows)}", lambda: Kernel(FiniteMetricSpace.segment(len(rows)), np.array(rows)))]
    env = Envelope(*spec.envelope)
    out = []
    shapes = [None] if spec.cloud_points is not None else list(spec.sizes)
    i = 0
    for n in shapes:
        for _ in range(spec.count):
            s = mix(seed, i)
            out.append((f"random-{i}", lambda n=n, s=s: random_decaying_kernel(
                _random_space(spec, n, s), env, s, spec.hermitian, spec.bandwidth)))
            i += 1
    return out


def _random_space(spec, n, seed):
    if spec.cloud_points is None:
        return FiniteMetricSpace.lattice_box(spec.d, 0, n - 1, spec.norm)
    side = spec.cloud_points ** (1.0 / spec.cloud_dim)
    coords = Xoshiro256(mix(seed, 0)).random_array(spec.cloud_points * spec.cloud_dim)
    return FiniteMetricSpace.point_cloud(side * coords.reshape(spec.cloud_points, spec.cloud_dim))


def _space_dimension(spec):
    if spec.generator == "random-decaying" and spec.cloud_points is not None:
        return spec.cloud_dim
    return spec.d


def tridiagonal_ratio(spec):
    """Closed-form entry ratio of the inverse of a symmetric tridiagonal Toeplitz section.

    For ``a`` on the diagonal and ``c`` next to it (``a > 2|c| > 0``), the
    inverse entries decay like ``lambda**|i-j|`` with
    ``lambda = (a - sqrt(a^2 - 4c^2)) / (2|c|)``.  Returns None for other matrices.
    """
    if spec.generator != "toeplitz" or spec.d != 1:
        return None
    coeffs = {int(k): complex(*v) for k, v in spec.coeffs}
    if set(coeffs) != {-1, 0, 1} or coeffs[1] != coeffs[-1].conjugate():
        return None
    a, c = coeffs[0], abs(coeffs[1])
    if a.imag != 0 or not a.real > 2 * c > 0:
        return None
    a = a.real
    return (a - math.sqrt(a * a - 4 * c * c)) / (2 * c)


def _sequence(spec):
    terms = {idx: complex(*val) for idx, val in spec.terms}
    return TwistedSequence.from_dict(spec.d, spec.theta, terms)


# ---------------------------------------------------------------------------
# experiments: columns, cell lists and cell evaluators

COLUMNS = {
    "barnes": ("matrix", "size", "p", "weight", "delta", "b", "j", "n_j", "s_j", "op_norm_p",
               "eig_oracle", "rel_gap", "rp_estimate", "r1_estimate", "barnes_rhs", "error"),
    "inverse-closed": ("matrix", "size", "p", "weight", "inv_norm", "decay_rate", "decay_ratio",
                       "oracle_ratio", "fit_residual", "error"),
    "aux-weights": ("level", "gamma", "beta", "c", "p", "norm_aux", "norm_base", "norm_p",
                    "rel_excess", "pointwise_ok", "error"),
    "wiener-twisted": ("op_radius", "p", "weight", "residual", "norm_b", "oracle_deviation", "error"),
    "weights-audit": ("weight", "concave_ok", "grs_ok", "submult_ok", "even_ok", "admissible",
                      "weak_growth_ok", "C_min", "error"),
    "eps-limit": ("matrix", "p", "j", "eps", "norm_eps", "norm_p", "rel_diff", "error"),
}


def cells_for(cfg):
    """The cell descriptors of an experiment, in output order."""
    exp = cfg.experiment
    if exp == "barnes":
        n = len(matrix_instances(cfg.matrix, cfg.seed))
        return [(i, p, w) for i in range(n) for p in range(len(cfg.p_list)) for w in range(len(cfg.weights))]
    if exp in ("inverse-closed",):
        return [(i,) for i in range(len(matrix_instances(cfg.matrix, cfg.seed)))]
    if exp == "eps-limit":
        n = len(matrix_instances(cfg.matrix, cfg.seed))
        return [(i, p) for i in range(n) for p in range(len(cfg.p_list))]
    if exp == "aux-weights":
        return [(n,) for n in cfg.levels]
    if exp == "wiener-twisted":
        return [(r,) for r in cfg.op_radii]
    if exp == "weights-audit":
        return [(i,) for i in range(len(cfg.weights))]
    raise UsageError(f"unknown experiment {exp!r}")


def _cell_barnes(cfg, cell):
    i, pi, wi = cell
    label, build = matrix_instances(cfg.matrix, cfg.seed)[i]
    p = cfg.p_list[pi]
    spec = cfg.weights[wi]
    base = {"matrix": label, "p": p, "weight": _weight_name(spec), "delta": cfg.delta}
    K = build()
    base["size"] = K.size
    b = cfg.b if cfg.b is not None else float(_space_dimension(cfg.matrix))
    base["b"] = b
    w = _weight_for(spec, K)
    rep = spectral_radius_algebra(K, p, w, cfg.j_max)
    rp = norm_root_sequence(K, p, None, cfg.j_max).r_alg_estimate
    r1 = norm_root_sequence(K, 1.0, None, cfg.j_max).r_alg_estimate
    rhs = r1**p * barnes_bound(p, cfg.delta, b)
    ref = rep.eig_oracle if rep.eig_oracle is not None else rep.op_norm_p
    rows = []
    for j, (n_j, s_j) in enumerate(rep.norm_roots):
        gap = abs(s_j - ref) / ref if ref > 0 else (0.0 if s_j == 0 else None)
        rows.append(dict(base, j=j, n_j=n_j, s_j=s_j, op_norm_p=rep.op_norm_p, eig_oracle=rep.eig_oracle,
                         rel_gap=gap, rp_estimate=rp, r1_estimate=r1, barnes_rhs=rhs))
    return rows


def _middle_rows(space):
    if not space.is_lattice:
        return None
    pts = space.points
    q = space.side // 4
    keep = np.all((pts >= space.lo + q) & (pts <= space.hi - q), axis=1)
    return np.nonzero(keep)[0]


def _cell_inverse(cfg, cell):
    (i,) = cell
    label, build = matrix_instances(cfg.matrix, cfg.seed)[i]
    K = build()
    inv = invert(K)
    prof = decay_profile(inv, cfg.floor, rows=_middle_rows(K.space))
    fit = prof.fit
    common = {
        "matrix": label, "size": K.size,
        "decay_rate": None if fit is None else fit.rate,
        "decay_ratio": None if fit is None else fit.ratio,
        "oracle_ratio": tridiagonal_ratio(cfg.matrix),
        "fit_residual": None if fit is None else fit.residual,
    }
    rows = []
    for p in cfg.p_list:
        for spec in cfg.weights:
            row = dict(common, p=p, weight=_weight_name(spec))
            row["inv_norm"] = schur_pnorm(inv, p, _weight_for(spec, K))
            rows.append(row)
    return rows


def _cell_aux(cfg, cell):
    (n,) = cell
    base_w = weight_from_spec(cfg.weights[0])
    _, build = matrix_instances(cfg.matrix, cfg.seed)[0]
    A = build()
    if base_w.dim != A.space.d:
        base_w = weight_from_spec(dict(cfg.weights[0], dim=A.space.d))
    step = aux_weight(base_w.profile, n, base_w.norm, base_w.dim)
    nxt = aux_weight(base_w.profile, n + 1, base_w.norm, base_w.dim)
    pts = _sample_points(mix(cfg.seed, n), base_w.dim)
    lw = base_w.log_lattice(pts)
    ln_n = step.weight.log_lattice(pts)
    ln_next = nxt.weight.log_lattice(pts)
    pointwise = bool(np.all(ln_next <= ln_n) and np.all(ln_n <= lw) and np.all(lw <= n + ln_n))
    rows = []
    for p in cfg.p_list:
        na = schur_pnorm(A, p, step.weight)
        npl = schur_pnorm(A, p)
        rows.append({
            "level": n, "gamma": step.gamma, "beta": step.beta, "c": step.c, "p": p,
            "norm_aux": na, "norm_base": schur_pnorm(A, p, base_w), "norm_p": npl,
            "rel_excess": na / npl - 1.0 if npl > 0 else None, "pointwise_ok": pointwise,
        })
    return rows


def _sample_points(seed, dim, count=10_000, coord_max=1 << 20):
    """``count`` lattice points with coordinates uniform in ``[-coord_max, coord_max]``."""
    flat = Xoshiro256(seed).integers(-coord_max, coord_max, count * dim)
    return np.asarray(flat, dtype=np.int64).reshape(count, dim)


def _cell_wiener(cfg, cell):
    (R,) = cell
    a = _sequence(cfg.sequence)
    b = twisted_inverse(a, R, cfg.tol)
    res = inner_residual(a, b)
    dev = max_abs_diff(b, neumann_inverse(a, cfg.neumann_terms)) if cfg.neumann_terms else None
    rows = []
    for p in cfg.p_list:
        for spec in cfg.weights:
            w = weight_from_spec(spec)
            rows.append({"op_radius": R, "p": p, "weight": _weight_name(spec), "residual": res,
                         "norm_b": weighted_lp_norm(b, p, w), "oracle_deviation": dev})
    return rows


def _cell_audit(cfg, cell):
    (i,) = cell
    spec = cfg.weights[i]
    w = weight_from_spec(spec)
    grid = AuditGrid(seed=mix(cfg.seed, i))
    audit = check_admissible(w, grid)
    growth = check_weak_growth(w, cfg.delta, grid)
    return [{
        "weight": _weight_name(spec), "concave_ok": audit.concave_ok, "grs_ok": audit.grs_ok,
        "submult_ok": audit.submult_ok, "even_ok": audit.even_ok, "admissible": audit.admissible,
        "weak_growth_ok": growth.ok, "C_min": growth.C_min,
    }]


def _cell_eps(cfg, cell):
    i, pi = cell
    label, build = matrix_instances(cfg.matrix, cfg.seed)[i]
    K = build()
    p = cfg.p_list[pi]
    norm_p = schur_pnorm(K, p)
    rows = []
    for j in cfg.eps_exponents:
        eps = 2.0**-j
        ne = schur_pnorm(K, p, eps_weight(cfg.delta, eps))
        rows.append({"matrix": label, "p": p, "j": j, "eps": eps, "norm_eps": ne, "norm_p": norm_p,
                     "rel_diff": (ne - norm_p) / norm_p if norm_p > 0 else None})
    return rows


CELL_FUNCTIONS = {
    "barnes": _cell_barnes,
    "inverse-closed": _cell_inverse,
    "aux-weights": _cell_aux,
    "wiener-twisted": _cell_wiener,
    "weights-audit": _cell_audit,
    "eps-limit": _cell_eps,
}


def _weight_name(spec):
    return weight_from_spec(spec).label()


def _weight_for(spec, K):
    """The weight of ``spec`` adapted to the dimension of ``K``'s lattice."""
    w = weight_from_spec(spec)
    if w.is_radial and K.space.is_lattice and w.dim != K.space.d:
        w = weight_from_spec(dict(spec, dim=K.space.d))
    return w


def _identity(cfg, cell):
    """Columns that locate a failed cell in the table."""
    exp = cfg.experiment
    if exp == "barnes":
        i, pi, wi = cell
        return {"matrix": _label(cfg, i), "p": cfg.p_list[pi], "weight": _safe_name(cfg.weights[wi]),
                "delta": cfg.delta}
    if exp == "inverse-closed":
        return {"matrix": _label(cfg, cell[0])}
    if exp == "eps-limit":
        return {"matrix": _label(cfg, cell[0]), "p": cfg.p_list[cell[1]]}
    if exp == "aux-weights":
        return {"level": cell[0]}
    if exp == "wiener-twisted":
        return {"op_radius": cell[0]}
    return {"weight": _safe_name(cfg.weights[cell[0]])}


def _label(cfg, i):
    return matrix_instances(cfg.matrix, cfg.seed)[i][0]


def _safe_name(spec):
    try:
        return _weight_name(spec)
    except BeurlingError:
        return str(spec.get("family"))


def run_cell(cfg, cell):
    """Rows (tuples in column order) of one cell; failures become a single error row."""
    cols = COLUMNS[cfg.experiment]
    try:
        rows = CELL_FUNCTIONS[cfg.experiment](cfg, cell)
        rows = [dict(r, error=None) for r in rows]
    except (BeurlingError, ArithmeticError, np.linalg.LinAlgError) as exc:
        rows = [dict(_identity(cfg, cell), error=f"{type(exc).__name__}: {exc}")]
    return [tuple(r.get(c) for c in cols) for r in rows]


def _run_cell_packed(args):
    return run_cell(*args)


def run_experiment(cfg, workers=1):
    """Evaluate all cells (serially or in ``workers`` processes) and assemble the table."""
    if workers < 1:
        raise UsageError("workers must be at least 1")
    cells = cells_for(cfg)
    if workers == 1 or len(cells) <= 1:
        parts = [run_cell(cfg, c) for c in cells]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_cell_packed, [(cfg, c) for c in cells]))
    rows = [row for part in parts for row in part]
    provenance = {"config_sha256": cfg.digest(), "seed": cfg.seed, "library_version": library_version()}
    return ResultTable(cfg.experiment, COLUMNS[cfg.experiment], tuple(rows), provenance)
