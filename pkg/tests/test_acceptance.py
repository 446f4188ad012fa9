"""Acceptance suite: finite-section analogs of the spectral identities, with stated tolerances."""

import math
import pathlib
import time

import numpy as np
import pytest

from beurling.algebra import (
    Envelope, FiniteMetricSpace, involution, random_decaying_kernel, schur_pnorm,
)
from beurling.config import override, parse_config
from beurling.experiments import run_experiment
from beurling.results import write_results
from beurling.rng import Xoshiro256, mix
from beurling.spectral import barnes_bound
from beurling.twisted import (
    lq_norm, materialize_twisted_operator, max_abs_diff, random_sequence, twisted_involution, weighted_lp_norm,
)
from beurling.weights import RadialProfile, aux_weight, eps_weight, pair_weight, radial_weight

from conftest import GOLDEN

CONFIGS = pathlib.Path(__file__).resolve().parent.parent / "demos" / "configs"
LAMBDA = 2 - math.sqrt(3)
TOP64 = 4 + 2 * math.cos(math.pi / 65)


def load(name):
    return parse_config((CONFIGS / f"{name}.json").read_text(encoding="utf-8"))


_TABLES = {}


def table(name):
    """Serial run of a demo config, shared between criteria; returns (table, seconds)."""
    if name not in _TABLES:
        start = time.perf_counter()
        tab = run_experiment(load(name))
        _TABLES[name] = (tab, time.perf_counter() - start)
    return _TABLES[name]


def group(records, *keys):
    out = {}
    for r in records:
        out.setdefault(tuple(r[k] for k in keys), []).append(r)
    return out


def test_criterion_01_norm_roots_reach_operator_norm(criterion):
    tab, secs = table("barnes")
    recs = tab.records()
    worst_gap, ok = 0.0, True
    cases = group(recs, "p", "weight")
    for (p, _), rows in cases.items():
        rows.sort(key=lambda r: r["j"])
        s = [r["s_j"] for r in rows]
        ref = TOP64**p
        ok &= all(r["error"] is None for r in rows)
        ok &= abs(rows[0]["eig_oracle"] - ref) <= 1e-12 * ref
        ok &= all(b <= a for a, b in zip(s, s[1:]))
        ok &= all(v >= ref - 1e-9 for v in s)
        gap = abs(s[8] - ref) / ref
        worst_gap = max(worst_gap, gap)
        ok &= gap <= 0.05
    ok &= len(cases) == 6 and secs <= 60
    criterion(1, ok, f"6 (p, weight) cases, worst |s_8 - op^p|/op^p = {worst_gap:.4f} <= 0.05, {secs:.1f}s <= 60s")


def test_criterion_02_inverse_closedness(criterion):
    tab, _ = table("inverse-closed")
    recs = {r["size"]: r for r in tab.records()}
    rate = recs[128]["decay_rate"]
    rate_err = abs(rate / math.log(LAMBDA) - 1)
    change = abs(recs[128]["inv_norm"] / recs[64]["inv_norm"] - 1)
    ok = sorted(recs) == [16, 32, 64, 128] and rate_err <= 0.03 and change < 0.02
    criterion(2, ok, f"decay rate at N=128 off by {rate_err:.2e} (<= 3%), "
                     f"||A^-1|| change 64->128 = {change:.2e} (< 2%)")


def test_criterion_03_auxiliary_weights(criterion):
    base = RadialProfile.root(1.0, 0.5)
    s1, s2 = aux_weight(base, 1), aux_weight(base, 2)
    rel = max(abs(s1.gamma / 0.25 - 1), abs(s1.beta / 4 - 1), abs(s2.gamma / 0.125 - 1), abs(s2.beta / 16 - 1))
    ok = rel <= 1e-6

    # pointwise chain on 10^4 sampled points of Z^2, exact comparisons
    w = radial_weight(base, dim=2)
    pts = Xoshiro256(mix(3, 0)).integers(-(1 << 20), 1 << 20, 2 * 10**4).reshape(-1, 2)
    lw = w.log_lattice(pts)
    logs = [aux_weight(base, n, dim=2).weight.log_lattice(pts) for n in range(1, 22)]
    chain = all(
        np.all(logs[n] <= logs[n - 1]) and np.all(logs[n - 1] <= lw) and np.all(lw <= n + logs[n - 1])
        for n in range(1, 21)
    )
    ok &= chain

    tab, _ = table("aux-weights")
    monotone, final = True, 0.0
    for p, rows in group(tab.records(), "p").items():
        rows.sort(key=lambda r: r["level"])
        norms = [r["norm_aux"] for r in rows]
        monotone &= all(b <= a for a, b in zip(norms, norms[1:]))
        monotone &= all(r["pointwise_ok"] for r in rows)
        final = max(final, rows[-1]["rel_excess"])
    ok &= monotone and final <= 0.01
    criterion(3, ok, f"gamma/beta rel err {rel:.1e} (<= 1e-6), pointwise chain n<=20 {chain}, "
                     f"norms nonincreasing {monotone}, excess at n=20 {final:.4f} (<= 1%)")


def test_criterion_04_eps_limit(criterion):
    tab, _ = table("eps-limit")
    cases = group(tab.records(), "matrix", "p")
    worst, monotone = 0.0, True
    for rows in cases.values():
        rows.sort(key=lambda r: r["j"])
        vals = [r["norm_eps"] for r in rows]
        monotone &= all(b <= a for a, b in zip(vals, vals[1:]))
        assert rows[-1]["eps"] == 2.0**-20
        worst = max(worst, abs(rows[-1]["rel_diff"]))
    n_kernels = len({m for m, _ in cases})
    ok = n_kernels == 20 and monotone and worst <= 1e-4
    criterion(4, ok, f"{n_kernels} kernels, bandwidth 4, monotone in eps {monotone}, "
                     f"worst rel diff at eps=2^-20 {worst:.2e} (<= 1e-4)")


def test_criterion_05_twisted_algebra_laws(criterion):
    start = time.perf_counter()
    w = radial_weight(RadialProfile.log_poly(0.5), dim=2)
    worst = {"assoc": 0.0, "anti": 0.0, "invol": 0.0, "young": -math.inf, "submult": -math.inf}
    thetas = [0.0, 0.25, GOLDEN]
    for i in range(200):
        seed = mix(5, i)
        g = Xoshiro256(seed)
        theta = thetas[i % 3]
        radii = g.integers(0, 3, 3)
        a, b, c = (random_sequence(1, theta, int(r), mix(seed, k)) for k, r in enumerate(radii))
        worst["assoc"] = max(worst["assoc"], max_abs_diff((a @ b) @ c, a @ (b @ c)))
        worst["anti"] = max(worst["anti"], max_abs_diff(
            twisted_involution(a @ b), twisted_involution(b) @ twisted_involution(a)))
        worst["invol"] = max(worst["invol"], max_abs_diff(twisted_involution(twisted_involution(a)), a))
        ab = a @ b
        for p in (0.5, 1.0):
            for q in (1, 2):
                worst["young"] = max(worst["young"], lq_norm(ab, q) - weighted_lp_norm(a, p) ** (1 / p) * lq_norm(b, q))
            worst["submult"] = max(worst["submult"],
                                   weighted_lp_norm(ab, p, w) - weighted_lp_norm(a, p, w) * weighted_lp_norm(b, p, w))
    secs = time.perf_counter() - start
    ok = (worst["assoc"] <= 1e-9 and worst["anti"] <= 1e-10 and worst["invol"] <= 1e-15
          and worst["young"] <= 1e-9 and worst["submult"] <= 1e-9 and secs <= 30)
    criterion(5, ok, "200 triples: assoc {assoc:.1e}, anti-hom {anti:.1e}, a**=a {invol:.1e}, "
                     "Young excess {young:.1e}, submult excess {submult:.1e}, ".format(**worst) + f"{secs:.1f}s <= 30s")


def test_criterion_06_twisted_wiener(criterion):
    tab, _ = table("wiener-twisted")
    recs = {r["op_radius"]: r for r in tab.records()}
    r32, r24 = recs[32], recs[24]
    change = abs(r32["norm_b"] / r24["norm_b"] - 1)
    ok = (r32["error"] is None and r32["residual"] <= 1e-8 and r32["oracle_deviation"] <= 1e-6
          and change < 0.02)
    criterion(6, ok, f"op_radius 32: residual {r32['residual']:.1e} (<= 1e-8), Neumann deviation "
                     f"{r32['oracle_deviation']:.1e} (<= 1e-6); ||b|| change 24->32 {change:.1e} (< 2%)")


def test_criterion_07_matrix_realization(criterion):
    weights = [(0.5, radial_weight(RadialProfile.log_poly(0.5), dim=2)),
               (1.0, radial_weight(RadialProfile.root(1.0, 0.5), dim=2))]
    worst = 0.0
    R = 8
    for i in range(50):
        seed = mix(7, i)
        radius = int(Xoshiro256(seed).integers(0, 2, 1)[0])
        theta = [0.0, 0.25, GOLDEN][i % 3]
        a = random_sequence(1, theta, radius, mix(seed, 1))
        K = materialize_twisted_operator(a, R)
        mag = np.abs(K.entries)
        inner = np.nonzero(np.all(np.abs(K.space.points) <= R - radius, axis=1))[0]
        for p, w in weights:
            logw = w.profile(K.space.offset_norms(w.norm))
            rows = mag[inner]
            terms = np.zeros(rows.shape)
            nz = rows > 0
            terms[nz] = np.exp(p * (np.log(rows[nz]) + logw[inner][nz]))
            worst = max(worst, float(np.max(np.abs(terms.sum(axis=1) - weighted_lp_norm(a, p, w)))))
    criterion(7, worst <= 1e-12, f"50 sequences, op_radius 8: max |interior row sum - ||a||| = {worst:.1e} (<= 1e-12)")


def test_criterion_08_pnorm_axioms(criterion):
    start = time.perf_counter()
    spaces = [
        FiniteMetricSpace.segment(12),
        FiniteMetricSpace.lattice_window(2, 2),
        FiniteMetricSpace.point_cloud(Xoshiro256(1).random_array(40).reshape(20, 2) * 4),
    ]
    envs = [Envelope("exponential", 0.5), Envelope("polynomial", 2.0)]
    fails = []
    for i in range(500):
        seed = mix(8, i)
        space = spaces[i % 3]
        env = envs[(i // 3) % 2]
        K = random_decaying_kernel(space, env, mix(seed, 0))
        J = random_decaying_kernel(space, env, mix(seed, 1))
        alpha = complex(*Xoshiro256(mix(seed, 2)).uniform(-3, 3, 2))
        ws = [None, pair_weight(0.5), eps_weight(1.0, 0.25)]
        if space.is_lattice:
            ws.append(radial_weight(RadialProfile.root(1.0, 0.5), dim=space.d))
        for p in (0.25, 0.5, 1.0):
            for w in ws:
                nK, nJ = schur_pnorm(K, p, w), schur_pnorm(J, p, w)
                checks = (
                    nK > 0 and schur_pnorm(0 * K, p, w) == 0,
                    schur_pnorm(K + J, p, w) <= nK + nJ + 1e-10,
                    abs(schur_pnorm(alpha * K, p, w) - abs(alpha) ** p * nK) <= 1e-12 * abs(alpha) ** p * nK,
                    schur_pnorm(K @ J, p, w) <= nK * nJ + 1e-10,
                    schur_pnorm(involution(K), p, w) == nK,
                )
                if not all(checks):
                    fails.append((i, p, checks))
    secs = time.perf_counter() - start
    criterion(8, not fails and secs <= 20,
              f"500 kernel pairs x p in {{1/4,1/2,1}} x 3-4 weights: {len(fails)} failures, {secs:.1f}s <= 20s")


def test_criterion_09_barnes_bound(criterion):
    v1, v2 = barnes_bound(1, 1, 1), barnes_bound(0.5, 1, 1)
    ok = abs(v1 - 2 * math.sqrt(2)) <= 1e-9 and abs(v2 - 2**0.75 / (1 - 2**-0.5)) <= 1e-9 and abs(v2 - 5.7423) < 5e-4
    worst = -math.inf
    n = 0
    for name in ("barnes", "barnes-random", "barnes-plane"):
        for r in table(name)[0].records():
            ok &= r["error"] is None
            worst = max(worst, r["rp_estimate"] - r["barnes_rhs"])
            n += 1
    ok &= worst <= 1e-6
    criterion(9, ok, f"bound(1,1,1) = {v1:.9f}, bound(1/2,1,1) = {v2:.9f}; "
                     f"r_p - r_1^p*bound <= {worst:.3f} over {n} rows (<= 1e-6)")


@pytest.mark.slow
def test_criterion_10_determinism(criterion, tmp_path):
    names = sorted(p.stem for p in CONFIGS.glob("*.json"))
    same = []
    for name in names:
        cfg = load(name)
        first = table(name)[0]
        paths = []
        for tag, workers in (("serial", 1), ("parallel", 8)):
            out = tmp_path / f"{name}-{tag}"
            tab = run_experiment(override(cfg, output=str(out)), workers=workers)
            paths.append(write_results(tab, out)[0])
        ref = first.to_csv().encode("utf-8")
        same.append(all(open(p, "rb").read() == ref for p in paths))
    criterion(10, all(same) and len(names) >= 6,
              f"{sum(same)}/{len(names)} experiment configs byte-identical at 1 and 8 workers")
