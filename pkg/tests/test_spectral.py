import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from beurling.algebra import (
    Envelope, FiniteMetricSpace, Kernel, identity_kernel, random_decaying_kernel, schur_pnorm,
)
from beurling.errors import DomainError, SingularKernelError, UsageError
from beurling.rng import Xoshiro256
from beurling.spectral import (
    barnes_bound, barnes_m, decay_profile, hermitian_eigh, hermitian_spectrum, invert, norm_root_sequence,
    operator_norm_l2, power_function, solve, spectral_radius_algebra,
)
from beurling.weights import RadialProfile, pair_weight, radial_weight

from conftest import kernel, tridiagonal

SQRT_HALF = radial_weight(RadialProfile.log_poly(0.5))
ROOT = radial_weight(RadialProfile.root(1.0, 0.5))
LAMBDA = 2 - math.sqrt(3)


# --- norm roots ----------------------------------------------------------------

def test_nilpotent_roots_vanish():
    rep = norm_root_sequence(kernel([[0, 1], [0, 0]]), 1.0)
    assert rep.s[0] == 1.0
    assert all(s == 0.0 for s in rep.s[1:])


def test_diagonal_roots_constant():
    rep = norm_root_sequence(kernel([[2, 0], [0, 1]]), 1.0)
    assert rep.s == pytest.approx([2.0] * 9, rel=1e-14)


def test_jordan_block_roots_decrease_to_one():
    # ||J^n||_1 = n + 1, so s_j = (2^j + 1)^(1/2^j)
    rep = norm_root_sequence(kernel([[1, 1], [0, 1]]), 1.0, j_max=10)
    s = rep.s
    assert all(b < a for a, b in zip(s, s[1:]))
    assert s == pytest.approx([(2**j + 1) ** (2.0**-j) for j in range(11)], rel=1e-12)
    assert s[-1] - 1 < 0.01


def test_large_and_small_radii_do_not_overflow():
    for scale in (1e150, 1e-150):
        rep = norm_root_sequence(scale * tridiagonal(16), 0.5, j_max=12)
        assert all(math.isfinite(s) and s > 0 for s in rep.s)
        assert rep.s[-1] == pytest.approx(scale**0.5 * 6**0.5, rel=0.05)


@pytest.mark.parametrize("w", [None, SQRT_HALF, ROOT], ids=["one", "logpoly", "root"])
@pytest.mark.parametrize("p", [0.5, 1.0])
def test_roots_nonincreasing_and_above_spectral_radius(p, w):
    rep = spectral_radius_algebra(tridiagonal(32), p, w)
    assert all(b <= a * (1 + 1e-9) for a, b in zip(rep.s, rep.s[1:]))
    assert rep.r_alg_estimate >= rep.eig_oracle - 1e-9
    assert all(rep.op_norm_p <= s + 1e-9 for s in rep.s)


def test_invalid_p_and_jmax():
    with pytest.raises(UsageError):
        norm_root_sequence(tridiagonal(4), 1.5)
    with pytest.raises(UsageError):
        norm_root_sequence(tridiagonal(4), 0.5, j_max=13)


# --- operator norm and eigenvalues ------------------------------------------------

def test_operator_norm_examples():
    perm = kernel(np.eye(5)[[3, 0, 4, 1, 2]])
    assert operator_norm_l2(perm).op_norm == pytest.approx(1.0, rel=1e-10)
    assert operator_norm_l2(kernel([[3, 0], [0, -1]])).op_norm == pytest.approx(3.0, rel=1e-10)
    assert operator_norm_l2(kernel([[0, 2], [0, 0]])).op_norm == pytest.approx(2.0, rel=1e-10)


@given(seed=st.integers(0, 2**32), n=st.integers(2, 30))
@settings(max_examples=25)
def test_operator_norm_matches_svd(seed, n):
    K = random_decaying_kernel(FiniteMetricSpace.segment(n), Envelope("polynomial", 1.0), seed)
    ref = np.linalg.svd(K.entries, compute_uv=False)[0]
    assert operator_norm_l2(K).op_norm == pytest.approx(ref, rel=1e-8)


def test_eigen_examples():
    assert hermitian_spectrum(kernel(np.diag([3, 1, 2]))) == pytest.approx([1, 2, 3], abs=1e-15)
    assert hermitian_spectrum(kernel([[0, 1], [1, 0]])) == pytest.approx([-1, 1], abs=1e-15)


@pytest.mark.parametrize("n", [5, 17, 64])
def test_tridiagonal_closed_form_eigenvalues(n):
    expect = sorted(4 + 2 * math.cos(k * math.pi / (n + 1)) for k in range(1, n + 1))
    assert np.max(np.abs(hermitian_spectrum(tridiagonal(n)) - expect)) <= 1e-9


@given(seed=st.integers(0, 2**32), n=st.integers(1, 24))
@settings(max_examples=25)
def test_jacobi_matches_lapack_and_power_iteration(seed, n):
    K = random_decaying_kernel(FiniteMetricSpace.segment(n), Envelope("exponential", 0.8), seed, hermitian=True)
    vals, V = hermitian_eigh(K)
    assert np.max(np.abs(vals - np.linalg.eigvalsh(K.entries))) <= 1e-10 * max(1, np.max(np.abs(vals)))
    assert np.allclose(V.conj().T @ V, np.eye(n), atol=1e-10)
    top = max(abs(vals[0]), abs(vals[-1]))
    assert operator_norm_l2(K).op_norm == pytest.approx(top, rel=1e-8)


def test_eigensolver_rejects_non_hermitian():
    with pytest.raises(UsageError):
        hermitian_spectrum(kernel([[1, 2], [0, 1]]))


# --- inversion ------------------------------------------------------------------

def test_invert_examples():
    I = identity_kernel(FiniteMetricSpace.segment(4))
    assert np.array_equal(invert(I).entries, I.entries)
    assert np.allclose(invert(kernel(np.diag([2, 4]))).entries, np.diag([0.5, 0.25]), rtol=1e-15, atol=0)


def test_singular_kernel_names_pivot_step():
    with pytest.raises(SingularKernelError) as err:
        invert(kernel([[1, 2], [2, 4]]))
    assert err.value.step == 1


def test_solve_matches_inverse_column():
    K = tridiagonal(20)
    rhs = np.zeros(20, dtype=complex)
    rhs[7] = 1
    assert np.allclose(solve(K, rhs), invert(K).entries[:, 7], atol=1e-14)


def test_tridiagonal_inverse_closed_form():
    # (T^-1)_{ij} for the (4,1) section follows from the Chebyshev-type recurrence:
    # T^-1_{ij} = (-1)^{i+j} U_i U'_j / U_N with U_k = sinh((k+1) t) / sinh t, cosh t = 2
    n = 24
    t = math.acosh(2.0)
    u = [math.sinh((k + 1) * t) / math.sinh(t) for k in range(n + 1)]
    inv = invert(tridiagonal(n)).entries
    for i in range(n):
        for j in range(i, n):
            ref = (-1) ** (i + j) * u[i] * u[n - 1 - j] / u[n]
            assert inv[i, j] == pytest.approx(ref, rel=1e-10, abs=1e-16)


# --- decay profiles ----------------------------------------------------------------

def test_banded_profile_zero_beyond_band():
    prof = decay_profile(tridiagonal(10))
    assert all(m == 0.0 for t, m in prof.bins if t > 1)
    assert prof.fit is None


def test_exact_geometric_rate():
    n = 30
    idx = np.arange(n)
    K = Kernel(FiniteMetricSpace.segment(n), 0.5 ** np.abs(idx[:, None] - idx[None, :]))
    prof = decay_profile(K)
    assert prof.fit.rate == pytest.approx(math.log(0.5), abs=1e-6)
    assert [t for t, _ in prof.bins] == sorted(t for t, _ in prof.bins)


@pytest.mark.parametrize("n", [32, 64, 128])
def test_tridiagonal_inverse_rate(n):
    inv = invert(tridiagonal(n))
    rows = np.arange(n // 4, n - n // 4)
    prof = decay_profile(inv, rows=rows)
    assert abs(prof.fit.rate / math.log(LAMBDA) - 1) <= 0.03


@given(seed=st.integers(0, 2**32))
@settings(max_examples=20)
def test_diagonally_dominant_inverse_decays(seed):
    space = FiniteMetricSpace.segment(40)
    H = random_decaying_kernel(space, Envelope("exponential", 0.3), seed)
    off = H.entries - np.diag(np.diag(H.entries))
    margin = np.sum(np.abs(off), axis=1)
    K = Kernel(space, off + np.diag(2 * margin + 1e-3))
    prof = decay_profile(invert(K), floor=1e-13)
    assert prof.fit is not None and prof.fit.rate < 0


# --- functional calculus -------------------------------------------------------------

def test_power_function_examples():
    I = identity_kernel(FiniteMetricSpace.segment(3))
    assert np.allclose(power_function(I, 0.37).entries, np.eye(3), atol=1e-15)
    assert np.allclose(power_function(kernel(np.diag([4, 9])), 0.5).entries, np.diag([2, 3]), atol=1e-14)


def test_power_minus_one_matches_invert():
    K = tridiagonal(40)
    assert np.max(np.abs(power_function(K, -1).entries - invert(K).entries)) <= 1e-8


@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
def test_power_pairs_multiply_to_identity(alpha):
    K = tridiagonal(30)
    prod = power_function(K, alpha) @ power_function(K, -alpha)
    assert np.max(np.abs(prod.entries - np.eye(30))) <= 1e-7


def test_fractional_power_of_indefinite_kernel():
    with pytest.raises(DomainError):
        power_function(kernel([[0, 1], [1, 0]]), 0.5)


# --- Barnes bound --------------------------------------------------------------------

def test_barnes_bound_values():
    assert barnes_bound(1, 1, 1) == pytest.approx(2 * math.sqrt(2), abs=1e-9)
    assert barnes_bound(0.5, 1, 1) == pytest.approx(2**0.75 / (1 - 2**-0.5), abs=1e-9)
    assert barnes_bound(0.5, 1, 1) == pytest.approx(5.7423, abs=5e-4)
    assert barnes_bound(1, 1, 1e-12) == pytest.approx(2.0, rel=1e-9)


@pytest.mark.parametrize("p,m", [(1.0, 1), (0.75, 1), (0.5, 2), (0.3, 2), (0.25, 3), (0.1, 4)])
def test_barnes_m(p, m):
    assert barnes_m(p) == m
    assert 2.0**-m < p <= 2.0 ** (1 - m)


# --- reports ----------------------------------------------------------------------------

def test_report_on_diagonal():
    rep = spectral_radius_algebra(kernel(np.diag([2, 1])), 0.5)
    assert rep.r_alg_estimate == pytest.approx(math.sqrt(2), rel=1e-12)
    assert rep.op_norm_p == pytest.approx(math.sqrt(2), rel=1e-10)


def test_tridiagonal_report_within_five_percent():
    rep = spectral_radius_algebra(tridiagonal(64), 1.0, SQRT_HALF)
    top = 4 + 2 * math.cos(math.pi / 65)
    assert rep.eig_oracle == pytest.approx(top, rel=1e-12)
    assert abs(rep.r_alg_estimate - top) <= 0.05 * top


def test_point_cloud_hermitian_report():
    coords = Xoshiro256(21).random_array(2 * 64).reshape(64, 2) * 8
    space = FiniteMetricSpace.point_cloud(coords)
    K = random_decaying_kernel(space, Envelope("exponential", 0.3), 4, hermitian=True)
    rep = spectral_radius_algebra(K, 1.0, pair_weight(0.5))
    assert rep.r_alg_estimate >= rep.op_norm_p - 1e-9
    assert (rep.r_alg_estimate - rep.op_norm_p) / rep.op_norm_p <= 0.10


@pytest.mark.parametrize("p", [0.5, 1.0])
def test_weighted_and_unweighted_roots_agree(p):
    K = tridiagonal(64)
    a = norm_root_sequence(K, p, ROOT).s[-1]
    b = norm_root_sequence(K, p).s[-1]
    top = (4 + 2 * math.cos(math.pi / 65)) ** p
    assert abs(a - b) <= 0.05 * top
    assert schur_pnorm(K, p, ROOT) >= schur_pnorm(K, p)
