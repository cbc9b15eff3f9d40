import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anosov_lab.errors import ConditioningError, IllConditionedSpectrumError, UndefinedSubspaceError
from anosov_lab.matnum import (
    are_conjugate,
    attracting_subspace,
    compound,
    conjugacy_invariants,
    eigen_moduli,
    is_pk_proximal,
    is_weakly_unipotent,
    jordan_chevalley,
    kernel_flag,
    kron,
    log_sv_from_wedge_norms,
    normalized_power,
    plane_from_pluecker,
    pluecker_vector,
    rotation_block,
    singular_values,
    spectral,
    subspace_angle,
    uk_subspace,
    wedge_derivation,
    nilpotent_exp,
    nilpotent_log,
)
from anosov_lab.reps import tau_d

from conftest import random_sl
from oracles import mp_singular_values, tau_unipotent_int

J2 = np.array([[1.0, 1.0], [0.0, 1.0]])
# max over n <= 1e4 of max(r, 1/r), r = sigma_1(tau_3(u^n)) / n^2, from 60-digit SVDs of the
# exact integer matrices; attained at n = 1 (r = 2.80588...)
BRACKET_TAU3 = 2.8059


def jordan_block(d, lam=1.0):
    return lam * np.eye(d) + np.diag(np.ones(d - 1), 1)


def rot3(a, b):
    """A rotation of R^3 built from two plane rotations."""
    ca, sa, cb, sb = math.cos(a), math.sin(a), math.cos(b), math.sin(b)
    return np.array([[ca, -sa, 0], [sa, ca, 0], [0, 0, 1]]) @ np.array([[1, 0, 0], [0, cb, -sb], [0, sb, cb]])


# ---------------------------------------------------------------- spectra

def test_spectral_identity_and_diagonal():
    s = spectral(np.eye(4))
    assert np.allclose(s.sigma, 1) and np.allclose(s.lam, 1)
    s = spectral(np.diag([3, 1, 1 / 3]))
    assert np.allclose(s.sigma, [3, 1, 1 / 3]) and np.allclose(s.lam, [3, 1, 1 / 3])
    assert subspace_angle(s.left_singular[:, :1], np.eye(3)[:, :1]) < 1e-14


def test_spectral_rejects_singular():
    with pytest.raises(ConditioningError):
        spectral(np.diag([1.0, 0.0]))


@pytest.mark.parametrize("n", [1, 2, 7, 100, 10000])
def test_tau3_unipotent_singular_values(n):
    g = tau_d([[1, n], [0, 1]], 3)
    assert np.array_equal(g, np.array(tau_unipotent_int(n, 3), dtype=float))
    s = singular_values(g)
    assert np.prod(s) == pytest.approx(1.0, rel=1e-6 if n < 1000 else 1e-3)
    assert n ** 2 / BRACKET_TAU3 <= s[0] <= BRACKET_TAU3 * n ** 2
    assert s[0] == pytest.approx(float(mp_singular_values(tau_unipotent_int(n, 3))[0]), rel=1e-13)


def test_tau3_u_squared_example():
    s = spectral(tau_d([[1, 2], [0, 1]], 3))
    assert np.prod(s.sigma) == pytest.approx(1.0, rel=1e-12)
    assert 4 / BRACKET_TAU3 <= s.sigma[0] <= 4 * BRACKET_TAU3
    assert s.sigma[0] == pytest.approx(1.5405694150420948 * 4, rel=1e-12)


def test_uk_subspace_diagonal():
    g = np.diag([2, 1, 0.5])
    assert subspace_angle(uk_subspace(g, 1), np.eye(3)[:, :1]) < 1e-14
    assert subspace_angle(uk_subspace(g, 2), np.eye(3)[:, :2]) < 1e-14


def test_uk_subspace_rotated():
    R = rot3(0.4, 1.1)
    g = R @ np.diag([2, 1, 0.5])
    # g g^T = R diag(4, 1, 1/4) R^T: its top eigenvector is R e_1
    w, v = np.linalg.eigh(g @ g.T)
    assert subspace_angle(uk_subspace(g, 1), v[:, [-1]]) < 1e-12
    assert subspace_angle(uk_subspace(g, 1), R[:, :1]) < 1e-12


def test_uk_subspace_undefined_gap():
    with pytest.raises(UndefinedSubspaceError) as exc:
        uk_subspace(np.diag([2.0, 2.0, 0.25]), 1)
    assert exc.value.gap == pytest.approx(1.0)


def test_uk_subspace_via_inverse_for_large_k():
    rng = np.random.default_rng(4)
    g = random_sl(rng, 5)
    direct = uk_subspace(g, 4)
    dual = uk_subspace(g, 4, g_inv=np.linalg.inv(g))
    assert subspace_angle(direct, dual) < 1e-10


def test_uk_perturbation_stability():
    rng = np.random.default_rng(5)
    for _ in range(50):
        g = random_sl(rng, 4)
        s = singular_values(g)
        E = rng.normal(size=(4, 4))
        E *= 1e-7 / np.linalg.norm(E, 2)
        for k in (1, 2, 3):
            ang = subspace_angle(uk_subspace(g, k), uk_subspace(g + E, k))
            # Wedin: sin(angle) <= ||E|| / (sigma_k - sigma_{k+1}) up to a factor 2
            assert ang <= 2 * 1e-7 / (s[k - 1] - s[k]) + 1e-13


# ---------------------------------------------------------------- attracting subspaces and proximality

def test_attracting_subspace_methods_agree():
    rng = np.random.default_rng(6)
    for _ in range(20):
        P = random_sl(rng, 4)
        g = P @ np.diag([3.0, 1.5, 0.5, 1 / 2.25]) @ np.linalg.inv(P)
        # eigenvector accuracy is limited by the conditioning of the eigenbasis
        tol = 1e-13 * np.linalg.cond(P) ** 2
        for k in (1, 2, 3):
            expected = P[:, :k]
            for method in ("schur", "power"):
                assert subspace_angle(attracting_subspace(g, k, method=method), expected) < tol


def test_attracting_subspace_requires_proximality():
    with pytest.raises(UndefinedSubspaceError):
        attracting_subspace(jordan_block(3), 1)


@pytest.mark.parametrize("k", [1, 2])
def test_proximality_diagonal(k):
    r = is_pk_proximal(np.diag([2, 1, 0.5]), k)
    assert r.value and r.gap == pytest.approx(2.0) and r.loxodromic


@pytest.mark.parametrize("d", [2, 3, 5])
def test_unipotent_is_not_proximal(d):
    g = tau_d([[1, 1], [0, 1]], d)
    for k in range(1, d):
        r = is_pk_proximal(g, k)
        assert not r.value and r.gap == pytest.approx(1.0, abs=1e-3)


def test_normalized_power_matches_direct():
    rng = np.random.default_rng(7)
    g = random_sl(rng, 3)
    M, ls = normalized_power(g, 13)
    direct = np.linalg.matrix_power(g, 13)
    assert np.allclose(np.exp(ls) * M, direct, rtol=1e-10, atol=1e-10 * np.abs(direct).max())
    assert np.linalg.norm(M, 2) == pytest.approx(1.0)


# ---------------------------------------------------------------- exterior powers

def test_compound_examples():
    g = np.diag([3.0, 1.0, 1 / 3])
    assert np.allclose(compound(g, 2), np.diag([3.0, 1.0, 1 / 3]))
    assert np.allclose(compound(g, 1), g)
    assert compound(g, 3).shape == (1, 1) and compound(g, 3)[0, 0] == pytest.approx(1.0)


def test_compound_entries_are_minors():
    rng = np.random.default_rng(8)
    g = rng.normal(size=(4, 4))
    C = compound(g, 2)
    # row (0, 2), column (1, 3)
    assert C[1, 4] == pytest.approx(g[0, 1] * g[2, 3] - g[0, 3] * g[2, 1])


def test_pluecker_round_trip():
    rng = np.random.default_rng(9)
    for k in (1, 2, 3):
        F = rng.normal(size=(5, k))
        P = plane_from_pluecker(pluecker_vector(F), 5, k)
        assert subspace_angle(P, F) < 1e-12


def test_wedge_derivation_exponentiates():
    X = np.triu(np.random.default_rng(10).normal(size=(4, 4)), 1)
    for k in (1, 2, 3):
        D = wedge_derivation(X, k)
        assert np.allclose(nilpotent_exp(D, 0.7), compound(nilpotent_exp(X, 0.7), k), atol=1e-12)


def test_log_singular_values_from_wedge_norms():
    rng = np.random.default_rng(11)
    g = random_sl(rng, 4)
    norms = [0.0] + [math.log(np.linalg.norm(compound(g, k), 2)) for k in range(1, 5)]
    assert np.allclose(np.exp(log_sv_from_wedge_norms(norms)), singular_values(g), rtol=1e-10)


def test_nilpotent_log_exp_inverse():
    u = tau_d([[1, 1.5], [0, 1]], 5)
    assert np.allclose(nilpotent_exp(nilpotent_log(u)), u, atol=1e-12)


# ---------------------------------------------------------------- kron

def test_kron_examples():
    A = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert np.array_equal(kron(A, np.eye(2)), np.array(
        [[1, 0, 2, 0], [0, 1, 0, 2], [3, 0, 4, 0], [0, 3, 0, 4]], dtype=float))
    M = rotation_block(0.3)
    assert np.array_equal(kron(np.eye(2), M)[:2, :2], M) and np.array_equal(kron(np.eye(2), M)[2:, 2:], M)
    assert np.all(kron(np.eye(2), M)[:2, 2:] == 0)
    lhs = kron(tau_d(J2, 2), np.eye(2)) @ kron(np.eye(2), M)
    assert np.allclose(lhs, kron(tau_d(J2, 2), M), atol=1e-15)


def test_kron_mixed_product():
    rng = np.random.default_rng(12)
    for _ in range(100):
        A, C = rng.normal(size=(2, 3, 3))
        B, D = rng.normal(size=(2, 2, 2))
        assert np.allclose(kron(A, B) @ kron(C, D), kron(A @ C, B @ D), atol=1e-10)


def test_rotation_block_convention():
    assert np.allclose(rotation_block(math.pi / 2), [[0, 1], [-1, 0]], atol=1e-16)


# ---------------------------------------------------------------- Jordan-Chevalley

def test_jc_identity_and_unipotent():
    jc = jordan_chevalley(np.eye(3))
    assert np.allclose(jc.g_ss, np.eye(3)) and np.allclose(jc.g_u, np.eye(3))
    jc = jordan_chevalley(J2)
    assert np.allclose(jc.g_ss, np.eye(2), atol=1e-12) and np.allclose(jc.g_u, J2, atol=1e-12)
    assert [b.size for b in jc.block_spec] == [2]


@pytest.mark.parametrize("layout", ["rotation_outer", "rotation_inner"])
def test_jc_rotation_times_jordan(layout):
    M = rotation_block(math.pi / 3)
    if layout == "rotation_outer":
        g_ss, g_u = kron(M, np.eye(2)), kron(np.eye(2), J2)
    else:
        g_ss, g_u = kron(np.eye(2), M), kron(J2, np.eye(2))
        assert np.allclose(g_ss, np.block([[M, np.zeros((2, 2))], [np.zeros((2, 2)), M]]))
    g = g_ss @ g_u
    assert np.allclose(g, g_u @ g_ss)
    jc = jordan_chevalley(g)
    assert np.allclose(jc.g_ss, g_ss, atol=1e-9) and np.allclose(jc.g_u, g_u, atol=1e-9)
    assert np.allclose(jc.g_ss @ jc.g_u, g, atol=1e-8 * np.linalg.norm(g, 2))
    assert np.allclose(jc.g_u @ jc.g_ss, g, atol=1e-8 * np.linalg.norm(g, 2))
    assert np.allclose(eigen_moduli(jc.g_u), 1, atol=1e-6)
    (b,) = jc.block_spec
    assert b.size == 2 and b.is_rotation and b.angle == pytest.approx(math.pi / 3, abs=1e-9)


def test_jc_mixed_structure_conjugated():
    rng = np.random.default_rng(13)
    blocks = [jordan_block(3, 2.0), jordan_block(2, -0.5), np.array([[0.5]])]
    core = np.zeros((6, 6))
    i = 0
    for b in blocks:
        core[i:i + len(b), i:i + len(b)] = b
        i += len(b)
    P = random_sl(rng, 6)
    g = P @ core @ np.linalg.inv(P)
    jc = jordan_chevalley(g)
    sizes = sorted((b.size, round(b.modulus, 6)) for b in jc.block_spec)
    assert sizes == [(1, 0.5), (2, 0.5), (3, 2.0)]
    ss = P @ np.diag([2, 2, 2, -0.5, -0.5, 0.5]) @ np.linalg.inv(P)
    assert np.allclose(jc.g_ss, ss, atol=1e-7 * np.linalg.norm(ss))


def test_jc_ill_conditioned_clusters():
    with pytest.raises(IllConditionedSpectrumError):
        # clusters 3e-5 apart in log-modulus: separated at radius 1e-5 but within the 4x ambiguity band
        jordan_chevalley(np.diag([1.0, 1.0 + 3e-5, 1 / (1 + 3e-5)]), tol=1e-5)
    jc = jordan_chevalley(np.diag([1.0, 1.0 + 1e-3, 1 / (1 + 1e-3)]), tol=1e-5)
    assert len(jc.clusters) == 3


# ---------------------------------------------------------------- weak unipotence and conjugacy

def test_weak_unipotence_examples():
    assert is_weakly_unipotent(J2).value
    r = is_weakly_unipotent(np.diag([2, 0.5]))
    assert not r.value and "modulus" in r.reason
    r = is_weakly_unipotent(rotation_block(1.0))
    assert not r.value and r.reason == "elliptic"


def test_weak_unipotence_of_tau4_parabolic():
    r = is_weakly_unipotent(tau_d([[1, 2], [0, 1]], 4))
    assert r.value and [b.size for b in r.block_spec] == [4]


def test_weak_unipotence_rotation_block():
    g = kron(J2, rotation_block(math.pi / 4))
    r = is_weakly_unipotent(g)
    assert r.value and r.block_spec[0].is_rotation


def test_conjugacy_examples():
    Z = np.zeros((2, 2))
    a = np.block([[J2, Z], [Z, J2]])
    b = np.block([[J2, Z], [Z, np.eye(2)]])
    assert not are_conjugate(a, b)
    ia, ib = conjugacy_invariants(a), conjugacy_invariants(b)
    assert ia.rank_tables[0][0] == 2 and ib.rank_tables[0][0] == 1
    rng = np.random.default_rng(14)
    for _ in range(20):
        h = random_sl(rng, 4)
        assert are_conjugate(a, h @ a @ np.linalg.inv(h))


def test_conjugacy_json_shape():
    js = conjugacy_invariants(jordan_block(3)).to_json()
    assert js["d"] == 3 and js["clusters"][0]["ranks"] == [2, 1, 0]


def test_kernel_flag_of_single_block():
    N = tau_d([[1, 1], [0, 1]], 4) - np.eye(4)
    K = kernel_flag(N)
    for j in range(1, 4):
        assert subspace_angle(K[:, :j], np.eye(4)[:, :j]) < 1e-10


# ---------------------------------------------------------------- properties

@st.composite
def sl_matrices(draw, d=3, scale=0.6):
    seed = draw(st.integers(0, 2 ** 32 - 1))
    return random_sl(np.random.default_rng(seed), d, scale)


@pytest.mark.property
@settings(max_examples=1000)
@given(sl_matrices(d=4), sl_matrices(d=4))
def test_conjugation_distortion_bound(A, B):
    sA = singular_values(A)
    sB = singular_values(B)
    sC = singular_values(B @ A @ np.linalg.inv(B))
    bound = sB[0] / sB[-1] * sA
    assert np.all(sC <= bound * (1 + 1e-8))


@pytest.mark.property
@settings(max_examples=300)
@given(sl_matrices(d=4), st.integers(1, 8))
def test_eigenvalue_moduli_of_powers(g, n):
    lam = eigen_moduli(g)
    lam_n = eigen_moduli(np.linalg.matrix_power(g, n))
    assert np.allclose(lam_n, lam ** n, rtol=1e-6)


@pytest.mark.property
def test_singular_values_root_converge_to_moduli():
    rng = np.random.default_rng(15)
    checked = 0
    while checked < 50:
        g = random_sl(rng, 4)
        lam = eigen_moduli(g)
        if np.min(lam[:-1] / lam[1:]) < 1.05:
            continue
        # log(sigma_1 ... sigma_k)(g^64) = log ||(wedge^k g)^64||, each power taken in its own exterior power
        logs = [0.0]
        for k in range(1, 5):
            M, ls = normalized_power(compound(g, k), 64)
            logs.append(ls + math.log(np.linalg.norm(M, 2)))
        sigma_root = np.exp(log_sv_from_wedge_norms(logs) / 64)
        assert np.allclose(sigma_root, lam, rtol=0.05)
        checked += 1


@pytest.mark.property
@settings(max_examples=200)
@given(st.integers(0, 2 ** 32 - 1))
def test_jc_round_trip(seed):
    rng = np.random.default_rng(seed)
    d = 4
    # a random real Jordan form: blocks of random sizes and moduli, conjugated
    sizes = [1, 3] if seed % 2 else [2, 2]
    mods = [1.5, 0.7] if seed % 3 else [1.0, -2.0]
    core = np.zeros((d, d))
    i = 0
    for s, m in zip(sizes, mods):
        core[i:i + s, i:i + s] = jordan_block(s, m)
        i += s
    P = random_sl(rng, d, 0.3)
    g = P @ core @ np.linalg.inv(P)
    jc = jordan_chevalley(g)
    scale = np.linalg.norm(g, 2)
    assert np.linalg.norm(jc.g_ss @ jc.g_u - g, 2) <= 1e-8 * scale
    assert np.linalg.norm(jc.g_ss @ jc.g_u - jc.g_u @ jc.g_ss, 2) <= 1e-8 * scale
    assert sorted(b.size for b in jc.block_spec) == sorted(sizes)


@pytest.mark.property
@settings(max_examples=200)
@given(sl_matrices(d=4), sl_matrices(d=4), st.integers(1, 3))
def test_compound_is_multiplicative(g, h, k):
    lhs = compound(g @ h, k)
    assert np.allclose(lhs, compound(g, k) @ compound(h, k), atol=1e-8 * np.abs(lhs).max())
    assert np.linalg.norm(compound(g, k), 2) == pytest.approx(np.prod(singular_values(g)[:k]), rel=1e-6)


@pytest.mark.property
@settings(max_examples=200)
@given(sl_matrices(d=3), sl_matrices(d=3))
def test_proximality_is_conjugation_invariant(g, h):
    a = is_pk_proximal(g, 1)
    b = is_pk_proximal(h @ g @ np.linalg.inv(h), 1)
    if abs(a.gap - 1) > 1e-6:
        assert a.value == b.value
