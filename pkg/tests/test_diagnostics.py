import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anosov_lab.cli.config import load_config, shipped_config
from anosov_lab.diagnostics import (
    Verdict,
    cartan_property_check,
    cusp_norm_distortion,
    eigengap_statistics,
    extend_positive_map,
    fit_bounds,
    gap_samples,
    gap_statistics,
    hitchin_certify,
    limit_map_sample,
    orbit_qi_check,
    parabolic_growth_exponents,
    power_trajectory,
    pumped_trajectory,
    slope_verdict,
    tp_check,
)
from anosov_lab.diagnostics.limits import Trajectory, limit_value
from anosov_lab.errors import (
    DirectionUnavailableError,
    EmptySampleError,
    ProximalityError,
    ResourceError,
)
from anosov_lab.freegroup import (
    GroupElement,
    enumerate_ball,
    power_word,
    random_reduced_word,
    sample_limit_set,
)
from anosov_lab.hyperbolic import BoundaryPoint, Kind, MoebiusMap
from anosov_lab.matnum import are_conjugate, pluecker_vector, subspace_angle
from anosov_lab.posflags import flag_angle
from anosov_lab.reps import (
    build_cusp_rep,
    conjugate,
    direct_sum,
    explicit_rep,
    exterior_power_rep,
    lift_rep,
    tau_d,
    tau_rep,
    veronese,
)

from conftest import random_sl, rotation
from oracles import (
    THRICE_PUNCTURED,
    displacement_exact,
    int_word,
    principal_angle,
    translation_exact,
    veronese_frame,
)

U2 = np.array([[1.0, 1.0], [0.0, 1.0]])
GENS = [MoebiusMap.from_matrix(m) for m in THRICE_PUNCTURED]


@pytest.fixture(scope="module")
def ball6():
    return enumerate_ball(GENS, 6)


@pytest.fixture(scope="module")
def sample50(ball6):
    return sample_limit_set(ball6, math.pi / 100, max_points=50)


def rho_t(t, g1=((5, 1), (4, 1))):
    """Lift of a Schottky pair plus the rank-two unipotent family on the second generator."""
    gens = [MoebiusMap.from_matrix(g1), MoebiusMap.from_matrix(U2)]
    return gens, direct_sum(lift_rep(gens), explicit_rep([np.eye(2), [[1.0, t], [0.0, 1.0]]]))


def element(word, m):
    return GroupElement.from_map(tuple(word), MoebiusMap.from_matrix(m))


# ---------------------------------------------------------------- fits and verdicts

def test_slope_verdict_is_three_valued():
    assert slope_verdict(0.005, 0.01) is Verdict.FAIL
    assert slope_verdict(0.01, 0.01) is Verdict.FAIL
    assert slope_verdict(0.015, 0.01) is Verdict.INCONCLUSIVE
    assert slope_verdict(0.03, 0.01) is Verdict.PASS
    assert slope_verdict(math.nan, 0.01) is Verdict.INCONCLUSIVE
    assert Verdict.combine([Verdict.PASS, Verdict.INCONCLUSIVE]) is Verdict.INCONCLUSIVE
    assert Verdict.combine([Verdict.INCONCLUSIVE, Verdict.FAIL]) is Verdict.FAIL


def test_fit_of_exact_line():
    xs = np.linspace(0, 10, 40)
    fit = fit_bounds(xs, 3.0 * xs + 1.0)
    assert fit.a_hi == pytest.approx(3.0) and fit.lower_slope == pytest.approx(3.0)
    assert fit.log_A_hi == pytest.approx(1.0) and fit.log_A_lo == pytest.approx(-1.0)
    assert fit.min_slack == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(EmptySampleError):
        fit_bounds([], [])


def test_fit_bounds_are_extremal_not_least_squares():
    xs = np.array([1.0, 2.0, 3.0, 4.0])
    ys = np.array([1.0, 3.0, 2.0, 4.0])
    fit = fit_bounds(xs, ys)
    assert fit.holds(xs, ys)
    assert fit.ls_slope == pytest.approx(np.polyfit(xs, ys, 1)[0])
    # the bounds touch the scatter
    assert np.min(fit.upper(xs) - ys) == pytest.approx(0.0, abs=1e-12)
    assert np.min(ys - fit.lower(xs)) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.property
@settings(max_examples=300)
@given(st.lists(st.tuples(st.floats(0, 30), st.floats(-50, 50)), min_size=1, max_size=60))
def test_fit_bounds_hold_on_every_sample(pts):
    xs, ys = map(np.array, zip(*pts))
    fit = fit_bounds(xs, ys)
    assert fit.holds(xs, ys, tol=1e-9 * (1 + np.abs(ys).max() + np.abs(xs).max() * 50))


# ---------------------------------------------------------------- singular value gaps

@pytest.mark.parametrize("d", [2, 3, 5])
def test_orthonormal_tau_gaps_equal_displacement(d):
    ball = enumerate_ball(GENS, 6)
    rep = tau_rep(GENS, d, "orthonormal")
    for s in gap_samples(rep, ball):
        exact = displacement_exact(int_word(THRICE_PUNCTURED, s.word))
        assert np.allclose(s.log_singular_gaps, exact, atol=1e-8, rtol=0)
    st_ = gap_statistics(rep, ball, 1)
    assert st_.verdict is Verdict.PASS
    assert st_.fit.a_hi == pytest.approx(1.0, abs=1e-6)
    assert st_.fit.a_lo == pytest.approx(1.0, abs=1e-6)
    assert st_.fit.A_hi == pytest.approx(1.0, abs=1e-6)
    assert st_.fit.holds([s.displacement for s in st_.samples], [s.log_singular_gaps[0] for s in st_.samples])


def test_identity_word_has_zero_gaps():
    rep = tau_rep(GENS, 4)
    (s,) = gap_samples(rep, [element((), np.eye(2))])
    assert s.displacement == 0.0 and s.symmetric_space_dist == pytest.approx(0.0, abs=1e-14)
    assert np.allclose(s.log_singular_gaps, 0.0, atol=1e-14)
    assert not s.hyperbolic


def test_gap_sample_invariants(ball6):
    rep = conjugate(tau_rep(GENS, 4), random_sl(np.random.default_rng(3), 4, 0.3))
    for s in gap_samples(rep, ball6[:300]):
        assert np.all(s.log_singular_gaps >= 0) and np.all(s.log_eigen_gaps >= 0)
        assert s.symmetric_space_dist >= s.log_singular_gaps.max() / math.sqrt(2) - 1e-12


def test_rho_t_powers_of_cusp_close_the_first_gap():
    gens, rep = rho_t(1.0)
    ball = [element(power_word((2,), n), [[1, n], [0, 1]]) for n in range(1, 65)]
    samples = gap_samples(rep, ball)
    assert max(s.log_singular_gaps[0] for s in samples) < math.log(4)
    assert samples[-1].displacement == pytest.approx(2 * math.asinh(32.0))
    st_ = gap_statistics(rep, ball, 1, samples=samples)
    assert st_.verdict is Verdict.FAIL and st_.to_json()["label"] == "gap-closed"
    # the orbit map still looks quasi-isometric: the verdicts diverge
    assert orbit_qi_check(rep, ball, samples=samples).verdict is Verdict.PASS


def test_gap_statistics_rejects_bad_k(ball6):
    with pytest.raises(ValueError):
        gap_statistics(tau_rep(GENS, 3), ball6, 3)


# ---------------------------------------------------------------- eigenvalue gaps and QI

@pytest.mark.parametrize("basis", ["monomial", "orthonormal"])
@pytest.mark.parametrize("d", [3, 4])
def test_tau_eigengaps_equal_translation_length(ball6, d, basis):
    rep = tau_rep(GENS, d, basis)
    hyp = [g for g in ball6 if g.kind is Kind.HYPERBOLIC]
    for s in gap_samples(rep, hyp):
        ell = translation_exact(int_word(THRICE_PUNCTURED, s.word))
        assert np.allclose(s.log_eigen_gaps, ell, atol=1e-8, rtol=0)
    es = eigengap_statistics(rep, ball6, 2)
    assert es.min_rate == pytest.approx(1.0, abs=1e-8) and es.verdict is Verdict.PASS
    assert es.n_hyperbolic == len(hyp)


def test_wedge_two_of_tau4_first_eigengap(ball6):
    rep = exterior_power_rep(tau_rep(GENS, 4), 2)
    es = eigengap_statistics(rep, ball6[:400], 1)
    assert es.min_rate == pytest.approx(1.0, abs=1e-8)
    assert es.fit.upper_slope == pytest.approx(1.0, abs=1e-6)


def test_parabolic_only_ball_has_no_eigengap_scatter():
    ball = enumerate_ball([U2], 4)
    assert all(g.kind is Kind.PARABOLIC for g in ball)
    with pytest.raises(EmptySampleError):
        eigengap_statistics(tau_rep([U2], 3), ball, 1)


def test_symmetric_space_distance_of_diagonal():
    e = math.e
    rep = tau_rep([np.diag([e, 1 / e])], 3, "orthonormal")
    ball = enumerate_ball([np.diag([e, 1 / e])], 1)
    s = gap_samples(rep, ball)
    g = [x for x in s if x.word == (1,)][0]
    assert g.displacement == pytest.approx(2.0)
    assert g.symmetric_space_dist == pytest.approx(2 * math.sqrt(2))
    qi = orbit_qi_check(rep, enumerate_ball([np.diag([e, 1 / e])], 6))
    assert qi.verdict is Verdict.PASS
    assert qi.fit.ls_slope == pytest.approx(math.sqrt(2))


# ---------------------------------------------------------------- limit maps

@pytest.mark.parametrize("basis", ["monomial", "orthonormal"])
@pytest.mark.parametrize("d", [3, 4, 5])
def test_limit_map_is_veronese(sample50, d, basis):
    rep = tau_rep(GENS, d, basis)
    lm = limit_map_sample(rep, sample50, k=None, generators=GENS)
    assert len(lm) == 50 and not lm.failures
    worst = 0.0
    for x, F in zip(lm.points, lm.values):
        ref = veronese_frame(x.x, d, basis)
        for j in range(1, d):
            worst = max(worst, principal_angle(F.subspace(j), ref[:, :j]))
    assert worst <= 1e-6
    assert lm.equivariance_residual <= 1e-8 and lm.equivariance_checks > 0
    assert lm.min_margin > 0


def test_limit_map_partial_pairs(sample50):
    rep = tau_rep(GENS, 4)
    lm = limit_map_sample(rep, sample50, k=1)
    for x, v in zip(lm.points, lm.values):
        F = veronese(x, 4)
        assert subspace_angle(v.P, F.subspace(1)) <= 1e-6
        assert subspace_angle(v.Q, F.subspace(3)) <= 1e-6
    assert lm.min_margin > 0


def test_cyclic_diagonal_sample_gives_top_eigenline():
    g = np.diag([2.0, 0.5])
    C = random_sl(np.random.default_rng(5), 3, 0.5)
    rep = explicit_rep([C @ np.diag([3.0, 1.0, 1 / 3]) @ np.linalg.inv(C)])
    sample = sample_limit_set(enumerate_ball([g], 2), 1e-3)
    lm = limit_map_sample(rep, sample, k=1)
    top = lm.lookup(BoundaryPoint.infinity())
    assert top is not None
    assert subspace_angle(top.P, C[:, :1]) <= 1e-12
    assert subspace_angle(lm.lookup(BoundaryPoint(0.0)).P, C[:, 2:]) <= 1e-12


def test_rho_t_cusp_witness_is_not_proximal():
    gens, rep = rho_t(1.0)
    sample = sample_limit_set(enumerate_ball(gens, 3), 1e-3)
    with pytest.raises(ProximalityError) as exc:
        limit_map_sample(rep, sample, k=1)
    assert (2,) in exc.value.witnesses or (-2,) in exc.value.witnesses
    lm = limit_map_sample(rep, sample, k=1, on_failure="skip")
    assert lm.failures and all(not p for p in lm.parabolic)


def test_limit_value_at_parabolic_point_is_veronese():
    rep = tau_rep(GENS, 4)
    F = limit_value(rep, (1,), None, parabolic=True)
    assert flag_angle(F, veronese(BoundaryPoint.infinity(), 4)) <= 1e-8


# ---------------------------------------------------------------- Cartan property

def test_cartan_rate_along_powers():
    rep = tau_rep(GENS, 3)
    for w in [(1, 2), (1, -2, -2)]:
        (r,) = cartan_property_check(rep, None, [power_trajectory(w, 12, GENS)], 1)
        assert r.verdict is Verdict.PASS and r.eventually_decreasing
        lam = np.exp(rep.log_eigen_moduli(w))
        a = np.array(r.angles[1:6])
        # one power contracts by lambda_2 / lambda_1
        assert np.allclose(a[1:] / a[:-1], lam[1] / lam[0], rtol=0.03)


def test_cartan_identity_trajectory_is_undefined():
    tr = Trajectory(((),) * 4, BoundaryPoint(0.0), (1, 2), "identity")
    (r,) = cartan_property_check(tau_rep(GENS, 3), None, [tr], 1)
    assert r.verdict is Verdict.FAIL and r.undefined_at == 0


def test_cartan_pumped_words_against_veronese(sample50):
    rep = tau_rep(GENS, 3)
    tr = pumped_trajectory((1, 2), (1,), 20, GENS)
    ref = veronese(tr.point, 3).subspace(1)
    angle = subspace_angle(rep.uk_plane(tr.words[-1], 1), ref)
    assert angle < 1e-6
    lm = limit_map_sample(rep, sample50, k=None)
    (r,) = cartan_property_check(rep, lm, [tr], 1)
    assert r.verdict is Verdict.PASS and r.terminal_angle < 1e-6


# ---------------------------------------------------------------- parabolic growth

@pytest.mark.parametrize("d", [3, 4, 5, 6])
def test_tau_growth_exponents(d):
    gr = parabolic_growth_exponents(tau_rep([U2], d), (1,))
    expected = [d + 1 - 2 * j for j in range(1, d + 1)]
    assert list(gr.nearest) == expected
    assert max(gr.distance) < 0.05
    assert max(gr.bracket) <= 10
    assert all(v is Verdict.PASS for v in gr.verdicts.values())


def test_elliptic_growth_is_flat():
    gr = parabolic_growth_exponents(tau_rep([rotation(2 * math.pi / 5)], 3), (1,))
    assert list(gr.nearest) == [0, 0, 0] and max(gr.distance) < 1e-6
    assert all(v is Verdict.FAIL for v in gr.verdicts.values())


def test_rho_t_cusp_growth():
    _, rep = rho_t(1.0)
    gr = parabolic_growth_exponents(rep, (2,))
    assert list(gr.nearest) == [1, 1, -1, -1]
    assert gr.verdicts[1] is Verdict.FAIL and gr.verdicts[2] is Verdict.PASS
    _, rep0 = rho_t(0.0)
    gr0 = parabolic_growth_exponents(rep0, (2,))
    assert list(gr0.nearest) == [1, 0, 0, -1] and gr0.verdicts[1] is Verdict.PASS


def test_growth_overflow_guard():
    with pytest.raises(ResourceError):
        parabolic_growth_exponents(explicit_rep([np.diag([2.0, 0.5])]), (1,))


# ---------------------------------------------------------------- type preservation

def test_tp_check_examples():
    rep = tau_rep(GENS, 4)
    peris = [(1,), (2,), (1, -2)]
    assert tp_check(rep, rep, peris).verdict is Verdict.PASS
    moved = conjugate(rep, random_sl(np.random.default_rng(8), 4, 0.5))
    assert tp_check(moved, rep, peris).verdict is Verdict.PASS
    _, r1 = rho_t(1.0)
    _, r0 = rho_t(0.0)
    res = tp_check(r1, r0, [(2,)])
    assert res.verdict is Verdict.FAIL and res.entries[0].match is False
    assert not are_conjugate(r1.evaluate((2,)), r0.evaluate((2,)))


# ---------------------------------------------------------------- Hitchin certification

@pytest.mark.parametrize("d", [3, 4, 5])
def test_hitchin_certifies_tau(ball6, sample50, d):
    rep = tau_rep(GENS, d)
    rep_ = hitchin_certify(rep, ball6, sample50, tuple_budget=200, rng=np.random.default_rng(d))
    assert rep_.verdict is Verdict.PASS, rep_.to_json()
    assert rep_.categories["positivity"].margin > 0
    assert rep_.categories["positivity"].detail["n"] == 400


def test_hitchin_rejects_rho_t():
    gens, rep = rho_t(1.0)
    ball = enumerate_ball(gens, 5)
    sample = sample_limit_set(ball, 0.05, max_points=30)
    failing = hitchin_certify(rep, ball, sample, tuple_budget=20).failing()
    assert {"parabolic", "gaps"} <= set(failing)


def test_hitchin_rejects_repeated_exponents(ball6, sample50):
    rep = direct_sum(tau_rep(GENS, 2), tau_rep(GENS, 2))
    res = hitchin_certify(rep, ball6, sample50, tuple_budget=20)
    assert {"loxodromy", "gaps"} <= set(res.failing())
    assert res.categories["positivity"].error.startswith("ProximalityError")


def test_hitchin_dimension_cap(ball6, sample50):
    with pytest.raises(ValueError):
        hitchin_certify(tau_rep(GENS, 9), ball6, sample50)


# ---------------------------------------------------------------- monotone extension

@pytest.fixture(scope="module")
def cusp_orbit_zeta():
    """Orthonormal Veronese flags on the orbit of the three cusps under the ball of radius 8."""
    ball = enumerate_ball(GENS, 8, include_identity=True)
    cusps = [BoundaryPoint.infinity(), BoundaryPoint(0.0), BoundaryPoint(1.0)]
    dom = {}
    for g in ball:
        for c in cusps:
            y = g.sl2(c)
            dom.setdefault(round(y.angle, 12), y)
    return {y: veronese(y, 3, "orthonormal") for y in dom.values()}


def _arc(x, y):
    a = abs(x.angle - y.angle) % (2 * math.pi)
    return min(a, 2 * math.pi - a)


def test_extension_at_a_parabolic_point(cusp_orbit_zeta):
    rep = tau_rep(GENS, 3, "orthonormal")
    x = BoundaryPoint.infinity()
    res = extend_positive_map(cusp_orbit_zeta, x)
    assert res.point_used == x and res.cauchy
    # the fixed flag of the single Jordan block is the same flag
    assert flag_angle(res.flag, rep.parabolic_flag((1,))) <= 1e-8


def test_extension_at_short_witness_points(cusp_orbit_zeta):
    conical = sample_limit_set(enumerate_ball(GENS, 2), 1e-6).conical_points()
    for lp in conical:
        for direction in (1, -1):
            res = extend_positive_map(cusp_orbit_zeta, lp.point, direction)
            assert flag_angle(res.flag, veronese(lp.point, 3, "orthonormal")) <= 1e-4
            assert res.cauchy


def test_extension_error_is_bounded_by_the_arc_gap(cusp_orbit_zeta):
    """A rotation by phi moves boundary angles by 2 phi and its orthonormal tau_3 image is a
    rotation by 2 phi, so the flag angle never exceeds the arc to the deepest domain point."""
    sample = sample_limit_set(enumerate_ball(GENS, 8), 1e-4).conical_points()
    angles = np.sort([y.angle for y in cusp_orbit_zeta])
    rng = np.random.default_rng(4)
    for i in rng.choice(len(sample), 40, replace=False):
        x = sample[int(i)].point
        for direction in (1, -1):
            res = extend_positive_map(cusp_orbit_zeta, x, direction)
            gap = _arc(x, res.point_used)
            # the deepest point is the nearest domain point on that side
            j = np.searchsorted(angles, x.angle)
            side = angles[j % len(angles)] if direction < 0 else angles[j - 1]
            assert res.point_used.angle == pytest.approx(side, abs=1e-12)
            assert flag_angle(res.flag, veronese(x, 3, "orthonormal")) <= gap + 1e-12
            assert gap < 5e-3


def test_extension_needs_an_approach():
    F = veronese(BoundaryPoint(0.0), 3)
    zeta = {BoundaryPoint(0.0): F}
    with pytest.raises(DirectionUnavailableError):
        extend_positive_map(zeta, BoundaryPoint(1.0))
    with pytest.raises(DirectionUnavailableError):
        extend_positive_map(zeta, BoundaryPoint(1.0), fallback=True)


def test_extension_fallback_is_recorded():
    zeta = {BoundaryPoint(x): veronese(BoundaryPoint(x), 3) for x in (0.1, 0.2, 0.3)}
    x = BoundaryPoint(0.0)
    open_side = 1 if not extend_positive_map(zeta, x, 1, fallback=True).fallback else -1
    with pytest.raises(DirectionUnavailableError):
        extend_positive_map(zeta, x, -open_side)
    res = extend_positive_map(zeta, x, -open_side, fallback=True)
    assert res.fallback and "used side" in res.note
    assert res.point_used == BoundaryPoint(0.1)


# ---------------------------------------------------------------- cusp norm distortion

@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_cusp_distortion_of_tau(d):
    psi = build_cusp_rep(tau_d(U2, d))
    res = cusp_norm_distortion(psi, [-4.0 + 0.5 * i for i in range(17)], rng=np.random.default_rng(d))
    assert res.c0 == pytest.approx((d - 1) / 2, rel=0.05)
    assert res.C0 >= 1.0 and res.bound_holds and res.min_slack >= -1e-9
    i0 = res.t_grid.index(0.0)
    assert res.log_upper[i0] == pytest.approx(0.0, abs=1e-12)
    assert res.log_lower[i0] == pytest.approx(0.0, abs=1e-12)
    assert res.averaging_residual < 1e-12


def test_weight_zero_vector_keeps_its_norm():
    psi = build_cusp_rep(tau_d(U2, 3))
    a = psi(np.diag([math.e, 1 / math.e]))
    w, V = np.linalg.eig(a)
    Z = np.real(V[:, int(np.argmin(np.abs(w - 1)))])
    for t in (-3.0, 0.5, 4.0):
        M = np.linalg.inv(psi(np.diag([math.exp(t / 2), math.exp(-t / 2)])))
        assert np.linalg.norm(M @ Z) == pytest.approx(np.linalg.norm(Z), rel=1e-10)


# ---------------------------------------------------------------- properties

@pytest.mark.property
@pytest.mark.parametrize("name", ["tau3_punctured_sphere.json", "rho_t_counterexample.json"])
def test_gap_open_implies_positive_periodic_rate(name):
    cfg = load_config(shipped_config(name))
    ball = enumerate_ball(cfg.generators, min(cfg.L, 6))
    samples = gap_samples(cfg.representation, ball)
    for k in range(1, cfg.representation.d):
        st_ = gap_statistics(cfg.representation, ball, k, samples=samples)
        if st_.verdict is Verdict.PASS:
            es = eigengap_statistics(cfg.representation, ball, k, samples=samples)
            assert es.min_rate > 0


def hyperbolic_words(max_len=6):
    @st.composite
    def draw(draw_):
        seed = draw_(st.integers(0, 2 ** 32 - 1))
        rng = np.random.default_rng(seed)
        while True:
            w = random_reduced_word(rng, 2, int(rng.integers(1, max_len + 1)))
            if GroupElement.from_map(w, MoebiusMap.from_matrix(int_word(THRICE_PUNCTURED, w))).kind is Kind.HYPERBOLIC:
                return w
    return draw()


@pytest.mark.property
@settings(max_examples=150)
@given(hyperbolic_words(), st.integers(3, 5), st.integers(0, 2 ** 32 - 1))
def test_limit_map_does_not_depend_on_witness_length(w, d, seed):
    rep = conjugate(tau_rep(GENS, d), random_sl(np.random.default_rng(seed), d, 0.3))
    F1 = rep.attracting_flag(w)
    for n in (2, 3):
        assert flag_angle(F1, rep.attracting_flag(power_word(w, n))) <= 1e-5


@pytest.mark.property
@settings(max_examples=150)
@given(hyperbolic_words(), st.integers(1, 3))
def test_exterior_power_line_is_pluecker_image(w, k):
    rep = tau_rep(GENS, 4)
    line = exterior_power_rep(rep, k).attracting_plane(w, 1)
    omega = pluecker_vector(rep.attracting_plane(w, k))
    assert subspace_angle(line, omega[:, None]) <= 1e-5


def _duality_reps():
    _, rt = rho_t(1.0)
    return [tau_rep(GENS, 3), tau_rep(GENS, 4, "orthonormal"), direct_sum(tau_rep(GENS, 2), tau_rep(GENS, 2)),
            conjugate(tau_rep(GENS, 4), random_sl(np.random.default_rng(2), 4, 0.5)), rt]


@pytest.mark.property
@settings(max_examples=60)
@given(st.integers(0, 4), st.integers(1, 3), st.integers(2, 5))
def test_gap_verdict_duality(which, k, L):
    rep = _duality_reps()[which]
    if which == 4:
        gens = [MoebiusMap.from_matrix([[5, 1], [4, 1]]), MoebiusMap.from_matrix(U2)]
    else:
        gens = GENS
    ball = enumerate_ball(gens, L)
    k = 1 + (k - 1) % (rep.d - 1)
    a = gap_statistics(rep, ball, k)
    b = gap_statistics(rep.inverse_transpose(), ball, rep.d - k)
    assert a.verdict is b.verdict
    assert a.fit.lower_slope == pytest.approx(b.fit.lower_slope, abs=1e-9)
