import math

import numpy as np
import pytest

import circneedlets as cn

B13 = cn.NeedletParams(B=1.3, s=3)
UNIFORM = cn.uniform_density()


def moments_at(j, center, density=UNIFORM):
    return cn.population_moments(cn.needlet_spec(B13, j, center), density)


# --- univariate bound -----------------------------------------------------------

def test_wasserstein_rhs_intensity_scaling():
    m = moments_at(10, math.pi)
    v1 = cn.wasserstein_rhs(m, UNIFORM, 500.0)
    v4 = cn.wasserstein_rhs(m, UNIFORM, 2000.0)
    assert v4 == pytest.approx(v1 / 2.0, rel=1e-10)


def test_wasserstein_rhs_positive_and_level_slope():
    vals = []
    js = range(6, 15)
    for j in js:
        v = cn.wasserstein_rhs(moments_at(j, math.pi), UNIFORM, 500.0)
        assert v > 0
        vals.append(math.log(v))
    slope = np.polyfit(list(js), vals, 1)[0]
    assert slope == pytest.approx(0.5 * math.log(1.3), rel=0.02)


def test_normalization_residual_vanishes():
    m = moments_at(9, 1.0)
    grid = cn.quadrature_grid(8192)
    psi = cn.evaluate_needlet(m.spec, grid)
    residual = abs(1.0 - np.mean(psi * psi) / m.sigma2)
    assert residual < 1e-8


# --- multivariate bound ----------------------------------------------------------

def test_d2_far_separated_centers():
    moments = [moments_at(10, math.pi), moments_at(10, 0.0)]
    rep = cn.d2_rhs(moments, UNIFORM, 500.0)
    assert rep.covariance_hs_term < 1e-6
    assert rep.d2_rhs == pytest.approx(
        math.sqrt(2 * math.pi) / 8.0 * rep.triple_term, rel=1e-4
    )


def test_d2_decomposition_identity():
    spacing = 2 * math.pi * 1.3 ** -10
    moments = [moments_at(10, math.pi + i * spacing) for i in range(3)]
    rep = cn.d2_rhs(moments, UNIFORM, 300.0)
    assert rep.d2_rhs == pytest.approx(
        rep.covariance_hs_term + math.sqrt(2 * math.pi) / 8.0 * rep.triple_term,
        abs=1e-12,
    )


def test_triple_term_doubling_dimension():
    def equispaced(d):
        return [moments_at(10, 2 * math.pi * i / d) for i in range(d)]

    t4 = cn.d2_rhs(equispaced(4), UNIFORM, 500.0).triple_term
    t8 = cn.d2_rhs(equispaced(8), UNIFORM, 500.0).triple_term
    assert t8 <= 2.0 * t4 * 1.10
    assert t8 >= 2.0 * t4 * 0.90


def test_triple_term_matches_direct_quadrature():
    spacing = 2 * math.pi * 1.3 ** -10
    moments = [moments_at(10, math.pi + i * spacing) for i in range(2)]
    R_t = 400.0
    n_quad = max(8192, 8 * moments[0].spec.k_max)
    rep = cn.d2_rhs(moments, UNIFORM, R_t, n_quad=n_quad)
    grid = cn.quadrature_grid(n_quad)
    habs = [
        np.abs(cn.evaluate_needlet(m.spec, grid)) / (math.sqrt(R_t) * m.sigma)
        for m in moments
    ]
    direct = 0.0
    for a in habs:
        for b in habs:
            for c in habs:
                direct += R_t * np.mean(a * b * c)
    assert rep.triple_term == pytest.approx(direct, rel=1e-10)


def test_d1_reduction_to_univariate_integral():
    m = moments_at(10, math.pi)
    R_t = 500.0
    rep = cn.d2_rhs([m], UNIFORM, R_t)
    # the d = 1 triple term equals the cubic integral of the univariate bound
    assert rep.triple_term == pytest.approx(rep.wasserstein_rhs, rel=1e-8)


# --- rates -----------------------------------------------------------------------

def test_theoretical_rate_unit_effective_sample():
    # choose R_t = B^j so the effective sample size is exactly one
    j = 7
    uni, multi = cn.theoretical_rate(j, 1.3 ** j, 1.3, d=3)
    assert uni == pytest.approx(1.0, rel=1e-12)
    assert multi == pytest.approx(3.0, rel=1e-12)


def test_theoretical_rate_quadrupling():
    uni1, _ = cn.theoretical_rate(10, 500.0, 1.3)
    uni4, _ = cn.theoretical_rate(10, 2000.0, 1.3)
    assert uni4 == pytest.approx(uni1 / 2.0, rel=1e-12)


def test_effective_sample_size_counting():
    # expected points within B^-j of the centre sits in the [M0, Minf] band
    vm = cn.von_mises_density(2.0)
    j, R_t, center = 6, 2000.0, 1.0
    radius = 1.3 ** -j
    reps = 400
    counts = np.empty(reps)
    for r in range(reps):
        rng = cn.derive_rng(123, r)
        n = int(rng.poisson(R_t))
        pts = cn.fields._rejection_sample(rng, vm, n)
        counts[r] = np.sum(cn.circular_distance(pts, center) <= radius)
    arc_measure = 2 * radius / (2 * math.pi)
    lo = vm.M0 * R_t * arc_measure
    hi = vm.Minf * R_t * arc_measure
    se = counts.std() / math.sqrt(reps)
    assert counts.mean() > lo - 4 * se
    assert counts.mean() < hi + 4 * se
    assert cn.effective_sample_size(j, R_t, 1.3) == pytest.approx(R_t * 1.3 ** -j)


# --- covariance envelope ------------------------------------------------------------

def test_envelope_at_zero():
    assert cn.covariance_envelope(10, 1.3, 3, 0.0) == 1.0


def test_envelope_eventually_decreasing():
    deltas = np.linspace(0.3, 3.0, 200)
    vals = cn.covariance_envelope(4, 1.3, 3, deltas)
    tail = vals[100:]
    assert np.all(np.diff(tail) < 0)


def test_envelope_bounds_exact_covariance_uniformly_in_level():
    # centres scaled with B^-j keep B^j * separation fixed, the regime the
    # decay lemma addresses; the fitted constant must not grow with level
    ratios = {}
    for j in (8, 12, 16):
        spacing = 2 * math.pi * 1.3 ** float(-j)
        moments = [moments_at(j, math.pi + i * spacing) for i in range(3)]
        cov = cn.exact_covariance(moments, UNIFORM).entries
        worst = 0.0
        for a in range(3):
            for b in range(a + 1, 3):
                delta = cn.circular_distance(moments[a].spec.center, moments[b].spec.center)
                env = cn.covariance_envelope(j, 1.3, 3, float(delta))
                worst = max(worst, abs(cov[a, b]) / env)
        ratios[j] = worst
    assert ratios[16] <= ratios[8] * 1.10
    assert ratios[12] <= ratios[8] * 1.10


def test_remark_gaussian_dominates_inverse_polynomial():
    # (1 + y^{2s}) e^{-y^2} <= C (1 + y)^{-tau} for some moderate C, tau > s
    s, tau = 3, 4
    y = np.linspace(0.0, 40.0, 4001)
    lhs = (1 + y ** (2 * s)) * np.exp(-y * y)
    fitted = np.max(lhs * (1 + y) ** tau)
    assert np.isfinite(fitted)
    assert fitted < 1e3


# --- bound validity against simulation ----------------------------------------------

@pytest.mark.parametrize("j,R_t", [(8, 500.0), (10, 2000.0)])
def test_univariate_bound_dominates_empirical_w1(j, R_t):
    samp = cn.sample_cell(B13, j, UNIFORM, R_t, 500, seed=17)
    w1 = cn.empirical_wasserstein_normal(samp.column(0))
    rhs = cn.wasserstein_rhs(moments_at(j, math.pi), UNIFORM, R_t)
    assert w1 <= rhs + 4.0 / math.sqrt(500)


def test_bound_report_serialization():
    moments = [moments_at(8, 1.0), moments_at(8, 2.0)]
    rep = cn.d2_rhs(moments, UNIFORM, 100.0)
    d = rep.to_dict()
    assert set(d) == {
        "config", "wasserstein_rhs", "rate_term", "d2_rhs",
        "covariance_hs_term", "triple_term",
    }
    assert d["config"]["d"] == 2
