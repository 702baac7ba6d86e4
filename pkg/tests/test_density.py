import math

import numpy as np
import pytest

import circneedlets as cn
from circneedlets.errors import ConfigurationError, InsufficientPilotError

B13 = cn.NeedletParams(B=1.3, s=3)
UNIFORM = cn.uniform_density()
VM2 = cn.von_mises_density(2.0)


# --- threshold configuration ---------------------------------------------------

def test_tau_n_formula():
    cfg = cn.threshold_config(2000, 1.3)
    assert cfg.tau_n == pytest.approx(math.sqrt(math.log(2000) / 2000), rel=1e-15)


def test_cutoff_level_formula():
    for n in (500, 2000, 100_000):
        cfg = cn.threshold_config(n, 1.3)
        target = math.log(math.sqrt(n / math.log(n))) / math.log(1.3)
        assert cfg.Jn == math.floor(target)
        assert 1.3 ** cfg.Jn <= math.sqrt(n / math.log(n))


def test_cutoff_rate_bounded_by_inverse_sqrt_log():
    # at the plug-in cut-off the theoretical rate is O((log n)^{-1/2}):
    # (B^-Jn n)^{-1/2} = (n log n)^{-1/4} * B^{frac/2} <= (log n)^{-1/2}
    for n in (1000, 10_000, 100_000):
        cfg = cn.threshold_config(n, 1.3)
        rate, _ = cn.theoretical_rate(cfg.Jn, float(n), 1.3)
        assert rate <= math.log(n) ** -0.5
        exact = (1.3 ** float(-cfg.Jn) * n) ** -0.5
        assert rate == pytest.approx(exact, rel=1e-12)


def test_threshold_config_validation():
    with pytest.raises(ConfigurationError):
        cn.threshold_config(20, 1.3, J0=12)  # Jn < J0
    with pytest.raises(ConfigurationError):
        cn.threshold_config(2000, 1.3, kappa=0.0)


# --- empirical coefficients ------------------------------------------------------

def test_empirical_coefficient_single_point():
    spec = cn.needlet_spec(B13, 8, 1.0)
    s = cn.PointSample(points=np.array([1.0]), n=1, kind="iid-fixed-n")
    assert cn.empirical_coefficient(spec, s) == pytest.approx(
        cn.evaluate_needlet(spec, 1.0), rel=1e-14
    )


def test_empirical_coefficient_empty_sample():
    spec = cn.needlet_spec(B13, 8, 1.0)
    with pytest.raises(ValueError):
        cn.empirical_coefficient(spec, cn.PointSample(np.empty(0), 0, "iid-fixed-n"))


def test_empirical_coefficient_uniform_null_band():
    # population value is zero; 4 sigma / sqrt(n) bounds 99% of cells
    n = 100_000
    sample = cn.sample_iid(UNIFORM, n, seed=6)
    within = 0
    total = 0
    for j in (4, 6, 8):
        part = cn.make_partition(B13, j)
        for q in range(1, part.Q + 1):
            spec = part.needlet(B13, q)
            m = cn.population_moments(spec, UNIFORM)
            beta = cn.empirical_coefficient(spec, sample)
            total += 1
            if abs(beta) < 4.0 * m.sigma / math.sqrt(n):
                within += 1
    assert within / total >= 0.99


def test_empirical_coefficient_mode_arc_dominates_antipodal():
    # compared in magnitude at levels whose frequency band overlaps the
    # von Mises(4) spectrum; the signed population value at the mode arc is
    # negative there (the needlet oscillates against the off-centre bump)
    from circneedlets.density import level_coefficients

    vm4 = cn.von_mises_density(4.0)
    reps = 200
    for j, n in ((4, 20_000), (6, 50_000)):
        part = cn.make_partition(B13, j)
        dist = cn.circular_distance(part.centers, 0.0)
        q_mode = int(np.argmin(dist))
        q_anti = int(np.argmax(dist))
        wins = 0
        for r in range(reps):
            sample = cn.sample_iid(vm4, n, seed=0, rng=cn.derive_rng(31, j, r))
            betas = level_coefficients(B13, j, sample)
            if abs(betas[q_mode]) > abs(betas[q_anti]):
                wins += 1
        assert wins >= 0.95 * reps


# --- estimator -------------------------------------------------------------------

def test_infinite_threshold_gives_flat_estimate():
    sample = cn.sample_iid(VM2, 500, seed=3)
    cfg = cn.threshold_config(500, 1.3, kappa=1e9)
    est = cn.estimate_density(sample, B13, cfg)
    assert len(est.coefficients) == 0
    grid = np.linspace(0, 2 * math.pi, 64)
    assert np.allclose(est(grid), 1.0)


def test_uniform_estimate_stays_near_flat():
    cfg = cn.threshold_config(2000, 1.3, kappa=2.0)
    grid = cn.quadrature_grid(2048)
    passes = 0
    reps = 100
    for r in range(reps):
        sample = cn.sample_iid(UNIFORM, 2000, seed=0, rng=cn.derive_rng(777, r))
        est = cn.estimate_density(sample, B13, cfg)
        dev = float(np.max(np.abs(est(grid) - 1.0))) if est.coefficients else 0.0
        if dev < 0.1:
            passes += 1
    assert passes >= 90


def test_threshold_monotonicity():
    sample = cn.sample_iid(VM2, 2000, seed=9)
    keep = {}
    for kappa in (1.0, 2.0):
        cfg = cn.threshold_config(2000, 1.3, kappa=kappa)
        est = cn.estimate_density(sample, B13, cfg)
        keep[kappa] = {(j, q) for j, q, _ in est.coefficients}
    assert keep[2.0] <= keep[1.0]


def test_estimator_linearity_in_survivors():
    sample = cn.sample_iid(VM2, 2000, seed=10)
    cfg = cn.threshold_config(2000, 1.3, kappa=2.0)
    est = cn.estimate_density(sample, B13, cfg)
    assert len(est.coefficients) > 0
    rng = np.random.default_rng(0)
    theta = rng.uniform(0, 2 * math.pi, 100)
    manual = np.ones_like(theta)
    for (j, q, beta), spec in zip(est.coefficients, est.specs):
        manual += beta * cn.evaluate_needlet(spec, theta) / B13.lambda_Bs
    assert np.max(np.abs(manual - est(theta))) < 1e-10


def test_mass_conservation():
    # needlets are mean-free, so the estimate integrates to one exactly
    grid = cn.quadrature_grid(4096)
    for r in range(10):
        sample = cn.sample_iid(VM2, 2000, seed=0, rng=cn.derive_rng(55, r))
        est = cn.estimate_density(sample, B13, cn.threshold_config(2000, 1.3))
        assert abs(np.mean(est(grid)) - 1.0) < 1e-10


def test_vm2_estimation_beats_constant():
    cfg = cn.threshold_config(2000, 1.3, J0=2, kappa=2.0)
    const_mise = cn.mise(lambda th: np.ones_like(np.asarray(th)), VM2)
    vals = []
    for r in range(20):
        sample = cn.sample_iid(VM2, 2000, seed=0, rng=cn.derive_rng(66, r))
        est = cn.estimate_density(sample, B13, cfg)
        vals.append(cn.mise(est, VM2))
    assert np.median(vals) < const_mise


def test_mise_improves_with_sample_size():
    # J0 = 2 skips the Q <= 2 levels whose aliasing otherwise masks the gain
    cfg_small = cn.threshold_config(500, 1.3, J0=2, kappa=2.0)
    cfg_large = cn.threshold_config(5000, 1.3, J0=2, kappa=2.0)
    small, large = [], []
    for r in range(100):
        s1 = cn.sample_iid(VM2, 500, seed=0, rng=cn.derive_rng(88, 500, r))
        s2 = cn.sample_iid(VM2, 5000, seed=0, rng=cn.derive_rng(88, 5000, r))
        small.append(cn.mise(cn.estimate_density(s1, B13, cfg_small), VM2))
        large.append(cn.mise(cn.estimate_density(s2, B13, cfg_large), VM2))
    assert np.median(large) < np.median(small)


# --- MISE -------------------------------------------------------------------------

def test_mise_zero_for_truth():
    assert cn.mise(VM2.pdf, VM2) == pytest.approx(0.0, abs=1e-14)


def test_mise_constant_against_von_mises():
    # int (1 - F)^2 drho = I0(2 kappa)/I0(kappa)^2 - 1
    from scipy import special

    expected = special.i0(4.0) / special.i0(2.0) ** 2 - 1.0
    got = cn.mise(lambda th: np.ones_like(np.asarray(th)), VM2)
    assert got == pytest.approx(expected, rel=1e-10)


# --- plug-in kappa -----------------------------------------------------------------

def _pilot(values, j=5):
    return cn.CoefficientSample(
        values=np.asarray(values)[:, None], config={"j": j}, kind="poissonized"
    )


def test_plugin_kappa_standard_normal_pilot():
    from scipy import special

    qs = special.ndtri((np.arange(1, 2001) - 0.5) / 2000)
    kappa = cn.plugin_kappa([_pilot(qs)], 5, tau_n=1.0)
    assert kappa == pytest.approx(2.807, abs=0.02)


def test_plugin_kappa_scale_equivariance():
    rng = np.random.default_rng(2)
    base = rng.normal(size=5000)
    k1 = cn.plugin_kappa([_pilot(base)], 5, tau_n=1.0)
    k2 = cn.plugin_kappa([_pilot(base * math.sqrt(2))], 5, tau_n=1.0)
    assert k2 == pytest.approx(k1 * math.sqrt(2), rel=1e-6)


def test_plugin_kappa_tau_scaling():
    rng = np.random.default_rng(3)
    base = rng.normal(size=1000)
    tau_a = math.sqrt(math.log(1000) / 1000)
    tau_b = math.sqrt(math.log(4000) / 4000)
    ka = cn.plugin_kappa([_pilot(base)], 5, tau_n=tau_a)
    kb = cn.plugin_kappa([_pilot(base)], 5, tau_n=tau_b)
    # kappa rescales with 1/tau_n, so kappa*tau is invariant under n changes
    assert ka * tau_a == pytest.approx(kb * tau_b, rel=1e-12)


def test_plugin_kappa_needs_enough_pilots():
    with pytest.raises(InsufficientPilotError):
        cn.plugin_kappa([_pilot(np.arange(10.0))], 5, tau_n=0.1)


def test_plugin_kappa_filters_levels():
    rng = np.random.default_rng(4)
    good = _pilot(rng.normal(size=200), j=5)
    other = _pilot(rng.normal(size=200) * 100, j=7)
    kappa = cn.plugin_kappa([good, other], 5, tau_n=1.0)
    assert kappa < 5.0  # the j=7 pilot was excluded
