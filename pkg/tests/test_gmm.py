import math

import numpy as np
import pytest
from scipy import stats

from yoasovi.errors import NumericError, ParseError
from yoasovi.gmm import (Dataset, GmmParams, GmmSpec, dic, load_csv,
                         log_joint, log_likelihood, log_prior, simulate)


def random_instance(rng, K=None, p=None, N=None):
    K = K or int(rng.integers(2, 4))
    p = p or int(rng.integers(1, 3))
    N = N or int(rng.integers(1, 9))
    spec = GmmSpec(K=K, p=p,
                   prior_mean_scale=float(rng.uniform(1.0, 10.0)),
                   prior_dirichlet_alpha=float(rng.uniform(0.5, 3.0)),
                   prior_logsd_scale=float(rng.uniform(0.5, 2.0)))
    w = rng.dirichlet(np.ones(K))
    params = GmmParams(weights=w,
                       means=rng.uniform(-3.0, 3.0, (K, p)),
                       sds=rng.uniform(0.3, 2.0, (K, p)))
    data = Dataset(rng.uniform(-3.0, 3.0, (N, p)))
    return spec, data, params


def oracle_log_joint(spec, data, params):
    """Brute force through scipy.stats, no shared code with the module:
    plain per-point mixture sums and textbook prior densities."""
    total = 0.0
    for y in data.values:
        dens = 0.0
        for k in range(spec.K):
            comp = 1.0
            for j in range(spec.p):
                comp *= stats.norm.pdf(y[j], params.means[k, j], params.sds[k, j])
            dens += params.weights[k] * comp
        total += math.log(dens)
    total += stats.dirichlet.logpdf(params.weights,
                                    np.full(spec.K, spec.prior_dirichlet_alpha))
    total += stats.norm.logpdf(params.means, 0.0, spec.prior_mean_scale).sum()
    total += stats.lognorm.logpdf(params.sds, s=spec.prior_logsd_scale).sum()
    return total


def test_log_joint_matches_brute_force_on_random_instances():
    rng = np.random.default_rng(314)
    for _ in range(50):
        spec, data, params = random_instance(rng)
        assert log_joint(spec, data, params) == pytest.approx(
            oracle_log_joint(spec, data, params), abs=1e-10)


def test_log_joint_single_point_single_component():
    # K=1, p=1: everything reduces to three normal densities and a flat
    # Dirichlet that contributes nothing
    spec = GmmSpec(K=1, p=1, prior_mean_scale=2.0, prior_dirichlet_alpha=1.0,
                   prior_logsd_scale=1.0)
    params = GmmParams(weights=np.array([1.0]), means=np.array([[0.5]]),
                       sds=np.array([[1.5]]))
    data = Dataset(np.array([[2.0]]))
    expected = (stats.norm.logpdf(2.0, 0.5, 1.5)
                + stats.norm.logpdf(0.5, 0.0, 2.0)
                + stats.norm.logpdf(math.log(1.5), 0.0, 1.0) - math.log(1.5))
    assert log_joint(spec, data, params) == pytest.approx(expected, abs=1e-12)


def test_log_joint_finite_in_extreme_corners():
    spec = GmmSpec(K=2, p=1)
    data = Dataset(np.array([[900.0], [-900.0], [0.0]]))
    for means, sds in [
        (np.array([[1e3], [-1e3]]), np.array([[1e-6], [1e-6]])),
        (np.array([[1e3], [1e3]]), np.array([[1e3], [1e-6]])),
        (np.array([[0.0], [0.0]]), np.array([[1e-6], [1e-6]])),
    ]:
        params = GmmParams(weights=np.array([0.5, 0.5]), means=means, sds=sds)
        assert math.isfinite(log_joint(spec, data, params))


def test_zero_weight_component_drops_out():
    spec = GmmSpec(K=2, p=1)
    data = Dataset(np.array([[0.3], [1.2]]))
    both = GmmParams(weights=np.array([1.0, 0.0]),
                     means=np.array([[0.0], [50.0]]), sds=np.array([[1.0], [1.0]]))
    assert math.isfinite(log_likelihood(spec, data, both))
    only = GmmParams(weights=np.array([1.0]), means=np.array([[0.0]]),
                     sds=np.array([[1.0]]))
    assert log_likelihood(spec, data, both) == pytest.approx(
        log_likelihood(GmmSpec(K=1, p=1), data, only), abs=1e-12)


def test_log_joint_raises_on_non_finite():
    spec = GmmSpec(K=1, p=1)
    params = GmmParams(weights=np.array([1.0]), means=np.array([[np.inf]]),
                       sds=np.array([[1.0]]))
    with pytest.raises(NumericError):
        log_joint(spec, Dataset(np.array([[0.0]])), params)


def test_n_unconstrained_count():
    assert GmmSpec(K=2, p=2).n_unconstrained == 9
    assert GmmSpec(K=3, p=2).n_unconstrained == 14
    assert GmmSpec(K=1, p=1).n_unconstrained == 2


def test_spec_and_params_validation():
    with pytest.raises(ValueError):
        GmmSpec(K=0, p=1)
    with pytest.raises(ValueError):
        GmmSpec(K=2, p=2, prior_mean_scale=-1.0)
    spec = GmmSpec(K=2, p=1)
    bad_simplex = GmmParams(weights=np.array([0.7, 0.7]),
                            means=np.zeros((2, 1)), sds=np.ones((2, 1)))
    with pytest.raises(ValueError):
        bad_simplex.validate(spec)
    bad_sd = GmmParams(weights=np.array([0.5, 0.5]),
                       means=np.zeros((2, 1)), sds=np.array([[1.0], [0.0]]))
    with pytest.raises(ValueError):
        bad_sd.validate(spec)


def test_dataset_rejects_non_finite_and_wrong_rank():
    with pytest.raises(ValueError):
        Dataset(np.array([[1.0], [np.nan]]))
    with pytest.raises(ValueError):
        Dataset(np.array([1.0, 2.0]))


# ---------------------------------------------------------------------------
# simulation

def test_simulate_shapes_and_determinism():
    spec = GmmSpec(K=2, p=3)
    true = GmmParams(weights=np.array([0.4, 0.6]),
                     means=np.array([[0.0] * 3, [5.0] * 3]),
                     sds=np.full((2, 3), 1.0))
    a = simulate(spec, true, N=200, seed=9)
    b = simulate(spec, true, N=200, seed=9)
    assert a.values.shape == (200, 3)
    np.testing.assert_array_equal(a.values, b.values)
    assert not np.array_equal(a.values, simulate(spec, true, N=200, seed=10).values)


def test_simulate_matches_mixture_at_scale():
    """Goodness of fit at N = 1e5: chi-square on component counts (clusters
    are far apart, so assignment by nearest mean is exact for all practical
    purposes) and moment checks per cluster, alpha = 0.001."""
    spec = GmmSpec(K=2, p=1)
    true = GmmParams(weights=np.array([0.3, 0.7]),
                     means=np.array([[-10.0], [10.0]]),
                     sds=np.array([[1.0], [2.0]]))
    data = simulate(spec, true, N=100_000, seed=77)
    y = data.values[:, 0]
    n_left = int(np.sum(y < 0))
    counts = np.array([n_left, y.size - n_left])
    res = stats.chisquare(counts, f_exp=y.size * true.weights)
    assert res.pvalue > 0.001
    left, right = y[y < 0], y[y >= 0]
    assert left.mean() == pytest.approx(-10.0, abs=0.05)
    assert right.mean() == pytest.approx(10.0, abs=0.05)
    assert left.std() == pytest.approx(1.0, abs=0.05)
    assert right.std() == pytest.approx(2.0, abs=0.05)


# ---------------------------------------------------------------------------
# CSV ingestion

def test_load_csv_plain_numeric(tmp_path):
    f = tmp_path / "obs.csv"
    f.write_text("1.0,2.0\n3.5,-4.0\n")
    data = load_csv(f)
    np.testing.assert_allclose(data.values, [[1.0, 2.0], [3.5, -4.0]])
    assert data.name == "obs"


def test_load_csv_detects_header(tmp_path):
    f = tmp_path / "h.csv"
    f.write_text("x,y\n1,2\n3,4\n")
    assert load_csv(f).values.shape == (2, 2)


def test_load_csv_drops_label_column(tmp_path):
    f = tmp_path / "lab.csv"
    f.write_text("x,species,y\n1.0,setosa,2.0\n3.0,virginica,4.0\n")
    data = load_csv(f, label_column="species")
    np.testing.assert_allclose(data.values, [[1.0, 2.0], [3.0, 4.0]])


def test_load_csv_label_without_header_fails(tmp_path):
    f = tmp_path / "nolab.csv"
    f.write_text("1.0,2.0\n")
    with pytest.raises(ParseError):
        load_csv(f, label_column="species")


def test_load_csv_reports_bad_cell_position(tmp_path):
    f = tmp_path / "bad.csv"
    f.write_text("x,y\n1.0,2.0\n3.0,oops\n")
    with pytest.raises(ParseError, match=r"row 3, column 2"):
        load_csv(f)


def test_load_csv_reports_ragged_row(tmp_path):
    f = tmp_path / "ragged.csv"
    f.write_text("1.0,2.0\n3.0\n")
    with pytest.raises(ParseError, match=r"row 2"):
        load_csv(f)


def test_load_csv_empty_file(tmp_path):
    f = tmp_path / "empty.csv"
    f.write_text("")
    with pytest.raises(ParseError):
        load_csv(f)


# ---------------------------------------------------------------------------
# DIC

def test_dic_needs_two_draws():
    spec = GmmSpec(K=1, p=1)
    draw = GmmParams(weights=np.array([1.0]), means=np.array([[0.0]]),
                     sds=np.array([[1.0]]))
    with pytest.raises(ValueError):
        dic(spec, Dataset(np.array([[0.0]])), [draw])


def test_dic_two_draw_hand_computation():
    """K=1, p=1, two observations, two draws; every number written out."""
    spec = GmmSpec(K=1, p=1)
    data = Dataset(np.array([[0.5], [-0.5]]))
    d1 = GmmParams(weights=np.array([1.0]), means=np.array([[0.0]]), sds=np.array([[1.0]]))
    d2 = GmmParams(weights=np.array([1.0]), means=np.array([[1.0]]), sds=np.array([[2.0]]))

    def loglik(m, s):
        return sum(-0.5 * math.log(2.0 * math.pi * s * s) - (y - m) ** 2 / (2 * s * s)
                   for y in (0.5, -0.5))

    d_bar = 0.5 * (-2.0 * loglik(0.0, 1.0) + -2.0 * loglik(1.0, 2.0))
    d_at_mean = -2.0 * loglik(0.5, 1.5)
    assert dic(spec, data, [d1, d2]) == pytest.approx(2.0 * d_bar - d_at_mean, abs=1e-8)


def test_dic_degenerate_posterior_has_no_parameter_penalty():
    # identical draws: p_D = 0, so DIC is just the common deviance
    spec = GmmSpec(K=1, p=1)
    data = Dataset(np.array([[1.0], [2.0], [0.0]]))
    draw = GmmParams(weights=np.array([1.0]), means=np.array([[1.0]]), sds=np.array([[1.0]]))
    expected = -2.0 * log_likelihood(spec, data, draw)
    assert dic(spec, data, [draw, draw, draw]) == pytest.approx(expected, abs=1e-12)


def test_log_prior_dirichlet_normalizer_present():
    # alpha != 1 exercises the lgamma terms
    spec = GmmSpec(K=3, p=1, prior_dirichlet_alpha=2.5)
    params = GmmParams(weights=np.array([0.2, 0.3, 0.5]),
                       means=np.zeros((3, 1)), sds=np.ones((3, 1)))
    got = log_prior(spec, params)
    want = (stats.dirichlet.logpdf(params.weights, [2.5, 2.5, 2.5])
            + stats.norm.logpdf(0.0, 0.0, spec.prior_mean_scale) * 3
            + stats.lognorm.logpdf(1.0, s=1.0) * 3)
    assert got == pytest.approx(want, abs=1e-12)
