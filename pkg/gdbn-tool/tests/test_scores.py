from collections import defaultdict

import numpy as np
import pytest
from scipy import integrate, stats

from src.constants import EquivalenceModes
from src.cpdag import brute_force_class, dag_to_cpdag
from src.dataio import TimeSeriesData, to_augmented
from src.exc import DegenerateMatrixException, ScoreDomainException, ValidationException
from src.graphs import AugmentedGraph, DynamicGraph, StaticDag, enumerate_dags, enumerate_dynamic_graphs
from src.scores import (
    BgeHyper,
    BgeScorer,
    DesignMatrix,
    EbgeHyper,
    RegressionPrior,
    RegressionSystem,
    ScatterStats,
    bge_complete_logml,
    bge_dag_logml,
    cholesky_pd,
    ebge_logml,
    ebge_subset_logml,
    log_multigamma,
    mbge_beta_fcd_params,
    mbge_dynamic_logml,
    mbge_residuals,
    mbge_static_logml,
)


def normal_gamma_evidence_ratio(y: np.ndarray, h: BgeHyper) -> float:
    """
    Integrate the univariate Normal-Gamma model numerically, scaled by the closed-form evidence. Returns ~1.
    """

    target = bge_complete_logml(y.reshape(-1, 1), h)
    alpha, r, nu, alpha_mu = h.alpha_w, float(h.r[0, 0]), float(h.nu[0]), h.alpha_mu
    count, mean = y.size, float(y.mean())
    centre = (alpha_mu * nu + count * mean) / (alpha_mu + count)
    shape = (alpha + count) / 2
    rate = (r + float(ScatterStats.from_data(y.reshape(-1, 1)).posterior_scatter(h)[0, 0])) / 2

    def integrand(mu: float, w: float) -> float:
        log_density = (
            stats.norm.logpdf(y, mu, 1 / np.sqrt(w)).sum()
            + stats.norm.logpdf(mu, nu, 1 / np.sqrt(alpha_mu * w))
            + stats.gamma.logpdf(w, a=alpha / 2, scale=2 / r)
        )
        return float(np.exp(log_density - target))

    def width(w: float) -> float:
        return 12 / np.sqrt(w * (alpha_mu + count))

    value, _ = integrate.dblquad(
        integrand,
        0.0,
        (shape + 15 * np.sqrt(shape) + 20) / rate,
        lambda w: centre - width(w),
        lambda w: centre + width(w),
        epsabs=1e-11,
        epsrel=1e-10,
    )
    return value


@pytest.fixture()
def correlated_data(rng):
    mixing = np.array([[1.0, 0.0, 0.0, 0.0], [0.8, 1.0, 0.0, 0.0], [0.0, -0.6, 1.0, 0.0], [0.4, 0.0, 0.7, 1.0]])
    yield [rng.standard_normal((30, 4)) @ mixing.T for _ in range(20)]


# region test linear algebra and hyperparameters


def test_log_multigamma_domain():
    assert log_multigamma(0, 0.1) == 0.0
    with pytest.raises(ScoreDomainException):
        log_multigamma(2, 0.4)


@pytest.mark.parametrize(
    "matrix",
    [np.array([[1.0, 1.0], [1.0, 1.0]]), np.array([[1.0, 2.0], [2.0, 1.0]]), np.array([[np.nan, 0.0], [0.0, 1.0]])],
    ids=["singular", "indefinite", "non-finite"],
)
def test_cholesky_pd_rejects_degenerate(matrix):
    with pytest.raises(DegenerateMatrixException):
        cholesky_pd(matrix, "test")


def test_bge_hyper_validation():
    with pytest.raises(ScoreDomainException):
        BgeHyper(alpha_w=1.0, r=np.eye(2), nu=np.zeros(2))
    with pytest.raises(ScoreDomainException):
        BgeHyper(alpha_w=4.0, r=np.eye(2), nu=np.zeros(2), alpha_mu=0.0)
    with pytest.raises(DegenerateMatrixException):
        BgeHyper(alpha_w=4.0, r=[[1.0, 2.0], [2.0, 1.0]], nu=np.zeros(2))
    with pytest.raises(ValidationException):
        BgeHyper(alpha_w=4.0, r=[[1.0, 0.5], [0.0, 1.0]], nu=np.zeros(2))
    with pytest.raises(ValidationException):
        BgeHyper(alpha_w=4.0, r=np.eye(2), nu=np.zeros(3))
    with pytest.raises(ValidationException):
        EbgeHyper(alpha_w=5.0, r=np.eye(3), nu=np.zeros(3))
    with pytest.raises(ScoreDomainException):
        RegressionPrior(lambda2=0.0)


def test_default_hyperparameters():
    h = EbgeHyper.default(3)
    assert h.dim == 6 and h.n == 3 and h.alpha_w == 8
    assert BgeHyper.default(3).alpha_w == 5


# endregion

# region test sufficient statistics


def test_scatter_stats_incremental(rng):
    values = rng.standard_normal((12, 3))
    full = ScatterStats.from_data(values)
    grown = ScatterStats.from_data(values[:-1]).with_row(values[-1])
    assert grown.count == full.count
    assert np.allclose(grown.mean, full.mean) and np.allclose(grown.centred, full.centred)
    extra = rng.standard_normal(3)
    restored = full.with_row(extra).with_row(extra).without_row(extra)
    assert np.allclose(restored.centred, full.with_row(extra).centred)
    assert np.allclose(full.raw, values.T @ values)


def test_scatter_stats_empty():
    empty = ScatterStats.from_data(np.zeros((0, 2)))
    assert empty.count == 0
    single = empty.with_row(np.array([1.0, 2.0]))
    assert np.allclose(single.mean, [1.0, 2.0]) and np.allclose(single.centred, 0.0)
    assert single.without_row(np.array([1.0, 2.0])).count == 0
    with pytest.raises(ValidationException):
        empty.without_row(np.array([1.0, 2.0]))


# endregion

# region test BGe scores


@pytest.mark.parametrize("seed", range(10))
def test_univariate_bge_matches_quadrature(seed):
    rng = np.random.default_rng(seed)
    y = rng.normal(rng.normal(), rng.uniform(0.5, 2.0), size=int(rng.integers(3, 9)))
    h = BgeHyper(
        alpha_w=rng.uniform(1.5, 5.0), r=[[rng.uniform(0.5, 2.0)]], nu=[rng.normal()], alpha_mu=rng.uniform(0.5, 3)
    )
    assert normal_gamma_evidence_ratio(y, h) == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("seed", range(4))
def test_ebge_singleton_matches_quadrature(seed):
    rng = np.random.default_rng(100 + seed)
    aug = to_augmented(TimeSeriesData(values=rng.standard_normal((7, 1))))
    h = EbgeHyper(alpha_w=rng.uniform(2.5, 5.0), r=np.diag(rng.uniform(0.5, 2.0, size=2)), nu=rng.normal(size=2))
    for k in range(2):
        univariate = BgeHyper(alpha_w=h.alpha_w - 1, r=[[h.r[k, k]]], nu=[h.nu[k]], alpha_mu=h.alpha_mu)
        column = aug.values[:, k]
        assert ebge_subset_logml(aug, [k], h) == pytest.approx(bge_complete_logml(column.reshape(-1, 1), univariate))
        assert normal_gamma_evidence_ratio(column, univariate) == pytest.approx(1.0, abs=1e-6)


def test_univariate_predictive_is_student_t(rng):
    y = rng.normal(0.3, 1.4, size=6).reshape(-1, 1)
    h = BgeHyper(alpha_w=3.0, r=[[1.5]], nu=[0.2], alpha_mu=2.0)
    count = y.shape[0]
    scatter = ScatterStats.from_data(y).posterior_scatter(h)[0, 0]
    loc = (h.alpha_mu * h.nu[0] + count * y.mean()) / (h.alpha_mu + count)
    scale2 = (h.r[0, 0] + scatter) * (h.alpha_mu + count + 1) / ((h.alpha_mu + count) * (h.alpha_w + count))
    for z in (-2.0, 0.0, 0.7, 3.5):
        ratio = bge_complete_logml(np.vstack([y, [[z]]]), h) - bge_complete_logml(y, h)
        expected = stats.t.logpdf(z, df=h.alpha_w + count, loc=loc, scale=np.sqrt(scale2))
        assert ratio == pytest.approx(expected, abs=1e-9)


def test_bge_score_equivalence(correlated_data):
    classes = defaultdict(list)
    for dag in enumerate_dags(4):
        classes[dag_to_cpdag(dag)].append(dag)
    assert len(classes) == 185
    h = BgeHyper.default(4)
    for data in correlated_data:
        scorer = BgeScorer.from_data(data, h)
        for members in classes.values():
            scores = [scorer.dag_logml(dag) for dag in members]
            assert max(scores) - min(scores) < 1e-8


def test_bge_complete_dag_is_complete_subset(correlated_data):
    h = BgeHyper.default(4)
    complete = StaticDag(n=4, edges=[(a, b) for a in range(4) for b in range(a + 1, 4)])
    data = correlated_data[0]
    assert bge_dag_logml(data, complete, h) == pytest.approx(bge_complete_logml(data, h), abs=1e-9)


def test_bge_scorer_rejects_foreign_subset():
    scorer = BgeScorer.from_data(np.zeros((3, 2)) + np.arange(3).reshape(-1, 1), BgeHyper.default(2))
    with pytest.raises(ValidationException):
        scorer.subset_logml([2])


def test_ebge_score_equivalence_on_time_series_classes(rng):
    classes = []
    assigned = set()
    for g in enumerate_dags(3):
        for gd in enumerate_dynamic_graphs(3):
            if AugmentedGraph(g=g, gd=gd) not in assigned:
                members = brute_force_class(g, gd, EquivalenceModes.ts)
                classes.append(sorted(members, key=lambda m: sorted(m.g.edges)))
                assigned |= members
    assert len(assigned) == 25 * 64

    h = EbgeHyper.default(3)
    for _ in range(5):
        aug = to_augmented(TimeSeriesData(values=rng.standard_normal((25, 3)).cumsum(axis=0) * 0.3))
        scorer = BgeScorer.from_data(aug.values, h)
        representatives = []
        for members in classes:
            scores = [scorer.augmented_logml(m.g, m.gd) for m in members]
            assert max(scores) - min(scores) < 1e-8
            representatives.append(scores[0])
        assert np.min(np.diff(np.sort(representatives))) > 1e-8


def test_ebge_distinguishes_static_direction_with_dynamic_parent(rng):
    aug = to_augmented(TimeSeriesData(values=rng.standard_normal((30, 3))))
    h = EbgeHyper.default(3)
    gd = DynamicGraph(n=3, edges=[(2, 1)], allow_self_loops=False)
    forward = ebge_logml(aug, StaticDag(n=3, edges=[(0, 1)]), gd, h)
    backward = ebge_logml(aug, StaticDag(n=3, edges=[(1, 0)]), gd, h)
    assert abs(forward - backward) > 1e-6


def test_ebge_ignores_direction_with_shared_dynamic_parent(rng):
    aug = to_augmented(TimeSeriesData(values=rng.standard_normal((30, 3))))
    h = EbgeHyper.default(3)
    gd = DynamicGraph(n=3, edges=[(2, 0), (2, 1)], allow_self_loops=False)
    forward = ebge_logml(aug, StaticDag(n=3, edges=[(0, 1)]), gd, h)
    backward = ebge_logml(aug, StaticDag(n=3, edges=[(1, 0)]), gd, h)
    assert forward == pytest.approx(backward, abs=1e-8)


# endregion

# region test mBGe scores


def test_design_matrix_layout(rng):
    gd = DynamicGraph(n=2, edges=[(1, 0)])
    design = DesignMatrix(gd)
    assert design.layout() == [(0, None), (0, 1), (1, None)]
    assert design.kappa == 3 and design.offsets == [0, 2]
    aug = to_augmented(TimeSeriesData(values=rng.standard_normal((5, 2))))
    beta = np.array([0.5, -1.5, 2.0])
    residuals = mbge_residuals(aug, gd, beta)
    assert np.allclose(residuals[:, 0], aug.current[:, 0] - 0.5 + 1.5 * aug.lagged[:, 1])
    assert np.allclose(residuals[:, 1], aug.current[:, 1] - 2.0)
    with pytest.raises(ValidationException):
        mbge_residuals(aug, gd, np.zeros(2))


def test_zero_mean_bge_is_score_equivalent(rng):
    residuals = rng.standard_normal((15, 2)) @ np.array([[1.0, 0.0], [0.6, 1.0]])
    h = BgeHyper.default(2)
    forward = mbge_static_logml(residuals, StaticDag(n=2, edges=[(0, 1)]), h)
    backward = mbge_static_logml(residuals, StaticDag(n=2, edges=[(1, 0)]), h)
    assert forward == pytest.approx(backward, abs=1e-9)
    assert BgeScorer.zero_mean(residuals, h).posterior == pytest.approx(h.r + residuals.T @ residuals)


@pytest.fixture()
def regression_case(rng):
    aug = to_augmented(TimeSeriesData(values=rng.standard_normal((6, 2))))
    gd = DynamicGraph(n=2, edges=[(0, 1), (1, 0), (1, 1)])
    sigma = np.array([[1.5, 0.3], [0.3, 0.8]])
    yield aug, gd, sigma, RegressionPrior(lambda2=0.7)


def test_dynamic_marginal_matches_dense_gaussian(regression_case):
    aug, gd, sigma, prior = regression_case
    dense = DesignMatrix(gd).dense(aug)
    covariance = np.kron(np.eye(aug.rows), sigma) + prior.lambda2 * dense @ dense.T
    expected = stats.multivariate_normal.logpdf(aug.current.ravel(), mean=np.zeros(dense.shape[0]), cov=covariance)
    assert mbge_dynamic_logml(aug, gd, sigma, prior) == pytest.approx(expected, abs=1e-8)


def test_beta_full_conditional_matches_dense_formula(regression_case):
    aug, gd, sigma, prior = regression_case
    dense = DesignMatrix(gd).dense(aug)
    precision = np.kron(np.eye(aug.rows), np.linalg.inv(sigma))
    capacitance = np.eye(dense.shape[1]) / prior.lambda2 + dense.T @ precision @ dense
    covariance = np.linalg.inv(capacitance)
    mean, cov = mbge_beta_fcd_params(aug, gd, sigma, prior)
    assert np.allclose(mean, covariance @ dense.T @ precision @ aug.current.ravel())
    assert np.allclose(cov, covariance)


def test_dynamic_marginal_matches_prior_monte_carlo(rng):
    aug = to_augmented(TimeSeriesData(values=rng.standard_normal((4, 2)) * 0.8))
    gd = DynamicGraph(n=2, edges=[(0, 1), (1, 0)])
    sigma = np.array([[1.0, 0.4], [0.4, 1.2]])
    prior = RegressionPrior(lambda2=1.0)
    design = DesignMatrix(gd)
    features, indicator = design.features(aug), design.indicator
    precision = np.linalg.inv(sigma)
    log_norm = -0.5 * aug.rows * (2 * np.log(2 * np.pi) + np.linalg.slogdet(sigma)[1])

    likelihoods = []
    for _ in range(10):
        beta = rng.normal(0.0, np.sqrt(prior.lambda2), size=(100_000, design.kappa))
        means = np.einsum("tc,dc,cn->dtn", features, beta, indicator)
        residuals = aug.current[None, :, :] - means
        quadratic = np.einsum("dti,ij,dtj->d", residuals, precision, residuals)
        likelihoods.append(np.exp(log_norm - 0.5 * quadratic))
    likelihoods = np.concatenate(likelihoods)
    estimate = likelihoods.mean()
    error = likelihoods.std(ddof=1) / np.sqrt(likelihoods.size)
    exact = np.exp(mbge_dynamic_logml(aug, gd, sigma, prior))
    assert abs(estimate - exact) < 3 * error


def test_regression_system_draws_follow_full_conditional(regression_case, rng):
    aug, gd, sigma, prior = regression_case
    system = RegressionSystem.build(aug, gd, sigma, prior)
    draws = np.array([system.draw(rng) for _ in range(20_000)])
    assert np.allclose(draws.mean(axis=0), system.posterior_mean, atol=0.05)
    assert np.allclose(np.cov(draws.T), system.posterior_covariance, atol=0.05)


# endregion
