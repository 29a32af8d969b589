"""
Closed-form marginal likelihoods for Gaussian networks under conjugate priors.

Three families of scores share one subset formula:
  * BGe with a Normal-Wishart prior on (mu, W), used directly and, over 2n augmented variables, as the eBGe score;
  * the zero-mean BGe on mBGe residuals y_t = x_t - mu_t, where the prior mean term drops out;
  * the mBGe dynamic regression marginal N(vec x; 0, I (x) Sigma + lambda^2 Z Z^T), evaluated through the kappa x kappa
    capacitance matrix so the cost stays polynomial in the coefficient count.

All determinants are taken in log space from Cholesky factors.
"""

from typing import Iterable, Optional, Sequence, Union

import attr
import numpy as np
from scipy import linalg
from scipy.special import multigammaln

from src.constants import DEFAULT_ALPHA_MU, DEFAULT_LAMBDA2, PIVOT_TOLERANCE
from src.dataio import AugmentedData, TimeSeriesData, as_augmented
from src.exc import DegenerateMatrixException, ScoreDomainException, ValidationException
from src.graphs import DynamicGraph, StaticDag, build_augmented
from src.utils import bold

LOG_PI = float(np.log(np.pi))
LOG_2PI = float(np.log(2 * np.pi))

# region linear algebra


def cholesky_pd(matrix: np.ndarray, name: str) -> np.ndarray:
    """
    Lower Cholesky factor, rejecting matrices whose pivots fall below the configured fraction of the largest diagonal.
    """

    matrix = np.asarray(matrix, dtype=float)
    if not np.all(np.isfinite(matrix)):
        raise DegenerateMatrixException(name, "non-finite entries")
    try:
        factor = linalg.cholesky(matrix, lower=True)
    except linalg.LinAlgError:
        raise DegenerateMatrixException(name, "not positive definite") from None
    pivots = np.diag(factor) ** 2
    if pivots.min() < PIVOT_TOLERANCE * np.max(np.diag(matrix)):
        raise DegenerateMatrixException(name, f"pivot {pivots.min():.3g} below tolerance")
    return factor


def log_det_pd(matrix: np.ndarray, name: str = "matrix") -> float:
    if np.size(matrix) == 0:
        return 0.0
    return float(2.0 * np.sum(np.log(np.diag(cholesky_pd(matrix, name)))))


def inverse_pd(matrix: np.ndarray, name: str = "matrix") -> tuple[np.ndarray, float]:
    """
    Inverse and log-determinant of a positive-definite matrix.
    """

    factor = cholesky_pd(matrix, name)
    inverse = linalg.cho_solve((factor, True), np.eye(factor.shape[0]))
    return (inverse + inverse.T) / 2, float(2.0 * np.sum(np.log(np.diag(factor))))


def log_multigamma(l: int, a: float) -> float:  # noqa: E741
    if l == 0:
        return 0.0
    if not a > (l - 1) / 2:
        raise ScoreDomainException(
            f"The multivariate gamma function of dimension {bold(l)} needs a > {bold((l - 1) / 2)}, got {bold(a)}."
        )
    return float(multigammaln(a, l))


# endregion

# region hyperparameters


def _square(values: object) -> np.ndarray:
    return np.atleast_2d(np.asarray(values, dtype=float))


@attr.s(frozen=True, eq=False)
class BgeHyper:
    alpha_w: float = attr.ib(converter=float)
    r: np.ndarray = attr.ib(converter=_square)
    nu: np.ndarray = attr.ib(converter=lambda v: np.atleast_1d(np.asarray(v, dtype=float)))
    alpha_mu: float = attr.ib(default=DEFAULT_ALPHA_MU, converter=float)

    def validate(self) -> None:
        if self.r.shape != (self.dim, self.dim) or self.nu.shape != (self.dim,):
            raise ValidationException(
                f"Prior matrix of shape {bold(self.r.shape)} does not match prior mean of length {bold(self.nu.size)}."
            )
        if not np.allclose(self.r, self.r.T):
            raise ValidationException("The prior matrix R must be symmetric.")
        cholesky_pd(self.r, "R")
        if not self.alpha_w > self.dim - 1:
            raise ScoreDomainException(f"alpha_w must exceed {bold(self.dim - 1)}, got {bold(self.alpha_w)}.")
        if not self.alpha_mu > 0:
            raise ScoreDomainException(f"alpha_mu must be positive, got {bold(self.alpha_mu)}.")

    def __attrs_post_init__(self) -> None:
        self.validate()

    @property
    def dim(self) -> int:
        return int(self.nu.shape[0])

    @classmethod
    def default(cls, n: int) -> "BgeHyper":
        return cls(alpha_w=n + 2, r=np.eye(n), nu=np.zeros(n), alpha_mu=DEFAULT_ALPHA_MU)


@attr.s(frozen=True, eq=False)
class EbgeHyper(BgeHyper):
    """
    The 2n-dimensional Normal-Wishart prior over augmented rows (x_t, x_{t-1}).
    """

    def validate(self) -> None:
        super().validate()
        if self.dim % 2 != 0:
            raise ValidationException(f"eBGe priors are 2n-dimensional, got dimension {bold(self.dim)}.")

    @property
    def n(self) -> int:
        return self.dim // 2

    @classmethod
    def default(cls, n: int) -> "EbgeHyper":
        return cls(alpha_w=2 * n + 2, r=np.eye(2 * n), nu=np.zeros(2 * n), alpha_mu=DEFAULT_ALPHA_MU)


@attr.s(frozen=True)
class RegressionPrior:
    lambda2: float = attr.ib(default=DEFAULT_LAMBDA2, converter=float)

    def __attrs_post_init__(self) -> None:
        if not self.lambda2 > 0:
            raise ScoreDomainException(f"lambda^2 must be positive, got {bold(self.lambda2)}.")


# endregion

# region sufficient statistics


@attr.s(frozen=True, eq=False)
class ScatterStats:
    count: int = attr.ib()
    mean: np.ndarray = attr.ib()
    centred: np.ndarray = attr.ib()

    @classmethod
    def from_data(cls, values: np.ndarray) -> "ScatterStats":
        values = np.atleast_2d(np.asarray(values, dtype=float))
        count, dim = values.shape
        if count == 0:
            return cls(count=0, mean=np.zeros(dim), centred=np.zeros((dim, dim)))
        mean = values.mean(axis=0)
        deviations = values - mean
        return cls(count=count, mean=mean, centred=deviations.T @ deviations)

    @property
    def raw(self) -> np.ndarray:
        """
        S = sum_t z_t z_t^T, the scatter about zero.
        """

        return self.centred + self.count * np.outer(self.mean, self.mean)

    def posterior_scatter(self, hyper: BgeHyper) -> np.ndarray:
        """
        T = centred scatter + (alpha_mu N / (alpha_mu + N)) (nu - mean)(nu - mean)^T.
        """

        shift = hyper.nu - self.mean
        weight = hyper.alpha_mu * self.count / (hyper.alpha_mu + self.count)
        return self.centred + weight * np.outer(shift, shift)

    def with_row(self, z: np.ndarray) -> "ScatterStats":
        z = np.asarray(z, dtype=float)
        count = self.count + 1
        delta = z - self.mean
        mean = self.mean + delta / count
        return ScatterStats(count=count, mean=mean, centred=self.centred + np.outer(delta, z - mean))

    def without_row(self, z: np.ndarray) -> "ScatterStats":
        z = np.asarray(z, dtype=float)
        if self.count < 1:
            raise ValidationException("Cannot remove a row from empty statistics.")
        count = self.count - 1
        if count == 0:
            return ScatterStats(count=0, mean=np.zeros_like(self.mean), centred=np.zeros_like(self.centred))
        mean = (self.count * self.mean - z) / count
        return ScatterStats(count=count, mean=mean, centred=self.centred - np.outer(z - mean, z - self.mean))


# endregion

# region subset scores


@attr.s(eq=False)
class BgeScorer:
    """
    A scoring context: hyperparameters plus the posterior matrix R + T (or R + S in the zero-mean variant) for one
    dataset, with memoized subset log-marginals. Not shared between workers.
    """

    hyper: BgeHyper = attr.ib()
    count: int = attr.ib()
    posterior: np.ndarray = attr.ib()
    mean_shrinkage: bool = attr.ib(default=True)
    cache: dict[tuple[int, ...], float] = attr.ib(init=False, factory=dict)

    @classmethod
    def from_stats(cls, stats: ScatterStats, hyper: BgeHyper) -> "BgeScorer":
        return cls(hyper=hyper, count=stats.count, posterior=hyper.r + stats.posterior_scatter(hyper))

    @classmethod
    def from_data(cls, values: np.ndarray, hyper: BgeHyper) -> "BgeScorer":
        values = np.asarray(values, dtype=float).reshape(-1, hyper.dim)
        return cls.from_stats(ScatterStats.from_data(values), hyper)

    @classmethod
    def zero_mean(cls, residuals: np.ndarray, hyper: BgeHyper) -> "BgeScorer":
        residuals = np.asarray(residuals, dtype=float).reshape(-1, hyper.dim)
        return cls(
            hyper=hyper, count=residuals.shape[0], posterior=hyper.r + residuals.T @ residuals, mean_shrinkage=False
        )

    def subset_logml(self, subset: Iterable[int]) -> float:
        key = tuple(sorted(set(int(k) for k in subset)))
        if not key:
            return 0.0
        if key in self.cache:
            return self.cache[key]
        if not all(0 <= k < self.hyper.dim for k in key):
            raise ValidationException(f"Subset {bold(key)} is outside of the {bold(self.hyper.dim)} variables.")

        l, count = len(key), self.count  # noqa: E741
        a = self.hyper.alpha_w - self.hyper.dim + l
        index = np.ix_(key, key)
        value = (
            -0.5 * l * count * LOG_PI
            + log_multigamma(l, (a + count) / 2)
            - log_multigamma(l, a / 2)
            + 0.5 * a * log_det_pd(self.hyper.r[index], "R")
            - 0.5 * (a + count) * log_det_pd(self.posterior[index], "R + T")
        )
        if self.mean_shrinkage:
            value += 0.5 * l * np.log(self.hyper.alpha_mu / (self.hyper.alpha_mu + count))
        self.cache[key] = float(value)
        return self.cache[key]

    def family_logml(self, node: int, parents: Sequence[int]) -> float:
        return self.subset_logml((node, *parents)) - self.subset_logml(parents)

    def dag_logml(self, g: StaticDag) -> float:
        return sum(self.family_logml(i, g.parents(i)) for i in range(g.n))

    def augmented_logml(self, g: StaticDag, gd: DynamicGraph) -> float:
        aug = build_augmented(g, gd)
        return sum(self.family_logml(i, aug.family(i)) for i in range(aug.n))


def bge_complete_logml(data: np.ndarray, h: BgeHyper) -> float:
    return BgeScorer.from_data(data, h).subset_logml(range(h.dim))


def bge_subset_logml(data: np.ndarray, subset: Iterable[int], h: BgeHyper) -> float:
    return BgeScorer.from_data(data, h).subset_logml(subset)


def bge_dag_logml(data: np.ndarray, g: StaticDag, h: BgeHyper) -> float:
    return BgeScorer.from_data(data, h).dag_logml(g)


def ebge_subset_logml(aug: AugmentedData, subset: Iterable[int], h: EbgeHyper) -> float:
    return BgeScorer.from_data(aug.values, h).subset_logml(subset)


def ebge_logml(aug: AugmentedData, g: StaticDag, gd: DynamicGraph, h: EbgeHyper) -> float:
    return BgeScorer.from_data(aug.values, h).augmented_logml(g, gd)


# endregion

# region mean-adjusted model


@attr.s(frozen=True, eq=False)
class DesignMatrix:
    """
    Regression layout of the dynamic graph. Node i owns the coefficient block beta_i = (beta_{i,0}, beta_{i,j} for
    j in its dynamic parent set, ascending); blocks are concatenated by node into beta-tilde of length kappa.
    """

    gd: DynamicGraph = attr.ib()
    node_of_column: np.ndarray = attr.ib(init=False, repr=False)
    source_of_column: np.ndarray = attr.ib(init=False, repr=False)

    def __attrs_post_init__(self) -> None:
        nodes, sources = [], []
        for i in range(self.gd.n):
            nodes.append(i)
            sources.append(-1)
            for j in self.gd.parents(i):
                nodes.append(i)
                sources.append(j)
        object.__setattr__(self, "node_of_column", np.array(nodes, dtype=int))
        object.__setattr__(self, "source_of_column", np.array(sources, dtype=int))

    @property
    def n(self) -> int:
        return self.gd.n

    @property
    def kappa(self) -> int:
        return int(self.node_of_column.size)

    @property
    def offsets(self) -> list[int]:
        return [int(np.flatnonzero(self.node_of_column == i)[0]) for i in range(self.n)]

    @property
    def indicator(self) -> np.ndarray:
        """
        kappa x n matrix mapping every coefficient to the node whose mean it enters.
        """

        indicator = np.zeros((self.kappa, self.n))
        indicator[np.arange(self.kappa), self.node_of_column] = 1.0
        return indicator

    def features(self, aug: AugmentedData) -> np.ndarray:
        """
        rows x kappa matrix whose row t restricted to node i's block is z_{i,t-1} = (1, lagged parent values).
        """

        features = np.ones((aug.rows, self.kappa))
        lagged = self.source_of_column >= 0
        features[:, lagged] = aug.lagged[:, self.source_of_column[lagged]]
        return features

    def dense(self, aug: AugmentedData) -> np.ndarray:
        """
        The stacked block-diagonal design Z of shape (rows * n) x kappa, row t * n + i belonging to node i.
        """

        features = self.features(aug)
        dense = np.zeros((aug.rows * self.n, self.kappa))
        for c, i in enumerate(self.node_of_column):
            dense[i :: self.n, c] = features[:, c]
        return dense

    def mean(self, aug: AugmentedData, beta: np.ndarray) -> np.ndarray:
        beta = self.check(beta)
        return (self.features(aug) * beta) @ self.indicator

    def check(self, beta: np.ndarray) -> np.ndarray:
        beta = np.asarray(beta, dtype=float).ravel()
        if beta.size != self.kappa:
            raise ValidationException(
                f"Coefficient vector of length {bold(beta.size)} does not match kappa = {bold(self.kappa)}."
            )
        return beta

    def layout(self) -> list[tuple[int, Optional[int]]]:
        return [(int(i), None if j < 0 else int(j)) for i, j in zip(self.node_of_column, self.source_of_column)]


Series = Union[TimeSeriesData, AugmentedData]


def mbge_residuals(data: Series, gd: DynamicGraph, beta: np.ndarray) -> np.ndarray:
    aug = as_augmented(data)
    return aug.current - DesignMatrix(gd).mean(aug, beta)


def mbge_static_logml(residuals: np.ndarray, g: StaticDag, h: BgeHyper) -> float:
    return BgeScorer.zero_mean(residuals, h).dag_logml(g)


@attr.s(frozen=True, eq=False)
class RegressionSystem:
    """
    The pieces of the dynamic regression marginal shared by the likelihood and the full conditional of beta:
    capacitance C = lambda^-2 I + Z^T (I (x) Sigma)^-1 Z and projection h = Z^T (I (x) Sigma)^-1 vec(x).
    """

    design: DesignMatrix = attr.ib()
    factor: np.ndarray = attr.ib()
    projection: np.ndarray = attr.ib()
    log_det_sigma: float = attr.ib()
    data_quadratic: float = attr.ib()
    rows: int = attr.ib()

    @classmethod
    def build(cls, data: Series, gd: DynamicGraph, sigma: np.ndarray, prior: RegressionPrior) -> "RegressionSystem":
        aug = as_augmented(data)
        design = DesignMatrix(gd)
        precision, log_det_sigma = inverse_pd(np.asarray(sigma, dtype=float), "Sigma")
        features = design.features(aug)
        nodes = design.node_of_column
        capacitance = np.eye(design.kappa) / prior.lambda2 + (features.T @ features) * precision[np.ix_(nodes, nodes)]
        whitened = aug.current @ precision
        projection = (features * whitened[:, nodes]).sum(axis=0)
        return cls(
            design=design,
            factor=cholesky_pd(capacitance, "capacitance"),
            projection=projection,
            log_det_sigma=log_det_sigma,
            data_quadratic=float(np.sum(whitened * aug.current)),
            rows=aug.rows,
        )

    @property
    def posterior_mean(self) -> np.ndarray:
        return linalg.cho_solve((self.factor, True), self.projection)

    @property
    def posterior_covariance(self) -> np.ndarray:
        return linalg.cho_solve((self.factor, True), np.eye(self.design.kappa))

    def log_marginal(self, prior: RegressionPrior) -> float:
        n = self.design.n
        log_det = (
            self.rows * self.log_det_sigma
            + self.design.kappa * np.log(prior.lambda2)
            + 2.0 * np.sum(np.log(np.diag(self.factor)))
        )
        quadratic = self.data_quadratic - self.projection @ self.posterior_mean
        return float(-0.5 * (self.rows * n * LOG_2PI + log_det + quadratic))

    def draw(self, rng: np.random.Generator) -> np.ndarray:
        noise = rng.standard_normal(self.design.kappa)
        return self.posterior_mean + linalg.solve_triangular(self.factor.T, noise, lower=False)


def mbge_dynamic_logml(data: Series, gd: DynamicGraph, sigma: np.ndarray, prior: RegressionPrior) -> float:
    return RegressionSystem.build(data, gd, sigma, prior).log_marginal(prior)


def mbge_beta_fcd_params(
    data: Series, gd: DynamicGraph, sigma: np.ndarray, prior: RegressionPrior
) -> tuple[np.ndarray, np.ndarray]:
    system = RegressionSystem.build(data, gd, sigma, prior)
    return system.posterior_mean, system.posterior_covariance


# endregion
