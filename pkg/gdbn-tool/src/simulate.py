from typing import Optional, Sequence

import attr
import numpy as np

from src.constants import COEFFICIENT_MAGNITUDE_RANGE, DEFAULT_NOISE_VAR, Models
from src.dataio import TimeSeriesData, standardize_matrix
from src.exc import ValidationException
from src.graphs import DynamicGraph, Edge, StaticDag, random_dag, split_static_dynamic
from src.utils import bold


def _zeros_if_none(n: int, values: Optional[np.ndarray]) -> np.ndarray:
    return np.zeros(n) if values is None else np.asarray(values, dtype=float)


@attr.s(frozen=True, eq=False)
class GroundTruth:
    g: StaticDag = attr.ib()
    gd: DynamicGraph = attr.ib()
    beta_s: dict[Edge, float] = attr.ib(factory=dict)
    beta_d: dict[Edge, float] = attr.ib(factory=dict)
    mu_s: Optional[np.ndarray] = attr.ib(default=None)
    mu_d: Optional[np.ndarray] = attr.ib(default=None)
    beta_d0: Optional[np.ndarray] = attr.ib(default=None)
    noise_var: float = attr.ib(default=DEFAULT_NOISE_VAR, converter=float)

    # region initialisation

    def validate(self) -> None:
        if self.g.n != self.gd.n:
            raise ValidationException(f"Static and dynamic graphs disagree on n: {self.g.n} vs {self.gd.n}.")
        if set(self.beta_s) != set(self.g.edges):
            raise ValidationException(f"Static coefficients must be keyed by exactly {bold(sorted(self.g.edges))}.")
        if set(self.beta_d) != set(self.gd.edges):
            raise ValidationException(f"Dynamic coefficients must be keyed by exactly {bold(sorted(self.gd.edges))}.")
        if not self.noise_var > 0:
            raise ValidationException(f"Noise variance must be positive, got {bold(self.noise_var)}.")
        for name in ("mu_s", "mu_d", "beta_d0"):
            if getattr(self, name).shape != (self.n,):
                raise ValidationException(f"{name} must have length {bold(self.n)}.")

    def __attrs_post_init__(self) -> None:
        for name in ("mu_s", "mu_d", "beta_d0"):
            object.__setattr__(self, name, _zeros_if_none(self.g.n, getattr(self, name)))
        self.validate()

    # endregion

    @property
    def n(self) -> int:
        return self.g.n

    @property
    def static_matrix(self) -> np.ndarray:
        """
        B_s[i, j] = beta^S_{i,j} for every static edge j -> i.
        """

        matrix = np.zeros((self.n, self.n))
        for (j, i), beta in self.beta_s.items():
            matrix[i, j] = beta
        return matrix

    @property
    def dynamic_matrix(self) -> np.ndarray:
        matrix = np.zeros((self.n, self.n))
        for (k, i), beta in self.beta_d.items():
            matrix[i, k] = beta
        return matrix

    def coefficients(self) -> list[tuple[str, Edge, float]]:
        return [("S", edge, self.beta_s[edge]) for edge in sorted(self.beta_s)] + [
            ("D", edge, self.beta_d[edge]) for edge in sorted(self.beta_d)
        ]


@attr.s(frozen=True, eq=False)
class MbgeComponents:
    """
    Internals of the two-step mBGe generator: mean-adjusted values Y, time-varying means mu*, noise and X = Y + mu*.
    """

    y: np.ndarray = attr.ib()
    mu_star: np.ndarray = attr.ib()
    noise: np.ndarray = attr.ib()
    x: np.ndarray = attr.ib()


# region ground truth


def _coefficient(rng: np.random.Generator) -> float:
    low, high = COEFFICIENT_MAGNITUDE_RANGE
    return float(rng.uniform(low, high) * rng.choice([-1.0, 1.0]))


def sample_ground_truth(
    n: int, m: int, x_static: int, rng: np.random.Generator, noise_var: float = DEFAULT_NOISE_VAR
) -> GroundTruth:
    if not 0 <= x_static <= m:
        raise ValidationException(f"Cannot declare {bold(x_static)} of {bold(m)} edges static.")
    g, gd = split_static_dynamic(random_dag(n, m, rng), x_static, rng)
    beta_s = {edge: _coefficient(rng) for edge in sorted(g.edges)}
    beta_d = {edge: _coefficient(rng) for edge in sorted(gd.edges)}
    return GroundTruth(g=g, gd=gd, beta_s=beta_s, beta_d=beta_d, noise_var=noise_var)


# endregion

# region generators


def _noise(gt: GroundTruth, T: int, rng: np.random.Generator, noise: Optional[np.ndarray]) -> np.ndarray:
    if T < 2:
        raise ValidationException(f"Simulated series need T >= 2, got {bold(T)}.")
    if noise is None:
        return rng.normal(0.0, np.sqrt(gt.noise_var), size=(T, gt.n))
    noise = np.asarray(noise, dtype=float)
    if noise.shape != (T, gt.n):
        raise ValidationException(f"Pre-drawn noise must have shape {bold((T, gt.n))}, got {bold(noise.shape)}.")
    return noise


def _finite(values: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(values)):
        raise ValidationException("The simulated series diverged to non-finite values.")
    return values


def simulate_ebge(
    gt: GroundTruth, T: int, rng: np.random.Generator, noise: Optional[np.ndarray] = None
) -> TimeSeriesData:
    """
    One-step generation: each slice is produced in topological order from already generated same-slice values and
    the previous slice. The first slice has no dynamic contribution (x_0 = 0).
    """

    epsilon = _noise(gt, T, rng, noise)
    order = gt.g.topological_order()
    static, dynamic = gt.static_matrix, gt.dynamic_matrix
    x = np.zeros((T, gt.n))
    for t in range(T):
        offset = epsilon[t] + (dynamic @ (x[t - 1] - gt.mu_d) if t > 0 else 0.0)
        for i in order:
            x[t, i] = gt.mu_s[i] + static[i] @ (x[t] - gt.mu_s) + offset[i]
    return TimeSeriesData(values=_finite(x))


def simulate_mbge_components(
    gt: GroundTruth, T: int, rng: np.random.Generator, noise: Optional[np.ndarray] = None
) -> MbgeComponents:
    epsilon = _noise(gt, T, rng, noise)
    order = gt.g.topological_order()
    static, dynamic = gt.static_matrix, gt.dynamic_matrix
    y = np.zeros((T, gt.n))
    for t in range(T):
        for i in order:
            y[t, i] = static[i] @ y[t] + epsilon[t, i]
    mu_star = np.zeros((T, gt.n))
    mu_star[1:] = gt.beta_d0 + y[:-1] @ dynamic.T
    return MbgeComponents(y=y, mu_star=mu_star, noise=epsilon, x=_finite(y + mu_star))


def simulate_mbge(
    gt: GroundTruth, T: int, rng: np.random.Generator, noise: Optional[np.ndarray] = None
) -> TimeSeriesData:
    return TimeSeriesData(values=simulate_mbge_components(gt, T, rng, noise).x)


def simulate(gt: GroundTruth, model: Models, T: int, rng: np.random.Generator) -> TimeSeriesData:
    return simulate_ebge(gt, T, rng) if model == Models.ebge else simulate_mbge(gt, T, rng)


def simulate_experiments(
    gt: GroundTruth, model: Models, lengths: Sequence[int], rng: np.random.Generator
) -> TimeSeriesData:
    """
    Independent series, one per experiment, concatenated with recorded boundaries.
    """

    return TimeSeriesData.concatenate([simulate(gt, model, T, rng) for T in lengths])


def standardize(data: TimeSeriesData) -> TimeSeriesData:
    return data.with_values(standardize_matrix(data.values, names=data.columns))


# endregion
