from typing import Any, Callable, Iterable, Optional, Sequence, Union

import attr
import enlighten
import numpy as np
from scipy.special import logsumexp
from scipy.stats import multivariate_normal
from sklearn.metrics import auc, precision_recall_curve

from src.constants import Models, PrBlocks, StructureSources
from src.cpdag import ebge_cpdag, mbge_cpdag, model_cpdag, shd
from src.dataio import AugmentedData, TimeSeriesData, as_augmented
from src.exc import ChainFailureException, GdbnException, ValidationException
from src.graphs import Cpdag, StaticDag, random_dag, split_static_dynamic
from src.inference import (
    ChainOutput,
    EbgeState,
    McmcConfig,
    MbgeState,
    run_chain,
    run_ebge_chain,
    run_mbge_chain,
)
from src.scores import BgeHyper, BgeScorer, DesignMatrix, EbgeHyper, RegressionPrior, ScatterStats
from src.simulate import sample_ground_truth, simulate, standardize
from src.utils import bold, derive_rng, fan_out, status

Series = Union[TimeSeriesData, AugmentedData]


# region edge posteriors


def chain_to_cpdags(chain: ChainOutput, model: Optional[Models] = None) -> list[Cpdag]:
    convert = ebge_cpdag if (model or chain.model) == Models.ebge else mbge_cpdag
    return [convert(state.g, state.gd) for state in chain.states]


@attr.s(frozen=True, eq=False)
class EdgePosterior:
    """
    Inclusion frequencies over the 2n augmented nodes: `matrix[a, b]` is the share of CPDAGs containing a -> b, with
    undirected edges credited to both orientations.
    """

    matrix: np.ndarray = attr.ib()
    samples: int = attr.ib()

    def validate(self) -> None:
        if self.matrix.ndim != 2 or self.matrix.shape[0] != self.matrix.shape[1] or self.matrix.shape[0] % 2:
            raise ValidationException(f"Edge posteriors need a 2n x 2n matrix, got shape {bold(self.matrix.shape)}.")
        if np.any(self.matrix < 0) or np.any(self.matrix > 1):
            raise ValidationException("Edge posterior probabilities must lie in [0, 1].")
        if np.any(np.diag(self.matrix) != 0):
            raise ValidationException("Edge posterior probabilities of self-pairs must be zero.")

    def __attrs_post_init__(self) -> None:
        self.validate()

    @property
    def n(self) -> int:
        return self.matrix.shape[0] // 2

    @property
    def static_block(self) -> np.ndarray:
        return self.matrix[: self.n, : self.n]

    @property
    def dynamic_block(self) -> np.ndarray:
        """
        `dynamic_block[j, i]` is the posterior probability of X_j(t-1) => X_i(t).
        """

        return self.matrix[self.n :, : self.n]

    def rows(self) -> list[tuple[str, int, int, float]]:
        rows = [
            ("S", j + 1, i + 1, float(self.static_block[j, i]))
            for j in range(self.n)
            for i in range(self.n)
            if j != i
        ]
        rows += [("D", j + 1, i + 1, float(self.dynamic_block[j, i])) for j in range(self.n) for i in range(self.n)]
        return rows


def edge_posteriors(cpdags: Iterable[Cpdag]) -> EdgePosterior:
    cpdags = list(cpdags)
    if not cpdags:
        raise ValidationException("Edge posteriors need at least one retained sample.")
    sizes = {cpdag.n for cpdag in cpdags}
    if len(sizes) != 1:
        raise ValidationException(f"CPDAGs disagree on their node count: {bold(sorted(sizes))}.")
    total = np.zeros((cpdags[0].n, cpdags[0].n))
    for cpdag in cpdags:
        total += cpdag.to_matrix()
    return EdgePosterior(matrix=total / len(cpdags), samples=len(cpdags))


def distinct_cpdags(cpdags: Iterable[Cpdag]) -> list[tuple[Cpdag, int]]:
    """
    Distinct CPDAGs with their multiplicities, most frequent first, ties in order of first appearance.
    """

    counts: dict[Cpdag, int] = {}
    for cpdag in cpdags:
        counts[cpdag] = counts.get(cpdag, 0) + 1
    return sorted(counts.items(), key=lambda item: -item[1])


# endregion

# region precision and recall


def candidate_pairs(
    n: int, block: PrBlocks = PrBlocks.pooled, include_self_loops: bool = False
) -> list[tuple[int, int]]:
    """
    Augmented-node pairs that can carry an edge: static j -> i (j != i) and dynamic n + j -> i.
    """

    static = [(j, i) for j in range(n) for i in range(n) if j != i]
    dynamic = [(n + j, i) for j in range(n) for i in range(n) if include_self_loops or j != i]
    if block == PrBlocks.static:
        return static
    if block == PrBlocks.dynamic:
        return dynamic
    return static + dynamic


@attr.s(frozen=True, eq=False)
class PrResult:
    block: PrBlocks = attr.ib()
    ranking: list[tuple[int, int, float]] = attr.ib()
    recall: np.ndarray = attr.ib()
    precision: np.ndarray = attr.ib()
    area: float = attr.ib()
    positives: int = attr.ib()
    interpolation: str = attr.ib(default="trapezoid")

    @property
    def candidates(self) -> int:
        return len(self.ranking)

    def curve_rows(self) -> list[tuple[str, float, float]]:
        return [(self.block.value, float(r), float(p)) for r, p in zip(self.recall, self.precision)]


def auprc(
    posterior: EdgePosterior,
    truth: Cpdag,
    block: PrBlocks = PrBlocks.pooled,
    include_self_loops: bool = False,
) -> PrResult:
    """
    Rank candidate edges by posterior probability and integrate precision over recall with the trapezoid rule.

    Positives are the truth CPDAG's directed pairs plus both orientations of its undirected pairs. The curve runs
    through one point per distinct threshold and starts at recall 0 with the precision of the highest threshold, so a
    constant posterior scores exactly the positive rate.

    Unless `include_self_loops` is set, dynamic self-loops are not candidates, so self-loops of the truth are left out
    of the positives; a status line reports how many were dropped.
    """

    if truth.n != posterior.matrix.shape[0]:
        raise ValidationException(
            f"Truth over {bold(truth.n)} nodes cannot score a posterior over {bold(posterior.matrix.shape[0])}."
        )
    pairs = candidate_pairs(posterior.n, block, include_self_loops)
    truth_matrix = truth.to_matrix()
    if not include_self_loops and block != PrBlocks.static:
        dropped = int(sum(truth_matrix[posterior.n + i, i] != 0 for i in range(posterior.n)))
        if dropped:
            status(f"Leaving {bold(dropped)} true dynamic self-loop(s) out of the {bold(block.value)} ranking.")
    labels = np.array([truth_matrix[a, b] for a, b in pairs], dtype=int)
    scores = np.array([posterior.matrix[a, b] for a, b in pairs])
    if labels.sum() == 0:
        raise ValidationException(f"The true structure has no {bold(block.value)} edges to recover.")

    precision, recall, _ = precision_recall_curve(labels, scores)
    # drop the appended (recall 0, precision 1) point, then order by increasing recall
    precision, recall = precision[:-1][::-1], recall[:-1][::-1]
    precision = np.concatenate([[precision[0]], precision])
    recall = np.concatenate([[0.0], recall])
    ranking = sorted(((a, b, float(s)) for (a, b), s in zip(pairs, scores)), key=lambda item: -item[2])
    return PrResult(
        block=block,
        ranking=ranking,
        recall=recall,
        precision=precision,
        area=float(auc(recall, precision)),
        positives=int(labels.sum()),
    )


# endregion

# region structural hamming distance study


@attr.s(frozen=True, eq=False)
class ShdStudyResult:
    x_values: list[int] = attr.ib()
    distances: np.ndarray = attr.ib()

    @property
    def replicates(self) -> int:
        return int(self.distances.shape[1])

    @property
    def means(self) -> np.ndarray:
        return self.distances.mean(axis=1)

    @property
    def sds(self) -> np.ndarray:
        if self.replicates < 2:
            return np.zeros(len(self.x_values))
        return self.distances.std(axis=1, ddof=1)

    def rows(self) -> list[tuple[int, int, int]]:
        return [
            (x, r + 1, int(self.distances[k, r])) for k, x in enumerate(self.x_values) for r in range(self.replicates)
        ]

    def summary_rows(self) -> list[tuple[int, float, float, int]]:
        return [
            (x, float(mean), float(sd), self.replicates)
            for x, mean, sd in zip(self.x_values, self.means, self.sds)
        ]


def shd_study(
    source: StructureSources,
    n: int,
    m: int,
    x_values: Sequence[int],
    replicates: int,
    seed: int,
    asset: Optional[StaticDag] = None,
    jobs: int = 1,
    progress: Optional[enlighten.Counter] = None,
) -> ShdStudyResult:
    """
    For every (x, replicate) declare x edges static and the rest dynamic, then measure the SHD between the mBGe and
    eBGe CPDAGs. Random sources draw a fresh DAG per replicate; an asset reuses the same DAG with fresh splits.
    """

    if source == StructureSources.asset:
        if asset is None:
            raise ValidationException("An asset structure is required for an asset-based study.")
        n, m = asset.n, len(asset.edges)
    if replicates < 1:
        raise ValidationException(f"At least one replicate is required, got {bold(replicates)}.")
    if any(not 0 <= x <= m for x in x_values):
        raise ValidationException(f"Static edge counts {bold(list(x_values))} must lie in [0, {m}].")

    def replicate(task: tuple[int, int]) -> int:
        x, r = task
        rng = derive_rng(seed, x, r)
        dag = asset if asset is not None else random_dag(n, m, rng)
        g, gd = split_static_dynamic(dag, x, rng)
        return shd(mbge_cpdag(g, gd), ebge_cpdag(g, gd))

    tasks = [(x, r) for x in x_values for r in range(replicates)]
    results = fan_out(replicate, tasks, jobs, progress)
    return ShdStudyResult(
        x_values=list(x_values), distances=np.array(results, dtype=int).reshape(len(x_values), replicates)
    )


# endregion

# region cross-model study


@attr.s(frozen=True, eq=False)
class AuprcStudyResult:
    rows: list[tuple[str, str, int, int, int, float]] = attr.ib()

    def summary(self) -> list[dict[str, Any]]:
        """
        Mean area and 95% normal half-width per (data model, learn model, x, T) cell.
        """

        cells: dict[tuple[str, str, int, int], list[float]] = {}
        for data_model, learn_model, x, T, _, area in self.rows:
            cells.setdefault((data_model, learn_model, x, T), []).append(area)
        summary = []
        for (data_model, learn_model, x, T), areas in cells.items():
            values = np.array(areas)
            sd = values.std(ddof=1) if values.size > 1 else 0.0
            summary.append(
                {
                    "data_model": data_model,
                    "learn_model": learn_model,
                    "x": x,
                    "T": T,
                    "mean": float(values.mean()),
                    "half_width": float(1.96 * sd / np.sqrt(values.size)),
                    "replicates": int(values.size),
                }
            )
        return summary

    def mean_area(self, data_model: Models, learn_model: Models) -> float:
        areas = [row[5] for row in self.rows if row[0] == data_model.value and row[1] == learn_model.value]
        return float(np.mean(areas))


def auprc_study(
    n: int,
    m: int,
    x_values: Sequence[int],
    lengths: Sequence[int],
    replicates: int,
    cfg: McmcConfig,
    seed: int,
    noise_var: Optional[float] = None,
    jobs: int = 1,
    progress: Optional[enlighten.Counter] = None,
) -> AuprcStudyResult:
    """
    Simulate data under each model, learn with both and score every posterior against the generating structure's
    CPDAG in the learning model's representation.
    """

    models = list(Models)

    def replicate(task: tuple[int, int, int, int]) -> list[tuple[str, str, int, int, int, float]]:
        d, x, T, r = task
        rng = derive_rng(seed, d, x, T, r)
        kwargs = {} if noise_var is None else {"noise_var": noise_var}
        gt = sample_ground_truth(n, m, x, rng, **kwargs)
        data = standardize(simulate(gt, models[d], T, rng))
        rows = []
        for k, learn_model in enumerate(models):
            chain = run_chain(learn_model, data, cfg, derive_rng(seed, d, x, T, r, k + 1))
            posterior = edge_posteriors(chain_to_cpdags(chain))
            area = auprc(posterior, model_cpdag(gt.g, gt.gd, learn_model)).area
            rows.append((models[d].value, learn_model.value, x, T, r + 1, area))
        return rows

    tasks = [(d, x, T, r) for d in range(len(models)) for x in x_values for T in lengths for r in range(replicates)]
    results = fan_out(replicate, tasks, jobs, progress)
    return AuprcStudyResult(rows=[row for rows in results for row in rows])


# endregion

# region predictive probabilities


@attr.s(frozen=True, eq=False)
class PredictiveResult:
    model: Models = attr.ib()
    folds: list[int] = attr.ib()
    log_predictive: np.ndarray = attr.ib()

    def validate(self) -> None:
        if not np.all(np.isfinite(self.log_predictive)):
            raise ValidationException("Log predictive probabilities must be finite.")
        if len(self.folds) != self.log_predictive.size:
            raise ValidationException("Every fold needs exactly one predictive value.")

    def __attrs_post_init__(self) -> None:
        self.validate()

    def rows(self) -> list[tuple[int, str, float]]:
        return [(fold, self.model.value, float(value)) for fold, value in zip(self.folds, self.log_predictive)]


def mbge_log_predictive(z: np.ndarray, states: Sequence[MbgeState]) -> float:
    """
    log mean over draws of N(x_t; mu_t(x_{t-1}, beta), Sigma) for one augmented row z = (x_t, x_{t-1}).
    """

    if not states:
        raise ValidationException("Predictive densities need at least one posterior draw.")
    row = AugmentedData(values=np.asarray(z, dtype=float).reshape(1, -1))
    densities = [
        multivariate_normal.logpdf(row.current[0], mean=DesignMatrix(s.gd).mean(row, s.beta)[0], cov=s.sigma)
        for s in states
    ]
    return float(logsumexp(densities) - np.log(len(states)))


def ebge_log_predictive(train: AugmentedData, z: np.ndarray, states: Sequence[EbgeState], h: EbgeHyper) -> float:
    """
    log mean over sampled structures of the marginal ratio p(train + z | g, gd) / p(train | g, gd).
    """

    if not states:
        raise ValidationException("Predictive densities need at least one posterior draw.")
    stats = ScatterStats.from_data(train.values)
    without = BgeScorer.from_stats(stats, h)
    with_row = BgeScorer.from_stats(stats.with_row(np.asarray(z, dtype=float)), h)
    ratios = [with_row.augmented_logml(s.g, s.gd) - without.augmented_logml(s.g, s.gd) for s in states]
    return float(logsumexp(ratios) - np.log(len(states)))


def _loocv(
    model: Models,
    data: Series,
    fold_score: Callable[[AugmentedData, np.ndarray, np.random.Generator], float],
    seed: int,
    jobs: int,
    progress: Optional[enlighten.Counter],
) -> PredictiveResult:
    aug = as_augmented(data)
    if aug.rows < 2:
        raise ValidationException(f"Leave-one-out needs at least two transitions, got {bold(aug.rows)}.")

    def fold(t: int) -> float:
        try:
            return fold_score(aug.without_row(t), aug.values[t], derive_rng(seed, t))
        except GdbnException as e:
            raise ChainFailureException(t + 1, e) from e

    values = fan_out(fold, list(range(aug.rows)), jobs, progress)
    return PredictiveResult(model=model, folds=list(range(1, aug.rows + 1)), log_predictive=np.array(values))


def loocv_predict_mbge(
    data: Series,
    h: BgeHyper,
    prior: RegressionPrior,
    cfg: McmcConfig,
    seed: int,
    jobs: int = 1,
    progress: Optional[enlighten.Counter] = None,
) -> PredictiveResult:
    """
    Hold out one transition at a time, learn on the rest and average the held-out Gaussian density over every
    retained draw (g, gd, Sigma, beta).
    """

    def fold_score(train: AugmentedData, z: np.ndarray, rng: np.random.Generator) -> float:
        chain = run_mbge_chain(train, h, prior, cfg, rng)
        return mbge_log_predictive(z, chain.states)  # type: ignore[arg-type]

    return _loocv(Models.mbge, data, fold_score, seed, jobs, progress)


def loocv_predict_ebge(
    data: Series,
    h: EbgeHyper,
    cfg: McmcConfig,
    seed: int,
    jobs: int = 1,
    progress: Optional[enlighten.Counter] = None,
) -> PredictiveResult:
    def fold_score(train: AugmentedData, z: np.ndarray, rng: np.random.Generator) -> float:
        chain = run_ebge_chain(train, h, cfg, rng)
        return ebge_log_predictive(train, z, chain.states, h)  # type: ignore[arg-type]

    return _loocv(Models.ebge, data, fold_score, seed, jobs, progress)


# endregion
