import time
from math import floor, inf, log
from typing import Any, Optional, Union

import attr
import enlighten
import numpy as np
from scipy import linalg
from scipy.stats import wishart

from src.constants import (
    DEFAULT_BURN_IN_FRACTION,
    DEFAULT_ITERATIONS,
    DEFAULT_THINNING,
    FORMAT_VERSION,
    NULL_MOVE,
    PROGRESS_REFRESH_INTERVAL,
    Models,
    MoveKinds,
)
from src.dataio import AugmentedData, TimeSeriesData, as_augmented
from src.exc import DegenerateMatrixException, ValidationException
from src.graphs import AugmentedGraph, DynamicGraph, StaticDag, reachability
from src.scores import (
    BgeHyper,
    BgeScorer,
    DesignMatrix,
    EbgeHyper,
    RegressionPrior,
    RegressionSystem,
    ScatterStats,
    cholesky_pd,
    inverse_pd,
    mbge_residuals,
)
from src.utils import bold, derive_rng

Series = Union[TimeSeriesData, AugmentedData]
Weights = Optional[dict[MoveKinds, float]]


def _move_probabilities(value: Optional[dict[Any, float]]) -> Weights:
    if value is None:
        return None
    return {MoveKinds(k): float(v) for k, v in value.items()}


@attr.s(frozen=True)
class McmcConfig:
    iterations: int = attr.ib(default=DEFAULT_ITERATIONS, converter=int)
    burn_in_fraction: float = attr.ib(default=DEFAULT_BURN_IN_FRACTION, converter=float)
    thinning: int = attr.ib(default=DEFAULT_THINNING, converter=int)
    seed: int = attr.ib(default=0, converter=int)
    max_fan_in: Optional[int] = attr.ib(default=None)
    forbid_self_loops: bool = attr.ib(default=True)
    forbid_joint_static_dynamic_parent: bool = attr.ib(default=False)
    move_probabilities: Weights = attr.ib(default=None, converter=_move_probabilities, hash=False)

    # region initialisation

    def validate(self) -> None:
        if self.iterations <= 0:
            raise ValidationException(f"Iteration count must be positive, got {bold(self.iterations)}.")
        if not 0 <= self.burn_in_fraction < 1:
            raise ValidationException(f"Burn-in fraction {bold(self.burn_in_fraction)} must lie in [0, 1).")
        if self.thinning < 1:
            raise ValidationException(f"Thinning factor must be at least 1, got {bold(self.thinning)}.")
        if self.max_fan_in is not None and self.max_fan_in < 0:
            raise ValidationException(f"Maximum fan-in must be non-negative, got {bold(self.max_fan_in)}.")
        if self.move_probabilities is not None:
            if any(p < 0 for p in self.move_probabilities.values()):
                raise ValidationException("Move probabilities must be non-negative.")
            total = sum(self.move_probabilities.values())
            if abs(total - 1.0) > 1e-9:
                raise ValidationException(f"Move probabilities must sum to 1, got {bold(total)}.")

    def __attrs_post_init__(self) -> None:
        self.validate()

    # endregion

    @property
    def retained_count(self) -> int:
        return int(floor((1 - self.burn_in_fraction) * self.iterations / self.thinning + 1e-9))

    def retained_iterations(self) -> set[int]:
        """
        1-based iterations whose state is kept: the last one and every `thinning`-th before it.
        """

        return {self.iterations - k * self.thinning for k in range(self.retained_count)}

    def block_weights(self, static: bool) -> Weights:
        if self.move_probabilities is None:
            return None
        return {k: w for k, w in self.move_probabilities.items() if k.is_static == static}

    def chain_rng(self, *keys: int) -> np.random.Generator:
        return derive_rng(self.seed, *keys)

    def to_dict(self) -> dict[str, Any]:
        return {
            "iterations": self.iterations,
            "burn_in_fraction": self.burn_in_fraction,
            "thinning": self.thinning,
            "seed": self.seed,
            "max_fan_in": self.max_fan_in,
            "forbid_self_loops": self.forbid_self_loops,
            "forbid_joint_static_dynamic_parent": self.forbid_joint_static_dynamic_parent,
            "move_probabilities": (
                None
                if self.move_probabilities is None
                else {k.value: v for k, v in sorted(self.move_probabilities.items(), key=lambda kv: kv[0].value)}
            ),
        }


# region states


@attr.s(frozen=True, eq=False)
class MbgeState:
    g: StaticDag = attr.ib()
    gd: DynamicGraph = attr.ib()
    sigma: np.ndarray = attr.ib()
    beta: np.ndarray = attr.ib()

    def validate(self) -> None:
        cholesky_pd(self.sigma, "Sigma")
        DesignMatrix(self.gd).check(self.beta)

    def __attrs_post_init__(self) -> None:
        self.validate()


@attr.s(frozen=True)
class EbgeState:
    g: StaticDag = attr.ib()
    gd: DynamicGraph = attr.ib()


State = Union[MbgeState, EbgeState]


@attr.s
class AcceptanceCounts:
    proposed: dict[str, int] = attr.ib(factory=dict)
    accepted: dict[str, int] = attr.ib(factory=dict)

    def record(self, kind: Union[MoveKinds, str], accepted: bool) -> None:
        key = kind.value if isinstance(kind, MoveKinds) else kind
        self.proposed[key] = self.proposed.get(key, 0) + 1
        self.accepted[key] = self.accepted.get(key, 0) + int(accepted)

    @property
    def total_proposed(self) -> int:
        return sum(self.proposed.values())

    def to_dict(self) -> dict[str, dict[str, int]]:
        return {key: {"proposed": self.proposed[key], "accepted": self.accepted[key]} for key in sorted(self.proposed)}


def _edge_list(edges: frozenset[tuple[int, int]]) -> list[list[int]]:
    return [[j + 1, i + 1] for j, i in sorted(edges)]


@attr.s(eq=False)
class ChainOutput:
    model: Models = attr.ib()
    config: McmcConfig = attr.ib()
    n: int = attr.ib()
    states: list[State] = attr.ib(factory=list)
    retained_scores: list[float] = attr.ib(factory=list)
    trace: np.ndarray = attr.ib(factory=lambda: np.zeros(0))
    acceptance: AcceptanceCounts = attr.ib(factory=AcceptanceCounts)
    duration_ms: float = attr.ib(default=0.0)

    def to_json(self, downsample: int = 1, record_timings: bool = False) -> dict[str, Any]:
        """
        Chain document: config echo, per-sample edge lists (1-based), score trace, acceptance statistics. The duration
        is left out unless requested so reruns stay byte-identical.
        """

        samples = []
        for state, score in zip(self.states, self.retained_scores):
            sample: dict[str, Any] = {
                "static": _edge_list(state.g.edges),
                "dynamic": _edge_list(state.gd.edges),
                "log_marginal": score,
            }
            if isinstance(state, MbgeState):
                sample["sigma"] = state.sigma.tolist()
                sample["beta"] = state.beta.tolist()
            samples.append(sample)
        document: dict[str, Any] = {
            "format_version": FORMAT_VERSION,
            "model": self.model.value,
            "n": self.n,
            "config": self.config.to_dict(),
            "retained": len(self.states),
            "samples": samples,
            "trace": self.trace[:: max(1, downsample)].tolist(),
            "trace_downsample": max(1, downsample),
            "acceptance": self.acceptance.to_dict(),
        }
        if record_timings:
            document["duration_ms"] = self.duration_ms
        return document

    @classmethod
    def from_json(cls, document: dict[str, Any]) -> "ChainOutput":
        try:
            model, n = Models(document["model"]), int(document["n"])
            cfg = McmcConfig(**document["config"])
            states: list[State] = []
            for sample in document["samples"]:
                g = StaticDag(n=n, edges=[(j - 1, i - 1) for j, i in sample["static"]])
                gd = DynamicGraph(n=n, edges=[(j - 1, i - 1) for j, i in sample["dynamic"]])
                if model == Models.mbge:
                    states.append(MbgeState(g=g, gd=gd, sigma=np.array(sample["sigma"]), beta=np.array(sample["beta"])))
                else:
                    states.append(EbgeState(g=g, gd=gd))
            acceptance = AcceptanceCounts()
            for key, counts in document["acceptance"].items():
                acceptance.proposed[key] = int(counts["proposed"])
                acceptance.accepted[key] = int(counts["accepted"])
            return cls(
                model=model,
                config=cfg,
                n=n,
                states=states,
                retained_scores=[float(sample["log_marginal"]) for sample in document["samples"]],
                trace=np.array(document["trace"], dtype=float),
                acceptance=acceptance,
                duration_ms=float(document.get("duration_ms", 0.0)),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise ValidationException(f"The chain document is malformed ({bold(repr(e))}).") from None


# endregion

# region moves


@attr.s(frozen=True)
class Move:
    kind: MoveKinds = attr.ib()
    source: int = attr.ib()
    target: int = attr.ib()


def apply_move(g: StaticDag, gd: DynamicGraph, move: Move) -> tuple[StaticDag, DynamicGraph]:
    edge = (move.source, move.target)
    if move.kind == MoveKinds.static_add:
        return g.with_edges(g.edges | {edge}), gd
    if move.kind == MoveKinds.static_delete:
        return g.with_edges(g.edges - {edge}), gd
    if move.kind == MoveKinds.static_reverse:
        return g.with_edges((g.edges - {edge}) | {(move.target, move.source)}), gd
    if move.kind == MoveKinds.dynamic_add:
        return g, gd.with_edges(gd.edges | {edge})
    return g, gd.with_edges(gd.edges - {edge})


def static_neighbors(g: StaticDag, cfg: McmcConfig, gd: Optional[DynamicGraph] = None) -> list[Move]:
    """
    Single-edge additions, deletions and reversals of `g` that keep it acyclic and within the fan-in cap. With
    `forbid_joint_static_dynamic_parent`, static j -> i is never proposed while j => i is dynamic.
    """

    reach = reachability(g.n, g.edges)
    cap = cfg.max_fan_in
    joint = gd.edges if gd is not None and cfg.forbid_joint_static_dynamic_parent else frozenset()
    fan_in = [len(g.parents(i)) for i in range(g.n)]
    moves = []
    for j in range(g.n):
        for i in range(g.n):
            if i == j:
                continue
            if (j, i) in g.edges:
                moves.append(Move(MoveKinds.static_delete, j, i))
                other_path = any(reach[c, i] for c in g.children(j) if c != i)
                if not other_path and (cap is None or fan_in[j] < cap) and (i, j) not in joint:
                    moves.append(Move(MoveKinds.static_reverse, j, i))
            elif (i, j) not in g.edges:
                if not reach[i, j] and (cap is None or fan_in[i] < cap) and (j, i) not in joint:
                    moves.append(Move(MoveKinds.static_add, j, i))
    return moves


def dynamic_neighbors(gd: DynamicGraph, cfg: McmcConfig, g: Optional[StaticDag] = None) -> list[Move]:
    """
    Single-edge additions and deletions of the dynamic graph; direction is fixed by time so there are no reversals.
    """

    cap = cfg.max_fan_in
    joint = g.edges if g is not None and cfg.forbid_joint_static_dynamic_parent else frozenset()
    moves = []
    for j in range(gd.n):
        for i in range(gd.n):
            if (j, i) in gd.edges:
                moves.append(Move(MoveKinds.dynamic_delete, j, i))
            elif (
                not (j == i and cfg.forbid_self_loops)
                and (cap is None or len(gd.parents(i)) < cap)
                and (j, i) not in joint
            ):
                moves.append(Move(MoveKinds.dynamic_add, j, i))
    return moves


def _group(moves: list[Move]) -> dict[MoveKinds, list[Move]]:
    groups: dict[MoveKinds, list[Move]] = {}
    for move in moves:
        groups.setdefault(move.kind, []).append(move)
    return groups


def neighbourhood_size(moves: list[Move], kind: MoveKinds, weights: Weights) -> float:
    """
    Inverse probability of proposing one particular move of `kind` from a state whose move list is `moves`. Without
    weights this is the plain neighbour count.
    """

    if weights is None:
        return float(len(moves))
    groups = _group(moves)
    if weights.get(kind, 0.0) <= 0 or not groups.get(kind):
        return inf
    total = sum(weights.get(k, 0.0) for k in groups)
    return total * len(groups[kind]) / weights[kind]


def propose(moves: list[Move], weights: Weights, rng: np.random.Generator) -> tuple[Optional[Move], float]:
    if weights is None:
        if not moves:
            return None, 0.0
        return moves[int(rng.integers(len(moves)))], float(len(moves))
    groups = _group(moves)
    kinds = [k for k in MoveKinds if groups.get(k) and weights.get(k, 0.0) > 0]
    if not kinds:
        return None, 0.0
    probabilities = np.array([weights[k] for k in kinds])
    kind = kinds[int(rng.choice(len(kinds), p=probabilities / probabilities.sum()))]
    move = groups[kind][int(rng.integers(len(groups[kind])))]
    return move, neighbourhood_size(moves, kind, weights)


def mh_accept(
    log_score_new: float, log_score_old: float, n_neighbors_old: float, n_neighbors_new: float, rng: np.random.Generator
) -> bool:
    """
    Accept with probability min(1, exp(new - old) * n_old / n_new).
    """

    threshold = rng.random()
    if log_score_new == -inf or n_neighbors_new == inf:
        return False
    log_ratio = log_score_new - log_score_old + log(n_neighbors_old) - log(n_neighbors_new)
    return bool(threshold < np.exp(min(0.0, log_ratio)))


# endregion

# region parameter draws


def sample_sigma_given_dag(g: StaticDag, residuals: np.ndarray, h: BgeHyper, rng: np.random.Generator) -> np.ndarray:
    """
    Draw Sigma from its zero-mean Wishart posterior restricted to g: every node regresses on its static parents with
    conjugate Normal-inverse-Gamma parameters taken from M = R + S, and Sigma = (I - B)^-1 D (I - B)^-T. A node with l
    parents inherits the degrees of freedom of its (l + 1)-variable marginal, so its variance has shape
    (alpha_w + N - n + l + 1) / 2.
    """

    n = g.n
    residuals = np.asarray(residuals, dtype=float).reshape(-1, n)
    m = h.r + residuals.T @ residuals
    coefficients = np.zeros((n, n))
    variances = np.zeros(n)
    for i in range(n):
        parents = list(g.parents(i))
        conditional = m[i, i]
        if parents:
            factor = cholesky_pd(m[np.ix_(parents, parents)], "R + S")
            centre = linalg.cho_solve((factor, True), m[parents, i])
            conditional = m[i, i] - m[parents, i] @ centre
        if not conditional > 0:
            raise DegenerateMatrixException("R + S", f"conditional scatter {conditional:.3g} of node {i + 1}")
        shape = (h.alpha_w + residuals.shape[0] - n + len(parents) + 1) / 2
        variances[i] = 1.0 / rng.gamma(shape, 2.0 / conditional)
        if parents:
            noise = linalg.solve_triangular(factor.T, rng.standard_normal(len(parents)), lower=False)
            coefficients[i, parents] = centre + np.sqrt(variances[i]) * noise
    mixing = np.linalg.solve(np.eye(n) - coefficients, np.eye(n))
    sigma = mixing @ np.diag(variances) @ mixing.T
    return (sigma + sigma.T) / 2


def sample_ebge_params(
    aug: AugmentedData, g: StaticDag, gd: DynamicGraph, h: EbgeHyper, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """
    Unconstrained Normal-Wishart posterior draw of (mu, W) over augmented rows; used for diagnostics only.
    """

    if not g.n == gd.n == h.n == aug.n:
        raise ValidationException(f"Structures, prior and data disagree on n ({g.n}, {gd.n}, {h.n}, {aug.n}).")
    stats = ScatterStats.from_data(aug.values)
    alpha_mu = h.alpha_mu + stats.count
    centre = (h.alpha_mu * h.nu + stats.count * stats.mean) / alpha_mu
    scale, _ = inverse_pd(h.r + stats.posterior_scatter(h), "R + T")
    precision = np.atleast_2d(wishart(df=h.alpha_w + stats.count, scale=scale).rvs(random_state=rng))
    covariance, _ = inverse_pd(alpha_mu * precision, "alpha_mu W")
    return rng.multivariate_normal(centre, covariance), precision


# endregion

# region chains


def _start(model: Models, cfg: McmcConfig, n: int) -> tuple[StaticDag, DynamicGraph, ChainOutput]:
    g = StaticDag(n=n)
    gd = DynamicGraph(n=n, allow_self_loops=not cfg.forbid_self_loops)
    chain = ChainOutput(model=model, config=cfg, n=n, trace=np.zeros(cfg.iterations))
    return g, gd, chain


def _tick(progress: Optional[enlighten.Counter], iteration: int, total: int) -> None:
    if progress is not None and (iteration % PROGRESS_REFRESH_INTERVAL == 0 or iteration == total):
        progress.update(incr=iteration - progress.count)


def run_ebge_chain(
    data: Series,
    h: EbgeHyper,
    cfg: McmcConfig,
    rng: np.random.Generator,
    progress: Optional[enlighten.Counter] = None,
) -> ChainOutput:
    """
    Structure MCMC over (g, gd) with one uniformly chosen single-edge move per iteration from the union of static and
    dynamic move lists. Sufficient statistics are computed once, so an iteration costs the same for any T.
    """

    t0 = time.perf_counter()
    aug = as_augmented(data)
    if h.dim != 2 * aug.n:
        raise ValidationException(f"An eBGe prior of dimension {bold(h.dim)} cannot score {bold(aug.n)} variables.")
    scorer = BgeScorer.from_data(aug.values, h)
    g, gd, chain = _start(Models.ebge, cfg, aug.n)
    retained = cfg.retained_iterations()

    def family(graph: StaticDag, dynamic: DynamicGraph, i: int) -> float:
        return scorer.family_logml(i, AugmentedGraph(g=graph, gd=dynamic).family(i))

    families = np.array([family(g, gd, i) for i in range(aug.n)])
    moves = static_neighbors(g, cfg, gd) + dynamic_neighbors(gd, cfg, g)
    for iteration in range(1, cfg.iterations + 1):
        move, size = propose(moves, cfg.move_probabilities, rng)
        if move is None:
            chain.acceptance.record(NULL_MOVE, False)
        else:
            g_new, gd_new = apply_move(g, gd, move)
            candidate = families.copy()
            for i in {move.source, move.target} if move.kind == MoveKinds.static_reverse else {move.target}:
                candidate[i] = family(g_new, gd_new, i)
            new_moves = static_neighbors(g_new, cfg, gd_new) + dynamic_neighbors(gd_new, cfg, g_new)
            new_size = neighbourhood_size(new_moves, move.kind.inverse, cfg.move_probabilities)
            accepted = mh_accept(float(candidate.sum()), float(families.sum()), size, new_size, rng)
            chain.acceptance.record(move.kind, accepted)
            if accepted:
                g, gd, families, moves = g_new, gd_new, candidate, new_moves
        chain.trace[iteration - 1] = families.sum()
        if iteration in retained:
            chain.states.append(EbgeState(g=g, gd=gd))
            chain.retained_scores.append(float(families.sum()))
        _tick(progress, iteration, cfg.iterations)

    chain.duration_ms = (time.perf_counter() - t0) * 1000
    return chain


def run_mbge_chain(
    data: Series,
    h: BgeHyper,
    prior: RegressionPrior,
    cfg: McmcConfig,
    rng: np.random.Generator,
    progress: Optional[enlighten.Counter] = None,
) -> ChainOutput:
    """
    Two-block sampler. Each iteration makes one static proposal scored by the zero-mean BGe on the residuals of the
    previous coefficient draw, draws Sigma given g, makes one dynamic proposal scored by the regression marginal given
    Sigma, and finally draws the coefficients from their full conditional.
    """

    t0 = time.perf_counter()
    aug = as_augmented(data)
    if h.dim != aug.n:
        raise ValidationException(f"A BGe prior of dimension {bold(h.dim)} cannot score {bold(aug.n)} variables.")
    g, gd, chain = _start(Models.mbge, cfg, aug.n)
    retained = cfg.retained_iterations()
    static_weights, dynamic_weights = cfg.block_weights(static=True), cfg.block_weights(static=False)
    sigma = np.eye(aug.n)
    beta = np.zeros(DesignMatrix(gd).kappa)

    for iteration in range(1, cfg.iterations + 1):
        # static block
        residuals = mbge_residuals(aug, gd, beta)
        scorer = BgeScorer.zero_mean(residuals, h)
        static_score = scorer.dag_logml(g)
        moves = static_neighbors(g, cfg, gd)
        move, size = propose(moves, static_weights, rng)
        if move is None:
            chain.acceptance.record(NULL_MOVE, False)
        else:
            g_new, _ = apply_move(g, gd, move)
            new_score = scorer.dag_logml(g_new)
            new_size = neighbourhood_size(static_neighbors(g_new, cfg, gd), move.kind.inverse, static_weights)
            accepted = mh_accept(new_score, static_score, size, new_size, rng)
            chain.acceptance.record(move.kind, accepted)
            if accepted:
                g, static_score = g_new, new_score
        sigma = sample_sigma_given_dag(g, residuals, h, rng)

        # dynamic block
        system = RegressionSystem.build(aug, gd, sigma, prior)
        dynamic_score = system.log_marginal(prior)
        moves = dynamic_neighbors(gd, cfg, g)
        move, size = propose(moves, dynamic_weights, rng)
        if move is None:
            chain.acceptance.record(NULL_MOVE, False)
        else:
            _, gd_new = apply_move(g, gd, move)
            new_system = RegressionSystem.build(aug, gd_new, sigma, prior)
            new_score = new_system.log_marginal(prior)
            new_size = neighbourhood_size(dynamic_neighbors(gd_new, cfg, g), move.kind.inverse, dynamic_weights)
            accepted = mh_accept(new_score, dynamic_score, size, new_size, rng)
            chain.acceptance.record(move.kind, accepted)
            if accepted:
                gd, system, dynamic_score = gd_new, new_system, new_score
        beta = system.draw(rng)

        chain.trace[iteration - 1] = static_score + dynamic_score
        if iteration in retained:
            chain.states.append(MbgeState(g=g, gd=gd, sigma=sigma.copy(), beta=beta.copy()))
            chain.retained_scores.append(static_score + dynamic_score)
        _tick(progress, iteration, cfg.iterations)

    chain.duration_ms = (time.perf_counter() - t0) * 1000
    return chain


def run_chain(
    model: Models,
    data: Series,
    cfg: McmcConfig,
    rng: Optional[np.random.Generator] = None,
    bge: Optional[BgeHyper] = None,
    ebge: Optional[EbgeHyper] = None,
    prior: Optional[RegressionPrior] = None,
    progress: Optional[enlighten.Counter] = None,
) -> ChainOutput:
    """
    Run either model's chain, filling in the default hyperparameters for anything not given. Without an explicit
    generator the chain draws from the stream of `cfg.seed`.
    """

    n = as_augmented(data).n
    rng = cfg.chain_rng() if rng is None else rng
    if model == Models.ebge:
        return run_ebge_chain(data, ebge or EbgeHyper.default(n), cfg, rng, progress=progress)
    return run_mbge_chain(data, bge or BgeHyper.default(n), prior or RegressionPrior(), cfg, rng, progress=progress)


# endregion
