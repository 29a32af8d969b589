import os
import sys
import time
from functools import wraps
from typing import Any, Callable, Optional, Union

import click
import enlighten
import numpy as np
from click.core import ParameterSource

from src.constants import (
    DEFAULT_ALPHA_MU,
    DEFAULT_BURN_IN_FRACTION,
    DEFAULT_ITERATIONS,
    DEFAULT_LAMBDA2,
    DEFAULT_NOISE_VAR,
    DEFAULT_THINNING,
    FORMAT_VERSION,
    SEED_ENVVAR,
    CpdagModes,
    Models,
    OutputFiles,
    PrBlocks,
    StructureSources,
    dataset_file,
    truth_file,
)
from src.cpdag import dag_to_cpdag, model_cpdag, naive_augmented_cpdag
from src.dataio import (
    AugmentedData,
    DatasetSpec,
    TimeSeriesData,
    as_augmented,
    external_parent_mode,
    load_csv,
    write_csv,
)
from src.evaluate import (
    auprc,
    auprc_study,
    chain_to_cpdags,
    distinct_cpdags,
    edge_posteriors,
    loocv_predict_ebge,
    loocv_predict_mbge,
    shd_study,
)
from src.graphs import StaticDag
from src.inference import ChainOutput, McmcConfig, run_chain
from src.io import (
    cpdag_key,
    ensure_directory,
    format_cpdag,
    format_structure,
    read_json,
    read_structure,
    write_json,
    write_rows,
    write_text,
)
from src.manifest import RunManifest, load_config
from src.scores import BgeHyper, EbgeHyper, RegressionPrior
from src.simulate import sample_ground_truth, simulate_experiments
from src.utils import (
    bold,
    derive_rng,
    exit_code_handler,
    fan_out,
    log_hours_minutes_seconds_elapsed,
    status,
    text_to_list,
)

# https://stackoverflow.com/questions/12492810/python-how-can-i-make-the-ansi-escape-codes-to-work-also-in-windows
os.system("")  # enables ansi escape characters in terminal

Series = Union[TimeSeriesData, AugmentedData]

# region shared options


def with_config(func: Callable[..., None]) -> Callable[..., None]:
    """
    Merge a `--config` JSON file into the command's parameters. Explicit flags and environment variables win over the
    file, which wins over defaults. Keys without a matching flag (such as `move_probabilities`) reach the command
    through `settings`, which is also what the manifest echoes.
    """

    @wraps(func)
    def wrapper(**kwargs: Any) -> None:
        ctx = click.get_current_context()
        config_path = kwargs.pop("config")
        config = load_config(config_path) if config_path else {}
        for name, value in config.items():
            if name in kwargs and ctx.get_parameter_source(name) == ParameterSource.DEFAULT:
                kwargs[name] = value
        settings = {
            **{k: v for k, v in config.items() if k not in kwargs},
            **{k: list(v) if isinstance(v, tuple) else v for k, v in kwargs.items()},
        }
        func(settings=settings, **kwargs)

    return wrapper


def common_options(func: Callable[..., None]) -> Callable[..., None]:
    func = click.option(
        "--config",
        type=click.Path(exists=True, dir_okay=False),
        default=None,
        help="JSON file of option values (keys are option names with underscores). Explicit flags take precedence.",
    )(func)
    func = click.option(
        "--seed",
        type=int,
        default=0,
        envvar=SEED_ENVVAR,
        show_envvar=True,
        help="Master seed. Every replicate, fold and chain derives its own stream from it.",
    )(func)
    func = click.option(
        "--out",
        type=click.Path(file_okay=False),
        required=True,
        help="Directory receiving the result files and the run manifest.",
    )(func)
    return func


def jobs_option(func: Callable[..., None]) -> Callable[..., None]:
    return click.option(
        "--jobs",
        type=click.IntRange(1, None),
        default=1,
        help="Worker threads for independent replicates or folds. Output does not depend on this value.",
    )(func)


def chain_options(func: Callable[..., None]) -> Callable[..., None]:
    for decorator in reversed(
        [
            click.option("--model", type=click.Choice([m.value for m in Models]), default=Models.mbge.value),
            click.option("--iters", type=click.IntRange(1, None), default=DEFAULT_ITERATIONS, help="MCMC iterations."),
            click.option(
                "--burn-in",
                type=click.FloatRange(0, 1, max_open=True),
                default=DEFAULT_BURN_IN_FRACTION,
                help="Fraction of iterations discarded before sampling.",
            ),
            click.option(
                "--thin", type=click.IntRange(1, None), default=DEFAULT_THINNING, help="Keep every k-th iteration."
            ),
            click.option(
                "--max-fan-in",
                type=click.IntRange(0, None),
                default=None,
                help="Cap on static and on dynamic parents per node.",
            ),
            click.option(
                "--allow-self-loops/--forbid-self-loops",
                default=False,
                help="Whether dynamic self-loops X_i(t-1) => X_i(t) may be proposed.",
            ),
            click.option(
                "--forbid-joint",
                is_flag=True,
                default=False,
                help="Never let a node have the same variable as both static and dynamic parent.",
            ),
            click.option("--lambda2", type=float, default=DEFAULT_LAMBDA2, help="mBGe coefficient prior variance."),
            click.option("--alpha-mu", type=float, default=DEFAULT_ALPHA_MU, help="Normal-Wishart mean precision."),
        ]
    ):
        func = decorator(func)
    return func


def data_options(func: Callable[..., None]) -> Callable[..., None]:
    func = click.option(
        "--standardize/--no-standardize",
        default=True,
        help="Standardize every column to zero mean and unit variance before learning.",
    )(func)
    func = click.option(
        "--externals",
        type=click.Path(exists=True, dir_okay=False),
        default=None,
        help="CSV of external parents observed alongside the data; replaces the lagged block.",
    )(func)
    func = click.option(
        "--data",
        type=click.Path(exists=True, dir_okay=False),
        required=True,
        help="CSV dataset, one column per variable.",
    )(func)
    return func


def mcmc_config(settings: dict[str, Any]) -> McmcConfig:
    return McmcConfig(
        iterations=settings["iters"],
        burn_in_fraction=settings["burn_in"],
        thinning=settings["thin"],
        seed=settings["seed"],
        max_fan_in=settings["max_fan_in"],
        forbid_self_loops=not settings["allow_self_loops"],
        forbid_joint_static_dynamic_parent=settings["forbid_joint"],
        move_probabilities=settings.get("move_probabilities"),
    )


def hyperparameters(n: int, alpha_mu: float) -> tuple[BgeHyper, EbgeHyper]:
    bge = BgeHyper(alpha_w=n + 2, r=np.eye(n), nu=np.zeros(n), alpha_mu=alpha_mu)
    ebge = EbgeHyper(alpha_w=2 * n + 2, r=np.eye(2 * n), nu=np.zeros(2 * n), alpha_mu=alpha_mu)
    return bge, ebge


def load_series(manifest: RunManifest, data: str, externals: Optional[str], standardize: bool) -> Series:
    manifest.add_input(data)
    if externals is None:
        return load_csv(DatasetSpec(path=data, standardize=standardize))
    manifest.add_input(externals)
    return external_parent_mode(
        load_csv(DatasetSpec(path=data)), load_csv(DatasetSpec(path=externals)), standardize=standardize
    )


def x_values(value: Union[str, list[int]]) -> list[int]:
    return value if isinstance(value, list) else text_to_list(value)


def finish(manifest: RunManifest, out: str, t0: float) -> None:
    manifest.write(out)
    status(f"Results written to {bold(out)}.")
    log_hours_minutes_seconds_elapsed(t0)


# endregion


@click.group(context_settings={"show_default": True})
def cli() -> None:
    """
    Structure learning for Gaussian dynamic Bayesian networks with static (intra-slice) and dynamic (inter-slice)
    edges under the mBGe and eBGe scores.
    """


# region commands


@cli.command(context_settings={"show_default": True})
@click.option("--model", type=click.Choice([m.value for m in Models]), default=Models.ebge.value)
@click.option("--n", type=click.IntRange(1, None), default=11, help="Number of variables.")
@click.option("--edges", type=click.IntRange(0, None), default=20, help="Edges of the generating DAG.")
@click.option("--static-x", type=click.IntRange(0, None), default=5, help="How many of those edges are static.")
@click.option("--T", "T", type=click.IntRange(2, None), default=25, help="Time points per experiment.")
@click.option("--reps", type=click.IntRange(0, None), default=10, help="Independent datasets.")
@click.option("--experiments", type=click.IntRange(1, None), default=1, help="Experiments per dataset.")
@click.option("--noise-var", type=float, default=DEFAULT_NOISE_VAR, help="Variance of the Gaussian noise.")
@jobs_option
@common_options
@exit_code_handler
@with_config
def simulate(
    model: str,
    n: int,
    edges: int,
    static_x: int,
    T: int,
    reps: int,
    experiments: int,
    noise_var: float,
    jobs: int,
    seed: int,
    out: str,
    settings: dict[str, Any],
) -> None:
    """
    Draw random ground truths and simulate datasets from them. Writes dataset_<k>.csv and truth_<k>.txt (edge list
    with coefficients) per replicate.
    """

    t0 = time.time()
    if static_x > edges:
        raise click.BadParameter(f"cannot declare {static_x} of {edges} edges static", param_hint="--static-x")
    if edges > n * (n - 1) // 2:
        raise click.BadParameter(f"a DAG on {n} nodes holds at most {n * (n - 1) // 2} edges", param_hint="--edges")
    ensure_directory(out)
    manifest = RunManifest(subcommand="simulate", config=settings, seed=seed)

    def replicate(k: int) -> tuple[str, TimeSeriesData]:
        rng = derive_rng(seed, k)
        gt = sample_ground_truth(n, edges, static_x, rng, noise_var=noise_var)
        data = simulate_experiments(gt, Models(model), [T] * experiments, rng)
        return format_structure(gt.g, gt.gd, gt.beta_s, gt.beta_d), data

    for k, (truth, data) in enumerate(fan_out(replicate, list(range(1, reps + 1)), jobs), start=1):
        write_csv(data, os.path.join(out, dataset_file(k)))
        write_text(os.path.join(out, truth_file(k)), truth)
        manifest.add_output(dataset_file(k))
        manifest.add_output(truth_file(k))
    status(f"Simulated {bold(reps)} {bold(model)} dataset{'s' if reps != 1 else ''}.")
    finish(manifest, out, t0)


@cli.command(context_settings={"show_default": True})
@data_options
@chain_options
@click.option("--record-timings", is_flag=True, default=False, help="Include the chain's wall-clock duration.")
@click.option("--downsample", type=click.IntRange(1, None), default=1, help="Keep every k-th score in the trace.")
@common_options
@exit_code_handler
@with_config
def learn(
    data: str,
    externals: Optional[str],
    standardize: bool,
    model: str,
    iters: int,
    burn_in: float,
    thin: int,
    max_fan_in: Optional[int],
    allow_self_loops: bool,
    forbid_joint: bool,
    lambda2: float,
    alpha_mu: float,
    record_timings: bool,
    downsample: int,
    seed: int,
    out: str,
    settings: dict[str, Any],
) -> None:
    """
    Run one MCMC chain. Writes chain.json, summary.json, cpdags.csv (columns cpdag,count) and edge_posteriors.csv
    (columns kind,source,target,probability with kind S or D and 1-based nodes).
    """

    t0 = time.time()
    ensure_directory(out)
    manifest = RunManifest(subcommand="learn", config=settings, seed=seed)
    series = load_series(manifest, data, externals, standardize)
    cfg = mcmc_config(settings)
    n = as_augmented(series).n
    bge, ebge = hyperparameters(n, alpha_mu)

    manager = enlighten.get_manager(stream=sys.stderr)
    counter = manager.counter(total=iters, desc=f"{model} iterations", position=1, leave=False)
    chain = run_chain(
        Models(model),
        series,
        cfg,
        bge=bge,
        ebge=ebge,
        prior=RegressionPrior(lambda2),
        progress=counter,
    )
    manager.stop()

    write_json(os.path.join(out, OutputFiles.chain.value), chain.to_json(downsample, record_timings))
    manifest.add_output(OutputFiles.chain.value)
    summary: dict[str, Any] = {
        "format_version": FORMAT_VERSION,
        "model": model,
        "n": n,
        "retained": len(chain.states),
        "acceptance": chain.acceptance.to_dict(),
    }
    if chain.states:
        cpdags = chain_to_cpdags(chain)
        counts = distinct_cpdags(cpdags)
        write_rows(
            os.path.join(out, OutputFiles.cpdags.value),
            ["cpdag", "count"],
            [(cpdag_key(cpdag, n), count) for cpdag, count in counts],
        )
        write_rows(
            os.path.join(out, OutputFiles.edge_posteriors.value),
            ["kind", "source", "target", "probability"],
            edge_posteriors(cpdags).rows(),
        )
        manifest.add_output(OutputFiles.cpdags.value)
        manifest.add_output(OutputFiles.edge_posteriors.value)
        summary["distinct_cpdags"] = len(counts)
        summary["modal_cpdag"] = cpdag_key(counts[0][0], n)
    else:
        status("No samples were retained; increase --iters or lower --thin for posterior summaries.")
    write_json(os.path.join(out, OutputFiles.summary.value), summary)
    manifest.add_output(OutputFiles.summary.value)
    status(f"Retained {bold(len(chain.states))} samples from {bold(iters)} iterations.")
    finish(manifest, out, t0)


@cli.command(context_settings={"show_default": True})
@click.option(
    "--structure", type=click.Path(exists=True, dir_okay=False), required=True, help="Structure edge-list file."
)
@click.option(
    "--mode",
    type=click.Choice([m.value for m in CpdagModes]),
    default=CpdagModes.ebge.value,
    help="Which equivalence notion to apply. `static` ignores dynamic edges.",
)
@common_options
@exit_code_handler
@with_config
def cpdag(structure: str, mode: str, seed: int, out: str, settings: dict[str, Any]) -> None:
    """
    Convert a structure into its CPDAG. Writes cpdag.txt (S/D compelled lines, U reversible lines) and prints it.
    """

    t0 = time.time()
    ensure_directory(out)
    manifest = RunManifest(subcommand="cpdag", config=settings, seed=seed)
    manifest.add_input(structure)
    parsed = read_structure(structure)
    if mode == CpdagModes.static.value:
        result = dag_to_cpdag(parsed.g)
    elif mode == CpdagModes.naive.value:
        result = naive_augmented_cpdag(parsed.g, parsed.gd)
    else:
        result = model_cpdag(parsed.g, parsed.gd, Models(mode))
    text = format_cpdag(result, parsed.n)
    write_text(os.path.join(out, OutputFiles.cpdag.value), text)
    manifest.add_output(OutputFiles.cpdag.value)
    click.echo(text, nl=False)
    finish(manifest, out, t0)


@cli.command(name="shd-study", context_settings={"show_default": True})
@click.option(
    "--source",
    type=click.Choice([s.value for s in StructureSources]),
    default=StructureSources.random.value,
    help="Draw random DAGs or reuse the DAG in --asset.",
)
@click.option(
    "--asset",
    type=click.Path(dir_okay=False),
    default=None,
    help="Edge-list file whose S and D lines together form the DAG to split.",
)
@click.option("--n", type=click.IntRange(1, None), default=11, help="Variables of random DAGs.")
@click.option("--edges", type=click.IntRange(0, None), default=20, help="Edges of random DAGs.")
@click.option("--x-grid", default="0..20", help='Static edge counts, e.g. "0..20" or "2,4,6".')
@click.option("--reps", type=click.IntRange(1, None), default=25, help="Replicates per static edge count.")
@jobs_option
@common_options
@exit_code_handler
@with_config
def shd_study_command(
    source: str,
    asset: Optional[str],
    n: int,
    edges: int,
    x_grid: Union[str, list[int]],
    reps: int,
    jobs: int,
    seed: int,
    out: str,
    settings: dict[str, Any],
) -> None:
    """
    SHD between mBGe and eBGe CPDAGs as more edges are declared static. Writes shd_study.csv (columns
    x,replicate,shd), shd_summary.csv (columns x,mean,sd,replicates) and summary.json.
    """

    t0 = time.time()
    if source == StructureSources.asset.value and asset is None:
        raise click.BadParameter("an asset file is required with --source asset", param_hint="--asset")
    ensure_directory(out)
    manifest = RunManifest(subcommand="shd-study", config=settings, seed=seed)
    dag: Optional[StaticDag] = None
    if source == StructureSources.asset.value and asset is not None:
        parsed = read_structure(asset)
        manifest.add_input(asset)
        dag = StaticDag(n=parsed.n, edges=parsed.g.edges | parsed.gd.edges)
    grid = x_values(x_grid)

    manager = enlighten.get_manager(stream=sys.stderr)
    counter = manager.counter(total=len(grid) * reps, desc="Replicates", position=1, leave=False)
    result = shd_study(StructureSources(source), n, edges, grid, reps, seed, asset=dag, jobs=jobs, progress=counter)
    manager.stop()

    write_rows(os.path.join(out, OutputFiles.shd_study.value), ["x", "replicate", "shd"], result.rows())
    write_rows(
        os.path.join(out, OutputFiles.shd_summary.value), ["x", "mean", "sd", "replicates"], result.summary_rows()
    )
    peak = grid[int(np.argmax(result.means))]
    write_json(
        os.path.join(out, OutputFiles.summary.value),
        {
            "format_version": FORMAT_VERSION,
            "x": grid,
            "mean": [float(m) for m in result.means],
            "replicates": reps,
            "peak_x": peak,
        },
    )
    for name in (OutputFiles.shd_study, OutputFiles.shd_summary, OutputFiles.summary):
        manifest.add_output(name.value)
    status(f"Mean SHD peaks at x = {bold(peak)}.")
    finish(manifest, out, t0)


@cli.command(name="eval", context_settings={"show_default": True})
@click.option("--chain", type=click.Path(exists=True, dir_okay=False), required=True, help="chain.json from learn.")
@click.option("--truth", type=click.Path(exists=True, dir_okay=False), required=True, help="True structure file.")
@click.option(
    "--model",
    type=click.Choice([m.value for m in Models]),
    default=None,
    help="CPDAG conversion for samples and truth. Defaults to the chain's model.",
)
@click.option(
    "--block",
    type=click.Choice([b.value for b in PrBlocks]),
    multiple=True,
    default=[PrBlocks.pooled.value],
    help="Edge blocks to rank; repeat the option to score several.",
)
@click.option("--include-self-loops", is_flag=True, default=False, help="Rank dynamic self-loops as candidates.")
@common_options
@exit_code_handler
@with_config
def eval_command(
    chain: str,
    truth: str,
    model: Optional[str],
    block: Union[tuple[str, ...], list[str]],
    include_self_loops: bool,
    seed: int,
    out: str,
    settings: dict[str, Any],
) -> None:
    """
    Area under the precision-recall curve of a chain's edge posteriors. Writes auprc.csv (columns
    block,area,positives,candidates), pr_curve.csv (columns block,recall,precision) and summary.json.
    """

    t0 = time.time()
    ensure_directory(out)
    manifest = RunManifest(subcommand="eval", config=settings, seed=seed)
    manifest.add_input(chain)
    manifest.add_input(truth)
    samples = ChainOutput.from_json(read_json(chain))
    target = read_structure(truth)
    conversion = Models(model) if model else samples.model
    posterior = edge_posteriors(chain_to_cpdags(samples, conversion))
    truth_cpdag = model_cpdag(target.g, target.gd, conversion)
    results = [auprc(posterior, truth_cpdag, PrBlocks(b), include_self_loops) for b in block]

    write_rows(
        os.path.join(out, OutputFiles.auprc.value),
        ["block", "area", "positives", "candidates"],
        [(r.block.value, r.area, r.positives, r.candidates) for r in results],
    )
    write_rows(
        os.path.join(out, OutputFiles.pr_curve.value),
        ["block", "recall", "precision"],
        [row for r in results for row in r.curve_rows()],
    )
    write_json(
        os.path.join(out, OutputFiles.summary.value),
        {
            "format_version": FORMAT_VERSION,
            "model": conversion.value,
            "interpolation": results[0].interpolation,
            "area": {r.block.value: r.area for r in results},
            "samples": posterior.samples,
        },
    )
    for name in (OutputFiles.auprc, OutputFiles.pr_curve, OutputFiles.summary):
        manifest.add_output(name.value)
    for r in results:
        status(f"AUPRC ({r.block.value}): {bold(f'{r.area:.4f}')}")
    finish(manifest, out, t0)


@cli.command(context_settings={"show_default": True})
@data_options
@chain_options
@jobs_option
@common_options
@exit_code_handler
@with_config
def predict(
    data: str,
    externals: Optional[str],
    standardize: bool,
    model: str,
    iters: int,
    burn_in: float,
    thin: int,
    max_fan_in: Optional[int],
    allow_self_loops: bool,
    forbid_joint: bool,
    lambda2: float,
    alpha_mu: float,
    jobs: int,
    seed: int,
    out: str,
    settings: dict[str, Any],
) -> None:
    """
    Leave-one-out predictive log-probabilities, holding out one transition at a time. Writes predictive.csv (columns
    fold,model,log_predictive) and summary.json.
    """

    t0 = time.time()
    ensure_directory(out)
    manifest = RunManifest(subcommand="predict", config=settings, seed=seed)
    series = load_series(manifest, data, externals, standardize)
    cfg = mcmc_config(settings)
    bge, ebge = hyperparameters(as_augmented(series).n, alpha_mu)

    manager = enlighten.get_manager(stream=sys.stderr)
    counter = manager.counter(total=as_augmented(series).rows, desc="Folds", position=1, leave=False)
    if model == Models.ebge.value:
        result = loocv_predict_ebge(series, ebge, cfg, seed, jobs=jobs, progress=counter)
    else:
        result = loocv_predict_mbge(series, bge, RegressionPrior(lambda2), cfg, seed, jobs=jobs, progress=counter)
    manager.stop()

    write_rows(os.path.join(out, OutputFiles.predictive.value), ["fold", "model", "log_predictive"], result.rows())
    write_json(
        os.path.join(out, OutputFiles.summary.value),
        {
            "format_version": FORMAT_VERSION,
            "model": model,
            "folds": len(result.folds),
            "mean_log_predictive": float(np.mean(result.log_predictive)),
        },
    )
    for name in (OutputFiles.predictive, OutputFiles.summary):
        manifest.add_output(name.value)
    status(f"Mean log predictive probability: {bold(f'{np.mean(result.log_predictive):.4f}')}")
    finish(manifest, out, t0)


@cli.command(name="auprc-study", context_settings={"show_default": True})
@click.option("--n", type=click.IntRange(1, None), default=6, help="Number of variables.")
@click.option("--edges", type=click.IntRange(0, None), default=10, help="Edges of the generating DAG.")
@click.option("--x-grid", default="5", help="Static edge counts.")
@click.option("--T-grid", "T_grid", default="100", help="Series lengths.")
@click.option("--reps", type=click.IntRange(1, None), default=5, help="Replicates per cell.")
@click.option("--iters", type=click.IntRange(1, None), default=20_000, help="MCMC iterations per chain.")
@click.option("--burn-in", type=click.FloatRange(0, 1, max_open=True), default=DEFAULT_BURN_IN_FRACTION)
@click.option("--thin", type=click.IntRange(1, None), default=DEFAULT_THINNING)
@click.option("--noise-var", type=float, default=DEFAULT_NOISE_VAR, help="Variance of the Gaussian noise.")
@jobs_option
@common_options
@exit_code_handler
@with_config
def auprc_study_command(
    n: int,
    edges: int,
    x_grid: Union[str, list[int]],
    T_grid: Union[str, list[int]],
    reps: int,
    iters: int,
    burn_in: float,
    thin: int,
    noise_var: float,
    jobs: int,
    seed: int,
    out: str,
    settings: dict[str, Any],
) -> None:
    """
    Cross-model study: simulate under each model, learn with both, score against the truth. Writes auprc_study.csv
    (columns data_model,learn_model,x,T,replicate,area) and summary.json with per-cell means and 95% half-widths.
    """

    t0 = time.time()
    ensure_directory(out)
    manifest = RunManifest(subcommand="auprc-study", config=settings, seed=seed)
    cfg = McmcConfig(iterations=iters, burn_in_fraction=burn_in, thinning=thin, seed=seed)
    grid, lengths = x_values(x_grid), x_values(T_grid)

    manager = enlighten.get_manager(stream=sys.stderr)
    counter = manager.counter(total=len(Models) * len(grid) * len(lengths) * reps, desc="Cells", position=1)
    result = auprc_study(n, edges, grid, lengths, reps, cfg, seed, noise_var=noise_var, jobs=jobs, progress=counter)
    manager.stop()

    write_rows(
        os.path.join(out, OutputFiles.auprc_study.value),
        ["data_model", "learn_model", "x", "T", "replicate", "area"],
        result.rows,
    )
    write_json(
        os.path.join(out, OutputFiles.summary.value), {"format_version": FORMAT_VERSION, "cells": result.summary()}
    )
    for name in (OutputFiles.auprc_study, OutputFiles.summary):
        manifest.add_output(name.value)
    finish(manifest, out, t0)


# endregion


if __name__ == "__main__":
    cli()
