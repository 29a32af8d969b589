import os
from typing import Generator

import numpy as np
import pytest

from src.dataio import TimeSeriesData, write_csv
from src.graphs import DynamicGraph, StaticDag
from src.simulate import GroundTruth, simulate_ebge, standardize

FILE_PATH = os.path.abspath(os.path.dirname(__file__))


@pytest.fixture()
def rng() -> Generator[np.random.Generator, None, None]:
    yield np.random.default_rng(20240611)


@pytest.fixture()
def chain_structure() -> Generator[tuple[StaticDag, DynamicGraph], None, None]:
    """
    X1 -> X2 -> X3 with X2(t-1) => X1(t) and X1(t-1) => X3(t).
    """

    yield StaticDag(n=3, edges=[(0, 1), (1, 2)]), DynamicGraph(n=3, edges=[(1, 0), (0, 2)], allow_self_loops=False)


@pytest.fixture()
def two_variable_truth() -> Generator[GroundTruth, None, None]:
    g = StaticDag(n=2, edges=[(0, 1)])
    gd = DynamicGraph(n=2, edges=[(1, 0)], allow_self_loops=False)
    yield GroundTruth(g=g, gd=gd, beta_s={(0, 1): 1.2}, beta_d={(1, 0): -0.8}, noise_var=1.0)


@pytest.fixture()
def two_variable_series(two_variable_truth: GroundTruth) -> Generator[TimeSeriesData, None, None]:
    yield standardize(simulate_ebge(two_variable_truth, 12, np.random.default_rng(7)))


@pytest.fixture()
def dataset_file(tmp_path, two_variable_truth: GroundTruth) -> Generator[str, None, None]:
    path = str(tmp_path / "dataset.csv")
    write_csv(simulate_ebge(two_variable_truth, 10, np.random.default_rng(11)), path)
    yield path
