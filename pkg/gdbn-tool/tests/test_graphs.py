import numpy as np
import pytest

from src.exc import ValidationException
from src.graphs import (
    AugmentedGraph,
    Cpdag,
    DynamicGraph,
    EnlargedGraph,
    StaticDag,
    build_augmented,
    enumerate_dags,
    enumerate_dynamic_graphs,
    is_acyclic,
    orientations,
    random_dag,
    reachability,
    skeleton,
    split_static_dynamic,
    v_structures,
)

# region test StaticDag and DynamicGraph


def test_static_dag_valid():
    dag = StaticDag(n=3, edges=[(0, 1), (1, 2), (0, 2)])
    assert dag.parents(2) == (0, 1)
    assert dag.children(0) == (1, 2)
    assert dag.topological_order() == [0, 1, 2]
    assert dag.adjacent(2, 0) and not dag.adjacent(1, 1)


@pytest.mark.parametrize(
    "edges",
    [[(0, 1), (1, 2), (2, 0)], [(1, 1)], [(0, 3)]],
    ids=["cycle", "self-edge", "out of range"],
)
def test_static_dag_invalid(edges):
    with pytest.raises(ValidationException):
        StaticDag(n=3, edges=edges)


def test_dynamic_graph_self_loops():
    assert DynamicGraph(n=2, edges=[(0, 0), (1, 0)]).parents(0) == (0, 1)
    with pytest.raises(ValidationException):
        DynamicGraph(n=2, edges=[(0, 0)], allow_self_loops=False)


def test_dynamic_graph_equality_ignores_self_loop_flag():
    assert DynamicGraph(n=2, edges=[(0, 1)]) == DynamicGraph(n=2, edges=[(0, 1)], allow_self_loops=False)


def test_with_edges_returns_new_graph():
    dag = StaticDag(n=2)
    extended = dag.with_edges([(0, 1)])
    assert dag.edges == frozenset() and extended.edges == frozenset({(0, 1)})


def test_is_acyclic():
    assert is_acyclic([(0, 1), (1, 2)], 3)
    assert not is_acyclic([(0, 1), (1, 0)], 2)


def test_reachability():
    reach = reachability(4, [(0, 1), (1, 2)])
    assert reach[0, 2] and reach[0, 1] and reach[1, 2]
    assert not reach[2, 0] and not reach[0, 3] and not reach[0, 0]


# endregion

# region test AugmentedGraph and EnlargedGraph


def test_augmented_graph(chain_structure):
    g, gd = chain_structure
    aug = build_augmented(g, gd)
    assert aug.dynamic_edges == frozenset({(4, 0), (3, 2)})
    assert aug.family(2) == (1, 3)
    assert aug.family(0) == (4,)
    assert aug.to_dag().n == 6
    assert AugmentedGraph.from_dag(aug.to_dag()) == aug


def test_augmented_graph_mismatched_sizes():
    with pytest.raises(ValidationException):
        AugmentedGraph(g=StaticDag(n=2), gd=DynamicGraph(n=3))


def test_augmented_graph_from_dag_rejects_parents_of_lagged_nodes():
    with pytest.raises(ValidationException):
        AugmentedGraph.from_dag(StaticDag(n=4, edges=[(0, 2)]))


def test_enlarged_graph(chain_structure):
    enlarged = EnlargedGraph(build_augmented(*chain_structure))
    dag = enlarged.to_dag()
    assert dag.n == 12
    for j in range(3):
        assert dag.parents(3 + j) == enlarged.pseudo_parents(j) == (6 + 2 * j, 7 + 2 * j)
    assert len(enlarged.pseudo_edges) == 6


# endregion

# region test Cpdag


def test_cpdag_status():
    cpdag = Cpdag(n=3, directed=[(0, 1)], undirected=[(2, 1)])
    assert cpdag.status(0, 1) == 1
    assert cpdag.status(1, 0) == -1
    assert cpdag.status(1, 2) == cpdag.status(2, 1) == 2
    assert cpdag.status(0, 2) == 0
    assert cpdag.undirected == frozenset({(1, 2)})


@pytest.mark.parametrize(
    "directed, undirected",
    [([(0, 1)], [(0, 1)]), ([(0, 1), (1, 0)], []), ([(0, 1), (1, 2), (2, 0)], [])],
    ids=["directed and undirected", "both directions", "directed cycle"],
)
def test_cpdag_invalid(directed, undirected):
    with pytest.raises(ValidationException):
        Cpdag(n=3, directed=directed, undirected=undirected)


def test_cpdag_to_matrix_credits_undirected_both_ways():
    matrix = Cpdag(n=3, directed=[(0, 1)], undirected=[(1, 2)]).to_matrix()
    assert matrix[0, 1] and not matrix[1, 0]
    assert matrix[1, 2] and matrix[2, 1]


def test_cpdag_restrict():
    cpdag = Cpdag(n=4, directed=[(3, 0)], undirected=[(0, 1)]).restrict(2)
    assert cpdag == Cpdag(n=2, undirected=[(0, 1)])


# endregion

# region test structure operations


def test_skeleton_and_v_structures():
    collider = StaticDag(n=3, edges=[(0, 2), (1, 2)])
    assert skeleton(collider) == frozenset({(0, 2), (1, 2)})
    assert v_structures(collider) == frozenset({(0, 2, 1)})
    shielded = StaticDag(n=3, edges=[(0, 2), (1, 2), (0, 1)])
    assert v_structures(shielded) == frozenset()


@pytest.mark.parametrize("n, count", [(1, 1), (2, 3), (3, 25), (4, 543)], ids=["n=1", "n=2", "n=3", "n=4"])
def test_enumerate_dags(n, count):
    dags = list(enumerate_dags(n))
    assert len(dags) == count
    assert len(set(dags)) == count


def test_enumerate_dynamic_graphs():
    assert len(list(enumerate_dynamic_graphs(2))) == 4
    assert len(list(enumerate_dynamic_graphs(2, allow_self_loops=True))) == 16


def test_orientations():
    assert len(list(orientations(3, [(0, 1), (1, 2)]))) == 4
    # a triangle has 8 orientations, 2 of them cyclic
    assert len(list(orientations(3, [(0, 1), (1, 2), (0, 2)]))) == 6
    fixed = list(orientations(4, [(0, 1)], fixed=[(3, 0)]))
    assert all((3, 0) in edges for edges in fixed) and len(fixed) == 2


def test_random_dag(rng):
    for _ in range(20):
        dag = random_dag(6, 8, rng)
        assert len(dag.edges) == 8
        assert is_acyclic(dag.edges, 6)


def test_random_dag_too_many_edges(rng):
    with pytest.raises(ValidationException):
        random_dag(3, 4, rng)


@pytest.mark.parametrize("x", [0, 3, 8], ids=["all dynamic", "mixed", "all static"])
def test_split_static_dynamic(rng, x):
    dag = random_dag(6, 8, rng)
    g, gd = split_static_dynamic(dag, x, rng)
    assert len(g.edges) == x and len(gd.edges) == 8 - x
    assert g.edges | gd.edges == dag.edges
    assert not any(j == i for j, i in gd.edges)


def test_split_static_dynamic_invalid(rng):
    with pytest.raises(ValidationException):
        split_static_dynamic(StaticDag(n=2, edges=[(0, 1)]), 2, rng)


def test_random_dag_reproducible():
    a = random_dag(8, 10, np.random.default_rng(3))
    b = random_dag(8, 10, np.random.default_rng(3))
    assert a == b


# endregion
