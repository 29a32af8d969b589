import pytest

from src.constants import EquivalenceModes, Models
from src.cpdag import (
    brute_force_class,
    class_cpdag,
    dag_to_cpdag,
    dag_to_cpdag_constrained,
    ebge_cpdag,
    equivalence_class_cpdag,
    mbge_cpdag,
    meek_closure,
    model_cpdag,
    naive_augmented_cpdag,
    shd,
)
from src.exc import EnumerationCapException, ValidationException
from src.graphs import (
    Cpdag,
    DynamicGraph,
    StaticDag,
    build_augmented,
    enumerate_dags,
    enumerate_dynamic_graphs,
)

# region test static CPDAGs


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_dag_to_cpdag_matches_brute_force(n):
    for dag in enumerate_dags(n):
        expected = equivalence_class_cpdag(dag, DynamicGraph(n=n), EquivalenceModes.standard).restrict(n)
        assert dag_to_cpdag(dag) == expected, sorted(dag.edges)


def test_dag_to_cpdag_collider():
    cpdag = dag_to_cpdag(StaticDag(n=3, edges=[(0, 2), (1, 2)]))
    assert cpdag == Cpdag(n=3, directed=[(0, 2), (1, 2)])


def test_dag_to_cpdag_chain_is_undirected():
    chain = StaticDag(n=4, edges=[(0, 1), (1, 2), (2, 3)])
    assert dag_to_cpdag(chain) == Cpdag(n=4, undirected=[(0, 1), (1, 2), (2, 3)])


def test_constrained_cpdag_propagates_fixed_edge():
    chain = StaticDag(n=4, edges=[(3, 2), (2, 1), (1, 0)])
    assert dag_to_cpdag_constrained(chain, fixed=[(3, 2)]) == Cpdag(n=4, directed=[(3, 2), (2, 1), (1, 0)])


def test_constrained_cpdag_rejects_foreign_edge():
    with pytest.raises(ValidationException):
        dag_to_cpdag_constrained(StaticDag(n=2, edges=[(0, 1)]), fixed=[(1, 0)])


def test_meek_closure_is_idempotent():
    cpdag = Cpdag(n=4, directed=[(0, 1)], undirected=[(1, 2), (2, 3)])
    closed = meek_closure(cpdag)
    assert closed == Cpdag(n=4, directed=[(0, 1), (1, 2), (2, 3)])
    assert meek_closure(closed) == closed


def test_class_cpdag_requires_members():
    with pytest.raises(ValidationException):
        class_cpdag([])


# endregion

# region test dynamic CPDAGs


def test_worked_example_three_variables(chain_structure):
    g, gd = chain_structure
    mbge = mbge_cpdag(g, gd)
    ebge = ebge_cpdag(g, gd)
    naive = naive_augmented_cpdag(g, gd)
    assert mbge == Cpdag(n=6, directed=[(4, 0), (3, 2)], undirected=[(0, 1), (1, 2)])
    assert ebge == Cpdag(n=6, directed=[(0, 1), (1, 2), (4, 0), (3, 2)])
    assert naive == Cpdag(n=6, directed=[(4, 0), (1, 2), (3, 2)], undirected=[(0, 1)])
    assert shd(naive, ebge) == 1
    assert shd(naive, mbge) == 1
    assert shd(mbge, ebge) == 2


def test_worked_example_six_variables():
    g = StaticDag(n=6, edges=[(0, 1), (1, 2), (2, 3), (4, 5)])
    gd = DynamicGraph(n=6, edges=[(4, 1), (3, 0)], allow_self_loops=False)
    ebge = ebge_cpdag(g, gd)
    assert ebge == Cpdag(n=12, directed=[(0, 1), (1, 2), (2, 3), (10, 1), (9, 0)], undirected=[(4, 5)])
    mbge = mbge_cpdag(g, gd)
    assert mbge == Cpdag(n=12, directed=[(10, 1), (9, 0)], undirected=[(0, 1), (1, 2), (2, 3), (4, 5)])


def test_shared_dynamic_parent_leaves_static_edge_reversible():
    # X3 drives both endpoints of X1 -> X2, so no v-structure pins the static edge
    g = StaticDag(n=3, edges=[(0, 1)])
    gd = DynamicGraph(n=3, edges=[(2, 0), (2, 1)], allow_self_loops=False)
    assert ebge_cpdag(g, gd) == Cpdag(n=6, directed=[(5, 0), (5, 1)], undirected=[(0, 1)])


def test_ebge_cpdag_matches_time_series_classes():
    for g in enumerate_dags(3):
        for gd in enumerate_dynamic_graphs(3):
            expected = equivalence_class_cpdag(g, gd, EquivalenceModes.ts)
            assert ebge_cpdag(g, gd) == expected, (sorted(g.edges), sorted(gd.edges))


def test_ebge_cpdag_matches_constrained_cpdag():
    for g in enumerate_dags(3):
        for gd in enumerate_dynamic_graphs(3):
            aug = build_augmented(g, gd)
            assert ebge_cpdag(g, gd) == dag_to_cpdag_constrained(aug.to_dag(), aug.dynamic_edges)


def test_dynamic_edges_are_always_directed():
    for g in enumerate_dags(3):
        for gd in enumerate_dynamic_graphs(3, allow_self_loops=True):
            dynamic = build_augmented(g, gd).dynamic_edges
            for cpdag in (ebge_cpdag(g, gd), mbge_cpdag(g, gd)):
                assert dynamic <= cpdag.directed


def test_unshared_dynamic_parent_compels_static_edge():
    for g in enumerate_dags(3):
        for gd in enumerate_dynamic_graphs(3):
            cpdag = ebge_cpdag(g, gd)
            for j, i in g.edges:
                if set(gd.parents(i)) - set(gd.parents(j)):
                    assert (j, i) in cpdag.directed


def test_ebge_cpdag_refines_mbge_cpdag():
    for g in enumerate_dags(3):
        for gd in enumerate_dynamic_graphs(3):
            mbge, ebge = mbge_cpdag(g, gd), ebge_cpdag(g, gd)
            assert mbge.directed <= ebge.directed
            assert ebge.undirected <= mbge.undirected


def test_model_cpdag(chain_structure):
    g, gd = chain_structure
    assert model_cpdag(g, gd, Models.ebge) == ebge_cpdag(g, gd)
    assert model_cpdag(g, gd, Models.mbge) == mbge_cpdag(g, gd)


def test_brute_force_class_cap():
    with pytest.raises(EnumerationCapException):
        brute_force_class(StaticDag(n=5), DynamicGraph(n=5), EquivalenceModes.ts)


def test_brute_force_class_keeps_dynamic_graph(chain_structure):
    g, gd = chain_structure
    for member in brute_force_class(g, gd, EquivalenceModes.standard):
        assert member.gd == gd
    # the eBGe class of the worked example is a single structure
    assert len(brute_force_class(g, gd, EquivalenceModes.ts)) == 1


# endregion

# region test shd


def test_shd_is_a_metric(chain_structure):
    g, gd = chain_structure
    a, b = mbge_cpdag(g, gd), ebge_cpdag(g, gd)
    assert shd(a, a) == 0
    assert shd(a, b) == shd(b, a)


@pytest.mark.parametrize(
    "a, b, distance",
    [
        (Cpdag(n=2, directed=[(0, 1)]), Cpdag(n=2, directed=[(1, 0)]), 1),
        (Cpdag(n=2, directed=[(0, 1)]), Cpdag(n=2, undirected=[(0, 1)]), 1),
        (Cpdag(n=2, directed=[(0, 1)]), Cpdag(n=2), 1),
        (Cpdag(n=3, undirected=[(0, 1), (1, 2)]), Cpdag(n=3, directed=[(0, 2)]), 3),
    ],
    ids=["reversed", "undirected", "missing", "disjoint"],
)
def test_shd_counts_differing_pairs(a, b, distance):
    assert shd(a, b) == distance


def test_shd_requires_matching_sizes():
    with pytest.raises(ValidationException):
        shd(Cpdag(n=2), Cpdag(n=3))


# endregion
