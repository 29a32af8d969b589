"""
Graph values for Gaussian dynamic Bayesian networks.

Nodes are 0-based internally. A static DAG lives over the current slice X_1..X_n, a dynamic graph over lag-1 pairs
X_{j,t-1} => X_{i,t}, and the augmented graph relabels both into one DAG over 2n nodes: Z_0..Z_{n-1} for the current
slice and Z_n..Z_{2n-1} for the lagged copies. File formats convert to 1-based indices at the boundary.
"""

from itertools import combinations, product
from typing import Iterable, Iterator, Optional

import attr
import networkx as nx
import numpy as np

from src.exc import ValidationException
from src.utils import bold

Edge = tuple[int, int]
Triple = tuple[int, int, int]


def _edge_set(edges: Iterable[Edge]) -> frozenset[Edge]:
    return frozenset((int(j), int(i)) for j, i in edges)


def _pair(a: int, b: int) -> Edge:
    return (a, b) if a < b else (b, a)


def _check_indices(edges: Iterable[Edge], n: int) -> None:
    for edge in edges:
        if not all(0 <= k < n for k in edge):
            raise ValidationException(f"Edge {bold(edge)} references a node outside of {bold(f'[0, {n})')}.")


def is_acyclic(edges: Iterable[Edge], n: int) -> bool:
    edges = list(edges)
    _check_indices(edges, n)
    graph = nx.DiGraph()
    graph.add_nodes_from(range(n))
    graph.add_edges_from(edges)
    return nx.is_directed_acyclic_graph(graph)


def reachability(n: int, edges: Iterable[Edge]) -> np.ndarray:
    """
    `reach[a, b]` is true iff there is a directed path of length >= 1 from `a` to `b`.
    """

    reach = np.zeros((n, n), dtype=bool)
    for j, i in edges:
        reach[j, i] = True
    for k in range(n):
        reach |= np.outer(reach[:, k], reach[k, :])
    return reach


@attr.s(frozen=True)
class StaticDag:
    n: int = attr.ib(converter=int)
    edges: frozenset[Edge] = attr.ib(factory=frozenset, converter=_edge_set)
    parent_sets: tuple[tuple[int, ...], ...] = attr.ib(init=False, eq=False, repr=False)

    # region initialisation

    def validate(self) -> None:
        if self.n < 0:
            raise ValidationException(f"Node count {bold(self.n)} must be non-negative.")
        _check_indices(self.edges, self.n)
        if any(j == i for j, i in self.edges):
            raise ValidationException("Static DAGs cannot contain self-edges.")
        if not is_acyclic(self.edges, self.n):
            raise ValidationException(f"The static edges {bold(sorted(self.edges))} contain a directed cycle.")

    def __attrs_post_init__(self) -> None:
        self.validate()
        parents: list[list[int]] = [[] for _ in range(self.n)]
        for j, i in self.edges:
            parents[i].append(j)
        object.__setattr__(self, "parent_sets", tuple(tuple(sorted(p)) for p in parents))

    # endregion

    # region public

    def parents(self, i: int) -> tuple[int, ...]:
        return self.parent_sets[i]

    def children(self, j: int) -> tuple[int, ...]:
        return tuple(sorted(i for (k, i) in self.edges if k == j))

    def adjacent(self, a: int, b: int) -> bool:
        return (a, b) in self.edges or (b, a) in self.edges

    def topological_order(self) -> list[int]:
        graph = nx.DiGraph()
        graph.add_nodes_from(range(self.n))
        graph.add_edges_from(self.edges)
        return list(nx.lexicographical_topological_sort(graph))

    def to_matrix(self) -> np.ndarray:
        matrix = np.zeros((self.n, self.n), dtype=bool)
        for j, i in self.edges:
            matrix[j, i] = True
        return matrix

    def with_edges(self, edges: Iterable[Edge]) -> "StaticDag":
        return StaticDag(n=self.n, edges=edges)

    # endregion


@attr.s(frozen=True)
class DynamicGraph:
    n: int = attr.ib(converter=int)
    edges: frozenset[Edge] = attr.ib(factory=frozenset, converter=_edge_set)
    allow_self_loops: bool = attr.ib(default=True, eq=False)
    parent_sets: tuple[tuple[int, ...], ...] = attr.ib(init=False, eq=False, repr=False)

    def validate(self) -> None:
        _check_indices(self.edges, self.n)
        if not self.allow_self_loops and any(j == i for j, i in self.edges):
            raise ValidationException(f"Self-loops are disallowed but present in {bold(sorted(self.edges))}.")

    def __attrs_post_init__(self) -> None:
        self.validate()
        parents: list[list[int]] = [[] for _ in range(self.n)]
        for j, i in self.edges:
            parents[i].append(j)
        object.__setattr__(self, "parent_sets", tuple(tuple(sorted(p)) for p in parents))

    def parents(self, i: int) -> tuple[int, ...]:
        return self.parent_sets[i]

    def with_edges(self, edges: Iterable[Edge]) -> "DynamicGraph":
        return DynamicGraph(n=self.n, edges=edges, allow_self_loops=self.allow_self_loops)


@attr.s(frozen=True)
class AugmentedGraph:
    """
    The static DAG and the dynamic graph merged into one DAG over 2n nodes. Lagged nodes never have parents and every
    dynamic edge points from the lagged block into the current block, so the result is acyclic by construction.
    """

    g: StaticDag = attr.ib()
    gd: DynamicGraph = attr.ib()

    def __attrs_post_init__(self) -> None:
        if self.g.n != self.gd.n:
            raise ValidationException(
                f"Static DAG has {bold(self.g.n)} nodes but the dynamic graph has {bold(self.gd.n)}."
            )

    @property
    def n(self) -> int:
        return self.g.n

    @property
    def static_edges(self) -> frozenset[Edge]:
        return self.g.edges

    @property
    def dynamic_edges(self) -> frozenset[Edge]:
        return frozenset((self.n + j, i) for j, i in self.gd.edges)

    @property
    def edges(self) -> frozenset[Edge]:
        return self.static_edges | self.dynamic_edges

    def family(self, i: int) -> tuple[int, ...]:
        """
        Augmented parent set of current-slice node `i`: static parents followed by relabelled dynamic parents.
        """

        return self.g.parents(i) + tuple(self.n + j for j in self.gd.parents(i))

    def to_dag(self) -> StaticDag:
        return StaticDag(n=2 * self.n, edges=self.edges)

    def split(self) -> tuple[StaticDag, DynamicGraph]:
        return self.g, self.gd

    @classmethod
    def from_dag(cls, dag: StaticDag, allow_self_loops: bool = True) -> "AugmentedGraph":
        """
        Inverse of `to_dag`: a 2n-node DAG whose lagged block only emits edges into the current block.
        """

        if dag.n % 2 != 0:
            raise ValidationException(f"An augmented graph needs an even node count, got {bold(dag.n)}.")
        n = dag.n // 2
        static, dynamic = [], []
        for j, i in dag.edges:
            if i >= n:
                raise ValidationException(f"Lagged node {bold(i)} cannot have parents.")
            (static if j < n else dynamic).append((j % n, i))
        return cls(
            g=StaticDag(n=n, edges=static), gd=DynamicGraph(n=n, edges=dynamic, allow_self_loops=allow_self_loops)
        )


@attr.s(frozen=True)
class Cpdag:
    n: int = attr.ib(converter=int)
    directed: frozenset[Edge] = attr.ib(factory=frozenset, converter=_edge_set)
    undirected: frozenset[Edge] = attr.ib(
        factory=frozenset, converter=lambda edges: frozenset(_pair(int(a), int(b)) for a, b in edges)
    )

    def validate(self) -> None:
        _check_indices(self.directed | self.undirected, self.n)
        for a, b in self.directed:
            if _pair(a, b) in self.undirected:
                raise ValidationException(f"The pair {bold((a, b))} is both directed and undirected.")
            if (b, a) in self.directed:
                raise ValidationException(f"The pair {bold((a, b))} is directed both ways.")
        if any(a == b for a, b in self.directed | self.undirected):
            raise ValidationException("CPDAGs cannot contain self-edges.")
        if not is_acyclic(self.directed, self.n):
            raise ValidationException("The directed part of a CPDAG cannot contain a directed cycle.")

    def __attrs_post_init__(self) -> None:
        self.validate()

    def status(self, a: int, b: int) -> int:
        """
        0 when `a` and `b` are non-adjacent, 1 for a -> b, -1 for b -> a and 2 for a - b.
        """

        if (a, b) in self.directed:
            return 1
        if (b, a) in self.directed:
            return -1
        if _pair(a, b) in self.undirected:
            return 2
        return 0

    def adjacent(self, a: int, b: int) -> bool:
        return self.status(a, b) != 0

    def restrict(self, nodes: int) -> "Cpdag":
        """
        Drop every node with index >= `nodes` together with its edges.
        """

        return Cpdag(
            n=nodes,
            directed=[(a, b) for a, b in self.directed if a < nodes and b < nodes],
            undirected=[(a, b) for a, b in self.undirected if a < nodes and b < nodes],
        )

    def to_matrix(self) -> np.ndarray:
        """
        Directed inclusion matrix with undirected edges credited to both orientations.
        """

        matrix = np.zeros((self.n, self.n), dtype=bool)
        for a, b in self.directed:
            matrix[a, b] = True
        for a, b in self.undirected:
            matrix[a, b] = matrix[b, a] = True
        return matrix


@attr.s(frozen=True)
class EnlargedGraph:
    """
    An augmented graph with two pseudo parents per lagged node, D_{j,1} -> Z_{n+j} <- D_{j,2}. Pseudo nodes occupy
    indices 2n..4n-1 with D_{j,1} = 2n + 2j and D_{j,2} = 2n + 2j + 1.
    """

    aug: AugmentedGraph = attr.ib()

    @property
    def n(self) -> int:
        return self.aug.n

    def pseudo_parents(self, j: int) -> tuple[int, int]:
        return 2 * self.n + 2 * j, 2 * self.n + 2 * j + 1

    @property
    def pseudo_edges(self) -> frozenset[Edge]:
        edges = set()
        for j in range(self.n):
            first, second = self.pseudo_parents(j)
            edges |= {(first, self.n + j), (second, self.n + j)}
        return frozenset(edges)

    def to_dag(self) -> StaticDag:
        return StaticDag(n=4 * self.n, edges=self.aug.edges | self.pseudo_edges)


# region structure operations


def build_augmented(g: StaticDag, gd: DynamicGraph) -> AugmentedGraph:
    return AugmentedGraph(g=g, gd=gd)


def skeleton(dag: StaticDag) -> frozenset[Edge]:
    return frozenset(_pair(j, i) for j, i in dag.edges)


def v_structures(dag: StaticDag) -> frozenset[Triple]:
    colliders = set()
    for i in range(dag.n):
        for j, k in combinations(dag.parents(i), 2):
            if not dag.adjacent(j, k):
                colliders.add((min(j, k), i, max(j, k)))
    return frozenset(colliders)


def random_dag(n: int, m: int, rng: np.random.Generator) -> StaticDag:
    """
    Draw a uniform node permutation as topological order, then `m` of the n(n-1)/2 forward pairs uniformly without
    replacement.
    """

    pairs = list(combinations(range(n), 2))
    if not 0 <= m <= len(pairs):
        raise ValidationException(f"A DAG on {bold(n)} nodes holds at most {bold(len(pairs))} edges, not {bold(m)}.")
    order = rng.permutation(n)
    chosen = rng.choice(len(pairs), size=m, replace=False) if m > 0 else []
    return StaticDag(n=n, edges=[(int(order[pairs[k][0]]), int(order[pairs[k][1]])) for k in chosen])


def split_static_dynamic(dag: StaticDag, x: int, rng: np.random.Generator) -> tuple[StaticDag, DynamicGraph]:
    """
    Keep `x` uniformly chosen edges static and move the remainder to the dynamic graph with identical endpoints.
    """

    edges = sorted(dag.edges)
    if not 0 <= x <= len(edges):
        raise ValidationException(f"Cannot declare {bold(x)} of {bold(len(edges))} edges static.")
    chosen = set(rng.choice(len(edges), size=x, replace=False).tolist()) if x > 0 else set()
    static = [edge for k, edge in enumerate(edges) if k in chosen]
    dynamic = [edge for k, edge in enumerate(edges) if k not in chosen]
    return StaticDag(n=dag.n, edges=static), DynamicGraph(n=dag.n, edges=dynamic, allow_self_loops=False)


def enumerate_dags(n: int) -> Iterator[StaticDag]:
    """
    Every DAG on `n` labelled nodes (1, 3, 25, 543 for n = 1..4).
    """

    pairs = list(combinations(range(n), 2))
    for states in product((0, 1, 2), repeat=len(pairs)):
        edges = [(a, b) if s == 1 else (b, a) for (a, b), s in zip(pairs, states) if s]
        if is_acyclic(edges, n):
            yield StaticDag(n=n, edges=edges)


def enumerate_dynamic_graphs(n: int, allow_self_loops: bool = False) -> Iterator[DynamicGraph]:
    candidates = [(j, i) for j in range(n) for i in range(n) if allow_self_loops or j != i]
    for mask in product((False, True), repeat=len(candidates)):
        yield DynamicGraph(
            n=n, edges=[edge for edge, keep in zip(candidates, mask) if keep], allow_self_loops=allow_self_loops
        )


def orientations(n: int, pairs: Iterable[Edge], fixed: Optional[Iterable[Edge]] = None) -> Iterator[frozenset[Edge]]:
    """
    All acyclic orientations of the undirected `pairs`, combined with the already directed `fixed` edges.
    """

    pairs = sorted(pairs)
    fixed = frozenset(fixed or ())
    for flips in product((False, True), repeat=len(pairs)):
        edges = fixed | {(b, a) if flip else (a, b) for (a, b), flip in zip(pairs, flips)}
        if is_acyclic(edges, n):
            yield frozenset(edges)


# endregion
