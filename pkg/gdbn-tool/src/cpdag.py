"""
Equivalence-class representatives for static DAGs and for the two dynamic models.

`dag_to_cpdag` labels every edge of a DAG as compelled or reversible with the edge-ordering algorithm of Chickering.
`meek_closure` propagates background orientations, which gives constrained CPDAGs. The mBGe CPDAG merges the static
CPDAG with the (always compelled) dynamic edges; the eBGe CPDAG is extracted from the augmented graph enlarged with two
pseudo parents per lagged node, which forces every dynamic edge to stay compelled.
"""

from itertools import combinations
from typing import Iterable, Optional

from src.constants import ENUMERATION_CAP, EquivalenceModes, Models
from src.exc import EnumerationCapException, ValidationException
from src.graphs import (
    AugmentedGraph,
    Cpdag,
    DynamicGraph,
    Edge,
    EnlargedGraph,
    StaticDag,
    build_augmented,
    orientations,
    skeleton,
    v_structures,
)
from src.utils import bold

# region standard CPDAGs


def dag_to_cpdag(dag: StaticDag) -> Cpdag:
    order = dag.topological_order()
    position = {node: k for k, node in enumerate(order)}
    # lowest head first; among edges into the same head, highest tail first
    ordered = sorted(dag.edges, key=lambda edge: (position[edge[1]], -position[edge[0]]))
    compelled: dict[Edge, Optional[bool]] = {edge: None for edge in ordered}
    parents = [set(dag.parents(i)) for i in range(dag.n)]

    for edge in ordered:
        if compelled[edge] is not None:
            continue
        x, y = edge
        resolved = False
        for w in sorted(parents[x]):
            if compelled[(w, x)] is not True:
                continue
            if w not in parents[y]:
                for z in parents[y]:
                    compelled[(z, y)] = True
                resolved = True
                break
            compelled[(w, y)] = True
        if resolved:
            continue
        label = any(z != x and z not in parents[x] for z in parents[y])
        for z in parents[y]:
            if compelled[(z, y)] is None:
                compelled[(z, y)] = label

    return Cpdag(
        n=dag.n,
        directed=[edge for edge, label in compelled.items() if label],
        undirected=[edge for edge, label in compelled.items() if not label],
    )


class _Pdag:
    """
    Mutable partially directed graph used while orientation rules run.
    """

    def __init__(self, n: int, directed: Iterable[Edge], undirected: Iterable[Edge]):
        self.n = n
        self.directed = set(directed)
        self.undirected = {(min(a, b), max(a, b)) for a, b in undirected}

    def is_undirected(self, a: int, b: int) -> bool:
        return (min(a, b), max(a, b)) in self.undirected

    def adjacent(self, a: int, b: int) -> bool:
        return (a, b) in self.directed or (b, a) in self.directed or self.is_undirected(a, b)

    def orient(self, a: int, b: int) -> None:
        self.undirected.discard((min(a, b), max(a, b)))
        self.directed.add((a, b))

    def parents(self, b: int) -> list[int]:
        return [a for a in range(self.n) if (a, b) in self.directed]

    def children(self, a: int) -> list[int]:
        return [b for b in range(self.n) if (a, b) in self.directed]

    def neighbours(self, a: int) -> list[int]:
        return [b for b in range(self.n) if b != a and self.is_undirected(a, b)]

    def rule_applies(self, a: int, b: int) -> bool:
        """
        Whether any of the four orientation rules forces the undirected edge a - b into a -> b.
        """

        # rule 1: c -> a - b with c, b non-adjacent
        if any(not self.adjacent(c, b) for c in self.parents(a) if c != b):
            return True
        # rule 2: a -> c -> b
        if any((c, b) in self.directed for c in self.children(a)):
            return True
        # rule 3: a - c1 -> b and a - c2 -> b with c1, c2 non-adjacent
        into_b = [c for c in self.neighbours(a) if (c, b) in self.directed]
        if any(not self.adjacent(c1, c2) for c1, c2 in combinations(into_b, 2)):
            return True
        # rule 4: a adjacent to c and d, c -> d -> b with c, b non-adjacent
        for d in self.parents(b):
            if d == a or not self.adjacent(a, d):
                continue
            for c in self.parents(d):
                if c not in (a, b) and self.adjacent(a, c) and not self.adjacent(c, b):
                    return True
        return False

    def to_cpdag(self) -> Cpdag:
        return Cpdag(n=self.n, directed=self.directed, undirected=self.undirected)


def meek_closure(cpdag: Cpdag) -> Cpdag:
    pdag = _Pdag(cpdag.n, cpdag.directed, cpdag.undirected)
    changed = True
    while changed:
        changed = False
        for a, b in sorted(pdag.undirected):
            for x, y in ((a, b), (b, a)):
                if pdag.is_undirected(x, y) and pdag.rule_applies(x, y):
                    pdag.orient(x, y)
                    changed = True
    return pdag.to_cpdag()


def dag_to_cpdag_constrained(dag: StaticDag, fixed: Iterable[Edge]) -> Cpdag:
    """
    CPDAG of the equivalence class restricted to DAGs that contain every edge of `fixed` in the given orientation.
    """

    fixed = frozenset(fixed)
    missing = fixed - dag.edges
    if missing:
        raise ValidationException(f"Fixed edges {bold(sorted(missing))} are not edges of the DAG.")
    cpdag = dag_to_cpdag(dag)
    pinned = {(min(a, b), max(a, b)) for a, b in fixed}
    return meek_closure(Cpdag(n=dag.n, directed=cpdag.directed | fixed, undirected=cpdag.undirected - pinned))


# endregion

# region dynamic CPDAGs


def mbge_cpdag(g: StaticDag, gd: DynamicGraph) -> Cpdag:
    aug = build_augmented(g, gd)
    static = dag_to_cpdag(g)
    return Cpdag(n=2 * aug.n, directed=static.directed | aug.dynamic_edges, undirected=static.undirected)


def ebge_cpdag(g: StaticDag, gd: DynamicGraph) -> Cpdag:
    aug = build_augmented(g, gd)
    return dag_to_cpdag(EnlargedGraph(aug).to_dag()).restrict(2 * aug.n)


def naive_augmented_cpdag(g: StaticDag, gd: DynamicGraph) -> Cpdag:
    """
    CPDAG of the augmented graph with its dynamic edges redirected forward afterwards, without propagating the
    redirection. Kept to demonstrate why this shortcut disagrees with both model-specific CPDAGs.
    """

    aug = build_augmented(g, gd)
    cpdag = dag_to_cpdag(aug.to_dag())
    forced = {(min(a, b), max(a, b)) for a, b in aug.dynamic_edges}
    return Cpdag(n=cpdag.n, directed=cpdag.directed | aug.dynamic_edges, undirected=cpdag.undirected - forced)


def model_cpdag(g: StaticDag, gd: DynamicGraph, model: Models) -> Cpdag:
    return ebge_cpdag(g, gd) if model == Models.ebge else mbge_cpdag(g, gd)


# endregion

# region distances and equivalence classes


def shd(a: Cpdag, b: Cpdag) -> int:
    if a.n != b.n:
        raise ValidationException(f"Cannot compare CPDAGs over {bold(a.n)} and {bold(b.n)} nodes.")
    pairs = {(min(x, y), max(x, y)) for x, y in a.directed | a.undirected | b.directed | b.undirected}
    return sum(1 for x, y in pairs if a.status(x, y) != b.status(x, y))


def class_cpdag(members: Iterable[StaticDag]) -> Cpdag:
    """
    An edge is compelled iff every member orients it the same way.
    """

    members = list(members)
    if not members:
        raise ValidationException("Cannot summarise an empty equivalence class.")
    n = members[0].n
    edges: set[Edge] = set().union(*(member.edges for member in members))
    return Cpdag(
        n=n,
        directed=[(a, b) for a, b in edges if (b, a) not in edges],
        undirected=[(a, b) for a, b in edges if (b, a) in edges],
    )


def brute_force_class(
    g: StaticDag, gd: DynamicGraph, mode: EquivalenceModes, cap: int = ENUMERATION_CAP
) -> frozenset[AugmentedGraph]:
    """
    Enumerate every structure equivalent to (g, gd), keeping dynamic edges fixed forward in time.

    In `standard` mode members share the static skeleton and static v-structures. In `ts` mode members are augmented
    DAGs sharing the augmented skeleton and augmented v-structures, which is exactly the set of structures the eBGe
    score cannot tell apart.
    """

    if g.n > cap:
        raise EnumerationCapException(g.n, cap)
    aug = build_augmented(g, gd)
    members = set()
    if mode == EquivalenceModes.standard:
        target = v_structures(g)
        for edges in orientations(g.n, skeleton(g)):
            candidate = StaticDag(n=g.n, edges=edges)
            if v_structures(candidate) == target:
                members.add(AugmentedGraph(g=candidate, gd=gd))
    else:
        target = v_structures(aug.to_dag())
        for edges in orientations(2 * g.n, skeleton(g), fixed=aug.dynamic_edges):
            candidate = StaticDag(n=2 * g.n, edges=edges)
            if v_structures(candidate) == target:
                members.add(AugmentedGraph.from_dag(candidate, allow_self_loops=gd.allow_self_loops))
    return frozenset(members)


def equivalence_class_cpdag(g: StaticDag, gd: DynamicGraph, mode: EquivalenceModes) -> Cpdag:
    return class_cpdag(member.to_dag() for member in brute_force_class(g, gd, mode))


# endregion
