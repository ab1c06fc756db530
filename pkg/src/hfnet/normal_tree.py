"""Normal tree construction over a linear graph.

Greedy maximal-priority spanning forest: nodes first, then across sources,
A-type storage, one branch of each transformer / both-or-neither branches of
each gyrator, D-types, T-types, and finally through sources. An element that
would close a loop is left to the cotree. Tie-breaking inside one priority
class is element declaration order, which keeps all downstream orderings
deterministic for a given model file.

State variables fall out of the construction: the across value of every
A-type kept in the tree and the through value of every T-type left in the
cotree.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import AcrossSourceLoopError, ThroughSourceCutsetError
from .model import Kind, SystemModel

A_STATE = "AcrossOfATypeInTree"
T_STATE = "ThroughOfTTypeInCotree"


@dataclass(frozen=True)
class StateVar:
    element: str
    variable: str  # A_STATE or T_STATE
    name: str


@dataclass(frozen=True)
class NormalTree:
    tree_elements: tuple[str, ...]   # edge ids; two-port sides as "<id>.a"/".b"
    link_elements: tuple[str, ...]
    state_variables: tuple[StateVar, ...]
    dependent_storage: tuple[str, ...]

    @property
    def has_dependent_storage(self) -> bool:
        return bool(self.dependent_storage)

    def state_names(self) -> tuple[str, ...]:
        return tuple(s.name for s in self.state_variables)


class _UnionFind:
    def __init__(self, items):
        self.parent = {i: i for i in items}

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def joined(self, a, b):
        return self.find(a) == self.find(b)

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[ra] = rb
        return True

    def snapshot(self):
        return dict(self.parent)

    def restore(self, snap):
        self.parent = snap


def build_normal_tree(model: SystemModel) -> NormalTree:
    uf = _UnionFind([n.id for n in model.nodes])
    tree: list[str] = []
    links: list[str] = []
    dependent: list[str] = []

    def one_ports(kind):
        return [e for e in model.elements if e.kind == kind]

    # priority 2: across sources must all fit in the tree
    for e in one_ports(Kind.ACROSS_SOURCE):
        t1, t2 = e.ports[0]
        if not uf.union(t1, t2):
            raise AcrossSourceLoopError(
                f"across-variable source {e.id} closes a loop of across sources"
            )
        tree.append(e.id)

    # priority 3: as many A-types as possible
    for e in one_ports(Kind.A_TYPE):
        t1, t2 = e.ports[0]
        if uf.union(t1, t2):
            tree.append(e.id)
        else:
            links.append(e.id)
            dependent.append(e.id)

    # priority 4: one branch per transformer, both-or-neither per gyrator
    for e in model.elements:
        if e.kind == Kind.TRANSFORMER:
            (a1, a2), (b1, b2) = e.ports
            if uf.union(a1, a2):
                tree.append(f"{e.id}.a")
                links.append(f"{e.id}.b")
            elif uf.union(b1, b2):
                tree.append(f"{e.id}.b")
                links.append(f"{e.id}.a")
            else:
                links.extend([f"{e.id}.a", f"{e.id}.b"])
        elif e.kind == Kind.GYRATOR:
            (a1, a2), (b1, b2) = e.ports
            snap = uf.snapshot()
            if uf.union(a1, a2) and uf.union(b1, b2):
                tree.extend([f"{e.id}.a", f"{e.id}.b"])
            else:
                uf.restore(snap)
                links.extend([f"{e.id}.a", f"{e.id}.b"])

    # priority 5: D-types
    for e in one_ports(Kind.D_TYPE):
        t1, t2 = e.ports[0]
        (tree if uf.union(t1, t2) else links).append(e.id)

    # priority 6: a T-type forced into the tree marks dependent storage
    for e in one_ports(Kind.T_TYPE):
        t1, t2 = e.ports[0]
        if uf.union(t1, t2):
            tree.append(e.id)
            dependent.append(e.id)
        else:
            links.append(e.id)

    # priority 7: a through source forced into the tree is a source cutset
    for e in one_ports(Kind.THROUGH_SOURCE):
        t1, t2 = e.ports[0]
        if uf.union(t1, t2):
            raise ThroughSourceCutsetError(
                f"spanning tree requires through-variable source {e.id} "
                "(cutset of through sources)"
            )
        links.append(e.id)

    tree_set = set(tree)
    states = [
        StateVar(e.id, A_STATE, f"{e.id}.across")
        for e in one_ports(Kind.A_TYPE)
        if e.id in tree_set
    ]
    states += [
        StateVar(e.id, T_STATE, f"{e.id}.through")
        for e in one_ports(Kind.T_TYPE)
        if e.id not in tree_set
    ]
    return NormalTree(tuple(tree), tuple(links), tuple(states), tuple(dependent))
