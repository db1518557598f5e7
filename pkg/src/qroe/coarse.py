"""Finitely generated quantum coarse structures and quantum metrics.

A structure is stored through its saturation ladder ``V_0 = M'`` and
``V_{n+1} = span(V_n V_n) + V_n + G_{n+1}`` with symmetrized generators used
cyclically.  The ladder stops once a level is closed under products and
contains every generator; that level is the largest member.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from . import linalg as la
from . import qrel, vna
from .qrel import ClassicalRelation, ProjectionPair, QuantumRelation
from .vna import RepresentedAlgebra


@dataclass(frozen=True)
class Membership:
    status: str  # "yes", "no" or "unknown"
    level: int | None = None

    @property
    def yes(self) -> bool:
        return self.status == "yes"

    @property
    def no(self) -> bool:
        return self.status == "no"

    @property
    def unknown(self) -> bool:
        return self.status == "unknown"

    def __str__(self):
        return f"Yes({self.level})" if self.yes else self.status.capitalize()


@dataclass(frozen=True, eq=False)
class CoarseStructure:
    algebra: RepresentedAlgebra
    generators: tuple
    ladder: tuple
    max_depth: int
    stabilized: bool
    stabilization_level: int | None

    @property
    def top(self) -> QuantumRelation:
        return self.ladder[-1]

    def dims(self) -> list[int]:
        return [V.dim for V in self.ladder]

    def __repr__(self):
        return (f"CoarseStructure(n={self.algebra.ambient_dim}, gens={len(self.generators)}, "
                f"dims={self.dims()}, stabilized={self.stabilized})")


def default_depth(M: RepresentedAlgebra) -> int:
    return 2 * M.ambient_dim ** 2


def build_ladder(gens: Sequence[QuantumRelation], max_depth: int | None = None,
                 algebra: RepresentedAlgebra | None = None) -> CoarseStructure:
    gens = list(gens)
    if algebra is None:
        if not gens:
            raise ValueError("an algebra is required when there are no generators")
        algebra = gens[0].algebra
    M = algebra
    for g in gens:
        if g.ambient_dim != M.ambient_dim:
            raise ValueError("generators live over different algebras")
    depth = default_depth(M) if max_depth is None else int(max_depth)
    G = [qrel.v_symmetrize(g) for g in gens]
    ladder = [qrel.diagonal_relation(M)]
    level = None
    for n in range(depth + 1):
        V = ladder[-1]
        P = la.product_span(V.space, V.space)
        if la.subspace_le(P, V.space) and all(g <= V for g in G):
            level = n
            break
        if n == depth:
            break
        parts = [P, V.space] + ([G[n % len(G)].space] if G else [])
        ladder.append(QuantumRelation(M, la.subspace_sum(*parts)))
    return CoarseStructure(M, tuple(G), tuple(ladder), depth, level is not None, level)


def member_relation(S: CoarseStructure, V: QuantumRelation) -> Membership:
    """Yes(least level containing V), No once the ladder is stable, else Unknown."""
    for n, L in enumerate(S.ladder):
        if V <= L:
            return Membership("yes", n)
    return Membership("no") if S.stabilized else Membership("unknown")


def ladder_metric(S: CoarseStructure) -> "QuantumMetric":
    return QuantumMetric(S.algebra, tuple(float(i) for i in range(len(S.ladder))), S.ladder)


# ---------------------------------------------------------------- quantum metrics

@dataclass(frozen=True, eq=False)
class QuantumMetric:
    algebra: RepresentedAlgebra
    grid: tuple
    spaces: tuple

    def __post_init__(self):
        if not self.grid or self.grid[0] != 0:
            raise ValueError("grid must start at 0")
        if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise ValueError("grid must be strictly increasing")
        if len(self.spaces) != len(self.grid):
            raise ValueError("one space per grid point")

    def space_at(self, t: float) -> QuantumRelation | None:
        """V_s for the largest grid point s <= t."""
        idx = [i for i, s in enumerate(self.grid) if s <= t]
        return self.spaces[idx[-1]] if idx else None


def check_metric(dist, tol: float = 1e-12) -> np.ndarray:
    d = np.asarray(dist, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ValueError("distance matrix must be square")
    if np.any(np.abs(np.diag(d)) > tol):
        raise ValueError("distance matrix must vanish on the diagonal")
    if np.any(np.abs(d - d.T) > tol):
        raise ValueError("distance matrix must be symmetric")
    if np.any(d < -tol):
        raise ValueError("distances must be nonnegative")
    fin = np.where(np.isinf(d), np.inf, d)
    via = np.min(fin[:, :, None] + fin[None, :, :], axis=1)
    if np.any(fin > via + tol):
        raise ValueError("distance matrix violates the triangle inequality")
    return d


def metric_to_quantum(dist, grid, points=None) -> QuantumMetric:
    """V_t = span{e_xy : d(x, y) <= t} over the diagonal algebra."""
    d = check_metric(dist)
    n = d.shape[0]
    M = vna.diagonal_algebra(n)
    spaces = []
    for t in grid:
        E = ClassicalRelation.from_matrix(d <= t)
        spaces.append(qrel.relation_to_subspace(E, M))
    return QuantumMetric(M, tuple(float(t) for t in grid), tuple(spaces))


def is_quantum_graph(V: QuantumRelation) -> bool:
    return qrel.diagonal_relation(V.algebra) <= V and la.is_self_adjoint_space(V.space, 1e-8)


def graph_filtration(V: QuantumRelation, grid) -> QuantumMetric:
    """V_t = span of floor(t)-fold products of V; 0-fold is M'."""
    if not is_quantum_graph(V):
        raise ValueError("graph_filtration needs M' <= V and V = V*")
    M = V.algebra
    steps = [int(math.floor(t)) for t in grid]
    powers = {0: qrel.diagonal_relation(M)}
    cur = V
    for n in range(1, max(steps + [0]) + 1):
        if n > 1:
            cur = QuantumRelation(M, la.product_span(cur.space, V.space))
        powers[n] = cur
    return QuantumMetric(M, tuple(float(t) for t in grid), tuple(powers[s] for s in steps))


def v_distance(QM: QuantumMetric, pair: ProjectionPair) -> float:
    for t, V in zip(QM.grid, QM.spaces):
        if qrel.intrinsic_member(V, pair):
            return t
    return math.inf


@dataclass(frozen=True)
class DiameterResult:
    value: float
    exact: bool


def diameter(QM: QuantumMetric, p, samples: int = 64, seed: int = 0) -> DiameterResult:
    """Diameter of a projection of M.

    Exact over atom pairs for abelian M; otherwise a lower bound from sampled
    (r, s) with r (p a p) s != 0.
    """
    M = QM.algebra
    p = np.asarray(p, dtype=np.complex128)
    if M.is_abelian:
        under = [i for i, z in enumerate(M.atoms()) if la.operator_norm(z @ p) > 0.5]
        best = 0.0
        for i in under:
            for j in under:
                best = max(best, v_distance(QM, qrel.atom_pair(M, i, j)))
        return DiameterResult(best, True)
    rng = np.random.default_rng(seed)
    projs = vna.minimal_projections(M) + vna.sample_projections(M, samples, rng)
    best = 0.0
    for r in projs:
        if la.operator_norm(r @ p) < 1e-9:
            continue
        for s in projs:
            if la.operator_norm(p @ s) < 1e-9:
                continue
            best = max(best, v_distance(QM, ProjectionPair(r, s, 1)))
    return DiameterResult(best, False)


# ---------------------------------------------------------------- classical fixtures

def path_distances(n: int) -> np.ndarray:
    idx = np.arange(n)
    return np.abs(idx[:, None] - idx[None, :]).astype(float)


def graph_distances(adj) -> np.ndarray:
    """All-pairs shortest path lengths (BFS), inf between components."""
    adj = np.asarray(adj, dtype=bool)
    n = adj.shape[0]
    d = np.full((n, n), np.inf)
    for s in range(n):
        d[s, s] = 0
        frontier = [s]
        while frontier:
            nxt = []
            for v in frontier:
                for w in np.nonzero(adj[v] | adj[:, v])[0]:
                    if d[s, w] == np.inf:
                        d[s, w] = d[s, v] + 1
                        nxt.append(int(w))
            frontier = nxt
    return d


def band_relation(dist, r: float) -> ClassicalRelation:
    return ClassicalRelation.from_matrix(np.asarray(dist) <= r)


def path_graph_relation(n: int) -> ClassicalRelation:
    """Reflexive adjacency of the path 0 - 1 - ... - (n-1)."""
    return band_relation(path_distances(n), 1)


def classical_structure(n: int, relations: Sequence[ClassicalRelation],
                        max_depth: int | None = None) -> CoarseStructure:
    M = vna.diagonal_algebra(n)
    gens = [qrel.relation_to_subspace(E, M) for E in relations]
    return build_ladder(gens, max_depth, algebra=M)


@dataclass(frozen=True, eq=False)
class ClassicalCoarseSpace:
    """Set-level mirror of build_ladder for X = {0..n-1}: boolean relation ladder."""

    n: int
    generators: tuple
    ladder: tuple
    stabilized: bool

    @property
    def top(self) -> np.ndarray:
        return self.ladder[-1]

    def contains(self, E) -> bool:
        E = np.asarray(E, dtype=bool)
        return bool(np.all(~E | self.top))


def classical_space(n: int, relations, max_depth: int | None = None) -> ClassicalCoarseSpace:
    gens = []
    for E in relations:
        m = E.matrix() if isinstance(E, ClassicalRelation) else np.asarray(E, dtype=bool)
        gens.append(m | m.T)
    depth = 2 * n * n if max_depth is None else max_depth
    ladder = [np.eye(n, dtype=bool)]
    stable = False
    for k in range(depth + 1):
        L = ladder[-1]
        P = (L.astype(np.int64) @ L.astype(np.int64)) > 0
        if np.all(~P | L) and all(np.all(~g | L) for g in gens):
            stable = True
            break
        if k == depth:
            break
        nxt = P | L
        if gens:
            nxt = nxt | gens[k % len(gens)]
        ladder.append(nxt)
    return ClassicalCoarseSpace(n, tuple(gens), tuple(ladder), stable)


def generated_equivalence(n: int, relations) -> np.ndarray:
    """Largest member of the generated classical structure: the equivalence relation spanned."""
    rel = np.eye(n, dtype=np.uint8)
    for E in relations:
        m = E.matrix() if isinstance(E, ClassicalRelation) else np.asarray(E, dtype=bool)
        rel |= (m | m.T).astype(np.uint8)
    return kernels.transitive_closure(rel).astype(bool)
