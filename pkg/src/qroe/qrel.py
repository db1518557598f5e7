"""Quantum relations: M'-M' bimodules of operators.

Intrinsic relations are never stored as sets of projection pairs.  A pair
``(p, q)`` at amplification level k belongs to the relation of V exactly when
``p (v (x) 1_k) q != 0`` for some v in V, which ``intrinsic_member`` tests on
a basis.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import linalg as la
from . import vna
from .linalg import OperatorSubspace
from .vna import RepresentedAlgebra

DEFAULT_LEVEL = 2


class NotABimodule(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class QuantumRelation:
    algebra: RepresentedAlgebra
    space: OperatorSubspace

    @property
    def dim(self) -> int:
        return self.space.dim

    @property
    def basis(self) -> np.ndarray:
        return self.space.basis

    @property
    def ambient_dim(self) -> int:
        return self.space.ambient_dim

    def contains(self, a, tol: float | None = None) -> bool:
        return la.subspace_contains(self.space, a, tol)

    def __le__(self, other: "QuantumRelation") -> bool:
        return la.subspace_le(self.space, other.space)

    def equals(self, other: "QuantumRelation", tol: float | None = None) -> bool:
        return la.subspace_equal(self.space, other.space, tol)

    def __repr__(self):
        return f"QuantumRelation(n={self.ambient_dim}, dim={self.dim})"


@dataclass(frozen=True, eq=False)
class ProjectionPair:
    """Projections p, q of M (x) M_k acting on C^n (x) C^k."""

    p: np.ndarray
    q: np.ndarray
    level: int = 1


@dataclass(frozen=True)
class ClassicalRelation:
    n: int
    pairs: frozenset

    def __post_init__(self):
        pairs = frozenset((int(x), int(y)) for x, y in self.pairs)
        for x, y in pairs:
            if not (0 <= x < self.n and 0 <= y < self.n):
                raise ValueError(f"pair {(x, y)} outside X of size {self.n}")
        object.__setattr__(self, "pairs", pairs)

    @classmethod
    def from_matrix(cls, mat) -> "ClassicalRelation":
        mat = np.asarray(mat, dtype=bool)
        return cls(mat.shape[0], frozenset(zip(*map(lambda a: a.tolist(), np.nonzero(mat)))))

    @classmethod
    def diagonal(cls, n: int) -> "ClassicalRelation":
        return cls(n, frozenset((x, x) for x in range(n)))

    @classmethod
    def full(cls, n: int) -> "ClassicalRelation":
        return cls(n, frozenset((x, y) for x in range(n) for y in range(n)))

    def matrix(self) -> np.ndarray:
        m = np.zeros((self.n, self.n), dtype=bool)
        for x, y in self.pairs:
            m[x, y] = True
        return m

    def __or__(self, other):
        return ClassicalRelation(self.n, self.pairs | other.pairs)

    def inverse(self):
        return ClassicalRelation(self.n, frozenset((y, x) for x, y in self.pairs))

    def compose(self, other):
        """{(x, y) : (x, z) in self and (z, y) in other for some z}."""
        out = set()
        for x, z in self.pairs:
            for z2, y in other.pairs:
                if z == z2:
                    out.add((x, y))
        return ClassicalRelation(self.n, frozenset(out))

    def __le__(self, other):
        return self.pairs <= other.pairs


# ---------------------------------------------------------------- construction

def is_bimodule(M: RepresentedAlgebra, space: OperatorSubspace, tol: float | None = None) -> bool:
    if space.dim == 0:
        return True
    tol = max(space.tol, 1e-8) if tol is None else tol
    C = M.commutant_basis.basis
    left = np.einsum("aij,bjk->abik", C, space.basis).reshape(-1, *space.basis.shape[1:])
    right = np.einsum("bij,ajk->abik", space.basis, C).reshape(-1, *space.basis.shape[1:])
    return la.subspace_contains_all(space, left, tol) and la.subspace_contains_all(space, right, tol)


def make_relation(M: RepresentedAlgebra, space: OperatorSubspace, verify: bool = True) -> QuantumRelation:
    if space.ambient_dim != M.ambient_dim:
        raise ValueError("relation and algebra have different ambient dimensions")
    if verify and not is_bimodule(M, space):
        raise NotABimodule("subspace is not an M'-M' bimodule")
    return QuantumRelation(M, space)


def bimodule_closure(M: RepresentedAlgebra, seed, tol: float | None = None) -> QuantumRelation:
    """Smallest bimodule containing the seeds: span(M' S M')."""
    tol = M.tol if tol is None else tol
    S = la.orthonormalize(list(seed) if not isinstance(seed, OperatorSubspace) else seed.basis,
                          tol, M.ambient_dim)
    left = la.product_span(M.commutant_basis, S, tol)
    return make_relation(M, la.product_span(left, M.commutant_basis, tol))


def diagonal_relation(M: RepresentedAlgebra) -> QuantumRelation:
    return QuantumRelation(M, M.commutant_basis)


def full_relation(M: RepresentedAlgebra) -> QuantumRelation:
    return QuantumRelation(M, la.full_subspace(M.ambient_dim, M.tol))


def zero_relation(M: RepresentedAlgebra) -> QuantumRelation:
    return QuantumRelation(M, la.zero_subspace(M.ambient_dim, M.tol))


def _same_algebra(*rels: QuantumRelation) -> RepresentedAlgebra:
    M = rels[0].algebra
    for r in rels[1:]:
        if r.algebra is not M and r.ambient_dim != M.ambient_dim:
            raise ValueError("relations live over different algebras")
    return M


def v_sum(*rels: QuantumRelation) -> QuantumRelation:
    M = _same_algebra(*rels)
    return make_relation(M, la.subspace_sum(*[r.space for r in rels]))


def v_product_span(V1: QuantumRelation, V2: QuantumRelation) -> QuantumRelation:
    M = _same_algebra(V1, V2)
    return make_relation(M, la.product_span(V1.space, V2.space))


def v_adjoint(V: QuantumRelation) -> QuantumRelation:
    return make_relation(V.algebra, la.adjoint_span(V.space))


def v_symmetrize(V: QuantumRelation) -> QuantumRelation:
    return v_sum(V, v_adjoint(V))


def compress_relation(V: QuantumRelation, p) -> OperatorSubspace:
    """span{p v p}."""
    return la.compress(V.space, p)


def amplify_relation(V: QuantumRelation, k: int) -> QuantumRelation:
    """V (x) M_k over M (x) 1_k."""
    Mk = vna.amplify_algebra(V.algebra, k)
    if k == 1:
        return V
    basis = np.array([np.kron(v, la.matrix_unit(k, i, j)) for v in V.basis
                      for i in range(k) for j in range(k)]).reshape(-1, V.ambient_dim * k, V.ambient_dim * k)
    return QuantumRelation(Mk, OperatorSubspace(V.ambient_dim * k, basis, V.space.tol))


# ---------------------------------------------------------------- classical bridge

def relation_to_subspace(E: ClassicalRelation, M: RepresentedAlgebra | None = None) -> QuantumRelation:
    """V_E = span{e_xy : (x, y) in E} over the diagonal algebra."""
    if M is None:
        M = vna.diagonal_algebra(E.n)
    elif not vna.is_diagonal_algebra(M) or M.ambient_dim != E.n:
        raise ValueError("the classical bridge needs the diagonal algebra on |X| points")
    basis = [la.matrix_unit(E.n, x, y) for x, y in sorted(E.pairs)]
    return QuantumRelation(M, OperatorSubspace(E.n, np.array(basis).reshape(-1, E.n, E.n), M.tol))


def subspace_to_relation(V: QuantumRelation, tol: float | None = None) -> ClassicalRelation:
    """E_V = {(x, y) : e_xx a e_yy != 0 for some a in V}."""
    if not vna.is_diagonal_algebra(V.algebra):
        raise ValueError("subspace_to_relation needs the diagonal algebra")
    tol = V.space.tol if tol is None else tol
    n = V.ambient_dim
    if V.dim == 0:
        return ClassicalRelation(n, frozenset())
    mask = np.max(np.abs(V.basis), axis=0) > tol
    return ClassicalRelation.from_matrix(mask)


# ---------------------------------------------------------------- intrinsic relations

def projection_pair(M: RepresentedAlgebra, p, q, level: int = 1, tol: float = 1e-8) -> ProjectionPair:
    """Validated pair of projections in M (x) M_level."""
    N = M.ambient_dim * level
    p = la.as_operator(p, N)
    q = la.as_operator(q, N)
    for r in (p, q):
        if not la.is_projection(r, tol):
            raise ValueError("pair entries must be projections")
        for c in M.commutant_basis.basis:
            ck = np.kron(c, np.eye(level))
            if la.operator_norm(r @ ck - ck @ r) > tol * 10:
                raise ValueError("pair entries must commute with M' (x) 1_k")
    return ProjectionPair(p, q, level)


def atom_pair(M: RepresentedAlgebra, x: int, y: int, level: int = 1) -> ProjectionPair:
    """(z_x (x) 1, z_y (x) 1) for minimal central projections z."""
    zs = M.minimal_central_projections
    return ProjectionPair(la.amplify(zs[x], level), la.amplify(zs[y], level), level)


def intrinsic_member(V: QuantumRelation, pair: ProjectionPair, tol: float | None = None) -> bool:
    """(p, q) in R_V iff p (v (x) 1_k) q != 0 for some basis element v."""
    tol = V.space.tol if tol is None else tol
    k = pair.level
    if pair.p.shape[0] != V.ambient_dim * k:
        raise ValueError("pair level does not match the relation's ambient dimension")
    if V.dim == 0:
        return False
    amp = V.basis if k == 1 else np.array([np.kron(v, np.eye(k)) for v in V.basis])
    prods = pair.p @ amp @ pair.q
    norms = np.linalg.norm(prods.reshape(len(amp), -1), axis=1)
    return bool(np.max(norms) > tol)


def _amplifier(n: int, k: int) -> np.ndarray:
    """Matrix of vec(a) -> vec(a (x) 1_k)."""
    cols = []
    ik = np.eye(k)
    for i in range(n):
        for j in range(n):
            cols.append(np.kron(la.matrix_unit(n, i, j), ik).reshape(-1))
    return np.stack(cols, axis=1)


def subspace_from_annihilators(M: RepresentedAlgebra, pairs: Sequence[ProjectionPair],
                               tol: float | None = None) -> QuantumRelation:
    """{a : p (a (x) 1_k) q = 0 for every forbidden pair (p, q)}."""
    tol = M.tol if tol is None else tol
    n = M.ambient_dim
    amps: dict[int, np.ndarray] = {}
    cons = []
    for pr in pairs:
        k = pr.level
        if k not in amps:
            amps[k] = _amplifier(n, k)
        cons.append(np.kron(pr.p, pr.q.T) @ amps[k])
    space = la.nullspace_of_constraints(cons, n, tol, atol=tol)
    return make_relation(M, space)


def composition_witness(V1: QuantumRelation, V2: QuantumRelation, pair: ProjectionPair, rs):
    """A projection r with (p, r) not in R_V1 and (1 - r, q) not in R_V2, if any r in rs is one."""
    N = pair.p.shape[0]
    for r in rs:
        r = np.asarray(r)
        if (not intrinsic_member(V1, ProjectionPair(pair.p, r, pair.level))
                and not intrinsic_member(V2, ProjectionPair(np.eye(N) - r, pair.q, pair.level))):
            return r
    return None


# ---------------------------------------------------------------- reflexivity

def phi_V(V: QuantumRelation, q, tol: float | None = None) -> np.ndarray:
    """Join of left supports of v q over v in V.

    For a bimodule the join equals the projection onto the span of the ranges
    of v q: M' v q H is inside V q H.
    """
    tol = V.space.tol if tol is None else tol
    q = np.asarray(q, dtype=np.complex128)
    n = V.ambient_dim
    if V.dim == 0:
        return np.zeros((n, n), dtype=np.complex128)
    stacked = np.einsum("aij,jk->iak", V.basis, q).reshape(n, -1)
    return la.range_projection(stacked, tol, atol=tol)


def _reflexive_constraints(V: QuantumRelation, qs) -> list[np.ndarray]:
    cons = []
    for q in qs:
        f = la.complement(phi_V(V, q))
        cons.append(np.kron(f, np.asarray(q).T))
    return cons


def orc_atomic_abelian(V: QuantumRelation) -> QuantumRelation:
    """Operator reflexive closure over an abelian algebra, from atom constraints."""
    M = V.algebra
    if not M.is_abelian:
        raise ValueError("orc_atomic_abelian needs an abelian algebra")
    space = la.nullspace_of_constraints(_reflexive_constraints(V, M.atoms()), M.ambient_dim, M.tol, atol=M.tol)
    return make_relation(M, space)


def orc_sampled(V: QuantumRelation, samples: int = 64, seed: int = 0) -> QuantumRelation:
    """Over-approximation of the reflexive closure from sampled projections of M."""
    M = V.algebra
    rng = np.random.default_rng(seed)
    qs = vna.minimal_projections(M) + vna.sample_projections(M, samples, rng)
    space = la.nullspace_of_constraints(_reflexive_constraints(V, qs), M.ambient_dim, M.tol, atol=M.tol)
    return make_relation(M, space)


def v_phi(M: RepresentedAlgebra, phi: Sequence[np.ndarray]) -> QuantumRelation:
    """V_phi for an atom map on an abelian algebra: {a : (1 - phi(z)) a z = 0 for atoms z}."""
    atoms = M.atoms()
    if len(phi) != len(atoms):
        raise ValueError("phi must give one projection per atom")
    n = M.ambient_dim
    cons = [np.kron(la.complement(f), z.T) for f, z in zip(phi, atoms)]
    return make_relation(M, la.nullspace_of_constraints(cons, n, M.tol, atol=M.tol))
