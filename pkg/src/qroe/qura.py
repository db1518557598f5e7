"""Quantum uniform Roe algebras of finitely generated structures."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import linalg as la
from . import qrel, vna
from .coarse import CoarseStructure, build_ladder
from .linalg import OperatorSubspace
from .qrel import QuantumRelation
from .vna import RepresentedAlgebra


class Refused(ValueError):
    """Construction refused; ``certificate`` is an operator witnessing why."""

    def __init__(self, message: str, certificate=None):
        super().__init__(message)
        self.certificate = certificate


class PreconditionError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class RoeAlgebra:
    structure: CoarseStructure
    algebra_space: OperatorSubspace
    stabilized: bool
    commutant_of_roe: OperatorSubspace

    @property
    def dim(self) -> int:
        return self.algebra_space.dim

    def contains(self, a, tol=None) -> bool:
        return la.subspace_contains(self.algebra_space, a, tol)


def _is_star_algebra(space: OperatorSubspace) -> bool:
    n = space.ambient_dim
    return (space.contains(np.eye(n), 1e-8)
            and la.is_self_adjoint_space(space, 1e-8)
            and la.subspace_le(la.product_span(space, space), space, 1e-8))


def assemble_roe(S: CoarseStructure) -> RoeAlgebra:
    """Union of the ladder; generated *-algebra of the top level if unstabilized."""
    top = S.top.space
    if S.stabilized:
        space = top
        if not _is_star_algebra(space):
            raise RuntimeError("stabilized ladder top is not a *-algebra")
    else:
        space, _ = vna.generated_space(list(top.basis), top.ambient_dim, top.tol)
    com = vna._commutant_space(space.basis, space.ambient_dim, space.tol)
    return RoeAlgebra(S, space, S.stabilized, com)


def is_connected(R: RoeAlgebra) -> bool:
    if not R.stabilized:
        raise ValueError("connectedness is only decided for stabilized structures")
    return R.commutant_of_roe.dim == 1


def nontrivial_commuting_projection(R: RoeAlgebra, seed: int = 0):
    """A projection 0 != p != 1 commuting with the Roe algebra, or None."""
    if R.commutant_of_roe.dim == 1:
        return None
    A = vna.algebra_from_space(R.commutant_of_roe, seed)
    return A.minimal_central_projections[0]


def corner_isometry(p) -> np.ndarray:
    """Isometry u with u u* = p."""
    vals, vecs = np.linalg.eigh(np.asarray(p, dtype=np.complex128))
    return vecs[:, vals > 0.5]


def _compress_structure(S: CoarseStructure, u: np.ndarray) -> CoarseStructure:
    M = S.algebra
    uh = la.adjoint(u)
    gens = [uh @ b @ u for b in M.algebra_basis.basis]
    Mp = vna.algebra_from_generators(gens, u.shape[1], M.tol)
    rels = []
    for V in S.generators:
        sp = la.orthonormalize(np.einsum("ij,ajk,kl->ail", uh, V.basis, u), V.space.tol, u.shape[1],
                               atol=V.space.tol)
        rels.append(qrel.make_relation(Mp, sp))
    return build_ladder(rels, algebra=Mp)


def split_by_projection(S: CoarseStructure, p) -> tuple[CoarseStructure, CoarseStructure]:
    """Structures on pMp and (1-p)M(1-p) for a projection commuting with the Roe algebra."""
    p = la.as_operator(p, S.algebra.ambient_dim)
    if not la.is_projection(p, 1e-8):
        raise ValueError("split needs a projection")
    r = la.rank(p, 1e-8, atol=0.5)
    if r == 0 or r == p.shape[0]:
        raise ValueError("split needs 0 != p != 1")
    R = assemble_roe(S)
    if not la.subspace_contains(R.commutant_of_roe, p, 1e-8):
        raise ValueError("p does not commute with the Roe algebra")
    parts = []
    for proj in (p, np.eye(p.shape[0]) - p):
        u = corner_isometry(proj)
        Sp = _compress_structure(S, u)
        Rp = assemble_roe(Sp)
        emb = np.einsum("ij,ajk,kl->ail", u, Rp.algebra_space.basis, la.adjoint(u))
        if not la.subspace_contains_all(R.algebra_space, emb, 1e-8):
            raise RuntimeError("split summand does not embed in the original Roe algebra")
        parts.append(Sp)
    return parts[0], parts[1]


def minimal_structure(M: RepresentedAlgebra) -> CoarseStructure:
    return build_ladder([qrel.diagonal_relation(M)], algebra=M)


def direct_summands(M: RepresentedAlgebra) -> list[QuantumRelation]:
    """z M' for every central projection z (all 2^l of them)."""
    zs = M.minimal_central_projections
    out = []
    C = M.commutant_basis
    for mask in itertools.product([0, 1], repeat=len(zs)):
        z = sum((zz for zz, b in zip(zs, mask) if b), np.zeros((M.ambient_dim,) * 2, dtype=np.complex128))
        sp = la.orthonormalize(np.einsum("ij,ajk->aik", z, C.basis), M.tol, M.ambient_dim, atol=M.tol)
        out.append(QuantumRelation(M, sp))
    return out


def structure_for_algebra(M: RepresentedAlgebra, A) -> CoarseStructure:
    """Structure generated by z_i A z_j over minimal central projections of M.

    Refuses with a certificate (a commutant basis element outside A) when
    A does not contain M'.
    """
    if M.commutant_basis.dim != M.center_basis.dim:
        raise ValueError("structure_for_algebra needs a multiplicity-free algebra")
    space = A.algebra_basis if isinstance(A, RepresentedAlgebra) else A
    if space.ambient_dim != M.ambient_dim:
        raise ValueError("A and M act on different spaces")
    for c in M.commutant_basis.basis:
        if not space.contains(c, 1e-8):
            raise Refused("A does not contain the commutant of M", certificate=c)
    if not _is_star_algebra(space):
        raise ValueError("A must be a unital *-algebra")
    gens = []
    zs = M.minimal_central_projections
    for zi in zs:
        for zj in zs:
            sp = la.compress(space, zi, zj)
            if sp.dim:
                gens.append(qrel.make_relation(M, sp))
    return build_ladder(gens, algebra=M)


@dataclass(frozen=True)
class Triviality:
    case: str
    roe_dim: int
    connected: bool
    commutant_dim: int
    stabilized: bool
    stabilization_level: int | None
    full_level: int | None
    note: str

    def report(self) -> dict:
        return {"roe_dim": self.roe_dim, "connected": self.connected, "commutant_dim": self.commutant_dim,
                "case": self.case, "stabilized": self.stabilized,
                "stabilization_level": self.stabilization_level}


_MERGE_NOTE = ("finite dimension: algebraic, norm-closed and weak*-closed Roe algebras coincide, "
               "so the intermediate cases are vacuous")


def classify_triviality(R: RoeAlgebra) -> Triviality:
    if not R.stabilized:
        raise ValueError("classification needs a stabilized structure")
    S = R.structure
    n = S.algebra.ambient_dim
    full = next((i for i, V in enumerate(S.ladder) if V.dim == n * n), None)
    connected = is_connected(R)
    if full is not None:
        case = "1"
    elif R.dim == n * n:
        case = "roe_full"
    else:
        case = "5"
    return Triviality(case, R.dim, connected, R.commutant_of_roe.dim, R.stabilized,
                      S.stabilization_level, full, _MERGE_NOTE)


# ---------------------------------------------------------------- ghost blocks

def make_ghost_projection(block_sizes) -> np.ndarray:
    """Block diagonal projection whose n x n blocks have every entry 1/n."""
    sizes = [int(s) for s in block_sizes]
    if not sizes or any(s < 1 for s in sizes):
        raise ValueError("block sizes must be positive")
    N = sum(sizes)
    p = np.zeros((N, N), dtype=np.complex128)
    off = 0
    for s in sizes:
        p[off:off + s, off:off + s] = 1.0 / s
        off += s
    return p


def check_block_offdiagonal(q, p, eps: float, block_sizes=None) -> bool:
    """Every block of size >= 2 of q has a nonzero off-diagonal entry.

    If a block of q were diagonal, each diagonal entry would be within eps of
    1/n, so the normalized all-ones vector u of that block would give
    |<(q - p) u, u>| >= 1 - 1/n - eps, contradicting ||q - p|| < eps.
    """
    q = np.asarray(q, dtype=np.complex128)
    p = np.asarray(p, dtype=np.complex128)
    dist = la.operator_norm(q - p)
    if not dist < eps:
        raise PreconditionError(f"||q - p|| = {dist:.3g} is not below eps = {eps}")
    if block_sizes is None:
        block_sizes = _ghost_blocks(p)
    off = 0
    for s in block_sizes:
        if s >= 2:
            blk = q[off:off + s, off:off + s]
            diag = np.diag(np.diag(blk))
            offdiag = np.max(np.abs(blk - diag))
            u = np.ones(s) / np.sqrt(s)
            gap = abs(u @ (diag - p[off:off + s, off:off + s]) @ u)
            if offdiag == 0.0:
                if gap >= eps:
                    raise AssertionError("diagonal block contradicts the norm bound")
                return False
        off += s
    return True


def perturbed_projection(p, eps: float, rng) -> np.ndarray:
    """U p U* for a random unitary U = exp(iH) with ||U p U* - p|| < eps."""
    n = p.shape[0]
    h = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    h = (h + h.conj().T) / 2
    h *= rng.uniform(0.0, 0.49 * eps) / la.operator_norm(h)
    vals, vecs = np.linalg.eigh(h)
    u = (vecs * np.exp(1j * vals)) @ vecs.conj().T
    return u @ p @ u.conj().T


def _ghost_blocks(p: np.ndarray) -> list[int]:
    sizes, off, N = [], 0, p.shape[0]
    while off < N:
        s = int(round(1.0 / np.real(p[off, off])))
        sizes.append(s)
        off += s
    return sizes
