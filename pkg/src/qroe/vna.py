"""Finite-dimensional von Neumann algebras represented on C^n.

Every algebra caches its commutant, center and minimal central projections.
When a block decomposition ``M = W (sum_k M_{d_k} (x) 1_{m_k}) W*`` is known,
``frame`` holds the unitary ``W`` and ``block_form`` the pairs ``(d_k, m_k)``.
Algebras built from blocks use ``W = 1``; algebras built from generators get
their frame recovered from matrix units, or ``None`` when that fails.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import linalg as la
from .linalg import DEFAULT_TOL, OperatorSubspace


@dataclass(frozen=True, eq=False)
class RepresentedAlgebra:
    ambient_dim: int
    algebra_basis: OperatorSubspace
    commutant_basis: OperatorSubspace
    center_basis: OperatorSubspace
    minimal_central_projections: tuple
    block_form: tuple | None = None
    frame: np.ndarray | None = None
    tol: float = DEFAULT_TOL
    iterations: int = 0
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def dim(self) -> int:
        return self.algebra_basis.dim

    @property
    def is_abelian(self) -> bool:
        return self.center_basis.dim == self.algebra_basis.dim

    @property
    def is_multiplicity_free(self) -> bool:
        return self.block_form is not None and all(m == 1 for _, m in self.block_form)

    @property
    def identity(self) -> np.ndarray:
        return np.eye(self.ambient_dim, dtype=np.complex128)

    def contains(self, a, tol: float | None = None) -> bool:
        return la.subspace_contains(self.algebra_basis, a, tol)

    def in_commutant(self, a, tol: float | None = None) -> bool:
        return la.subspace_contains(self.commutant_basis, a, tol)

    def atoms(self) -> list[np.ndarray]:
        """Minimal projections of an abelian algebra."""
        if not self.is_abelian:
            raise ValueError("atoms are only defined here for abelian algebras")
        return list(self.minimal_central_projections)

    def __repr__(self):
        return (f"RepresentedAlgebra(n={self.ambient_dim}, dim={self.dim}, "
                f"commutant_dim={self.commutant_basis.dim}, blocks={self.block_form})")


@dataclass(frozen=True, eq=False)
class TraceFunctional:
    """tau(a) = sum_k w_k tr_k(a) with tr_k the matrix trace on the k-th block."""

    algebra: RepresentedAlgebra
    weights: tuple

    def __post_init__(self):
        if self.algebra.block_form is None:
            raise ValueError("trace functionals need an algebra with a recovered block form")
        w = tuple(float(x) for x in self.weights)
        if len(w) != len(self.algebra.block_form):
            raise ValueError(f"need {len(self.algebra.block_form)} weights, got {len(w)}")
        if any(not np.isfinite(x) or x <= 0 for x in w):
            raise ValueError("trace weights must be finite and strictly positive")
        object.__setattr__(self, "weights", w)

    def __call__(self, a, check: bool = True) -> complex:
        return trace_eval(self, a, check)


# ---------------------------------------------------------------- construction

def _commutant_space(basis: np.ndarray, n: int, tol: float) -> OperatorSubspace:
    if len(basis) == 0:
        return la.full_subspace(n, tol)
    cons = [la.rmul(g) - la.lmul(g) for g in basis]
    # basis rows have unit norm, so commutators of central elements are pure rounding noise
    return la.nullspace_of_constraints(cons, n, tol, atol=tol)


def commutant(A, tol: float | None = None) -> OperatorSubspace:
    """Commutant of a self-adjoint set of operators (or of a RepresentedAlgebra)."""
    if isinstance(A, RepresentedAlgebra):
        return A.commutant_basis
    tol = A.tol if tol is None else tol
    if not la.is_self_adjoint_space(A, max(tol, 1e-8)):
        raise ValueError("commutant input must be closed under adjoint")
    return _commutant_space(A.basis, A.ambient_dim, tol)


def _hermitian_combination(space: OperatorSubspace, rng) -> np.ndarray:
    c = rng.standard_normal(space.dim) + 1j * rng.standard_normal(space.dim)
    h = np.tensordot(c, space.basis, axes=1)
    return (h + la.adjoint(h)) / 2


def _cluster(values: np.ndarray, gap: float) -> list[list[int]]:
    groups: list[list[int]] = []
    for i, v in enumerate(values):
        if groups and v - values[groups[-1][-1]] <= gap:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups


def _proj_key(p: np.ndarray):
    d = np.real(np.diag(p))
    first = int(np.argmax(d > 1e-6))
    return (first, -round(float(d[first]), 6))


def _minimal_central_projections(center: OperatorSubspace, seed: int, tol: float) -> list[np.ndarray]:
    n = center.ambient_dim
    if center.dim == 1:
        return [np.eye(n, dtype=np.complex128)]
    rng = np.random.default_rng(seed)
    for _ in range(5):
        h = _hermitian_combination(center, rng)
        vals, vecs = np.linalg.eigh(h)
        spread = float(vals[-1] - vals[0]) + 1.0
        groups = _cluster(vals, 1e-6 * spread)
        if len(groups) != center.dim:
            continue
        projs = []
        for g in groups:
            v = vecs[:, g]
            projs.append(v @ v.conj().T)
        if all(la.subspace_contains(center, p, max(tol, 1e-8)) for p in projs):
            return sorted(projs, key=_proj_key)
    raise RuntimeError("could not split the center into minimal projections after 5 attempts")


def _recover_frame(basis: OperatorSubspace, zs: list[np.ndarray], seed: int, tol: float):
    """Unitary W and block data with W* M W in canonical block form, or (None, None)."""
    n = basis.ambient_dim
    rng = np.random.default_rng(seed + 7919)
    cols, blocks = [], []
    for z in zs:
        Az = la.compress(basis, z)
        d = int(round(np.sqrt(Az.dim)))
        r = la.rank(z, 1e-8)
        if d * d != Az.dim or r % d:
            return None, None
        m = r // d
        vals, vecs = np.linalg.eigh(z)
        uz = vecs[:, vals > 0.5]
        ok = False
        for _ in range(5):
            h = _hermitian_combination(Az, rng)
            hv, hu = np.linalg.eigh(uz.conj().T @ h @ uz)
            spread = float(hv[-1] - hv[0]) + 1.0
            groups = _cluster(hv, 1e-6 * spread)
            if len(groups) == d and all(len(g) == m for g in groups):
                ok = True
                break
        if not ok:
            return None, None
        es = []
        for g in groups:
            v = uz @ hu[:, g]
            es.append(v)
        f1 = es[0]
        e1 = f1 @ f1.conj().T
        x = np.tensordot(rng.standard_normal(Az.dim) + 1j * rng.standard_normal(Az.dim), Az.basis, axes=1)
        block_cols = [f1]
        for v in es[1:]:
            ej = v @ v.conj().T
            w = ej @ x @ e1
            c = np.real(np.trace(la.adjoint(w) @ w)) / m
            if c <= tol:
                return None, None
            block_cols.append(w @ f1 / np.sqrt(c))
        cols.append(np.concatenate(block_cols, axis=1))
        blocks.append((d, m))
    W = np.concatenate(cols, axis=1)
    if W.shape != (n, n) or la.operator_norm(la.adjoint(W) @ W - np.eye(n)) > 1e-7:
        return None, None
    canon = _canonical_algebra_space(blocks, tol)
    for b in basis.basis:
        if not la.subspace_contains(canon, la.adjoint(W) @ b @ W, 1e-7):
            return None, None
    return W, tuple(blocks)


def _canonical_algebra_space(blocks, tol=DEFAULT_TOL) -> OperatorSubspace:
    n = sum(d * m for d, m in blocks)
    out, off = [], 0
    for d, m in blocks:
        for i in range(d):
            for j in range(d):
                b = np.zeros((n, n), dtype=np.complex128)
                b[off:off + d * m, off:off + d * m] = np.kron(la.matrix_unit(d, i, j), np.eye(m)) / np.sqrt(m)
                out.append(b)
        off += d * m
    return la.OperatorSubspace(n, np.array(out), tol)


def _canonical_commutant_space(blocks, tol=DEFAULT_TOL) -> OperatorSubspace:
    n = sum(d * m for d, m in blocks)
    out, off = [], 0
    for d, m in blocks:
        for i in range(m):
            for j in range(m):
                b = np.zeros((n, n), dtype=np.complex128)
                b[off:off + d * m, off:off + d * m] = np.kron(np.eye(d), la.matrix_unit(m, i, j)) / np.sqrt(d)
                out.append(b)
        off += d * m
    return la.OperatorSubspace(n, np.array(out), tol)


def algebra_from_blocks(blocks: Sequence[tuple[int, int]], tol: float = DEFAULT_TOL) -> RepresentedAlgebra:
    """M = sum_k M_{d_k} (x) 1_{m_k} in the canonical ordered basis."""
    blocks = tuple((int(d), int(m)) for d, m in blocks)
    if not blocks or any(d < 1 or m < 1 for d, m in blocks):
        raise ValueError("blocks must be a nonempty list of (d, m) with d, m >= 1")
    n = sum(d * m for d, m in blocks)
    alg = _canonical_algebra_space(blocks, tol)
    com = _canonical_commutant_space(blocks, tol)
    zs, off = [], 0
    for d, m in blocks:
        z = np.zeros((n, n), dtype=np.complex128)
        z[off:off + d * m, off:off + d * m] = np.eye(d * m)
        zs.append(z)
        off += d * m
    center = la.orthonormalize(zs, tol, n)
    return RepresentedAlgebra(n, alg, com, center, tuple(zs), blocks, np.eye(n, dtype=np.complex128), tol)


def algebra_from_space(space: OperatorSubspace, seed: int = 0, iterations: int = 0) -> RepresentedAlgebra:
    """Wrap a subspace already known to be a unital *-algebra."""
    n, tol = space.ambient_dim, space.tol
    com = _commutant_space(space.basis, n, tol)
    center = _commutant_space(np.concatenate([space.basis, com.basis]), n, tol)
    zs = _minimal_central_projections(center, seed, tol)
    W, blocks = _recover_frame(space, zs, seed, tol)
    return RepresentedAlgebra(n, space, com, center, tuple(zs), blocks, W, tol, iterations)


def generated_space(gens, n: int, tol: float = DEFAULT_TOL) -> tuple[OperatorSubspace, int]:
    """Smallest unital *-closed product-closed span containing gens, and the iteration count."""
    gens = [la.as_operator(g, n) for g in gens]
    seed = [np.eye(n, dtype=np.complex128)] + gens + [la.adjoint(g) for g in gens]
    S = la.orthonormalize(seed, tol, n)
    it = 0
    while True:
        it += 1
        T = la.subspace_sum(S, la.product_span(S, S))
        if T.dim == S.dim:
            return S, it
        S = T


def algebra_from_generators(gens, n: int | None = None, tol: float = DEFAULT_TOL,
                            seed: int = 0) -> RepresentedAlgebra:
    gens = list(gens)
    if n is None:
        if not gens:
            raise ValueError("ambient dimension required when there are no generators")
        n = np.asarray(gens[0]).shape[0]
    space, it = generated_space(gens, n, tol)
    return algebra_from_space(space, seed, it)


def diagonal_algebra(n: int, tol: float = DEFAULT_TOL) -> RepresentedAlgebra:
    """l-infinity of n points acting diagonally."""
    return algebra_from_blocks([(1, 1)] * n, tol)


def full_algebra(n: int, tol: float = DEFAULT_TOL) -> RepresentedAlgebra:
    return algebra_from_blocks([(n, 1)], tol)


def commutant_algebra(M: RepresentedAlgebra, seed: int = 0) -> RepresentedAlgebra:
    return algebra_from_space(M.commutant_basis, seed)


def is_diagonal_algebra(M: RepresentedAlgebra) -> bool:
    """True iff M is exactly the diagonal matrices in the standard basis."""
    if M.dim != M.ambient_dim or not M.is_abelian:
        return False
    n = M.ambient_dim
    return all(M.contains(la.matrix_unit(n, i, i)) for i in range(n))


def amplify_algebra(M: RepresentedAlgebra, k: int) -> RepresentedAlgebra:
    """M (x) 1_k acting on C^n (x) C^k."""
    if k == 1:
        return M
    n, tol = M.ambient_dim, M.tol
    ik = np.eye(k)
    alg = la.OperatorSubspace(n * k, np.array([np.kron(b, ik) / np.sqrt(k) for b in M.algebra_basis.basis]), tol)
    com = la.OperatorSubspace(n * k, np.array([np.kron(c, la.matrix_unit(k, i, j))
                                               for c in M.commutant_basis.basis
                                               for i in range(k) for j in range(k)]), tol)
    cen = la.OperatorSubspace(n * k, np.array([np.kron(z, ik) / np.sqrt(k) for z in M.center_basis.basis]), tol)
    zs = tuple(np.kron(z, ik) for z in M.minimal_central_projections)
    blocks = None if M.block_form is None else tuple((d, m * k) for d, m in M.block_form)
    frame = None if M.frame is None else np.kron(M.frame, ik)
    return RepresentedAlgebra(n * k, alg, com, cen, zs, blocks, frame, tol)


# ---------------------------------------------------------------- block data

def _block_offsets(M: RepresentedAlgebra) -> list[int]:
    offs, off = [], 0
    for d, m in M.block_form:
        offs.append(off)
        off += d * m
    return offs


def _require_blocks(M: RepresentedAlgebra):
    if M.block_form is None or M.frame is None:
        raise ValueError("operation needs an algebra with a recovered block form")


def block_embed(M: RepresentedAlgebra, k: int, x) -> np.ndarray:
    """Element of M equal to x (x) 1_m on block k and zero elsewhere."""
    _require_blocks(M)
    d, m = M.block_form[k]
    off = _block_offsets(M)[k]
    n = M.ambient_dim
    c = np.zeros((n, n), dtype=np.complex128)
    c[off:off + d * m, off:off + d * m] = np.kron(np.asarray(x), np.eye(m))
    W = M.frame
    return W @ c @ la.adjoint(W)


def block_components(M: RepresentedAlgebra, a) -> list[np.ndarray]:
    """The d_k x d_k matrices x_k with a = W (sum x_k (x) 1_{m_k}) W*."""
    _require_blocks(M)
    W = M.frame
    c = la.adjoint(W) @ np.asarray(a) @ W
    out = []
    for (d, m), off in zip(M.block_form, _block_offsets(M)):
        blk = c[off:off + d * m, off:off + d * m].reshape(d, m, d, m)
        out.append(np.einsum("iljl->ij", blk) / m)
    return out


def minimal_projections(M: RepresentedAlgebra) -> list[np.ndarray]:
    """The canonical minimal projections e_jj (x) 1_m of every block."""
    _require_blocks(M)
    return [block_embed(M, k, la.matrix_unit(d, j, j))
            for k, (d, _) in enumerate(M.block_form) for j in range(d)]


def sample_projections(M: RepresentedAlgebra, count: int, rng: np.random.Generator) -> list[np.ndarray]:
    """Haar-random projections of M.

    Samples cycle through (block, rank) pairs, conjugating the canonical
    rank-r projection by a Haar unitary of the block; every third sample is a
    sum of independent random projections over all blocks.
    """
    _require_blocks(M)
    combos = [(k, r) for k, (d, _) in enumerate(M.block_form) for r in range(1, d + 1)]
    out = []
    for i in range(count):
        if len(M.block_form) > 1 and i % 3 == 2:
            ranks = [0]
            while not any(ranks):  # the zero projection is not a sample
                ranks = [int(rng.integers(0, d + 1)) for d, _ in M.block_form]
            q = np.zeros((M.ambient_dim,) * 2, dtype=np.complex128)
            for k, ((d, _), r) in enumerate(zip(M.block_form, ranks)):
                if r:
                    q += block_embed(M, k, _rank_projection(d, r, rng))
            out.append(q)
        else:
            k, r = combos[i % len(combos)]
            out.append(block_embed(M, k, _rank_projection(M.block_form[k][0], r, rng)))
    return out


def _rank_projection(d: int, r: int, rng) -> np.ndarray:
    u = la.haar_unitary(d, rng)
    return u[:, :r] @ u[:, :r].conj().T


def random_element(M: RepresentedAlgebra, rng: np.random.Generator) -> np.ndarray:
    c = rng.standard_normal(M.dim) + 1j * rng.standard_normal(M.dim)
    return np.tensordot(c, M.algebra_basis.basis, axes=1)


# ---------------------------------------------------------------- traces and supports

def trace_functional(M: RepresentedAlgebra, weights=None) -> TraceFunctional:
    if weights is None:
        _require_blocks(M)
        weights = [1.0] * len(M.block_form)
    return TraceFunctional(M, tuple(weights))


def trace_eval(tau: TraceFunctional, a, check: bool = True) -> complex:
    M = tau.algebra
    a = np.asarray(a, dtype=np.complex128)
    if check and not M.contains(a, max(M.tol, 1e-8)):
        raise ValueError("trace_eval argument is not in the algebra")
    total = 0.0 + 0.0j
    for w, z, (d, m) in zip(tau.weights, M.minimal_central_projections, M.block_form):
        total += w * np.trace(z @ a) / m
    return complex(total)


def support_vector(M: RepresentedAlgebra, xi, tol: float | None = None, atol: float | None = None) -> np.ndarray:
    """Smallest projection of M fixing xi: the projection onto span(M' xi).

    ``atol`` defaults to tol * |xi|; supply the natural scale when xi is a
    computed product that may vanish only up to rounding.
    """
    tol = M.tol if tol is None else tol
    xi = np.asarray(xi, dtype=np.complex128).reshape(-1)
    atol = tol * float(np.linalg.norm(xi)) if atol is None else atol
    cols = M.commutant_basis.basis @ xi
    return la.range_projection(cols.T, tol, atol)


def left_support(M: RepresentedAlgebra, a, tol: float | None = None, atol: float = 0.0) -> np.ndarray:
    """Smallest projection q of M with q a = a: the projection onto span(M' a H)."""
    tol = M.tol if tol is None else tol
    a = np.asarray(a, dtype=np.complex128)
    stacked = np.einsum("kij,jl->ikl", M.commutant_basis.basis, a)
    return la.range_projection(stacked.reshape(M.ambient_dim, -1), tol, atol)


def right_support(M: RepresentedAlgebra, a, tol: float | None = None, atol: float = 0.0) -> np.ndarray:
    return left_support(M, la.adjoint(np.asarray(a)), tol, atol)
