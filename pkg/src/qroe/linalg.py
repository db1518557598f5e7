"""Dense complex linear algebra on operator spaces.

Operators are square ``complex128`` arrays.  Subspaces of operators are kept
as orthonormal bases for the Hilbert-Schmidt pairing ``<a, b> = trace(b* a)``,
stored as a ``(k, n, n)`` array.  Vectorization is row-major throughout, so
``vec(a @ x @ b) = kron(a, b.T) @ vec(x)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence, Union

import numpy as np

DEFAULT_TOL = 1e-9

Constraint = Union[np.ndarray, Callable[[np.ndarray], np.ndarray]]


def as_operator(a, dim: int | None = None) -> np.ndarray:
    arr = np.asarray(a, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"operator must be square, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise ValueError(f"operator has dim {arr.shape[0]}, expected {dim}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("operator has non-finite entries")
    return arr


def adjoint(a: np.ndarray) -> np.ndarray:
    return np.conj(a).T


def matrix_unit(n: int, i: int, j: int) -> np.ndarray:
    e = np.zeros((n, n), dtype=np.complex128)
    e[i, j] = 1.0
    return e


def hs_inner(a, b) -> complex:
    """Hilbert-Schmidt pairing trace(b* a)."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return complex(np.vdot(b, a))


def hs_norm(a) -> float:
    return float(np.linalg.norm(np.asarray(a)))


def operator_norm(a) -> float:
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


@dataclass(frozen=True, eq=False)
class OperatorSubspace:
    """Linear span of operators, held as an orthonormal basis."""

    ambient_dim: int
    basis: np.ndarray
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=np.complex128)
        n = self.ambient_dim
        if b.size == 0:
            b = np.zeros((0, n, n), dtype=np.complex128)
        if b.ndim != 3 or b.shape[1:] != (n, n):
            raise ValueError(f"basis must have shape (k, {n}, {n}), got {b.shape}")
        if b.shape[0] > n * n:
            raise ValueError("basis longer than ambient_dim**2")
        b = b.copy()
        b.flags.writeable = False
        object.__setattr__(self, "basis", b)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def __len__(self):
        return self.dim

    def __iter__(self):
        return iter(self.basis)

    @property
    def flat(self) -> np.ndarray:
        """Basis as rows of a ``(k, n*n)`` matrix."""
        return self.basis.reshape(self.dim, self.ambient_dim * self.ambient_dim)

    def gram(self) -> np.ndarray:
        f = self.flat
        return f.conj() @ f.T

    def project(self, a) -> np.ndarray:
        v = np.asarray(a, dtype=np.complex128).reshape(-1)
        f = self.flat
        coeffs = f.conj() @ v
        return (f.T @ coeffs).reshape(self.ambient_dim, self.ambient_dim)

    def contains(self, a, tol: float | None = None) -> bool:
        return subspace_contains(self, a, tol)

    def __repr__(self):
        return f"OperatorSubspace(ambient_dim={self.ambient_dim}, dim={self.dim})"


def _stack(vectors, ambient_dim: int | None) -> tuple[np.ndarray, int]:
    if isinstance(vectors, np.ndarray) and vectors.ndim == 3:
        arr = vectors.astype(np.complex128, copy=False)
    else:
        items = [np.asarray(v, dtype=np.complex128) for v in vectors]
        if not items:
            if ambient_dim is None:
                raise ValueError("ambient_dim required for an empty vector list")
            return np.zeros((0, ambient_dim, ambient_dim), dtype=np.complex128), ambient_dim
        shapes = {v.shape for v in items}
        if len(shapes) != 1:
            raise ValueError(f"vectors have mixed shapes {sorted(shapes)}")
        arr = np.stack(items)
    n = arr.shape[1] if arr.shape[0] else ambient_dim
    if n is None:
        raise ValueError("ambient_dim required for an empty vector list")
    if ambient_dim is not None and n != ambient_dim:
        raise ValueError(f"vectors have dim {n}, expected {ambient_dim}")
    return arr, n


def orthonormalize(vectors, tol: float = DEFAULT_TOL, ambient_dim: int | None = None,
                   atol: float = 0.0) -> OperatorSubspace:
    """Orthonormal basis of the span, dropping singular values below tol * largest.

    ``atol`` adds an absolute floor, for inputs such as products of unit
    vectors that may vanish only up to rounding.
    """
    arr, n = _stack(vectors, ambient_dim)
    if arr.shape[0] == 0:
        return OperatorSubspace(n, np.zeros((0, n, n)), tol)
    mat = arr.reshape(arr.shape[0], -1)
    if not np.all(np.isfinite(mat)):
        raise ValueError("non-finite entries in vectors")
    mat = mat[np.any(mat != 0, axis=1)]
    if mat.shape[0] == 0:
        return OperatorSubspace(n, np.zeros((0, n, n)), tol)
    _, s, vh = np.linalg.svd(mat, full_matrices=False)
    if s.size == 0 or s[0] <= atol or s[0] == 0.0:
        return OperatorSubspace(n, np.zeros((0, n, n)), tol)
    r = int(np.sum(s > max(tol * s[0], atol)))
    return _canonical(vh[:r], n, tol)


def _canonical(rows: np.ndarray, n: int, tol: float) -> OperatorSubspace:
    """Subspace with orthonormal rows; matrix units when the span is one of their spans.

    If the joint support has as many positions as the dimension, the span
    equals the span of those matrix units, which keeps later products sparse.
    """
    r = rows.shape[0]
    if r:
        mask = np.max(np.abs(rows), axis=0) > tol
        idx = np.flatnonzero(mask)
        if idx.size == r:
            units = np.zeros((r, n * n), dtype=np.complex128)
            units[np.arange(r), idx] = 1.0
            rows = units
    return OperatorSubspace(n, rows.reshape(r, n, n), tol)


def zero_subspace(n: int, tol: float = DEFAULT_TOL) -> OperatorSubspace:
    return OperatorSubspace(n, np.zeros((0, n, n)), tol)


def full_subspace(n: int, tol: float = DEFAULT_TOL) -> OperatorSubspace:
    return OperatorSubspace(n, np.eye(n * n).reshape(n * n, n, n), tol)


def subspace_contains(V: OperatorSubspace, a, tol: float | None = None) -> bool:
    """True iff the distance from ``a`` to span(V) is at most tol * ||a||."""
    tol = V.tol if tol is None else tol
    a = np.asarray(a, dtype=np.complex128)
    if a.shape != (V.ambient_dim, V.ambient_dim):
        raise ValueError(f"dimension mismatch: {a.shape} vs ambient {V.ambient_dim}")
    norm = hs_norm(a)
    if norm == 0.0:
        return True
    return hs_norm(a - V.project(a)) <= tol * norm


def subspace_contains_all(V: OperatorSubspace, arr, tol: float | None = None) -> bool:
    """Vectorized subspace_contains over a stack of operators.

    Residuals are measured against tol * max(||a||, largest norm in the
    stack), so entries that vanish only up to rounding do not count.
    """
    tol = V.tol if tol is None else tol
    arr = np.asarray(arr, dtype=np.complex128)
    if arr.size == 0:
        return True
    flat = arr.reshape(arr.shape[0], -1)
    f = V.flat
    resid = flat - (flat @ f.conj().T) @ f
    norms = np.linalg.norm(flat, axis=1)
    floor = np.maximum(norms, norms.max())
    return bool(np.all(np.linalg.norm(resid, axis=1) <= tol * floor))


def subspace_le(V: OperatorSubspace, W: OperatorSubspace, tol: float | None = None) -> bool:
    return subspace_contains_all(W, V.basis, tol)


def subspace_equal(V: OperatorSubspace, W: OperatorSubspace, tol: float | None = None) -> bool:
    return V.dim == W.dim and subspace_le(V, W, tol) and subspace_le(W, V, tol)


def subspace_sum(*spaces: OperatorSubspace, tol: float | None = None) -> OperatorSubspace:
    if not spaces:
        raise ValueError("need at least one subspace")
    n = spaces[0].ambient_dim
    tol = spaces[0].tol if tol is None else tol
    return orthonormalize(np.concatenate([s.basis for s in spaces]), tol, ambient_dim=n)


def product_span(V: OperatorSubspace, W: OperatorSubspace, tol: float | None = None) -> OperatorSubspace:
    """span{v w : v in V, w in W}."""
    if V.ambient_dim != W.ambient_dim:
        raise ValueError("ambient dimension mismatch")
    tol = V.tol if tol is None else tol
    n = V.ambient_dim
    if V.dim == 0 or W.dim == 0:
        return zero_subspace(n, tol)
    # products in chunks, keeping only rows that are not exactly zero; the
    # running span is re-orthonormalized once it outgrows the ambient space
    step = max(1, 8192 // W.dim)
    kept = []
    count = 0
    for i in range(0, V.dim, step):
        prods = np.tensordot(V.basis[i:i + step], W.basis, axes=([2], [1]))
        prods = prods.transpose(0, 2, 1, 3).reshape(-1, n * n)
        prods = prods[np.any(prods != 0, axis=1)]
        if prods.shape[0] > 1:
            prods = np.unique(prods, axis=0)
        kept.append(prods)
        count += prods.shape[0]
        if count > 4 * n * n:
            acc = orthonormalize(np.concatenate(kept).reshape(-1, n, n), tol, n, atol=tol)
            kept, count = [acc.flat], acc.dim
    if not count:
        return zero_subspace(n, tol)
    return orthonormalize(np.concatenate(kept).reshape(-1, n, n), tol, n, atol=tol)


def compress(V: OperatorSubspace, p, q=None) -> OperatorSubspace:
    """span{p v q} (q defaults to p) for projections p, q."""
    p = np.asarray(p, dtype=np.complex128)
    q = p if q is None else np.asarray(q, dtype=np.complex128)
    prods = np.einsum("ij,ajk,kl->ail", p, V.basis, q)
    return orthonormalize(prods, V.tol, V.ambient_dim, atol=V.tol)


def adjoint_span(V: OperatorSubspace) -> OperatorSubspace:
    return orthonormalize(np.conj(np.swapaxes(V.basis, 1, 2)), V.tol, ambient_dim=V.ambient_dim)


def is_self_adjoint_space(V: OperatorSubspace, tol: float | None = None) -> bool:
    return all(subspace_contains(V, adjoint(v), tol) for v in V.basis)


def _constraint_matrix(c: Constraint, n: int) -> np.ndarray:
    if callable(c):
        cols = []
        for k in range(n * n):
            e = np.zeros(n * n, dtype=np.complex128)
            e[k] = 1.0
            cols.append(np.asarray(c(e.reshape(n, n)), dtype=np.complex128).reshape(-1))
        return np.stack(cols, axis=1)
    m = np.asarray(c, dtype=np.complex128)
    if m.ndim != 2 or m.shape[1] != n * n:
        raise ValueError(f"constraint matrix must have {n * n} columns, got shape {m.shape}")
    return m


def nullspace_of_constraints(constraints: Sequence[Constraint], ambient_dim: int,
                             tol: float = DEFAULT_TOL, atol: float = 0.0) -> OperatorSubspace:
    """Operators killed by every constraint.

    A constraint is either a matrix acting on row-major vectorized operators or
    a callable linear map, which is tabulated on the matrix units.  Singular
    values at most max(tol * largest, atol) count as zero.
    """
    n = ambient_dim
    mats = [_constraint_matrix(c, n) for c in constraints]
    mats = [m for m in mats if m.shape[0]]
    if not mats:
        return full_subspace(n, tol)
    big = np.concatenate(mats, axis=0)
    big = big[np.any(big != 0, axis=1)]
    if big.shape[0] == 0:
        return full_subspace(n, tol)
    _, s, vh = np.linalg.svd(big, full_matrices=big.shape[0] < n * n)
    if s.size == 0 or s[0] <= atol or s[0] == 0.0:
        return full_subspace(n, tol)
    r = int(np.sum(s > max(tol * s[0], atol)))
    return _canonical(vh[r:].conj(), n, tol)


def range_projection(a, tol: float = DEFAULT_TOL, atol: float = 0.0) -> np.ndarray:
    """Orthogonal projection onto the range of ``a`` (any number of columns).

    Singular values at most max(tol * largest, atol) are treated as zero; pass
    ``atol`` when ``a`` is a product that may vanish only up to rounding.
    """
    a = np.asarray(a, dtype=np.complex128)
    rows = a.shape[0]
    if a.size == 0:
        return np.zeros((rows, rows), dtype=np.complex128)
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    if s[0] <= atol or s[0] == 0.0:
        return np.zeros((rows, rows), dtype=np.complex128)
    r = int(np.sum(s > max(tol * s[0], atol)))
    ur = u[:, :r]
    return ur @ ur.conj().T


def rank(a, tol: float = DEFAULT_TOL, atol: float = 0.0) -> int:
    a = np.asarray(a)
    if a.size == 0:
        return 0
    s = np.linalg.svd(a, compute_uv=False)
    if s[0] <= atol or s[0] == 0.0:
        return 0
    return int(np.sum(s > max(tol * s[0], atol)))


def is_projection(p, tol: float = DEFAULT_TOL) -> bool:
    p = np.asarray(p, dtype=np.complex128)
    scale = max(1.0, operator_norm(p))
    return (operator_norm(p @ p - p) <= tol * scale * 10
            and operator_norm(p - adjoint(p)) <= tol * scale * 10)


def join_of_projections(ps: Iterable, tol: float = DEFAULT_TOL, dim: int | None = None) -> np.ndarray:
    """Projection onto the sum of the ranges."""
    ps = [np.asarray(p, dtype=np.complex128) for p in ps]
    if not ps:
        if dim is None:
            raise ValueError("dim required for an empty join")
        return np.zeros((dim, dim), dtype=np.complex128)
    for p in ps:
        if not is_projection(p, tol):
            raise ValueError("join input is not a projection")
    return range_projection(np.concatenate(ps, axis=1), tol, atol=tol)


def complement(p) -> np.ndarray:
    """1 - p for a projection, snapped to zero when p is the identity up to rounding."""
    p = np.asarray(p, dtype=np.complex128)
    c = np.eye(p.shape[0]) - p
    if operator_norm(c) < 0.5:
        return np.zeros_like(c)
    return c


def projection_le(p, q, tol: float = DEFAULT_TOL) -> bool:
    """p <= q for projections: q p = p."""
    p = np.asarray(p)
    return operator_norm(np.asarray(q) @ p - p) <= tol * max(1.0, operator_norm(p)) * 10


def lmul(a) -> np.ndarray:
    """Matrix of x -> a x on row-major vec."""
    a = np.asarray(a)
    return np.kron(a, np.eye(a.shape[0]))


def rmul(b) -> np.ndarray:
    """Matrix of x -> x b on row-major vec."""
    b = np.asarray(b)
    return np.kron(np.eye(b.shape[0]), b.T)


def amplify(a, k: int) -> np.ndarray:
    """a tensor 1_k."""
    return np.kron(np.asarray(a), np.eye(k))


def random_operator(n: int, rng: np.random.Generator) -> np.ndarray:
    return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    z = random_operator(n, rng) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def encode_array(a):
    """JSON form: nested lists, complex entries as [re, im] pairs."""
    a = np.asarray(a)
    if np.iscomplexobj(a):
        return np.stack([a.real, a.imag], axis=-1).tolist()
    return a.tolist()


def decode_array(obj, ndim: int = 2) -> np.ndarray:
    """Inverse of encode_array: an extra trailing axis of length 2 means [re, im]."""
    arr = np.asarray(obj, dtype=float)
    if arr.ndim == ndim + 1 and arr.shape[-1] == 2:
        return arr[..., 0] + 1j * arr[..., 1]
    if arr.ndim != ndim:
        raise ValueError(f"expected a {ndim}-dimensional array, got shape {arr.shape}")
    return arr.astype(np.complex128)
