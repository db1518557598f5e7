"""Quantum functions between represented algebras and their large-scale properties.

A quantum function phi: M -> N is a unital *-homomorphism.  Two variants are
constructible here: the bridge phi_f(g) = g o f of a set map f: X -> Y
(so phi_f goes from l-infinity(Y) to l-infinity(X)), and spatial maps
phi(a) = u* a u for an isometry u with u u* = r central in M.

Coarseness of a classical map is decided on generators: the set image
(f x f)(.) commutes with unions, inverses and compositions (the latter up to
inclusion, (f x f)(E o F) is inside (f x f)(E) o (f x f)(F)), so the image of
every member of the generated structure sits inside the structure generated
by the images of the generators.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import coarse
from . import linalg as la
from . import qrel, vna
from .coarse import ClassicalCoarseSpace, CoarseStructure, Membership, QuantumMetric
from .linalg import OperatorSubspace
from .qrel import ClassicalRelation, ProjectionPair, QuantumRelation
from .qura import RoeAlgebra
from .vna import RepresentedAlgebra


class QuantumFunction:
    source: RepresentedAlgebra
    target: RepresentedAlgebra

    def __call__(self, a) -> np.ndarray:
        raise NotImplementedError

    def check_hom(self, tol: float = 1e-8) -> bool:
        """Unital, *-preserving and multiplicative on the source basis, landing in the target."""
        M, N = self.source, self.target
        if la.operator_norm(self(M.identity) - N.identity) > tol:
            return False
        B = M.algebra_basis.basis
        imgs = [self(b) for b in B]
        for b, ib in zip(B, imgs):
            if not N.contains(ib, tol):
                return False
            if la.operator_norm(self(la.adjoint(b)) - la.adjoint(ib)) > tol:
                return False
        for b, ib in zip(B, imgs):
            for c, ic in zip(B, imgs):
                if la.operator_norm(self(b @ c) - ib @ ic) > tol:
                    return False
        return True


@dataclass(frozen=True, eq=False)
class ClassicalBridge(QuantumFunction):
    """phi_f: l-infinity(Y) -> l-infinity(X) for f: X -> Y."""

    f: tuple
    ny: int
    source: RepresentedAlgebra = field(repr=False)
    target: RepresentedAlgebra = field(repr=False)

    @property
    def nx(self) -> int:
        return len(self.f)

    @property
    def matrix(self) -> np.ndarray:
        F = np.zeros((self.ny, self.nx))
        F[list(self.f), range(self.nx)] = 1.0
        return F

    def __call__(self, b) -> np.ndarray:
        b = np.asarray(b, dtype=np.complex128)
        d = np.diag(b)
        if np.max(np.abs(b - np.diag(d)), initial=0.0) > 1e-9 * max(1.0, float(np.max(np.abs(b)))):
            raise ValueError("phi_f is defined on diagonal operators only")
        return np.diag(d[list(self.f)])


@dataclass(frozen=True, eq=False)
class SpatialHom(QuantumFunction):
    """phi(a) = u* a u with u an isometry from the target space onto the range of r."""

    source: RepresentedAlgebra
    target: RepresentedAlgebra
    r: np.ndarray
    u: np.ndarray

    def __post_init__(self):
        M, N = self.source, self.target
        u = np.asarray(self.u, dtype=np.complex128)
        r = np.asarray(self.r, dtype=np.complex128)
        if u.shape != (M.ambient_dim, N.ambient_dim):
            raise ValueError("u must map the target space into the source space")
        if la.operator_norm(la.adjoint(u) @ u - np.eye(N.ambient_dim)) > 1e-8:
            raise ValueError("u must be an isometry")
        if la.operator_norm(u @ la.adjoint(u) - r) > 1e-8:
            raise ValueError("u u* must equal r")
        if not la.subspace_contains(M.center_basis, r, 1e-8):
            raise ValueError("r must be a central projection of the source")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "r", r)

    def __call__(self, a) -> np.ndarray:
        return la.adjoint(self.u) @ np.asarray(a, dtype=np.complex128) @ self.u


def from_classical_function(f: Sequence[int], ny: int | None = None) -> ClassicalBridge:
    f = tuple(int(y) for y in f)
    if not f:
        raise ValueError("f must have a nonempty domain")
    ny = max(f) + 1 if ny is None else int(ny)
    if min(f) < 0 or max(f) >= ny:
        raise ValueError("f takes values outside the codomain")
    return ClassicalBridge(f, ny, vna.diagonal_algebra(ny), vna.diagonal_algebra(len(f)))


def recover_function(phi: ClassicalBridge) -> tuple:
    """f(x) = the atom y with e_xx <= phi(e_yy)."""
    nx, ny = phi.nx, phi.ny
    out = []
    for x in range(nx):
        ex = la.matrix_unit(nx, x, x)
        ys = [y for y in range(ny) if la.projection_le(ex, phi(la.matrix_unit(ny, y, y)))]
        if len(ys) != 1:
            raise ValueError(f"point {x} sits under {len(ys)} atom images")
        out.append(ys[0])
    return tuple(out)


def spatial_from_injection(g: Sequence[int], n_big: int) -> SpatialHom:
    """Restriction l-infinity(X) -> l-infinity(X') along an injection g: X' -> X, as u* a u."""
    g = [int(x) for x in g]
    if len(set(g)) != len(g) or not g:
        raise ValueError("g must be a nonempty injection")
    u = np.zeros((n_big, len(g)), dtype=np.complex128)
    u[g, range(len(g))] = 1.0
    return SpatialHom(vna.diagonal_algebra(n_big), vna.diagonal_algebra(len(g)), u @ u.T, u)


# ---------------------------------------------------------------- classical checkers

def classical_pullback_image(f: Sequence[int], E: ClassicalRelation, ny: int) -> ClassicalRelation:
    """(f x f)(E)."""
    return ClassicalRelation(ny, frozenset((f[x], f[y]) for x, y in E.pairs))


def classical_preimage(f: Sequence[int], F: ClassicalRelation) -> ClassicalRelation:
    """(f x f)^{-1}(F)."""
    n = len(f)
    return ClassicalRelation(n, frozenset((x, y) for x in range(n) for y in range(n) if (f[x], f[y]) in F.pairs))


def _top_relation(S: ClassicalCoarseSpace) -> ClassicalRelation:
    if not S.stabilized:
        raise ValueError("classical structure did not stabilize")
    return ClassicalRelation.from_matrix(S.top)


def is_coarse_classical(f, X: ClassicalCoarseSpace, Y: ClassicalCoarseSpace) -> bool:
    top = _top_relation(Y)
    return all(classical_pullback_image(f, ClassicalRelation.from_matrix(g), Y.n) <= top for g in X.generators)


def is_expanding_classical(f, X: ClassicalCoarseSpace, Y: ClassicalCoarseSpace) -> bool:
    """Preimages of controlled sets are controlled; the largest member decides."""
    return classical_preimage(f, _top_relation(Y)) <= _top_relation(X)


def is_cobounded_classical(f, Y: ClassicalCoarseSpace) -> bool:
    top = Y.top
    img = sorted(set(f))
    return bool(np.all(top[:, img].any(axis=1)))


def are_close_classical(f, g, Y: ClassicalCoarseSpace) -> bool:
    if len(f) != len(g):
        raise ValueError("maps need a common domain")
    top = Y.top
    return all(top[a, b] for a, b in zip(f, g))


# ---------------------------------------------------------------- quantum checkers

@dataclass(frozen=True)
class MorphVerdict:
    status: str  # "yes", "no" or "unknown"
    mode: str  # "exact" or "sampled"
    memberships: tuple = ()
    samples: int | None = None
    seed: int | None = None

    @property
    def yes(self) -> bool:
        return self.status == "yes"

    def to_json(self) -> dict:
        return {"status": self.status, "mode": self.mode,
                "memberships": [str(m) for m in self.memberships],
                "samples": self.samples, "seed": self.seed}


def _pushforward_relation(phi: QuantumFunction, U: QuantumRelation, pairs) -> QuantumRelation:
    """Annihilator relation on the source from the pairs (p, q) with (phi p, phi q) not in R_U."""
    forbidden = [pr for pr in pairs
                 if not qrel.intrinsic_member(U, ProjectionPair(phi(pr.p), phi(pr.q), 1))]
    return qrel.subspace_from_annihilators(phi.source, forbidden)


def _source_pairs(phi: QuantumFunction, samples: int, seed: int):
    M = phi.source
    if M.is_abelian:
        n = len(M.atoms())
        return [qrel.atom_pair(M, i, j) for i in range(n) for j in range(n)], "exact"
    rng = np.random.default_rng(seed)
    projs = vna.minimal_projections(M) + vna.sample_projections(M, samples, rng)
    return [ProjectionPair(p, q, 1) for p in projs for q in projs], "sampled"


def _combine(ms: list[Membership], mode: str, samples, seed) -> MorphVerdict:
    if all(m.yes for m in ms):
        status = "yes"
    elif mode == "exact" and any(m.no for m in ms):
        status = "no"
    else:
        status = "unknown"
    return MorphVerdict(status, mode, tuple(ms), None if mode == "exact" else samples,
                        None if mode == "exact" else seed)


def is_coarse(phi: QuantumFunction, Q: CoarseStructure, R: CoarseStructure,
              samples: int = 32, seed: int = 0) -> MorphVerdict:
    """phi*[Q] inside R, with Q on the target of phi and R on its source.

    Over an abelian source the intrinsic relations are decided by atom pairs
    and the verdict is exact; otherwise forbidden pairs are sampled, which
    yields a superset of each pushed-forward relation, so only Yes is sound.
    """
    pairs, mode = _source_pairs(phi, samples, seed)
    ms = []
    for U in Q.generators:
        ms.append(coarse.member_relation(R, _pushforward_relation(phi, U, pairs)))
    return _combine(ms, mode, samples, seed)


def _atom_under(phi: ClassicalBridge, x: int) -> int:
    N, M = phi.target, phi.source
    zx = N.atoms()[x]
    for y, zy in enumerate(M.atoms()):
        if la.operator_norm(zx @ phi(zy) - zx) < 1e-9:
            return y
    raise ValueError(f"atom {x} is under no image atom")


def is_expanding(phi: ClassicalBridge, Q: CoarseStructure, R: CoarseStructure) -> MorphVerdict:
    """Preimage of R's largest member is a member of Q (abelian bridges, exact).

    The preimage relates atoms x, x' of the target exactly when the source
    atoms sitting above them are related by the top of R.
    """
    if not isinstance(phi, ClassicalBridge):
        raise TypeError("expansion is decided only for classical bridges")
    if not R.stabilized:
        return MorphVerdict("unknown", "exact", (Membership("unknown"),))
    N = phi.target
    above = [_atom_under(phi, x) for x in range(N.ambient_dim)]
    top = R.top
    forbidden = []
    for x in range(N.ambient_dim):
        for x2 in range(N.ambient_dim):
            if not qrel.intrinsic_member(top, qrel.atom_pair(phi.source, above[x], above[x2])):
                forbidden.append(qrel.atom_pair(N, x, x2))
    V = qrel.subspace_from_annihilators(N, forbidden)
    return _combine([coarse.member_relation(Q, V)], "exact", None, None)


# ---------------------------------------------------------------- Roe embeddings

@dataclass(frozen=True, eq=False)
class EmbeddingReport:
    image: OperatorSubspace
    contained: tuple
    target_dim: int
    source_dim: int

    @property
    def ok(self) -> bool:
        return all(self.contained)

    def to_json(self) -> dict:
        return {"image_dim": self.image.dim, "source_roe_dim": self.source_dim,
                "target_roe_dim": self.target_dim, "all_contained": self.ok}


def embed_roe(phi: SpatialHom, R_N: RoeAlgebra, R_M: RoeAlgebra) -> EmbeddingReport:
    """b -> u b u* from the Roe algebra over N into the one over M."""
    u = phi.u
    imgs = np.einsum("ij,ajk,kl->ail", u, R_N.algebra_space.basis, la.adjoint(u))
    contained = tuple(R_M.contains(b, 1e-8) for b in imgs)
    image = la.orthonormalize(imgs, R_M.algebra_space.tol, R_M.algebra_space.ambient_dim)
    return EmbeddingReport(image, contained, R_M.dim, R_N.dim)


def hereditary_image_check(emb: EmbeddingReport, r, R_M: RoeAlgebra) -> bool:
    """Image equals r R_M r as subspaces."""
    corner = la.compress(R_M.algebra_space, np.asarray(r, dtype=np.complex128))
    return la.subspace_equal(emb.image, corner, 1e-8)


def is_star_subalgebra(space: OperatorSubspace, unit) -> bool:
    return (la.subspace_contains(space, unit, 1e-8) and la.is_self_adjoint_space(space, 1e-8)
            and la.subspace_le(la.product_span(space, space), space, 1e-8))


# ---------------------------------------------------------------- moduli

@dataclass(frozen=True)
class Modulus:
    grid: tuple
    values: tuple
    mode: str

    def to_json(self) -> dict:
        return {"grid": list(self.grid), "values": [None if math.isinf(v) else v for v in self.values],
                "mode": self.mode}


def _running(values, op):
    out, cur = [], None
    for v in values:
        cur = v if cur is None else op(cur, v)
        out.append(cur)
    return tuple(out)


def _projection_family(phi: QuantumFunction, samples: int, seed: int):
    M = phi.source
    if M.is_abelian:
        return M.atoms(), "exact"
    rng = np.random.default_rng(seed)
    return vna.minimal_projections(M) + vna.sample_projections(M, samples, rng), "sampled"


def tilde_omega(phi: QuantumFunction, QM_source: QuantumMetric, QM_target: QuantumMetric,
                samples: int = 32, seed: int = 0) -> Modulus:
    """t -> inf{ d_target(phi p, phi q) : d_source(p, q) >= t } on the source grid.

    Exact over atom pairs for abelian sources.  Returned nondecreasing.
    """
    projs, mode = _projection_family(phi, samples, seed)
    imgs = [phi(p) for p in projs]
    live = [i for i, q in enumerate(imgs) if la.operator_norm(q) > 0.5]
    table = []
    for i in live:
        for j in live:
            ds = coarse.v_distance(QM_source, ProjectionPair(projs[i], projs[j], 1))
            dt = coarse.v_distance(QM_target, ProjectionPair(imgs[i], imgs[j], 1))
            table.append((ds, dt))
    vals = [min((dt for ds, dt in table if ds >= t), default=math.inf) for t in QM_source.grid]
    return Modulus(tuple(QM_source.grid), _running(vals, max), mode)


def tilde_rho(phi: QuantumFunction, QM_source: QuantumMetric, QM_target: QuantumMetric,
              samples: int = 32, seed: int = 0) -> Modulus:
    """t -> sup{ diam_target(phi p) : diam_source(p) <= t } on the source grid.

    For abelian sources, diameters of images of unions are attained on pairs
    of atoms, so pairs and singletons are exhaustive.
    """
    projs, mode = _projection_family(phi, samples, seed)
    cands = []
    for i, p in enumerate(projs):
        for q in projs[i:]:
            pq = la.join_of_projections([p, q], 1e-9, p.shape[0])
            img = phi(pq)
            if la.operator_norm(img) < 0.5:
                continue
            ds = coarse.diameter(QM_source, pq, samples, seed).value
            dt = coarse.diameter(QM_target, img, samples, seed).value
            cands.append((ds, dt))
    vals = [max((dt for ds, dt in cands if ds <= t), default=0.0) for t in QM_source.grid]
    return Modulus(tuple(QM_source.grid), _running(vals, max), mode)


def ceil_to_grid(d: float, grid) -> float:
    """Least grid point >= d, or inf."""
    return min((t for t in grid if d <= t), default=math.inf)


def omega_classical(f, dX, dY, grid) -> tuple:
    """inf{ d_X(x, x') : d_Y(f x, f x') >= t }, distances rounded up to the grid."""
    dX, dY = np.asarray(dX, float), np.asarray(dY, float)
    n = len(f)
    pairs = [(ceil_to_grid(dY[f[x], f[y]], grid), ceil_to_grid(dX[x, y], grid)) for x in range(n) for y in range(n)]
    return tuple(min((b for a, b in pairs if a >= t), default=math.inf) for t in grid)


def rho_classical(f, dX, dY, grid) -> tuple:
    """max{ d_X(x, x') : d_Y(f x, f x') <= t }, distances rounded up to the grid."""
    dX, dY = np.asarray(dX, float), np.asarray(dY, float)
    n = len(f)
    pairs = [(ceil_to_grid(dY[f[x], f[y]], grid), ceil_to_grid(dX[x, y], grid)) for x in range(n) for y in range(n)]
    return tuple(max((b for a, b in pairs if a <= t), default=0.0) for t in grid)
