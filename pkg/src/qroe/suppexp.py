"""Support expansion constraints.

An operator a is lambda-constrained (projection form) over (M, tau) when
tau(s_l(a q)) <= lambda tau(q) and tau(s_l(a* q)) <= lambda tau(q) for every
projection q of M; the vector form replaces q by the support projection of a
vector xi and s_l(a q) by the support of a xi.

Over an atomic abelian algebra the projection quantifier reduces to atoms:
the left support of a q_A is the join of the left supports of a z_x for
x in A, and traces are subadditive on joins.  That is the exact route.  For
every other algebra the checks sample projections or vectors and only ever
refute or report an inconclusive pass.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from . import linalg as la
from . import qrel, vna
from .coarse import CoarseStructure, build_ladder
from .qrel import QuantumRelation
from .qura import Refused
from .vna import RepresentedAlgebra, TraceFunctional

SLACK = 1e-9


@dataclass(frozen=True)
class Witness:
    kind: str  # "projection" or "vector"
    value: np.ndarray
    ratio: float
    side: str  # "a" or "a*"
    atom: int | None = None

    def to_json(self) -> dict:
        out = {"kind": self.kind, "ratio": self.ratio, "side": self.side, "value": la.encode_array(self.value)}
        if self.atom is not None:
            out["atom"] = self.atom
        return out


@dataclass(frozen=True)
class ConstraintVerdict:
    """Outcome of a constraint test at a given lambda.

    ``status`` is "satisfied" (exact mode only), "refuted" (with a witness) or
    "inconclusive" (sampled mode found no violation).  ``lambda_min`` is exact
    in exact mode; in sampled mode it is the largest ratio seen, a lower bound.
    """

    mode: str
    lam: float
    status: str
    satisfied_at_lambda: float | None = None
    refutation_witness: Witness | None = None
    lambda_min: float | None = None
    samples: int | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.mode not in ("exact", "sampled"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.status not in ("satisfied", "refuted", "inconclusive"):
            raise ValueError(f"unknown status {self.status!r}")
        if self.status == "satisfied" and (self.mode != "exact" or self.satisfied_at_lambda is None):
            raise ValueError("only exact mode can report a pass, and it must carry its lambda")
        if (self.status == "refuted") != (self.refutation_witness is not None):
            raise ValueError("a witness is present exactly when the verdict is a refutation")
        if self.status == "inconclusive" and self.mode != "sampled":
            raise ValueError("exact mode is never inconclusive")
        if self.status != "satisfied" and self.satisfied_at_lambda is not None:
            raise ValueError("satisfied_at_lambda only accompanies a pass")

    @property
    def satisfied(self) -> bool:
        return self.status == "satisfied"

    @property
    def refuted(self) -> bool:
        return self.status == "refuted"

    @property
    def inconclusive(self) -> bool:
        return self.status == "inconclusive"

    def to_json(self) -> dict:
        return {"mode": self.mode, "lambda": self.lam, "status": self.status,
                "lambda_min": self.lambda_min,
                "witness": None if self.refutation_witness is None else self.refutation_witness.to_json(),
                "samples": self.samples, "seed": self.seed}


def _require_atomic_abelian(M: RepresentedAlgebra):
    if not M.is_abelian:
        raise ValueError("exact mode needs an atomic abelian algebra")


def _weights(M: RepresentedAlgebra, tau: TraceFunctional | None) -> np.ndarray:
    tau = vna.trace_functional(M) if tau is None else tau
    if tau.algebra is not M:
        raise ValueError("trace belongs to a different algebra")
    # tau(z_k) = w_k d_k and d_k = 1 on an abelian algebra
    return np.array([w * d for w, (d, _) in zip(tau.weights, M.block_form)])


def atom_pattern(a, M: RepresentedAlgebra, tol: float | None = None) -> np.ndarray:
    """pattern[y, x] = (z_y a z_x != 0): atom y lies under s_l(a z_x)."""
    _require_atomic_abelian(M)
    tol = M.tol if tol is None else tol
    a = np.asarray(a, dtype=np.complex128)
    zs = M.atoms()
    scale = max(la.operator_norm(a), 1.0)
    pat = np.zeros((len(zs), len(zs)), dtype=bool)
    for y, zy in enumerate(zs):
        left = zy @ a
        for x, zx in enumerate(zs):
            pat[y, x] = np.linalg.norm(left @ zx) > tol * scale
    return pat


def _atom_ratios(a, M, tau, tol):
    w = _weights(M, tau)
    pat = atom_pattern(a, M, tol)
    # column x of pat is s_l(a z_x); row x is s_l(a* z_x)
    fwd = (w @ pat) / w
    bwd = (pat @ w) / w
    return fwd, bwd


def lambda_min_projection_abelian(a, M: RepresentedAlgebra, tau: TraceFunctional | None = None,
                                  tol: float | None = None) -> float:
    """Least lambda in the projection form, from atoms."""
    fwd, bwd = _atom_ratios(a, M, tau, tol)
    return float(max(fwd.max(initial=0.0), bwd.max(initial=0.0)))


def brute_force_lambda_abelian(a, M: RepresentedAlgebra, tau: TraceFunctional | None = None,
                               tol: float | None = None) -> tuple[float, int, str]:
    """Least lambda by enumerating every nonzero projection of an abelian M.

    Returns (lambda, subset bitmask of the worst q, side).  Independent of
    the atom reduction: each subset's union of supports is recomputed.
    """
    w = _weights(M, tau)
    pat = atom_pattern(a, M, tol)
    r_fwd, m_fwd = kernels.subset_lambda(pat.astype(np.uint8), w)
    r_bwd, m_bwd = kernels.subset_lambda(np.ascontiguousarray(pat.T, dtype=np.uint8), w)
    if r_bwd > r_fwd:
        return float(r_bwd), int(m_bwd), "a*"
    return float(r_fwd), int(m_fwd), "a"


def projection_constrained_abelian(a, M: RepresentedAlgebra, tau: TraceFunctional | None = None,
                                   lam: float = 1.0, tol: float | None = None) -> ConstraintVerdict:
    fwd, bwd = _atom_ratios(a, M, tau, tol)
    lmin = float(max(fwd.max(initial=0.0), bwd.max(initial=0.0)))
    if lmin <= lam + SLACK:
        return ConstraintVerdict("exact", lam, "satisfied", satisfied_at_lambda=lam, lambda_min=lmin)
    side, ratios = ("a", fwd) if fwd.max() >= bwd.max() else ("a*", bwd)
    x = int(np.argmax(ratios))
    wit = Witness("projection", M.atoms()[x], float(ratios[x]), side, atom=x)
    return ConstraintVerdict("exact", lam, "refuted", refutation_witness=wit, lambda_min=lmin)


# ---------------------------------------------------------------- sampled routes

def projection_ratio(a, q, M: RepresentedAlgebra, tau: TraceFunctional, tol: float | None = None):
    """max over b in {a, a*} of tau(s_l(b q)) / tau(q), and the side attaining it."""
    tol = M.tol if tol is None else tol
    a = np.asarray(a, dtype=np.complex128)
    tq = tau(q, check=False).real
    if tq <= 0:
        raise ValueError("q must be a nonzero projection")
    best, side = 0.0, "a"
    for name, b in (("a", a), ("a*", la.adjoint(a))):
        s = vna.left_support(M, b @ q, tol, atol=tol * max(la.operator_norm(b), 1.0))
        r = tau(s, check=False).real / tq
        if r > best:
            best, side = r, name
    return best, side


def projection_constrained_sampled(a, M: RepresentedAlgebra, tau: TraceFunctional | None = None,
                                   lam: float = 1.0, samples: int = 1000, seed: int = 0,
                                   tol: float | None = None) -> ConstraintVerdict:
    """Refute with a sampled projection, else report an inconclusive pass.

    The canonical minimal projections are always tried first.
    """
    tau = vna.trace_functional(M) if tau is None else tau
    rng = np.random.default_rng(seed)
    qs = vna.minimal_projections(M) + vna.sample_projections(M, samples, rng)
    seen = 0.0
    for q in qs:
        r, side = projection_ratio(a, q, M, tau, tol)
        seen = max(seen, r)
        if r > lam + SLACK:
            return ConstraintVerdict("sampled", lam, "refuted", refutation_witness=Witness("projection", q, r, side),
                                     lambda_min=seen, samples=len(qs), seed=seed)
    return ConstraintVerdict("sampled", lam, "inconclusive", lambda_min=seen, samples=len(qs), seed=seed)


def vector_ratio(a, xi, M: RepresentedAlgebra, tau: TraceFunctional, tol: float | None = None):
    """max over b in {a, a*} of tau(s(b xi)) / tau(s(xi)), and the side attaining it."""
    tol = M.tol if tol is None else tol
    a = np.asarray(a, dtype=np.complex128)
    xi = np.asarray(xi, dtype=np.complex128).reshape(-1)
    nx = float(np.linalg.norm(xi))
    if nx == 0:
        raise ValueError("xi must be nonzero")
    den = tau(vna.support_vector(M, xi, tol), check=False).real
    best, side = 0.0, "a"
    for name, b in (("a", a), ("a*", la.adjoint(a))):
        s = vna.support_vector(M, b @ xi, tol, atol=tol * max(la.operator_norm(b), 1.0) * nx)
        r = tau(s, check=False).real / den
        if r > best:
            best, side = r, name
    return best, side


def sample_vectors(M: RepresentedAlgebra, count: int, rng: np.random.Generator) -> list[np.ndarray]:
    """Vectors with prescribed support ranks.

    In block k the ambient space is C^d (x) C^m and a vector is a d x m matrix
    c; its support is the projection onto the column space of c, so random
    matrices of every rank cover every support type.  Every fourth sample is
    a plain Gaussian vector.
    """
    vna._require_blocks(M)
    n = M.ambient_dim
    offs = vna._block_offsets(M)
    out = []
    for i in range(count):
        if i % 4 == 3:
            v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            out.append(v)
            continue
        c = np.zeros(n, dtype=np.complex128)
        while not np.any(c):
            for (d, m), off in zip(M.block_form, offs):
                r = int(rng.integers(0, min(d, m) + 1))
                if r == 0:
                    continue
                blk = ((rng.standard_normal((d, r)) + 1j * rng.standard_normal((d, r)))
                       @ (rng.standard_normal((r, m)) + 1j * rng.standard_normal((r, m))))
                c[off:off + d * m] = blk.reshape(-1)
        out.append(M.frame @ c)
    return out


def vector_constrained(a, M: RepresentedAlgebra, tau: TraceFunctional | None = None, lam: float = 1.0,
                       samples: int = 1000, seed: int = 0, tol: float | None = None) -> ConstraintVerdict:
    """Vector form; exact over atomic abelian algebras, where it is equivalent to the projection form."""
    tau = vna.trace_functional(M) if tau is None else tau
    if M.is_abelian:
        return projection_constrained_abelian(a, M, tau, lam, tol)
    rng = np.random.default_rng(seed)
    seen = 0.0
    for xi in sample_vectors(M, samples, rng):
        r, side = vector_ratio(a, xi, M, tau, tol)
        seen = max(seen, r)
        if r > lam + SLACK:
            return ConstraintVerdict("sampled", lam, "refuted", refutation_witness=Witness("vector", xi, r, side),
                                     lambda_min=seen, samples=samples, seed=seed)
    return ConstraintVerdict("sampled", lam, "inconclusive", lambda_min=seen, samples=samples, seed=seed)


# ---------------------------------------------------------------- V_{phi, psi}

def _check_atom_map(M, phi):
    zs = M.atoms()
    if len(phi) != len(zs):
        raise ValueError("need one projection per atom")
    return zs, [np.asarray(f, dtype=np.complex128) for f in phi]


def v_phi_psi_member(a, M: RepresentedAlgebra, phi: Sequence, psi: Sequence, tol: float | None = None) -> bool:
    """a in V_phi and a* in V_psi, checked on atoms."""
    _require_atomic_abelian(M)
    tol = M.tol if tol is None else tol
    a = np.asarray(a, dtype=np.complex128)
    zs, phi = _check_atom_map(M, phi)
    _, psi = _check_atom_map(M, psi)
    scale = max(la.operator_norm(a), 1.0)
    for z, f, g in zip(zs, phi, psi):
        if la.operator_norm(la.complement(f) @ a @ z) > tol * scale:
            return False
        if la.operator_norm(la.complement(g) @ la.adjoint(a) @ z) > tol * scale:
            return False
    return True


def v_phi_psi(M: RepresentedAlgebra, phi: Sequence, psi: Sequence) -> QuantumRelation:
    """The relation V_phi intersected with the adjoint of V_psi."""
    _require_atomic_abelian(M)
    zs, phi = _check_atom_map(M, phi)
    _, psi = _check_atom_map(M, psi)
    cons = [np.kron(la.complement(f), z.T) for f, z in zip(phi, zs)]
    # (1 - g) a* z = 0  <=>  z a (1 - g) = 0
    cons += [np.kron(z, la.complement(g).T) for g, z in zip(psi, zs)]
    return qrel.make_relation(M, la.nullspace_of_constraints(cons, M.ambient_dim, M.tol, atol=M.tol))


def support_map(a, M: RepresentedAlgebra, tol: float | None = None) -> list[np.ndarray]:
    """x -> s_l(a z_x) as an atom map."""
    _require_atomic_abelian(M)
    tol = M.tol if tol is None else tol
    a = np.asarray(a, dtype=np.complex128)
    atol = tol * max(la.operator_norm(a), 1.0)
    return [vna.left_support(M, a @ z, tol, atol=atol) for z in M.atoms()]


# ---------------------------------------------------------------- joint supports

def find_joint_support_vector(xis, M: RepresentedAlgebra, attempts: int = 20, seed: int = 0,
                              tol: float | None = None):
    """Real c with c_1 = 1 whose combination sum c_j xi_j has the joint support.

    The all-ones combination is tried first, then random draws.  Returns
    (c, vector, attempts used).  Refused for nonabelian M, where no such
    combination need exist.
    """
    if not M.is_abelian:
        raise Refused("joint support vectors need an abelian algebra")
    tol = M.tol if tol is None else tol
    xis = [np.asarray(x, dtype=np.complex128).reshape(-1) for x in xis]
    if not xis:
        raise ValueError("need at least one vector")
    target = la.join_of_projections([vna.support_vector(M, x, tol) for x in xis], tol, M.ambient_dim)
    rng = np.random.default_rng(seed)
    scale = max(float(np.linalg.norm(x)) for x in xis)
    for t in range(attempts):
        c = np.ones(len(xis)) if t == 0 else np.concatenate([[1.0], rng.uniform(-2, 2, len(xis) - 1)])
        v = np.tensordot(c, np.array(xis), axes=1)
        s = vna.support_vector(M, v, tol, atol=tol * scale)
        if la.operator_norm(s - target) < 1e-6:
            return c, v, t + 1
    raise RuntimeError(f"no joint support combination within {attempts} attempts")


# ---------------------------------------------------------------- standard form

def standard_form_full_matrix(n: int) -> RepresentedAlgebra:
    """M_n acting by left multiplication on n x n matrices (row-major vectorized)."""
    if n < 2:
        raise ValueError("n must be at least 2")
    return vna.algebra_from_blocks([(n, n)])


def transpose_operator(n: int) -> np.ndarray:
    """vec(c) -> vec(c^t) on the n x n matrices."""
    t = np.zeros((n * n, n * n), dtype=np.complex128)
    for i in range(n):
        for j in range(n):
            t[j * n + i, i * n + j] = 1.0
    return t


# ---------------------------------------------------------------- structures

def admissible_map(M: RepresentedAlgebra, tau: TraceFunctional | None, lam: float) -> list[np.ndarray]:
    """phi_lam(x) = join of atoms y with w_y <= lam w_x and w_x <= lam w_y."""
    _require_atomic_abelian(M)
    w = _weights(M, tau)
    zs = M.atoms()
    out = []
    for x in range(len(zs)):
        ys = [zs[y] for y in range(len(zs)) if w[y] <= lam * w[x] + SLACK and w[x] <= lam * w[y] + SLACK]
        out.append(sum(ys, np.zeros_like(zs[0])))
    return out


def suppexp_structure(M: RepresentedAlgebra, tau: TraceFunctional | None, lam_grid: Sequence[float],
                      max_depth: int | None = None) -> CoarseStructure:
    """Structure generated by V_{phi_lam, phi_lam} over the lambda grid."""
    _require_atomic_abelian(M)
    if not lam_grid:
        raise ValueError("lambda grid must be nonempty")
    gens = []
    for lam in lam_grid:
        if lam < 1:
            raise ValueError("lambda values below 1 exclude the identity")
        phi = admissible_map(M, tau, lam)
        gens.append(v_phi_psi(M, phi, phi))
    return build_ladder(gens, max_depth, algebra=M)
