"""Asymptotic-dimension style decompositions at a fixed entourage.

A decomposition for (R, n) is n + 1 families of projections whose joint
join is 1, where each family is R-disjoint and uniformly bounded by some
member B of the structure.  Finite spaces always have asymptotic dimension 0,
so the object of interest here is the per-entourage decomposition.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import coarse, kernels
from . import linalg as la
from . import qrel, vna
from .coarse import CoarseStructure
from .qrel import ClassicalRelation, ProjectionPair, QuantumRelation
from .vna import RepresentedAlgebra

MAX_SEARCH_POINTS = 24


@dataclass(frozen=True, eq=False)
class AsdimDecomposition:
    families: tuple
    entourage: QuantumRelation
    bound: QuantumRelation | None = None

    def __post_init__(self):
        if not self.families or any(len(f) == 0 for f in self.families):
            raise ValueError("families must be nonempty")
        M = self.entourage.algebra
        for fam in self.families:
            for p in fam:
                if not la.is_projection(p, 1e-8) or not M.contains(p, 1e-8):
                    raise ValueError("family members must be projections of M")


def atom_set_projection(M: RepresentedAlgebra, atoms) -> np.ndarray:
    zs = M.atoms()
    return sum((zs[i] for i in atoms), np.zeros((M.ambient_dim,) * 2, dtype=np.complex128))


def is_cover(families, M: RepresentedAlgebra, tol: float = 1e-9) -> bool:
    ps = [p for fam in families for p in fam]
    if not ps:
        return False
    j = la.join_of_projections(ps, tol, M.ambient_dim)
    return la.operator_norm(j - M.identity) < 1e-6


def is_R_disjoint(family, R: QuantumRelation) -> bool:
    for i, p in enumerate(family):
        for j, q in enumerate(family):
            if i != j and qrel.intrinsic_member(R, ProjectionPair(p, q, 1)):
                return False
    return True


@dataclass(frozen=True)
class BoundVerdict:
    ok: bool
    mode: str
    failing: int | None = None  # index of the first failing projection
    samples: int | None = None


def _under(M, p):
    return [i for i, z in enumerate(M.atoms()) if la.operator_norm(z @ p) > 0.5]


def is_uniformly_bounded(family, B: QuantumRelation, samples: int = 32, seed: int = 0) -> BoundVerdict:
    """diam(p) <= B for every p: all pairs of subprojections of p are B-related.

    Exact over atom pairs for abelian M.  Otherwise pairs of projections of
    the corner pMp are sampled; a miss refutes, no miss is inconclusive.
    """
    M = B.algebra
    if M.is_abelian:
        for k, p in enumerate(family):
            atoms = _under(M, p)
            for x in atoms:
                for y in atoms:
                    if not qrel.intrinsic_member(B, qrel.atom_pair(M, x, y)):
                        return BoundVerdict(False, "exact", k)
        return BoundVerdict(True, "exact")
    from .qura import corner_isometry
    rng = np.random.default_rng(seed)
    for k, p in enumerate(family):
        u = corner_isometry(p)
        corner = la.orthonormalize(np.einsum("ij,ajk,kl->ail", la.adjoint(u), M.algebra_basis.basis, u),
                                   M.tol, u.shape[1], atol=M.tol)
        C = vna.algebra_from_space(corner, seed)
        projs = [u @ q @ la.adjoint(u)
                 for q in vna.minimal_projections(C) + vna.sample_projections(C, samples, rng)]
        for r in projs:
            for s in projs:
                if not qrel.intrinsic_member(B, ProjectionPair(r, s, 1)):
                    return BoundVerdict(False, "sampled", k, samples)
    return BoundVerdict(True, "sampled", None, samples)


@dataclass(frozen=True)
class DecompositionVerdict:
    accepted: bool
    entourage_level: int | None
    cover: bool
    disjoint: tuple
    bounded: tuple
    bound_level: int | None
    certificate: str | None = None
    mode: str = "exact"

    def to_json(self) -> dict:
        return {"accepted": self.accepted, "mode": self.mode, "entourage_level": self.entourage_level,
                "cover": self.cover, "disjoint": list(self.disjoint), "bounded": list(self.bounded),
                "bound_level": self.bound_level, "certificate": self.certificate}


def check_decomposition(S: CoarseStructure, R: QuantumRelation, families,
                        B: QuantumRelation | None = None, samples: int = 32, seed: int = 0) -> DecompositionVerdict:
    """Cover, R-disjointness per family and a uniform bound from the ladder (or B)."""
    m = coarse.member_relation(S, R)
    if not m.yes:
        raise ValueError(f"entourage is not a member of the structure ({m})")
    M = S.algebra
    mode = "exact" if M.is_abelian else "sampled"
    cover = is_cover(families, M)
    disjoint = tuple(is_R_disjoint(f, R) for f in families)
    if B is not None:
        cands = [(None, B)]
    else:
        cands = list(enumerate(S.ladder))
    bounded, level = None, None
    for lvl, cand in cands:
        res = tuple(is_uniformly_bounded(f, cand, samples, seed).ok for f in families)
        if all(res):
            bounded, level = res, lvl
            break
        bounded = res
    cert = None
    if not cover:
        cert = "families do not cover"
    elif not all(disjoint):
        cert = f"family {disjoint.index(False)} is not R-disjoint"
    elif not all(bounded):
        cert = f"family {bounded.index(False)} is unbounded at every ladder level"
    return DecompositionVerdict(cert is None, m.level, cover, disjoint, bounded, level, cert, mode)


# ---------------------------------------------------------------- search

@dataclass(frozen=True)
class SearchResult:
    found: bool
    colors: tuple | None
    parts: tuple | None  # per family, tuple of atom-index tuples
    nodes: int

    def to_json(self) -> dict:
        return {"found": self.found, "exhausted": not self.found, "nodes": self.nodes,
                "parts": None if self.parts is None else [[list(p) for p in fam] for fam in self.parts]}


def _components(colors, adj):
    n = len(colors)
    fams: dict[int, list] = {}
    seen = [False] * n
    for s in range(n):
        if seen[s]:
            continue
        comp, stack = [], [s]
        seen[s] = True
        while stack:
            v = stack.pop()
            comp.append(v)
            for w in range(n):
                if not seen[w] and colors[w] == colors[s] and (adj[v, w] or adj[w, v]):
                    seen[w] = True
                    stack.append(w)
        fams.setdefault(int(colors[s]), []).append(tuple(sorted(comp)))
    return tuple(tuple(fams[c]) for c in sorted(fams))


def search_decomposition(dist, R, n: int, max_diam: float) -> SearchResult:
    """Color points with at most n + 1 colors so every R-component of a color has diameter <= max_diam.

    Parts of a family are the R-components of one color, so distinct parts
    are R-disjoint by construction.  The search is exhaustive: a miss is a
    certificate that no such coloring exists, with ``nodes`` visited.
    """
    d = coarse.check_metric(dist)
    N = d.shape[0]
    if N > MAX_SEARCH_POINTS:
        raise ValueError(f"search limited to {MAX_SEARCH_POINTS} points")
    adj = R.matrix() if isinstance(R, ClassicalRelation) else np.asarray(R, dtype=bool)
    adj = adj | adj.T
    np.fill_diagonal(adj, False)
    colors, nodes = kernels.color_search(adj.astype(np.uint8), d, n + 1, float(max_diam))
    if colors is None:
        return SearchResult(False, None, None, int(nodes))
    colors = tuple(int(c) for c in colors)
    return SearchResult(True, colors, _components(colors, adj), int(nodes))


def parts_to_families(M: RepresentedAlgebra, parts) -> list[list[np.ndarray]]:
    return [[atom_set_projection(M, p) for p in fam] for fam in parts]


def interval_decomposition(n_points: int, length: int) -> tuple:
    """Two families of alternating intervals of the given length on {0..n-1}."""
    blocks = [tuple(range(s, min(s + length, n_points))) for s in range(0, n_points, length)]
    return tuple(blocks[0::2]), tuple(blocks[1::2])


# ---------------------------------------------------------------- monotonicity harness

@dataclass(frozen=True)
class HarnessLine:
    radius: float
    source_found: bool
    pulled_back: DecompositionVerdict | None

    def to_json(self) -> dict:
        return {"radius": self.radius, "source_found": self.source_found,
                "verified": None if self.pulled_back is None else self.pulled_back.accepted,
                "bound_level": None if self.pulled_back is None else self.pulled_back.bound_level}


def pull_back_families(f, ny: int, parts) -> list[list[np.ndarray]]:
    """Images phi_f(p) of atom-set projections p of l-infinity(Y) in l-infinity(X)."""
    from .morph import from_classical_function
    phi = from_classical_function(f, ny)
    MY = phi.source
    out = []
    for fam in parts:
        imgs = [phi(atom_set_projection(MY, p)) for p in fam]
        imgs = [q for q in imgs if la.operator_norm(q) > 0.5]
        out.append(imgs)
    return [fam for fam in out if fam]


def monotonicity_harness(f, dist_y, S_x: CoarseStructure, radii, n: int, max_diam: float,
                         parts_by_radius: dict | None = None) -> list[HarnessLine]:
    """Pull decompositions of Y back along f: X -> Y and re-verify them on X.

    For each radius r the decomposition of Y for the band d_Y <= r is searched
    (or taken from ``parts_by_radius``); its preimages are checked on X with
    entourage (f x f)^{-1}(band r), which lies in S_x when f is expanding.
    """
    from .morph import classical_preimage
    dy = coarse.check_metric(dist_y)
    ny = dy.shape[0]
    MX = S_x.algebra
    out = []
    for r in radii:
        band = coarse.band_relation(dy, r)
        if parts_by_radius is not None and r in parts_by_radius:
            parts = parts_by_radius[r]
        else:
            res = search_decomposition(dy, band, n, max_diam)
            if not res.found:
                out.append(HarnessLine(r, False, None))
                continue
            parts = res.parts
        Q = qrel.relation_to_subspace(classical_preimage(f, band), MX)
        fams = pull_back_families(f, ny, parts)
        out.append(HarnessLine(r, True, check_decomposition(S_x, Q, fams)))
    return out


def random_expanding_map(m: int, ny: int, rng: np.random.Generator) -> tuple:
    """Nondecreasing f: {0..m-1} -> {0..ny-1}, steps in {0, 1, 2}, no two zero steps in a row."""
    for _ in range(1000):
        f, prev_zero = [int(rng.integers(0, 3))], False
        for _ in range(m - 1):
            step = int(rng.integers(1 if prev_zero else 0, 3))
            prev_zero = step == 0
            f.append(f[-1] + step)
        if f[-1] < ny:
            return tuple(f)
    raise RuntimeError("could not fit a map into the codomain")
