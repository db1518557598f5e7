"""Acceptance battery: one test per criterion, each checked against an independent oracle.

Run under pytest (a PASS/FAIL line per criterion is printed in the terminal
summary) or directly with ``python tests/test_acceptance.py``.
"""
import sys

import numpy as np
import pytest

from qroe import asydim, coarse, kernels, morph, qrel, qura, suppexp, vna
from qroe import linalg as la
from qroe.qrel import ClassicalRelation

TOL = 1e-9


def criterion(key):
    def deco(fn):
        fn = pytest.mark.acceptance(fn)

        def wrapped(record_property):
            record_property("criterion", key)
            fn()

        wrapped.__name__ = fn.__name__
        wrapped.__doc__ = fn.__doc__
        wrapped.criterion = key
        wrapped.body = fn
        return wrapped
    return deco


# ---------------------------------------------------------------- oracles

def set_compose(E, F):
    return {(x, y) for (x, z) in E for (z2, y) in F if z == z2}


def random_pairs(n, rng, density):
    return {(x, y) for x in range(n) for y in range(n) if rng.random() < density}


def relation_battery(count=200, seed=1):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        n = int(rng.integers(2, 7))
        out.append((n, random_pairs(n, rng, rng.uniform(0.1, 0.7))))
    return out


def conjugated_multiplicity_free(blocks, rng):
    n = sum(blocks)
    M0 = vna.algebra_from_blocks([(d, 1) for d in blocks])
    u = la.haar_unitary(n, rng)
    gens = [u @ b @ u.conj().T for b in M0.algebra_basis.basis]
    return vna.algebra_from_generators(gens, n, seed=int(rng.integers(1 << 30))), u


def random_blocks(rng, max_n=5):
    while True:
        blocks = [int(rng.integers(1, 3)) for _ in range(int(rng.integers(1, 4)))]
        if sum(blocks) <= max_n:
            return blocks


# ---------------------------------------------------------------- criteria

@criterion("1 classical bridge exactness")
def test_criterion_01_classical_bridge():
    rng = np.random.default_rng(2)
    for n, pairs in relation_battery():
        M = vna.diagonal_algebra(n, TOL)
        E = ClassicalRelation(n, frozenset(pairs))
        V = qrel.relation_to_subspace(E, M)
        assert V.dim == len(pairs)
        assert set(qrel.subspace_to_relation(V, TOL).pairs) == pairs
        # a bimodule built from generic operators with the same support pattern
        mats = []
        for (x, y) in pairs:
            a = np.zeros((n, n), dtype=complex)
            a[x, y] = rng.standard_normal() + 1j * rng.standard_normal()
            mats.append(a)
        mixed = [sum(rng.standard_normal() * m for m in mats)] if mats else []
        W = qrel.bimodule_closure(M, mixed, TOL) if mats else qrel.zero_relation(M)
        back = qrel.relation_to_subspace(qrel.subspace_to_relation(W, TOL), M)
        assert la.subspace_equal(back.space, W.space, TOL)


@criterion("2 intrinsic-operation dictionary")
def test_criterion_02_operation_dictionary():
    bat = relation_battery()
    for (n, P), (_, Q) in zip(bat, bat[1:] + bat[:1]):
        Q = {(x % n, y % n) for x, y in Q}
        M = vna.diagonal_algebra(n, TOL)
        VE = qrel.relation_to_subspace(ClassicalRelation(n, frozenset(P)), M)
        VF = qrel.relation_to_subspace(ClassicalRelation(n, frozenset(Q)), M)
        assert set(qrel.subspace_to_relation(qrel.v_sum(VE, VF), TOL).pairs) == P | Q
        assert set(qrel.subspace_to_relation(qrel.v_adjoint(VE), TOL).pairs) == {(y, x) for x, y in P}
        prod = qrel.v_product_span(VE, VF)
        assert set(qrel.subspace_to_relation(prod, TOL).pairs) == set_compose(P, Q)
        # intrinsic route: atom pairs linked by the product relation
        linked = {(x, y) for x in range(n) for y in range(n)
                  if qrel.intrinsic_member(prod, qrel.atom_pair(M, x, y))}
        assert linked == set_compose(P, Q)


@criterion("3 finite-dimensional characterization")
def test_criterion_03_characterization():
    rng = np.random.default_rng(3)
    for _ in range(50):
        blocks = random_blocks(rng)
        M, _ = conjugated_multiplicity_free(blocks, rng)
        n = M.ambient_dim
        zs = M.minimal_central_projections
        gens = list(zs)
        for _ in range(int(rng.integers(0, 3))):
            i, j = rng.integers(0, len(zs), 2)
            x = la.random_operator(n, rng)
            if rng.random() < 0.5:
                v = la.random_operator(n, rng)[:, :1]
                x = v @ v.conj().T
            gens.append(zs[i] @ x @ zs[j])
        A = vna.algebra_from_generators(gens, n)
        for c in M.commutant_basis.basis:
            assert A.contains(c, TOL)
        R = qura.assemble_roe(qura.structure_for_algebra(M, A))
        assert R.dim == A.dim
        assert la.subspace_le(R.algebra_space, A.algebra_basis, TOL)
        assert la.subspace_le(A.algebra_basis, R.algebra_space, TOL)
    refused = 0
    while refused < 50:
        blocks = random_blocks(rng)
        if len(blocks) < 2:
            continue
        M, _ = conjugated_multiplicity_free(blocks, rng)
        h = la.random_operator(M.ambient_dim, rng)
        A = vna.algebra_from_generators([h + h.conj().T], M.ambient_dim)
        with pytest.raises(qura.Refused) as info:
            qura.structure_for_algebra(M, A)
        cert = info.value.certificate
        assert M.in_commutant(cert, 1e-8) and not A.contains(cert, 1e-6)
        refused += 1


def structure_battery(seed=4):
    rng = np.random.default_rng(seed)
    out = []
    for n, P in relation_battery(40, seed):
        out.append(coarse.classical_structure(n, [ClassicalRelation(n, frozenset(P))]))
    for _ in range(10):
        M, _ = conjugated_multiplicity_free(random_blocks(rng), rng)
        x = la.random_operator(M.ambient_dim, rng)
        out.append(coarse.build_ladder([qrel.bimodule_closure(M, [x])], algebra=M))
        out.append(qura.minimal_structure(M))
    for blocks in ([(2, 2)], [(1, 2), (2, 1)], [(1, 1), (1, 3)]):
        M = vna.algebra_from_blocks(blocks)
        out.append(qura.minimal_structure(M))
        x = la.random_operator(M.ambient_dim, rng)
        out.append(coarse.build_ladder([qrel.bimodule_closure(M, [M.minimal_central_projections[0] @ x])],
                                       algebra=M))
    return out


@criterion("4 minimality of the commutant")
def test_criterion_04_minimality():
    for S in structure_battery():
        R = qura.assemble_roe(S)
        assert la.subspace_le(S.algebra.commutant_basis, R.algebra_space, TOL)


def _left_support_oracle_std(b, q):
    """Smallest P (x) 1 fixing the range of b q on 2 x 2 matrices: the join of column spaces."""
    u, s, _ = np.linalg.svd(b @ q)
    cols = []
    for k in range(int(np.sum(s > 1e-12))):
        cols.append(u[:, k].reshape(2, 2))
    if not cols:
        return 0
    return np.linalg.matrix_rank(np.concatenate(cols, axis=1), tol=1e-10)


@criterion("5 transpose example numbers")
def test_criterion_05_transpose_example():
    M = suppexp.standard_form_full_matrix(2)
    tau = vna.trace_functional(M)
    T = suppexp.transpose_operator(2)
    assert M.ambient_dim == 4 and M.dim == 4 and M.commutant_basis.dim == 4
    v1 = suppexp.projection_constrained_sampled(T, M, tau, 1.0, 100, seed=0)
    e11 = vna.block_embed(M, 0, la.matrix_unit(2, 0, 0))
    assert v1.refuted and np.allclose(v1.refutation_witness.value, e11)
    assert abs(v1.refutation_witness.ratio - 2.0) < TOL
    assert _left_support_oracle_std(T, e11) == 2
    v2 = suppexp.projection_constrained_sampled(T, M, tau, 2.0, 10_000, seed=1)
    assert not v2.refuted and v2.inconclusive and v2.samples >= 10_000
    vv = suppexp.vector_constrained(T, M, tau, 1.0, 10_000, seed=2)
    assert not vv.refuted and vv.samples >= 10_000
    assert vv.lambda_min <= 1 + TOL


def _diag_vector_ratios(a, w, xis):
    """Classical oracle: supports of vectors over weighted points."""
    sup = np.abs(xis) > 1e-12
    out = np.zeros(len(xis))
    den = sup.astype(float) @ w
    for b in (a, a.conj().T):
        img = np.abs(xis @ b.T) > 1e-9
        out = np.maximum(out, (img.astype(float) @ w) / den)
    return out


@criterion("6 abelian equivalence")
def test_criterion_06_abelian_equivalence():
    rng = np.random.default_rng(6)
    for _ in range(100):
        n = int(rng.integers(1, 11))
        M = vna.diagonal_algebra(n)
        w = rng.uniform(0.2, 5.0, n)
        tau = vna.trace_functional(M, w)
        a = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) * (rng.random((n, n)) < 0.35)
        lam_atoms = suppexp.lambda_min_projection_abelian(a, M, tau)
        pat = (np.abs(a) > 1e-12).astype(np.uint8)
        brute = max(kernels.subset_lambda(pat, w)[0], kernels.subset_lambda(np.ascontiguousarray(pat.T), w)[0])
        assert abs(lam_atoms - brute) <= TOL
        xis = rng.standard_normal((10_000, n)) * (rng.random((10_000, n)) < 0.5)
        xis[~np.any(xis != 0, axis=1), 0] = 1.0
        assert np.max(_diag_vector_ratios(a, w, xis)) <= lam_atoms + TOL
        for xi in xis[:5]:
            r, _ = suppexp.vector_ratio(a, xi, M, tau)
            assert r <= lam_atoms + TOL


@criterion("7 *-algebra laws of constrained operators")
def test_criterion_07_algebra_laws():
    rng = np.random.default_rng(7)
    for _ in range(200):
        n = int(rng.integers(1, 8))
        M = vna.diagonal_algebra(n)
        tau = vna.trace_functional(M, rng.uniform(0.2, 5.0, n))
        a, b = ((rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) * (rng.random((n, n)) < 0.4)
                for _ in range(2))
        la_, lb = (suppexp.lambda_min_projection_abelian(x, M, tau) for x in (a, b))
        assert suppexp.lambda_min_projection_abelian(a + b, M, tau) <= la_ + lb + TOL
        assert suppexp.lambda_min_projection_abelian(a @ b, M, tau) <= la_ * lb + TOL


BLOCK_BATTERY = ([(2, 1)], [(2, 2)], [(1, 1), (2, 1)], [(2, 1), (1, 2)], [(3, 1)], [(1, 2), (1, 1)])


@criterion("8 algebra elements are 1-constrained")
def test_criterion_08_one_constrained():
    rng = np.random.default_rng(8)
    for blocks in BLOCK_BATTERY:
        M0 = vna.algebra_from_blocks(blocks)
        u = la.haar_unitary(M0.ambient_dim, rng)
        M = vna.algebra_from_generators([u @ b @ u.conj().T for b in M0.algebra_basis.basis], M0.ambient_dim)
        tau = vna.trace_functional(M, rng.uniform(0.5, 2.0, len(M.block_form)))
        for k, a in enumerate(M.algebra_basis.basis):
            v = suppexp.projection_constrained_sampled(a, M, tau, 1.0, 1000, seed=k)
            assert not v.refuted, (blocks, k, v.refutation_witness)
            assert v.samples >= 1000


def _structure_from_relations(n, rels):
    return coarse.classical_structure(n, [ClassicalRelation(n, frozenset(r)) for r in rels])


@criterion("9 embedding and isomorphism")
def test_criterion_09_embeddings():
    rng = np.random.default_rng(9)
    for _ in range(50):
        n = int(rng.integers(2, 7))
        P = random_pairs(n, rng, 0.3)
        perm = rng.permutation(n)
        SX = _structure_from_relations(n, [P])
        SY = _structure_from_relations(n, [{(perm[x], perm[y]) for x, y in P}])
        u = np.zeros((n, n))
        u[perm, np.arange(n)] = 1.0
        phi = morph.SpatialHom(vna.diagonal_algebra(n), vna.diagonal_algebra(n), np.eye(n), u)
        assert phi.check_hom()
        RX, RY = qura.assemble_roe(SX), qura.assemble_roe(SY)
        emb = morph.embed_roe(phi, RX, RY)
        assert emb.ok and la.subspace_equal(emb.image, RY.algebra_space, TOL)
    for _ in range(50):
        n = int(rng.integers(3, 7))
        P = random_pairs(n, rng, 0.3)
        S = _structure_from_relations(n, [P])
        k = int(rng.integers(1, n))
        sub = sorted(rng.choice(n, size=k, replace=False).tolist())
        top = S.top.basis
        top_pairs = {(x, y) for x in range(n) for y in range(n) if np.max(np.abs(top[:, x, y])) > TOL}
        restricted = {(sub.index(x), sub.index(y)) for x, y in top_pairs if x in sub and y in sub}
        Ssub = _structure_from_relations(k, [restricted])
        phi = morph.spatial_from_injection(sub, n)
        R, Rsub = qura.assemble_roe(S), qura.assemble_roe(Ssub)
        emb = morph.embed_roe(phi, Rsub, R)
        assert emb.ok
        assert morph.hereditary_image_check(emb, phi.r, R)
        # independent corner: span of e_xy over top pairs inside the subspace
        corner = {(x, y) for x, y in top_pairs if x in sub and y in sub}
        assert emb.image.dim == len(corner)


@criterion("10 morphism dictionary")
def test_criterion_10_morphism_dictionary():
    rng = np.random.default_rng(10)
    spaces = []
    for _ in range(12):
        n = int(rng.integers(1, 7))
        rels = [random_pairs(n, rng, rng.uniform(0.05, 0.4))]
        E = ClassicalRelation(n, frozenset(rels[0]))
        spaces.append((n, coarse.classical_space(n, [E]), coarse.classical_structure(n, [E])))
    agree = {"coarse": [0, 0], "expanding": [0, 0]}
    for _ in range(200):
        (nx, X, QX), (ny, Y, QY) = (spaces[i] for i in rng.integers(0, len(spaces), 2))
        f = tuple(int(y) for y in rng.integers(0, ny, nx))
        phi = morph.from_classical_function(f, ny)
        c_cls = morph.is_coarse_classical(f, X, Y)
        c_q = morph.is_coarse(phi, QX, QY)
        e_cls = morph.is_expanding_classical(f, X, Y)
        e_q = morph.is_expanding(phi, QX, QY)
        assert c_q.mode == "exact" and c_q.status in ("yes", "no")
        assert (c_q.status == "yes") == c_cls, f
        assert (e_q.status == "yes") == e_cls, f
        agree["coarse"][c_cls] += 1
        agree["expanding"][e_cls] += 1
    # the battery exercises both outcomes of both checkers
    assert all(min(v) > 0 for v in agree.values()), agree


@criterion("11 asymptotic-dimension harness")
def test_criterion_11_asydim_harness():
    rng = np.random.default_rng(11)
    N = 20
    d = coarse.path_distances(N)
    S = coarse.classical_structure(N, [coarse.path_graph_relation(N)])
    M = S.algebra
    parts = asydim.interval_decomposition(N, 5)
    for r in (1, 2, 3):
        band = coarse.band_relation(d, r)
        R = qrel.relation_to_subspace(band, M)
        v = asydim.check_decomposition(S, R, asydim.parts_to_families(M, parts))
        assert v.accepted, v
        ex = asydim.search_decomposition(d, band, 0, 2 * r - 1)
        assert not ex.found and ex.nodes > 0
    for _ in range(20):
        m = int(rng.integers(5, 11))
        f = asydim.random_expanding_map(m, N, rng)
        X = coarse.classical_space(m, [coarse.path_graph_relation(m)])
        Y = coarse.classical_space(N, [coarse.path_graph_relation(N)])
        assert morph.is_coarse_classical(f, X, Y) and morph.is_expanding_classical(f, X, Y)
        Sx = coarse.classical_structure(m, [coarse.path_graph_relation(m)])
        lines = asydim.monotonicity_harness(f, d, Sx, (1, 2, 3), 1, 4, {r: parts for r in (1, 2, 3)})
        assert all(line.source_found and line.pulled_back.accepted for line in lines), f


@criterion("12 ghost block lemma")
def test_criterion_12_ghost_blocks():
    rng = np.random.default_rng(12)
    for _ in range(1000):
        sizes = [int(s) for s in rng.integers(1, 11, int(rng.integers(1, 4)))]
        p = qura.make_ghost_projection(sizes)
        q = qura.perturbed_projection(p, 0.1, rng)
        assert la.operator_norm(q - p) < 0.1
        assert qura.check_block_offdiagonal(q, p, 0.1, sizes)


def _atom_support(M, v):
    return {k for k, z in enumerate(M.minimal_central_projections) if np.linalg.norm(z @ v) > 1e-9}


@criterion("13 joint support vectors")
def test_criterion_13_joint_support():
    rng = np.random.default_rng(13)
    for i in range(500):
        if i % 2:
            n = int(rng.integers(1, 9))
            M = vna.diagonal_algebra(n)
        else:
            mult = [int(m) for m in rng.integers(1, 3, int(rng.integers(1, 5)))]
            M = vna.algebra_from_blocks([(1, m) for m in mult])
            n = M.ambient_dim
        m = int(rng.integers(1, 7))
        xis = []
        for _ in range(m):
            v = rng.integers(-2, 3, n).astype(float)
            if not v.any():
                v[int(rng.integers(n))] = 1.0
            xis.append(v)
        c, vec, used = suppexp.find_joint_support_vector(xis, M, seed=i)
        assert used <= 20 and c[0] == 1.0
        assert np.allclose(vec, sum(ci * x for ci, x in zip(c, xis)))
        assert _atom_support(M, vec) == set().union(*(_atom_support(M, x) for x in xis))


ALL = [test_criterion_01_classical_bridge, test_criterion_02_operation_dictionary,
       test_criterion_03_characterization, test_criterion_04_minimality, test_criterion_05_transpose_example,
       test_criterion_06_abelian_equivalence, test_criterion_07_algebra_laws, test_criterion_08_one_constrained,
       test_criterion_09_embeddings, test_criterion_10_morphism_dictionary, test_criterion_11_asydim_harness,
       test_criterion_12_ghost_blocks, test_criterion_13_joint_support]


def main():
    failed = 0
    for t in ALL:
        try:
            t.body()
            print(f"PASS  criterion {t.criterion}")
        except Exception as exc:  # report and continue
            failed += 1
            print(f"FAIL  criterion {t.criterion}: {type(exc).__name__}: {exc}")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
