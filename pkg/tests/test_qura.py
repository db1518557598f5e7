import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qroe import coarse, qura, vna
from qroe import linalg as la
from qroe.qrel import ClassicalRelation


def roe_dim_oracle(n, E):
    """Classical Roe algebra of a finite space: span of e_xy over the generated equivalence."""
    return int(coarse.generated_equivalence(n, [E]).sum())


@given(st.integers(1, 5), st.data())
def test_classical_roe_dimension(n, data):
    pairs = data.draw(st.frozensets(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=5))
    E = ClassicalRelation(n, pairs)
    R = qura.assemble_roe(coarse.classical_structure(n, [E]))
    assert R.dim == roe_dim_oracle(n, E)
    assert la.subspace_le(R.structure.algebra.commutant_basis, R.algebra_space)


def test_path_roe_is_full_and_connected():
    R = qura.assemble_roe(coarse.classical_structure(4, [coarse.path_graph_relation(4)]))
    assert R.dim == 16 and qura.is_connected(R)
    t = qura.classify_triviality(R)
    assert t.case == "1" and t.connected


def test_disconnected_roe_has_commuting_projection():
    E = ClassicalRelation(4, frozenset({(0, 1), (2, 3)}))
    R = qura.assemble_roe(coarse.classical_structure(4, [E]))
    assert R.dim == 8 and not qura.is_connected(R)
    p = qura.nontrivial_commuting_projection(R)
    assert p is not None and la.is_projection(p, 1e-8)
    assert 0.5 < np.trace(p).real < 3.5
    assert qura.classify_triviality(R).case == "5"


def test_split_by_projection_into_components():
    E = ClassicalRelation(4, frozenset({(0, 1), (2, 3)}))
    S = coarse.classical_structure(4, [E])
    A, B = qura.split_by_projection(S, np.diag([1.0, 1.0, 0.0, 0.0]))
    assert A.algebra.ambient_dim == 2 and B.algebra.ambient_dim == 2
    assert qura.assemble_roe(A).dim == 4


def test_corner_isometry():
    p = np.diag([1.0, 0.0, 1.0])
    u = qura.corner_isometry(p)
    assert u.shape == (3, 2) and np.allclose(u @ u.conj().T, p)


def test_minimal_structure_gives_commutant():
    M = vna.algebra_from_blocks([(2, 1), (1, 2)])
    R = qura.assemble_roe(qura.minimal_structure(M))
    assert la.subspace_equal(R.algebra_space, M.commutant_basis)


def test_direct_summands_count():
    M = vna.algebra_from_blocks([(1, 1), (1, 2)])
    sums = qura.direct_summands(M)
    assert len(sums) == 4
    assert sorted(V.dim for V in sums) == [0, 1, 4, 5]


def test_structure_for_algebra_roundtrip():
    M = vna.diagonal_algebra(3)
    e = la.matrix_unit
    A = vna.algebra_from_generators([e(3, 0, 0), e(3, 1, 1), e(3, 0, 1) + e(3, 1, 0)], 3)
    R = qura.assemble_roe(qura.structure_for_algebra(M, A))
    assert R.dim == 5 and la.subspace_equal(R.algebra_space, A.algebra_basis)


def test_structure_for_algebra_refuses_with_certificate():
    M = vna.diagonal_algebra(3)
    A = vna.algebra_from_generators([np.ones((3, 3))], 3)
    with pytest.raises(qura.Refused) as info:
        qura.structure_for_algebra(M, A)
    c = info.value.certificate
    assert M.in_commutant(c) and not A.contains(c, 1e-6)


def test_structure_for_algebra_needs_multiplicity_free():
    M = vna.algebra_from_blocks([(1, 2)])
    with pytest.raises(ValueError):
        qura.structure_for_algebra(M, vna.full_algebra(2))


def test_ghost_projection_shape():
    p = qura.make_ghost_projection([1, 2, 3])
    assert la.is_projection(p) and np.isclose(np.trace(p).real, 3)
    assert np.isclose(p[1, 2], 0.5)


@given(st.lists(st.integers(1, 6), min_size=1, max_size=3), st.integers(0, 2**31 - 1))
def test_perturbed_projection_stays_close(sizes, seed):
    rng = np.random.default_rng(seed)
    p = qura.make_ghost_projection(sizes)
    q = qura.perturbed_projection(p, 0.1, rng)
    assert la.is_projection(q, 1e-8) and la.operator_norm(q - p) < 0.1
    assert qura.check_block_offdiagonal(q, p, 0.1)


def test_block_offdiagonal_precondition_and_diagonal_block():
    p = qura.make_ghost_projection([2])
    with pytest.raises(qura.PreconditionError):
        qura.check_block_offdiagonal(np.eye(2), p, 0.1)
    # a diagonal projection near p cannot exist; the lemma bound is 1 - 1/n
    q = np.diag([1.0, 0.0])
    assert la.operator_norm(q - p) >= 0.5 - 1e-12
