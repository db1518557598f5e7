import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qroe import asydim, coarse, qrel, vna
from qroe.qrel import ClassicalRelation


def coloring_ok(dist, adj, colors, max_diam):
    """Independent check of a coloring: same-colored R-components have small diameter."""
    n = len(colors)
    seen = set()
    for s in range(n):
        if s in seen:
            continue
        comp, frontier = {s}, [s]
        while frontier:
            v = frontier.pop()
            for w in range(n):
                if w not in comp and colors[w] == colors[s] and (adj[v, w] or adj[w, v]):
                    comp.add(w)
                    frontier.append(w)
        seen |= comp
        if max(dist[a, b] for a in comp for b in comp) > max_diam:
            return False
    return True


@given(st.integers(2, 12), st.integers(1, 3), st.integers(1, 6))
def test_search_results_are_valid_colorings(n, r, diam):
    d = coarse.path_distances(n)
    band = coarse.band_relation(d, r)
    res = asydim.search_decomposition(d, band, 1, diam)
    adj = band.matrix()
    if res.found:
        assert coloring_ok(d, adj, res.colors, diam)
        assert max(res.colors) <= 1
    else:
        # exhaustive check over all 2-colorings for small n
        if n <= 10:
            for mask in range(1 << n):
                colors = [(mask >> i) & 1 for i in range(n)]
                assert not coloring_ok(d, adj, colors, diam)


def test_single_color_needs_whole_diameter():
    d = coarse.path_distances(6)
    band = coarse.band_relation(d, 1)
    assert asydim.search_decomposition(d, band, 0, 5).found
    res = asydim.search_decomposition(d, band, 0, 4)
    assert not res.found and res.to_json()["exhausted"]


def test_search_size_limit():
    n = asydim.MAX_SEARCH_POINTS + 1
    d = coarse.path_distances(n)
    with pytest.raises(ValueError):
        asydim.search_decomposition(d, coarse.band_relation(d, 1), 1, 3)


def test_interval_decomposition():
    parts = asydim.interval_decomposition(12, 5)
    assert parts == (((0, 1, 2, 3, 4), (10, 11)), ((5, 6, 7, 8, 9),))


def interval_setup(n=12, r=2):
    d = coarse.path_distances(n)
    S = coarse.classical_structure(n, [coarse.path_graph_relation(n)])
    R = qrel.relation_to_subspace(coarse.band_relation(d, r), S.algebra)
    return d, S, R


def test_interval_decomposition_accepted():
    d, S, R = interval_setup()
    fams = asydim.parts_to_families(S.algebra, asydim.interval_decomposition(12, 5))
    v = asydim.check_decomposition(S, R, fams)
    assert v.accepted and v.bound_level is not None and v.mode == "exact"
    assert v.to_json()["certificate"] is None


def test_too_short_intervals_are_not_disjoint():
    d, S, R = interval_setup(r=3)
    fams = asydim.parts_to_families(S.algebra, asydim.interval_decomposition(12, 2))
    v = asydim.check_decomposition(S, R, fams)
    assert not v.accepted and not all(v.disjoint)


def test_missing_point_is_not_a_cover():
    d, S, R = interval_setup()
    M = S.algebra
    fams = [[asydim.atom_set_projection(M, range(11))]]
    v = asydim.check_decomposition(S, R, fams)
    assert not v.cover and v.certificate == "families do not cover"


def test_explicit_bound_too_small():
    d, S, R = interval_setup()
    M = S.algebra
    B = qrel.relation_to_subspace(coarse.band_relation(d, 1), M)
    fams = asydim.parts_to_families(M, asydim.interval_decomposition(12, 5))
    v = asydim.check_decomposition(S, R, fams, B=B)
    assert not v.accepted and not all(v.bounded)


def test_entourage_outside_structure():
    E = ClassicalRelation(4, frozenset({(0, 1)}))
    S = coarse.classical_structure(4, [E])
    R = qrel.relation_to_subspace(ClassicalRelation(4, frozenset({(0, 3)})), S.algebra)
    with pytest.raises(ValueError):
        asydim.check_decomposition(S, R, [[np.eye(4)]])


def test_sampled_bound_over_nonabelian():
    M = vna.full_algebra(2)
    # scalars do not link orthogonal rank-one projections under 1
    v = asydim.is_uniformly_bounded([np.eye(2)], qrel.diagonal_relation(M), samples=4)
    assert v.mode == "sampled" and not v.ok and v.failing == 0
    assert asydim.is_uniformly_bounded([np.eye(2)], qrel.full_relation(M), samples=4).ok


def test_decomposition_rejects_non_projections():
    M = vna.diagonal_algebra(2)
    with pytest.raises(ValueError):
        asydim.AsdimDecomposition(((np.ones((2, 2)),),), qrel.full_relation(M))


@given(st.integers(0, 2**31 - 1), st.integers(2, 10))
def test_random_expanding_maps_are_expanding(seed, m):
    rng = np.random.default_rng(seed)
    f = asydim.random_expanding_map(m, 20, rng)
    assert all(b - a in (0, 1, 2) for a, b in zip(f, f[1:]))
    assert not any(a == b == c for a, b, c in zip(f, f[1:], f[2:]))
    assert max(f) < 20


def test_monotonicity_harness_with_search():
    n = 12
    d = coarse.path_distances(n)
    f = (0, 1, 1, 3, 5, 6)
    Sx = coarse.classical_structure(len(f), [coarse.path_graph_relation(len(f))])
    lines = asydim.monotonicity_harness(f, d, Sx, [1, 2], 1, 4)
    assert all(line.source_found and line.pulled_back.accepted for line in lines)
    lines = asydim.monotonicity_harness(f, d, Sx, [1], 0, 2)
    assert not lines[0].source_found and lines[0].to_json()["verified"] is None
