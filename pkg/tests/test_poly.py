import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chiralent import poly


def test_newton_identities_small_case():
    lam = np.array([0.5, 0.3, 0.2])
    p = np.array([np.sum(lam ** k) for k in range(1, 4)])
    e = poly.elementary_from_power_sums(p)
    assert np.allclose(e, [1.0, 1.0, 0.5 * 0.3 + 0.5 * 0.2 + 0.3 * 0.2, 0.5 * 0.3 * 0.2])
    assert np.allclose(poly.power_sums_from_elementary(e, 6), [np.sum(lam ** k) for k in range(1, 7)])


def test_charpoly_matches_numpy_poly():
    lam = np.array([0.4, 0.35, 0.25, -0.1])
    p = np.array([np.sum(lam ** k) for k in range(1, 5)])
    c = poly.charpoly_from_elementary(poly.elementary_from_power_sums(p))
    assert np.allclose(c, np.poly(lam))


def test_durand_kerner_simple_and_complex_roots():
    roots = poly.durand_kerner([1, 0, 1])
    assert np.allclose(np.sort_complex(roots), [-1j, 1j])
    assert poly.durand_kerner([2.0, -4.0]) == pytest.approx([2.0])
    assert poly.durand_kerner([3.0]).size == 0


def test_cluster_roots_merges_double_root():
    r = poly.durand_kerner(np.poly([0.25, 0.25, 0.5, 0.0]))
    c = np.sort(poly.cluster_roots(r).real)
    assert np.allclose(c, [0.0, 0.25, 0.25, 0.5], atol=1e-10)


def test_cluster_roots_leaves_distinct_roots():
    r = np.array([0.1, 0.2, 0.3])
    assert np.array_equal(poly.cluster_roots(r), r)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-1.0, 1.0), min_size=2, max_size=7))
def test_power_sum_round_trip(lam):
    lam = np.array(lam)
    n = lam.size
    p = np.array([np.sum(lam ** k) for k in range(1, n + 1)])
    e = poly.elementary_from_power_sums(p)
    assert np.allclose(poly.power_sums_from_elementary(e, n), p, atol=1e-10)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-1.0, 1.0), min_size=2, max_size=6, unique=True))
def test_durand_kerner_recovers_separated_roots(lam):
    lam = np.sort(np.array(lam))
    if np.min(np.diff(lam)) < 1e-2:
        return
    roots = np.sort(poly.durand_kerner(np.poly(lam)).real)
    assert np.allclose(roots, lam, atol=1e-8)
