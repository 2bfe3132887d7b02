import numpy as np
import pytest
from hypothesis import given, strategies as st

from magicfree.matops import ket_to_dm
from magicfree.phase_space import (PhasePoint, PhasePointBasis, WignerRows, channel_wigner,
                                   check_odd_prime, is_prime, points_grid, reconstruct,
                                   single_site_operators, triple_product_phase,
                                   triple_product_table, weyl_operator, wigner_of_state)
from magicfree.matops import choi_of_unitary

from conftest import random_density


def test_prime_checks():
    assert [n for n in range(12) if is_prime(n)] == [2, 3, 5, 7, 11]
    for bad in (2, 4, 9, 1):
        with pytest.raises(ValueError):
            check_odd_prime(bad)
    assert check_odd_prime(7) == 7


@pytest.mark.parametrize("d", [3, 5])
def test_phase_point_basis_identities(d):
    ops = single_site_operators(d)
    assert np.abs(np.einsum("aii->a", ops) - 1).max() < 1e-10
    gram = np.einsum("aij,bji->ab", ops, ops)
    assert np.abs(gram - d * np.eye(d * d)).max() < 1e-10
    assert np.abs(ops.sum(axis=0) - d * np.eye(d)).max() < 1e-10
    assert np.abs(ops - ops.conj().transpose(0, 2, 1)).max() < 1e-12


def test_two_site_basis_identities():
    basis = PhasePointBasis(3, 2)
    ops = basis.operators()
    assert len(basis) == 81
    gram = np.einsum("aij,bji->ab", ops, ops)
    assert np.abs(gram - 9 * np.eye(81)).max() < 1e-10
    assert np.allclose(basis.operator(PhasePoint(3, ((1, 2), (0, 1)))).mat, ops[1 * 27 + 2 * 9 + 0 * 3 + 1])


@pytest.mark.parametrize("d", [3, 5, 7])
def test_triple_product_phase_matches_traces(d):
    rng = np.random.default_rng(d)
    ops = single_site_operators(d)
    worst = 0.0
    for _ in range(1000):
        r, w, v = rng.integers(0, d * d, size=3)
        pts = [PhasePoint.from_index(d, 1, int(k)) for k in (r, w, v)]
        direct = np.trace(ops[r] @ ops[w] @ ops[v])
        worst = max(worst, abs(triple_product_phase(*pts) - direct))
    assert worst < 1e-10
    table = triple_product_table(d)
    assert np.allclose(table, np.einsum("aij,bjk,cki->abc", ops, ops, ops), atol=1e-10)


def test_weyl_operators_are_unitary_and_covariant():
    d = 5
    ops = single_site_operators(d)
    for a in [(1, 0), (0, 1), (2, 3)]:
        t = weyl_operator(a, d)
        assert np.allclose(t @ t.conj().T, np.eye(d))
        k = a[0] * d + a[1]
        assert np.allclose(t @ ops[0] @ t.conj().T, ops[k])


@given(st.integers(0, 10**6))
def test_wigner_function_normalized_and_invertible(seed):
    rng = np.random.default_rng(seed)
    rho = random_density(3, rng)
    w = wigner_of_state(rho)
    assert abs(w.total() - 1) < 1e-10
    assert np.allclose(reconstruct(w), rho)


def test_stabilizer_states_are_wigner_positive_and_strange_is_not():
    d = 3
    zero = wigner_of_state(ket_to_dm(np.eye(d)[0]))
    assert zero.min() > -1e-12
    strange = wigner_of_state(ket_to_dm(np.array([0, 1, -1]) / np.sqrt(2)))
    assert abs(strange.min() + 1 / 3) < 1e-12


def test_wigner_rows_and_channel_wigner():
    d = 3
    rows = WignerRows(1, d)
    assert len(rows) == 81 and rows.dims == (3, 3)
    j = choi_of_unitary(weyl_operator((1, 2), d))
    vals = rows.evaluate(j)
    brute = np.array([np.trace(r @ j).real for r in rows])
    assert np.allclose(vals, brute)
    # a Clifford (Weyl) unitary is a stochastic permutation on phase space
    w = channel_wigner(j, d)
    assert np.allclose(w.sum(axis=1), 1)
    assert w.min() > -1e-12 and np.allclose(np.sort(w.max(axis=1)), 1)
    u, v = rows.split(10)
    assert (u.index, v.index) == (1, 1)


def test_points_grid_order():
    pts = points_grid(3, 2)
    assert [p.index for p in pts] == list(range(81))
