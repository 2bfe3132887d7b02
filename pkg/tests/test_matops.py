import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from magicfree.matops import (HermitianOperator, SitePermutation, choi_of_map, choi_of_unitary,
                              from_product_coords, haar_states, hermitian_unit_basis, ket_to_dm,
                              kron, min_eigenvalue, partial_trace, partial_transpose,
                              permutation_operator, product_coords, symmetric_dimension,
                              symmetric_projector, symmetric_unit_basis)

from conftest import random_density


def test_hermitian_operator_rejects_non_hermitian():
    with pytest.raises(ValueError):
        HermitianOperator(np.array([[0, 1], [0, 0]]), (2,))
    with pytest.raises(ValueError):
        HermitianOperator(np.eye(4), (3,))


def test_hermitian_operator_arithmetic(rng):
    a = HermitianOperator(random_density(4, rng), (2, 2))
    b = HermitianOperator(random_density(4, rng), (2, 2))
    assert np.allclose((a + b).mat, a.mat + b.mat)
    assert np.allclose((a * 3).mat, 3 * a.mat)
    assert abs(a.trace() - 1) < 1e-12
    with pytest.raises(ValueError):
        a + HermitianOperator(np.eye(4), (4,))


def test_partial_trace_of_product(rng):
    a, b, c = (random_density(d, rng) for d in (2, 3, 2))
    x = kron(a, b, c)
    assert np.allclose(partial_trace(x, [2], (2, 3, 2)), b)
    assert np.allclose(partial_trace(x, [1, 3], (2, 3, 2)), np.kron(a, c))


def test_partial_transpose_of_product(rng):
    a, b = random_density(2, rng), random_density(3, rng)
    x = np.kron(a, b)
    assert np.allclose(partial_transpose(x, [1], (2, 3)), np.kron(a.T, b))
    assert np.allclose(partial_transpose(x, [1, 2], (2, 3)), x.T)


def test_ppt_of_bell_state_has_negative_eigenvalue():
    phi = np.array([1, 0, 0, 1]) / math.sqrt(2)
    assert abs(min_eigenvalue(partial_transpose(ket_to_dm(phi), [2], (2, 2))) + 0.5) < 1e-12


def test_permutation_operator_moves_kets():
    d = 2
    e = np.eye(d)
    perm = SitePermutation.from_cycles(3, (1, 2, 3))
    p = permutation_operator(perm, d)
    # slot k goes to slot perm(k): |a,b,c> -> |c,a,b>
    ket = np.kron(np.kron(e[0], e[1]), e[1])
    want = np.kron(np.kron(e[1], e[0]), e[1])
    assert np.allclose(p @ ket, want)


@given(st.integers(2, 4), st.integers(0, 23), st.integers(0, 23))
def test_permutation_operator_is_representation(n, i, j):
    perms = SitePermutation.all(n)
    s, t = perms[i % len(perms)], perms[j % len(perms)]
    d = 2
    lhs = permutation_operator(s * t, d)
    rhs = permutation_operator(s, d) @ permutation_operator(t, d)
    assert np.allclose(lhs, rhs)


@pytest.mark.parametrize("n,d", [(1, 2), (2, 2), (3, 2), (2, 3), (3, 3), (4, 2)])
def test_symmetric_projector_identities(n, d):
    p = symmetric_projector(n, d).mat
    assert np.allclose(p @ p, p, atol=1e-10)
    assert abs(np.trace(p) - symmetric_dimension(n, d)) < 1e-10
    assert symmetric_dimension(n, d) == math.comb(n + d - 1, n)
    for perm in SitePermutation.all(n):
        assert np.allclose(permutation_operator(perm, d) @ p, p, atol=1e-10)


def test_symmetric_projector_matches_haar_average():
    # Monte Carlo: average of psi^(x)2 approaches Pi_2 / D
    d = 2
    psi = haar_states(20000, d, rng=7)
    two = np.einsum("ki,kj->kij", psi, psi).reshape(-1, d * d)
    avg = np.einsum("ka,kb->ab", two, two.conj()) / len(psi)
    want = symmetric_projector(2, d).mat / symmetric_dimension(2, d)
    assert np.abs(avg - want).max() < 0.02


def test_choi_conventions():
    u = np.array([[0, 1], [1, 0]])
    j = choi_of_unitary(u)
    assert np.allclose(j, choi_of_map(lambda x: u @ x @ u.conj().T, 2))
    assert np.allclose(partial_trace(j, [1], (2, 2)), np.eye(2))


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_unit_bases_are_orthonormal(n):
    for basis in (hermitian_unit_basis(n), symmetric_unit_basis(n)):
        gram = np.einsum("aij,bji->ab", basis, basis)
        assert np.allclose(gram, np.eye(len(basis)))
        assert np.allclose(basis, basis.conj().transpose(0, 2, 1))


@given(st.integers(0, 10**6))
def test_product_coords_round_trip(seed):
    rng = np.random.default_rng(seed)
    bases = [hermitian_unit_basis(2), hermitian_unit_basis(3)]
    m = random_density(6, rng) - 0.3 * random_density(6, rng)
    c = product_coords(m, bases)
    assert np.allclose(c.imag, 0, atol=1e-12)
    assert np.allclose(from_product_coords(c.real, bases), m)
    brute = [np.trace(np.kron(a, b) @ m) for a, b in itertools.product(*bases)]
    assert np.allclose(c, brute)
