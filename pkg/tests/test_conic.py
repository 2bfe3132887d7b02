import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, strategies as st

from magicfree.conic import (ConicProblem, NonnegBlock, PsdBlock, dump_conic, embed_real,
                             load_conic, solve, unembed)
from magicfree.matops import hermitian_unit_basis
from magicfree.phase_space import single_site_operators

from conftest import random_density


def _rand_herm(n, rng):
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (g + g.conj().T) / 2


def eig_problem(c_mat, complex_=True):
    """max tr[C X] s.t. tr X = 1, X >= 0: value is the top eigenvalue of C."""
    n = c_mat.shape[0]
    blk = PsdBlock("X", (n,), complex=complex_)
    return ConicProblem([blk], {"X": blk.to_coords(c_mat)},
                        {"X": blk.identity_coords()[None, :]}, np.array([1.0]), sense="max")


def test_toy_lp():
    # min x s.t. x - s = 3, x, s >= 0
    blk = NonnegBlock("v", 2)
    prob = ConicProblem([blk], {"v": np.array([1.0, 0.0])}, {"v": np.array([[1.0, -1.0]])},
                        np.array([3.0]))
    rep = solve(prob)
    assert rep.optimal
    assert abs(rep.primal_value - 3) < 1e-7
    assert abs(rep.dual_value - 3) < 1e-7


def test_infeasible_lp_is_reported():
    # x1 + x2 = -1 with x >= 0
    blk = NonnegBlock("v", 2)
    prob = ConicProblem([blk], {"v": np.ones(2)}, {"v": np.array([[1.0, 1.0]])}, np.array([-1.0]))
    assert solve(prob).status != "Optimal"


@given(st.integers(0, 10**6), st.integers(2, 5))
def test_top_eigenvalue_sdp(seed, n):
    rng = np.random.default_rng(seed)
    c = _rand_herm(n, rng)
    rep = solve(eig_problem(c))
    assert rep.optimal
    assert abs(rep.primal_value - np.linalg.eigvalsh(c)[-1]) < 1e-6


def test_real_embedding_agrees(rng):
    c = _rand_herm(4, rng)
    prob = eig_problem(c)
    emb = embed_real(prob)
    assert emb.psd_blocks == [(8, False)]
    a, b = solve(prob), solve(emb)
    assert abs(a.primal_value - b.primal_value) < 1e-6
    x = unembed(b.x["X"])
    assert abs(np.trace(c @ x).real - a.primal_value) < 1e-6


def test_unembed_inverts_embedding(rng):
    h = _rand_herm(3, rng)
    big = np.block([[h.real, -h.imag], [h.imag, h.real]])
    assert np.allclose(unembed(big), h)
    assert np.allclose(np.sort(np.linalg.eigvalsh(big)), np.sort(np.repeat(np.linalg.eigvalsh(h), 2)))


def test_tol_floor():
    with pytest.raises(ValueError):
        solve(eig_problem(np.eye(2)), tol=1e-10)


def test_validation():
    blk = NonnegBlock("v", 2)
    with pytest.raises(ValueError):
        ConicProblem([blk], {"w": np.ones(2)}, {}, np.zeros(0))
    with pytest.raises(ValueError):
        ConicProblem([blk], {"v": np.ones(3)}, {}, np.zeros(0))
    with pytest.raises(ValueError):
        ConicProblem([blk], {}, {"v": np.ones((2, 3))}, np.zeros(2))
    with pytest.raises(ValueError):
        ConicProblem([blk], {}, {}, np.zeros(0), sense="up")


def test_dump_round_trip(tmp_path, rng):
    c = _rand_herm(3, rng)
    blk = PsdBlock("X", (3,))
    nn = NonnegBlock("s", 2)
    prob = ConicProblem([blk, nn], {"X": blk.to_coords(c), "s": np.array([0.5, -1.0])},
                        {"X": np.vstack([blk.identity_coords(), blk.to_coords(c)]),
                         "s": sp.csr_array(np.array([[1.0, 0.0], [0.0, 2.0]]))},
                        np.array([1.0, 0.25]), sense="max")
    path = tmp_path / "p.conic"
    dump_conic(prob, path)
    back = load_conic(path)
    assert back.sense == "max"
    assert np.allclose(back.rhs, prob.rhs)
    for b in prob.blocks:
        mats = [prob.functional(r, b.name) for r in range(2)]
        mats2 = [back.functional(r, b.name) for r in range(2)]
        assert all(np.allclose(x, y) for x, y in zip(mats, mats2))
    assert abs(solve(back).primal_value - solve(prob).primal_value) < 1e-7
    with pytest.raises(ValueError):
        (tmp_path / "bad").write_text("NOPE\n")
        load_conic(tmp_path / "bad")


@pytest.mark.parametrize("bases", [
    [hermitian_unit_basis(2)] * 3,
    [single_site_operators(3).transpose(0, 2, 1) / np.sqrt(3), single_site_operators(3) / np.sqrt(3)],
])
def test_schur_operator_matches_brute_force(bases, rng):
    dims = [b.shape[1] for b in bases]
    blk = PsdBlock("J", dims, site_bases=bases)
    n = blk.side
    w = random_density(n, rng)
    k = blk.schur_operator(w)
    # K[a, b] = tr[E_a W E_b W]
    eye = np.eye(blk.dim)
    e = np.array([blk.to_mat(eye[i]) for i in range(blk.dim)])
    we = np.einsum("ij,bjk->bik", w, e)
    brute = np.real(np.einsum("aij,bji->ab", we, we))
    assert np.abs(k - brute).max() < 1e-10


def test_coords_round_trip(rng):
    blk = PsdBlock("J", (2, 3), site_bases=[hermitian_unit_basis(2), hermitian_unit_basis(3)])
    h = _rand_herm(6, rng)
    assert np.allclose(blk.to_mat(blk.to_coords(h)), h)
    assert np.allclose(blk.to_mat(blk.identity_coords()), np.eye(6))
    real = PsdBlock("S", (4,), complex=False)
    s = rng.normal(size=(4, 4))
    s = s + s.T
    assert np.allclose(real.to_mat(real.to_coords(s)), s)
