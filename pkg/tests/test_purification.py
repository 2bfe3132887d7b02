import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from magicfree.matops import partial_trace, partial_transpose, symmetric_projector
from magicfree.purification import (Ensemble, PurificationInstance, assemble_QR,
                                    baseline_fidelity, builtin_ensemble, depolarize,
                                    depolarize_state, fig2_ensembles, haar_lambda0,
                                    identity_on_first_copy, load_ensemble, save_ensemble)

from conftest import random_density


def test_depolarize_limits(rng):
    rho = random_density(3, rng)
    assert np.allclose(depolarize_state(rho, 0), rho)
    assert np.allclose(depolarize_state(rho, 1), np.eye(3) / 3)
    x = np.kron(rho, random_density(2, rng))
    y = depolarize(x, 2, 1.0, (3, 2))
    assert np.allclose(y, np.kron(rho, np.eye(2) / 2))
    with pytest.raises(ValueError):
        depolarize_state(rho, 1.5)


@given(st.floats(0, 1), st.integers(2, 3))
def test_haar_baseline_matches_average_overlap(delta, d):
    inst = PurificationInstance(d, 2, delta, 1.0, Ensemble.haar(d), "CPTN")
    # lambda0 is tr[(D(psi)) psi] averaged: 1 - (d-1) delta / d
    assert abs(baseline_fidelity(inst) - (1 - (d - 1) * delta / d)) < 1e-12
    assert haar_lambda0(d, delta) == baseline_fidelity(inst)


@pytest.mark.parametrize("d,n", [(2, 2), (3, 2), (2, 3)])
def test_qr_structure(d, n):
    inst = PurificationInstance(d, n, 0.3, 0.5, Ensemble.haar(d), "CPTN")
    qr = assemble_QR(inst)
    assert qr.Q.dims == qr.R.dims == (d,) * (n + 1)
    assert abs(qr.Q.trace() - 1) < 1e-12
    assert abs(qr.R.trace() - d) < 1e-12
    # R = r (x) I, so its input marginal is d times that of Q
    assert np.allclose(d * partial_trace(qr.Q.mat, range(1, n + 1), qr.Q.dims),
                       partial_trace(qr.R.mat, range(1, n + 1), qr.R.dims))


def test_qr_noiseless_haar_is_symmetric_projector():
    qr = assemble_QR(PurificationInstance(2, 2, 0.0, 1.0, Ensemble.haar(2), "CSPO"))
    assert np.allclose(qr.Q.mat, symmetric_projector(3, 2).mat / 4)


def test_keep_first_copy_reaches_baseline():
    for d, n, delta in [(2, 2, 0.4), (3, 2, 0.7), (2, 3, 0.2)]:
        inst = PurificationInstance(d, n, delta, 1.0, Ensemble.haar(d), "CPTN")
        qr = assemble_QR(inst)
        j = identity_on_first_copy(d, n).mat
        sites = list(range(1, n + 1))
        assert np.allclose(partial_trace(j, sites, inst.dims), np.eye(d**n))
        num = np.trace(j @ partial_transpose(qr.Q.mat, sites, inst.dims)).real
        den = np.trace(j @ partial_transpose(qr.R.mat, sites, inst.dims)).real
        assert abs(den - 1) < 1e-12
        assert abs(num - haar_lambda0(d, delta)) < 1e-12


def test_instance_validation():
    haar2, haar3, haar4 = (Ensemble.haar(d) for d in (2, 3, 4))
    with pytest.raises(ValueError):
        PurificationInstance(2, 2, 0.5, 1.0, haar2, "CPWP")
    with pytest.raises(ValueError):
        PurificationInstance(3, 2, 0.5, 1.0, haar3, "CSPO")
    with pytest.raises(ValueError):
        PurificationInstance(4, 2, 0.5, 1.0, haar4, "cpwp")
    with pytest.raises(ValueError):
        PurificationInstance(3, 2, 0.5, 0.0, haar3, "CPTN")
    with pytest.raises(ValueError):
        PurificationInstance(3, 2, 0.5, 1.0, haar2, "CPTN")
    assert PurificationInstance(3, 2, 0.5, 1.0, haar3, "cpwp").op_class == "CPWP"


def test_fig2_ensembles():
    qubit, qutrit = fig2_ensembles()
    assert qubit.d == 2 and len(qubit.states) == 2
    assert qutrit.d == 3 and len(qutrit.states) == 4
    for v in qutrit.states:
        assert abs(np.linalg.norm(v) - 1) < 1e-12
    # qubit baseline at full noise is 1/2
    inst = PurificationInstance(2, 2, 1.0, 1.0, qubit, "CSPO")
    assert abs(baseline_fidelity(inst) - 0.5) < 1e-12
    assert builtin_ensemble("haar", 3) == Ensemble.haar(3)
    with pytest.raises(ValueError):
        builtin_ensemble("nope")


def test_discrete_moment_of_one_state():
    v = np.array([1, 1j]) / math.sqrt(2)
    m = Ensemble.discrete([v]).moment(2)
    assert np.allclose(m, np.outer(np.kron(v, v), np.kron(v, v).conj()))


def test_ensemble_file_round_trip(tmp_path):
    _, qutrit = fig2_ensembles()
    path = tmp_path / "ens.json"
    save_ensemble(qutrit, path)
    back = load_ensemble(path)
    assert back.d == 3
    assert all(np.allclose(a, b) for a, b in zip(back.states, qutrit.states))


def test_ensemble_file_errors_name_the_state(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"d": 2, "states": [[[1, 0], [0, 0]], [[1, 0], [1, 0]]]}))
    with pytest.raises(ValueError, match="state 1"):
        load_ensemble(path)
    path.write_text(json.dumps({"d": 2, "states": [[[1, 0]]]}))
    with pytest.raises(ValueError, match="state 0"):
        load_ensemble(path)
    path.write_text(json.dumps({"states": []}))
    with pytest.raises(ValueError):
        load_ensemble(path)
