"""Witnessing magic: Wigner negativity for qutrits, robustness for qubits.

Odd-dimensional stabilizer states have nonnegative discrete Wigner functions;
the qutrit magic states used elsewhere do not.  For qubits the stabilizer
polytope is characterized by the robustness of magic, which equals 1 exactly
on mixtures of stabilizer states.

Run:  python3 demos/magic_measures.py
"""
import numpy as np

from magicfree.matops import ket_to_dm
from magicfree.phase_space import wigner_of_state
from magicfree.purification import fig2_ensembles
from magicfree.stabilizer import enumerate_stabilizer_states, robustness_of_state

_, qutrit = fig2_ensembles()
names = ["strange", "norrell", "T", "H+"]
print("qutrit states: most negative Wigner entry and total negativity")
for name, v in zip(names, qutrit.states):
    w = wigner_of_state(ket_to_dm(v))
    neg = -w.values[w.values < 0].sum()
    print(f"  {name:>8}: min W = {w.min():+.5f}, negativity = {neg:.5f}")
w0 = wigner_of_state(ket_to_dm(np.eye(3)[0]))
print(f"  {'|0>':>8}: min W = {w0.min():+.5f}")

print("\nstabilizer states per qubit number:",
      [len(enumerate_stabilizer_states(n)) for n in (1, 2, 3)])

t = np.array([1, np.exp(1j * np.pi / 4)]) / np.sqrt(2)
plus = np.array([1, 1]) / np.sqrt(2)
for name, v in (("|+>", plus), ("|T>", t)):
    print(f"robustness of {name}: {robustness_of_state(ket_to_dm(v)).value:.8f}")
for noise in (0.2, 0.5):
    rho = (1 - noise) * ket_to_dm(t) + noise * np.eye(2) / 2
    print(f"robustness of T with {noise:.1f} depolarizing noise: "
          f"{robustness_of_state(rho).value:.8f}")
