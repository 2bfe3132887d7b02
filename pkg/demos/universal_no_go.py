"""Universal purification under classically simulable operations.

Two noisy copies of an unknown pure state, each through a depolarizing channel
of strength delta.  A protocol may post-select (success probability p).  For
Haar-random inputs the best fidelity achievable with stabilizer-preserving
(qubits) or Wigner-preserving (odd prime d) maps never exceeds the fidelity of
a single noisy copy, lambda0 = 1 - (d - 1) delta / d.  Unrestricted operations
do better once post-selection is allowed.

Run:  python3 demos/universal_no_go.py
"""
import numpy as np

from magicfree.certificates import (build_cpwp_certificate, build_cspo_certificate,
                                    certificate_dual_vector)
from magicfree.purification import Ensemble, PurificationInstance, haar_lambda0
from magicfree.sdp import build_primal, dual_residuals, solve_fidelity

delta = 0.3
print(f"depolarizing strength delta = {delta}\n")
print(f"{'d':>2} {'class':>5} {'p':>5} {'F':>12} {'lambda0':>10} {'F - lambda0':>12}")
for d, free in ((2, "CSPO"), (3, "CPWP")):
    for cls in (free, "CPTN"):
        for p in (0.2, 1.0):
            inst = PurificationInstance(d, 2, delta, p, Ensemble.haar(d), cls)
            f, rep = solve_fidelity(inst)
            lam = haar_lambda0(d, delta)
            print(f"{d:>2} {cls:>5} {p:>5.2f} {f:>12.9f} {lam:>10.6f} {f - lam:>+12.2e}")

# The no-go statement has an explicit dual certificate.  Plugging it into the
# dual of the program gives a feasible dual point whose objective is lambda0,
# which bounds every free protocol from above.
print("\nanalytic dual certificates plugged into the programs (p = 0.2):")
for d, cls, cert in ((2, "CSPO", build_cspo_certificate(delta)),
                     (3, "CPWP", build_cpwp_certificate(3, delta))):
    prob = build_primal(PurificationInstance(d, 2, delta, 0.2, Ensemble.haar(d), cls))
    res = dual_residuals(prob, certificate_dual_vector(prob, cert))
    print(f"  d={d} {cls}: dual objective {res['dual_objective']:.12f}, "
          f"worst cone violation {res['max_violation']:.1e}")

# Perturbing the certificate by 0.1 breaks dual feasibility.
prob = build_primal(PurificationInstance(3, 2, delta, 0.2, Ensemble.haar(3), "CPWP"))
y = certificate_dual_vector(prob, build_cpwp_certificate(3, delta))
y[0] -= 0.1
res = dual_residuals(prob, y)
print(f"  perturbed: dual objective {res['dual_objective']:.6f}, "
      f"negative mass {res['negative_mass']:.3f}  (infeasible)")
