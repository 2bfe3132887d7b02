"""Analytic dual certificates for two-copy universal purification.

Odd prime ``d`` with Wigner-positive maps::

    alpha = (1-delta) delta (d(delta-1) - delta) / (d^3 (d+1))
    C     = 2 alpha I - alpha [P(123) + P(132)]

qubits with stabilizer-preserving maps use the same operator with
``beta = alpha|_{d=2}``.  Together with ``x = -lambda0`` and ``Y = 0`` these are
dual feasible with objective ``lambda0``; the routines here check every
ingredient numerically and map the certificates onto the dual vectors of the
conic programs built in :mod:`magicfree.sdp`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .matops import (HermitianOperator, SitePermutation, min_eigenvalue, partial_transpose,
                     permutation_operator, product_coords)
from .phase_space import (WignerRows, check_odd_prime, single_site_operators,
                          triple_product_table)
from .purification import (Ensemble, PurificationInstance, QRPair, assemble_QR, haar_lambda0,
                           identity_on_first_copy)
from .stabilizer import (_SIGMA, StabilizerSet, enumerate_stabilizer_states, pauli_coefficients,
                         robustness_of_state)

NO_GO_TOL = 1e-5


# --------------------------------------------------------------------------
# reports


@dataclass
class Check:
    name: str
    value: float
    threshold: float
    passed: bool
    relation: str = "<="

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag}  {self.name:<34s} value={self.value:+.3e}  {self.relation} {self.threshold:.1e}"


@dataclass
class VerificationReport:
    title: str
    params: dict
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name, value, threshold, relation="<="):
        value = float(value)
        ok = value <= threshold if relation == "<=" else value >= threshold
        self.checks.append(Check(name, value, threshold, bool(ok), relation))

    def to_text(self) -> str:
        head = " ".join(f"{k}={v}" for k, v in self.params.items())
        lines = [f"[{self.title}] {head}"] + ["  " + c.line() for c in self.checks]
        lines.append(f"  verdict: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)

    def failures(self):
        return [c for c in self.checks if not c.passed]


# --------------------------------------------------------------------------
# shared pieces


def _cycle_ops(d: int):
    p123 = permutation_operator(SitePermutation.from_cycles(3, (1, 2, 3)), d)
    p132 = permutation_operator(SitePermutation.from_cycles(3, (1, 3, 2)), d)
    return p123, p132


def alpha_coefficient(d: int, delta: float) -> float:
    return (1 - delta) * delta * (d * (delta - 1) - delta) / (d**3 * (d + 1))


def alpha_coefficient_expanded(d: int, delta: float) -> float:
    # same polynomial with the inner factor multiplied out
    return (delta - delta**2) * (d * delta - d - delta) / (d**4 + d**3)


def certificate_operator(d: int, coeff: float) -> HermitianOperator:
    p123, p132 = _cycle_ops(d)
    mat = 2 * coeff * np.eye(d**3) - coeff * (p123 + p132)
    return HermitianOperator(mat, (d, d, d))


def haar_qr(d: int, delta: float, n: int = 2) -> QRPair:
    op_class = "CSPO" if d == 2 else "CPTN"
    return assemble_QR(PurificationInstance(d, n, delta, 1.0, Ensemble.haar(d), op_class))


def _witness(d: int, delta: float, c_op: HermitianOperator) -> np.ndarray:
    """``lambda0 R^T3 - Q^T3 + C^T3`` for the two-copy Haar instance."""
    qr = haar_qr(d, delta)
    lam0 = haar_lambda0(d, delta)
    m = lam0 * qr.R.mat - qr.Q.mat + c_op.mat
    return partial_transpose(m, [3], (d, d, d))


# --------------------------------------------------------------------------
# odd prime dimension


@dataclass(frozen=True)
class CpwpCertificate:
    d: int
    delta: float
    alpha: float
    x_dual: float
    C: HermitianOperator = field(repr=False)
    t: float

    @property
    def lambda0(self) -> float:
        return -self.x_dual


def t_normalizer(d: int, delta: float) -> tuple[float, float]:
    """Both closed forms of ``tr[lambda0 R^T3 - Q^T3 + C^T3]``."""
    a = alpha_coefficient(d, delta)
    t1 = (d - 1) * (1 - delta) + 2 * a * d * (d * d - 1)
    t2 = (d - 1) * (1 - delta) * (d * d + 2 * d * (delta - 1) * delta - 2 * delta**2) / d**2
    return t1, t2


def build_cpwp_certificate(d: int, delta: float) -> CpwpCertificate:
    d = check_odd_prime(d)
    if not 0 <= delta <= 1:
        raise ValueError(f"delta must lie in [0, 1], got {delta}")
    a = alpha_coefficient(d, delta)
    return CpwpCertificate(d, float(delta), a, -haar_lambda0(d, delta),
                           certificate_operator(d, a), t_normalizer(d, delta)[0])


@dataclass(frozen=True)
class EggelingCoefficients:
    s_plus: float
    s_minus: float
    s0: float
    s1: float
    s2: float
    s3: float


def eggeling_generators(d: int):
    """``I``, ``X = P((23))^T3`` and ``V = P((12))`` on three sites."""
    x = partial_transpose(permutation_operator(SitePermutation.from_cycles(3, (2, 3)), d), [3], (d,) * 3)
    v = permutation_operator(SitePermutation.from_cycles(3, (1, 2)), d)
    return np.eye(d**3), x, v


def eggeling_basis(d: int) -> dict:
    i, x, v = eggeling_generators(d)
    sym, asym = (i + v) / 2, (i - v) / 2
    vxv = v @ x @ v
    xv_vx = x @ v + v @ x
    return {
        "s_plus": sym @ (i - 2 * x / (d + 1)) @ sym,
        "s_minus": asym @ (i - 2 * x / (d - 1)) @ asym,
        "s0": (d * (x + vxv) - xv_vx) / (d * d - 1),
        "s1": (d * xv_vx - (x + vxv)) / (d * d - 1),
        "s2": (x - vxv) / math.sqrt(d * d - 1),
        "s3": 1j * (x @ v - v @ x) / math.sqrt(d * d - 1),
    }


def eggeling_closed_form(d: int, delta: float) -> tuple[float, float]:
    den = 2 * d * d + 4 * d * (delta - 1) * delta - 4 * delta**2
    s_plus = (d * d * ((delta - 2) * delta + 2) + d * delta**2 - 2 * delta**2) / den
    s_minus = -(d - 2) * delta * (d * delta - 2 * d - delta) / den
    return s_plus, s_minus


def eggeling_coefficients(omega: np.ndarray, d: int) -> EggelingCoefficients:
    basis = eggeling_basis(d)
    vals = {k: float(np.real(np.trace(omega @ s))) for k, s in basis.items()}
    return EggelingCoefficients(**vals)


def cpwp_coefficients(cert: CpwpCertificate) -> tuple[np.ndarray, np.ndarray]:
    """``c_(r,w,v)`` by the triple-product phase and by direct traces, shape ``(d^2,)*3``."""
    d, a = cert.d, cert.alpha
    table = triple_product_table(d)  # [r, w, v] -> tr[A^r A^w A^v]
    # tr[A^w A^v A^r] equals table[r, w, v] by cyclicity
    analytic = 2 * a / d**3 * (1 - np.real(table))
    ops = single_site_operators(d)
    direct = np.real(product_coords(cert.C.mat, [ops] * 3)).reshape((d * d,) * 3) / d**3
    return analytic, direct


def verify_cpwp_certificate(cert: CpwpCertificate) -> VerificationReport:
    d, delta = cert.d, cert.delta
    rep = VerificationReport("cpwp certificate", {"d": d, "delta": f"{delta:.6g}"})
    rep.add("alpha <= 0", cert.alpha, 0.0)
    rep.add("alpha two forms agree", abs(cert.alpha - alpha_coefficient_expanded(d, delta)), 1e-15)
    t1, t2 = t_normalizer(d, delta)
    w = _witness(d, delta, cert.C)
    rep.add("t >= 0", t1, -1e-12, ">=")
    rep.add("t closed forms agree", abs(t1 - t2), 1e-12)
    rep.add("t equals witness trace", abs(t1 - np.real(np.trace(w))), 1e-10)
    rep.add("witness min eigenvalue", min_eigenvalue(w), -1e-9, ">=")
    analytic, direct = cpwp_coefficients(cert)
    rep.add("c_rwv max (phase formula)", analytic.max(), 1e-12)
    rep.add("c_rwv phase vs trace", np.abs(analytic - direct).max(), 1e-12)
    # Eggeling algebra and coefficients
    i, x, v = eggeling_generators(d)
    rep.add("X^2 = dX", np.abs(x @ x - d * x).max(), 1e-10)
    rep.add("V^2 = I", np.abs(v @ v - i).max(), 1e-10)
    rep.add("XVX = X", np.abs(x @ v @ x - x).max(), 1e-10)
    rep.add("tr X = d^2", abs(np.trace(x) - d * d), 1e-10)
    rep.add("tr XV = d", abs(np.trace(x @ v) - d), 1e-10)
    if t1 > 1e-12:
        s = eggeling_coefficients(w / t1, d)
        sp_cf, sm_cf = eggeling_closed_form(d, delta)
        rep.add("s+ closed form", abs(s.s_plus - sp_cf), 1e-10)
        rep.add("s- closed form", abs(s.s_minus - sm_cf), 1e-10)
        rep.add("s+ >= 0", s.s_plus, -1e-10, ">=")
        rep.add("s- >= 0", s.s_minus, -1e-10, ">=")
        rep.add("s0..s3 vanish", max(abs(s.s0), abs(s.s1), abs(s.s2), abs(s.s3)), 1e-10)
        rep.add("s+ + s- + s0 = 1", abs(s.s_plus + s.s_minus + s.s0 - 1), 1e-10)
    return rep


# --------------------------------------------------------------------------
# qubits


@dataclass(frozen=True)
class CspoCertificate:
    delta: float
    beta: float
    D: HermitianOperator = field(repr=False)
    y: np.ndarray = field(repr=False)  # Pauli index order, r*16 + w*4 + v

    @property
    def lambda0(self) -> float:
        return haar_lambda0(2, self.delta)


def beta_coefficient(delta: float) -> float:
    return (1 - delta) * delta * (delta - 2) / 24


def _y_closed_form(beta: float) -> np.ndarray:
    y = np.zeros((4, 4, 4))
    m = np.array([0, 0, 1, 0])  # Y picks up a sign under transposition
    for r in range(4):
        for w in range(4):
            for v in range(4):
                val = 3 * beta * (r == w == v == 0)
                val -= beta / 2 * ((r == w) * (v == 0) + (-1) ** m[w] * (r == 0) * (w == v)
                                   + (-1) ** m[r] * (w == 0) * (r == v))
                y[r, w, v] = val
    return y.reshape(-1)


def cspo_coefficients_direct(d_op: HermitianOperator) -> np.ndarray:
    """``y_i = tr[P_i^(T12) D] / 8``: coefficients of ``D`` in the partially transposed Paulis."""
    return pauli_coefficients(partial_transpose(d_op.mat, [1, 2], (2, 2, 2)), 3) / 8


def build_cspo_certificate(delta: float) -> CspoCertificate:
    if not 0 <= delta <= 1:
        raise ValueError(f"delta must lie in [0, 1], got {delta}")
    b = beta_coefficient(delta)
    return CspoCertificate(float(delta), b, certificate_operator(2, b), _y_closed_form(b))


def verify_cspo_certificate(cert: CspoCertificate, stab3: StabilizerSet | None = None) -> VerificationReport:
    stab3 = stab3 or enumerate_stabilizer_states(3)
    if stab3.n_qubits != 3 or len(stab3) != 1080:
        raise ValueError("the qubit certificate needs the full three-qubit stabilizer set")
    delta, b = cert.delta, cert.beta
    rep = VerificationReport("cspo certificate", {"delta": f"{delta:.6g}"})
    rep.add("beta <= 0", b, 0.0)
    rep.add("beta = alpha at d=2", abs(b - alpha_coefficient(2, delta)), 1e-15)
    rep.add("witness min eigenvalue", min_eigenvalue(_witness(2, delta, cert.D)), -1e-9, ">=")
    direct = cspo_coefficients_direct(cert.D)
    rep.add("y closed form vs trace", np.abs(direct - cert.y).max(), 1e-12)
    vals = cert.y @ stab3.G
    rep.add("sum_i y_i G_ij max", vals.max(), 1e-12)
    allowed = np.array([3, 2, 1.5, 1, 0]) * b
    dist = np.min(np.abs(vals[:, None] - allowed[None, :]), axis=1)
    rep.add("values in {3b,2b,1.5b,b,0}", dist.max(), 1e-10)
    return rep


def cspo_column_values(cert: CspoCertificate, stab3: StabilizerSet | None = None) -> np.ndarray:
    stab3 = stab3 or enumerate_stabilizer_states(3)
    return cert.y @ stab3.G


# --------------------------------------------------------------------------
# primal side and dual vectors


def primal_feasible_value(inst: PurificationInstance, qr: QRPair | None = None) -> float:
    """Objective of ``J = p |Phi><Phi|_(1,out) (x) I`` after checking it is feasible and in class."""
    if inst.ensemble.kind != "haar":
        raise ValueError("the reference feasible point is defined for the Haar ensemble")
    qr = qr or assemble_QR(inst)
    sites = list(range(1, inst.n + 1))
    j = inst.p * identity_on_first_copy(inst.d, inst.n).mat
    norm = np.real(np.trace(j @ partial_transpose(qr.R.mat, sites, inst.dims)))
    if abs(norm - inst.p) > 1e-12:
        raise AssertionError(f"normalization tr[J R^T] = {norm}, expected {inst.p}")
    if inst.op_class == "CPWP":
        low = WignerRows(inst.n, inst.d).evaluate(j).min()
        if low < -1e-10:
            raise AssertionError(f"reference point violates a Wigner row ({low:.3g})")
    elif inst.op_class == "CSPO":
        state = j / inst.d_in
        r = robustness_of_state(state, enumerate_stabilizer_states(inst.n + 1, extended=inst.n + 1 == 4))
        if r.value > np.trace(state).real + 1e-6:
            raise AssertionError("reference point is outside the stabilizer cone")
    return float(np.real(np.trace(j @ partial_transpose(qr.Q.mat, sites, inst.dims))) / inst.p)


def certificate_dual_vector(problem, cert) -> np.ndarray:
    """Dual vector of a two-copy Haar fidelity program encoded by an analytic certificate.

    Rows: normalization -> ``lambda0``; trace rows -> 0; class rows ->
    ``c_uv`` (Wigner) or ``d_in y_i`` (stabilizer).  The programs are written
    in ``K = J / p``, which absorbs every factor of ``p``.
    """
    y = np.zeros(problem.num_rows)
    y[problem.groups["normalization"]] = cert.lambda0
    if isinstance(cert, CpwpCertificate):
        if problem.meta["class"] != "CPWP" or problem.meta["d"] != cert.d:
            raise ValueError("certificate does not match the program")
        analytic, _ = cpwp_coefficients(cert)
        y[problem.groups["wigner"]] = analytic.reshape(-1)
    else:
        if problem.meta["class"] != "CSPO":
            raise ValueError("certificate does not match the program")
        y[problem.groups["stabilizer"]] = 4 * cert.y
    return y


# --------------------------------------------------------------------------
# sweeps


@dataclass
class VerdictCell:
    delta: float
    p: float
    fidelity: float
    lambda0: float
    status: str
    iterations: int
    passed: bool

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return (f"{tag}  delta={self.delta:.4f} p={self.p:.4f} F={self.fidelity:.9f} "
                f"lambda0={self.lambda0:.9f} |F-lambda0|={abs(self.fidelity - self.lambda0):.2e} "
                f"status={self.status}")


@dataclass
class VerdictTable:
    d: int
    n: int
    op_class: str
    cells: list

    @property
    def confirmed(self) -> bool:
        return all(c.passed for c in self.cells)

    def to_text(self) -> str:
        lines = [f"[no-go] d={self.d} n={self.n} class={self.op_class}"]
        lines += ["  " + c.line() for c in self.cells]
        lines.append(f"  verdict: {'no-go confirmed' if self.confirmed else 'not confirmed'}")
        return "\n".join(lines)


def no_go_verdict(d: int, n: int, delta_grid, p_grid, op_class: str, tol: float = 1e-8,
                  threshold: float = NO_GO_TOL, extended: bool = False) -> VerdictTable:
    from .sdp import solve_fidelity

    cells = []
    for delta in delta_grid:
        for p in p_grid:
            inst = PurificationInstance(d, n, float(delta), float(p), Ensemble.haar(d), op_class)
            f, rep = solve_fidelity(inst, tol=tol, extended=extended)
            lam0 = haar_lambda0(d, delta)
            ok = rep.optimal and abs(f - lam0) <= threshold
            cells.append(VerdictCell(float(delta), float(p), f, lam0, rep.status, rep.iterations, ok))
    return VerdictTable(d, n, op_class.upper(), cells)
