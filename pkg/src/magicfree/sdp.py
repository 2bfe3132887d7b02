"""Fidelity programs for the three operation classes.

Primal (all classes)::

    max  tr[J Q^Tin] / p
    s.t. tr[J R^Tin] = p,  tr_out J + S = I,  J, S >= 0

plus, for CPWP, ``tr[((A^u)^T (x) A^v) J] = w_uv`` with ``w >= 0`` and, for CSPO,
``tr[P_i J] / d_in = sum_j G_ij x_j`` with ``x >= 0`` over stabilizer states of
``n + 1`` qubits.

The solver works with ``K = J / p`` so the Choi block stays of order one as
``p -> 0``::

    max  tr[K Q^Tin]  s.t.  tr[K R^Tin] = 1,  p tr_out K + S = I

The class rows are homogeneous and keep their form.  The Choi block is
expressed in a product basis adapted to the class (scaled phase-point
operators for CPWP, scaled Paulis for CSPO), which turns the class rows into
scaled coordinate projections.
"""
from __future__ import annotations

import math

import numpy as np
import scipy.sparse as sp

from .conic import ConicProblem, NonnegBlock, PsdBlock, SolveReport, solve
from .matops import HermitianOperator, hermitian_unit_basis, partial_transpose
from .phase_space import single_site_operators
from .purification import PurificationInstance, QRPair, assemble_QR
from .stabilizer import _SIGMA, enumerate_stabilizer_states


def choi_site_bases(inst: PurificationInstance) -> list[np.ndarray]:
    d, n = inst.d, inst.n
    if inst.op_class == "CPWP":
        ops = single_site_operators(d) / math.sqrt(d)
        return [ops.transpose(0, 2, 1)] * n + [ops]
    if inst.op_class == "CSPO":
        return [_SIGMA / math.sqrt(2)] * (n + 1)
    return [hermitian_unit_basis(d)] * (n + 1)


def build_primal(inst: PurificationInstance, qr: QRPair | None = None,
                 extended: bool = False) -> ConicProblem:
    """Conic form of the fidelity program; ``extended`` allows the four-qubit stabilizer cone."""
    qr = qr or assemble_QR(inst)
    d, n, p = inst.d, inst.n, inst.p
    if qr.Q.dims != inst.dims or qr.R.dims != inst.dims:
        raise ValueError(f"Q/R dims {qr.Q.dims} do not match instance dims {inst.dims}")
    bases = choi_site_bases(inst)
    jblk = PsdBlock("J", inst.dims, site_bases=bases)
    sblk = PsdBlock("S", (d,) * n, site_bases=bases[:n])
    in_sites = list(range(1, n + 1))
    q_t = partial_transpose(qr.Q, in_sites).mat
    r_t = partial_transpose(qr.R, in_sites).mat

    blocks = [jblk, sblk]
    c = {"J": jblk.to_coords(q_t)}
    # row 0: normalization; then one row per coordinate of the input space
    dim_in = sblk.dim
    c_eye_out = np.real(np.einsum("aii->a", bases[-1]))  # coords of I on the output site
    a_j = [sp.csr_array(jblk.to_coords(r_t)[None, :]),
           p * sp.kron(sp.eye_array(dim_in), sp.csr_array(c_eye_out[None, :]), format="csr")]
    a_s = [sp.csr_array((1, dim_in)), sp.eye_array(dim_in, format="csr")]
    rhs = [np.array([1.0]), sblk.identity_coords()]
    groups = {"normalization": slice(0, 1), "trace_nonincreasing": slice(1, 1 + dim_in)}
    extra = {}
    inequality_rows = 0
    row = 1 + dim_in

    if inst.op_class == "CPWP":
        k = d ** (2 * (n + 1))
        blocks.append(NonnegBlock("w", k))
        a_j.append(d ** ((n + 1) / 2) * sp.eye_array(k, format="csr"))
        a_s.append(sp.csr_array((k, dim_in)))
        extra["w"] = (row, -sp.eye_array(k, format="csr"))
        rhs.append(np.zeros(k))
        groups["wigner"] = slice(row, row + k)
        inequality_rows = k
        row += k
    elif inst.op_class == "CSPO":
        stab = enumerate_stabilizer_states(n + 1, extended=extended)
        k = 4 ** (n + 1)
        blocks.append(NonnegBlock("x", len(stab)))
        a_j.append(2 ** ((n + 1) / 2) / inst.d_in * sp.eye_array(k, format="csr"))
        a_s.append(sp.csr_array((k, dim_in)))
        extra["x"] = (row, -sp.csr_array(stab.G))
        rhs.append(np.zeros(k))
        groups["stabilizer"] = slice(row, row + k)
        row += k

    a = {"J": sp.vstack(a_j, format="csr"), "S": sp.vstack(a_s, format="csr")}
    for name, (start, mat) in extra.items():
        pad_top = sp.csr_array((start, mat.shape[1]))
        a[name] = sp.vstack([pad_top, mat], format="csr")
    return ConicProblem(blocks, c, a, np.concatenate(rhs), sense="max", groups=groups,
                        inequality_rows=inequality_rows,
                        meta={"d": d, "n": n, "p": p, "delta": inst.delta, "class": inst.op_class})


def solve_fidelity(inst: PurificationInstance, tol: float = 1e-8, qr: QRPair | None = None,
                   max_iter: int = 100, extended: bool = False) -> tuple[float, SolveReport]:
    prob = build_primal(inst, qr, extended=extended)
    rep = solve(prob, tol=tol, max_iter=max_iter)
    return rep.primal_value, rep


def dual_slacks(problem: ConicProblem, y: np.ndarray) -> dict:
    """Dual slack of every block for a dual vector ``y`` (in the problem's sense)."""
    y = np.asarray(y, dtype=float)
    sign = 1.0 if problem.sense == "max" else -1.0
    out = {}
    for b in problem.blocks:
        aty = problem.a[b.name].T @ y if b.name in problem.a else np.zeros(b.dim)
        z = sign * (aty - problem.c[b.name])
        out[b.name] = b.to_mat(z) if b.kind == "psd" else z
    return out


def dual_residuals(problem: ConicProblem, report_or_y) -> dict:
    """Maximum violation of each dual cone constraint and the dual objective.

    Accepts a :class:`SolveReport` or a raw dual vector.  Per block the entry is
    the negative part of the smallest eigenvalue (PSD blocks) or entry
    (nonnegative blocks) of the dual slack; ``negative_mass`` sums all negative
    eigenvalues and entries.
    """
    y = report_or_y.y if isinstance(report_or_y, SolveReport) else report_or_y
    slacks = dual_slacks(problem, y)
    out = {}
    mass = 0.0
    for b in problem.blocks:
        z = slacks[b.name]
        vals = np.linalg.eigvalsh(z) if b.kind == "psd" else z
        neg = vals[vals < 0]
        out[b.name] = float(-neg.min()) if neg.size else 0.0
        mass += float(-neg.sum())
    out["max_violation"] = max(out.values())
    # total negative part (trace norm of the infeasible component)
    out["negative_mass"] = mass
    out["dual_objective"] = float(problem.rhs @ np.asarray(y))
    return out


def choi_from_report(report: SolveReport, inst: PurificationInstance) -> HermitianOperator:
    """The Choi operator ``J = p K`` of the optimal protocol."""
    return HermitianOperator(inst.p * report.x["J"], inst.dims)
