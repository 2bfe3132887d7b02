"""Standard-form conic programs and a primal-dual interior-point solver.

A :class:`ConicProblem` optimizes a linear objective over a product of cones

    PSD blocks (complex Hermitian or real symmetric) x nonnegative orthant

subject to linear equalities.  Every PSD block carries an orthonormal basis of
its Hermitian (symmetric) matrix space; linear functionals are stored as real
coordinate vectors in that basis, so ``tr[F X] = f . x``.  Blocks over several
tensor factors use a product basis, which lets the solver form the Schur
complement with per-site contractions instead of dense ``n^2 x n^2`` products.

The solver is an infeasible-start path-following method with Nesterov-Todd
scaling and Mehrotra predictor-corrector steps.
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .matops import (HermitianOperator, from_product_coords, hermitian_unit_basis,
                     product_coords, symmetric_unit_basis)

log = logging.getLogger(__name__)

OPTIMAL = "Optimal"
INFEASIBLE = "Infeasible"
MAX_ITER = "MaxIter"
NUMERICAL_TROUBLE = "NumericalTrouble"


class PsdBlock:
    """Positive semidefinite matrix variable.

    ``site_bases`` lists an orthonormal Hermitian basis per tensor factor; the
    default is the matrix-unit basis.  Real blocks are single-factor and use the
    symmetric matrix-unit basis.
    """

    kind = "psd"

    def __init__(self, name: str, dims: Sequence[int], complex: bool = True,
                 site_bases: Sequence[np.ndarray] | None = None):
        self.name = name
        self.dims = tuple(int(x) for x in dims)
        self.complex = bool(complex)
        self.side = math.prod(self.dims)
        if not self.complex:
            if site_bases is not None:
                raise ValueError("real blocks use the fixed symmetric basis")
            self.dims = (self.side,)
            self.dim = self.side * (self.side + 1) // 2
            self._basis = symmetric_unit_basis(self.side)
            self.site_bases = None
        else:
            self.dim = self.side**2
            self.site_bases = (list(site_bases) if site_bases is not None
                               else [hermitian_unit_basis(d) for d in self.dims])
            if [b.shape[1] for b in self.site_bases] != list(self.dims):
                raise ValueError("site bases do not match block dims")
            self._basis = None
        self._umat = None

    # single-site standard bases are handled through a sparse vec->coords map
    @property
    def _use_sparse_map(self) -> bool:
        return not self.complex

    def _u(self):
        if self._umat is None:
            basis = self._basis
            n = self.side
            rows, cols, vals = [], [], []
            for a, e in enumerate(basis):
                nz = np.nonzero(e)
                rows.extend(nz[0] * n + nz[1])
                cols.extend([a] * len(nz[0]))
                vals.extend(e[nz])
            self._umat = sp.csr_array((vals, (rows, cols)), shape=(n * n, len(basis)))
        return self._umat

    def to_coords(self, mat) -> np.ndarray:
        mat = np.asarray(mat)
        if self._use_sparse_map:
            batch = mat.shape[:-2]
            flat = mat.reshape(batch + (-1,))
            # real symmetric basis: tr[E X] = vec(E) . vec(X)
            return np.real(flat @ self._u())
        return np.real(product_coords(mat, self.site_bases))

    def to_mat(self, coords) -> np.ndarray:
        coords = np.asarray(coords, dtype=float)
        if self._use_sparse_map:
            n = self.side
            batch = coords.shape[:-1]
            flat = (self._u() @ coords.reshape(-1, self.dim).T).T
            return flat.reshape(batch + (n, n))
        mat = from_product_coords(coords, self.site_bases)
        return (mat + np.swapaxes(mat, -1, -2).conj()) / 2

    def identity_coords(self) -> np.ndarray:
        return self.to_coords(np.eye(self.side))

    def schur_operator(self, w: np.ndarray) -> np.ndarray:
        """Matrix of ``X -> W X W`` in block coordinates."""
        n = self.side
        if self._use_sparse_map:
            s = np.kron(w, w.T)
            u = self._u()
            k = (u.T @ (u.T @ s.T).T)
            return np.real(k)
        # K[a, b] = sum E_a[j, i] W[i, k] E_b[k, l] W[l, j].  Lay out
        # S[(i1 j1 i2 j2 ..), (k1 l1 ..)] = W[i, k] W[l, j] so that every site's
        # basis change acts on one adjacent axis pair, then sweep the axis groups
        # cyclically: each step is a single GEMM on the leading group.
        dims = self.dims
        shape_a, shape_b = [], []
        for _ in range(2):
            for dk in dims:
                shape_a += [dk, 1]
                shape_b += [1, dk]
        x = np.multiply(w.reshape(shape_a), w.T.reshape(shape_b))
        maps = _grouped_maps(self.site_bases)
        for m in maps:
            x = x.reshape(m.shape[1], -1).T @ m.T
        k = np.real(x.reshape(n * n, n * n))
        return (k + k.T) / 2

    def __repr__(self):
        kind = "complex" if self.complex else "real"
        return f"PsdBlock({self.name!r}, dims={self.dims}, {kind})"


def _grouped_maps(site_bases, limit: int = 81):
    """Per-site coordinate maps on ``(i, j)`` pairs, Kronecker-grouped up to ``limit`` rows."""
    def groups(mats):
        out, cur = [], None
        for m in mats:
            if cur is not None and cur.shape[0] * m.shape[0] <= limit:
                cur = np.kron(cur, m)
            else:
                if cur is not None:
                    out.append(cur)
                cur = m
        out.append(cur)
        return out
    left = [e.transpose(0, 2, 1).reshape(e.shape[0], -1) for e in site_bases]
    right = [e.reshape(e.shape[0], -1) for e in site_bases]
    return groups(left) + groups(right)


class NonnegBlock:
    kind = "nonneg"

    def __init__(self, name: str, size: int):
        self.name = name
        self.size = int(size)
        self.dim = self.size

    def identity_coords(self):
        return np.ones(self.size)

    def __repr__(self):
        return f"NonnegBlock({self.name!r}, size={self.size})"


@dataclass
class ConicProblem:
    """``opt  sum_b c_b . x_b  s.t.  sum_b A_b x_b = rhs,  x_b in cone_b``.

    ``a`` maps block name to an ``(m, dim_b)`` matrix (dense or scipy sparse);
    blocks absent from ``a`` have no equality coefficients.  ``groups`` names
    contiguous row ranges for reporting.
    """

    blocks: list
    c: dict
    a: dict
    rhs: np.ndarray
    sense: str = "min"
    groups: dict = field(default_factory=dict)
    inequality_rows: int = 0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.sense not in ("min", "max"):
            raise ValueError("sense must be 'min' or 'max'")
        self.rhs = np.asarray(self.rhs, dtype=float)
        names = [b.name for b in self.blocks]
        if len(set(names)) != len(names):
            raise ValueError("block names must be unique")
        for name in list(self.c) + list(self.a):
            if name not in names:
                raise ValueError(f"functional references undeclared block {name!r}")
        for b in self.blocks:
            c = np.asarray(self.c.get(b.name, np.zeros(b.dim)), dtype=float)
            if c.shape != (b.dim,):
                raise ValueError(f"objective for {b.name!r} has shape {c.shape}, expected ({b.dim},)")
            self.c[b.name] = c
            if b.name in self.a:
                a = self.a[b.name]
                if a.shape != (self.num_rows, b.dim):
                    raise ValueError(f"constraint matrix for {b.name!r} has shape {a.shape}")

    @property
    def num_rows(self) -> int:
        return self.rhs.shape[0]

    def block(self, name: str):
        for b in self.blocks:
            if b.name == name:
                return b
        raise KeyError(name)

    @property
    def psd_blocks(self):
        return [(b.side, b.complex) for b in self.blocks if b.kind == "psd"]

    @property
    def nonneg_len(self) -> int:
        return sum(b.size for b in self.blocks if b.kind == "nonneg")

    def apply(self, values: dict) -> np.ndarray:
        """``sum_b A_b x_b`` for block values given as matrices or vectors."""
        out = np.zeros(self.num_rows)
        for b in self.blocks:
            if b.name in self.a and b.name in values:
                out += self.a[b.name] @ _coords(b, values[b.name])
        return out

    def objective(self, values: dict) -> float:
        return float(sum(self.c[b.name] @ _coords(b, values[b.name])
                         for b in self.blocks if b.name in values))

    def functional(self, row: int, name: str):
        """Operator (or vector) form of one equality row restricted to a block."""
        b = self.block(name)
        if name not in self.a:
            return np.zeros((b.side, b.side)) if b.kind == "psd" else np.zeros(b.size)
        a = self.a[name]
        vec = a[[row]].toarray()[0] if sp.issparse(a) else np.asarray(a[row])
        return b.to_mat(vec) if b.kind == "psd" else vec

    def summary(self) -> dict:
        return {
            "psd_blocks": self.psd_blocks,
            "nonneg_len": self.nonneg_len,
            "equalities": self.num_rows,
            "inequalities": self.inequality_rows,
            "groups": {k: v.stop - v.start for k, v in self.groups.items()},
        }


def _coords(block, value):
    value = np.asarray(value)
    if block.kind == "psd" and value.ndim == 2:
        return block.to_coords(value)
    return value.astype(float)


@dataclass
class SolveReport:
    status: str
    primal_value: float
    dual_value: float
    gap: float
    iterations: int
    primal_infeasibility: float
    dual_infeasibility: float
    x: dict
    z: dict
    y: np.ndarray
    seconds: float = 0.0
    detail: str = ""

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL

    @property
    def J_opt(self) -> HermitianOperator | None:
        val = self.x.get("J")
        if val is None:
            return None
        return HermitianOperator((val + val.conj().T) / 2, self.meta_dims.get("J", (val.shape[0],)))

    @property
    def x_opt(self) -> np.ndarray:
        for key in ("x", "stab_x"):
            if key in self.x:
                return self.x[key]
        return np.zeros(0)

    meta_dims: dict = field(default_factory=dict)


# --------------------------------------------------------------------------
# interior-point core


class _PsdState:
    def __init__(self, block: PsdBlock, x: np.ndarray, z: np.ndarray):
        self.block = block
        self.x = x
        self.z = z

    def scale(self):
        """Nesterov-Todd scaling ``W Z W = X`` with ``G G^H = W``, ``G^-1 X G^-H = diag(lam)``."""
        # SVD of Lz^H Lx keeps the eigenvalue spread of X and Z out of a single product
        lx = np.linalg.cholesky(self.x)
        lz = np.linalg.cholesky(self.z)
        u, lam, vh = np.linalg.svd(lz.conj().T @ lx)
        if lam[-1] <= 0:
            raise np.linalg.LinAlgError("scaled product lost definiteness")
        isq = 1 / np.sqrt(lam)
        self.g = lx @ (vh.conj().T * isq[None, :])
        self.ginv = (isq[:, None] * u.conj().T) @ lz.conj().T
        self.w = self.g @ self.g.conj().T
        self.lam = lam

    def k_apply(self, mat):
        return self.w @ mat @ self.w

    def rc(self, rhs_scaled):
        """``dX + W dZ W`` from the scaled complementarity right-hand side."""
        lam = self.lam
        y = 2 * rhs_scaled / (lam[:, None] + lam[None, :])
        return self.g @ y @ self.g.conj().T

    def scaled_dirs(self, dx, dz):
        return (self.ginv @ dx @ self.ginv.conj().T, self.g.conj().T @ dz @ self.g)

    def max_step(self, dx, dz):
        dxs, dzs = self.scaled_dirs(dx, dz)
        il = 1 / np.sqrt(self.lam)
        return (_max_step_mat(il[:, None] * dxs * il[None, :]),
                _max_step_mat(il[:, None] * dzs * il[None, :]))


def _psd_step(x, dx, alpha):
    """``x + alpha dx``, shortening ``alpha`` if rounding leaves the cone interior."""
    for _ in range(30):
        out = x + alpha * dx
        out = (out + out.conj().T) / 2
        try:
            np.linalg.cholesky(out)
            return out
        except np.linalg.LinAlgError:
            alpha *= 0.8
    return x


def _max_step_mat(m):
    m = (m + m.conj().T) / 2
    ev = np.linalg.eigvalsh(m)[0]
    return np.inf if ev >= 0 else -1.0 / ev


def _max_step_vec(v, dv):
    neg = dv < 0
    if not np.any(neg):
        return np.inf
    return float(np.min(-v[neg] / dv[neg]))


def _rows_norm(a):
    if sp.issparse(a):
        return np.sqrt(np.asarray(a.multiply(a).sum(axis=1)).ravel())
    return np.linalg.norm(a, axis=1)


def solve(problem: ConicProblem, tol: float = 1e-8, max_iter: int = 100,
          verbose: bool = False) -> SolveReport:
    """Primal-dual interior-point solve.

    ``tol`` bounds the duality gap relative to ``max(1, |pobj|, |dobj|)`` and the
    relative primal/dual residuals.
    """
    if tol < 1e-9:
        raise ValueError("tol must be at least 1e-9")
    t0 = time.perf_counter()
    sign = 1.0 if problem.sense == "min" else -1.0
    blocks = problem.blocks
    m = problem.num_rows

    # row equilibration
    rn = np.zeros(m)
    for b in blocks:
        if b.name in problem.a:
            rn += _rows_norm(problem.a[b.name]) ** 2
    rn = np.sqrt(rn)
    rn[rn == 0] = 1.0
    dscale = sp.diags(1 / rn)
    amat = {}
    for b in blocks:
        if b.name in problem.a:
            a = problem.a[b.name]
            amat[b.name] = (dscale @ a).tocsr() if sp.issparse(a) else a / rn[:, None]
    bvec = problem.rhs / rn
    cvec = {b.name: sign * problem.c[b.name] for b in blocks}

    def a_t(name, y):
        return amat[name].T @ y if name in amat else np.zeros(problem.block(name).dim)

    # starting point
    normb = np.linalg.norm(bvec)
    state = {}
    for b in blocks:
        an = _rows_norm(amat[b.name]) if b.name in amat else np.zeros(1)
        n = b.side if b.kind == "psd" else b.size
        cn = np.linalg.norm(cvec[b.name])
        xi = max(10.0, math.sqrt(n), n * np.max((1 + np.abs(bvec)) / (1 + an)) if an.size else 1.0)
        eta = max(10.0, math.sqrt(n), float(np.max(an)) if an.size else 0.0, cn) / 4
        if b.kind == "psd":
            dtype = complex if b.complex else float
            state[b.name] = _PsdState(b, xi * np.eye(n, dtype=dtype), eta * np.eye(n, dtype=dtype))
        else:
            state[b.name] = [xi * np.ones(n), eta * np.ones(n)]
    y = np.zeros(m)
    nu = sum((b.side if b.kind == "psd" else b.size) for b in blocks)

    status, detail = MAX_ITER, ""
    it = 0
    pinf = dinf = relgap = np.inf
    pobj = dobj = np.nan
    for it in range(max_iter + 1):
        xc, zc = {}, {}
        for b in blocks:
            st = state[b.name]
            if b.kind == "psd":
                xc[b.name] = b.to_coords(st.x)
                zc[b.name] = b.to_coords(st.z)
            else:
                xc[b.name], zc[b.name] = st
        ax = sum((amat[n] @ xc[n] for n in amat), np.zeros(m))
        rp = bvec - ax
        rd = {b.name: cvec[b.name] - a_t(b.name, y) - zc[b.name] for b in blocks}
        pobj = float(sum(cvec[n] @ xc[n] for n in xc))
        dobj = float(bvec @ y)
        xz = float(sum(xc[n] @ zc[n] for n in xc))
        mu = xz / nu
        pinf = np.linalg.norm(rp) / (1 + normb)
        dinf = math.sqrt(sum(np.sum(r**2) for r in rd.values())) / (
            1 + math.sqrt(sum(np.sum(c**2) for c in cvec.values())))
        relgap = abs(pobj - dobj) / max(1.0, abs(pobj), abs(dobj))
        if verbose:
            log.info("it %3d pobj %+.9e dobj %+.9e gap %.2e pinf %.2e dinf %.2e mu %.2e",
                     it, pobj, dobj, relgap, pinf, dinf, mu)
        if not all(np.isfinite([pobj, dobj, pinf, dinf])):
            status, detail = NUMERICAL_TROUBLE, "non-finite iterate"
            break
        if relgap <= tol and pinf <= tol and dinf <= tol:
            status = OPTIMAL
            break
        # infeasibility certificates
        aty_z = math.sqrt(sum(np.sum((cvec[n] - rd[n]) ** 2) for n in rd))
        if dobj > 0 and aty_z / dobj < 1e-9 and dobj > 1e6:
            status, detail = INFEASIBLE, "primal infeasible (dual ray)"
            break
        axn = np.linalg.norm(ax)
        if pobj < 0 and axn / -pobj < 1e-9 and -pobj > 1e6:
            status, detail = INFEASIBLE, "dual infeasible (primal ray)"
            break
        if it == max_iter:
            break

        try:
            # scaling and Schur complement
            kmat = {}
            for b in blocks:
                st = state[b.name]
                if b.kind == "psd":
                    st.scale()
                    if b.name in amat:
                        kmat[b.name] = b.schur_operator(st.w)
                else:
                    kmat[b.name] = st[0] / st[1]
            schur = np.zeros((m, m))
            for name, a in amat.items():
                k = kmat[name]
                if k.ndim == 1:
                    if sp.issparse(a):
                        schur += (a.multiply(k[None, :]) @ a.T).toarray()
                    else:
                        schur += (a * k[None, :]) @ a.T
                else:
                    if sp.issparse(a):
                        ak = np.asarray(a @ k)
                        schur += np.asarray(a @ ak.T)
                    else:
                        schur += a @ k @ a.T
            schur = (schur + schur.T) / 2
            scale = max(1.0, float(np.max(np.abs(np.diag(schur)))))
            # near the boundary the Schur matrix loses definiteness in floating point;
            # escalate the diagonal shift before giving up
            for reg in (1e-14, 1e-12, 1e-10, 1e-8):
                try:
                    chol = sla.cho_factor(schur + reg * scale * np.eye(m), lower=True,
                                          check_finite=False)
                    break
                except (np.linalg.LinAlgError, sla.LinAlgError):
                    if reg == 1e-8:
                        raise
        except (np.linalg.LinAlgError, sla.LinAlgError) as exc:
            status, detail = NUMERICAL_TROUBLE, str(exc)
            break

        def schur_apply(v):
            out = np.zeros(m)
            for b in blocks:
                if b.name not in amat:
                    continue
                atv = amat[b.name].T @ v
                if b.kind == "psd":
                    kv = b.to_coords(state[b.name].k_apply(b.to_mat(atv)))
                else:
                    kv = kmat[b.name] * atv
                out += amat[b.name] @ kv
            return out

        def direction(rhs_c):
            rcoords = {}
            for b in blocks:
                st = state[b.name]
                rcoords[b.name] = b.to_coords(st.rc(rhs_c[b.name])) if b.kind == "psd" else rhs_c[b.name]
            kr = {}
            for b in blocks:
                st = state[b.name]
                if b.kind == "psd":
                    kr[b.name] = b.to_coords(st.k_apply(b.to_mat(rd[b.name])))
                else:
                    kr[b.name] = kmat[b.name] * rd[b.name]
            rhs_y = rp - sum((amat[n] @ (rcoords[n] - kr[n]) for n in amat), np.zeros(m))
            dy = sla.cho_solve(chol, rhs_y, check_finite=False)
            # refinement against A K A^T applied blockwise, which avoids the
            # cancellation present in the assembled Schur matrix
            for _ in range(2):
                res = rhs_y - schur_apply(dy)
                dy = dy + sla.cho_solve(chol, res, check_finite=False)
            dx, dz = {}, {}
            for b in blocks:
                st = state[b.name]
                dzc = rd[b.name] - a_t(b.name, dy)
                if b.kind == "psd":
                    dzm = b.to_mat(dzc)
                    dx[b.name] = b.to_mat(rcoords[b.name]) - st.k_apply(dzm)
                    dz[b.name] = dzm
                else:
                    dx[b.name] = rcoords[b.name] - kmat[b.name] * dzc
                    dz[b.name] = dzc
            return dx, dz, dy

        def step_lengths(dx, dz):
            ap = ad = np.inf
            for b in blocks:
                st = state[b.name]
                if b.kind == "psd":
                    sp_, sd_ = st.max_step(dx[b.name], dz[b.name])
                else:
                    sp_, sd_ = _max_step_vec(st[0], dx[b.name]), _max_step_vec(st[1], dz[b.name])
                ap, ad = min(ap, sp_), min(ad, sd_)
            return ap, ad

        # predictor
        rhs_aff = {}
        for b in blocks:
            st = state[b.name]
            if b.kind == "psd":
                rhs_aff[b.name] = -np.diag(st.lam**2).astype(st.x.dtype)
            else:
                rhs_aff[b.name] = -st[0]
        dxa, dza, _ = direction(rhs_aff)
        apa, ada = step_lengths(dxa, dza)
        apa, ada = min(1.0, apa), min(1.0, ada)
        xz_aff = 0.0
        for b in blocks:
            st = state[b.name]
            if b.kind == "psd":
                xa = st.x + apa * dxa[b.name]
                za = st.z + ada * dza[b.name]
                xz_aff += float(np.real(np.sum(xa * za.conj())))
            else:
                xz_aff += float((st[0] + apa * dxa[b.name]) @ (st[1] + ada * dza[b.name]))
        sigma = min(1.0, max(0.0, (xz_aff / xz) ** 3))

        # corrector
        rhs_cor = {}
        for b in blocks:
            st = state[b.name]
            if b.kind == "psd":
                dxs, dzs = st.scaled_dirs(dxa[b.name], dza[b.name])
                prod = (dxs @ dzs + dzs @ dxs) / 2
                rhs_cor[b.name] = sigma * mu * np.eye(b.side) - np.diag(st.lam**2) - prod
            else:
                x, z = st
                rhs_cor[b.name] = (sigma * mu - x * z - dxa[b.name] * dza[b.name]) / z
        # LP blocks: direction() expects (dx + K dz) directly, PSD blocks the scaled rhs
        dx, dz, dy = direction(rhs_cor)
        ap, ad = step_lengths(dx, dz)
        gamma = 0.9 + 0.09 * min(apa, ada)
        ap, ad = min(1.0, gamma * ap), min(1.0, gamma * ad)
        for b in blocks:
            st = state[b.name]
            if b.kind == "psd":
                st.x = _psd_step(st.x, dx[b.name], ap)
                st.z = _psd_step(st.z, dz[b.name], ad)
            else:
                st[0] = st[0] + ap * dx[b.name]
                st[1] = st[1] + ad * dz[b.name]
        y = y + ad * dy
        if ap < 1e-10 and ad < 1e-10:
            status, detail = NUMERICAL_TROUBLE, "step length collapsed"
            break

    xs, zs = {}, {}
    for b in blocks:
        st = state[b.name]
        if b.kind == "psd":
            xs[b.name], zs[b.name] = st.x.copy(), st.z.copy()
        else:
            xs[b.name], zs[b.name] = st[0].copy(), st[1].copy()
    # report dual variables for the problem as stated: min -> z = c - A^T y, max -> z = A^T y - c
    y_out = sign * y / rn
    report = SolveReport(
        status=status,
        primal_value=sign * pobj,
        dual_value=sign * dobj,
        gap=relgap,
        iterations=it,
        primal_infeasibility=pinf,
        dual_infeasibility=dinf,
        x=xs,
        z=zs,
        y=y_out,
        seconds=time.perf_counter() - t0,
        detail=detail,
    )
    report.meta_dims = {b.name: b.dims for b in blocks if b.kind == "psd"}
    return report


# --------------------------------------------------------------------------
# transformations and text dump


def _embed(mat):
    mat = np.asarray(mat)
    return np.block([[mat.real, -mat.imag], [mat.imag, mat.real]])


def embed_real(problem: ConicProblem) -> ConicProblem:
    """Replace complex Hermitian blocks by real symmetric blocks of doubled side.

    ``X -> [[Re X, -Im X], [Im X, Re X]]`` preserves semidefiniteness; functionals
    are mapped with a factor 1/2 so their values are unchanged.
    """
    blocks, c, a = [], {}, {}
    for b in problem.blocks:
        if b.kind == "psd" and b.complex:
            nb = PsdBlock(b.name, (2 * b.side,), complex=False)
            blocks.append(nb)
            c[b.name] = nb.to_coords(_embed(b.to_mat(problem.c[b.name])) / 2)
            if b.name in problem.a:
                dense = problem.a[b.name]
                dense = dense.toarray() if sp.issparse(dense) else np.asarray(dense)
                mats = b.to_mat(dense)
                emb = np.array([_embed(x) / 2 for x in mats])
                a[b.name] = nb.to_coords(emb)
        else:
            blocks.append(b)
            c[b.name] = problem.c[b.name]
            if b.name in problem.a:
                a[b.name] = problem.a[b.name]
    return ConicProblem(blocks, c, a, problem.rhs.copy(), problem.sense, dict(problem.groups),
                        problem.inequality_rows, dict(problem.meta, embedded=True))


def unembed(mat) -> np.ndarray:
    """Recover the Hermitian matrix from a (possibly non-exact) real embedding."""
    mat = np.asarray(mat)
    n = mat.shape[0] // 2
    re = (mat[:n, :n] + mat[n:, n:]) / 2
    im = (mat[n:, :n] - mat[:n, n:]) / 2
    return re + 1j * im


def dump_conic(problem: ConicProblem, path) -> None:
    """Write a problem in the ``CONIC v1`` sparse text format.

    Lines: ``block psd <name> <side> complex|real`` or ``block nonneg <name> <size>``,
    ``sense min|max``, ``rhs <row> <value>``, objective entries
    ``obj <block> <i> <j> <re> <im>`` and constraint entries
    ``con <row> <block> <i> <j> <re> <im>``; PSD entries are the upper triangle
    of the operator form (0-based), nonneg entries use ``j = 0``.
    """
    lines = ["CONIC v1", f"sense {problem.sense}"]
    for b in problem.blocks:
        if b.kind == "psd":
            lines.append(f"block psd {b.name} {b.side} {'complex' if b.complex else 'real'} "
                         + " ".join(str(d) for d in b.dims))
        else:
            lines.append(f"block nonneg {b.name} {b.size}")
    for row, val in enumerate(problem.rhs):
        lines.append(f"rhs {row} {float(val)!r}")

    def entries(b, vec):
        if b.kind == "psd":
            mat = b.to_mat(vec)
            iu, ju = np.triu_indices(b.side)
            vals = mat[iu, ju]
            nz = np.abs(vals) > 1e-15
            for i, j, v in zip(iu[nz], ju[nz], vals[nz]):
                yield int(i), int(j), float(np.real(v)), float(np.imag(v))
        else:
            for i in np.nonzero(vec)[0]:
                yield int(i), 0, float(vec[i]), 0.0

    for b in problem.blocks:
        for i, j, re, im in entries(b, problem.c[b.name]):
            lines.append(f"obj {b.name} {i} {j} {re!r} {im!r}")
    for b in problem.blocks:
        if b.name not in problem.a:
            continue
        a = problem.a[b.name]
        a = a.toarray() if sp.issparse(a) else np.asarray(a)
        for row in range(problem.num_rows):
            if not np.any(a[row]):
                continue
            for i, j, re, im in entries(b, a[row]):
                lines.append(f"con {row} {b.name} {i} {j} {re!r} {im!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_conic(path) -> ConicProblem:
    """Read a ``CONIC v1`` file back (blocks get default bases)."""
    with open(path) as fh:
        lines = [ln.split() for ln in fh if ln.strip()]
    if lines[0] != ["CONIC", "v1"]:
        raise ValueError("not a CONIC v1 file")
    sense = "min"
    blocks, rhs, obj, con = [], {}, {}, {}
    for tok in lines[1:]:
        if tok[0] == "sense":
            sense = tok[1]
        elif tok[0] == "block":
            if tok[1] == "psd":
                dims = tuple(int(x) for x in tok[5:]) or (int(tok[3]),)
                blocks.append(PsdBlock(tok[2], dims, complex=tok[4] == "complex"))
            else:
                blocks.append(NonnegBlock(tok[2], int(tok[3])))
        elif tok[0] == "rhs":
            rhs[int(tok[1])] = float(tok[2])
        elif tok[0] == "obj":
            obj.setdefault(tok[1], []).append((int(tok[2]), int(tok[3]), complex(float(tok[4]), float(tok[5]))))
        elif tok[0] == "con":
            con.setdefault(tok[2], {}).setdefault(int(tok[1]), []).append(
                (int(tok[3]), int(tok[4]), complex(float(tok[5]), float(tok[6]))))
    m = max(rhs) + 1 if rhs else 0
    rhs_vec = np.array([rhs.get(k, 0.0) for k in range(m)])

    def vec_of(b, ents):
        if b.kind == "psd":
            mat = np.zeros((b.side, b.side), dtype=complex if b.complex else float)
            for i, j, v in ents:
                mat[i, j] = v if b.complex else v.real
                if i != j:
                    mat[j, i] = np.conj(v) if b.complex else v.real
            return b.to_coords(mat)
        vec = np.zeros(b.size)
        for i, _, v in ents:
            vec[i] = v.real
        return vec

    c, a = {}, {}
    for b in blocks:
        c[b.name] = vec_of(b, obj.get(b.name, []))
        if b.name in con:
            rows = np.zeros((m, b.dim))
            for row, ents in con[b.name].items():
                rows[row] = vec_of(b, ents)
            a[b.name] = rows
    return ConicProblem(blocks, c, a, rhs_vec, sense)
