"""Discrete phase space for odd prime dimensions.

Weyl operators ``T_(a1,a2) = tau^(-a1 a2) Z^a1 X^a2`` with ``tau = exp((d+1) pi i / d)``,
phase-point operators ``A^u = T_u A^0 T_u^dagger`` and discrete Wigner functions of
states and channels.  Multi-site points are flattened with site 1 most significant
and ``a1 * d + a2`` inside a site.
"""
from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .matops import HermitianOperator, product_coords


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % k for k in range(2, int(n**0.5) + 1))


def check_odd_prime(d: int) -> int:
    d = int(d)
    if d % 2 == 0 or not is_prime(d):
        raise ValueError(f"phase-space construction needs an odd prime dimension, got d={d}")
    return d


@dataclass(frozen=True)
class PhasePoint:
    d: int
    components: tuple[tuple[int, int], ...]

    def __post_init__(self):
        check_odd_prime(self.d)
        comps = tuple((int(a) % self.d, int(b) % self.d) for a, b in self.components)
        if not comps:
            raise ValueError("a phase point needs at least one site")
        object.__setattr__(self, "components", comps)

    @classmethod
    def single(cls, d: int, a1: int, a2: int) -> "PhasePoint":
        return cls(d, ((a1, a2),))

    @property
    def sites(self) -> int:
        return len(self.components)

    @property
    def index(self) -> int:
        out = 0
        for a1, a2 in self.components:
            out = out * self.d**2 + a1 * self.d + a2
        return out

    @classmethod
    def from_index(cls, d: int, sites: int, index: int) -> "PhasePoint":
        comps = []
        for _ in range(sites):
            index, rem = divmod(index, d * d)
            comps.append(divmod(rem, d))
        return cls(d, tuple(reversed(comps)))

    def __add__(self, other: "PhasePoint") -> "PhasePoint":
        """Direct sum ``u (+) v`` of points on disjoint site groups."""
        if self.d != other.d:
            raise ValueError("phase points live in different dimensions")
        return PhasePoint(self.d, self.components + other.components)


def shift_clock(d: int) -> tuple[np.ndarray, np.ndarray]:
    """Boost ``X|j> = |j+1>`` and clock ``Z|j> = w^j |j>``."""
    x = np.roll(np.eye(d), 1, axis=0).astype(complex)
    z = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
    return x, z


def weyl_operator(u: PhasePoint | tuple[int, int], d: int | None = None) -> np.ndarray:
    if isinstance(u, PhasePoint):
        if u.sites != 1:
            raise ValueError("weyl_operator expects a single-site point")
        d = u.d
        a1, a2 = u.components[0]
    else:
        d = check_odd_prime(d)
        a1, a2 = (int(x) % d for x in u)
    x, z = shift_clock(d)
    tau = np.exp((d + 1) * np.pi * 1j / d)
    return tau ** (-a1 * a2) * np.linalg.matrix_power(z, a1) @ np.linalg.matrix_power(x, a2)


@functools.lru_cache(maxsize=None)
def _single_site_operators(d: int) -> np.ndarray:
    d = check_odd_prime(d)
    a0 = sum(weyl_operator((a1, a2), d) for a1 in range(d) for a2 in range(d)) / d
    out = np.empty((d * d, d, d), dtype=complex)
    for a1 in range(d):
        for a2 in range(d):
            t = weyl_operator((a1, a2), d)
            out[a1 * d + a2] = t @ a0 @ t.conj().T
    out = (out + out.conj().transpose(0, 2, 1)) / 2
    out.flags.writeable = False
    return out


def single_site_operators(d: int) -> np.ndarray:
    """All ``d^2`` single-site phase-point operators, shape ``(d*d, d, d)``."""
    return _single_site_operators(int(d))


def phase_point_operator(u: PhasePoint) -> HermitianOperator:
    ops = single_site_operators(u.d)
    mat = np.ones((1, 1), dtype=complex)
    for a1, a2 in u.components:
        mat = np.kron(mat, ops[a1 * u.d + a2])
    return HermitianOperator(mat, (u.d,) * u.sites)


class PhasePointBasis:
    """The family ``{A^u}`` over ``sites`` copies of ``Z_d x Z_d``.

    Composite operators are tensor products of cached single-site ones; the
    full array is only materialized on request.
    """

    def __init__(self, d: int, sites: int = 1):
        self.d = check_odd_prime(d)
        if sites < 1:
            raise ValueError("sites must be positive")
        self.sites = int(sites)
        self.site_operators = single_site_operators(self.d)

    def __len__(self):
        return self.d ** (2 * self.sites)

    @property
    def dims(self) -> tuple[int, ...]:
        return (self.d,) * self.sites

    def points(self):
        for k in range(len(self)):
            yield PhasePoint.from_index(self.d, self.sites, k)

    def operator(self, u: PhasePoint | int) -> HermitianOperator:
        if isinstance(u, int):
            u = PhasePoint.from_index(self.d, self.sites, u)
        if u.d != self.d or u.sites != self.sites:
            raise ValueError("phase point does not belong to this basis")
        return phase_point_operator(u)

    def operators(self) -> np.ndarray:
        """Dense array of every ``A^u``, shape ``(d^(2 sites), d^sites, d^sites)``."""
        out = self.site_operators
        for _ in range(self.sites - 1):
            out = np.einsum("aij,bkl->abikjl", out, self.site_operators)
            m, D = out.shape[0] * out.shape[1], out.shape[2] * out.shape[3]
            out = out.reshape(m, D, D)
        return out

    def coefficients(self, h) -> np.ndarray:
        """``tr[A^u H]`` for every point ``u`` (flat, standard point order)."""
        h = h.mat if isinstance(h, HermitianOperator) else np.asarray(h)
        return product_coords(h, [self.site_operators] * self.sites)


@dataclass(frozen=True)
class WignerFunction:
    d: int
    sites: int
    values: np.ndarray

    def __getitem__(self, u: PhasePoint) -> float:
        return float(self.values[u.index])

    def table(self) -> np.ndarray:
        """Values reshaped to ``(d, d) * sites`` with axes ``(a1, a2)`` per site."""
        return self.values.reshape((self.d, self.d) * self.sites)

    def total(self) -> float:
        return float(self.values.sum())

    def min(self) -> float:
        return float(self.values.min())


def wigner_of_state(rho, basis: PhasePointBasis | None = None) -> WignerFunction:
    """``W(u) = tr[A^u rho] / d^sites``."""
    if not isinstance(rho, HermitianOperator):
        rho = HermitianOperator.from_matrix(rho)
    if basis is None:
        d = rho.dims[0]
        basis = PhasePointBasis(d, len(rho.dims))
    if rho.shape[0] != basis.d**basis.sites:
        raise ValueError(f"operator of side {rho.shape[0]} does not match basis dims {basis.dims}")
    vals = basis.coefficients(rho).real / basis.d**basis.sites
    return WignerFunction(basis.d, basis.sites, vals)


def reconstruct(w: WignerFunction) -> np.ndarray:
    """``H = sum_u W_H(u) A^u``."""
    basis = PhasePointBasis(w.d, w.sites)
    return np.einsum("a,aij->ij", w.values, basis.operators())


def triple_product_phase(r: PhasePoint, w: PhasePoint, v: PhasePoint) -> complex:
    """Closed form of ``tr[A^r A^w A^v]`` for single-site points."""
    if not (r.d == w.d == v.d):
        raise ValueError("points must share the same dimension")
    if r.sites != 1 or w.sites != 1 or v.sites != 1:
        raise ValueError("triple_product_phase takes single-site points")
    (r1, r2), (w1, w2), (v1, v2) = r.components[0], w.components[0], v.components[0]
    f = r1 * (v2 - w2) + w1 * (r2 - v2) + v1 * (w2 - r2)
    return complex(np.exp(4j * np.pi * (f % r.d) / r.d))


def triple_product_table(d: int) -> np.ndarray:
    """``tr[A^r A^w A^v]`` for all single-site triples via the closed form, shape ``(d^2,)*3``."""
    d = check_odd_prime(d)
    a1 = np.repeat(np.arange(d), d)
    a2 = np.tile(np.arange(d), d)
    r1, w1, v1 = np.ix_(a1, a1, a1)
    r2, w2, v2 = np.ix_(a2, a2, a2)
    f = r1 * (v2 - w2) + w1 * (r2 - v2) + v1 * (w2 - r2)
    return np.exp(4j * np.pi * np.mod(f, d) / d)


class WignerRows:
    """Functionals ``J -> tr[((A^u)^T (x) A^v) J]`` over all input points ``u``
    (``n_in`` sites) and output points ``v`` (one site).

    The channel normalization ``1/d`` is omitted; only signs matter as constraints.
    """

    def __init__(self, n_in: int, d: int):
        self.d = check_odd_prime(d)
        if n_in < 1:
            raise ValueError("n_in must be positive")
        self.n_in = int(n_in)
        ops = single_site_operators(self.d)
        self.site_bases: list[np.ndarray] = [ops.transpose(0, 2, 1)] * self.n_in + [ops]

    def __len__(self):
        return self.d ** (2 * (self.n_in + 1))

    @property
    def dims(self) -> tuple[int, ...]:
        return (self.d,) * (self.n_in + 1)

    def split(self, k: int) -> tuple[PhasePoint, PhasePoint]:
        """Input point ``u`` and output point ``v`` of row ``k``."""
        u_idx, v_idx = divmod(k, self.d**2)
        return (PhasePoint.from_index(self.d, self.n_in, u_idx),
                PhasePoint.from_index(self.d, 1, v_idx))

    def __getitem__(self, k: int) -> np.ndarray:
        if not 0 <= k < len(self):
            raise IndexError(k)
        digits = []
        rest = k
        for _ in range(self.n_in + 1):
            rest, rem = divmod(rest, self.d**2)
            digits.append(rem)
        digits.reverse()
        mat = np.ones((1, 1), dtype=complex)
        for basis, a in zip(self.site_bases, digits):
            mat = np.kron(mat, basis[a])
        return mat

    def __iter__(self):
        for k in range(len(self)):
            yield self[k]

    def evaluate(self, choi) -> np.ndarray:
        """All row values on a Choi operator, in row order."""
        choi = choi.mat if isinstance(choi, HermitianOperator) else np.asarray(choi)
        return product_coords(choi, self.site_bases).real


def wigner_constraint_rows(n_in: int, d: int) -> WignerRows:
    return WignerRows(n_in, d)


def channel_wigner(choi, d: int, n_in: int = 1) -> np.ndarray:
    """Discrete Wigner function ``W(v|u)`` of a channel, shape ``(d^(2 n_in), d^2)``."""
    vals = WignerRows(n_in, d).evaluate(choi) / d
    return vals.reshape(d ** (2 * n_in), d * d)


def points_grid(d: int, sites: int = 1) -> Sequence[PhasePoint]:
    return [PhasePoint(d, tuple(c)) for c in itertools.product(
        itertools.product(range(d), range(d)), repeat=sites)]
