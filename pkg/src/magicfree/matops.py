"""Dense Hermitian linear algebra with tensor-factor bookkeeping.

Sites are numbered from 1, the leftmost tensor factor being site 1.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

HERMITIAN_ATOL = 1e-12


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    """Hermitian matrix together with the dimensions of its tensor factors.

    Construction symmetrizes ``(M + M^dagger)/2`` and rejects input whose
    anti-Hermitian part exceeds ``HERMITIAN_ATOL``.
    """

    mat: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        mat = np.asarray(self.mat)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {mat.shape}")
        dims = tuple(int(x) for x in self.dims)
        if any(x < 1 for x in dims):
            raise ValueError(f"site dimensions must be positive, got {dims}")
        if math.prod(dims) != mat.shape[0]:
            raise ValueError(f"dims {dims} do not match matrix side {mat.shape[0]}")
        asym = np.abs(mat - mat.conj().T).max() if mat.size else 0.0
        if asym > HERMITIAN_ATOL:
            raise ValueError(f"matrix is not Hermitian (max asymmetry {asym:.3e})")
        mat = (mat + mat.conj().T) / 2
        if np.iscomplexobj(mat) and mat.size and np.abs(mat.imag).max() == 0:
            mat = mat.real.copy()
        mat.flags.writeable = False
        object.__setattr__(self, "mat", mat)
        object.__setattr__(self, "dims", dims)

    @classmethod
    def from_matrix(cls, mat, dims=None) -> "HermitianOperator":
        mat = np.asarray(mat)
        return cls(mat, (mat.shape[0],) if dims is None else tuple(dims))

    @classmethod
    def identity(cls, dims) -> "HermitianOperator":
        dims = tuple(dims)
        return cls(np.eye(math.prod(dims)), dims)

    @property
    def shape(self):
        return self.mat.shape

    @property
    def num_sites(self) -> int:
        return len(self.dims)

    def __array__(self, dtype=None, copy=None):
        return self.mat if dtype is None else self.mat.astype(dtype)

    def _check_dims(self, other: "HermitianOperator"):
        if self.dims != other.dims:
            raise ValueError(f"dims mismatch: {self.dims} vs {other.dims}")

    def __add__(self, other):
        if not isinstance(other, HermitianOperator):
            return NotImplemented
        self._check_dims(other)
        return HermitianOperator(self.mat + other.mat, self.dims)

    def __sub__(self, other):
        if not isinstance(other, HermitianOperator):
            return NotImplemented
        self._check_dims(other)
        return HermitianOperator(self.mat - other.mat, self.dims)

    def __neg__(self):
        return HermitianOperator(-self.mat, self.dims)

    def __mul__(self, scalar):
        if np.iscomplexobj(scalar) and np.imag(scalar) != 0:
            raise ValueError("only real scalars preserve Hermiticity")
        return HermitianOperator(self.mat * float(np.real(scalar)), self.dims)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / float(scalar))

    def trace(self) -> float:
        return float(np.trace(self.mat).real)

    def eigvalsh(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.mat)

    def expect(self, other) -> float:
        """Real inner product ``tr[self @ other]`` for Hermitian ``other``."""
        other = np.asarray(other)
        return float(np.real(np.sum(self.mat * other.T)))

    def allclose(self, other, atol=1e-10) -> bool:
        other = other.mat if isinstance(other, HermitianOperator) else np.asarray(other)
        return self.mat.shape == other.shape and bool(np.abs(self.mat - other).max() <= atol)

    def __repr__(self):
        return f"HermitianOperator(dims={self.dims}, trace={self.trace():.6g})"


@dataclass(frozen=True)
class SitePermutation:
    """Permutation of ``n`` tensor slots, stored in one-line form.

    ``images[k-1]`` is the slot that the content of slot ``k`` is moved to.
    """

    images: tuple[int, ...]

    def __post_init__(self):
        images = tuple(int(x) for x in self.images)
        if sorted(images) != list(range(1, len(images) + 1)):
            raise ValueError(f"{images} is not a bijection on 1..{len(images)}")
        object.__setattr__(self, "images", images)

    @property
    def n(self) -> int:
        return len(self.images)

    @classmethod
    def identity(cls, n: int) -> "SitePermutation":
        return cls(tuple(range(1, n + 1)))

    @classmethod
    def from_cycles(cls, n: int, *cycles: Sequence[int]) -> "SitePermutation":
        """Build from disjoint cycles, e.g. ``from_cycles(3, (1, 2, 3))``."""
        images = list(range(1, n + 1))
        seen = set()
        for cyc in cycles:
            cyc = [int(c) for c in cyc]
            if any(c < 1 or c > n for c in cyc) or seen.intersection(cyc):
                raise ValueError(f"invalid cycle {cyc} for n={n}")
            seen.update(cyc)
            for a, b in zip(cyc, cyc[1:] + cyc[:1]):
                images[a - 1] = b
        return cls(tuple(images))

    def __call__(self, k: int) -> int:
        return self.images[k - 1]

    def __mul__(self, other: "SitePermutation") -> "SitePermutation":
        """Composition ``self o other`` (apply ``other`` first)."""
        if self.n != other.n:
            raise ValueError("permutations act on different numbers of sites")
        return SitePermutation(tuple(self(other(k)) for k in range(1, self.n + 1)))

    def inverse(self) -> "SitePermutation":
        inv = [0] * self.n
        for k, img in enumerate(self.images, start=1):
            inv[img - 1] = k
        return SitePermutation(tuple(inv))

    @classmethod
    def all(cls, n: int) -> list["SitePermutation"]:
        return [cls(tuple(x)) for x in itertools.permutations(range(1, n + 1))]


def _unwrap(x, dims=None):
    if isinstance(x, HermitianOperator):
        return x.mat, x.dims, True
    x = np.asarray(x)
    if dims is None:
        dims = (x.shape[0],)
    return x, tuple(dims), False


def _wrap(mat, dims, as_operator):
    return HermitianOperator(mat, dims) if as_operator else mat


def _zero_based(sites: Iterable[int], num: int) -> list[int]:
    out = []
    for s in sites:
        s = int(s)
        if s < 1 or s > num:
            raise ValueError(f"site index {s} out of range 1..{num}")
        out.append(s - 1)
    if len(set(out)) != len(out):
        raise ValueError(f"repeated site index in {list(sites)}")
    return out


def kron(*ops):
    """Kronecker product; ``HermitianOperator`` inputs concatenate their dims."""
    if not ops:
        raise ValueError("kron needs at least one operand")
    if all(isinstance(x, HermitianOperator) for x in ops):
        mat = ops[0].mat
        for x in ops[1:]:
            mat = np.kron(mat, x.mat)
        return HermitianOperator(mat, sum((x.dims for x in ops), ()))
    mat = np.asarray(ops[0])
    for x in ops[1:]:
        mat = np.kron(mat, np.asarray(x))
    return mat


def partial_trace(x, keep: Iterable[int], dims=None):
    """Trace out every site not in ``keep``; kept sites stay in their order."""
    mat, dims, wrap = _unwrap(x, dims)
    keep = sorted(_zero_based(keep, len(dims)))
    ns = len(dims)
    t = mat.reshape(dims + dims)
    # contract traced sites from the highest index down so axis numbers stay valid
    for s in sorted(set(range(ns)) - set(keep), reverse=True):
        cur = t.ndim // 2
        t = np.trace(t, axis1=s, axis2=s + cur)
    kdims = tuple(dims[s] for s in keep)
    out = t.reshape(math.prod(kdims), math.prod(kdims))
    return _wrap(out, kdims, wrap)


def partial_transpose(x, sites: Iterable[int], dims=None):
    """Transpose the listed tensor factors only."""
    mat, dims, wrap = _unwrap(x, dims)
    sites = _zero_based(sites, len(dims))
    ns = len(dims)
    t = mat.reshape(dims + dims)
    perm = list(range(2 * ns))
    for s in sites:
        perm[s], perm[s + ns] = perm[s + ns], perm[s]
    out = t.transpose(perm).reshape(mat.shape)
    return _wrap(out, dims, wrap)


def permutation_operator(perm: SitePermutation, d: int) -> np.ndarray:
    """Unitary moving the ket in slot ``k`` to slot ``perm(k)``."""
    n = perm.n
    idx = np.arange(d**n).reshape((d,) * n)
    # new[..., slot perm(k), ...] = old[..., slot k, ...]
    axes = [perm.inverse()(k) - 1 for k in range(1, n + 1)]
    new_idx = idx.transpose(axes).reshape(-1)
    out = np.zeros((d**n, d**n))
    out[np.arange(d**n), new_idx] = 1.0
    return out


def symmetric_dimension(n: int, d: int) -> int:
    return math.comb(n + d - 1, n)


def symmetric_projector(n: int, d: int) -> HermitianOperator:
    """Projector onto the symmetric subspace of ``n`` copies of ``C^d``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    # average over all slot permutations, done on index arrays to avoid n! dense products
    dim = d**n
    idx = np.arange(dim).reshape((d,) * n)
    out = np.zeros((dim, dim))
    perms = list(itertools.permutations(range(n)))
    rows = np.arange(dim)
    for axes in perms:
        out[rows, idx.transpose(axes).reshape(-1)] += 1.0
    out /= len(perms)
    return HermitianOperator(out, (d,) * n)


def min_eigenvalue(x) -> float:
    mat, _, _ = _unwrap(x)
    return float(np.linalg.eigvalsh(mat)[0])


def haar_states(num: int, d: int, rng=None) -> np.ndarray:
    """``num`` Haar-random unit vectors in ``C^d`` as rows."""
    rng = np.random.default_rng(rng)
    v = rng.normal(size=(num, d)) + 1j * rng.normal(size=(num, d))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def ket_to_dm(psi) -> np.ndarray:
    psi = np.asarray(psi).reshape(-1)
    return np.outer(psi, psi.conj())


def choi_of_unitary(u) -> np.ndarray:
    """Choi matrix ``sum_ij |i><j| (x) U|i><j|U^dagger`` (input site first)."""
    u = np.asarray(u)
    d = u.shape[1]
    vec = np.zeros((d * u.shape[0],), dtype=complex)
    for i in range(d):
        vec += np.kron(np.eye(d)[i], u[:, i])
    return np.outer(vec, vec.conj())


def choi_of_map(channel, d_in: int) -> np.ndarray:
    """Choi matrix of a linear map given as a callable on ``d_in x d_in`` matrices."""
    blocks = []
    for i in range(d_in):
        for j in range(d_in):
            eij = np.zeros((d_in, d_in))
            eij[i, j] = 1.0
            blocks.append(np.kron(eij, np.asarray(channel(eij))))
    return sum(blocks)


def hermitian_unit_basis(n: int) -> np.ndarray:
    """Orthonormal basis of ``n x n`` Hermitian matrices built from matrix units."""
    out = []
    for k in range(n):
        e = np.zeros((n, n), dtype=complex)
        e[k, k] = 1
        out.append(e)
    s = 1 / np.sqrt(2)
    for k in range(n):
        for l in range(k + 1, n):
            e = np.zeros((n, n), dtype=complex)
            e[k, l] = e[l, k] = s
            out.append(e)
            e = np.zeros((n, n), dtype=complex)
            e[k, l] = 1j * s
            e[l, k] = -1j * s
            out.append(e)
    return np.array(out)


def symmetric_unit_basis(n: int) -> np.ndarray:
    """Orthonormal basis of real symmetric ``n x n`` matrices."""
    out = []
    for k in range(n):
        e = np.zeros((n, n))
        e[k, k] = 1
        out.append(e)
    s = 1 / np.sqrt(2)
    for k in range(n):
        for l in range(k + 1, n):
            e = np.zeros((n, n))
            e[k, l] = e[l, k] = s
            out.append(e)
    return np.array(out)


def product_coords(mat, site_bases: Sequence[np.ndarray]) -> np.ndarray:
    """Coefficients ``tr[(e1[a1] (x) ... (x) es[as]) @ mat]`` for all multi-indices.

    ``site_bases[k]`` has shape ``(m_k, d_k, d_k)``.  Output is flat, with the
    first site's index most significant.  Leading batch axes of ``mat`` are kept.
    """
    mat = np.asarray(mat)
    dims = [b.shape[1] for b in site_bases]
    ns = len(dims)
    batch = mat.shape[:-2]
    t = mat.reshape(batch + tuple(dims) * 2)
    nb = len(batch)
    # tr[E @ M] = sum_ij E[i, j] M[j, i]; contract (row of M, col of M) per site
    for k, basis in enumerate(site_bases):
        # axes of t: batch, [alpha_0..alpha_{k-1}], rows_k..rows_{ns-1}, cols_k..cols_{ns-1}
        r = nb + k
        c = nb + k + (ns - k)
        t = np.tensordot(t, basis, axes=([c, r], [1, 2]))
        t = np.moveaxis(t, -1, nb + k)
    return t.reshape(batch + (-1,))


def from_product_coords(coords, site_bases: Sequence[np.ndarray]) -> np.ndarray:
    """Inverse of :func:`product_coords` for orthonormal Hermitian site bases."""
    coords = np.asarray(coords)
    ms = [b.shape[0] for b in site_bases]
    dims = [b.shape[1] for b in site_bases]
    ns = len(dims)
    batch = coords.shape[:-1]
    nb = len(batch)
    t = coords.reshape(batch + tuple(ms))
    for k, basis in enumerate(site_bases):
        t = np.tensordot(t, basis, axes=([nb + k], [0]))
        t = np.moveaxis(t, [-2, -1], [nb + k, nb + ns + k])
        # axes now: batch, [rows done], [remaining alphas], ..., [cols done]
    # after all sites: batch, rows_0..rows_{ns-1}, cols_0..cols_{ns-1}
    side = math.prod(dims)
    return t.reshape(batch + (side, side))
