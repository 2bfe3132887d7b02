"""Multi-qubit Pauli operators, pure stabilizer states and stabilizer robustness.

Stabilizer states are enumerated exactly: every maximal isotropic subspace of
GF(2)^(2n) is listed once through its reduced row-echelon generator matrix, and
each of the ``2^n`` sign choices gives one state.  Pauli letters are ordered
``I, X, Y, Z = 0..3`` and qubit 1 is the most significant digit everywhere.
"""
from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .conic import ConicProblem, NonnegBlock, solve
from .matops import HermitianOperator

LETTERS = "IXYZ"
_SIGMA = np.array([[[1, 0], [0, 1]], [[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]],
                  dtype=complex)


@dataclass(frozen=True)
class PauliOperator:
    letters: str

    def __post_init__(self):
        if not self.letters or any(ch not in LETTERS for ch in self.letters):
            raise ValueError(f"invalid Pauli string {self.letters!r}")

    @property
    def n_qubits(self) -> int:
        return len(self.letters)

    @property
    def index(self) -> int:
        out = 0
        for ch in self.letters:
            out = 4 * out + LETTERS.index(ch)
        return out

    @classmethod
    def from_index(cls, n: int, index: int) -> "PauliOperator":
        digits = []
        for _ in range(n):
            index, r = divmod(index, 4)
            digits.append(LETTERS[r])
        return cls("".join(reversed(digits)))

    def matrix(self) -> np.ndarray:
        mat = np.ones((1, 1), dtype=complex)
        for ch in self.letters:
            mat = np.kron(mat, _SIGMA[LETTERS.index(ch)])
        return mat


def pauli_matrix(p: PauliOperator | str) -> HermitianOperator:
    if isinstance(p, str):
        p = PauliOperator(p)
    return HermitianOperator(p.matrix(), (2,) * p.n_qubits)


def all_paulis(n: int) -> np.ndarray:
    """Dense array of all ``4^n`` Pauli matrices in index order."""
    out = _SIGMA
    for _ in range(n - 1):
        out = np.einsum("aij,bkl->abikjl", out, _SIGMA).reshape(
            out.shape[0] * 4, out.shape[1] * 2, out.shape[2] * 2)
    return out


def pauli_coefficients(mat, n: int) -> np.ndarray:
    """``tr[P_i M]`` for every Pauli index ``i``."""
    from .matops import product_coords
    mat = mat.mat if isinstance(mat, HermitianOperator) else np.asarray(mat)
    return np.real(product_coords(mat, [_SIGMA] * n))


@functools.lru_cache(maxsize=None)
def _pauli_action(n: int):
    """Each Pauli as a signed permutation: ``P|b> = phase[i, b] |b xor flip[i]>``."""
    count = 4**n
    dim = 2**n
    flips = np.zeros(count, dtype=np.int64)
    phases = np.ones((count, dim), dtype=complex)
    basis = np.arange(dim)
    for i in range(count):
        letters = PauliOperator.from_index(n, i).letters
        for q, ch in enumerate(letters):
            bit = (basis >> (n - 1 - q)) & 1
            if ch in "XY":
                flips[i] |= 1 << (n - 1 - q)
            if ch == "Z":
                phases[i] *= (-1.0) ** bit
            elif ch == "Y":
                phases[i] *= 1j * (-1.0) ** bit
    return flips, phases


def _lagrangian_generators(n: int):
    """Yield every maximal isotropic subspace as an ``(n, 2n)`` RREF bit matrix."""
    width = 2 * n
    for pivots in itertools.combinations(range(width), n):
        free = [(r, c) for r, p in enumerate(pivots) for c in range(p + 1, width) if c not in pivots]
        base = np.zeros((n, width), dtype=np.int64)
        for r, p in enumerate(pivots):
            base[r, p] = 1
        nf = len(free)
        if nf:
            bits = ((np.arange(2**nf)[:, None] >> np.arange(nf)[None, :]) & 1)
            mats = np.repeat(base[None], 2**nf, axis=0)
            rr = np.array([f[0] for f in free])
            cc = np.array([f[1] for f in free])
            mats[:, rr, cc] = bits
        else:
            mats = base[None]
        x, z = mats[:, :, :n], mats[:, :, n:]
        form = (np.einsum("kai,kbi->kab", x, z) + np.einsum("kai,kbi->kab", z, x)) % 2
        ok = ~np.any(form, axis=(1, 2))
        yield from mats[ok]


def _generator_matrix(xbits, zbits) -> np.ndarray:
    """Hermitian Pauli ``i^(x.z) X^x Z^z`` as a dense matrix."""
    x1 = np.array([[0, 1], [1, 0]], dtype=complex)
    z1 = np.diag([1.0, -1.0]).astype(complex)
    mat = np.ones((1, 1), dtype=complex)
    for xb, zb in zip(xbits, zbits):
        site = np.eye(2, dtype=complex)
        if xb:
            site = site @ x1
        if zb:
            site = site @ z1
        mat = np.kron(mat, site)
    return (1j) ** int(np.dot(xbits, zbits)) * mat


def _canonical_phase(vec):
    k = int(np.argmax(np.abs(vec) > 1e-9))
    return vec * (abs(vec[k]) / vec[k])


@functools.lru_cache(maxsize=None)
def _enumerate(n: int) -> np.ndarray:
    dim = 2**n
    vecs = []
    for gens in _lagrangian_generators(n):
        mats = [_generator_matrix(g[:n], g[n:]) for g in gens]
        for signs in itertools.product((1, -1), repeat=n):
            proj = np.eye(dim, dtype=complex)
            for s, g in zip(signs, mats):
                proj = proj @ (np.eye(dim) + s * g) / 2
            col = int(np.argmax(np.linalg.norm(proj, axis=0)))
            v = proj[:, col]
            vecs.append(_canonical_phase(v / np.linalg.norm(v)))
    out = np.array(vecs)
    out.flags.writeable = False
    return out


def stabilizer_count(n: int) -> int:
    """``2^n prod_{k=1..n} (2^k + 1)``."""
    out = 2**n
    for k in range(1, n + 1):
        out *= 2**k + 1
    return out


def build_G(vectors: np.ndarray, n: int) -> sp.csc_array:
    """``G[i, j] = <phi_j| P_i |phi_j>`` (entries in {-1, 0, 1}), column-sparse."""
    flips, phases = _pauli_action(n)
    vecs = np.asarray(vectors)
    dim = 2**n
    idx = np.arange(dim)
    g = np.empty((4**n, vecs.shape[0]))
    for i in range(4**n):
        # <psi|P|psi> = sum_b conj(psi[b ^ f]) phase[b] psi[b]
        g[i] = np.real(np.sum(vecs[:, idx ^ flips[i]].conj() * phases[i][None, :] * vecs, axis=1))
    g = np.rint(g)
    return sp.csc_array(g)


@dataclass
class StabilizerSet:
    n_qubits: int
    vectors: np.ndarray
    G: sp.csc_array

    def __len__(self):
        return self.vectors.shape[0]

    def projector(self, j: int) -> HermitianOperator:
        v = self.vectors[j]
        return HermitianOperator(np.outer(v, v.conj()), (2,) * self.n_qubits)

    def projectors(self) -> np.ndarray:
        return np.einsum("ki,kj->kij", self.vectors, self.vectors.conj())

    def dump(self, path) -> None:
        """Text dump: header line then one state per line as interleaved re/im amplitudes."""
        with open(path, "w") as fh:
            fh.write(f"# stab n={self.n_qubits} count={len(self)}\n")
            for v in self.vectors:
                fh.write(" ".join(f"{x.real:.17g} {x.imag:.17g}" for x in v) + "\n")


@functools.lru_cache(maxsize=None)
def _stabilizer_set(n: int) -> StabilizerSet:
    vecs = _enumerate(n)
    return StabilizerSet(n, vecs, build_G(vecs, n))


def enumerate_stabilizer_states(n: int, extended: bool = False) -> StabilizerSet:
    """All pure ``n``-qubit stabilizer states.  ``n = 4`` requires ``extended``."""
    limit = 4 if extended else 3
    if not 1 <= n <= limit:
        raise ValueError(f"stabilizer enumeration supports 1 <= n <= {limit}"
                         + ("" if extended else " (n=4 needs extended=True)"))
    return _stabilizer_set(int(n))


def load_stabilizer_dump(path) -> np.ndarray:
    with open(path) as fh:
        header = fh.readline().split()
        n = int(header[2].split("=")[1])
        rows = [np.array(ln.split(), dtype=float) for ln in fh if ln.strip()]
    arr = np.array(rows)
    vecs = arr[:, 0::2] + 1j * arr[:, 1::2]
    if vecs.shape[1] != 2**n:
        raise ValueError("dump amplitude count does not match header")
    return vecs


# --------------------------------------------------------------------------
# robustness


@dataclass
class RobustnessResult:
    value: float
    weights: np.ndarray
    status: str
    gap: float


def stabilizer_cone_block(stab: StabilizerSet, name: str = "x") -> tuple[NonnegBlock, sp.csc_array]:
    """Nonnegative weights over the stabilizer states and their Pauli-coefficient map ``G``."""
    return NonnegBlock(name, len(stab)), stab.G


def _robustness_lp(b: np.ndarray, g: sp.csc_array, extra_rows: sp.csc_array | None = None,
                   tol: float = 1e-9) -> RobustnessResult:
    n = g.shape[1]
    blk = NonnegBlock("x", 2 * n)
    a = sp.hstack([g, -g])
    rhs = np.asarray(b, dtype=float)
    if extra_rows is not None:
        a = sp.vstack([a, extra_rows])
        rhs = np.concatenate([rhs, np.zeros(extra_rows.shape[0])])
    keep = np.asarray(abs(a).sum(axis=1)).ravel() > 0
    if np.any(np.abs(rhs[~keep]) > 1e-12):
        raise ValueError("target has weight on a Pauli direction no stabilizer state reaches")
    a = sp.csr_array(a)[keep]
    prob = ConicProblem([blk], {"x": np.ones(2 * n)}, {"x": a}, rhs[keep])
    rep = solve(prob, tol=tol)
    x = rep.x["x"]
    return RobustnessResult(rep.primal_value, x[:n] - x[n:], rep.status, rep.gap)


def robustness_of_state(rho, stab: StabilizerSet | None = None, tol: float = 1e-9) -> RobustnessResult:
    """``min ||x||_1`` over real ``x`` with ``rho = sum_j x_j |phi_j><phi_j|``."""
    mat = rho.mat if isinstance(rho, HermitianOperator) else np.asarray(rho)
    n = int(round(np.log2(mat.shape[0])))
    stab = stab or enumerate_stabilizer_states(n)
    b = pauli_coefficients(mat, n)
    return _robustness_lp(b, stab.G, tol=tol)


def channel_robustness(choi, d_in: int, stab: StabilizerSet | None = None,
                       tol: float = 1e-9) -> RobustnessResult:
    """Robustness of a channel through its normalized Choi state ``J / d_in``.

    Both the positive and negative parts are required to have maximally mixed
    input marginals, so each is a (scaled) stabilizer-preserving channel.
    """
    mat = choi.mat if isinstance(choi, HermitianOperator) else np.asarray(choi)
    n_tot = int(round(np.log2(mat.shape[0])))
    n_in = int(round(np.log2(d_in)))
    n_out = n_tot - n_in
    stab = stab or enumerate_stabilizer_states(n_tot)
    # the input marginal of J/d_in must be I/d_in
    marg = np.trace(mat.reshape(d_in, 2**n_out, d_in, 2**n_out), axis1=1, axis2=3)
    if np.max(np.abs(marg - np.eye(d_in))) > 1e-8:
        raise ValueError("Choi operator is not trace preserving (input marginal differs from identity)")
    b = pauli_coefficients(mat / d_in, n_tot)
    g = sp.csr_array(stab.G)
    # Pauli rows P_A (x) I_B with P_A != I
    rows = [i * 4**n_out for i in range(1, 4**n_in)]
    marg_g = g[rows]
    n = g.shape[1]
    zeros = sp.csr_array((len(rows), n))
    extra = sp.vstack([sp.hstack([marg_g, zeros]), sp.hstack([zeros, marg_g])])
    return _robustness_lp(b, stab.G, extra_rows=extra, tol=tol)
