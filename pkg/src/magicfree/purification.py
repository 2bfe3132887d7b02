"""Purification problem instances: ensembles, depolarizing noise and the Q/R operators.

For an ensemble ``Psi`` and ``n`` noisy copies the two operators entering every
fidelity program are

    Q = (D^(x)n (x) id)(avg psi^(x)(n+1)),     R = D^(x)n(avg psi^(x)n) (x) I,

with output site ``n + 1``.  For the Haar ensemble the averages are
``Pi_k / D(k, d)`` by Schur's lemma.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .matops import HermitianOperator, kron, partial_trace, symmetric_dimension, symmetric_projector
from .phase_space import is_prime

OP_CLASSES = ("CPTN", "CPWP", "CSPO")


@dataclass(frozen=True)
class Ensemble:
    """Uniform pure-state ensemble: ``kind`` is ``"discrete"`` or ``"haar"``."""

    kind: str
    d: int
    states: tuple = field(default=(), repr=False)
    name: str = ""

    def __post_init__(self):
        if self.kind not in ("discrete", "haar"):
            raise ValueError(f"unknown ensemble kind {self.kind!r}")
        if self.d < 2:
            raise ValueError("ensemble dimension must be at least 2")
        if self.kind == "discrete":
            if not self.states:
                raise ValueError("a discrete ensemble needs at least one state")
            for k, v in enumerate(self.states):
                v = np.asarray(v)
                if v.shape != (self.d,):
                    raise ValueError(f"state {k} has shape {v.shape}, expected ({self.d},)")
                if abs(np.linalg.norm(v) - 1) > 1e-10:
                    raise ValueError(f"state {k} is not normalized (norm {np.linalg.norm(v):.3g})")

    @classmethod
    def discrete(cls, states, name: str = "") -> "Ensemble":
        vecs = tuple(np.asarray(v, dtype=complex) for v in states)
        if not vecs:
            raise ValueError("a discrete ensemble needs at least one state")
        return cls("discrete", vecs[0].shape[0], vecs, name)

    @classmethod
    def haar(cls, d: int) -> "Ensemble":
        return cls("haar", int(d), (), "haar")

    @property
    def label(self) -> str:
        return self.name or self.kind

    def moment(self, k: int) -> np.ndarray:
        """``avg psi^(x)k`` as a dense matrix."""
        if self.kind == "haar":
            return symmetric_projector(k, self.d).mat / symmetric_dimension(k, self.d)
        out = 0
        for v in self.states:
            ket = v
            for _ in range(k - 1):
                ket = np.kron(ket, v)
            out = out + np.outer(ket, ket.conj())
        return out / len(self.states)


def depolarize(x, site: int, delta: float, dims=None):
    """``(1 - delta) x + delta tr_site(x) (x) I/d`` on one site (1-based)."""
    if not 0 <= delta <= 1:
        raise ValueError(f"delta must lie in [0, 1], got {delta}")
    wrap = isinstance(x, HermitianOperator)
    mat = x.mat if wrap else np.asarray(x)
    dims = tuple(x.dims if wrap else (dims or (mat.shape[0],)))
    if not 1 <= site <= len(dims):
        raise ValueError(f"site index {site} out of range 1..{len(dims)}")
    s = site - 1
    d = dims[s]
    ns = len(dims)
    t = mat.reshape(dims + dims)
    red = np.trace(t, axis1=s, axis2=s + ns)
    red = np.expand_dims(np.expand_dims(red, s), s + ns)
    mixed = red * np.eye(d).reshape([d if k in (s, s + ns) else 1 for k in range(2 * ns)]) / d
    out = ((1 - delta) * t + delta * mixed).reshape(mat.shape)
    return HermitianOperator(out, dims) if wrap else out


def depolarize_state(rho, delta: float):
    return depolarize(rho, 1, delta)


@dataclass(frozen=True)
class PurificationInstance:
    d: int
    n: int
    delta: float
    p: float
    ensemble: Ensemble
    op_class: str = "CPTN"

    def __post_init__(self):
        cls = self.op_class.upper()
        object.__setattr__(self, "op_class", cls)
        if cls not in OP_CLASSES:
            raise ValueError(f"operation class must be one of {OP_CLASSES}, got {self.op_class!r}")
        if self.n < 2:
            raise ValueError("need at least two copies")
        if not 0 <= self.delta <= 1:
            raise ValueError(f"delta must lie in [0, 1], got {self.delta}")
        if not 0 < self.p <= 1:
            raise ValueError(f"p must lie in (0, 1], got {self.p}")
        if self.ensemble.d != self.d:
            raise ValueError(f"ensemble dimension {self.ensemble.d} differs from d={self.d}")
        if cls == "CPWP" and (self.d % 2 == 0 or not is_prime(self.d)):
            raise ValueError(f"CPWP needs an odd prime dimension, got d={self.d}")
        if cls == "CSPO" and self.d != 2:
            raise ValueError(f"CSPO is implemented for qubits only, got d={self.d}")

    @property
    def dims(self) -> tuple[int, ...]:
        return (self.d,) * (self.n + 1)

    @property
    def d_in(self) -> int:
        return self.d**self.n

    def with_class(self, op_class: str) -> "PurificationInstance":
        return PurificationInstance(self.d, self.n, self.delta, self.p, self.ensemble, op_class)


@dataclass(frozen=True)
class QRPair:
    Q: HermitianOperator
    R: HermitianOperator


def assemble_QR(inst: PurificationInstance) -> QRPair:
    d, n = inst.d, inst.n
    q = HermitianOperator(inst.ensemble.moment(n + 1), (d,) * (n + 1))
    r = HermitianOperator(inst.ensemble.moment(n), (d,) * n)
    for site in range(1, n + 1):
        q = depolarize(q, site, inst.delta)
        r = depolarize(r, site, inst.delta)
    return QRPair(q, kron(r, HermitianOperator.identity((d,))))


def haar_lambda0(d: int, delta: float) -> float:
    return 1 - (d - 1) * delta / d


def baseline_fidelity(inst: PurificationInstance) -> float:
    """Average fidelity of one noisy copy with its ideal state."""
    if inst.ensemble.kind == "haar":
        return haar_lambda0(inst.d, inst.delta)
    vals = []
    for v in inst.ensemble.states:
        rho = np.outer(v, v.conj())
        vals.append(np.real(v.conj() @ depolarize(rho, 1, inst.delta) @ v))
    return float(np.mean(vals))


def identity_on_first_copy(d: int, n: int) -> HermitianOperator:
    """Choi operator of "keep copy 1, discard the rest": ``|Phi><Phi|_(1, out) (x) I_(2..n)``."""
    phi = np.zeros(d * d)
    phi[:: d + 1] = 1.0
    bell = np.outer(phi, phi)
    # bell lives on (copy 1, output); insert the discarded copies in between
    t = bell.reshape(d, d, d, d)
    rest = np.eye(d ** (n - 1)).reshape(d ** (n - 1), d ** (n - 1))
    full = np.einsum("aobp,xy->axobyp", t, rest)
    side = d ** (n + 1)
    return HermitianOperator(full.reshape(side, side), (d,) * (n + 1))


def fig2_ensembles() -> tuple[Ensemble, Ensemble]:
    """The qubit pair ``{|0>, |+>}`` and the four qutrit magic states."""
    qubit = Ensemble.discrete([np.array([1, 0]), np.array([1, 1]) / math.sqrt(2)], name="fig2-qubit")
    w = np.exp(2j * np.pi / 9)
    s3 = math.sqrt(3)
    qutrit = Ensemble.discrete([
        np.array([0, 1, -1]) / math.sqrt(2),
        np.array([-1, 2, -1]) / math.sqrt(6),
        np.array([w, 1, w.conjugate()]) / s3,
        np.array([1 + s3, 1, 1]) / math.sqrt(6 + 2 * s3),
    ], name="fig2-qutrit")
    return qubit, qutrit


def builtin_ensemble(name: str, d: int | None = None) -> Ensemble:
    qubit, qutrit = fig2_ensembles()
    if name == "fig2-qubit":
        return qubit
    if name == "fig2-qutrit":
        return qutrit
    if name == "haar":
        if d is None:
            raise ValueError("the haar ensemble needs a dimension")
        return Ensemble.haar(d)
    raise ValueError(f"unknown built-in ensemble {name!r}")


def save_ensemble(ens: Ensemble, path) -> None:
    if ens.kind != "discrete":
        raise ValueError("only discrete ensembles can be written to a file")
    data = {"d": ens.d,
            "states": [[[float(a.real), float(a.imag)] for a in v] for v in ens.states]}
    with open(path, "w") as fh:
        json.dump(data, fh)


def load_ensemble(path) -> Ensemble:
    with open(path) as fh:
        data = json.load(fh)
    try:
        d = int(data["d"])
        raw = data["states"]
    except (KeyError, TypeError) as exc:
        raise ValueError("ensemble file needs top-level fields 'd' and 'states'") from exc
    states = []
    for k, amps in enumerate(raw):
        try:
            v = np.array([complex(re, im) for re, im in amps])
        except (TypeError, ValueError) as exc:
            raise ValueError(f"state {k}: amplitudes must be [re, im] pairs") from exc
        if v.shape != (d,):
            raise ValueError(f"state {k}: expected {d} amplitudes, got {v.shape[0]}")
        if abs(np.linalg.norm(v) - 1) > 1e-10:
            raise ValueError(f"state {k}: not normalized (norm {np.linalg.norm(v):.12g})")
        states.append(v)
    return Ensemble.discrete(states, name=str(path))
