"""Small dense complex linear algebra and quantum-information primitives.

Pure states live on named qubit wires (wire 0 is the most significant bit of
the amplitude index).  Everything here is exact up to floating point: unitary
application, orthogonal measurement with branch enumeration, partial trace,
trace norm, fidelity, purification, and the eigenbasis measurement that
achieves the trace-norm distinguishing bound.

All values are immutable after construction and every operation is a pure
function, so concurrent use needs no synchronization.  Randomness is always
drawn from an explicitly passed ``numpy.random.Generator``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

# Tolerances, fixed once.  State-level invariants are checked at 1e-10,
# operator-level ones at 1e-9; measurement branches below 1e-14 are dropped.
ATOL_STATE = 1e-10
ATOL_OP = 1e-9
BRANCH_PRUNE = 1e-14


class QMathError(Exception):
    pass


class NotHermitian(QMathError):
    pass


class NotUnitary(QMathError):
    pass


class WireMismatch(QMathError):
    pass


class UnknownWire(QMathError):
    pass


class ReducedMismatch(QMathError):
    pass


def is_hermitian(m: np.ndarray, tol: float = ATOL_OP) -> bool:
    m = np.asarray(m, dtype=complex)
    return m.shape[0] == m.shape[1] and bool(np.max(np.abs(m - m.conj().T)) <= tol)


def is_unitary(m: np.ndarray, tol: float = ATOL_OP) -> bool:
    m = np.asarray(m, dtype=complex)
    if m.shape[0] != m.shape[1]:
        return False
    return bool(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))) <= tol)


def _frozen(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=complex)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class StateVector:
    """Unit-norm pure state on an ordered tuple of named qubit wires."""

    wires: tuple[str, ...]
    amplitudes: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "wires", tuple(self.wires))
        amps = _frozen(self.amplitudes)
        object.__setattr__(self, "amplitudes", amps)
        if len(set(self.wires)) != len(self.wires):
            raise WireMismatch(f"duplicate wire labels: {self.wires}")
        if amps.shape != (2 ** len(self.wires),):
            raise WireMismatch(
                f"{len(self.wires)} wires need {2 ** len(self.wires)} amplitudes, got {amps.shape}"
            )
        if not np.all(np.isfinite(amps.view(float))):
            raise QMathError("non-finite amplitude")
        norm = float(np.linalg.norm(amps))
        if abs(norm - 1.0) > ATOL_STATE:
            raise QMathError(f"state norm {norm} != 1")

    @property
    def n_wires(self) -> int:
        return len(self.wires)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def axis(self, wire: str) -> int:
        try:
            return self.wires.index(wire)
        except ValueError:
            raise UnknownWire(wire) from None

    def reorder(self, wires: Sequence[str]) -> "StateVector":
        """Permute the wire order (same wire set) without changing the state."""
        wires = tuple(wires)
        if set(wires) != set(self.wires):
            raise WireMismatch(f"cannot reorder {self.wires} to {wires}")
        if wires == self.wires:
            return self
        tensor = self.amplitudes.reshape((2,) * self.n_wires)
        perm = [self.wires.index(w) for w in wires]
        return StateVector(wires, tensor.transpose(perm).reshape(-1))

    def density(self) -> "DensityMatrix":
        return DensityMatrix(self.wires, np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, PSD, trace-1 matrix on an ordered tuple of named qubit wires."""

    wires: tuple[str, ...]
    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "wires", tuple(self.wires))
        m = _frozen(self.matrix)
        object.__setattr__(self, "matrix", m)
        dim = 2 ** len(self.wires)
        if m.shape != (dim, dim):
            raise WireMismatch(f"expected {dim}x{dim} matrix, got {m.shape}")
        if not is_hermitian(m, ATOL_STATE * dim):
            raise NotHermitian("density matrix is not Hermitian")
        if abs(np.trace(m).real - 1.0) > ATOL_STATE * dim:
            raise QMathError(f"trace {np.trace(m)} != 1")
        if float(np.min(np.linalg.eigvalsh(0.5 * (m + m.conj().T)))) < -1e-9:
            raise QMathError("density matrix has a negative eigenvalue")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class Mixture:
    """Classical distribution over pure states on a common wire set."""

    weights: tuple[float, ...]
    states: tuple[StateVector, ...]

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        object.__setattr__(self, "states", tuple(self.states))
        if len(self.weights) != len(self.states) or not self.states:
            raise QMathError("weights and states must pair up")
        if any(w < -ATOL_STATE for w in self.weights):
            raise QMathError("negative mixture weight")
        if abs(sum(self.weights) - 1.0) > ATOL_STATE:
            raise QMathError(f"mixture weights sum to {sum(self.weights)}")
        wires = self.states[0].wires
        if any(s.wires != wires for s in self.states):
            raise WireMismatch("mixture states live on different wires")

    @property
    def wires(self) -> tuple[str, ...]:
        return self.states[0].wires

    def density(self) -> DensityMatrix:
        m = sum(w * np.outer(s.amplitudes, s.amplitudes.conj())
                for w, s in zip(self.weights, self.states))
        return DensityMatrix(self.wires, m)


@dataclass(frozen=True)
class OrthogonalMeasurement:
    """Decomposition into orthogonal subspaces, one projector per outcome."""

    projectors: tuple[np.ndarray, ...]
    labels: tuple

    def __post_init__(self):
        projs = tuple(_frozen(p) for p in self.projectors)
        object.__setattr__(self, "projectors", projs)
        object.__setattr__(self, "labels", tuple(self.labels))
        if len(projs) != len(self.labels) or not projs:
            raise QMathError("one label per projector required")
        dim = projs[0].shape[0]
        total = np.zeros((dim, dim), dtype=complex)
        for p in projs:
            if p.shape != (dim, dim):
                raise WireMismatch("projector dimensions disagree")
            if not is_hermitian(p) or np.max(np.abs(p @ p - p)) > ATOL_OP:
                raise QMathError("projector is not a Hermitian idempotent")
            total += p
        for i, p in enumerate(projs):
            for q in projs[i + 1:]:
                if np.max(np.abs(p @ q)) > ATOL_OP:
                    raise QMathError("projectors are not pairwise orthogonal")
        if np.max(np.abs(total - np.eye(dim))) > ATOL_OP:
            raise QMathError("projectors do not sum to the identity")

    @property
    def dim(self) -> int:
        return self.projectors[0].shape[0]

    @classmethod
    def from_basis(cls, vectors: Sequence[np.ndarray], labels: Sequence | None = None
                   ) -> "OrthogonalMeasurement":
        vecs = [np.asarray(v, dtype=complex).reshape(-1) for v in vectors]
        if labels is None:
            labels = tuple(range(len(vecs)))
        return cls(tuple(np.outer(v, v.conj()) for v in vecs), tuple(labels))

    @classmethod
    def computational(cls, n_wires: int) -> "OrthogonalMeasurement":
        dim = 2 ** n_wires
        return cls.from_basis(list(np.eye(dim)), labels=tuple(range(dim)))


# ---------------------------------------------------------------------------
# Core operations


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product; dimensions multiply."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def tensor_states(a: StateVector, b: StateVector) -> StateVector:
    if set(a.wires) & set(b.wires):
        raise WireMismatch("tensor factors share wires")
    return StateVector(a.wires + b.wires, np.kron(a.amplitudes, b.amplitudes))


def hermitian_eig(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and orthonormal eigenvector columns of a Hermitian matrix."""
    m = np.asarray(m, dtype=complex)
    if m.shape[0] > 256:
        raise QMathError(f"dimension {m.shape[0]} exceeds the supported 256")
    if not is_hermitian(m):
        raise NotHermitian("matrix is not Hermitian within 1e-9")
    vals, vecs = np.linalg.eigh(0.5 * (m + m.conj().T))
    return vals[::-1].copy(), vecs[:, ::-1].copy()


def trace_norm(a: np.ndarray) -> float:
    """Sum of singular values; for Hermitian input this is the sum of |eigenvalues|."""
    a = np.asarray(a, dtype=complex)
    if a.shape[0] != a.shape[1]:
        raise QMathError("trace norm needs a square matrix")
    return float(np.sum(np.linalg.svd(a, compute_uv=False)))


def sqrtm_psd(m: np.ndarray) -> np.ndarray:
    """Hermitian square root of a PSD matrix (tiny negative eigenvalues clamped)."""
    vals, vecs = np.linalg.eigh(np.asarray(m, dtype=complex))
    return (vecs * np.sqrt(np.clip(vals, 0.0, None))) @ vecs.conj().T


def fidelity(r0: DensityMatrix, r1: DensityMatrix) -> float:
    """Maximal squared overlap of purifications: (sum of singular values of sqrt(r0) sqrt(r1))^2.

    A numerically pure input short-circuits to the exact rule <phi|other|phi>,
    which avoids the square-root noise floor of near-zero eigenvalues.
    """
    if r0.wires != r1.wires:
        raise WireMismatch(f"fidelity of states on {r0.wires} vs {r1.wires}")
    for a, b in ((r0, r1), (r1, r0)):
        vals, vecs = np.linalg.eigh(a.matrix)
        if vals[-1] >= 1.0 - 1e-12:
            v = vecs[:, -1]
            return float(min(max((v.conj() @ b.matrix @ v).real, 0.0), 1.0))
    s = np.linalg.svd(sqrtm_psd(r0.matrix) @ sqrtm_psd(r1.matrix), compute_uv=False)
    return float(min(max(np.sum(s) ** 2, 0.0), 1.0))


def fresh_wires(prefix: str, count: int, avoid: Sequence[str]) -> tuple[str, ...]:
    avoid = set(avoid)
    out, i = [], 0
    while len(out) < count:
        w = f"{prefix}{i}"
        if w not in avoid:
            out.append(w)
        i += 1
    return tuple(out)


def purify(r: DensityMatrix, ancilla_prefix: str = "p") -> StateVector:
    """Spectral purification sum_i sqrt(w_i) |i>|v_i> on (fresh ancilla wires, r.wires)."""
    vals, vecs = hermitian_eig(r.matrix)
    anc = fresh_wires(ancilla_prefix, len(r.wires), r.wires)
    amps = (np.sqrt(np.clip(vals, 0.0, None))[:, None] * vecs.T).reshape(-1)
    amps = amps / np.linalg.norm(amps)
    return StateVector(anc + r.wires, amps)


def maximally_parallel_purifications(
    r0: DensityMatrix, r1: DensityMatrix, ancilla_prefix: str = "p"
) -> tuple[StateVector, StateVector]:
    """Purifications of r0 and r1 whose overlap is real, nonnegative, and achieves the fidelity.

    Built from the singular decomposition of sqrt(r0) sqrt(r1): with that SVD
    U S V^dag, the ancilla-side alignment (V U^dag)^T makes <psi0|psi1> equal
    the sum of singular values, i.e. the square root of the fidelity.  Both
    outputs share one fresh ancilla register, listed before the system wires.
    """
    if r0.wires != r1.wires:
        raise WireMismatch("purification targets live on different wires")
    s0, s1 = sqrtm_psd(r0.matrix), sqrtm_psd(r1.matrix)
    u, _, vh = np.linalg.svd(s0 @ s1)
    w1 = (vh.conj().T @ u.conj().T).T  # unitary aligning the second ancilla
    anc = fresh_wires(ancilla_prefix, len(r0.wires), r0.wires)
    wires = anc + r0.wires

    def build(sqrt_r, w):
        amps = (w @ sqrt_r.T).reshape(-1)  # amps[e, s] = sum_j W[e,j] sqrt_r[s,j]
        return StateVector(wires, amps / np.linalg.norm(amps))

    return build(s0, np.eye(r0.dim)), build(s1, w1)


def _axes_front(state: StateVector, front: Sequence[str]) -> tuple[np.ndarray, list[int]]:
    """Amplitude tensor with the given wires moved to the leading axes."""
    idx = [state.axis(w) for w in front]
    rest = [i for i in range(state.n_wires) if i not in idx]
    perm = idx + rest
    tensor_amps = state.amplitudes.reshape((2,) * state.n_wires).transpose(perm)
    return tensor_amps, perm


def apply_unitary(state: StateVector, u: np.ndarray, on: Sequence[str]) -> StateVector:
    """Apply a unitary to a subset of wires; the wire order of the state is unchanged."""
    on = tuple(on)
    u = np.asarray(u, dtype=complex)
    k = len(on)
    if u.shape != (2 ** k, 2 ** k):
        raise WireMismatch(f"unitary shape {u.shape} does not act on {k} wires")
    if not is_unitary(u):
        raise NotUnitary("operator fails the 1e-9 unitarity check")
    tensor_amps, perm = _axes_front(state, on)
    block = tensor_amps.reshape(2 ** k, -1)
    block = u @ block
    inv = np.argsort(perm)
    out = block.reshape((2,) * state.n_wires).transpose(inv).reshape(-1)
    return StateVector(state.wires, out)


def measure(state: StateVector, m: OrthogonalMeasurement, on: Sequence[str]
            ) -> list[tuple[float, StateVector, object]]:
    """Enumerate measurement branches: (probability, post-state, outcome label).

    Branch probabilities sum to 1; branches below the 1e-14 pruning threshold
    are omitted and each surviving post-state is renormalized.
    """
    on = tuple(on)
    k = len(on)
    if m.dim != 2 ** k:
        raise WireMismatch(f"measurement dim {m.dim} does not act on {k} wires")
    tensor_amps, perm = _axes_front(state, on)
    block = tensor_amps.reshape(2 ** k, -1)
    inv = np.argsort(perm)
    out = []
    for proj, label in zip(m.projectors, m.labels):
        piece = proj @ block
        prob = float(np.sum(np.abs(piece) ** 2))
        if prob < BRANCH_PRUNE:
            continue
        amps = piece.reshape((2,) * state.n_wires).transpose(inv).reshape(-1)
        out.append((prob, StateVector(state.wires, amps / math.sqrt(prob)), label))
    return out


def partial_trace(obj: StateVector | DensityMatrix, keep: Sequence[str]) -> DensityMatrix:
    """Reduce onto `keep` (returned in the source wire order), tracing out the rest."""
    keep = tuple(keep)
    for w in keep:
        if w not in obj.wires:
            raise UnknownWire(w)
    kept = tuple(w for w in obj.wires if w in set(keep))
    if isinstance(obj, StateVector):
        tensor_amps, _ = _axes_front(obj, kept)
        block = tensor_amps.reshape(2 ** len(kept), -1)
        return DensityMatrix(kept, block @ block.conj().T)
    n = len(obj.wires)
    t = obj.matrix.reshape((2,) * (2 * n))
    traced = [i for i, w in enumerate(obj.wires) if w not in set(keep)]
    for offset, i in enumerate(sorted(traced)):
        ax = i - offset
        t = np.trace(t, axis1=ax, axis2=ax + (n - offset))
    d = 2 ** len(kept)
    return DensityMatrix(kept, t.reshape(d, d))


def overlap(a: StateVector, b: StateVector) -> complex:
    if set(a.wires) != set(b.wires):
        raise WireMismatch("overlap of states on different wire sets")
    return complex(np.vdot(a.amplitudes, b.reorder(a.wires).amplitudes))


def states_equal_up_to_phase(a: StateVector, b: StateVector, tol: float = 1e-8) -> bool:
    # Physical equality: global phase is unobservable, so compare |<a|b>|.
    return abs(overlap(a, b)) >= 1.0 - tol


def complete_basis(columns: np.ndarray, dim: int) -> np.ndarray:
    """Deterministically extend orthonormal columns to a full orthonormal basis."""
    cols = [columns[:, i] for i in range(columns.shape[1])]
    for i in range(dim):
        v = np.zeros(dim, dtype=complex)
        v[i] = 1.0
        for _ in range(2):  # reorthogonalize: one Gram-Schmidt pass is not enough
            for c in cols:
                v = v - c * np.vdot(c, v)
        n = np.linalg.norm(v)
        if n > 1e-7:
            cols.append(v / n)
        if len(cols) == dim:
            break
    return np.column_stack(cols)


def state_preparation_unitary(vec: np.ndarray) -> np.ndarray:
    """A unitary whose first column is the given unit vector (deterministic completion)."""
    v = np.asarray(vec, dtype=complex).reshape(-1, 1)
    return complete_basis(v / np.linalg.norm(v), v.shape[0])


def local_purification_transform(
    psi: StateVector, target: StateVector, local_wires: Sequence[str]
) -> np.ndarray:
    """Unitary on `local_wires` with (U x I) psi = target, exactly (phase included).

    Exists precisely when the two states have the same reduced density matrix
    on the complement of `local_wires`; raises ReducedMismatch otherwise.  The
    construction maps the singular basis of psi's local-vs-rest amplitude
    matrix onto the corresponding vectors of the target and completes the
    isometry deterministically, which sidesteps any eigenvector matching in
    degenerate spectra.
    """
    local = tuple(local_wires)
    if set(psi.wires) != set(target.wires):
        raise WireMismatch("states live on different wire sets")
    rest = tuple(w for w in psi.wires if w not in set(local))
    if len(rest) + len(local) != len(psi.wires):
        raise UnknownWire(f"{local} is not a subset of {psi.wires}")
    red_a = partial_trace(psi, rest).matrix
    red_b = partial_trace(target.reorder(psi.wires), rest).matrix
    if np.max(np.abs(red_a - red_b)) > 1e-8:
        raise ReducedMismatch("reduced states on the non-local wires differ")

    order = local + rest
    m_psi = psi.reorder(order).amplitudes.reshape(2 ** len(local), -1)
    m_tgt = target.reorder(order).amplitudes.reshape(2 ** len(local), -1)
    q, s, wh = np.linalg.svd(m_psi, full_matrices=False)
    rank = int(np.sum(s > 1e-9))
    src = q[:, :rank]
    dst = np.column_stack([(m_tgt @ wh[i].conj()) / s[i] for i in range(rank)])
    src_full = complete_basis(src, m_psi.shape[0])
    dst_full = complete_basis(dst, m_psi.shape[0])
    return dst_full @ src_full.conj().T


def optimal_distinguishing_measurement(
    r0: DensityMatrix, r1: DensityMatrix
) -> tuple[OrthogonalMeasurement, float]:
    """Eigenbasis measurement of r0 - r1 and the L1 distance it achieves.

    The achieved L1 distance between the two outcome distributions equals the
    trace norm of r0 - r1, and no generalized measurement can do better.
    """
    if r0.wires != r1.wires:
        raise WireMismatch("states live on different wires")
    delta = r0.matrix - r1.matrix
    _, vecs = hermitian_eig(delta)
    meas = OrthogonalMeasurement.from_basis([vecs[:, i] for i in range(vecs.shape[1])])
    achieved = measurement_l1_distance(r0, r1, meas)
    return meas, achieved


def measurement_l1_distance(r0: DensityMatrix, r1: DensityMatrix,
                            m: OrthogonalMeasurement) -> float:
    """L1 distance between the outcome distributions a measurement induces."""
    delta = r0.matrix - r1.matrix
    return float(sum(abs(np.trace(p @ delta).real) for p in m.projectors))


def guess_success_probability(r0: DensityMatrix, r1: DensityMatrix) -> float:
    """Best probability of telling two equiprobable states apart: 1/2 + trn/4."""
    return 0.5 + trace_norm(r0.matrix - r1.matrix) / 4.0


# ---------------------------------------------------------------------------
# Seeded randomness (Haar-style sampling by orthonormalizing complex Gaussians)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_state(wires: Sequence[str], rng: np.random.Generator) -> StateVector:
    dim = 2 ** len(tuple(wires))
    z = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return StateVector(tuple(wires), z / np.linalg.norm(z))


def random_density(wires: Sequence[str], rng: np.random.Generator,
                   rank: int | None = None) -> DensityMatrix:
    wires = tuple(wires)
    dim = 2 ** len(wires)
    rank = dim if rank is None else rank
    weights = rng.dirichlet(np.ones(rank))
    m = np.zeros((dim, dim), dtype=complex)
    for w in weights:
        v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        v /= np.linalg.norm(v)
        m += w * np.outer(v, v.conj())
    return DensityMatrix(wires, m)


def random_basis_measurement(dim: int, rng: np.random.Generator) -> OrthogonalMeasurement:
    u = random_unitary(dim, rng)
    return OrthogonalMeasurement.from_basis([u[:, i] for i in range(dim)])
