"""Cheating strategies: explicit constructions, baselines, and a seeded optimizer.

Two closed-form attacks are built here:

* ``alice_quadratic`` -- the depositor delays her choice by escrowing half of
  an entangled superposition of two maximally parallel purifications, then
  decides the bit by measuring her control qubit in a rotated basis.  With
  fidelity f between the two bit encodings this buys advantage
  sqrt(f) sin(2a)/2 at detection probability (1-f) sin^2(a), half of which
  sits on each of the two claim branches.

* ``bob_weak_measurement`` -- the receiver couples the deposit to a one-qubit
  ancilla, writing sqrt(1-p)|0> + sqrt(p)|1> on the negative eigenspace of
  the encoding difference.  His kept ancilla then carries trace distance
  t sqrt(p) (t = full trace distance) while the return check catches him with
  probability at most (1 - sqrt(1-p))/2.

The rest of the module is a parameterized adversary space (two-level Euler
angles), strategy factories for seeded random sweeps, and a derivative-free
optimizer (coarse grid seeding + Nelder-Mead refinement) whose trace log
records every evaluated point, so identical seeds give identical logs.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize

from . import qmath
from .qmath import (
    DensityMatrix,
    Mixture,
    OrthogonalMeasurement,
    StateVector,
    hermitian_eig,
    maximally_parallel_purifications,
    local_purification_transform,
    state_preparation_unitary,
)
from .protocols import (
    Apply,
    EscrowParams,
    MeasureRecord,
    OutcomeDistribution,
    SetBits,
    SetRecord,
    StrategySpec,
    Verdict,
    escrow_bit_density,
    escrow_bit_mixture,
    honest_alice_coinflip,
    honest_alice_escrow,
    honest_bob_coinflip,
    honest_bob_escrow,
    rotation,
)

_COMP1 = OrthogonalMeasurement.computational(1)


class AdversaryError(Exception):
    pass


class RealizationMismatch(AdversaryError):
    pass


class BadParameterCount(AdversaryError):
    pass


# ---------------------------------------------------------------------------
# The depositor's quadratic strategy


@dataclass(frozen=True)
class AliceQuadraticParams:
    """Control-basis angle in [0, pi/4] and the bit the strategy biases toward.

    ``target_bit=0`` measures the control in the rotated {phi_a, phi_a-perp}
    basis; ``target_bit=1`` is the honest delayed choice (computational
    basis).  At alpha=0 the two coincide.
    """

    alpha: float
    target_bit: int = 0

    def __post_init__(self):
        if not 0.0 <= self.alpha <= math.pi / 4 + 1e-12:
            raise AdversaryError(f"alpha {self.alpha} outside [0, pi/4]")
        if self.target_bit not in (0, 1):
            raise AdversaryError("target_bit must be 0 or 1")


def alice_quadratic(params: AliceQuadraticParams, r0: DensityMatrix, r1: DensityMatrix,
                    realizations: tuple[Mixture, Mixture]) -> StrategySpec:
    """Delayed-choice depositor with a rotated control measurement.

    Deposits register B of |beta> = (|0>|psi0> + |1>|psi1>)/sqrt(2), where
    psi0, psi1 are maximally parallel purifications of r0, r1 on (control,
    work, deposit) wires (a0, a1, dep).  At reveal time the control is
    measured (rotated basis for the zero strategy), the work register is
    rotated onto the claimed realization, and the outcome pair is sent as
    the claim (b, x).  The realizations must actually realize r0 and r1.
    """
    if r0.dim != 2 or r1.dim != 2:
        raise AdversaryError("the escrow game deposits a single qubit")
    mixes = tuple(realizations)
    if len(mixes) != 2:
        raise AdversaryError("need one realization per bit value")
    for rho, mix in zip((r0, r1), mixes):
        if len(mix.states) > 2:
            raise AdversaryError("a realization may have at most 2 components (one claim bit)")
        if mix.states[0].dim != rho.dim:
            raise RealizationMismatch("realization lives in the wrong dimension")
        if np.max(np.abs(mix.density().matrix - rho.matrix)) > 1e-9:
            raise RealizationMismatch("mixture does not realize the target density matrix")

    dm0 = DensityMatrix(("dep",), r0.matrix)
    dm1 = DensityMatrix(("dep",), r1.matrix)
    psi0, psi1 = maximally_parallel_purifications(dm0, dm1)
    psi0 = StateVector(("a1", "dep"), psi0.amplitudes)
    psi1 = StateVector(("a1", "dep"), psi1.amplitudes)

    def realization_target(mix: Mixture) -> StateVector:
        amps = np.zeros(4, dtype=complex)
        for j, (w, s) in enumerate(zip(mix.weights, mix.states)):
            amps[2 * j: 2 * j + 2] = math.sqrt(w) * s.amplitudes
        return StateVector(("a1", "dep"), amps / np.linalg.norm(amps))

    u_open = [
        local_purification_transform(psi, realization_target(mix), ("a1",))
        for psi, mix in zip((psi0, psi1), mixes)
    ]
    beta = (np.kron([1, 0], psi0.amplitudes) + np.kron([0, 1], psi1.amplitudes)) / math.sqrt(2)
    prep = state_preparation_unitary(beta)

    # Control rotated so the claim basis becomes computational, then the
    # claim-controlled opening rotation, then both registers are read out.
    basis_fix = rotation(params.alpha).conj().T if params.target_bit == 0 else np.eye(2)
    ctrl_open = np.zeros((4, 4), dtype=complex)
    ctrl_open[:2, :2] = u_open[0]
    ctrl_open[2:, 2:] = u_open[1]
    return StrategySpec(
        party="alice", ancilla_count=2,
        label=f"alice-quadratic(alpha={params.alpha:.6g},target={params.target_bit})",
        programs={
            "deposit": (Apply(("a0", "a1", "dep"), prep),),
            "reveal": (
                Apply(("a0",), basis_fix),
                Apply(("a0", "a1"), ctrl_open),
                MeasureRecord(("a0",), _COMP1, "claim_b"),
                MeasureRecord(("a1",), _COMP1, "claim_x"),
                SetBits({"rb": "claim_b", "rx": "claim_x"}),
            ),
        },
    )


def protocol_quadratic_pair(alpha: float, params: EscrowParams = EscrowParams()
                            ) -> tuple[StrategySpec, StrategySpec]:
    """(zero strategy at alpha, honest delayed one strategy) for the escrow encoding."""
    theta = params.theta
    r0, r1 = escrow_bit_density(0, theta), escrow_bit_density(1, theta)
    mixes = (escrow_bit_mixture(0, theta), escrow_bit_mixture(1, theta))
    return (
        alice_quadratic(AliceQuadraticParams(alpha, 0), r0, r1, mixes),
        alice_quadratic(AliceQuadraticParams(alpha, 1), r0, r1, mixes),
    )


# ---------------------------------------------------------------------------
# The receiver's weak measurement


@dataclass(frozen=True)
class BobWeakParams:
    """Measurement strength p in [0, 1]; p=1 is the full eigenbasis measurement."""

    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise AdversaryError(f"p {self.p} outside [0, 1]")


def weak_measurement_unitary(r0: DensityMatrix, r1: DensityMatrix, p: float,
                             completion: str = "reflection") -> np.ndarray:
    """U on (message x one-qubit ancilla): identity on the nonnegative eigenspace
    of r0 - r1, ancilla write sqrt(1-p)|0> + sqrt(p)|1> on the negative one.

    The completion on the never-reached |e,1> fibers is a free choice; both
    options agree on every reachable branch.
    """
    if r0.wires != r1.wires:
        raise qmath.WireMismatch("attack targets live on different wires")
    vals, vecs = hermitian_eig(r0.matrix - r1.matrix)
    sp, sq = math.sqrt(1.0 - p), math.sqrt(p)
    if completion == "reflection":
        anc = np.array([[sp, sq], [sq, -sp]], dtype=complex)
    elif completion == "rotation":
        anc = np.array([[sp, -sq], [sq, sp]], dtype=complex)
    else:
        raise AdversaryError(f"unknown completion {completion!r}")
    u = np.zeros((2 * r0.dim, 2 * r0.dim), dtype=complex)
    for i in range(r0.dim):
        e = vecs[:, i]
        block = np.eye(2) if vals[i] >= 0 else anc
        u += np.kron(np.outer(e, e.conj()), block)
    return u


def bob_weak_measurement(params: BobWeakParams, r0: DensityMatrix, r1: DensityMatrix
                         ) -> StrategySpec:
    """Receiver strategy: couple the deposit to ancilla c0 on receipt, return it."""
    if r0.dim != 2:
        raise AdversaryError("the escrow game deposits a single qubit")
    u = weak_measurement_unitary(r0, r1, params.p)
    return StrategySpec(
        party="bob", ancilla_count=1, label=f"bob-weak(p={params.p:.6g})",
        programs={"receive": (Apply(("dep", "c0"), u),)},
    )


def full_measurement_bob(params: EscrowParams = EscrowParams(), target: int = 0
                         ) -> StrategySpec:
    """Coin-flip receiver who measures the deposit in the eigenbasis of the
    encoding difference and announces the maximum-likelihood guess (xor target)."""
    r0, r1 = escrow_bit_density(0, params.theta), escrow_bit_density(1, params.theta)
    vals, vecs = hermitian_eig(r0.matrix - r1.matrix)
    meas = OrthogonalMeasurement.from_basis([vecs[:, i] for i in range(2)])
    guesses = tuple((0 if vals[i] >= 0 else 1) ^ target for i in range(2))
    return StrategySpec(
        party="bob", ancilla_count=0, label=f"bob-full-measurement(target={target})",
        programs={"choose": (
            MeasureRecord(("dep",), meas, "guess"),
            SetBits({"bp": lambda rec: guesses[rec["guess"]]}),
        )},
    )


def fixed_bit_alice(bit: int, params: EscrowParams = EscrowParams()) -> StrategySpec:
    """Depositor who always escrows and claims the same bit."""
    base = honest_alice_escrow(params)
    return StrategySpec(
        party="alice", ancilla_count=0, label=f"alice-always-{bit}",
        programs={
            "deposit": (SetRecord("b", bit),) + base.programs["deposit"],
            "reveal": base.programs["reveal"],
        },
    )


def baseline_strategies(params: EscrowParams = EscrowParams()
                        ) -> list[tuple[str, StrategySpec]]:
    """Named reference strategies used across reports and sweeps."""
    zero, one = protocol_quadratic_pair(0.0, params)
    return [
        ("honest-alice-escrow", honest_alice_escrow(params)),
        ("honest-alice-coinflip", honest_alice_coinflip()),
        ("honest-bob-escrow", honest_bob_escrow()),
        ("honest-bob-coinflip", honest_bob_coinflip()),
        ("delayed-coin-alice", one),
        ("delayed-coin-alice-zero-side", zero),
        ("always-claim-0-alice", fixed_bit_alice(0, params)),
        ("identity-bob", honest_bob_escrow()),
        ("full-measurement-bob", full_measurement_bob(params)),
    ]


# ---------------------------------------------------------------------------
# Angle parameterizations


def unitary_from_angles(dim: int, angles: Sequence[float]) -> np.ndarray:
    """Euler-style product of two-level rotations; 3 angles per index pair.

    Each pair (i, j) contributes a Givens rotation by the first angle with
    the two row phases given by the other two; all-zero angles give the
    identity and (t, 0, 0) on dim 2 is the plane rotation by t.
    """
    angles = np.asarray(angles, dtype=float)
    expected = 3 * dim * (dim - 1) // 2
    if angles.shape != (expected,):
        raise BadParameterCount(f"dim {dim} needs {expected} angles, got {angles.shape}")
    u = np.eye(dim, dtype=complex)
    k = 0
    for i in range(dim):
        for j in range(i + 1, dim):
            t, ph_i, ph_j = angles[k:k + 3]
            k += 3
            g = np.eye(dim, dtype=complex)
            c, s = math.cos(t), math.sin(t)
            g[i, i] = c * np.exp(1j * ph_i)
            g[i, j] = -s * np.exp(1j * ph_i)
            g[j, i] = s * np.exp(1j * ph_j)
            g[j, j] = c * np.exp(1j * ph_j)
            u = g @ u
    return u


def state_from_angles(dim: int, angles: Sequence[float]) -> np.ndarray:
    """Unit vector from 2(dim-1) hyperspherical angles (component 0 real)."""
    angles = np.asarray(angles, dtype=float)
    if angles.shape != (2 * (dim - 1),):
        raise BadParameterCount(f"dim {dim} needs {2 * (dim - 1)} angles")
    thetas, phases = angles[:dim - 1], angles[dim - 1:]
    amps = np.zeros(dim, dtype=complex)
    rest = 1.0
    for k in range(dim - 1):
        phase = 1.0 if k == 0 else np.exp(1j * phases[k - 1])
        amps[k] = rest * math.cos(thetas[k]) * phase
        rest *= math.sin(thetas[k])
    amps[dim - 1] = rest * np.exp(1j * phases[dim - 2])
    return amps


def parameterize(dim: int, angles: Sequence[float]) -> StrategySpec:
    """Receiver attack from the documented Euler-angle family: one unitary on
    (deposit x ancillas) of the given dimension, applied on receipt."""
    n_wires = int(round(math.log2(dim)))
    if 2 ** n_wires != dim or not 1 <= n_wires <= 5:
        raise AdversaryError(f"dimension {dim} is not a supported qubit register size")
    u = unitary_from_angles(dim, angles)
    wires = ("dep",) + tuple(f"c{i}" for i in range(n_wires - 1))
    return StrategySpec(
        party="bob", ancilla_count=n_wires - 1, label=f"bob-angles(dim={dim})",
        programs={"receive": (Apply(wires, u),)},
    )


# ---------------------------------------------------------------------------
# Strategy factories for sweeps


def constant_bob(bit: int) -> StrategySpec:
    """Coin-flip receiver who always announces the same bit."""
    return StrategySpec(
        party="bob", ancilla_count=0, label=f"bob-constant-{bit}",
        programs={"choose": (SetBits({"bp": int(bit)}),)},
    )


def bob_measure_coinflip(u2: np.ndarray, target: int = 0) -> StrategySpec:
    """Coin-flip receiver measuring the deposit in the basis given by u2's columns."""
    meas = OrthogonalMeasurement.from_basis([u2[:, 0], u2[:, 1]])
    return StrategySpec(
        party="bob", ancilla_count=0, label="bob-basis-measurement",
        programs={"choose": (
            MeasureRecord(("dep",), meas, "guess"),
            SetBits({"bp": lambda rec, t=target: rec["guess"] ^ t}),
        )},
    )


def bob_entangling_coinflip(u8: np.ndarray, target: int = 0) -> StrategySpec:
    """Coin-flip receiver coupling the deposit to two ancillas, guessing from c0."""
    return StrategySpec(
        party="bob", ancilla_count=2, label="bob-entangling",
        programs={"choose": (
            Apply(("dep", "c0", "c1"), u8),
            MeasureRecord(("c0",), _COMP1, "guess"),
            SetBits({"bp": lambda rec, t=target: rec["guess"] ^ t}),
        )},
    )


def alice_coinflip_from_angles(angles: Sequence[float], target: int = 0) -> StrategySpec:
    """12-angle coin-flip depositor: 6 angles prepare the (a0, dep) state, then
    per received coin bit a 3-angle basis measurement of a0 picks the claimed x;
    the claimed bit is the received bit xor target."""
    angles = np.asarray(angles, dtype=float)
    if angles.shape != (12,):
        raise BadParameterCount("the coin-flip depositor space has 12 angles")
    prep = state_preparation_unitary(state_from_angles(4, angles[:6]))
    v0 = unitary_from_angles(2, angles[6:9])
    v1 = unitary_from_angles(2, angles[9:12])
    ctrl_basis = np.zeros((4, 4), dtype=complex)
    ctrl_basis[:2, :2] = v0.conj().T
    ctrl_basis[2:, 2:] = v1.conj().T
    cnot = np.eye(4)[[0, 1, 3, 2]].astype(complex)  # (bp, rb): rb ^= bp
    reveal = [Apply(("bp", "rb"), cnot)]
    if target:
        reveal.append(Apply(("rb",), np.array([[0, 1], [1, 0]], dtype=complex)))
    reveal += [
        Apply(("bp", "a0"), ctrl_basis),
        MeasureRecord(("a0",), _COMP1, "mx"),
        SetBits({"rx": "mx"}),
    ]
    return StrategySpec(
        party="alice", ancilla_count=1, label="alice-angles",
        programs={"deposit": (Apply(("a0", "dep"), prep),), "reveal": tuple(reveal)},
    )


# Deposit |0>|phi_{pi/4}> and claim (b', x=1-b'); the best product-state cheat.
ALICE_SEED_POINT = (math.pi / 4, 0.0, 0.0, 0.0, 0.0, 0.0,
                    math.pi / 2, 0.0, 0.0, 0.0, 0.0, 0.0)


def random_binding_pair(rng: np.random.Generator) -> tuple[StrategySpec, StrategySpec]:
    """Two depositor strategies sharing one deposit but opening differently.

    The shared deposit is a Haar-random pure state on (a0, a1, dep); each
    side of the pair rotates the private registers by its own random unitary
    before reading the claim bits off them.
    """
    prep = state_preparation_unitary(qmath.random_state(("a0", "a1", "dep"), rng).amplitudes)

    def one_side(u4: np.ndarray) -> StrategySpec:
        return StrategySpec(
            party="alice", ancilla_count=2, label="alice-random-opening",
            programs={
                "deposit": (Apply(("a0", "a1", "dep"), prep),),
                "reveal": (
                    Apply(("a0", "a1"), u4),
                    MeasureRecord(("a0",), _COMP1, "mb"),
                    MeasureRecord(("a1",), _COMP1, "mx"),
                    SetBits({"rb": "mb", "rx": "mx"}),
                ),
            },
        )

    return one_side(qmath.random_unitary(4, rng)), one_side(qmath.random_unitary(4, rng))


def random_return_attack(rng: np.random.Generator, ancillas: int = 2) -> StrategySpec:
    """Haar-random unitary coupling the deposit to `ancillas` fresh qubits."""
    wires = ("dep",) + tuple(f"c{i}" for i in range(ancillas))
    u = qmath.random_unitary(2 ** len(wires), rng)
    return StrategySpec(
        party="bob", ancilla_count=ancillas, label="bob-random-return",
        programs={"receive": (Apply(wires, u),)},
    )


# ---------------------------------------------------------------------------
# Derivative-free optimizer


@dataclass(frozen=True)
class ParameterSpace:
    """A continuous family of strategies: angle bounds plus a builder."""

    label: str
    dim: int
    lower: tuple[float, ...]
    upper: tuple[float, ...]
    build: Callable[[np.ndarray], StrategySpec]

    @classmethod
    def angles(cls, label: str, dim: int, build: Callable[[np.ndarray], StrategySpec],
               span: float = math.pi) -> "ParameterSpace":
        return cls(label, dim, (0.0,) * dim, (span,) * dim, build)


def bob_coinflip_space(target: int = 0) -> ParameterSpace:
    return ParameterSpace.angles(
        "bob-basis-3", 3, lambda x: bob_measure_coinflip(unitary_from_angles(2, x), target))


def alice_coinflip_space(target: int = 0) -> ParameterSpace:
    return ParameterSpace.angles(
        "alice-12", 12, lambda x: alice_coinflip_from_angles(x, target))


@dataclass(frozen=True)
class OptimizerConfig:
    """Objective and search budget; everything downstream of `seed` is deterministic."""

    objective: str = "max_win_prob"  # or "advantage_at_detection_cap"
    honest_party: str = "alice"      # whose verdict defines the win
    detection_cap: float = 1.0
    penalty: float = 1e3
    grid_resolution: int = 3
    simplex_iterations: int = 200
    n_starts: int = 3
    seed: int = 0

    def __post_init__(self):
        if self.objective not in ("max_win_prob", "advantage_at_detection_cap"):
            raise AdversaryError(f"unknown objective {self.objective!r}")
        if not 0.0 <= self.detection_cap <= 1.0:
            raise AdversaryError("detection cap must lie in [0, 1]")


@dataclass(frozen=True)
class OptimizeResult:
    best_params: tuple[float, ...]
    best_value: float
    trace: tuple[tuple[tuple[float, ...], float], ...]


def _objective_value(dist: OutcomeDistribution, config: OptimizerConfig) -> float:
    party = config.honest_party
    win = max(dist.verdict_probability(party, Verdict.ZERO),
              dist.verdict_probability(party, Verdict.ONE))
    if config.objective == "max_win_prob":
        return win
    err = dist.verdict_probability(party, Verdict.ERR)
    return (win - 0.5) - config.penalty * max(0.0, err - config.detection_cap)


def optimize(space: ParameterSpace, config: OptimizerConfig,
             evaluator: Callable[[StrategySpec], OutcomeDistribution],
             extra_seeds: Sequence[Sequence[float]] = ()) -> OptimizeResult:
    """Grid-seeded Nelder-Mead maximization over a strategy space.

    Every evaluated point is appended to the trace in evaluation order; ties
    in the best value are broken toward the lexicographically smaller
    parameter vector, so results are seed-stable regardless of refinements.
    """
    trace: list[tuple[tuple[float, ...], float]] = []

    def evaluate(x: np.ndarray) -> float:
        v = _objective_value(evaluator(space.build(np.asarray(x, dtype=float))), config)
        trace.append((tuple(float(t) for t in x), float(v)))
        return v

    if space.dim == 0:
        v = evaluate(np.zeros(0))
        return OptimizeResult((), v, tuple(trace))

    lower = np.asarray(space.lower)
    upper = np.asarray(space.upper)
    g = max(config.grid_resolution, 1)
    if g ** space.dim <= 729:
        axes = [np.linspace(lower[i], upper[i], g) for i in range(space.dim)]
        seeds = [np.array(pt) for pt in itertools.product(*axes)]
    else:
        rng = np.random.default_rng(config.seed)
        seeds = [rng.uniform(lower, upper) for _ in range(128)]
    seeds += [np.asarray(s, dtype=float) for s in extra_seeds]

    scored = [(evaluate(x), tuple(float(t) for t in x)) for x in seeds]
    scored.sort(key=lambda sv: (-sv[0], sv[1]))
    best_value, best_params = scored[0]

    for _, start in scored[:max(config.n_starts, 1)]:
        res = minimize(lambda x: -evaluate(x), np.array(start), method="Nelder-Mead",
                       options={"maxfev": config.simplex_iterations,
                                "xatol": 1e-7, "fatol": 1e-12, "disp": False})
        value, params = -float(res.fun), tuple(float(t) for t in res.x)
        if value > best_value + 1e-15 or (abs(value - best_value) <= 1e-15
                                          and params < best_params):
            best_value, best_params = value, params
    return OptimizeResult(best_params, best_value, tuple(trace))
