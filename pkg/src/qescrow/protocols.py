"""Two-party state machines for the bit-escrow and coin-flip games.

Three games are implemented with exact branch-tree enumeration:

* ``run_escrow``      -- deposit a qubit, then either reveal the classical
                         bits to the receiver or return the qubit for a check.
* ``run_coinflip``    -- the biased coin flip built on the escrow encoding
                         (deposit angle fixed to pi/8).
* ``run_weak_commitment`` -- deposit, reveal the bit, play the embedded coin
                         flip, then challenge the loser.

Classical messages are carried on qubit wires that an honest recipient
measures in the computational basis on receipt; a dishonest sender is free to
put superpositions on them.  Honest randomness is expanded into explicit
branch weights, never sampled, so honest/honest runs have *exactly* zero
error branches.

Wire layout (a wire only exists in a run that uses it):

    a0..a3   Alice's private ancillas      dep   the deposited qubit
    c0..c3   Bob's private ancillas        dep2  the embedded coin deposit
    rb, rx   Alice's revealed bit/basis    bp    Bob's announced coin bit
    rb2, rx2 reveal wires of the embedded coin

Strategies are data: per-phase lists of rounds (unitaries on held wires,
orthogonal measurements with classical rules, classical draws/records).  The
runner enforces wire ownership per phase and raises ``MalformedStrategy`` on
any violation.  Runners are pure functions from strategies to outcome
distributions; concurrent runs share nothing mutable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Mapping, Sequence

import numpy as np

from . import qmath
from .qmath import (
    BRANCH_PRUNE,
    DensityMatrix,
    Mixture,
    OrthogonalMeasurement,
    StateVector,
    apply_unitary,
    partial_trace,
)

THETA_DEFAULT = math.pi / 8
COIN_THETA = math.pi / 8
MAX_TOTAL_WIRES = 9

_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_COMP1 = OrthogonalMeasurement.computational(1)


class ProtocolError(Exception):
    pass


class MalformedStrategy(ProtocolError):
    pass


class Challenge(Enum):
    REVEAL_TO_BOB = "reveal"
    RETURN_TO_ALICE = "return"


class Verdict(Enum):
    ZERO = "0"
    ONE = "1"
    ERR = "err"

    @classmethod
    def of_bit(cls, b: int) -> "Verdict":
        return cls.ONE if b else cls.ZERO


@dataclass(frozen=True)
class EscrowParams:
    """Encoding angle of the escrow states; must lie in (0, pi/8]."""

    theta: float = THETA_DEFAULT

    def __post_init__(self):
        if not 0.0 < self.theta <= math.pi / 8 + 1e-12:
            raise ProtocolError(f"theta {self.theta} outside (0, pi/8]")


# ---------------------------------------------------------------------------
# Encoding states


def rotation(alpha: float) -> np.ndarray:
    c, s = math.cos(alpha), math.sin(alpha)
    return np.array([[c, -s], [s, c]], dtype=complex)


def phi_vec(alpha: float) -> np.ndarray:
    return np.array([math.cos(alpha), math.sin(alpha)], dtype=complex)


def phi(alpha: float, wire: str = "q") -> StateVector:
    """phi_alpha = cos(alpha)|0> + sin(alpha)|1> on a single named wire."""
    if not -math.pi - 1e-12 <= alpha <= math.pi + 1e-12:
        raise ProtocolError(f"angle {alpha} outside [-pi, pi]")
    return StateVector((wire,), phi_vec(alpha))


def bx_angle(b: int, x: int, theta: float) -> float:
    """Encoding angle for (b, x): -theta, theta, pi/2-theta, pi/2+theta."""
    return (0.0 if b == 0 else math.pi / 2) + (theta if x else -theta)


def phi_bx(b: int, x: int, theta: float, wire: str = "q") -> StateVector:
    return phi(bx_angle(b, x, theta), wire)


def escrow_basis(x: int, theta: float) -> OrthogonalMeasurement:
    """The check basis {phi_{0,x}, phi_{1,x}}; outcome labels are the bit b."""
    return OrthogonalMeasurement.from_basis(
        [phi_vec(bx_angle(0, x, theta)), phi_vec(bx_angle(1, x, theta))], labels=(0, 1)
    )


def escrow_bit_mixture(b: int, theta: float, wire: str = "dep") -> Mixture:
    """Honest depositor's view of bit b: uniform over the two x encodings."""
    return Mixture((0.5, 0.5), (phi_bx(b, 0, theta, wire), phi_bx(b, 1, theta, wire)))


def escrow_bit_density(b: int, theta: float, wire: str = "dep") -> DensityMatrix:
    return escrow_bit_mixture(b, theta, wire).density()


# ---------------------------------------------------------------------------
# Strategy rounds

Gate = np.ndarray | Callable[[dict], np.ndarray]
BitSource = int | str | Callable[[dict], int]


@dataclass(frozen=True)
class Draw:
    """Classical randomness: branch on record[name] = 0..len(weights)-1."""

    name: str
    weights: tuple[float, ...] = (0.5, 0.5)


@dataclass(frozen=True)
class SetRecord:
    """Write a classical note into the party's record (no quantum action)."""

    name: str
    value: int | Callable[[dict], int]


@dataclass(frozen=True)
class Apply:
    """Unitary on held wires; a callable gate is resolved against the record."""

    wires: tuple[str, ...]
    gate: Gate


@dataclass(frozen=True)
class MeasureRecord:
    """Orthogonal measurement on held wires, outcome label stored in the record."""

    wires: tuple[str, ...]
    measurement: OrthogonalMeasurement
    name: str


@dataclass(frozen=True)
class SetBits:
    """Write classical bits onto fresh message wires (X^bit per wire).

    Sources may be constants, record keys, or callables of the record; this is
    the classical rule mapping measurement outcomes to the next message bits.
    """

    assignments: Mapping[str, BitSource]


Round = Draw | SetRecord | Apply | MeasureRecord | SetBits


@dataclass(frozen=True)
class StrategySpec:
    """A party's program: private ancilla count plus per-phase round lists.

    ``honest`` marks parties that follow the protocol's classical conventions
    (incoming message wires are measured on receipt, verdicts computed by the
    honest rules).  Phase names are documented per runner.
    """

    party: str
    ancilla_count: int
    programs: Mapping[str, tuple[Round, ...]]
    honest: bool = False
    label: str = ""

    def __post_init__(self):
        if self.party not in ("alice", "bob"):
            raise MalformedStrategy(f"unknown party {self.party!r}")
        if not 0 <= self.ancilla_count <= 4:
            raise MalformedStrategy("ancilla count must be between 0 and 4")
        object.__setattr__(self, "programs",
                           {k: tuple(v) for k, v in dict(self.programs).items()})

    @property
    def ancillas(self) -> tuple[str, ...]:
        prefix = "a" if self.party == "alice" else "c"
        return tuple(f"{prefix}{i}" for i in range(self.ancilla_count))


def validate_strategy(spec: StrategySpec, phase_wires: Mapping[str, tuple[str, ...]]) -> None:
    """Static validity: known phases, owned wires, unitary gates, total rules."""
    for phase, rounds in spec.programs.items():
        if phase not in phase_wires:
            raise MalformedStrategy(f"{spec.party} has a program for unknown phase {phase!r}")
        allowed = set(spec.ancillas) | set(phase_wires[phase])
        for rnd in rounds:
            if isinstance(rnd, Draw):
                if any(w < 0 for w in rnd.weights) or abs(sum(rnd.weights) - 1.0) > 1e-10:
                    raise MalformedStrategy(f"draw weights {rnd.weights} are not a distribution")
            elif isinstance(rnd, Apply):
                if not set(rnd.wires) <= allowed:
                    raise MalformedStrategy(
                        f"{spec.party} touches {set(rnd.wires) - allowed} in phase {phase!r}")
                if isinstance(rnd.gate, np.ndarray) and not qmath.is_unitary(rnd.gate):
                    raise MalformedStrategy(f"gate in phase {phase!r} is not unitary")
            elif isinstance(rnd, MeasureRecord):
                if not set(rnd.wires) <= allowed:
                    raise MalformedStrategy(
                        f"{spec.party} measures {set(rnd.wires) - allowed} in phase {phase!r}")
            elif isinstance(rnd, SetBits):
                if not set(rnd.assignments) <= allowed:
                    raise MalformedStrategy(
                        f"{spec.party} writes {set(rnd.assignments) - allowed} in phase {phase!r}")
            elif not isinstance(rnd, SetRecord):
                raise MalformedStrategy(f"unknown round type {type(rnd).__name__}")


# ---------------------------------------------------------------------------
# Branch-tree execution


@dataclass
class _Branch:
    prob: float
    state: StateVector
    recs: dict[str, dict]
    transcript: tuple


def _copy_recs(recs: dict[str, dict]) -> dict[str, dict]:
    return {p: dict(r) for p, r in recs.items()}


def _resolve_bit(src: BitSource, rec: dict) -> int:
    if callable(src):
        v = src(rec)
    elif isinstance(src, str):
        if src not in rec:
            raise MalformedStrategy(f"record key {src!r} not set before use")
        v = rec[src]
    else:
        v = src
    if v not in (0, 1):
        raise MalformedStrategy(f"classical bit source produced {v!r}")
    return int(v)


def _run_program(branches: list[_Branch], spec: StrategySpec, phase: str) -> list[_Branch]:
    rounds = spec.programs.get(phase, ())
    if not rounds:
        return branches
    for rnd in rounds:
        nxt: list[_Branch] = []
        for br in branches:
            rec = br.recs[spec.party]
            if isinstance(rnd, Draw):
                for value, w in enumerate(rnd.weights):
                    if w < BRANCH_PRUNE:
                        continue
                    recs = _copy_recs(br.recs)
                    recs[spec.party][rnd.name] = value
                    nxt.append(_Branch(br.prob * w, br.state, recs, br.transcript))
            elif isinstance(rnd, SetRecord):
                recs = _copy_recs(br.recs)
                recs[spec.party][rnd.name] = (
                    rnd.value(rec) if callable(rnd.value) else rnd.value)
                nxt.append(_Branch(br.prob, br.state, recs, br.transcript))
            elif isinstance(rnd, Apply):
                try:
                    gate = rnd.gate(rec) if callable(rnd.gate) else rnd.gate
                    state = apply_unitary(br.state, gate, rnd.wires)
                except (qmath.QMathError, KeyError) as exc:
                    raise MalformedStrategy(f"bad gate in phase {phase!r}: {exc!r}") from exc
                nxt.append(_Branch(br.prob, state, br.recs, br.transcript))
            elif isinstance(rnd, MeasureRecord):
                for p, st, label in qmath.measure(br.state, rnd.measurement, rnd.wires):
                    recs = _copy_recs(br.recs)
                    recs[spec.party][rnd.name] = label
                    nxt.append(_Branch(br.prob * p, st, recs, br.transcript))
            elif isinstance(rnd, SetBits):
                state = br.state
                for wire, src in rnd.assignments.items():
                    if _resolve_bit(src, rec):
                        state = apply_unitary(state, _X, (wire,))
                nxt.append(_Branch(br.prob, state, br.recs, br.transcript))
            else:
                raise MalformedStrategy(f"unknown round type {type(rnd).__name__}")
        branches = nxt
    return branches


def _read_bit(branches: list[_Branch], wire: str, reader: str, sender: str,
              key: str) -> list[_Branch]:
    """Measure a classical-convention wire into the reader's record + transcript."""
    out: list[_Branch] = []
    for br in branches:
        for p, st, label in qmath.measure(br.state, _COMP1, (wire,)):
            recs = _copy_recs(br.recs)
            recs[reader][key] = int(label)
            out.append(_Branch(br.prob * p, st, recs,
                               br.transcript + ((sender, key, int(label)),)))
    return out


def _check_deposit(branches: list[_Branch], dep_wire: str, theta: float,
                   checker: str, b_key: str, x_key: str) -> list[_Branch]:
    """Project the deposit on the claimed encoding; checker verdict = bit or ERR."""
    out: list[_Branch] = []
    for br in branches:
        rec = br.recs[checker]
        if b_key not in rec or x_key not in rec:
            raise MalformedStrategy(
                f"{checker} lacks the classical record ({b_key}, {x_key}) needed to verify")
        b, x = int(rec[b_key]), int(rec[x_key])
        for p, st, outcome in qmath.measure(br.state, escrow_basis(x, theta), (dep_wire,)):
            recs = _copy_recs(br.recs)
            recs[checker]["verdict"] = (
                Verdict.of_bit(b) if int(outcome) == b else Verdict.ERR)
            out.append(_Branch(br.prob * p, st, recs, br.transcript))
    return out


def _initial_branches(wires: Sequence[str], alice_seed: dict, bob_seed: dict
                      ) -> list[_Branch]:
    if len(wires) > MAX_TOTAL_WIRES:
        raise MalformedStrategy(
            f"{len(wires)} wires exceed the {MAX_TOTAL_WIRES}-qubit budget")
    amps = np.zeros(2 ** len(wires), dtype=complex)
    amps[0] = 1.0
    return [_Branch(1.0, StateVector(tuple(wires), amps),
                    {"alice": dict(alice_seed), "bob": dict(bob_seed)}, ())]


# ---------------------------------------------------------------------------
# Outcome distributions


@dataclass(frozen=True)
class OutcomeBranch:
    probability: float
    alice_verdict: Verdict
    bob_verdict: Verdict
    transcript: tuple


@dataclass(frozen=True)
class OutcomeDistribution:
    """One leaf per distinct (verdicts, transcript); probabilities sum to 1."""

    branches: tuple[OutcomeBranch, ...]

    def __post_init__(self):
        total = sum(b.probability for b in self.branches)
        if abs(total - 1.0) > 1e-9:
            raise ProtocolError(f"branch probabilities sum to {total}")

    def total(self) -> float:
        return sum(b.probability for b in self.branches)

    def verdict_probability(self, party: str, verdict: Verdict) -> float:
        if party == "alice":
            return sum(b.probability for b in self.branches if b.alice_verdict is verdict)
        if party == "bob":
            return sum(b.probability for b in self.branches if b.bob_verdict is verdict)
        raise ProtocolError(f"unknown party {party!r}")

    def transcript_probability(self, entry: tuple) -> float:
        return sum(b.probability for b in self.branches if entry in b.transcript)

    def sample(self, n: int, rng: np.random.Generator) -> dict[tuple[Verdict, Verdict], int]:
        """Multinomial draw of n runs over the enumerated leaves, keyed by verdict pair."""
        probs = np.array([b.probability for b in self.branches])
        counts = rng.multinomial(n, probs / probs.sum())
        out: dict[tuple[Verdict, Verdict], int] = {}
        for b, c in zip(self.branches, counts):
            key = (b.alice_verdict, b.bob_verdict)
            out[key] = out.get(key, 0) + int(c)
        return out


def _final_verdicts(br: _Branch, alice_honest: bool, bob_honest: bool
                    ) -> tuple[Verdict, Verdict]:
    av = br.recs["alice"].get("verdict")
    bv = br.recs["bob"].get("verdict")
    if av is None and bv is None:
        raise MalformedStrategy("no verdict was produced on some branch")
    # A cheater has no meaningful verdict of its own; report the honest outcome.
    if alice_honest and not bob_honest and av is not None:
        bv = av
    elif bob_honest and not alice_honest and bv is not None:
        av = bv
    if av is None:
        av = bv
    if bv is None:
        bv = av
    return av, bv


def _assemble(branches: list[_Branch], alice_honest: bool, bob_honest: bool
              ) -> OutcomeDistribution:
    merged: dict[tuple, float] = {}
    for br in branches:
        av, bv = _final_verdicts(br, alice_honest, bob_honest)
        key = (av, bv, br.transcript)
        merged[key] = merged.get(key, 0.0) + br.prob
    leaves = tuple(
        OutcomeBranch(p, av, bv, tr)
        for (av, bv, tr), p in sorted(merged.items(), key=lambda kv: repr(kv[0]))
    )
    return OutcomeDistribution(leaves)


# ---------------------------------------------------------------------------
# Honest parties


def honest_alice_escrow(params: EscrowParams = EscrowParams()) -> StrategySpec:
    """Deposit phi_{b,x} for the instructed bit b (record-seeded) and random x."""
    theta = params.theta

    def prep(rec: dict) -> np.ndarray:
        return rotation(bx_angle(rec["b"], rec["x"], theta))

    return StrategySpec(
        party="alice", ancilla_count=0, honest=True, label="honest-alice-escrow",
        programs={
            "deposit": (Draw("x"), Apply(("dep",), prep)),
            "reveal": (SetBits({"rb": "b", "rx": "x"}),),
            "reveal_bit": (SetBits({"rb": "b"}),),
        },
    )


def honest_bob_escrow() -> StrategySpec:
    return StrategySpec(party="bob", ancilla_count=0, honest=True,
                        label="honest-bob-escrow", programs={})


def honest_alice_coinflip() -> StrategySpec:
    def prep(rec: dict) -> np.ndarray:
        return rotation(bx_angle(rec["b"], rec["x"], COIN_THETA))

    return StrategySpec(
        party="alice", ancilla_count=0, honest=True, label="honest-alice-coinflip",
        programs={
            "deposit": (Draw("b"), Draw("x"), Apply(("dep",), prep)),
            "reveal": (SetBits({"rb": "b", "rx": "x"}),),
        },
    )


def honest_bob_coinflip() -> StrategySpec:
    return StrategySpec(
        party="bob", ancilla_count=0, honest=True, label="honest-bob-coinflip",
        programs={"choose": (Draw("bprime"), SetBits({"bp": "bprime"}))},
    )


def honest_alice_weak(params: EscrowParams = EscrowParams()) -> StrategySpec:
    theta = params.theta

    def prep(rec: dict) -> np.ndarray:
        return rotation(bx_angle(rec["b"], rec["x"], theta))

    def prep_coin(rec: dict) -> np.ndarray:
        return rotation(bx_angle(rec["b2"], rec["x2"], COIN_THETA))

    return StrategySpec(
        party="alice", ancilla_count=0, honest=True, label="honest-alice-weak",
        programs={
            "deposit": (Draw("x"), Apply(("dep",), prep)),
            "reveal_bit": (SetBits({"rb": "b"}),),
            "coin_deposit": (Draw("b2"), Draw("x2"), Apply(("dep2",), prep_coin)),
            "coin_reveal": (SetBits({"rb2": "b2", "rx2": "x2"}),),
            "reveal_x": (SetBits({"rx": "x"}),),
        },
    )


def honest_bob_weak() -> StrategySpec:
    return StrategySpec(
        party="bob", ancilla_count=0, honest=True, label="honest-bob-weak",
        programs={"coin_choose": (Draw("bprime"), SetBits({"bp": "bprime"}))},
    )


# ---------------------------------------------------------------------------
# Runners

_ESCROW_PHASES = {
    "alice": {"deposit": ("dep",), "reveal": ("rb", "rx"), "reveal_bit": ("rb",)},
    "bob": {"receive": ("dep",), "return": ("dep",)},
}

_COINFLIP_PHASES = {
    "alice": {"deposit": ("dep",), "reveal": ("bp", "rb", "rx")},
    "bob": {"choose": ("dep", "bp")},
}

_WEAK_PHASES = {
    "alice": {"deposit": ("dep",), "reveal_bit": ("rb",), "coin_deposit": ("dep2",),
              "coin_reveal": ("bp", "rb2", "rx2"), "reveal_x": ("rx",)},
    "bob": {"receive": ("dep",), "coin_choose": ("dep2", "bp"), "return": ("dep",)},
}


def run_escrow(alice: StrategySpec, bob: StrategySpec, challenge: Challenge,
               claimed_bit: int | None = None,
               params: EscrowParams = EscrowParams()) -> OutcomeDistribution:
    """Exact outcome distribution of the escrow game under one fixed challenge.

    ``claimed_bit`` seeds the depositor's classical record with ``b``; the
    honest strategy reads it, a dishonest one may ignore it.  The challenge is
    an external input because the two verification games are analyzed
    separately; challenge selection only becomes part of the composed game in
    ``run_weak_commitment``.  In the return challenge the depositor's record
    must contain ``b`` and ``x`` (honest strategies record them) or the run
    fails with ``MalformedStrategy``.
    """
    theta = params.theta
    validate_strategy(alice, _ESCROW_PHASES["alice"])
    validate_strategy(bob, _ESCROW_PHASES["bob"])

    wires = list(alice.ancillas) + ["dep"]
    if challenge is Challenge.REVEAL_TO_BOB:
        wires += ["rb", "rx"]
    wires += list(bob.ancillas)
    seed = {} if claimed_bit is None else {"b": int(claimed_bit)}
    branches = _initial_branches(wires, seed, {})

    branches = _run_program(branches, alice, "deposit")
    branches = _run_program(branches, bob, "receive")

    if challenge is Challenge.REVEAL_TO_BOB:
        branches = _run_program(branches, alice, "reveal")
        branches = _read_bit(branches, "rb", "bob", "alice", "b")
        branches = _read_bit(branches, "rx", "bob", "alice", "x")
        branches = _check_deposit(branches, "dep", theta, "bob", "b", "x")
        if alice.honest:  # the revealer's own result is the bit she announced
            for br in branches:
                br.recs["alice"]["verdict"] = Verdict.of_bit(int(br.recs["alice"]["b"]))
    else:
        branches = _run_program(branches, bob, "return")
        branches = _check_deposit(branches, "dep", theta, "alice", "b", "x")
    return _assemble(branches, alice.honest, bob.honest)


def run_escrow_reveal_then_return(alice: StrategySpec, bob: StrategySpec,
                                  claimed_bit: int | None = None,
                                  params: EscrowParams = EscrowParams()
                                  ) -> OutcomeDistribution:
    """Modified return game: the bit is revealed before the qubit comes back.

    Bob may condition the unitary in his ``return`` program on the revealed
    bit, which lands in his record under ``b_claim``.
    """
    theta = params.theta
    validate_strategy(alice, _ESCROW_PHASES["alice"])
    validate_strategy(bob, _ESCROW_PHASES["bob"])

    wires = list(alice.ancillas) + ["dep", "rb"] + list(bob.ancillas)
    seed = {} if claimed_bit is None else {"b": int(claimed_bit)}
    branches = _initial_branches(wires, seed, {})
    branches = _run_program(branches, alice, "deposit")
    branches = _run_program(branches, bob, "receive")
    branches = _run_program(branches, alice, "reveal_bit")
    branches = _read_bit(branches, "rb", "bob", "alice", "b_claim")
    branches = _run_program(branches, bob, "return")
    branches = _check_deposit(branches, "dep", theta, "alice", "b", "x")
    return _assemble(branches, alice.honest, bob.honest)


def _coin_subgame(branches: list[_Branch], alice: StrategySpec, bob: StrategySpec,
                  dep_wire: str, phases: tuple[str, str, str],
                  reveal_wires: tuple[str, str], results: tuple[str, str],
                  alice_bit_key: str) -> list[_Branch]:
    """Common body of the coin flip; per-party coin results land in records.

    ``phases``  = (alice deposit, bob choose, alice reveal) phase names,
    ``results`` = record keys getting each party's coin result (int or ERR),
    ``alice_bit_key`` = record key of the honest depositor's coin bit.
    """
    dep_phase, choose_phase, reveal_phase = phases
    rb_wire, rx_wire = reveal_wires
    res_a, res_b = results

    branches = _run_program(branches, alice, dep_phase)
    branches = _run_program(branches, bob, choose_phase)
    if alice.honest:
        branches = _read_bit(branches, "bp", "alice", "bob", "bprime")
    branches = _run_program(branches, alice, reveal_phase)
    branches = _read_bit(branches, rb_wire, "bob", "alice", "b_coin")
    branches = _read_bit(branches, rx_wire, "bob", "alice", "x_coin")

    out: list[_Branch] = []
    for br in branches:
        b_claim = int(br.recs["bob"]["b_coin"])
        x_claim = int(br.recs["bob"]["x_coin"])
        for p, st, outcome in qmath.measure(br.state, escrow_basis(x_claim, COIN_THETA),
                                            (dep_wire,)):
            recs = _copy_recs(br.recs)
            rb, ra = recs["bob"], recs["alice"]
            if int(outcome) != b_claim:
                rb[res_b] = Verdict.ERR
            elif "bprime" in rb:
                rb[res_b] = b_claim ^ int(rb["bprime"])
            if alice.honest:
                ra[res_a] = int(ra[alice_bit_key]) ^ int(ra["bprime"])
            out.append(_Branch(br.prob * p, st, recs, br.transcript))
    return out


def run_coinflip(alice: StrategySpec, bob: StrategySpec) -> OutcomeDistribution:
    """Exact outcome distribution of the biased coin flip (theta = pi/8).

    Alice deposits phi_{b,x} with b, x uniform; Bob announces b'; Alice
    reveals (b, x); Bob checks the deposit against the claim.  The result is
    err if the check catches the revealer and b xor b' otherwise; an honest
    revealer is never caught, so her result is always b xor b'.
    """
    validate_strategy(alice, _COINFLIP_PHASES["alice"])
    validate_strategy(bob, _COINFLIP_PHASES["bob"])
    if not (alice.honest or bob.honest):
        raise MalformedStrategy("at least one party must be honest")

    wires = list(alice.ancillas) + ["dep", "bp", "rb", "rx"] + list(bob.ancillas)
    branches = _initial_branches(wires, {}, {})
    branches = _coin_subgame(branches, alice, bob, "dep",
                             ("deposit", "choose", "reveal"), ("rb", "rx"),
                             ("res_a", "res_b"), alice_bit_key="b")
    for br in branches:
        for party, key in (("alice", "res_a"), ("bob", "res_b")):
            r = br.recs[party].get(key)
            if r is not None:
                br.recs[party]["verdict"] = r if r is Verdict.ERR else Verdict.of_bit(r)
    return _assemble(branches, alice.honest, bob.honest)


def run_weak_commitment(alice: StrategySpec, bob: StrategySpec, deposited_bit: int,
                        params: EscrowParams = EscrowParams()) -> OutcomeDistribution:
    """Deposit, reveal the bit, play the embedded coin flip, challenge the loser.

    Coin result 1 sends the depositor to the reveal-x check, coin result 0
    sends the receiver to the return-the-qubit check; a coin result of err
    rejects outright.  This runner provides the mechanics of the composition
    only; no security property is claimed for it.
    """
    theta = params.theta
    validate_strategy(alice, _WEAK_PHASES["alice"])
    validate_strategy(bob, _WEAK_PHASES["bob"])
    if alice.ancilla_count + bob.ancilla_count > 2:
        raise MalformedStrategy("the composed game leaves room for 2 ancilla qubits")
    if not (alice.honest or bob.honest):
        raise MalformedStrategy("at least one party must be honest")

    wires = (list(alice.ancillas) + ["dep", "rb", "rx", "dep2", "bp", "rb2", "rx2"]
             + list(bob.ancillas))
    branches = _initial_branches(wires, {"b": int(deposited_bit)}, {})
    branches = _run_program(branches, alice, "deposit")
    branches = _run_program(branches, bob, "receive")
    branches = _run_program(branches, alice, "reveal_bit")
    branches = _read_bit(branches, "rb", "bob", "alice", "b_claim")
    branches = _coin_subgame(branches, alice, bob, "dep2",
                             ("coin_deposit", "coin_choose", "coin_reveal"),
                             ("rb2", "rx2"), ("coin_a", "coin_b"), alice_bit_key="b2")

    done: list[_Branch] = []
    alice_challenged: list[_Branch] = []
    bob_challenged: list[_Branch] = []
    for br in branches:
        ra, rb = br.recs["alice"], br.recs["bob"]
        r = ra.get("coin_a") if alice.honest else rb.get("coin_b")
        br.transcript += (("coin", "result", "err" if r is Verdict.ERR else int(r)),)
        if r is Verdict.ERR:
            ra["verdict"] = Verdict.ERR
            rb["verdict"] = Verdict.ERR
            done.append(br)
        elif int(r) == 1:
            alice_challenged.append(br)
        else:
            bob_challenged.append(br)

    if alice_challenged:
        part = _run_program(alice_challenged, alice, "reveal_x")
        part = _read_bit(part, "rx", "bob", "alice", "x_claim")
        part = _check_deposit(part, "dep", theta, "bob", "b_claim", "x_claim")
        if alice.honest:
            for br in part:
                br.recs["alice"]["verdict"] = Verdict.of_bit(int(br.recs["alice"]["b"]))
        done.extend(part)
    if bob_challenged:
        part = _run_program(bob_challenged, bob, "return")
        part = _check_deposit(part, "dep", theta, "alice", "b", "x")
        if bob.honest:
            for br in part:
                br.recs["bob"]["verdict"] = Verdict.of_bit(int(br.recs["bob"]["b_claim"]))
        done.extend(part)
    return _assemble(done, alice.honest, bob.honest)


def deposit_reduced_state(alice: StrategySpec, claimed_bit: int | None = None,
                          params: EscrowParams = EscrowParams()) -> DensityMatrix:
    """Reduced density matrix on the deposit wire right after the deposit phase.

    Whatever the depositor later does cannot change this state, so it is the
    object that binds her; strategy pairs must agree on it to be comparable.
    """
    del params  # the deposit phase itself never consults theta
    wires = list(alice.ancillas) + ["dep"]
    seed = {} if claimed_bit is None else {"b": int(claimed_bit)}
    branches = _initial_branches(wires, seed, {})
    branches = _run_program(branches, alice, "deposit")
    total = sum(br.prob for br in branches)
    m = sum(br.prob / total * partial_trace(br.state, ("dep",)).matrix for br in branches)
    return DensityMatrix(("dep",), m)
