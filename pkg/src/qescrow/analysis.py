"""Binding, sealing, and coin-flip bias metrics with their proved frontiers.

Conventions pinned here once:

* Binding claims p0, p1 (q0, q1) count what the depositor announces, whether
  or not the check then rejects; p_err (q_err) is the checker's error verdict
  mass.  The frontier is  |p0 - q0| <= (sqrt(p_err) + sqrt(q_err)) / cos(2t),
  and the weaker two-parameter form gamma <= 2 sqrt(eps) / cos(2t) with
  eps = max(p_err, q_err) is checked separately.

* Sealing advantage is the optimal-guess success minus 1/2 over the
  receiver's kept wires, i.e. a quarter of the kept trace distance; the kept
  trace distance itself is reported alongside because the two conventions
  differ by that factor of four.  Detection is the return-check error mass,
  identically 1/4 of the summed squared off-claim components (the w' of the
  attack decomposition).  The explicit-constant frontier is

      advantage <= (2^7 cot(2t) + sqrt(2)) sqrt(p) + p/2,

  obtained by chaining |<w00|w11>| >= 1 - (2^15 cot^2(2t) + 4) p through the
  triangle inequality; it is deliberately loose, so every report also carries
  the observed advantage next to the bound to keep the slack visible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import qmath
from .qmath import DensityMatrix, trace_norm
from .protocols import (
    Apply,
    Challenge,
    EscrowParams,
    OutcomeDistribution,
    StrategySpec,
    Verdict,
    deposit_reduced_state,
    honest_alice_coinflip,
    honest_alice_escrow,
    honest_bob_coinflip,
    honest_bob_escrow,
    phi_vec,
    bx_angle,
    run_coinflip,
    run_escrow,
    run_escrow_reveal_then_return,
)

BOUND_TOL = 1e-9

# Coin-flip caps at the protocol angle pi/8: the receiver cannot push the
# honest side's result past cos^2(pi/8), the depositor not past (sqrt(8)-1)/2.
BOB_WIN_CAP = math.cos(math.pi / 8) ** 2
ALICE_WIN_CAP = (math.sqrt(8.0) - 1.0) / 2.0


class AnalysisError(Exception):
    pass


class DepositMismatch(AnalysisError):
    pass


class NotUnitaryAttack(AnalysisError):
    pass


# ---------------------------------------------------------------------------
# Binding


@dataclass(frozen=True)
class BindingReport:
    theta: float
    p0: float
    p1: float
    p_err: float
    q0: float
    q1: float
    q_err: float

    def __post_init__(self):
        for name in ("p0", "p1", "p_err", "q0", "q1", "q_err"):
            v = getattr(self, name)
            if not -BOUND_TOL <= v <= 1.0 + BOUND_TOL:
                raise AnalysisError(f"{name}={v} is not a probability")
        if self.p0 + self.p1 > 1.0 + 1e-9 or self.q0 + self.q1 > 1.0 + 1e-9:
            raise AnalysisError("claim masses exceed 1")

    @property
    def gamma_observed(self) -> float:
        return max(abs(self.p0 - self.q0), abs(self.p1 - self.q1))

    @property
    def bound(self) -> float:
        return (math.sqrt(self.p_err) + math.sqrt(self.q_err)) / math.cos(2 * self.theta)


def _claim_probabilities(dist: OutcomeDistribution) -> tuple[float, float, float]:
    p0 = dist.transcript_probability(("alice", "b", 0))
    p1 = dist.transcript_probability(("alice", "b", 1))
    return p0, p1, dist.verdict_probability("bob", Verdict.ERR)


def binding_metrics(alice0: StrategySpec, alice1: StrategySpec,
                    params: EscrowParams = EscrowParams()) -> BindingReport:
    """Claim/error masses of a zero-vs-one strategy pair under the reveal challenge.

    The two strategies must share a deposit: equality is checked on the
    reduced density matrix of the deposit wire, since nothing the depositor
    does afterwards can change it.
    """
    dep0 = deposit_reduced_state(alice0)
    dep1 = deposit_reduced_state(alice1)
    if np.max(np.abs(dep0.matrix - dep1.matrix)) > 1e-9:
        raise DepositMismatch("the two strategies deposit different reduced states")
    bob = honest_bob_escrow()
    d0 = run_escrow(alice0, bob, Challenge.REVEAL_TO_BOB, params=params)
    d1 = run_escrow(alice1, bob, Challenge.REVEAL_TO_BOB, params=params)
    p0, p1, perr = _claim_probabilities(d0)
    q0, q1, qerr = _claim_probabilities(d1)
    return BindingReport(params.theta, p0, p1, perr, q0, q1, qerr)


def check_binding_bound(report: BindingReport) -> bool:
    """Sharp per-run frontier: gamma <= (sqrt(p_err)+sqrt(q_err))/cos(2 theta)."""
    return report.gamma_observed <= report.bound + BOUND_TOL


def binding_theorem_gamma(eps: float, theta: float) -> float:
    """Two-parameter binding statement: gamma bound 2 sqrt(eps)/cos(2 theta)."""
    return 2.0 * math.sqrt(eps) / math.cos(2 * theta)


def check_binding_theorem_form(report: BindingReport) -> bool:
    eps = max(report.p_err, report.q_err)
    return report.gamma_observed <= binding_theorem_gamma(eps, report.theta) + BOUND_TOL


# ---------------------------------------------------------------------------
# Sealing


@dataclass(frozen=True)
class SealingReport:
    theta: float
    advantage_eps: float
    detection_p: float
    w_norms: tuple[float, float, float, float]  # ||w'_{b,x}||^2 for (0,0),(0,1),(1,0),(1,1)
    bound_rhs: float
    kept_trace_distance: float

    def __post_init__(self):
        if not -BOUND_TOL <= self.advantage_eps <= 0.5 + BOUND_TOL:
            raise AnalysisError(f"advantage {self.advantage_eps} outside [0, 1/2]")
        if abs(self.detection_p - 0.25 * sum(self.w_norms)) > BOUND_TOL:
            raise AnalysisError("detection mass disagrees with the w' component masses")


def extract_attack_unitary(bob: StrategySpec, phase: str = "receive"
                           ) -> tuple[np.ndarray, int]:
    """The receiver's single attack unitary on (dep, ancillas), plus ancilla count."""
    rounds = bob.programs.get(phase, ())
    if len(rounds) != 1 or not isinstance(rounds[0], Apply):
        raise NotUnitaryAttack(
            f"attack must be a single unitary round in phase {phase!r}")
    rnd = rounds[0]
    if rnd.wires != ("dep",) + bob.ancillas:
        raise NotUnitaryAttack("attack must act on (dep, ancillas) in that order")
    gate = rnd.gate
    if callable(gate):
        raise NotUnitaryAttack("attack unitary must be a fixed matrix")
    if not qmath.is_unitary(gate):
        raise NotUnitaryAttack("attack matrix fails the unitarity check")
    return np.asarray(gate, dtype=complex), bob.ancilla_count


def w_decomposition(u: np.ndarray, theta: float) -> dict[tuple[int, int], tuple[np.ndarray, np.ndarray]]:
    """Per (b, x): kept-register components along the claimed and opposite encodings.

    U (phi_{b,x} (x) |0..0>) = phi_{b,x} (x) w_{b,x} + phi_{not b,x} (x) w'_{b,x};
    the w' masses are exactly the per-case check-failure probabilities.
    """
    anc_dim = u.shape[0] // 2
    e0 = np.zeros(anc_dim)
    e0[0] = 1.0
    out = {}
    for b in (0, 1):
        for x in (0, 1):
            attacked = (u @ np.kron(phi_vec(bx_angle(b, x, theta)), e0)).reshape(2, anc_dim)
            w = phi_vec(bx_angle(b, x, theta)).conj() @ attacked
            w_bad = phi_vec(bx_angle(1 - b, x, theta)).conj() @ attacked
            out[(b, x)] = (w, w_bad)
    return out


def sealing_bound_rhs(theta: float, detection_p: float) -> float:
    """Explicit-constant frontier (2^7 cot(2t) + sqrt(2)) sqrt(p) + p/2."""
    cot = 1.0 / math.tan(2 * theta)
    return (2.0 ** 7 * cot + math.sqrt(2.0)) * math.sqrt(max(detection_p, 0.0)) \
        + detection_p / 2.0


def sealing_metrics(bob: StrategySpec, params: EscrowParams = EscrowParams()
                    ) -> SealingReport:
    """Advantage/detection of a unitary return-challenge attack, by decomposition.

    Detection is the mean squared off-claim mass (one quarter of the sum over
    the four encodings); advantage is the optimal-guess edge over the kept
    ancilla states, a quarter of their trace distance.
    """
    theta = params.theta
    u, n_anc = extract_attack_unitary(bob)
    dec = w_decomposition(u, theta)
    w_norms = tuple(float(np.linalg.norm(dec[(b, x)][1]) ** 2)
                    for b in (0, 1) for x in (0, 1))
    detection = 0.25 * sum(w_norms)
    anc_dim = 2 ** max(n_anc, 0)
    kept = []
    for b in (0, 1):
        rho = np.zeros((anc_dim, anc_dim), dtype=complex)
        for x in (0, 1):
            w, w_bad = dec[(b, x)]
            rho += 0.5 * (np.outer(w, w.conj()) + np.outer(w_bad, w_bad.conj()))
        kept.append(rho)
    distance = trace_norm(kept[0] - kept[1])
    return SealingReport(theta, distance / 4.0, detection, w_norms,
                         sealing_bound_rhs(theta, detection), distance)


def check_sealing_bound(report: SealingReport) -> bool:
    return report.advantage_eps <= report.bound_rhs + BOUND_TOL


def enumerated_return_error(bob: StrategySpec, params: EscrowParams = EscrowParams()
                            ) -> float:
    """Return-challenge error mass by exact protocol enumeration (uniform bit)."""
    alice = honest_alice_escrow(params)
    return 0.5 * sum(
        run_escrow(alice, bob, Challenge.RETURN_TO_ALICE, claimed_bit=b, params=params
                   ).verdict_probability("alice", Verdict.ERR)
        for b in (0, 1))


def kept_guess_advantage(bob: StrategySpec, params: EscrowParams = EscrowParams()
                         ) -> float:
    """Optimal-guess edge measured via the distinguishing measurement itself."""
    u, n_anc = extract_attack_unitary(bob)
    if n_anc == 0:
        return 0.0  # nothing is kept
    dec = w_decomposition(u, params.theta)
    anc_wires = tuple(f"c{i}" for i in range(n_anc))
    anc_dim = 2 ** n_anc
    kept = []
    for b in (0, 1):
        rho = np.zeros((anc_dim, anc_dim), dtype=complex)
        for x in (0, 1):
            w, w_bad = dec[(b, x)]
            rho += 0.5 * (np.outer(w, w.conj()) + np.outer(w_bad, w_bad.conj()))
        kept.append(DensityMatrix(anc_wires, rho))
    _, l1 = qmath.optimal_distinguishing_measurement(kept[0], kept[1])
    return l1 / 4.0


# ---------------------------------------------------------------------------
# Coin-flip bias


class HonestParty(Enum):
    ALICE_HONEST = "alice"
    BOB_HONEST = "bob"


@dataclass(frozen=True)
class BiasReport:
    win_prob_0: float
    win_prob_1: float
    err_prob: float

    def __post_init__(self):
        total = self.win_prob_0 + self.win_prob_1 + self.err_prob
        if abs(total - 1.0) > 1e-9:
            raise AnalysisError(f"verdict masses sum to {total}")

    @property
    def delta_observed(self) -> float:
        return max(self.win_prob_0, self.win_prob_1) - 0.5


def coinflip_bias(honest: HonestParty, adversary: StrategySpec) -> BiasReport:
    """Exact distribution of the honest player's coin verdict against an adversary."""
    if honest is HonestParty.ALICE_HONEST:
        dist = run_coinflip(honest_alice_coinflip(), adversary)
    else:
        dist = run_coinflip(adversary, honest_bob_coinflip())
    party = honest.value
    return BiasReport(
        dist.verdict_probability(party, Verdict.ZERO),
        dist.verdict_probability(party, Verdict.ONE),
        dist.verdict_probability(party, Verdict.ERR),
    )


# ---------------------------------------------------------------------------
# The modified (reveal-bit-first) return game


@dataclass(frozen=True)
class ModifiedSealingReport:
    theta: float
    detection_b0: float
    detection_b1: float
    detection_total: float
    enumerated_total: float
    component_reports: tuple[SealingReport, SealingReport]
    cross_detection: tuple[float, float]  # each unitary applied to the *other* bit's states
    passed: bool


def _conditional_detection(u: np.ndarray, theta: float, b: int) -> float:
    dec = w_decomposition(u, theta)
    return 0.5 * sum(float(np.linalg.norm(dec[(b, x)][1]) ** 2) for x in (0, 1))


def modified_sealing_check(bob_pair: tuple[StrategySpec, StrategySpec],
                           params: EscrowParams = EscrowParams()
                           ) -> ModifiedSealingReport:
    """Evaluate the variant where the bit is revealed before the qubit returns.

    The pair gives the receiver's conditional action per revealed bit (by
    convention the first entry is what he does on 0).  The check passes iff
    both conditional actions, taken as unconditional attacks, sit inside the
    sealing frontier and the conditional game's total detection matches the
    decomposition identity.  Detection of each unitary on the other bit's
    encodings is reported so the cross-bit spillover ratio stays visible.
    """
    theta = params.theta
    u0, n0 = extract_attack_unitary(bob_pair[0])
    u1, n1 = extract_attack_unitary(bob_pair[1])
    if n0 != n1:
        raise NotUnitaryAttack("conditional actions must use the same ancilla register")
    d0 = _conditional_detection(u0, theta, 0)
    d1 = _conditional_detection(u1, theta, 1)
    total = 0.5 * (d0 + d1)

    gates = (u0, u1)
    conditional_bob = StrategySpec(
        party="bob", ancilla_count=n0, label="bob-conditional-return",
        programs={"return": (Apply(("dep",) + bob_pair[0].ancillas,
                                   lambda rec: gates[rec["b_claim"]]),)},
    )
    alice = honest_alice_escrow(params)
    enumerated = 0.5 * sum(
        run_escrow_reveal_then_return(alice, conditional_bob, claimed_bit=b, params=params
                                      ).verdict_probability("alice", Verdict.ERR)
        for b in (0, 1))

    reports = (sealing_metrics(bob_pair[0], params), sealing_metrics(bob_pair[1], params))
    passed = (all(check_sealing_bound(r) for r in reports)
              and abs(enumerated - total) <= BOUND_TOL)
    return ModifiedSealingReport(
        theta, d0, d1, total, enumerated, reports,
        (_conditional_detection(u0, theta, 1), _conditional_detection(u1, theta, 0)),
        passed,
    )
