"""Protocol state-machine tests: honest play is exact, cheats enumerate correctly."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qescrow import qmath
from qescrow.protocols import (
    Apply,
    Challenge,
    Draw,
    EscrowParams,
    MalformedStrategy,
    MeasureRecord,
    OutcomeDistribution,
    ProtocolError,
    SetBits,
    SetRecord,
    StrategySpec,
    Verdict,
    bx_angle,
    deposit_reduced_state,
    escrow_bit_density,
    honest_alice_coinflip,
    honest_alice_escrow,
    honest_alice_weak,
    honest_bob_coinflip,
    honest_bob_escrow,
    honest_bob_weak,
    phi,
    phi_bx,
    phi_vec,
    rotation,
    run_coinflip,
    run_escrow,
    run_escrow_reveal_then_return,
    run_weak_commitment,
)

THETA = math.pi / 8
THETA_GRID = (math.pi / 16, math.pi / 12, math.pi / 8)


# ---------------------------------------------------------------------------
# encoding states


def test_phi_endpoints():
    assert np.allclose(phi(0.0).amplitudes, [1, 0])
    assert np.allclose(phi(math.pi / 2).amplitudes, [0, 1])


def test_phi_pi8_amplitudes():
    assert np.allclose(phi(math.pi / 8).amplitudes,
                       [0.9238795325112867, 0.3826834323650898], atol=1e-12)


def test_phi_rejects_out_of_range():
    with pytest.raises(ProtocolError):
        phi(4.0)


def test_phi_bx_table():
    assert bx_angle(0, 0, THETA) == -THETA
    assert bx_angle(0, 1, THETA) == THETA
    assert bx_angle(1, 0, THETA) == math.pi / 2 - THETA
    assert bx_angle(1, 1, THETA) == math.pi / 2 + THETA
    assert abs(qmath.overlap(phi_bx(0, 0, THETA), phi(-math.pi / 8)) - 1) < 1e-12


@pytest.mark.parametrize("theta", THETA_GRID)
def test_phi_bx_inner_products(theta):
    same_bit = np.vdot(phi_vec(bx_angle(0, 0, theta)), phi_vec(bx_angle(0, 1, theta)))
    assert abs(same_bit.real - math.cos(2 * theta)) < 1e-12
    cross = np.vdot(phi_vec(bx_angle(0, 0, theta)), phi_vec(bx_angle(1, 0, theta)))
    assert abs(cross) < 1e-12  # angle difference pi/2


def test_escrow_params_range():
    EscrowParams(math.pi / 8)
    EscrowParams(0.01)
    with pytest.raises(ProtocolError):
        EscrowParams(0.0)
    with pytest.raises(ProtocolError):
        EscrowParams(math.pi / 4)


def test_escrow_bit_density():
    r0 = escrow_bit_density(0, THETA)
    c2, s2 = math.cos(THETA) ** 2, math.sin(THETA) ** 2
    assert np.allclose(r0.matrix, np.diag([c2, s2]), atol=1e-12)
    assert np.allclose(escrow_bit_density(1, THETA).matrix, np.diag([s2, c2]), atol=1e-12)


# ---------------------------------------------------------------------------
# honest escrow


@pytest.mark.parametrize("theta", THETA_GRID)
@pytest.mark.parametrize("challenge", list(Challenge))
@pytest.mark.parametrize("bit", (0, 1))
def test_honest_escrow_is_exact(theta, challenge, bit):
    params = EscrowParams(theta)
    dist = run_escrow(honest_alice_escrow(params), honest_bob_escrow(), challenge,
                      claimed_bit=bit, params=params)
    assert abs(dist.total() - 1.0) < 1e-12
    # exactly zero error branches, not merely small mass
    assert all(br.bob_verdict is not Verdict.ERR for br in dist.branches)
    assert all(br.alice_verdict is not Verdict.ERR for br in dist.branches)
    assert abs(dist.verdict_probability("bob", Verdict.of_bit(bit)) - 1.0) < 1e-12
    assert all(br.alice_verdict is br.bob_verdict for br in dist.branches)


def test_honest_deposit_reduced_state():
    for bit in (0, 1):
        rho = deposit_reduced_state(honest_alice_escrow(), claimed_bit=bit)
        assert np.max(np.abs(rho.matrix - escrow_bit_density(bit, THETA).matrix)) < 1e-12


def test_identity_receiver_return_check_passes():
    dist = run_escrow(honest_alice_escrow(), honest_bob_escrow(),
                      Challenge.RETURN_TO_ALICE, claimed_bit=1)
    assert abs(dist.verdict_probability("alice", Verdict.ONE) - 1.0) < 1e-12


def test_wrong_claim_rejected_with_half_probability():
    # deposit phi_{0,1} but claim (b,x) = (1,0): the check projects phi_{0,1}
    # onto {phi_{0,0}, phi_{1,0}} and accepts "1" with |<phi_{1,0}|phi_{0,1}>|^2
    alice = StrategySpec(
        party="alice", ancilla_count=0, label="claim-flipper",
        programs={
            "deposit": (Apply(("dep",), rotation(bx_angle(0, 1, THETA))),),
            "reveal": (SetBits({"rb": 1, "rx": 0}),),
        },
    )
    dist = run_escrow(alice, honest_bob_escrow(), Challenge.REVEAL_TO_BOB)
    accept = abs(np.vdot(phi_vec(bx_angle(1, 0, THETA)), phi_vec(bx_angle(0, 1, THETA)))) ** 2
    assert abs(accept - 0.5) < 1e-12
    assert abs(dist.verdict_probability("bob", Verdict.ERR) - (1 - accept)) < 1e-12
    assert abs(dist.verdict_probability("bob", Verdict.ONE) - accept) < 1e-12


# ---------------------------------------------------------------------------
# coin flip


def test_honest_coinflip_exact():
    dist = run_coinflip(honest_alice_coinflip(), honest_bob_coinflip())
    assert dist.verdict_probability("alice", Verdict.ZERO) == 0.5
    assert dist.verdict_probability("alice", Verdict.ONE) == 0.5
    assert dist.verdict_probability("alice", Verdict.ERR) == 0.0
    assert all(br.alice_verdict is br.bob_verdict for br in dist.branches)


def test_constant_receiver_keeps_result_uniform():
    from qescrow.adversaries import constant_bob

    for bit in (0, 1):
        dist = run_coinflip(honest_alice_coinflip(), constant_bob(bit))
        assert abs(dist.verdict_probability("alice", Verdict.ZERO) - 0.5) < 1e-12
        assert dist.verdict_probability("alice", Verdict.ERR) == 0.0


def test_measuring_receiver_wins_at_cap():
    from qescrow.adversaries import full_measurement_bob

    dist = run_coinflip(honest_alice_coinflip(), full_measurement_bob())
    want = math.cos(math.pi / 8) ** 2
    assert abs(dist.verdict_probability("alice", Verdict.ZERO) - want) < 1e-12


def test_coinflip_rejects_two_cheaters():
    from qescrow.adversaries import constant_bob, fixed_bit_alice

    with pytest.raises(MalformedStrategy):
        run_coinflip(fixed_bit_alice(0), constant_bob(0))


# ---------------------------------------------------------------------------
# composed commitment


@pytest.mark.parametrize("theta", THETA_GRID)
@pytest.mark.parametrize("bit", (0, 1))
def test_honest_weak_commitment(theta, bit):
    params = EscrowParams(theta)
    dist = run_weak_commitment(honest_alice_weak(params), honest_bob_weak(), bit, params)
    assert abs(dist.total() - 1.0) < 1e-12
    assert dist.verdict_probability("bob", Verdict.ERR) == 0.0
    assert abs(dist.verdict_probability("bob", Verdict.of_bit(bit)) - 1.0) < 1e-12
    assert abs(dist.verdict_probability("alice", Verdict.of_bit(bit)) - 1.0) < 1e-12
    # the embedded coin splits the two challenges evenly
    assert abs(dist.transcript_probability(("coin", "result", 1)) - 0.5) < 1e-12
    assert abs(dist.transcript_probability(("coin", "result", 0)) - 0.5) < 1e-12


def test_weak_commitment_challenge_split_matches_embedded_coin():
    # with an honest depositor and a measuring receiver, the coin distribution
    # inside the composition equals the standalone coin-flip distribution
    from qescrow.adversaries import full_measurement_bob

    delta = (escrow_bit_density(0, THETA).matrix - escrow_bit_density(1, THETA).matrix)
    vals, vecs = qmath.hermitian_eig(delta)
    meas = qmath.OrthogonalMeasurement.from_basis([vecs[:, 0], vecs[:, 1]])
    bob = StrategySpec(
        party="bob", ancilla_count=0, honest=False, label="coin-measurer",
        programs={"coin_choose": (MeasureRecord(("dep2",), meas, "guess"),
                                  SetBits({"bp": "guess"}))},
    )
    dist = run_weak_commitment(honest_alice_weak(), bob, 0)
    standalone = run_coinflip(honest_alice_coinflip(), full_measurement_bob())
    want_one = standalone.verdict_probability("alice", Verdict.ONE)
    got_one = dist.transcript_probability(("coin", "result", 1))
    assert abs(got_one - want_one) < 1e-12


def test_weak_commitment_entangled_adversary_distribution():
    # receiver couples the deposit to an ancilla, then derives his coin bit
    # from that same ancilla: wires entangled across the two components
    rng = np.random.default_rng(99)
    u = qmath.random_unitary(4, rng)
    bob = StrategySpec(
        party="bob", ancilla_count=1, label="cross-component",
        programs={
            "receive": (Apply(("dep", "c0"), u),),
            "coin_choose": (MeasureRecord(("c0",), qmath.OrthogonalMeasurement.computational(1),
                                          "guess"),
                            SetBits({"bp": "guess"})),
        },
    )
    dist = run_weak_commitment(honest_alice_weak(), bob, 1)
    assert abs(dist.total() - 1.0) < 1e-9
    again = run_weak_commitment(honest_alice_weak(), bob, 1)
    assert dist == again  # exact reproducibility
    counts = dist.sample(10 ** 6, np.random.default_rng(7))
    for verdict in (Verdict.ZERO, Verdict.ONE, Verdict.ERR):
        p = dist.verdict_probability("alice", verdict)
        got = sum(c for (av, _), c in counts.items() if av is verdict) / 10 ** 6
        sigma = math.sqrt(max(p * (1 - p), 1e-12) / 10 ** 6)
        assert abs(got - p) <= 4 * sigma + 1e-9


# ---------------------------------------------------------------------------
# strategy validation and runner errors


def test_strategy_rejects_foreign_wires():
    alice = StrategySpec("alice", 0, {"deposit": (Apply(("c0",), np.eye(2, dtype=complex)),)})
    with pytest.raises(MalformedStrategy):
        run_escrow(alice, honest_bob_escrow(), Challenge.REVEAL_TO_BOB, 0)


def test_strategy_rejects_non_unitary_gate():
    bad = np.array([[1.0, 1.0], [0.0, 1.0]], dtype=complex)
    alice = StrategySpec("alice", 0, {"deposit": (Apply(("dep",), bad),)})
    with pytest.raises(MalformedStrategy):
        run_escrow(alice, honest_bob_escrow(), Challenge.REVEAL_TO_BOB, 0)


def test_strategy_rejects_bad_draw_weights():
    alice = StrategySpec("alice", 0, {"deposit": (Draw("x", (0.5, 0.7)),)})
    with pytest.raises(MalformedStrategy):
        run_escrow(alice, honest_bob_escrow(), Challenge.REVEAL_TO_BOB, 0)


def test_strategy_rejects_unknown_phase():
    alice = StrategySpec("alice", 0, {"banana": (SetRecord("b", 0),)})
    with pytest.raises(MalformedStrategy):
        run_escrow(alice, honest_bob_escrow(), Challenge.REVEAL_TO_BOB, 0)


def test_return_challenge_needs_depositor_records():
    alice = StrategySpec("alice", 0, {"deposit": (Apply(("dep",), rotation(0.3)),)})
    with pytest.raises(MalformedStrategy):
        run_escrow(alice, honest_bob_escrow(), Challenge.RETURN_TO_ALICE)


def test_ancilla_budget_enforced():
    with pytest.raises(MalformedStrategy):
        StrategySpec("alice", 5, {})
    big_alice = StrategySpec("alice", 2, dict(honest_alice_weak().programs), honest=True)
    big_bob = StrategySpec("bob", 1, dict(honest_bob_weak().programs), honest=True)
    with pytest.raises(MalformedStrategy):
        run_weak_commitment(big_alice, big_bob, 0)


def test_distribution_requires_unit_mass():
    from qescrow.protocols import OutcomeBranch

    with pytest.raises(ProtocolError):
        OutcomeDistribution((OutcomeBranch(0.5, Verdict.ZERO, Verdict.ZERO, ()),))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_arbitrary_receiver_distribution_sums_to_one(seed):
    rng = np.random.default_rng(seed)
    from qescrow.adversaries import random_return_attack

    bob = random_return_attack(rng, ancillas=int(rng.integers(0, 3)))
    for challenge in Challenge:
        dist = run_escrow(honest_alice_escrow(), bob, challenge,
                          claimed_bit=int(rng.integers(0, 2)))
        assert abs(dist.total() - 1.0) < 1e-9


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_arbitrary_depositor_distribution_sums_to_one(seed):
    rng = np.random.default_rng(seed)
    from qescrow.adversaries import random_binding_pair

    alice, _ = random_binding_pair(rng)
    dist = run_escrow(alice, honest_bob_escrow(), Challenge.REVEAL_TO_BOB)
    assert abs(dist.total() - 1.0) < 1e-9
    claims = (dist.transcript_probability(("alice", "b", 0))
              + dist.transcript_probability(("alice", "b", 1)))
    assert abs(claims - 1.0) < 1e-9


def test_reveal_then_return_variant_honest():
    dist = run_escrow_reveal_then_return(honest_alice_escrow(), honest_bob_escrow(),
                                         claimed_bit=0)
    assert dist.verdict_probability("alice", Verdict.ERR) == 0.0
    assert abs(dist.verdict_probability("alice", Verdict.ZERO) - 1.0) < 1e-12


def test_monte_carlo_sampling_matches_enumeration():
    rng = np.random.default_rng(2024)
    dist = run_coinflip(honest_alice_coinflip(), honest_bob_coinflip())
    counts = dist.sample(10 ** 6, rng)
    assert sum(counts.values()) == 10 ** 6
    for verdict in (Verdict.ZERO, Verdict.ONE):
        got = sum(c for (av, _), c in counts.items() if av is verdict) / 10 ** 6
        sigma = math.sqrt(0.25 / 10 ** 6)
        assert abs(got - 0.5) <= 4 * sigma
