"""Metric-extraction and bound-checking tests."""

import math

import numpy as np
import pytest

from qescrow import adversaries as adv
from qescrow import analysis as ana
from qescrow import qmath
from qescrow.analysis import (
    BiasReport,
    BindingReport,
    DepositMismatch,
    HonestParty,
    NotUnitaryAttack,
    SealingReport,
    binding_metrics,
    binding_theorem_gamma,
    check_binding_bound,
    check_binding_theorem_form,
    check_sealing_bound,
    coinflip_bias,
    enumerated_return_error,
    kept_guess_advantage,
    modified_sealing_check,
    sealing_bound_rhs,
    sealing_metrics,
    w_decomposition,
)
from qescrow.protocols import (
    Apply,
    MeasureRecord,
    StrategySpec,
    escrow_bit_density,
    honest_bob_coinflip,
)

THETA = math.pi / 8


# ---------------------------------------------------------------------------
# binding


def test_binding_rejects_mismatched_deposits():
    with pytest.raises(DepositMismatch):
        binding_metrics(adv.fixed_bit_alice(0), adv.fixed_bit_alice(1))


def test_binding_delayed_pair():
    _, one = adv.protocol_quadratic_pair(0.0)
    rep = binding_metrics(one, one)
    assert rep.p_err < 1e-12 and rep.q_err < 1e-12
    assert abs(rep.p0 - 0.5) < 1e-12 and abs(rep.q0 - 0.5) < 1e-12
    assert rep.gamma_observed < 1e-12
    assert check_binding_bound(rep)


def test_binding_quadratic_pair_quarter_pi():
    zero, one = adv.protocol_quadratic_pair(math.pi / 4)
    rep = binding_metrics(zero, one)
    assert abs(rep.gamma_observed - 0.35355339059327373) < 1e-8
    assert check_binding_bound(rep)
    assert rep.gamma_observed <= rep.bound


def test_binding_bound_formula():
    rep = BindingReport(THETA, 0.6, 0.4, 0.04, 0.5, 0.5, 0.09)
    want = (math.sqrt(0.04) + math.sqrt(0.09)) / math.cos(2 * THETA)
    assert abs(rep.bound - want) < 1e-12
    assert abs(rep.gamma_observed - 0.1) < 1e-12
    assert check_binding_bound(rep)


def test_binding_synthetic_violation_fails():
    rep = BindingReport(THETA, 0.9, 0.1, 0.0, 0.1, 0.9, 0.0)
    assert not check_binding_bound(rep)
    assert not check_binding_theorem_form(rep)


def test_binding_theorem_form_is_weaker():
    # 2 sqrt(max eps) always dominates sqrt(p_err) + sqrt(q_err)
    rng = np.random.default_rng(5)
    for _ in range(100):
        p_err, q_err = rng.uniform(0, 1, 2)
        sharper = (math.sqrt(p_err) + math.sqrt(q_err)) / math.cos(2 * THETA)
        weaker = binding_theorem_gamma(max(p_err, q_err), THETA)
        assert sharper <= weaker + 1e-12


def test_binding_report_validates_probabilities():
    with pytest.raises(ana.AnalysisError):
        BindingReport(THETA, 1.5, 0.0, 0.0, 0.5, 0.5, 0.0)
    with pytest.raises(ana.AnalysisError):
        BindingReport(THETA, 0.8, 0.8, 0.0, 0.5, 0.5, 0.0)


def test_binding_frontier_on_random_pairs():
    rng = np.random.default_rng(101)
    for _ in range(100):
        rep = binding_metrics(*adv.random_binding_pair(rng))
        assert check_binding_bound(rep)
        assert check_binding_theorem_form(rep)


# ---------------------------------------------------------------------------
# sealing


def identity_bob(ancillas=1):
    wires = ("dep",) + tuple(f"c{i}" for i in range(ancillas))
    return StrategySpec("bob", ancillas,
                        {"receive": (Apply(wires, np.eye(2 ** len(wires), dtype=complex)),)})


def test_sealing_identity_receiver():
    rep = sealing_metrics(identity_bob())
    assert rep.advantage_eps < 1e-12
    assert rep.detection_p < 1e-12
    assert all(w < 1e-12 for w in rep.w_norms)


def test_sealing_quarter_strength_numbers():
    r0, r1 = escrow_bit_density(0, THETA), escrow_bit_density(1, THETA)
    bob = adv.bob_weak_measurement(adv.BobWeakParams(0.25), r0, r1)
    rep = sealing_metrics(bob)
    assert abs(rep.advantage_eps - 0.17677669529663687) < 1e-9
    assert rep.detection_p <= 0.0669872981077807 + 1e-9
    assert check_sealing_bound(rep)


def test_sealing_full_strength_extraction_vs_enumeration():
    r0, r1 = escrow_bit_density(0, THETA), escrow_bit_density(1, THETA)
    bob = adv.bob_weak_measurement(adv.BobWeakParams(1.0), r0, r1)
    rep = sealing_metrics(bob)
    assert abs(rep.advantage_eps - math.sqrt(2) / 4) < 1e-9
    assert abs(rep.detection_p - 0.25 * sum(rep.w_norms)) < 1e-12
    assert abs(enumerated_return_error(bob) - rep.detection_p) < 1e-9


def test_sealing_rejects_non_unitary_attacks():
    meas_bob = StrategySpec("bob", 1, {"receive": (
        MeasureRecord(("dep",), qmath.OrthogonalMeasurement.computational(1), "m"),)})
    with pytest.raises(NotUnitaryAttack):
        sealing_metrics(meas_bob)
    wrong_order = StrategySpec("bob", 1, {"receive": (
        Apply(("c0", "dep"), np.eye(4, dtype=complex)),)})
    with pytest.raises(NotUnitaryAttack):
        sealing_metrics(wrong_order)
    two_rounds = StrategySpec("bob", 1, {"receive": (
        Apply(("dep", "c0"), np.eye(4, dtype=complex)),
        Apply(("dep", "c0"), np.eye(4, dtype=complex)))})
    with pytest.raises(NotUnitaryAttack):
        sealing_metrics(two_rounds)


def test_w_decomposition_unitarity_relations():
    rng = np.random.default_rng(31)
    for _ in range(50):
        u = qmath.random_unitary(8, rng)
        dec = w_decomposition(u, THETA)
        for x in (0, 1):
            resid = (np.vdot(dec[(0, x)][0], dec[(1, x)][1])
                     + np.vdot(dec[(0, x)][1], dec[(1, x)][0]))
            assert abs(resid) < 1e-9
        # component masses per case sum to 1
        for key, (w, w_bad) in dec.items():
            assert abs(np.linalg.norm(w) ** 2 + np.linalg.norm(w_bad) ** 2 - 1.0) < 1e-12


def test_sealing_detection_identity_and_frontier_random():
    rng = np.random.default_rng(37)
    for _ in range(100):
        bob = adv.random_return_attack(rng, 2)
        rep = sealing_metrics(bob)
        assert abs(enumerated_return_error(bob) - rep.detection_p) < 1e-9
        assert check_sealing_bound(rep)
        assert abs(kept_guess_advantage(bob) - rep.advantage_eps) < 1e-9


def test_sealing_bound_rhs_shape():
    # (2^7 cot(2t) + sqrt(2)) sqrt(p) + p/2
    p = 0.04
    want = (2 ** 7 / math.tan(2 * THETA) + math.sqrt(2)) * 0.2 + 0.02
    assert abs(sealing_bound_rhs(THETA, p) - want) < 1e-12
    assert sealing_bound_rhs(THETA, 0.0) == 0.0


def test_sealing_report_checks_detection_identity():
    with pytest.raises(ana.AnalysisError):
        SealingReport(THETA, 0.1, 0.5, (0.1, 0.1, 0.1, 0.1), 1.0, 0.4)


# ---------------------------------------------------------------------------
# coin-flip bias


def test_bias_honest_adversaries():
    rep = coinflip_bias(HonestParty.ALICE_HONEST, honest_bob_coinflip())
    assert rep.delta_observed < 1e-12
    assert rep.err_prob == 0.0


def test_bias_full_measurement_receiver():
    rep = coinflip_bias(HonestParty.ALICE_HONEST, adv.full_measurement_bob())
    assert abs(rep.win_prob_0 - 0.8535533905932737) < 1e-9
    assert rep.err_prob == 0.0


def test_bias_constant_receiver():
    rep = coinflip_bias(HonestParty.ALICE_HONEST, adv.constant_bob(1))
    assert rep.delta_observed < 1e-12


def test_bias_depositor_cheat_below_cap():
    rep = coinflip_bias(HonestParty.BOB_HONEST,
                        adv.alice_coinflip_from_angles(adv.ALICE_SEED_POINT))
    assert max(rep.win_prob_0, rep.win_prob_1) <= ana.ALICE_WIN_CAP
    assert rep.err_prob > 0.14  # the cheat runs real detection risk


def test_bias_report_mass_check():
    with pytest.raises(ana.AnalysisError):
        BiasReport(0.6, 0.6, 0.0)


def test_caps_are_the_expected_constants():
    assert abs(ana.BOB_WIN_CAP - 0.8535533905932737) < 1e-15
    assert abs(ana.ALICE_WIN_CAP - 0.9142135623730951) < 1e-15
    assert ana.ALICE_WIN_CAP <= 0.9143


# ---------------------------------------------------------------------------
# modified (reveal-bit-first) variant


def test_modified_identity_pair_passes():
    pair = (identity_bob(), identity_bob())
    rep = modified_sealing_check(pair)
    assert rep.passed
    assert rep.detection_total < 1e-12


def test_modified_unconditional_pair_matches_sealing_metrics():
    r0, r1 = escrow_bit_density(0, THETA), escrow_bit_density(1, THETA)
    bob = adv.bob_weak_measurement(adv.BobWeakParams(0.4), r0, r1)
    rep = modified_sealing_check((bob, bob))
    base = sealing_metrics(bob)
    assert rep.component_reports[0] == base and rep.component_reports[1] == base
    assert abs(rep.detection_total - base.detection_p) < 1e-12
    assert abs(rep.enumerated_total - rep.detection_total) < 1e-9
    assert rep.passed


def test_modified_random_conditional_pairs():
    rng = np.random.default_rng(43)
    for _ in range(50):
        pair = (adv.random_return_attack(rng, 1), adv.random_return_attack(rng, 1))
        rep = modified_sealing_check(pair)
        assert rep.passed
        assert abs(rep.enumerated_total - rep.detection_total) < 1e-9
        assert all(c >= -1e-12 for c in rep.cross_detection)


def test_modified_rejects_mismatched_registers():
    with pytest.raises(NotUnitaryAttack):
        modified_sealing_check((identity_bob(1), identity_bob(2)))
