"""Reproducible experiment runner.

Subcommands sweep protocol parameters, verify the proved bounds, and emit
diff-able CSV/JSON artifacts:

    qescrow coinflip        honest play, named cheats, random sweeps, optimizer probes
    qescrow escrow-binding  alpha sweep of the quadratic depositor + random pairs
    qescrow escrow-sealing  p sweep of the weak measurement + random attacks
    qescrow selftest        the full invariant checklist, one line per check

Identical (config, seed) runs produce byte-identical artifacts: floats are
fixed to 12 significant digits, rows keep grid order, and all randomness flows
from the --seed.  Wall time goes to the console only.  Exit codes: 0 success,
2 config error, 3 bound violation (a counterexample to a proved bound stops
the build by design; see README for the one known stated-constant erratum,
which is reported as data rather than treated as a violation).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import adversaries as adv
from . import analysis as ana
from . import qmath
from .protocols import (
    Challenge,
    EscrowParams,
    Verdict,
    escrow_bit_density,
    honest_alice_coinflip,
    honest_alice_escrow,
    honest_alice_weak,
    honest_bob_coinflip,
    honest_bob_escrow,
    honest_bob_weak,
    run_coinflip,
    run_escrow,
    run_weak_commitment,
)

DEFAULT_ALPHA_GRID = (0.0, math.pi / 16, math.pi / 8, 3 * math.pi / 16, math.pi / 4)
DEFAULT_P_GRID = tuple(i / 10 for i in range(11))


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    theta: float = math.pi / 8
    alpha_grid: tuple[float, ...] = DEFAULT_ALPHA_GRID
    p_grid: tuple[float, ...] = DEFAULT_P_GRID
    seed: int = 0
    samples: int = 200
    out: str | None = None
    fmt: str = "csv"
    config_file: str | None = None
    config_echo: dict = field(default_factory=dict)
    inject_failure: bool = False

    def echo(self) -> dict:
        d = {
            "command": self.command,
            "theta": _round12(self.theta),
            "seed": self.seed,
            "samples": self.samples,
            "format": self.fmt,
        }
        if self.command == "escrow-binding":
            d["alpha_grid"] = [_round12(a) for a in self.alpha_grid]
        if self.command == "escrow-sealing":
            d["p_grid"] = [_round12(p) for p in self.p_grid]
        if self.config_echo:
            d["config_file"] = dict(self.config_echo)
        return d


@dataclass
class RunSummary:
    command: str
    config: dict
    columns: tuple[str, ...]
    rows: list[dict]
    passed: int
    failed: int
    wall_time: float


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".12g")
    return str(v)


def _round12(v: float) -> float:
    return float(format(float(v), ".12g"))


def _json_value(v):
    if isinstance(v, float):
        return None if math.isnan(v) else _round12(v)
    return v


def write_summary(summary: RunSummary, path: str, fmt: str) -> None:
    if fmt == "csv":
        lines = [",".join(summary.columns)]
        for row in summary.rows:
            lines.append(",".join(_fmt(row[c]) for c in summary.columns))
        text = "\n".join(lines) + "\n"
    else:
        payload = {
            "config": summary.config,
            "rows": [{c: _json_value(row[c]) for c in summary.columns}
                     for row in summary.rows],
            "tallies": {"passed": summary.passed, "failed": summary.failed},
        }
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    with open(path, "w") as fh:
        fh.write(text)


def _tally(rows: list[dict], flag_columns: tuple[str, ...]) -> tuple[int, int]:
    passed = failed = 0
    for row in rows:
        ok = all(row[c] for c in flag_columns if c in row)
        passed += ok
        failed += not ok
    return passed, failed


# ---------------------------------------------------------------------------
# coinflip


def _bias_row(label: str, report: ana.BiasReport, cap: float) -> dict:
    win = max(report.win_prob_0, report.win_prob_1)
    return {
        "strategy": label,
        "win_prob_0": report.win_prob_0,
        "win_prob_1": report.win_prob_1,
        "err_prob": report.err_prob,
        "delta_observed": report.delta_observed,
        "cap": cap,
        "within_cap": win <= cap + 1e-9,
    }


COINFLIP_COLUMNS = ("strategy", "win_prob_0", "win_prob_1", "err_prob",
                    "delta_observed", "cap", "within_cap")


def cmd_coinflip(cfg: RunConfig) -> RunSummary:
    t0 = time.perf_counter()
    rng = np.random.default_rng(cfg.seed)
    rows = []

    dist = run_coinflip(honest_alice_coinflip(), honest_bob_coinflip())
    honest = ana.BiasReport(dist.verdict_probability("alice", Verdict.ZERO),
                            dist.verdict_probability("alice", Verdict.ONE),
                            dist.verdict_probability("alice", Verdict.ERR))
    rows.append(_bias_row("honest-honest", honest, 0.5))

    rows.append(_bias_row("bob-constant-0",
                          ana.coinflip_bias(ana.HonestParty.ALICE_HONEST, adv.constant_bob(0)),
                          0.5))
    rows.append(_bias_row("bob-full-measurement",
                          ana.coinflip_bias(ana.HonestParty.ALICE_HONEST,
                                            adv.full_measurement_bob()),
                          ana.BOB_WIN_CAP))

    n_each = max(cfg.samples // 2, 1)
    best_basis = max(
        (ana.coinflip_bias(ana.HonestParty.ALICE_HONEST,
                           adv.bob_measure_coinflip(adv.unitary_from_angles(
                               2, rng.uniform(0, math.pi, 3))))
         for _ in range(n_each)),
        key=lambda r: r.delta_observed)
    rows.append(_bias_row(f"bob-random-basis-best-of-{n_each}", best_basis, ana.BOB_WIN_CAP))
    best_ent = max(
        (ana.coinflip_bias(ana.HonestParty.ALICE_HONEST,
                           adv.bob_entangling_coinflip(qmath.random_unitary(8, rng)))
         for _ in range(n_each)),
        key=lambda r: r.delta_observed)
    rows.append(_bias_row(f"bob-random-entangling-best-of-{n_each}", best_ent, ana.BOB_WIN_CAP))

    bob_cfg = adv.OptimizerConfig(honest_party="alice", grid_resolution=5,
                                  simplex_iterations=120, seed=cfg.seed)
    bob_opt = adv.optimize(adv.bob_coinflip_space(), bob_cfg,
                           lambda s: run_coinflip(honest_alice_coinflip(), s))
    rows.append(_bias_row(
        "bob-optimized",
        ana.coinflip_bias(ana.HonestParty.ALICE_HONEST,
                          adv.bob_coinflip_space().build(np.array(bob_opt.best_params))),
        ana.BOB_WIN_CAP))

    zero, one = adv.protocol_quadratic_pair(0.0)
    rows.append(_bias_row("alice-delayed-choice",
                          ana.coinflip_bias(ana.HonestParty.BOB_HONEST, one), ana.ALICE_WIN_CAP))
    best_alice = max(
        (ana.coinflip_bias(ana.HonestParty.BOB_HONEST,
                           adv.alice_coinflip_from_angles(rng.uniform(0, math.pi, 12)))
         for _ in range(n_each)),
        key=lambda r: r.delta_observed)
    rows.append(_bias_row(f"alice-random-best-of-{n_each}", best_alice, ana.ALICE_WIN_CAP))

    alice_cfg = adv.OptimizerConfig(honest_party="bob", grid_resolution=2,
                                    simplex_iterations=150, seed=cfg.seed)
    alice_opt = adv.optimize(adv.alice_coinflip_space(), alice_cfg,
                             lambda s: run_coinflip(s, honest_bob_coinflip()),
                             extra_seeds=[adv.ALICE_SEED_POINT])
    rows.append(_bias_row(
        "alice-optimized",
        ana.coinflip_bias(ana.HonestParty.BOB_HONEST,
                          adv.alice_coinflip_space().build(np.array(alice_opt.best_params))),
        ana.ALICE_WIN_CAP))

    passed, failed = _tally(rows, ("within_cap",))
    return RunSummary("coinflip", cfg.echo(), COINFLIP_COLUMNS, rows,
                      passed, failed, time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# escrow-binding


BINDING_COLUMNS = ("label", "alpha", "advantage", "advantage_closed_form",
                   "detection", "detection_construction_form", "detection_theorem_cap",
                   "detection_within_theorem_cap", "p0", "q0", "p_err", "q_err",
                   "gamma_observed", "gamma_bound", "binding_pass")


def cmd_escrow_binding(cfg: RunConfig) -> RunSummary:
    t0 = time.perf_counter()
    params = EscrowParams(cfg.theta)
    r0 = escrow_bit_density(0, cfg.theta)
    r1 = escrow_bit_density(1, cfg.theta)
    f = qmath.fidelity(r0, r1)
    rows = []
    for alpha in cfg.alpha_grid:
        zero, one = adv.protocol_quadratic_pair(alpha, params)
        rep = ana.binding_metrics(zero, one, params)
        rows.append({
            "label": "quadratic",
            "alpha": alpha,
            "advantage": rep.p0 - 0.5,
            "advantage_closed_form": math.sqrt(f) * math.sin(2 * alpha) / 2,
            "detection": rep.p_err,
            "detection_construction_form": (1 - f) * math.sin(alpha) ** 2,
            "detection_theorem_cap": (1 - f) * math.sin(alpha) ** 2 / 2,
            "detection_within_theorem_cap":
                rep.p_err <= (1 - f) * math.sin(alpha) ** 2 / 2 + 1e-9,
            "p0": rep.p0, "q0": rep.q0, "p_err": rep.p_err, "q_err": rep.q_err,
            "gamma_observed": rep.gamma_observed, "gamma_bound": rep.bound,
            "binding_pass": ana.check_binding_bound(rep),
        })
    rng = np.random.default_rng(cfg.seed)
    for i in range(cfg.samples):
        a0, a1 = adv.random_binding_pair(rng)
        rep = ana.binding_metrics(a0, a1, params)
        rows.append({
            "label": f"random-pair-{i}",
            "alpha": float("nan"),
            "advantage": float("nan"), "advantage_closed_form": float("nan"),
            "detection": float("nan"), "detection_construction_form": float("nan"),
            "detection_theorem_cap": float("nan"), "detection_within_theorem_cap": True,
            "p0": rep.p0, "q0": rep.q0, "p_err": rep.p_err, "q_err": rep.q_err,
            "gamma_observed": rep.gamma_observed, "gamma_bound": rep.bound,
            "binding_pass": ana.check_binding_bound(rep),
        })
    passed, failed = _tally(rows, ("binding_pass",))
    return RunSummary("escrow-binding", cfg.echo(), BINDING_COLUMNS, rows,
                      passed, failed, time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# escrow-sealing


SEALING_COLUMNS = ("label", "p", "advantage_eps", "detection_p", "kept_trace_distance",
                   "predicted_distance", "detection_cap", "w2_00", "w2_01", "w2_10", "w2_11",
                   "bound_rhs", "detection_identity_error", "seal_pass")


def _sealing_row(label: str, p, bob, params: EscrowParams) -> dict:
    rep = ana.sealing_metrics(bob, params)
    enum_err = ana.enumerated_return_error(bob, params)
    t = qmath.trace_norm(escrow_bit_density(0, params.theta).matrix
                         - escrow_bit_density(1, params.theta).matrix)
    return {
        "label": label,
        "p": p,
        "advantage_eps": rep.advantage_eps,
        "detection_p": rep.detection_p,
        "kept_trace_distance": rep.kept_trace_distance,
        "predicted_distance": t * math.sqrt(p) if not math.isnan(p) else float("nan"),
        "detection_cap": 0.5 * (1 - math.sqrt(1 - p)) if not math.isnan(p) else float("nan"),
        "w2_00": rep.w_norms[0], "w2_01": rep.w_norms[1],
        "w2_10": rep.w_norms[2], "w2_11": rep.w_norms[3],
        "bound_rhs": rep.bound_rhs,
        "detection_identity_error": abs(enum_err - rep.detection_p),
        "seal_pass": ana.check_sealing_bound(rep) and abs(enum_err - rep.detection_p) <= 1e-9,
    }


def cmd_escrow_sealing(cfg: RunConfig) -> RunSummary:
    t0 = time.perf_counter()
    params = EscrowParams(cfg.theta)
    r0 = escrow_bit_density(0, cfg.theta)
    r1 = escrow_bit_density(1, cfg.theta)
    rows = []
    for p in cfg.p_grid:
        bob = adv.bob_weak_measurement(adv.BobWeakParams(p), r0, r1)
        rows.append(_sealing_row(f"weak-p-{format(p, '.12g')}", p, bob, params))
    rng = np.random.default_rng(cfg.seed)
    for i in range(cfg.samples):
        rows.append(_sealing_row(f"random-attack-{i}", float("nan"),
                                 adv.random_return_attack(rng, 2), params))
    passed, failed = _tally(rows, ("seal_pass",))
    return RunSummary("escrow-sealing", cfg.echo(), SEALING_COLUMNS, rows,
                      passed, failed, time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# selftest


def _selftest_checks(cfg: RunConfig):
    """Yield (name, callable) pairs; each callable returns (ok, detail)."""
    theta = cfg.theta
    params = EscrowParams(theta)
    rng_master = np.random.default_rng(cfg.seed)

    def check_pure_distance_law():
        rng = np.random.default_rng(rng_master.integers(2 ** 32))
        worst = 0.0
        for _ in range(50):
            a, b = qmath.random_state(("q",), rng), qmath.random_state(("q",), rng)
            lhs = qmath.trace_norm(a.density().matrix - b.density().matrix)
            rhs = 2 * math.sqrt(max(1 - abs(qmath.overlap(a, b)) ** 2, 0.0))
            worst = max(worst, abs(lhs - rhs))
        return worst < 1e-9, f"max deviation {worst:.2e}"

    def check_tensor_multiplicativity():
        rng = np.random.default_rng(rng_master.integers(2 ** 32))
        worst = 0.0
        for _ in range(20):
            z1 = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
            z2 = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
            a, b = z1 + z1.conj().T, z2 + z2.conj().T
            worst = max(worst, abs(qmath.trace_norm(np.kron(a, b))
                                   - qmath.trace_norm(a) * qmath.trace_norm(b)))
        return worst < 1e-8, f"max deviation {worst:.2e}"

    def check_purify_round_trip():
        rng = np.random.default_rng(rng_master.integers(2 ** 32))
        worst = 0.0
        for _ in range(20):
            rho = qmath.random_density(("q",), rng)
            back = qmath.partial_trace(qmath.purify(rho), ("q",))
            worst = max(worst, float(np.max(np.abs(back.matrix - rho.matrix))))
        return worst < 1e-9, f"max deviation {worst:.2e}"

    def check_measurement_dominance():
        rng = np.random.default_rng(rng_master.integers(2 ** 32))
        for _ in range(5):
            r0, r1 = qmath.random_density(("q",), rng), qmath.random_density(("q",), rng)
            _, l1 = qmath.optimal_distinguishing_measurement(r0, r1)
            for _ in range(50):
                if qmath.measurement_l1_distance(
                        r0, r1, qmath.random_basis_measurement(2, rng)) > l1 + 1e-8:
                    return False, "a sampled measurement beat the eigenbasis one"
        return True, "eigenbasis measurement dominated all samples"

    def check_honest_runs():
        for th in (math.pi / 16, math.pi / 12, math.pi / 8):
            pp = EscrowParams(th)
            for ch in Challenge:
                for b in (0, 1):
                    d = run_escrow(honest_alice_escrow(pp), honest_bob_escrow(), ch,
                                   claimed_bit=b, params=pp)
                    if d.verdict_probability("bob", Verdict.ERR) != 0.0:
                        return False, f"escrow err at theta={th}"
            dw = run_weak_commitment(honest_alice_weak(pp), honest_bob_weak(), 0, pp)
            if dw.verdict_probability("bob", Verdict.ERR) != 0.0:
                return False, f"composed err at theta={th}"
        d = run_coinflip(honest_alice_coinflip(), honest_bob_coinflip())
        ok = (abs(d.verdict_probability("alice", Verdict.ZERO) - 0.5) < 1e-12
              and d.verdict_probability("alice", Verdict.ERR) == 0.0
              and all(br.alice_verdict is br.bob_verdict for br in d.branches))
        return ok, "honest runs exact"

    def check_monte_carlo():
        rng = np.random.default_rng(rng_master.integers(2 ** 32))
        d = run_coinflip(honest_alice_coinflip(), adv.full_measurement_bob())
        counts = d.sample(100_000, rng)
        p = d.verdict_probability("alice", Verdict.ZERO)
        got = sum(c for (av, _), c in counts.items() if av is Verdict.ZERO) / 100_000
        sigma = math.sqrt(p * (1 - p) / 100_000)
        return abs(got - p) <= 4 * sigma, f"|{got:.5f} - {p:.5f}| vs 4 sigma {4*sigma:.5f}"

    def check_quadratic_closed_forms():
        r0, r1 = escrow_bit_density(0, theta), escrow_bit_density(1, theta)
        f = qmath.fidelity(r0, r1)
        for alpha in cfg.alpha_grid:
            zero, one = adv.protocol_quadratic_pair(alpha, params)
            rep = ana.binding_metrics(zero, one, params)
            if abs((rep.p0 - 0.5) - math.sqrt(f) * math.sin(2 * alpha) / 2) > 1e-8:
                return False, f"advantage mismatch at alpha={alpha}"
            if abs(rep.p_err - (1 - f) * math.sin(alpha) ** 2) > 1e-9:
                return False, f"detection form mismatch at alpha={alpha}"
            if not ana.check_binding_bound(rep):
                return False, f"binding frontier violated at alpha={alpha}"
        return True, "advantage sqrt(f)sin(2a)/2, detection (1-f)sin^2(a), frontier holds"

    def check_weak_measurement_forms():
        r0, r1 = escrow_bit_density(0, theta), escrow_bit_density(1, theta)
        t = qmath.trace_norm(r0.matrix - r1.matrix)
        for p in cfg.p_grid:
            bob = adv.bob_weak_measurement(adv.BobWeakParams(p), r0, r1)
            rep = ana.sealing_metrics(bob, params)
            if abs(rep.kept_trace_distance - t * math.sqrt(p)) > 1e-8:
                return False, f"kept distance mismatch at p={p}"
            if rep.detection_p > 0.5 * (1 - math.sqrt(1 - p)) + 1e-9:
                return False, f"detection cap violated at p={p}"
            if abs(ana.enumerated_return_error(bob, params) - rep.detection_p) > 1e-9:
                return False, f"detection identity broken at p={p}"
        return True, "kept distance t sqrt(p), detection <= (1-sqrt(1-p))/2, identity holds"

    def check_binding_frontier_random():
        rng = np.random.default_rng(rng_master.integers(2 ** 32))
        for i in range(50):
            rep = ana.binding_metrics(*adv.random_binding_pair(rng), params)
            if not ana.check_binding_bound(rep):
                return False, f"pair {i} violates the frontier"
        return True, "50 random shared-deposit pairs inside the frontier"

    def check_sealing_frontier_random():
        rng = np.random.default_rng(rng_master.integers(2 ** 32))
        for i in range(50):
            bob = adv.random_return_attack(rng, 2)
            rep = ana.sealing_metrics(bob, params)
            if not ana.check_sealing_bound(rep):
                return False, f"attack {i} violates the frontier"
            if abs(ana.enumerated_return_error(bob, params) - rep.detection_p) > 1e-9:
                return False, f"attack {i} breaks the detection identity"
        return True, "50 random attacks inside the frontier with the detection identity"

    def check_coinflip_caps():
        rng = np.random.default_rng(rng_master.integers(2 ** 32))
        full = ana.coinflip_bias(ana.HonestParty.ALICE_HONEST, adv.full_measurement_bob())
        if abs(max(full.win_prob_0, full.win_prob_1) - ana.BOB_WIN_CAP) > 1e-9:
            return False, "full measurement does not attain the receiver cap"
        for _ in range(100):
            bob = adv.bob_measure_coinflip(adv.unitary_from_angles(2, rng.uniform(0, math.pi, 3)))
            rep = ana.coinflip_bias(ana.HonestParty.ALICE_HONEST, bob)
            if max(rep.win_prob_0, rep.win_prob_1) > ana.BOB_WIN_CAP + 1e-9:
                return False, "a sampled receiver beat the cap"
        for _ in range(50):
            alice = adv.alice_coinflip_from_angles(rng.uniform(0, math.pi, 12))
            rep = ana.coinflip_bias(ana.HonestParty.BOB_HONEST, alice)
            if max(rep.win_prob_0, rep.win_prob_1) > ana.ALICE_WIN_CAP + 1e-9:
                return False, "a sampled depositor beat the cap"
        return True, "caps hold; full measurement attains the receiver cap"

    def check_modified_sealing():
        rng = np.random.default_rng(rng_master.integers(2 ** 32))
        for i in range(20):
            pair = (adv.random_return_attack(rng, 1), adv.random_return_attack(rng, 1))
            if not ana.modified_sealing_check(pair, params).passed:
                return False, f"conditional pair {i} failed"
        return True, "20 conditional pairs pass the reveal-first variant"

    checks = [
        ("pure-state-distance-law", check_pure_distance_law),
        ("trace-norm-tensor-multiplicativity", check_tensor_multiplicativity),
        ("purify-round-trip", check_purify_round_trip),
        ("distinguishing-measurement-dominance", check_measurement_dominance),
        ("honest-runs-exact", check_honest_runs),
        ("monte-carlo-consistency", check_monte_carlo),
        ("quadratic-depositor-closed-forms", check_quadratic_closed_forms),
        ("weak-measurement-closed-forms", check_weak_measurement_forms),
        ("binding-frontier-random-pairs", check_binding_frontier_random),
        ("sealing-frontier-random-attacks", check_sealing_frontier_random),
        ("coinflip-caps", check_coinflip_caps),
        ("modified-return-variant", check_modified_sealing),
    ]
    if cfg.inject_failure:
        checks.append(("injected-failure", lambda: (False, "deliberate test-mode failure")))
    return checks


SELFTEST_COLUMNS = ("check", "passed", "detail")


def cmd_selftest(cfg: RunConfig) -> RunSummary:
    t0 = time.perf_counter()
    rows = []
    for name, fn in _selftest_checks(cfg):
        ok, detail = fn()
        rows.append({"check": name, "passed": ok, "detail": detail})
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    passed, failed = _tally(rows, ("passed",))
    return RunSummary("selftest", cfg.echo(), SELFTEST_COLUMNS, rows,
                      passed, failed, time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# argument handling


def _parse_grid(text: str) -> tuple[float, ...]:
    try:
        grid = tuple(float(tok) for tok in text.split(",") if tok.strip())
    except ValueError as exc:
        raise ConfigError(f"bad grid {text!r}: {exc}") from exc
    if not grid:
        raise ConfigError("grid must be nonempty")
    return grid


def _read_config_file(path: str) -> dict:
    echo = {}
    try:
        with open(path) as fh:
            for line in fh:
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"bad config line {line!r}")
                key, value = line.split("=", 1)
                echo[key.strip()] = value.strip()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return echo


def build_config(args: argparse.Namespace) -> RunConfig:
    echo = _read_config_file(args.config) if args.config else {}

    def pick(flag, key, cast):
        if flag is not None:
            return cast(flag)
        if key in echo:
            return cast(echo[key])
        return None

    kwargs = {"command": args.command, "config_file": args.config, "config_echo": echo}
    theta = pick(args.theta, "theta", float)
    if theta is not None:
        if not 0.0 < theta <= math.pi / 8 + 1e-12:
            raise ConfigError(f"theta {theta} outside (0, pi/8]")
        kwargs["theta"] = theta
    alpha = pick(args.alpha_grid, "alpha_grid", _parse_grid)
    if alpha is not None:
        kwargs["alpha_grid"] = alpha
    pgrid = pick(args.p_grid, "p_grid", _parse_grid)
    if pgrid is not None:
        if any(not 0.0 <= p <= 1.0 for p in pgrid):
            raise ConfigError("p grid values must lie in [0, 1]")
        kwargs["p_grid"] = pgrid
    seed = pick(args.seed, "seed", int)
    if seed is not None:
        kwargs["seed"] = seed
    samples = pick(args.samples, "samples", int)
    if samples is not None:
        if samples < 0:
            raise ConfigError("samples must be nonnegative")
        kwargs["samples"] = samples
    if args.out is not None:
        kwargs["out"] = args.out
    fmt = pick(args.format, "format", str)
    if fmt is not None:
        if fmt not in ("csv", "json"):
            raise ConfigError(f"unknown format {fmt!r}")
        kwargs["fmt"] = fmt
    kwargs["inject_failure"] = bool(getattr(args, "inject_failure", False))
    return RunConfig(**kwargs)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qescrow", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("coinflip", "escrow-binding", "escrow-sealing", "selftest"):
        p = sub.add_parser(name)
        p.add_argument("--theta", type=float, default=None)
        p.add_argument("--alpha-grid", default=None, help="comma-separated angles")
        p.add_argument("--p-grid", default=None, help="comma-separated strengths in [0,1]")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--samples", type=int, default=None)
        p.add_argument("--out", default=None)
        p.add_argument("--format", default=None, choices=("csv", "json"))
        p.add_argument("--config", default=None, help="optional key=value config file")
        if name == "selftest":
            p.add_argument("--inject-failure", action="store_true",
                           help=argparse.SUPPRESS)  # test mode: force one failing check
    return parser


COMMANDS = {
    "coinflip": cmd_coinflip,
    "escrow-binding": cmd_escrow_binding,
    "escrow-sealing": cmd_escrow_sealing,
    "selftest": cmd_selftest,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = build_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    summary = COMMANDS[cfg.command](cfg)
    if cfg.out:
        write_summary(summary, cfg.out, cfg.fmt)
    print(f"{cfg.command}: {summary.passed} passed, {summary.failed} failed "
          f"({summary.wall_time:.2f}s)")
    return 0 if summary.failed == 0 else 3


if __name__ == "__main__":
    raise SystemExit(main())
