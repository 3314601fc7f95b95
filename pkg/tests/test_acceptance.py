"""End-to-end acceptance checks.

Each test prints exactly one ``PASS``/``FAIL`` line for its criterion so the
summary is readable in ``pytest -v`` output, then asserts the result.
Tolerances are the documented acceptance tolerances; nothing is loosened
when a check fails.
"""

import math

import numpy as np
import pytest

from mtc_traffic.alarm_field import alarm_probability, required_event_window, truncation_radius
from mtc_traffic.analytics import approx_total_rate_markov, expected_total_rate
from mtc_traffic.atpf import DiskStepAtpf, ExponentialAtpf, first_moment_integral, tail_mass
from mtc_traffic.cli import main
from mtc_traffic.config import LAMBDA_E_GRID, parse_config
from mtc_traffic.point_process import Annulus, Disk, PointRealization, sample_ppp
from mtc_traffic.results import run_config
from mtc_traffic.rng import stream
from mtc_traffic.sim_engine import Scenario, run_experiment, sweep
from mtc_traffic.traffic_models import (
    TABLE1_RATES,
    MarkovParams,
    markov_transition_matrix,
    sample_markov_states,
    steady_state,
)

from conftest import sample_mean_se

pytestmark = pytest.mark.slow


@pytest.fixture
def report(capsys):
    def _report(criterion, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {criterion:>2}] {'PASS' if ok else 'FAIL'}: {detail}")
        assert ok, detail
    return _report


def test_criterion_01_rate_vs_event_density(report):
    cfg = parse_config({"n_trials": "500"}, preset="fig3")
    [res] = run_config(cfg)
    lines, ok = [], True
    for st in res.stats:
        cf = st.closed_form.value
        z = abs(st.mean_rate - cf) / st.std_error
        ok &= z <= 4
        lines.append(f"{st.axis_value:g}:{z:.2f}SE")
    mass = 0.1 * math.pi * 20**2
    lo, hi = res.stats[0].mean_rate, res.stats[-1].mean_rate
    e_lo = abs(lo / (mass * 0.01) - 1)
    e_hi = abs(hi / (mass * 1.0) - 1)
    ok &= e_lo < 0.01 and e_hi < 0.01
    assert [st.axis_value for st in res.stats] == list(LAMBDA_E_GRID)
    report(1, ok, f"|MC-closed form| in SE {' '.join(lines)}; endpoints off by "
                  f"{e_lo:.2%} and {e_hi:.2%} of the saturation limits")


def _pgfl_check(atpf, lambda_e, n_real, seed):
    window = Disk(truncation_radius(atpf, lambda_e, 1e-9))
    rng = stream(seed, 2)
    surv = np.empty(n_real)
    for i in range(n_real):
        ev = sample_ppp(lambda_e, window, rng)
        surv[i] = 1.0 - alarm_probability((0.0, 0.0), ev, atpf)
    m, se = sample_mean_se(surv)
    truth = math.exp(-2 * math.pi * lambda_e * first_moment_integral(atpf))
    return m, se, truth


def test_criterion_02_pgfl(report):
    cases = [(ExponentialAtpf(1.0), 1e-2), (ExponentialAtpf(1.0), 1e-1), (DiskStepAtpf(5.0, 0.8), 1e-2)]
    ok, parts = True, []
    for k, (atpf, lam) in enumerate(cases):
        m, se, truth = _pgfl_check(atpf, lam, 10_000, 100 + k)
        z = abs(m - truth) / se
        ok &= z <= 4
        parts.append(f"{atpf.kind}@{lam:g}: {m:.5f} vs {truth:.5f} ({z:.2f}SE)")
    report(2, ok, "; ".join(parts))


def test_criterion_03_campbell_count(report):
    rng = stream(303, 0)
    cell = Disk(20.0)
    counts = np.array([len(sample_ppp(0.1, cell, rng)) for _ in range(10_000)], dtype=float)
    m, se = sample_mean_se(counts)
    truth = 0.1 * math.pi * 400
    z = abs(m - truth) / se
    var_err = abs(counts.var(ddof=1) / m - 1)
    report(3, z <= 4 and var_err <= 0.10,
           f"mean count {m:.3f} vs {truth:.3f} ({z:.2f}SE), variance/mean off by {var_err:.2%}")


def test_criterion_04_steady_state(report):
    rng = stream(404, 0)
    worst_res = worst_solve = 0.0
    for _ in range(1000):
        p = rng.random()
        q = rng.random() * (1 - 1e-12)
        mp = MarkovParams(q)
        pi_a, pi_r = steady_state(p, mp)
        P = markov_transition_matrix(p, mp)
        pi = np.array([pi_r, pi_a])  # (Regular, Alarm) order
        worst_res = max(worst_res, float(np.max(np.abs(pi @ P - pi))))
        A = np.vstack([(P.T - np.eye(2))[0], np.ones(2)])
        ref = np.linalg.solve(A, np.array([0.0, 1.0]))
        worst_solve = max(worst_solve, float(np.max(np.abs(ref - pi))))
    report(4, worst_res <= 1e-12 and worst_solve <= 1e-12,
           f"max |pi P - pi| = {worst_res:.2e}, max |pi - solve| = {worst_solve:.2e}")


def test_criterion_05_bernoulli_reduction(report):
    ok, parts = True, []
    for lam in (1e-2, 1e-1):
        base = Scenario(lambda_e=lam, n_trials=500, n_slots=100, seed=505)
        b = run_experiment(base)
        m = run_experiment(Scenario(lambda_e=lam, n_trials=500, n_slots=100, seed=505,
                                    model="markov_matched", stream_id=1))
        se = math.hypot(b.std_error, m.std_error)
        z = abs(b.mean_rate - m.mean_rate) / se
        ok &= z <= 4
        parts.append(f"lambda_e={lam:g}: bernoulli {b.mean_rate:.4f}, matched markov "
                     f"{m.mean_rate:.4f} ({z:.2f} combined SE)")
    report(5, ok, "; ".join(parts))


def test_criterion_06_jensen_bound(report):
    qs = (0.1, 0.5, 0.9)
    ok, parts = True, []
    for lam in (1e-2, 1e-3):
        mk = sweep(Scenario(lambda_e=lam, model="markov", q=0.5, n_trials=300, n_slots=200,
                            seed=606), "q", qs)
        for st in mk:
            slack = (st.approx_markov + 4 * st.std_error - st.mean_rate)
            ok &= slack >= 0
            parts.append(f"{lam:g}/q={st.axis_value:g}: MC {st.mean_rate:.4f} <= "
                         f"approx {st.approx_markov:.4f} + 4SE")
        bern = sweep(Scenario(lambda_e=lam, q=0.5, n_trials=300, n_slots=200, seed=606), "q", qs)
        cfs = {st.closed_form.value for st in bern}
        ok &= len(cfs) == 1
        for a in bern:
            for b in bern:
                ok &= abs(a.mean_rate - b.mean_rate) <= 4 * math.hypot(a.std_error, b.std_error)
        # identical streams must give identical Bernoulli output whatever q is
        same = {run_experiment(Scenario(lambda_e=lam, q=q, n_trials=20, seed=606)).mean_rate
                for q in qs}
        ok &= len(same) == 1
        parts.append(f"{lam:g}: bernoulli flat in q")
    report(6, ok, "; ".join(parts))


def _state_autocorr(x, k):
    c = x - x.mean()
    return float(np.dot(c[:-k], c[k:]) / np.dot(c, c))


def _single_device_check():
    n = 1_000_000
    batches = 100
    ok, parts = True, []
    for i, (p, q) in enumerate([(0.1, 0.5), (0.2, 0.9), (0.3, 0.1)]):
        x = sample_markov_states(p, MarkovParams(q), n, stream(707, i)).states.astype(float)
        blocks = x.reshape(batches, -1)
        for k in (1, 2, 5):
            est = _state_autocorr(x, k)
            per = np.array([_state_autocorr(b, k) for b in blocks])
            se = per.std(ddof=1) / math.sqrt(batches)
            truth = (q - p) ** k
            z = abs(est - truth) / se
            ok &= z <= 4
            parts.append(f"p={p},q={q},k={k}:{z:.1f}SE")
    return ok, parts


def test_criterion_07_acf_memory_ordering(report):
    cfg = parse_config(None, preset="fig5")
    assert (cfg.scenario.n_slots, cfg.scenario.n_trials) == (10_000, 100)
    results = run_config(cfg)
    acf10 = {}
    for res in results:
        [st] = res.stats
        acf10[st.scenario.q] = (st.acf.at(10), st.acf.stderr[10])
    qs = sorted(acf10)
    ordering_ok, pairs = True, []
    for a, b in zip(qs, qs[1:]):
        (va, sa), (vb, sb) = acf10[a], acf10[b]
        sep = (vb - va) / math.hypot(sa, sb)
        ordering_ok &= sep > 4
        pairs.append(f"q {a}->{b}: {va:+.4f}->{vb:+.4f} ({sep:+.1f} combined SE)")
    single_ok, single = _single_device_check()
    report(7, ordering_ok and single_ok,
           f"lag-10 ordering {'ok' if ordering_ok else 'violated'} [{'; '.join(pairs)}]; "
           f"single-device (q-p)^k {'ok' if single_ok else 'violated'} [{' '.join(single)}]")


def test_single_device_state_autocorrelation():
    ok, parts = _single_device_check()
    assert ok, parts


def test_criterion_08_quadrature(report):
    worst_i = worst_t = 0.0
    for s in (0.5, 1.0, 3.0):
        atpf = ExponentialAtpf(s)
        worst_i = max(worst_i, abs(first_moment_integral(atpf) - s * s))
        for r in (0.0, 0.1, 1.0, 5.0, 20.0, 60.0):
            worst_t = max(worst_t, abs(tail_mass(atpf, r) - (1 + r / s) * s * s * math.exp(-r / s)))
    report(8, worst_i <= 1e-9 and worst_t <= 1e-9,
           f"max first-moment error {worst_i:.1e}, max tail-mass error {worst_t:.1e}")


def test_criterion_09_truncation_soundness(report):
    eps = 1e-6
    ok, parts = True, []
    for atpf, lam in [(ExponentialAtpf(1.0), 1e-2), (ExponentialAtpf(1.0), 1e-1),
                      (ExponentialAtpf(3.0), 1e-2)]:
        cell = Disk(20.0)
        win = required_event_window(cell, atpf, lam, eps)
        outer = Annulus(win.radius, 2 * win.radius)
        rng = stream(909, int(lam * 1e4), int(atpf.scale))
        edge = (20.0, 0.0)
        diff = np.empty(10_000)
        for i in range(len(diff)):
            inner_ev = sample_ppp(lam, win, rng)
            extra = sample_ppp(lam, outer, rng)
            both = np.vstack([inner_ev.points, extra.points])
            p_small = alarm_probability(edge, inner_ev, atpf)
            p_big = alarm_probability(edge, PointRealization(both, Disk(2 * win.radius), lam), atpf)
            diff[i] = p_big - p_small
        m, se = sample_mean_se(diff)
        ok &= abs(m) < eps + 4 * se
        parts.append(f"scale={atpf.scale:g}@{lam:g}: shift {m:.2e} (SE {se:.1e})")
    report(9, ok, "; ".join(parts))


@pytest.mark.parametrize("preset", ["table1-defaults", "fig3", "fig4", "fig5"])
def test_criterion_10_reproducible_csv(preset, tmp_path, report):
    extra = ["--trials", "20"]
    if preset == "fig5":
        extra += ["--slots", "2000"]
    outs = []
    for name in ("a", "b"):
        out = tmp_path / f"{name}.csv"
        assert main(["--preset", preset, "--seed", "12345", "--out", str(out)] + extra) == 0
        outs.append(out)
    same = outs[0].read_bytes() == outs[1].read_bytes()
    if preset == "fig5":
        same &= (tmp_path / "a_acf.csv").read_bytes() == (tmp_path / "b_acf.csv").read_bytes()
    report(10, same, f"preset {preset}: two seeded runs byte-identical={same}")
