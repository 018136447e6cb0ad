"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines as they
happen; they are also collected into a summary section at the end.
"""

import contextlib
import subprocess
import sys
import time
import warnings

import numpy as np
import pytest

from catqueue import EconParams, MixedStrategy, SimConfig, ThresholdStrategy, simulate
from catqueue import crosscheck
from catqueue.observable import CapTooSmall, naor_limit_check, performance_observable, social_benefit_threshold
from catqueue.scenario import analyze, rf_grid
from catqueue.unobservable import eh_limit_check, performance_unobservable

from conftest import ACCEPTANCE_LINES, SCEN_A, SCEN_B, SCEN_C


@contextlib.contextmanager
def criterion(number, title):
    detail = {}
    ok = False
    try:
        yield detail
        ok = True
    finally:
        extra = f" ({detail['info']})" if "info" in detail else ""
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title}{extra}"
        ACCEPTANCE_LINES.append(line)
        print("\n" + line)


def sweep_analyses(params, r_s, c, rf_max):
    with warnings.catch_warnings():
        warnings.simplefilter("error", CapTooSmall)
        return [analyze(params, EconParams(r_s, float(rf), c)) for rf in rf_grid(0.0, rf_max, 0.1)]


def test_criterion_01_closed_forms_match_oracles(grid):
    with criterion(1, "welfare closed forms vs ctmc / series oracles on 200 points") as d:
        start = time.perf_counter()
        obs = crosscheck.check_observable_social(grid)
        unobs = crosscheck.check_unobservable_social(grid)
        elapsed = time.perf_counter() - start
        d["info"] = f"threshold worst rel {obs.worst:.1e}, mixed worst {unobs.worst:.1e}, {elapsed:.1f}s"
        assert obs.evaluated == 200 * 51 and obs.passed, obs.worst_case
        assert obs.worst <= 1e-8
        assert unobs.passed and unobs.worst <= 1e-9, unobs.worst_case
        assert elapsed < 30


def test_criterion_02_equilibria_are_fixed_points(grid):
    with criterion(2, "equilibria satisfy break-even conditions on the grid") as d:
        res = crosscheck.check_fixed_points(grid)
        d["info"] = f"{res.evaluated} checks, worst |s_un| {res.worst:.1e}"
        assert res.passed and res.worst < 1e-9, res.worst_case


def test_criterion_03_social_below_individual(grid):
    with criterion(3, "q_soc <= q_e everywhere, interior q_soc solves first-order condition") as d:
        res = crosscheck.check_social_vs_equilibrium(grid)
        d["info"] = f"{res.evaluated} checks, worst residual {res.worst:.1e}"
        assert res.passed and res.worst < 1e-9, res.worst_case


def test_criterion_04_first_scenario_thresholds():
    with criterion(4, "scenario (7,4,0.4,2): n_soc <= n_e, n_e -> ALWAYS, n_soc settles") as d:
        p = SCEN_A
        rows = sweep_analyses(p, 7.0, 3.0, 8.0)
        for a in rows:
            if a.n_e.is_finite:
                assert a.n_soc.is_finite and a.n_soc.n <= a.n_e.n, a.econ
        enter_from = 3.0 / p.xi
        upper = [a for a in rows if a.econ.r_f > enter_from + 1e-9]
        assert upper and all(a.n_e == ThresholdStrategy.enter() for a in upper)
        assert all(a.n_e.is_finite for a in rows if a.econ.r_f < enter_from - 1e-9)
        # past the cutoff the optimum is a finite threshold that barely moves
        # and achieves the always-enter welfare
        ns = np.array([a.n_soc.n for a in upper])
        assert all(a.n_soc.is_finite and not a.n_soc_cap_hit for a in upper)
        assert ns.max() - ns.min() <= 0.1 * ns.max()
        for a in upper:
            assert a.s_obs_soc_at_nsoc == pytest.approx(a.s_un_soc_at_qsoc, rel=1e-9)
        d["info"] = f"n_e ALWAYS from R_f={upper[0].econ.r_f:.1f}, n_soc in [{ns.min()}, {ns.max()}]"


def test_criterion_05_second_scenario_ordering():
    with criterion(5, "scenario (7,2,0.7,1): welfare ordering of the four strategies") as d:
        p = SCEN_B
        rows = sweep_analyses(p, 7.0, 3.0, 6.0)
        cutoff = 3.0 / p.xi
        coincide = 0
        for a in rows:
            chain = [a.s_un_soc_at_qe, a.s_un_soc_at_qsoc, a.s_obs_soc_at_ne, a.s_obs_soc_at_nsoc]
            scale = max(1.0, max(abs(v) for v in chain))
            if a.econ.r_f >= cutoff:
                assert max(chain) - min(chain) <= 1e-9 * scale, (a.econ.r_f, chain)
                coincide += 1
            else:
                assert all(lo <= hi + 1e-12 * scale for lo, hi in zip(chain, chain[1:])), (a.econ.r_f, chain)
        d["info"] = f"{len(rows)} points, {coincide} coincide above R_f={cutoff:.3f}"
        assert coincide > 0


def test_criterion_06_third_scenario_crossing():
    with criterion(6, "scenario (7,4,0.3,2): mixed optimum overtakes threshold equilibrium") as d:
        rows = sweep_analyses(SCEN_C, 4.0, 3.0, 10.0)
        diff = np.array([a.s_un_soc_at_qsoc - a.s_obs_soc_at_ne for a in rows])
        rf = np.array([a.econ.r_f for a in rows])
        # low region: the leading run of points where the threshold equilibrium wins
        lead = int(np.argmax(diff > 0)) if np.any(diff > 0) else diff.size
        assert lead >= 5 and np.all(diff[:lead] <= 0)
        strict = diff > 1e-9
        # high region: the longest run of consecutive strict reversals
        best, run, start, span = 0, 0, 0, (0, 0)
        for i, s in enumerate(strict):
            run = run + 1 if s else 0
            if run == 1:
                start = i
            if run > best:
                best, span = run, (start, i)
        assert best >= 5 and span[0] >= lead
        d["info"] = (f"equilibrium ahead on R_f in [0, {rf[lead - 1]:.1f}], "
                     f"reversed on [{rf[span[0]]:.1f}, {rf[span[1]]:.1f}]")


def test_criterion_07_catastrophe_free_limits():
    with criterion(7, "xi -> 0 recovers the classical threshold and joining probability") as d:
        naor = naor_limit_check(7.0, 2.0, 7.0, 3.0, (1e-2, 1e-4, 1e-6))
        eh = eh_limit_check(7.0, 2.0, 7.0, 3.0, (1e-2, 1e-4, 1e-6))
        d["info"] = f"threshold err {naor.errors[-1]:.1e}, q err {eh.errors[-1]:.1e}"
        assert naor.xi_values[-1] == 1e-6 and naor.errors[-1] < 1e-3
        assert eh.xi_values[-1] == 1e-6 and eh.errors[-1] < 1e-4


def test_criterion_08_simulation_consistency():
    with criterion(8, "simulation covers analytic measures, 100 reps x horizon 1e4") as d:
        p, e = SCEN_B, EconParams(7.0, 0.0, 3.0)
        start = time.perf_counter()
        n_e = analyze(p, e).n_e
        assert n_e.is_finite
        cases = {
            "q=1": (MixedStrategy(1.0), performance_unobservable(p, e, 1.0)),
            f"n={n_e.n}": (n_e, performance_observable(p, e, n_e.n)),
        }
        down = p.xi / (p.xi + p.eta)
        notes = []
        for label, (strategy, perf) in cases.items():
            report = simulate(SimConfig(p, e, strategy, horizon=1e4, seed=2024, replications=100))
            targets = {"e_q": perf.e_q, "downtime_fraction": down, "social_rate": perf.social_rate}
            for key, value in targets.items():
                reps = report.replicates[key]
                est = getattr(report, {"e_q": "e_q_hat", "downtime_fraction": "downtime_fraction",
                                       "social_rate": "social_rate_hat"}[key])
                assert est.covers(value), (label, key, est, value)
                inside = int(np.sum(np.abs(reps - value) <= 3 * reps.std(ddof=1)))
                assert inside >= 95, (label, key, inside)
                notes.append(f"{label} {key} {abs(est.mean - value) / est.se:.1f}se")
        elapsed = time.perf_counter() - start
        d["info"] = ", ".join(notes) + f", {elapsed:.0f}s"
        assert elapsed < 120


def test_criterion_09_repair_rate_invariance(grid):
    with criterion(9, "n_e, q_e, q_soc unchanged for eta in {0.1, 1, 10}") as d:
        res = crosscheck.check_eta_invariance(grid)
        d["info"] = f"{res.evaluated} grid points"
        assert res.passed, res.worst_case


def _cli(*args):
    proc = subprocess.run([sys.executable, "-m", "catqueue", *args], capture_output=True, check=True)
    return proc.stdout


def test_criterion_10_deterministic_output(tmp_path):
    with criterion(10, "repeated sweep and seeded simulate are byte-identical"):
        model = ["--lambda", "7", "--mu", "2", "--xi", "0.7", "--eta", "1", "--rs", "7", "--c", "3"]
        sweep = ["sweep", *model, "--rf-min", "0", "--rf-max", "6", "--rf-step", "0.1"]
        assert _cli(*sweep) == _cli(*sweep)
        sim = ["simulate", *model, "--rf", "0", "--strategy", "mixed:0.5", "--horizon", "2000",
               "--reps", "3", "--seed", "11"]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert _cli(*sim, "--csv", str(a)) == _cli(*sim, "--csv", str(b))
        assert a.read_bytes() == b.read_bytes()
