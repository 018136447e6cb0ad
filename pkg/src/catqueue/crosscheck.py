"""Closed forms against the independent routes, over a random parameter grid."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .ctmc import TruncationTooLarge, oracle_performance, oracle_stationary, series_performance, truncation_for
from .model import EconParams, MixedStrategy, ModelParams, ThresholdStrategy, UnobservableRegime, classify_unobservable
from .observable import (
    equilibrium_threshold,
    naor_limit_check,
    s_obs,
    social_benefit_threshold,
    stationary_observable,
)
from .unobservable import (
    char_roots,
    eh_limit_check,
    equilibrium_mixed,
    first_order_residual,
    optimal_mixed_social,
    s_un,
    social_benefit_unobservable,
    stationary_unobservable,
)

OBS_RTOL = 1e-8
UNOBS_TOL = 1e-9
FIXED_POINT_TOL = 1e-9
FOC_TOL = 1e-9
MIXED_CTMC_RTOL = 1e-8
MAX_THRESHOLD = 50
# mixed-strategy chains above this many levels are skipped by the dense check
MIXED_CTMC_LEVELS = 800


def random_grid(size: int, seed: int = 0) -> list[tuple[ModelParams, EconParams]]:
    """``lam/mu`` in (0.1, 5), ``xi`` in (0.01, 2), ``eta`` in (0.1, 5);
    ``r_f`` spans all regimes as a fraction of ``c / xi``."""
    rng = np.random.default_rng(seed)
    grid = []
    for _ in range(size):
        mu = rng.uniform(0.5, 5.0)
        lam = mu * rng.uniform(0.1, 5.0)
        xi = rng.uniform(0.01, 2.0)
        eta = rng.uniform(0.1, 5.0)
        r_s = rng.uniform(0.5, 20.0)
        c = rng.uniform(0.5, 10.0)
        r_f = rng.uniform(0.0, 1.3) * c / xi
        grid.append((ModelParams(lam, mu, xi, eta), EconParams(r_s, r_f, c)))
    return grid


@dataclass
class CheckResult:
    name: str
    tolerance: float
    worst: float = 0.0
    evaluated: int = 0
    failures: int = 0
    worst_case: str = ""
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.failures == 0 and self.evaluated > 0

    def record(self, error: float, where: str, ok: bool | None = None) -> None:
        self.evaluated += 1
        ok = error <= self.tolerance if ok is None else ok
        if not ok:
            self.failures += 1
            if self.failures == 1:
                self.worst_case = where
        if error > self.worst:
            self.worst = error
            if self.failures == 0:
                self.worst_case = where


def _where(params: ModelParams, econ: EconParams, extra: str = "") -> str:
    p, e = params, econ
    text = (f"lam={p.lam:.6g} mu={p.mu:.6g} xi={p.xi:.6g} eta={p.eta:.6g} "
            f"r_s={e.r_s:.6g} r_f={e.r_f:.6g} c={e.c:.6g}")
    return f"{text} {extra}".strip()


def relative_error(value: float, reference: float) -> float:
    return abs(value - reference) / abs(reference) if reference != 0 else abs(value)


def mixed_error(value: float, reference: float) -> float:
    """Relative error, falling back to absolute for references below one."""
    return abs(value - reference) / max(1.0, abs(reference))


def check_observable_social(grid, perturb: float = 0.0) -> CheckResult:
    res = CheckResult("threshold welfare closed form vs ctmc", OBS_RTOL)
    for params, econ in grid:
        for n in range(MAX_THRESHOLD + 1):
            closed = social_benefit_threshold(params, econ, n) * (1.0 + perturb)
            oracle = oracle_performance(params, econ, ThresholdStrategy.finite(n)).social_rate
            res.record(relative_error(closed, oracle), _where(params, econ, f"n={n}"))
    return res


def _probe_qs(params, econ, rng) -> list[float]:
    qs = [0.0, 1.0, float(rng.uniform()), equilibrium_mixed(params, econ).q, optimal_mixed_social(params, econ).strategy.q]
    return qs


def check_unobservable_social(grid, perturb: float = 0.0, seed: int = 0) -> CheckResult:
    res = CheckResult("mixed welfare closed form vs level series", UNOBS_TOL)
    rng = np.random.default_rng(seed)
    for params, econ in grid:
        for q in _probe_qs(params, econ, rng):
            closed = social_benefit_unobservable(params, econ, q) * (1.0 + perturb)
            series = series_performance(params, econ, q)
            res.record(mixed_error(closed, series.social_rate), _where(params, econ, f"q={q:.6g}"))
    return res


def check_mixed_ctmc(grid, seed: int = 0) -> CheckResult:
    res = CheckResult("mixed stationary law vs ctmc", MIXED_CTMC_RTOL)
    rng = np.random.default_rng(seed + 1)
    skipped = 0
    for params, econ in grid:
        q = float(rng.uniform())
        strategy = MixedStrategy(q)
        try:
            levels = truncation_for(params, strategy)
        except TruncationTooLarge:
            levels = math.inf
        if levels > MIXED_CTMC_LEVELS:
            skipped += 1
            continue
        spec, pi = oracle_stationary(params, strategy)
        st = stationary_unobservable(params, q)
        k = np.arange(spec.truncation_k + 1)
        err = max(abs(pi[0] - st.p00), float(np.max(np.abs(pi[1:] - st.level_mass(k)))))
        res.record(err, _where(params, econ, f"q={q:.6g}"))
    res.notes.append(f"{skipped} points skipped (more than {MIXED_CTMC_LEVELS} levels needed)")
    return res


def check_observable_stationary(grid) -> CheckResult:
    res = CheckResult("threshold stationary law normalised, p00 exact", 1e-12)
    for params, econ in grid:
        n = int(params.lam) % 20
        st = stationary_observable(params, n)
        err = max(abs(st.total_mass - 1.0), abs(st.p00 - params.xi / (params.xi + params.eta)))
        res.record(err, _where(params, econ, f"n={n}"), ok=err <= 1e-12 and bool(np.all(st.p_k1 >= 0)))
    return res


def check_fixed_points(grid) -> CheckResult:
    res = CheckResult("equilibria are break-even points", FIXED_POINT_TOL)
    for params, econ in grid:
        ne = equilibrium_threshold(params, econ)
        if ne.is_finite:
            ok = s_obs(params, econ, ne.n) >= 0.0 > s_obs(params, econ, ne.n + 1)
            res.record(0.0 if ok else math.inf, _where(params, econ, f"n_e={ne.n}"), ok=ok)
        if classify_unobservable(params, econ) is UnobservableRegime.INTERIOR:
            q = equilibrium_mixed(params, econ).q
            res.record(abs(s_un(params, econ, 1.0, q)), _where(params, econ, f"q_e={q:.9g}"))
    return res


def check_social_vs_equilibrium(grid) -> CheckResult:
    res = CheckResult("q_soc <= q_e and first-order condition", FOC_TOL)
    for params, econ in grid:
        q_e = equilibrium_mixed(params, econ).q
        q_soc = optimal_mixed_social(params, econ).strategy.q
        where = _where(params, econ, f"q_e={q_e:.9g} q_soc={q_soc:.9g}")
        res.record(max(0.0, q_soc - q_e), where, ok=q_soc <= q_e)
        if 0.0 < q_soc < 1.0:
            x = char_roots(params, q_soc).x2
            res.record(abs(first_order_residual(params, econ, x)), where)
    return res


def check_social_optimality(grid) -> CheckResult:
    res = CheckResult("q_soc maximises mixed welfare on a q grid", 1e-12)
    qs = np.linspace(0.0, 1.0, 201)
    for params, econ in grid:
        best = optimal_mixed_social(params, econ).value
        top = max(social_benefit_unobservable(params, econ, float(q)) for q in qs)
        gap = (top - best) / max(1.0, abs(top))
        res.record(max(gap, 0.0), _where(params, econ))
    return res


def check_eta_invariance(grid) -> CheckResult:
    res = CheckResult("equilibria and q_soc independent of eta", 0.0)
    for params, econ in grid:
        outs = []
        for eta in (0.1, 1.0, 10.0):
            p = params.replace(eta=eta)
            outs.append((str(equilibrium_threshold(p, econ)), equilibrium_mixed(p, econ).q,
                         optimal_mixed_social(p, econ).strategy.q))
        same = all(o == outs[0] for o in outs)
        res.record(0.0 if same else math.inf, _where(params, econ), ok=same)
    return res


def check_limits() -> CheckResult:
    res = CheckResult("catastrophe-free limits", 1e-3)
    xis = (1e-2, 1e-4, 1e-6)
    naor = naor_limit_check(7.0, 2.0, 7.0, 3.0, xis)
    res.record(naor.errors[-1], "threshold limit, xi=1e-6", ok=naor.errors[-1] < 1e-3 and naor.decreasing)
    eh = eh_limit_check(7.0, 2.0, 7.0, 3.0, (1e-2, 1e-3, 1e-4, 1e-6))
    res.record(eh.errors[-1], "mixed limit, xi=1e-6", ok=eh.errors[-1] < 1e-4 and eh.decreasing)
    return res


@dataclass
class VerifyReport:
    results: list[CheckResult]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def table(self) -> str:
        width = max(len(r.name) for r in self.results)
        lines = [f"{'check':<{width}}  status  {'worst':>10}  {'tol':>8}  points"]
        for r in self.results:
            status = "PASS" if r.passed else "FAIL"
            lines.append(f"{r.name:<{width}}  {status:<6}  {r.worst:>10.3g}  {r.tolerance:>8.0e}  {r.evaluated}")
            for note in r.notes:
                lines.append(f"    {note}")
            if not r.passed and r.worst_case:
                lines.append(f"    failing case: {r.worst_case}")
        return "\n".join(lines)


def run_all(grid_size: int = 200, seed: int = 0, perturb: float = 0.0) -> VerifyReport:
    if grid_size < 1:
        from .scenario import EmptyGrid

        raise EmptyGrid(f"grid size must be >= 1, got {grid_size!r}")
    grid = random_grid(grid_size, seed)
    checks: list[Callable[[], CheckResult]] = [
        lambda: check_observable_social(grid, perturb),
        lambda: check_unobservable_social(grid, perturb, seed),
        lambda: check_mixed_ctmc(grid, seed),
        lambda: check_observable_stationary(grid),
        lambda: check_fixed_points(grid),
        lambda: check_social_vs_equilibrium(grid),
        lambda: check_social_optimality(grid),
        lambda: check_eta_invariance(grid),
        check_limits,
    ]
    return VerifyReport([check() for check in checks])
