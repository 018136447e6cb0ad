"""Direct linear-algebra route to every stationary measure.

Nothing here uses the geometric closed forms: the generator is assembled
from the transition rates, solved densely, and the measures are summed
level by level. The analytic modules are checked against this.

State 0 is the repair state ``(0, 0)``; state ``k + 1`` is ``(k, 1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import EconParams, ModelParams, PerformanceReport, Strategy, ThresholdKind, ThresholdStrategy

TAIL_TOL = 1e-12
MAX_TRUNCATION = 5000


class SingularSystem(RuntimeError):
    pass


class TruncationTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class ChainSpec:
    """Chain under ``strategy`` with operative levels ``0..truncation_k``.

    Arrivals are blocked at the top level, so a threshold ``n`` chain is
    exact with ``truncation_k = n + 1``.
    """

    params: ModelParams
    strategy: Strategy
    truncation_k: int

    def join_probability(self, k: int) -> float:
        if k >= self.truncation_k:
            return 0.0
        return self.strategy.join_probability(k)

    @property
    def n_states(self) -> int:
        return self.truncation_k + 2


def _geometric_ratio(params: ModelParams, q: float) -> float:
    a = params.lam * q
    b = a + params.mu + params.xi
    return 2.0 * a / (b + math.sqrt(b * b - 4.0 * a * params.mu))


def truncation_for(params: ModelParams, strategy: Strategy,
                   tail_tol: float = TAIL_TOL, cap: int = MAX_TRUNCATION) -> int:
    """Smallest level count whose neglected geometric tail is below ``tail_tol``."""
    if isinstance(strategy, ThresholdStrategy):
        if strategy.kind is ThresholdKind.FINITE:
            return strategy.n + 1
        q = 0.0 if strategy.kind is ThresholdKind.BALK else 1.0
    else:
        q = strategy.q
    if q == 0.0:
        return 0
    x = _geometric_ratio(params, q)
    # x**k / (1 - x) < tail_tol
    k = max(1, math.ceil(math.log(tail_tol * (1.0 - x)) / math.log(x)))
    while x ** k / (1.0 - x) >= tail_tol:
        k += 1
    if k > cap:
        raise TruncationTooLarge(f"need {k} levels for tail < {tail_tol:g}, cap is {cap}")
    return k


def chain_spec(params: ModelParams, strategy: Strategy, **kw) -> ChainSpec:
    return ChainSpec(params, strategy, truncation_for(params, strategy, **kw))


def build_generator(spec: ChainSpec) -> np.ndarray:
    p = spec.params
    size = spec.n_states
    g = np.zeros((size, size))
    g[0, 1] = p.eta
    for k in range(spec.truncation_k + 1):
        i = k + 1
        up = p.lam * spec.join_probability(k)
        if up > 0.0:
            g[i, i + 1] = up
        if k > 0:
            g[i, i - 1] = p.mu
        g[i, 0] += p.xi
    g[np.diag_indices(size)] = -g.sum(axis=1)
    return g


def solve_stationary(generator: np.ndarray) -> np.ndarray:
    """Solve ``pi G = 0, sum(pi) = 1`` with the first balance row swapped for normalisation."""
    a = generator.T.copy()
    a[0, :] = 1.0
    rhs = np.zeros(a.shape[0])
    rhs[0] = 1.0
    try:
        pi = np.linalg.solve(a, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from exc
    if not np.all(np.isfinite(pi)):
        raise SingularSystem("non-finite stationary vector")
    return np.where(np.abs(pi) < 1e-300, 0.0, pi)


def performance_measures(spec: ChainSpec, stationary: np.ndarray, econ: EconParams) -> PerformanceReport:
    p = spec.params
    levels = stationary[1:]
    k = np.arange(levels.size)
    join = np.array([spec.join_probability(int(j)) for j in k])
    serve = (p.mu / (p.mu + p.xi)) ** (k + 1)
    joined = levels * join
    p_ser = float(np.sum(joined * serve))
    p_cat = float(np.sum(joined * (1.0 - serve)))
    e_q = float(np.sum(k * levels))
    social = p.lam * p_ser * econ.r_s + p.lam * p_cat * econ.r_f - econ.c * e_q
    return PerformanceReport(p_ser, p_cat, e_q, social, source="ctmc-oracle")


def oracle_stationary(params: ModelParams, strategy: Strategy, **kw) -> tuple[ChainSpec, np.ndarray]:
    spec = chain_spec(params, strategy, **kw)
    return spec, solve_stationary(build_generator(spec))


def oracle_performance(params: ModelParams, econ: EconParams, strategy: Strategy, **kw) -> PerformanceReport:
    """One-call convenience: build, solve and sum."""
    spec, pi = oracle_stationary(params, strategy, **kw)
    return performance_measures(spec, pi, econ)


def series_performance(params: ModelParams, econ: EconParams, q: float,
                       rel_tol: float = 1e-14) -> PerformanceReport:
    """Sum the per-level series for a mixed strategy term by term.

    Each level's mass comes from the geometric law; the loop stops once the
    remaining tail is certified below ``rel_tol`` times the running sums.
    Used as the second route for the mixed-strategy welfare closed form.
    """
    x = _geometric_ratio(params, q)
    up = params.eta / (params.xi + params.eta)
    s = params.mu / (params.mu + params.xi)
    p_ser = p_cat = e_q = 0.0
    k = 0
    mass = up * (1.0 - x)
    serve = s
    while True:
        p_ser += mass * q * serve
        p_cat += mass * q * (1.0 - serve)
        e_q += k * mass
        k += 1
        mass *= x
        serve *= s
        if x == 0.0:
            break
        # remaining e_q tail is at most up * x^k * (k + 1) / (1 - x)
        tail = up * x ** k * (k + 1) / (1.0 - x)
        if tail < rel_tol * max(e_q, p_ser + p_cat, 1e-300):
            break
    social = params.lam * p_ser * econ.r_s + params.lam * p_cat * econ.r_f - econ.c * e_q
    return PerformanceReport(p_ser, p_cat, e_q, social, source="series")


def balance_residual(generator: np.ndarray, stationary: np.ndarray) -> float:
    return float(np.max(np.abs(stationary @ generator)))

