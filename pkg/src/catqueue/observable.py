"""Closed forms for customers who see the queue length before deciding."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .model import (
    EconParams,
    ModelParams,
    ObservableRegime,
    PerformanceReport,
    ThresholdKind,
    ThresholdStrategy,
    classify_observable,
    validate,
)
from .unobservable import LimitReport, PreconditionViolated, SocialOptimum, char_roots, social_benefit_unobservable

# Snap distance used before flooring the equilibrium threshold (ties favour entering).
FLOOR_SNAP = 1e-9
# Largest tolerated ratio of summed term magnitudes to the result.
MAX_CANCELLATION = 1e6
# Relative slack under which two welfare values count as tied in the threshold search.
TIE_RTOL = 1e-12


class NumericalInstability(RuntimeWarning):
    """Closed form lost too many digits; the value came from a direct linear solve."""


class CapTooSmall(RuntimeWarning):
    """The social optimum sat on the search bound and may lie beyond it."""


@dataclass(frozen=True)
class SojournStats:
    p_serve: float
    e_sojourn: float


def _log_serve_ratio(params: ModelParams) -> float:
    return -math.log1p(params.xi / params.mu)


def sojourn_stats(params: ModelParams, n: int) -> SojournStats:
    """Fate of a customer who joins behind ``n`` others."""
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n!r}")
    log_s = (n + 1) * _log_serve_ratio(params)
    p_serve = math.exp(log_s)
    return SojournStats(p_serve=p_serve, e_sojourn=-math.expm1(log_s) / params.xi)


def s_obs(params: ModelParams, econ: EconParams, n: int) -> float:
    """Expected net benefit of joining when ``n`` customers are present."""
    st = sojourn_stats(params, n)
    return econ.r_s * st.p_serve + (econ.r_f - econ.c / params.xi) * (1.0 - st.p_serve)


def continuous_threshold(params: ModelParams, econ: EconParams) -> float:
    """``ln K / ln S - 1``, the real-valued point where ``s_obs`` changes sign.

    Only meaningful for ``r_f < c / xi`` and ``r_s > 0``.
    """
    slack = econ.c / params.xi - econ.r_f
    if slack <= 0 or econ.r_s <= 0:
        raise ValueError("continuous threshold needs r_f < c/xi and r_s > 0")
    log_k = -math.log1p(econ.r_s / slack)
    return log_k / _log_serve_ratio(params) - 1.0


def equilibrium_threshold(params: ModelParams, econ: EconParams) -> ThresholdStrategy:
    regime = classify_observable(params, econ)
    if regime is ObservableRegime.I:
        return ThresholdStrategy.balk()
    if regime is ObservableRegime.III:
        return ThresholdStrategy.enter()
    x = continuous_threshold(params, econ)
    nearest = round(x)
    if abs(x - nearest) <= FLOOR_SNAP:
        x = nearest
    return ThresholdStrategy.finite(max(0, math.floor(x)))


def naor_limit_check(lam: float, mu: float, r_s: float, c: float,
                     xi_sequence, eta: float = 1.0) -> LimitReport:
    """Track the real-valued threshold as catastrophes vanish (no compensation).

    The target is the catastrophe-free threshold ``mu r_s / c - 1``.
    """
    if mu * r_s < c:
        raise PreconditionViolated(f"need mu * r_s >= c, got {mu * r_s!r} < {c!r}")
    econ = EconParams(r_s=r_s, r_f=0.0, c=c)
    values = tuple(continuous_threshold(ModelParams(lam, mu, xi, eta), econ) for xi in xi_sequence)
    return LimitReport(tuple(xi_sequence), values, mu * r_s / c - 1.0)


@dataclass(frozen=True)
class _Coefficients:
    x1: float
    x2: float
    d1: float         # may underflow to 0 for large n
    d1_scaled: float  # d1 * x1**n
    d2: float

    def level_mass(self, n: int, k: np.ndarray) -> np.ndarray:
        lead = self.d1_scaled * np.exp((k - n) * math.log(self.x1))
        return lead + self.d2 * self.x2 ** k


def _coefficients(params: ModelParams, n: int) -> _Coefficients:
    lam, mu, xi, eta = params.lam, params.mu, params.xi, params.eta
    roots = char_roots(params, 1.0)
    x1, x2 = roots.x1, roots.x2
    ratio_n = (x2 / x1) ** n
    a1 = (mu + xi) * x1 - lam
    a2 = (mu + xi) * x2 - lam
    # common denominator divided through by x1**n
    den = (xi + eta) * ((lam + xi - mu * x2) * a1 - (lam + xi - mu * x1) * a2 * ratio_n)
    d1_scaled = -eta * xi * a2 * x2 ** n / den
    d2 = eta * xi * a1 / den
    d1 = d1_scaled * math.exp(-n * math.log(x1))
    return _Coefficients(x1, x2, d1, d1_scaled, d2)


@dataclass(frozen=True)
class ObservableStationary:
    threshold_n: int
    p00: float
    p_k1: np.ndarray
    d1: float
    d2: float
    x1: float
    x2: float
    from_oracle: bool = False

    @property
    def total_mass(self) -> float:
        return self.p00 + float(self.p_k1.sum())


def stationary_observable(params: ModelParams, threshold_n: int) -> ObservableStationary:
    """Stationary law under threshold ``threshold_n``; levels ``0..n+1`` are reachable."""
    validate(params)
    n = int(threshold_n)
    if n < 0:
        raise ValueError(f"threshold must be >= 0, got {threshold_n!r}")
    co = _coefficients(params, n)
    k = np.arange(n + 2)
    lead = co.d1_scaled * np.exp((k - n) * math.log(co.x1))
    tail = co.d2 * co.x2 ** k
    p = lead + tail
    p00 = params.xi / (params.xi + params.eta)
    from_oracle = False
    with np.errstate(divide="ignore", invalid="ignore"):
        lost = np.max((np.abs(lead) + np.abs(tail)) / np.abs(p))
    if not np.isfinite(lost) or lost > MAX_CANCELLATION:
        warnings.warn(
            f"closed-form stationary law lost precision at n={n}; using direct solve",
            NumericalInstability, stacklevel=2,
        )
        p = _oracle_levels(params, n)
        from_oracle = True
    return ObservableStationary(n, p00, p, co.d1, co.d2, co.x1, co.x2, from_oracle)


def performance_observable(params: ModelParams, econ: EconParams, threshold_n: int) -> PerformanceReport:
    """Service/catastrophe split and mean queue length by summing over the stationary law."""
    st = stationary_observable(params, threshold_n)
    n = st.threshold_n
    k = np.arange(n + 1)
    serve = np.exp((k + 1) * _log_serve_ratio(params))
    joining = st.p_k1[: n + 1]
    p_ser = float(np.sum(joining * serve))
    p_cat = float(np.sum(joining * -np.expm1((k + 1) * _log_serve_ratio(params))))
    e_q = float(np.sum(np.arange(n + 2) * st.p_k1))
    social = params.lam * (p_ser * econ.r_s + p_cat * econ.r_f) - econ.c * e_q
    source = "ctmc-oracle" if st.from_oracle else "closed-form"
    return PerformanceReport(p_ser, p_cat, e_q, social, source=source)


def _social_terms(params: ModelParams, econ: EconParams, n: int) -> np.ndarray:
    """The five additive pieces of the threshold welfare closed form."""
    lam, mu, xi, eta = params.lam, params.mu, params.xi, params.eta
    r_s, r_f, c = econ.r_s, econ.r_f, econ.c
    co = _coefficients(params, n)
    x1, x2, d1, d1s, d2 = co.x1, co.x2, co.d1, co.d1_scaled, co.d2
    s_pow = math.exp((n + 1) * _log_serve_ratio(params))  # (mu / (mu + xi))**(n + 1)
    # d1 * x1**(n+1) == d1s * x1, d1 * x1**(n+2) == d1s * x1**2
    served_1 = mu * (d1 - d1s * x1 * s_pow) / (mu + xi - mu * x1)
    served_2 = mu * d2 * (1.0 - x2 ** (n + 1) * s_pow) / (mu + xi - mu * x2)
    scale = c * mu * mu / (xi * xi)
    return np.array([
        lam * (r_s - r_f) * served_1,
        lam * (r_s - r_f) * served_2,
        lam * r_f * (eta / (xi + eta) - d1s * x1 - d2 * x2 ** (n + 1)),
        -scale * (1.0 - x2) ** 2 * (d1 * x1 - (n + 2) * d1s * x1 ** 2 + (n + 1) * d1s * x1 ** 3),
        -scale * d2 * x2 * (1.0 - x1) ** 2 * (1.0 - (n + 2) * x2 ** (n + 1) + (n + 1) * x2 ** (n + 2)),
    ])


def social_benefit_threshold(params: ModelParams, econ: EconParams, n: int) -> float:
    """Closed-form welfare per time unit under finite threshold ``n``."""
    terms = _social_terms(params, econ, n)
    value = float(terms.sum())
    magnitude = float(np.abs(terms).sum())
    if not math.isfinite(value) or (magnitude > 0 and magnitude > MAX_CANCELLATION * abs(value)):
        warnings.warn(
            f"closed-form threshold welfare lost precision at n={n}; using direct solve",
            NumericalInstability, stacklevel=2,
        )
        return _oracle_social(params, econ, n)
    return value


def social_benefit_observable(params: ModelParams, econ: EconParams, strategy: ThresholdStrategy) -> float:
    validate(params, econ)
    if strategy.kind is ThresholdKind.BALK:
        return 0.0
    if strategy.kind is ThresholdKind.ENTER:
        return social_benefit_unobservable(params, econ, 1.0)
    return social_benefit_threshold(params, econ, strategy.n)


def default_search_cap(params: ModelParams, econ: EconParams) -> int:
    ne = equilibrium_threshold(params, econ)
    if ne.is_finite:
        return max(2 * ne.n, 64)
    return 1024


def optimal_threshold_social(params: ModelParams, econ: EconParams, n_cap: int | None = None) -> SocialOptimum:
    """Exhaustive search for the welfare-maximising threshold.

    Candidates are always-balk (welfare 0) and ``Finite(0..n_cap)``. Values
    within ``TIE_RTOL`` of the best are treated as ties and the smallest
    threshold wins. ``cap_hit`` is set (with a :class:`CapTooSmall` warning)
    when the winner is ``n_cap`` itself.
    """
    validate(params, econ)
    if n_cap is None:
        n_cap = default_search_cap(params, econ)
    if n_cap < 0:
        raise ValueError(f"n_cap must be >= 0, got {n_cap!r}")
    values = np.array([social_benefit_threshold(params, econ, n) for n in range(n_cap + 1)])
    best = max(0.0, float(values.max()))
    floor = best - TIE_RTOL * abs(best)
    if best <= 0.0 or 0.0 >= floor:
        return SocialOptimum(ThresholdStrategy.balk(), 0.0, False)
    n = int(np.argmax(values >= floor))
    cap_hit = n == n_cap
    if cap_hit:
        warnings.warn(f"social optimum found at the search cap n={n_cap}", CapTooSmall, stacklevel=2)
    return SocialOptimum(ThresholdStrategy.finite(n), float(values[n]), cap_hit)


def _oracle_levels(params: ModelParams, n: int) -> np.ndarray:
    from .ctmc import ChainSpec, build_generator, solve_stationary

    pi = solve_stationary(build_generator(ChainSpec(params, ThresholdStrategy.finite(n), n + 1)))
    return pi[1:]


def _oracle_social(params: ModelParams, econ: EconParams, n: int) -> float:
    from .ctmc import oracle_performance

    return oracle_performance(params, econ, ThresholdStrategy.finite(n)).social_rate
