"""Closed forms for customers who cannot see the queue before deciding.

Under a joining probability ``q`` the operative levels form a geometric law
whose ratio is the small root ``x2(q)`` of

    (lam q + mu + xi) x = lam q + mu x**2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .model import (
    EconParams,
    MixedStrategy,
    ModelParams,
    PerformanceReport,
    UnobservableRegime,
    classify_unobservable,
    validate,
)

# Rounding slack when the interior formula lands a hair outside [0, 1].
CLAMP_TOL = 1e-12


@dataclass(frozen=True)
class CharRoots:
    x1: float
    x2: float
    q: float


def char_roots(params: ModelParams, q: float) -> CharRoots:
    """Both roots of the level-balance characteristic equation at ``q``.

    The small root is taken as ``2c / (b + sqrt(disc))`` so it stays accurate
    when ``lam * q`` is tiny.
    """
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q must lie in [0, 1], got {q!r}")
    a = params.lam * q
    b = a + params.mu + params.xi
    root = math.sqrt(b * b - 4.0 * a * params.mu)
    x1 = (b + root) / (2.0 * params.mu)
    x2 = 2.0 * a / (b + root)
    return CharRoots(x1=x1, x2=x2, q=q)


@dataclass(frozen=True)
class UnobservableStationary:
    """Stationary law under joining probability ``q``.

    Mass ``p00`` sits on the repair state; operative level ``k`` carries
    ``up_mass * (1 - ratio) * ratio**k``.
    """

    q: float
    p00: float
    up_mass: float
    ratio: float

    def level_mass(self, k):
        k = np.asarray(k)
        return self.up_mass * (1.0 - self.ratio) * self.ratio ** k

    @property
    def mean_queue_length(self) -> float:
        return self.up_mass * self.ratio / (1.0 - self.ratio)


def stationary_unobservable(params: ModelParams, q: float) -> UnobservableStationary:
    validate(params)
    x2 = char_roots(params, q).x2
    return UnobservableStationary(
        q=q,
        p00=params.xi / (params.xi + params.eta),
        up_mass=params.eta / (params.xi + params.eta),
        ratio=x2,
    )


def s_un(params: ModelParams, econ: EconParams, q_tagged: float, q_others: float) -> float:
    """Expected net benefit of a tagged customer who joins an operative system
    with probability ``q_tagged`` while everyone else uses ``q_others``."""
    if not 0.0 <= q_tagged <= 1.0:
        raise ValueError(f"q_tagged must lie in [0, 1], got {q_tagged!r}")
    x2 = char_roots(params, q_others).x2
    mu, xi = params.mu, params.xi
    wait = econ.c / xi
    join = (econ.r_s - econ.r_f + wait) * mu * (1.0 - x2) / (mu + xi - mu * x2) + econ.r_f - wait
    return q_tagged * join


def equilibrium_mixed(params: ModelParams, econ: EconParams) -> MixedStrategy:
    regime = classify_unobservable(params, econ)
    if regime is UnobservableRegime.BALK:
        return MixedStrategy(0.0)
    if regime is UnobservableRegime.ENTER:
        return MixedStrategy(1.0)
    lam, mu, xi = params.lam, params.mu, params.xi
    r_s, r_f, c = econ.r_s, econ.r_f, econ.c
    q = (c - xi * r_f + xi * r_s) * (mu * r_s + xi * r_f - c) / (lam * (c - xi * r_f) * r_s)
    return MixedStrategy(_clamp(q))


def equilibrium_ratio(params: ModelParams, econ: EconParams) -> float:
    """The geometric ratio at which a joining customer breaks even."""
    return (params.mu * econ.r_s + params.xi * econ.r_f - econ.c) / (params.mu * econ.r_s)


def social_benefit_unobservable(params: ModelParams, econ: EconParams, q: float) -> float:
    """Net welfare per time unit when operative arrivals join w.p. ``q``."""
    x2 = char_roots(params, q).x2
    mu, xi, eta = params.mu, params.xi, params.eta
    return eta * x2 * (mu * econ.r_s * (1.0 - x2) + xi * econ.r_f - econ.c) / ((xi + eta) * (1.0 - x2))


def performance_unobservable(params: ModelParams, econ: EconParams, q: float) -> PerformanceReport:
    """Service/catastrophe split and mean queue length from the geometric sums."""
    x2 = char_roots(params, q).x2
    s = params.serve_ratio
    up = params.up_fraction
    p_ser = q * up * (1.0 - x2) * s / (1.0 - x2 * s)
    p_cat = q * up - p_ser
    e_q = up * x2 / (1.0 - x2)
    social = params.lam * (p_ser * econ.r_s + p_cat * econ.r_f) - econ.c * e_q
    return PerformanceReport(p_ser, p_cat, e_q, social, source="closed-form")


class SocialOptimum(NamedTuple):
    strategy: object
    value: float
    cap_hit: bool = False


def social_upper_cutoff(params: ModelParams, econ: EconParams) -> float:
    x2 = char_roots(params, 1.0).x2
    return econ.c / params.xi - params.mu * econ.r_s * (1.0 - x2) ** 2 / params.xi


def optimal_mixed_social(params: ModelParams, econ: EconParams) -> SocialOptimum:
    """Welfare-maximising joining probability and the welfare it achieves."""
    validate(params, econ)
    lam, mu, xi = params.lam, params.mu, params.xi
    r_s, r_f, c = econ.r_s, econ.r_f, econ.c
    if r_f <= c / xi - mu * r_s / xi:
        q = 0.0
    elif r_f >= social_upper_cutoff(params, econ):
        q = 1.0
    else:
        d = mu * r_s * (c - xi * r_f)
        root = math.sqrt(d)
        q = _clamp(root * (mu * r_s - root) * (xi * r_s + root) / (lam * d * r_s))
    return SocialOptimum(MixedStrategy(q), social_benefit_unobservable(params, econ, q))


def first_order_residual(params: ModelParams, econ: EconParams, x: float) -> float:
    """Left side of the stationarity quadratic for the welfare curve in ``x2``."""
    a = params.mu * econ.r_s
    return a * x * x - 2.0 * a * x + (a + params.xi * econ.r_f - econ.c)


@dataclass(frozen=True)
class LimitReport:
    xi_values: tuple[float, ...]
    values: tuple[float, ...]
    limit: float

    @property
    def errors(self) -> tuple[float, ...]:
        return tuple(abs(v - self.limit) for v in self.values)

    @property
    def decreasing(self) -> bool:
        e = self.errors
        return all(b < a for a, b in zip(e, e[1:]))


class PreconditionViolated(ValueError):
    pass


def eh_limit_check(lam: float, mu: float, r_s: float, c: float,
                   xi_sequence: Sequence[float], eta: float = 1.0) -> LimitReport:
    """Track the mixed equilibrium as catastrophes vanish.

    With no compensation and ``xi -> 0`` the equilibrium should approach the
    classical catastrophe-free value ``(mu - c / r_s) / lam``.
    """
    if mu * r_s <= c:
        raise PreconditionViolated(f"need mu * r_s > c, got {mu * r_s!r} <= {c!r}")
    econ = EconParams(r_s=r_s, r_f=0.0, c=c)
    values = tuple(
        equilibrium_mixed(ModelParams(lam, mu, xi, eta), econ).q for xi in xi_sequence
    )
    limit = min(1.0, (mu - c / r_s) / lam)
    return LimitReport(tuple(xi_sequence), values, limit)


def _clamp(q: float) -> float:
    if -CLAMP_TOL <= q < 0.0:
        return 0.0
    if 1.0 < q <= 1.0 + CLAMP_TOL:
        return 1.0
    return q
