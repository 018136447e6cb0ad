"""Parameter and strategy types shared by every analytic in the package.

The queue is a single-server Markovian system that suffers Poisson
catastrophes. A catastrophe removes every customer and puts the server
under an exponential repair, during which arrivals are turned away.
State ``(0, 0)`` is "under repair"; state ``(k, 1)`` is "operative with
``k`` customers present".
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass


class ParameterError(ValueError):
    """Base class for rejected model or reward-cost inputs.

    ``field`` names the offending attribute so front ends can point at
    the right flag.
    """

    def __init__(self, field: str, value: float, message: str):
        super().__init__(f"{field}={value!r}: {message}")
        self.field = field
        self.value = value


class NonPositiveRate(ParameterError):
    pass


class NegativeEconValue(ParameterError):
    pass


class NonFinite(ParameterError):
    pass


@dataclass(frozen=True)
class ModelParams:
    """Operational rates: arrivals ``lam``, services ``mu``,
    catastrophes ``xi`` and repairs ``eta``."""

    lam: float
    mu: float
    xi: float
    eta: float

    @property
    def serve_ratio(self) -> float:
        """Probability that a service completes before the next catastrophe."""
        return self.mu / (self.mu + self.xi)

    @property
    def down_fraction(self) -> float:
        return self.xi / (self.xi + self.eta)

    @property
    def up_fraction(self) -> float:
        return self.eta / (self.xi + self.eta)

    def replace(self, **changes) -> "ModelParams":
        return ModelParams(**{**self.__dict__, **changes})


@dataclass(frozen=True)
class EconParams:
    """Service reward ``r_s``, catastrophe compensation ``r_f`` and waiting
    cost rate ``c``."""

    r_s: float
    r_f: float
    c: float

    def replace(self, **changes) -> "EconParams":
        return EconParams(**{**self.__dict__, **changes})


class ThresholdKind(enum.Enum):
    BALK = "BALK"
    FINITE = "FINITE"
    ENTER = "ALWAYS"


@dataclass(frozen=True)
class ThresholdStrategy:
    """Observable-case rule: join an operative system iff it holds at most
    ``n`` customers. ``BALK`` and ``ENTER`` are the two degenerate rules."""

    kind: ThresholdKind
    n: int | None = None

    def __post_init__(self):
        if self.kind is ThresholdKind.FINITE:
            if self.n is None or int(self.n) != self.n or self.n < 0:
                raise ValueError(f"finite threshold needs an integer n >= 0, got {self.n!r}")
        elif self.n is not None:
            raise ValueError(f"{self.kind.value} strategy takes no threshold")

    @classmethod
    def balk(cls) -> "ThresholdStrategy":
        return cls(ThresholdKind.BALK)

    @classmethod
    def enter(cls) -> "ThresholdStrategy":
        return cls(ThresholdKind.ENTER)

    @classmethod
    def finite(cls, n: int) -> "ThresholdStrategy":
        return cls(ThresholdKind.FINITE, int(n))

    @property
    def is_finite(self) -> bool:
        return self.kind is ThresholdKind.FINITE

    def join_probability(self, k: int) -> float:
        if self.kind is ThresholdKind.BALK:
            return 0.0
        if self.kind is ThresholdKind.ENTER:
            return 1.0
        return 1.0 if k <= self.n else 0.0

    def __str__(self) -> str:
        return str(self.n) if self.is_finite else self.kind.value


@dataclass(frozen=True)
class MixedStrategy:
    """Unobservable-case rule: join an operative system with probability ``q``."""

    q: float

    def __post_init__(self):
        if not (0.0 <= self.q <= 1.0):
            raise ValueError(f"joining probability must lie in [0, 1], got {self.q!r}")

    def join_probability(self, k: int) -> float:
        return self.q

    def __str__(self) -> str:
        return f"q={self.q:.9g}"


Strategy = ThresholdStrategy | MixedStrategy


class ObservableRegime(enum.Enum):
    I = "I"      # always balk
    II = "II"    # finite threshold
    III = "III"  # always enter


class UnobservableRegime(enum.Enum):
    BALK = "Balk"
    INTERIOR = "Interior"
    ENTER = "Enter"


@dataclass(frozen=True)
class PerformanceReport:
    """Long-run measures under a strategy.

    ``p_ser`` and ``p_cat`` are per arriving customer (all arrivals, including
    those turned away), so ``lam * p_ser`` is the rate of service completions.
    ``source`` records which route produced the numbers.
    """

    p_ser: float
    p_cat: float
    e_q: float
    social_rate: float
    source: str


def validate(params: ModelParams, econ: EconParams | None = None) -> None:
    """Raise a :class:`ParameterError` subclass if any input is out of range."""
    for name in ("lam", "mu", "xi", "eta"):
        value = getattr(params, name)
        if not math.isfinite(value):
            raise NonFinite(name, value, "rate must be finite")
        if value <= 0:
            raise NonPositiveRate(name, value, "rate must be strictly positive")
    if econ is None:
        return
    for name in ("r_s", "r_f", "c"):
        value = getattr(econ, name)
        if not math.isfinite(value):
            raise NonFinite(name, value, "value must be finite")
    if econ.r_s < 0:
        raise NegativeEconValue("r_s", econ.r_s, "service reward must be >= 0")
    if econ.r_f < 0:
        raise NegativeEconValue("r_f", econ.r_f, "compensation must be >= 0")
    if econ.c <= 0:
        raise NegativeEconValue("c", econ.c, "waiting cost must be > 0")


def balk_cutoff(params: ModelParams, econ: EconParams) -> float:
    """Compensation below which nobody ever joins: ``C/xi - mu R_s/xi``."""
    return econ.c / params.xi - params.mu * econ.r_s / params.xi


def enter_cutoff(params: ModelParams, econ: EconParams) -> float:
    """Compensation ``C/xi`` at and above which joining is always worthwhile."""
    return econ.c / params.xi


def classify_observable(params: ModelParams, econ: EconParams) -> ObservableRegime:
    validate(params, econ)
    if econ.r_f < balk_cutoff(params, econ):
        return ObservableRegime.I
    if econ.r_f < enter_cutoff(params, econ):
        return ObservableRegime.II
    return ObservableRegime.III


def mixed_enter_cutoff(params: ModelParams, econ: EconParams) -> float:
    """Compensation at and above which the unobservable equilibrium is ``q = 1``."""
    from .unobservable import char_roots

    x2 = char_roots(params, 1.0).x2
    return econ.c / params.xi - params.mu * econ.r_s * (1.0 - x2) / params.xi


def classify_unobservable(params: ModelParams, econ: EconParams) -> UnobservableRegime:
    validate(params, econ)
    if econ.r_f <= balk_cutoff(params, econ):
        return UnobservableRegime.BALK
    if econ.r_f >= mixed_enter_cutoff(params, econ):
        return UnobservableRegime.ENTER
    return UnobservableRegime.INTERIOR
