"""Seeded discrete-event simulation of the queue with catastrophes.

Each replication runs its own ``numpy`` PCG64 stream seeded with
``seed + replication_index``. While the server is operative the next event
is drawn from the competing exponential clocks (arrival, service,
catastrophe). A repair period is jumped over in one step: its length is
exponential and the arrivals it turns away are a Poisson count.

Statistics are collected over ``[warmup, horizon]``. A customer still
present at the horizon has paid waiting cost up to the horizon but
earned no reward; such customers are counted as censored.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .model import EconParams, MixedStrategy, ModelParams, Strategy, ThresholdStrategy, validate

RNG_ALGORITHM = "numpy.random.PCG64"
MIN_TAGGED = 30
_BLOCK = 4096


class InvalidHorizon(ValueError):
    pass


class DegenerateWarmup(ValueError):
    pass


class InsufficientSamples(ValueError):
    pass


@dataclass(frozen=True)
class SimConfig:
    params: ModelParams
    econ: EconParams
    strategy: Strategy
    horizon: float
    warmup: float | None = None  # default 100 / eta
    seed: int = 0
    replications: int = 1

    @property
    def effective_warmup(self) -> float:
        return 100.0 / self.params.eta if self.warmup is None else self.warmup


@dataclass
class SimCounts:
    arrivals: int = 0
    joins: int = 0
    balks: int = 0
    blocked: int = 0
    services: int = 0
    flushed: int = 0
    catastrophes: int = 0
    censored: int = 0

    def __iadd__(self, other: "SimCounts") -> "SimCounts":
        for name in self.__dataclass_fields__:
            setattr(self, name, getattr(self, name) + getattr(other, name))
        return self


@dataclass
class _Replication:
    """Raw tallies from one run over the observation window."""

    window: float
    area: float
    down_time: float
    counts: SimCounts
    joiner_served: int
    joiner_flushed: int
    reward: float
    level_time: np.ndarray      # index 0 = under repair, k + 1 = k present
    level_arrivals: np.ndarray
    tagged: dict                # n_seen -> [count, sum, sum of squares]

    @property
    def e_q(self) -> float:
        return self.area / self.window

    @property
    def downtime_fraction(self) -> float:
        return self.down_time / self.window

    def social_rate(self, c: float) -> float:
        return (self.reward - c * self.area) / self.window

    @property
    def p_ser(self) -> float:
        done = self.joiner_served + self.joiner_flushed
        return self.joiner_served / done if done else math.nan


@dataclass(frozen=True)
class Estimate:
    mean: float
    se: float

    def covers(self, value: float, k: float = 3.0) -> bool:
        return abs(self.mean - value) <= k * self.se


@dataclass
class SimReport:
    """Replication means with standard errors across replications.

    ``p_ser_hat``/``p_cat_hat`` are fractions of joiners (arrived after
    warmup, left before the horizon) who left by service / by catastrophe.
    ``replicates`` keeps the per-replication values behind each estimate.
    """

    p_ser_hat: Estimate
    p_cat_hat: Estimate
    e_q_hat: Estimate
    social_rate_hat: Estimate
    downtime_fraction: Estimate
    mean_net_benefit_per_joiner: float
    counts: SimCounts
    state_time_fraction: np.ndarray
    arrival_seen_fraction: np.ndarray
    tagged: dict
    replicates: dict = field(repr=False)
    replications: int = 1
    rng_algorithm: str = RNG_ALGORITHM

    @property
    def censored(self) -> int:
        return self.counts.censored


def _check(config: SimConfig) -> float:
    validate(config.params, config.econ)
    if not (math.isfinite(config.horizon) and config.horizon > 0):
        raise InvalidHorizon(f"horizon must be positive and finite, got {config.horizon!r}")
    warmup = config.effective_warmup
    if not (0.0 <= warmup < config.horizon):
        raise DegenerateWarmup(f"warmup {warmup!r} must lie in [0, horizon={config.horizon!r})")
    if config.replications < 1:
        raise ValueError(f"replications must be >= 1, got {config.replications!r}")
    return warmup


def _join_rule(strategy: Strategy):
    """Return (threshold, q): join iff level <= threshold and u < q."""
    if isinstance(strategy, MixedStrategy):
        return math.inf, strategy.q
    if strategy.is_finite:
        return strategy.n, 1.0
    return (math.inf, 1.0) if strategy.join_probability(0) == 1.0 else (-1, 0.0)


def _run(config: SimConfig, warmup: float, seed: int, trace=None) -> _Replication:
    p, econ = config.params, config.econ
    lam, mu, xi, eta = p.lam, p.mu, p.xi, p.eta
    r_s, r_f, c = econ.r_s, econ.r_f, econ.c
    horizon = config.horizon
    threshold, q = _join_rule(config.strategy)
    rng = np.random.Generator(np.random.PCG64(seed))

    counts = SimCounts()
    queue: deque = deque()  # (arrival time, level seen) of customers present
    level_time = [0.0]
    level_arrivals = [0]
    tagged: dict = {}
    area = down_time = reward = 0.0
    joiner_served = joiner_flushed = 0

    exps = rng.standard_exponential(_BLOCK)
    unis = rng.random(_BLOCK)
    ie = iu = 0

    t = 0.0
    down = False
    while t < horizon:
        if ie == _BLOCK:
            exps = rng.standard_exponential(_BLOCK)
            ie = 0
        if iu >= _BLOCK - 1:
            unis = rng.random(_BLOCK)
            iu = 0
        if down:
            dt = exps[ie] / eta
            ie += 1
            end = min(t + dt, horizon)
            seen_from = max(t, warmup)
            if end > seen_from:
                span = end - seen_from
                down_time += span
                level_time[0] += span
                lost = int(rng.poisson(lam * span))
                counts.arrivals += lost
                counts.blocked += lost
                level_arrivals[0] += lost
            t += dt
            if t < horizon:
                down = False
                if trace is not None:
                    trace(t, "repair", len(queue), down)
            continue

        n = len(queue)
        total = lam + xi + (mu if n else 0.0)
        dt = exps[ie] / total
        ie += 1
        end = min(t + dt, horizon)
        if end > warmup:
            span = end - max(t, warmup)
            area += n * span
            while len(level_time) <= n + 1:
                level_time.append(0.0)
                level_arrivals.append(0)
            level_time[n + 1] += span
        t += dt
        if t >= horizon:
            break
        observed = t >= warmup
        u = unis[iu] * total
        iu += 1
        if u < lam:
            if observed:
                counts.arrivals += 1
                level_arrivals[n + 1] += 1
            if n <= threshold and (q >= 1.0 or unis[iu] < q):
                queue.append((t, n))
                if observed:
                    counts.joins += 1
            elif observed:
                counts.balks += 1
            if q < 1.0:
                iu += 1
            event = "arrival"
        elif u < lam + xi:
            if observed:
                counts.catastrophes += 1
                counts.flushed += n
                reward += r_f * n
            for arrived, seen in queue:
                if arrived >= warmup:
                    joiner_flushed += 1
                    _tag(tagged, seen, r_f - c * (t - arrived))
            queue.clear()
            down = True
            event = "catastrophe"
        else:
            arrived, seen = queue.popleft()
            if observed:
                counts.services += 1
                reward += r_s
            if arrived >= warmup:
                joiner_served += 1
                _tag(tagged, seen, r_s - c * (t - arrived))
            event = "service"
        if trace is not None:
            trace(t, event, len(queue), down)

    counts.censored = sum(1 for arrived, _ in queue if arrived >= warmup)
    return _Replication(
        window=horizon - warmup,
        area=area,
        down_time=down_time,
        counts=counts,
        joiner_served=joiner_served,
        joiner_flushed=joiner_flushed,
        reward=reward,
        level_time=np.array(level_time),
        level_arrivals=np.array(level_arrivals),
        tagged=tagged,
    )


def _tag(tagged: dict, seen: int, benefit: float) -> None:
    acc = tagged.get(seen)
    if acc is None:
        tagged[seen] = [1, benefit, benefit * benefit]
    else:
        acc[0] += 1
        acc[1] += benefit
        acc[2] += benefit * benefit


def _estimate(values: np.ndarray) -> Estimate:
    values = values[np.isfinite(values)]
    if values.size == 0:
        return Estimate(math.nan, math.nan)
    se = values.std(ddof=1) / math.sqrt(values.size) if values.size > 1 else math.nan
    return Estimate(float(values.mean()), float(se))


def _pad_sum(arrays) -> np.ndarray:
    size = max(a.size for a in arrays)
    out = np.zeros(size)
    for a in arrays:
        out[: a.size] += a
    return out


def simulate(config: SimConfig, trace=None) -> SimReport:
    """Run ``config.replications`` independent replications and aggregate.

    ``trace``, if given, is called as ``trace(t, event, in_system, down)``
    after every event (debugging and invariant checks only).
    """
    warmup = _check(config)
    reps = [_run(config, warmup, config.seed + i, trace) for i in range(config.replications)]
    c = config.econ.c

    per_rep = {
        "e_q": np.array([r.e_q for r in reps]),
        "downtime_fraction": np.array([r.downtime_fraction for r in reps]),
        "social_rate": np.array([r.social_rate(c) for r in reps]),
        "p_ser": np.array([r.p_ser for r in reps]),
    }
    per_rep["p_cat"] = 1.0 - per_rep["p_ser"]

    counts = SimCounts()
    tagged: dict = {}
    for r in reps:
        counts += r.counts
        for level, (n, s, s2) in r.tagged.items():
            acc = tagged.setdefault(level, [0, 0.0, 0.0])
            acc[0] += n
            acc[1] += s
            acc[2] += s2
    n_tagged = sum(v[0] for v in tagged.values())
    mean_benefit = sum(v[1] for v in tagged.values()) / n_tagged if n_tagged else math.nan

    level_time = _pad_sum([r.level_time for r in reps])
    level_arrivals = _pad_sum([r.level_arrivals for r in reps])
    return SimReport(
        p_ser_hat=_estimate(per_rep["p_ser"]),
        p_cat_hat=_estimate(per_rep["p_cat"]),
        e_q_hat=_estimate(per_rep["e_q"]),
        social_rate_hat=_estimate(per_rep["social_rate"]),
        downtime_fraction=_estimate(per_rep["downtime_fraction"]),
        mean_net_benefit_per_joiner=mean_benefit,
        counts=counts,
        state_time_fraction=level_time / level_time.sum(),
        arrival_seen_fraction=level_arrivals / max(level_arrivals.sum(), 1.0),
        tagged=tagged,
        replicates=per_rep,
        replications=config.replications,
    )


def individual_benefit(report: SimReport, n_seen: int) -> Estimate:
    """Average realised net benefit of joiners who found ``n_seen`` customers."""
    acc = report.tagged.get(n_seen)
    count = acc[0] if acc else 0
    if count < MIN_TAGGED:
        raise InsufficientSamples(f"only {count} joiners saw {n_seen} customers (need {MIN_TAGGED})")
    n, s, s2 = acc
    mean = s / n
    var = max(s2 / n - mean * mean, 0.0) * n / (n - 1)
    return Estimate(mean, math.sqrt(var / n))


def estimate_individual_benefit(config: SimConfig, n_seen: int) -> Estimate:
    return individual_benefit(simulate(config), n_seen)


def strategy_from_spec(text: str) -> Strategy:
    """Parse ``threshold:N``, ``mixed:Q``, ``balk`` or ``always``."""
    kind, _, arg = text.partition(":")
    kind = kind.strip().lower()
    if kind == "threshold":
        return ThresholdStrategy.finite(int(arg))
    if kind == "mixed":
        return MixedStrategy(float(arg))
    if kind == "balk":
        return ThresholdStrategy.balk()
    if kind == "always":
        return ThresholdStrategy.enter()
    raise ValueError(f"unknown strategy {text!r}")
