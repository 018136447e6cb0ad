import math

import numpy as np
import pytest

from catqueue import EconParams, MixedStrategy, ModelParams, SimConfig, ThresholdStrategy, simulate
from catqueue.observable import sojourn_stats, stationary_observable
from catqueue.simulation import (
    DegenerateWarmup,
    InsufficientSamples,
    InvalidHorizon,
    estimate_individual_benefit,
    individual_benefit,
    strategy_from_spec,
)
from catqueue.unobservable import performance_unobservable, stationary_unobservable

from conftest import SCEN_A, SCEN_B

ECON = EconParams(7, 0, 3)


def config(strategy, **kw):
    base = dict(params=SCEN_B, econ=ECON, strategy=strategy, horizon=2000.0, seed=3, replications=2)
    base.update(kw)
    return SimConfig(**base)


def test_seeded_runs_repeat_exactly():
    a = simulate(config(MixedStrategy(0.5)))
    b = simulate(config(MixedStrategy(0.5)))
    assert a.e_q_hat == b.e_q_hat and a.counts == b.counts
    c = simulate(config(MixedStrategy(0.5), seed=4))
    assert c.counts != a.counts


def test_counts_are_consistent():
    r = simulate(config(ThresholdStrategy.finite(3), replications=3))
    c = r.counts
    assert c.joins + c.balks + c.blocked == c.arrivals
    assert c.balks > 0 and c.blocked > 0
    assert r.p_ser_hat.mean + r.p_cat_hat.mean == pytest.approx(1.0)
    assert r.replications == 3 and r.rng_algorithm == "numpy.random.PCG64"


def test_catastrophe_empties_the_system():
    seen = []

    def trace(t, event, in_system, down):
        seen.append((event, in_system, down))

    simulate(config(ThresholdStrategy.enter(), replications=1, horizon=500.0), trace=trace)
    cats = [s for s in seen if s[0] == "catastrophe"]
    assert cats and all(n == 0 and down for _, n, down in cats)
    # nothing joins while the server is down: the event after a catastrophe is a repair
    for prev, nxt in zip(seen, seen[1:]):
        if prev[0] == "catastrophe":
            assert nxt[0] == "repair" and nxt[1] == 0


def test_threshold_caps_queue():
    peak = []
    simulate(config(ThresholdStrategy.finite(2), replications=1),
             trace=lambda t, e, n, d: peak.append(n))
    assert max(peak) == 3


def test_balk_strategy_never_joins():
    r = simulate(config(ThresholdStrategy.balk()))
    assert r.counts.joins == 0 and r.e_q_hat.mean == 0.0
    assert r.downtime_fraction.covers(SCEN_B.xi / (SCEN_B.xi + SCEN_B.eta))


def test_time_fractions_match_stationary_law():
    r = simulate(config(ThresholdStrategy.finite(4), horizon=20_000.0, replications=4))
    st = stationary_observable(SCEN_B, 4)
    expected = np.r_[st.p00, st.p_k1]
    np.testing.assert_allclose(r.state_time_fraction, expected, atol=0.01)
    # arrivals see time averages
    np.testing.assert_allclose(r.arrival_seen_fraction, r.state_time_fraction, atol=0.01)


def test_mixed_estimates_cover_closed_forms():
    q = 0.4
    r = simulate(config(MixedStrategy(q), horizon=10_000.0, replications=10))
    perf = performance_unobservable(SCEN_B, ECON, q)
    assert r.e_q_hat.covers(perf.e_q, k=4)
    assert r.social_rate_hat.covers(perf.social_rate, k=4)
    joined = perf.p_ser + perf.p_cat
    assert r.p_ser_hat.covers(perf.p_ser / joined, k=4)
    assert r.e_q_hat.mean == pytest.approx(stationary_unobservable(SCEN_B, q).mean_queue_length, rel=0.1)


def test_individual_benefit_matches_sojourn_formula():
    cfg = SimConfig(SCEN_A, ECON, ThresholdStrategy.finite(5), 20_000.0, seed=1, replications=2)
    est = estimate_individual_benefit(cfg, 0)
    s = sojourn_stats(SCEN_A, 0)
    expected = 7 * s.p_serve - 3 * s.e_sojourn
    assert est.covers(expected)
    assert est.se < 0.2


def test_individual_benefit_needs_samples():
    r = simulate(config(ThresholdStrategy.finite(1), horizon=300.0, replications=1))
    with pytest.raises(InsufficientSamples):
        individual_benefit(r, 40)


@pytest.mark.parametrize("horizon", [0.0, -1.0, math.inf, math.nan])
def test_bad_horizon(horizon):
    with pytest.raises(InvalidHorizon):
        simulate(config(MixedStrategy(0.5), horizon=horizon))


def test_warmup_must_fit_in_horizon():
    with pytest.raises(DegenerateWarmup):
        simulate(config(MixedStrategy(0.5), horizon=50.0))  # default warmup 100/eta = 100
    with pytest.raises(DegenerateWarmup):
        simulate(config(MixedStrategy(0.5), warmup=-1.0))


def test_censoring_is_counted():
    cfg = SimConfig(ModelParams(7, 2, 0.01, 1), ECON, ThresholdStrategy.enter(), 300.0, warmup=0.0, seed=0)
    r = simulate(cfg)
    c = r.counts
    # with no warmup every joiner is either served, flushed, or still present at the end
    assert c.joins == c.services + c.flushed + c.censored


def test_strategy_parsing():
    assert strategy_from_spec("threshold:4") == ThresholdStrategy.finite(4)
    assert strategy_from_spec("mixed:0.25") == MixedStrategy(0.25)
    assert strategy_from_spec("balk") == ThresholdStrategy.balk()
    assert strategy_from_spec("always") == ThresholdStrategy.enter()
    with pytest.raises(ValueError):
        strategy_from_spec("sometimes")
