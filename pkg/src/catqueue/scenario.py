"""One-stop evaluation of a parameter set and compensation sweeps."""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import astuple, dataclass, fields

import numpy as np

from .model import (
    EconParams,
    ModelParams,
    ObservableRegime,
    UnobservableRegime,
    classify_observable,
    classify_unobservable,
    validate,
)
from .observable import CapTooSmall, equilibrium_threshold, optimal_threshold_social, social_benefit_observable
from .unobservable import equilibrium_mixed, optimal_mixed_social, social_benefit_unobservable


class EmptyGrid(ValueError):
    pass


@dataclass(frozen=True)
class ScenarioRow:
    lam: float
    mu: float
    xi: float
    eta: float
    r_s: float
    r_f: float
    c: float
    n_e: str
    q_e: float
    n_soc: str
    q_soc: float
    s_obs_soc_at_ne: float
    s_obs_soc_at_nsoc: float
    s_un_soc_at_qe: float
    s_un_soc_at_qsoc: float

    @classmethod
    def columns(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def formatted(self) -> list[str]:
        return [v if isinstance(v, str) else f"{v:.9g}" for v in astuple(self)]


@dataclass(frozen=True)
class Analysis:
    """Everything the analyze command reports, as library values."""

    params: ModelParams
    econ: EconParams
    observable_regime: ObservableRegime
    unobservable_regime: UnobservableRegime
    n_e: object
    q_e: float
    n_soc: object
    n_soc_cap_hit: bool
    q_soc: float
    s_obs_soc_at_ne: float
    s_obs_soc_at_nsoc: float
    s_un_soc_at_qe: float
    s_un_soc_at_qsoc: float

    def row(self) -> ScenarioRow:
        p, e = self.params, self.econ
        n_soc = str(self.n_soc) + ("*" if self.n_soc_cap_hit else "")
        return ScenarioRow(
            p.lam, p.mu, p.xi, p.eta, e.r_s, e.r_f, e.c,
            str(self.n_e), self.q_e, n_soc, self.q_soc,
            self.s_obs_soc_at_ne, self.s_obs_soc_at_nsoc,
            self.s_un_soc_at_qe, self.s_un_soc_at_qsoc,
        )


def analyze(params: ModelParams, econ: EconParams, n_cap: int | None = None) -> Analysis:
    validate(params, econ)
    n_e = equilibrium_threshold(params, econ)
    q_e = equilibrium_mixed(params, econ).q
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", CapTooSmall)
        social_obs = optimal_threshold_social(params, econ, n_cap)
    social_un = optimal_mixed_social(params, econ)
    return Analysis(
        params=params,
        econ=econ,
        observable_regime=classify_observable(params, econ),
        unobservable_regime=classify_unobservable(params, econ),
        n_e=n_e,
        q_e=q_e,
        n_soc=social_obs.strategy,
        n_soc_cap_hit=social_obs.cap_hit,
        q_soc=social_un.strategy.q,
        s_obs_soc_at_ne=social_benefit_observable(params, econ, n_e),
        s_obs_soc_at_nsoc=social_obs.value,
        s_un_soc_at_qe=social_benefit_unobservable(params, econ, q_e),
        s_un_soc_at_qsoc=social_un.value,
    )


def rf_grid(rf_min: float, rf_max: float, rf_step: float) -> np.ndarray:
    """Inclusive grid ``rf_min + i * rf_step``; end point kept when it lands within 1e-9 steps."""
    if rf_step <= 0:
        raise EmptyGrid(f"rf_step must be positive, got {rf_step!r}")
    if rf_min > rf_max:
        raise EmptyGrid(f"rf_min={rf_min!r} exceeds rf_max={rf_max!r}")
    count = int(np.floor((rf_max - rf_min) / rf_step + 1e-9)) + 1
    return rf_min + rf_step * np.arange(count)


def sweep(params: ModelParams, r_s: float, c: float, rf_values, n_cap: int | None = None) -> list[ScenarioRow]:
    return [analyze(params, EconParams(r_s, float(rf), c), n_cap).row() for rf in rf_values]


def rows_to_csv(rows: list[ScenarioRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(ScenarioRow.columns())
    for row in rows:
        writer.writerow(row.formatted())
    return buf.getvalue()
