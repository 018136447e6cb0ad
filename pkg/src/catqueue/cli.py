"""Command-line front end: ``catqueue {analyze,sweep,simulate,verify}``.

Every flag may also come from a ``key=value`` file given with ``--config``;
flags on the command line win. Exit codes: 0 ok, 1 verification failure,
2 usage or validation error.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from . import crosscheck
from .model import EconParams, ModelParams, ParameterError, validate
from .observable import equilibrium_threshold, optimal_threshold_social
from .scenario import EmptyGrid, analyze, rf_grid, rows_to_csv, sweep
from .simulation import (
    DegenerateWarmup,
    InvalidHorizon,
    SimConfig,
    simulate,
    strategy_from_spec,
)
from .unobservable import equilibrium_mixed, optimal_mixed_social

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

FIELD_FLAGS = {
    "lam": "--lambda", "mu": "--mu", "xi": "--xi", "eta": "--eta",
    "r_s": "--rs", "r_f": "--rf", "c": "--c",
}


class UsageError(Exception):
    pass


def read_config(path: str) -> list[str]:
    """Turn a ``key=value`` file into flag arguments."""
    args = []
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"--config: cannot read {path}: {exc.strerror}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise UsageError(f"--config: {path}:{lineno}: expected key=value")
        args += ["--" + key.strip().lstrip("-").replace("_", "-"), value.strip()]
    return args


def _split_config(argv: list[str]) -> tuple[list[str], str | None]:
    rest, path = [], None
    it = iter(argv)
    for arg in it:
        if arg == "--config":
            path = next(it, None)
            if path is None:
                raise UsageError("--config needs a file name")
        elif arg.startswith("--config="):
            path = arg.split("=", 1)[1]
        else:
            rest.append(arg)
    return rest, path


def _add_model_flags(p: argparse.ArgumentParser, with_rf: bool = True) -> None:
    g = p.add_argument_group("model")
    g.add_argument("--lambda", dest="lam", type=float, required=True, help="arrival rate")
    g.add_argument("--mu", type=float, required=True, help="service rate")
    g.add_argument("--xi", type=float, required=True, help="catastrophe rate")
    g.add_argument("--eta", type=float, required=True, help="repair rate")
    g.add_argument("--rs", dest="r_s", type=float, required=True, help="service reward")
    if with_rf:
        g.add_argument("--rf", dest="r_f", type=float, required=True, help="catastrophe compensation")
    g.add_argument("--c", type=float, required=True, help="waiting cost per time unit")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="catqueue", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="key=value file with default flag values")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="equilibrium and social optimum for one scenario")
    _add_model_flags(p)
    p.add_argument("--n-cap", type=int, default=None, help="threshold search bound")

    p = sub.add_parser("sweep", help="CSV of all quantities over a compensation grid")
    _add_model_flags(p, with_rf=False)
    p.add_argument("--rf-min", type=float, required=True)
    p.add_argument("--rf-max", type=float, required=True)
    p.add_argument("--rf-step", type=float, required=True)
    p.add_argument("--n-cap", type=int, default=None)
    p.add_argument("--output", "-o", help="write CSV here instead of standard output")

    p = sub.add_parser("simulate", help="discrete-event simulation under a strategy")
    _add_model_flags(p)
    p.add_argument("--strategy", required=True,
                   help="threshold:N | mixed:Q | balk | always | equilibrium | social")
    p.add_argument("--information", choices=("unobservable", "observable"), default="unobservable",
                   help="which case 'equilibrium'/'social' resolve against")
    p.add_argument("--horizon", type=float, default=1e4)
    p.add_argument("--warmup", type=float, default=None, help="default 100/eta")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--csv", help="write per-replication estimates here")

    p = sub.add_parser("verify", help="cross-check closed forms against the oracles")
    p.add_argument("--grid-size", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--perturb", type=float, default=0.0,
                   help="scale the closed-form welfare by 1+PERTURB (harness self-test)")
    return parser


def _model(args) -> tuple[ModelParams, EconParams]:
    params = ModelParams(args.lam, args.mu, args.xi, args.eta)
    econ = EconParams(args.r_s, getattr(args, "r_f", 0.0), args.c)
    validate(params, econ)
    return params, econ


def _fmt(x) -> str:
    return x if isinstance(x, str) else f"{x:.9g}"


def cmd_analyze(args, out) -> int:
    params, econ = _model(args)
    a = analyze(params, econ, args.n_cap)
    n_soc = str(a.n_soc) + ("*" if a.n_soc_cap_hit else "")
    lines = [
        f"observable regime = {a.observable_regime.value}",
        f"unobservable regime = {a.unobservable_regime.value}",
        f"n_e = {a.n_e}",
        f"q_e = {_fmt(a.q_e)}",
        f"n_soc = {n_soc}",
        f"q_soc = {_fmt(a.q_soc)}",
        f"S_obs_soc(n_e) = {_fmt(a.s_obs_soc_at_ne)}",
        f"S_obs_soc(n_soc) = {_fmt(a.s_obs_soc_at_nsoc)}",
        f"S_un_soc(q_e) = {_fmt(a.s_un_soc_at_qe)}",
        f"S_un_soc(q_soc) = {_fmt(a.s_un_soc_at_qsoc)}",
    ]
    out.write("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_sweep(args, out) -> int:
    params = ModelParams(args.lam, args.mu, args.xi, args.eta)
    validate(params, EconParams(args.r_s, max(args.rf_min, 0.0), args.c))
    if args.rf_min < 0:
        raise ParameterError("r_f", args.rf_min, "compensation must be >= 0")
    grid = rf_grid(args.rf_min, args.rf_max, args.rf_step)
    text = rows_to_csv(sweep(params, args.r_s, args.c, grid, args.n_cap))
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8", newline="\n")
    else:
        out.write(text)
    return EXIT_OK


def _resolve_strategy(args, params, econ):
    spec = args.strategy.strip().lower()
    observable = args.information == "observable"
    if spec == "equilibrium":
        return equilibrium_threshold(params, econ) if observable else equilibrium_mixed(params, econ)
    if spec == "social":
        if observable:
            return optimal_threshold_social(params, econ).strategy
        return optimal_mixed_social(params, econ).strategy
    try:
        return strategy_from_spec(spec)
    except ValueError as exc:
        raise UsageError(f"--strategy: {exc}") from exc


def cmd_simulate(args, out) -> int:
    params, econ = _model(args)
    strategy = _resolve_strategy(args, params, econ)
    config = SimConfig(params, econ, strategy, args.horizon, args.warmup, args.seed, args.reps)
    report = simulate(config)
    c = report.counts
    lines = [
        f"strategy = {strategy}",
        f"replications = {report.replications}",
        f"rng = {report.rng_algorithm} seed={args.seed}",
    ]
    for name in ("p_ser_hat", "p_cat_hat", "e_q_hat", "social_rate_hat", "downtime_fraction"):
        est = getattr(report, name)
        lines.append(f"{name} = {_fmt(est.mean)} +/- {_fmt(est.se)}")
    lines.append(f"mean_net_benefit_per_joiner = {_fmt(report.mean_net_benefit_per_joiner)}")
    lines.append(
        f"counts: arrivals={c.arrivals} joins={c.joins} balks={c.balks} blocked={c.blocked} "
        f"services={c.services} flushed={c.flushed} catastrophes={c.catastrophes} censored={c.censored}"
    )
    out.write("\n".join(lines) + "\n")
    if args.csv:
        keys = ["e_q", "downtime_fraction", "social_rate", "p_ser", "p_cat"]
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["replication", *keys])
            for i in range(report.replications):
                writer.writerow([i, *(_fmt(float(report.replicates[k][i])) for k in keys)])
    return EXIT_OK


def cmd_verify(args, out) -> int:
    report = crosscheck.run_all(args.grid_size, args.seed, args.perturb)
    out.write(report.table() + "\n")
    out.write(("all checks passed" if report.passed else "verification FAILED") + "\n")
    return EXIT_OK if report.passed else EXIT_FAIL


COMMANDS = {"analyze": cmd_analyze, "sweep": cmd_sweep, "simulate": cmd_simulate, "verify": cmd_verify}


def main(argv: list[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        rest, config = _split_config(argv)
        if config:
            cfg_args = read_config(config)
            cmd_at = next((i for i, a in enumerate(rest) if a in COMMANDS), None)
            if cmd_at is None:
                raise UsageError("no command given")
            rest = rest[: cmd_at + 1] + cfg_args + rest[cmd_at + 1:]
    except UsageError as exc:
        err.write(f"catqueue: error: {exc}\n")
        return EXIT_USAGE
    try:
        args = parser.parse_args(rest)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return COMMANDS[args.command](args, out)
    except ParameterError as exc:
        flag = FIELD_FLAGS.get(exc.field, exc.field)
        err.write(f"catqueue: error: {flag}: {exc}\n")
    except (EmptyGrid, InvalidHorizon, DegenerateWarmup, UsageError) as exc:
        err.write(f"catqueue: error: {exc}\n")
    except ValueError as exc:
        err.write(f"catqueue: error: {exc}\n")
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
