"""Command-line entry point: simulate, sweep, egta, verify-analytic.

All defaults reproduce the reference hyperparameters (value rate 10,
temperature 2, learning rate 0.5, pool of 20, GA trigger 0.01, elimination
0.5, mutation 0.01). Configuration comes from an optional JSON file plus
flag overrides, flags winning. Every run writes a manifest with sha256
checksums of the emitted files; re-running with the same seed reproduces
identical checksums regardless of --jobs.

Exit codes: 0 success, 2 configuration error, 3 IO error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .analytic import verification_report
from .egta import HeuristicPayoffTable, HptRow, estimate_hpt, intensity_sweep
from .errors import ConfigError, NumericalError
from .evolution import GAConfig
from .manifest import write_manifest
from .simulation import SimConfig, Simulation, moving_average
from .sweep import sweep_conflict

_SIM_DEFAULTS = {
    "builders": 10,
    "searchers": 10,
    "rounds": 10000,
    "pc": 0.8,
    "value_rate": 10.0,
    "temperature": 2.0,
    "learning_rate": 0.5,
    "trigger": 0.01,
    "elimination": 0.5,
    "mutation": 0.01,
    "capacity": None,
    "seed": 0,
    "ma_window": 200,
    "snapshot_every": 1000,
}


def parse_grid(spec: str) -> list[float]:
    """Parse a value grid: a number, a comma list, start:stop:step, or start:stop:logN."""
    spec = spec.strip()
    try:
        if ":" in spec:
            parts = spec.split(":")
            if len(parts) != 3:
                raise ValueError("grid must be start:stop:step or start:stop:logN")
            start, stop = float(parts[0]), float(parts[1])
            if parts[2].startswith("log"):
                count = int(parts[2][3:])
                if count < 1 or start <= 0 or stop <= 0:
                    raise ValueError("log grid needs positive bounds and count >= 1")
                return [float(v) for v in np.geomspace(start, stop, count)]
            step = float(parts[2])
            if step <= 0:
                raise ValueError("grid step must be positive")
            count = int(round((stop - start) / step)) + 1
            values = [round(start + k * step, 10) for k in range(count)]
            return [v for v in values if v <= stop + 1e-9]
        if "," in spec:
            return [float(v) for v in spec.split(",") if v.strip()]
        return [float(spec)]
    except ValueError as exc:
        raise ConfigError(f"bad grid spec {spec!r}: {exc}") from exc


def _load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        payload = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path}: line {exc.lineno}: {exc.msg}") from exc
    unknown = set(payload) - set(_SIM_DEFAULTS)
    if unknown:
        raise ConfigError(f"config file {path}: unknown keys {sorted(unknown)}")
    return payload


def _merged_settings(args: argparse.Namespace) -> dict:
    settings = dict(_SIM_DEFAULTS)
    settings.update(_load_config_file(getattr(args, "config", None)))
    for key in _SIM_DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    return settings


def _sim_config(settings: dict, **overrides) -> SimConfig:
    merged = dict(settings)
    merged.update(overrides)
    return SimConfig(
        n_builders=int(merged["builders"]),
        n_searchers=int(merged["searchers"]),
        rounds=int(merged["rounds"]),
        p_c=float(merged["pc"]),
        value_rate=float(merged["value_rate"]),
        temperature=float(merged["temperature"]),
        learning_rate=float(merged["learning_rate"]),
        ga=GAConfig(
            trigger=float(merged["trigger"]),
            elimination=float(merged["elimination"]),
            mutation=float(merged["mutation"]),
        ),
        capacity=None if merged["capacity"] in (None, "none") else int(merged["capacity"]),
        seed=int(merged["seed"]),
        ma_window=int(merged["ma_window"]),
        record_rounds=bool(merged.get("record_rounds", False)),
        snapshot_every=int(merged["snapshot_every"]),
    )


def _output_dir(args: argparse.Namespace) -> Path:
    default = os.environ.get("PBSGAME_OUTPUT", "out")
    path = Path(args.output if args.output is not None else default)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _fmt(value) -> str:
    if value is None:
        return ""
    return repr(float(value))


def cmd_simulate(args: argparse.Namespace) -> int:
    started = time.monotonic()
    settings = _merged_settings(args)
    config = _sim_config(settings, record_rounds=bool(args.record_rounds))
    out = _output_dir(args)

    sim = Simulation(config)
    sim.run()

    metrics = sim.metrics
    bid_ma = moving_average(metrics.avg_bid_ratio, config.ma_window)
    rebate_ma = moving_average(metrics.avg_rebate_ratio, config.ma_window)
    metrics_path = out / "metrics.csv"
    _write_csv(
        metrics_path,
        ["round", *metrics.FIELDS, "bid_ratio_ma", "rebate_ratio_ma"],
        (
            [t, *(_fmt(v) for v in metrics.row(t)), _fmt(bid_ma[t]), _fmt(rebate_ma[t])]
            for t in range(len(metrics))
        ),
    )
    files = [metrics_path]

    if config.record_rounds:
        rounds_path = out / "rounds.csv"
        _write_csv(
            rounds_path,
            ["round", "agent", "role", "alpha", "gamma1", "gamma2", "payoff"],
            _round_rows(sim),
        )
        files.append(rounds_path)

    pools_path = out / "pools.json"
    pools_path.write_text(json.dumps(sim.snapshots if sim.snapshots else [sim.snapshot()]))
    files.append(pools_path)

    write_manifest(
        out, "simulate", settings, config.seed, files, time.monotonic() - started, __version__
    )
    print(f"simulate: {config.rounds} rounds -> {out}")
    return 0


def _round_rows(sim: Simulation):
    for record in sim.records:
        for agent in range(sim.config.n_agents):
            role = sim.config.role_of(agent)
            alpha = record.alphas.get(agent)
            gamma = record.gammas.get(agent)
            yield [
                record.index,
                agent,
                role,
                _fmt(alpha),
                _fmt(gamma.gamma1 if gamma else None),
                _fmt(gamma.gamma2 if gamma else None),
                _fmt(record.payoffs[agent]),
            ]
        yield [record.index, -1, "proposer", "", "", "", _fmt(record.payment)]


def cmd_sweep(args: argparse.Namespace) -> int:
    started = time.monotonic()
    settings = _merged_settings(args)
    if args.reps < 1:
        raise ConfigError(f"--reps must be >= 1, got {args.reps}")
    p_values = parse_grid(args.pc if args.pc is not None else "0:1:0.1")
    base = _sim_config(settings, pc=p_values[0])
    out = _output_dir(args)

    rows = sweep_conflict(base, p_values, args.reps, jobs=args.jobs)
    sweep_path = out / "sweep.csv"
    _write_csv(
        sweep_path,
        ["p_c", "repetition", "metric", "value"],
        ([_fmt(r.p_c), r.repetition, r.metric, _fmt(r.value)] for r in rows),
    )
    write_manifest(
        out,
        "sweep",
        {**settings, "pc_grid": p_values, "reps": args.reps},
        base.seed,
        [sweep_path],
        time.monotonic() - started,
        __version__,
    )
    print(f"sweep: {len(p_values)} p values x {args.reps} reps -> {out}")
    return 0


def _load_hpt_file(path: str) -> HeuristicPayoffTable:
    rows = []
    try:
        with open(path, newline="") as handle:
            for raw in csv.DictReader(handle):
                rows.append(
                    HptRow(
                        n_building=int(raw["n_building"]),
                        n_sharing=int(raw["n_sharing"]),
                        u_building=float(raw["u_building"]) if raw["u_building"] else None,
                        u_sharing=float(raw["u_sharing"]) if raw["u_sharing"] else None,
                        samples=int(raw.get("samples") or 0),
                    )
                )
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad payoff table file {path}: {exc}") from exc
    if not rows:
        raise ConfigError(f"payoff table file {path} is empty")
    return HeuristicPayoffTable(m=rows[0].n_building + rows[0].n_sharing, rows=tuple(rows))


def cmd_egta(args: argparse.Namespace) -> int:
    started = time.monotonic()
    settings = _merged_settings(args)
    if args.agents < 2:
        raise ConfigError(f"the meta-game needs at least 2 agents, got {args.agents}")
    alpha_values = parse_grid(args.alpha)
    out = _output_dir(args)
    files = []

    hpt_rows_csv = []
    rank_rows = []
    if args.hpt_file:
        hpt = _load_hpt_file(args.hpt_file)
        for result in intensity_sweep(hpt, alpha_values):
            rank_rows.append(["", _fmt(result.alpha), _fmt(result.nu_building), _fmt(result.nu_sharing)])
    else:
        p_values = parse_grid(args.pc if args.pc is not None else "0:1:0.1")
        template = _sim_config(
            settings, rounds=args.rounds if args.rounds is not None else settings["rounds"]
        )
        for p in p_values:
            hpt = estimate_hpt(
                args.agents,
                _sim_config(settings, pc=p, rounds=template.rounds),
                reps=args.reps,
                jobs=args.jobs,
            )
            for row in hpt.rows:
                hpt_rows_csv.append(
                    [
                        _fmt(p),
                        row.n_building,
                        row.n_sharing,
                        _fmt(row.u_building),
                        _fmt(row.u_sharing),
                        row.samples,
                        _fmt(row.max_residual),
                    ]
                )
            for result in intensity_sweep(hpt, alpha_values):
                rank_rows.append(
                    [_fmt(p), _fmt(result.alpha), _fmt(result.nu_building), _fmt(result.nu_sharing)]
                )
        hpt_path = out / "hpt.csv"
        _write_csv(
            hpt_path,
            ["p_c", "n_building", "n_sharing", "u_building", "u_sharing", "samples", "max_residual"],
            hpt_rows_csv,
        )
        files.append(hpt_path)

    rank_path = out / "alpharank.csv"
    _write_csv(rank_path, ["p_c", "alpha", "nu_building", "nu_sharing"], rank_rows)
    files.append(rank_path)

    write_manifest(
        out,
        "egta",
        {**settings, "agents": args.agents, "alpha_grid": alpha_values, "reps": args.reps},
        int(settings["seed"]),
        files,
        time.monotonic() - started,
        __version__,
    )
    print(f"egta: {len(rank_rows)} alpha-rank rows -> {out}")
    return 0


def cmd_verify_analytic(args: argparse.Namespace) -> int:
    started = time.monotonic()
    out = _output_dir(args)
    report = verification_report(
        sign_points=args.sign_points,
        mc_points=args.mc_points,
        mc_samples=int(float(args.mc_samples)),
        fd_points=args.fd_points,
        seed=args.seed if args.seed is not None else 0,
    )
    report_path = out / "verify.json"
    report_path.write_text(json.dumps(report, indent=2) + "\n")
    write_manifest(
        out,
        "verify-analytic",
        {
            "sign_points": args.sign_points,
            "mc_points": args.mc_points,
            "mc_samples": int(float(args.mc_samples)),
            "fd_points": args.fd_points,
        },
        args.seed if args.seed is not None else 0,
        [report_path],
        time.monotonic() - started,
        __version__,
    )
    print(f"verify-analytic: passed={report['passed']} -> {out}")
    if not report["passed"]:
        raise NumericalError("analytic verification failed; see verify.json")
    return 0


def _add_sim_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file; flags override its values")
    parser.add_argument("--builders", type=int)
    parser.add_argument("--searchers", type=int)
    parser.add_argument("--rounds", type=int)
    parser.add_argument("--value-rate", dest="value_rate", type=float)
    parser.add_argument("--temperature", type=float)
    parser.add_argument("--learning-rate", dest="learning_rate", type=float)
    parser.add_argument("--trigger", type=float)
    parser.add_argument("--elimination", type=float)
    parser.add_argument("--mutation", type=float)
    parser.add_argument("--capacity", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--ma-window", dest="ma_window", type=int)


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--output", "-o", help="output directory (default $PBSGAME_OUTPUT or ./out)")
    parser.add_argument("--jobs", type=int, default=1, help="parallel worker processes")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pbsgame",
        description="Role-selection game simulator for PBS block production",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run one co-evolution simulation")
    _add_sim_flags(p_sim)
    _add_common_flags(p_sim)
    p_sim.add_argument("--pc", type=float, help="bundle conflict probability")
    p_sim.add_argument("--snapshot-every", dest="snapshot_every", type=int)
    p_sim.add_argument(
        "--record-rounds", dest="record_rounds", action="store_true", help="emit rounds.csv"
    )
    p_sim.set_defaults(func=cmd_simulate)

    p_sweep = sub.add_parser("sweep", help="sweep the conflict probability")
    _add_sim_flags(p_sweep)
    _add_common_flags(p_sweep)
    p_sweep.add_argument("--pc", help="p_c grid (value, list, or start:stop:step)")
    p_sweep.add_argument("--reps", type=int, default=10)
    p_sweep.set_defaults(func=cmd_sweep)

    p_egta = sub.add_parser("egta", help="meta-game payoff table and alpha-rank")
    _add_sim_flags(p_egta)
    _add_common_flags(p_egta)
    p_egta.add_argument("--agents", type=int, default=10, help="meta-game population size")
    p_egta.add_argument("--pc", help="p_c grid")
    p_egta.add_argument("--alpha", default="0.1:100:log30", help="ranking intensity grid")
    p_egta.add_argument("--reps", type=int, default=10, help="simulations per profile")
    p_egta.add_argument("--hpt-file", help="skip simulation; rank an existing payoff table CSV")
    p_egta.set_defaults(func=cmd_egta)

    p_verify = sub.add_parser("verify-analytic", help="check the closed-form market on a grid")
    _add_common_flags(p_verify)
    p_verify.add_argument("--seed", type=int)
    p_verify.add_argument("--sign-points", type=int, default=1000)
    p_verify.add_argument("--mc-points", type=int, default=50)
    p_verify.add_argument("--mc-samples", default="1e6")
    p_verify.add_argument("--fd-points", type=int, default=100)
    p_verify.set_defaults(func=cmd_verify_analytic)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
