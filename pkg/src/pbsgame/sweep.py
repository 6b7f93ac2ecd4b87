"""Conflict-probability sweep: independent replicas, merged deterministically.

Each (p_c, repetition) cell runs a full co-evolution simulation with its own
RNG. Replica seeds are split from the master seed by a fixed rule,
SeedSequence([master, p_index, repetition]), so results do not depend on how
many workers execute the replicas or in which order they finish.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError
from .simulation import SimConfig, Simulation, summarize

SWEEP_METRICS = (
    "bid_ratio",
    "rebate_ratio",
    "searcher_reward",
    "builder_reward",
    "proposer_reward",
    "cov_alpha",
    "cov_gamma1",
    "cov_gamma2",
    "max_residual",
)


@dataclass(frozen=True)
class SweepRow:
    p_c: float
    repetition: int
    metric: str
    value: float


def replica_rng(master_seed: int, *indices: int) -> np.random.Generator:
    """Deterministic per-replica generator, independent of execution order."""
    return np.random.default_rng(np.random.SeedSequence([master_seed, *indices]))


def _run_cell(args: tuple[SimConfig, int, int, int]) -> tuple[int, int, dict[str, float]]:
    base, p_index, repetition, master_seed = args
    sim = Simulation(base, rng=replica_rng(master_seed, p_index, repetition))
    sim.run()
    return p_index, repetition, summarize(sim)


def sweep_conflict(
    base: SimConfig,
    p_values: list[float],
    repetitions: int,
    jobs: int = 1,
) -> list[SweepRow]:
    """Run the grid and return a long-format table sorted by (p_c, rep, metric)."""
    if repetitions < 1:
        raise ConfigError(f"repetitions must be >= 1, got {repetitions}")
    for p in p_values:
        if not 0 <= p <= 1:
            raise ConfigError(f"conflict probability must be in [0, 1], got {p}")

    tasks = [
        (replace(base, p_c=p), ip, rep, base.seed)
        for ip, p in enumerate(p_values)
        for rep in range(repetitions)
    ]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_cell, tasks, chunksize=1))
    else:
        results = [_run_cell(t) for t in tasks]

    rows = []
    for p_index, repetition, summary in sorted(results, key=lambda r: (r[0], r[1])):
        for metric in SWEEP_METRICS:
            rows.append(SweepRow(p_values[p_index], repetition, metric, summary[metric]))
    return rows
