"""Meta-game over the two roles: payoff table estimation and alpha-rank.

Role choice is treated as a two-strategy meta-game (block building vs bundle
sharing). A heuristic payoff table records, for each split of m agents across
the roles, the mean post-convergence payoff per role from repeated
simulations. Alpha-rank then builds the single-population monomorphic Markov
chain from the one-mutant profiles: the chance that one deviant takes over the
population follows the finite-population fixation formula, and the chain's
stationary distribution scores the two roles.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, NumericalError
from .simulation import SimConfig, Simulation, summarize
from .sweep import replica_rng

STRATEGY_NAMES = ("building", "sharing")


@dataclass(frozen=True)
class HptRow:
    n_building: int
    n_sharing: int
    u_building: float | None  # None when no agent plays the role
    u_sharing: float | None
    samples: int
    max_residual: float = 0.0


@dataclass(frozen=True)
class HeuristicPayoffTable:
    m: int
    rows: tuple[HptRow, ...]

    def __post_init__(self):
        for row in self.rows:
            if row.n_building + row.n_sharing != self.m:
                raise ConfigError(
                    f"profile ({row.n_building}, {row.n_sharing}) does not sum to {self.m}"
                )

    def row(self, n_building: int) -> HptRow:
        for r in self.rows:
            if r.n_building == n_building:
                return r
        raise ConfigError(f"payoff table has no profile with {n_building} builders")


def _run_profile(args: tuple[SimConfig, int, int, int]) -> tuple[int, int, dict[str, float]]:
    config, n_building, rep, master_seed = args
    sim = Simulation(config, rng=replica_rng(master_seed, n_building, rep))
    sim.run()
    return n_building, rep, summarize(sim)


def estimate_hpt(
    m: int,
    template: SimConfig,
    reps: int = 10,
    jobs: int = 1,
    profiles: list[int] | None = None,
) -> HeuristicPayoffTable:
    """Estimate mean role payoffs for each split of m agents across the roles.

    ``profiles`` restricts estimation to the given builder counts (all m+1
    splits by default). Payoffs are post-convergence averages; a role with
    zero adopters in a profile gets no payoff entry.
    """
    if m < 2:
        raise ConfigError(f"meta-game needs at least 2 agents, got {m}")
    if reps < 1:
        raise ConfigError(f"reps must be >= 1, got {reps}")
    counts = list(range(m + 1)) if profiles is None else sorted(set(profiles))
    for n1 in counts:
        if not 0 <= n1 <= m:
            raise ConfigError(f"profile {n1} outside 0..{m}")

    tasks = [
        (replace(template, n_builders=n1, n_searchers=m - n1), n1, rep, template.seed)
        for n1 in counts
        for rep in range(reps)
    ]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_profile, tasks, chunksize=1))
    else:
        results = [_run_profile(t) for t in tasks]

    by_profile: dict[int, list[dict[str, float]]] = {n1: [] for n1 in counts}
    for n1, _, summary in results:
        by_profile[n1].append(summary)

    rows = []
    for n1 in counts:
        summaries = by_profile[n1]
        builder_means = [s["builder_reward"] for s in summaries]
        searcher_means = [s["searcher_reward"] for s in summaries]
        rows.append(
            HptRow(
                n_building=n1,
                n_sharing=m - n1,
                u_building=None if n1 == 0 else float(np.mean(builder_means)),
                u_sharing=None if n1 == m else float(np.mean(searcher_means)),
                samples=len(summaries),
                max_residual=max(s["max_residual"] for s in summaries),
            )
        )
    return HeuristicPayoffTable(m=m, rows=tuple(rows))


def fixation_probability(delta: float, alpha: float, m: int) -> float:
    """Fixation probability of one mutant under a constant payoff advantage.

    (1 - e^(-alpha*delta)) / (1 - e^(-m*alpha*delta)), with the neutral-drift
    limit 1/m at delta == 0. Stable for large |alpha*delta|. Special case of
    path_fixation_probability for a gap that does not depend on how many
    mutants are already present.
    """
    x = alpha * delta
    if x == 0.0:
        return 1.0 / m
    if x > 0:
        return float(np.expm1(-x) / np.expm1(-m * x))
    y = -x
    # rho = (e^y - 1) / (e^(m y) - 1), rewritten to avoid overflow
    return float(math.exp(-(m - 1) * y) * (-np.expm1(-y)) / (-np.expm1(-m * y)))


def path_fixation_probability(gaps, alpha: float) -> float:
    """Fixation probability along the full invasion path of a birth-death chain.

    ``gaps[k-1]`` is the mutant-minus-resident payoff gap when k mutants are
    present (k = 1..m-1). Backward/forward rates follow the logistic-selection
    ratio e^(-alpha * gap), giving

        rho = 1 / (1 + sum_j prod_{k<=j} e^(-alpha * gaps[k]))

    which collapses to the constant-gap formula when all gaps are equal. Log
    accumulation keeps large alpha*gap products from overflowing.
    """
    total = 1.0
    log_prod = 0.0
    for gap in gaps:
        log_prod += -alpha * gap
        total += math.exp(min(log_prod, 700.0))
    return 1.0 / total


@dataclass(frozen=True)
class AlphaRankResult:
    transition: np.ndarray  # 2x2 row-stochastic, order (building, sharing)
    stationary: np.ndarray
    alpha: float

    @property
    def nu_building(self) -> float:
        return float(self.stationary[0])

    @property
    def nu_sharing(self) -> float:
        return float(self.stationary[1])


def stationary_distribution(
    transition: np.ndarray, tol: float = 1e-12, max_iter: int = 10**6
) -> np.ndarray:
    """Left fixed point of a row-stochastic matrix, eigen-solve then power fallback."""
    transition = np.asarray(transition, dtype=float)
    eigvals, eigvecs = np.linalg.eig(transition.T)
    mask = np.abs(eigvals - 1.0) < 1e-9
    if mask.sum() == 1:
        vec = np.real(eigvecs[:, mask]).ravel()
        vec = np.abs(vec)
        if vec.sum() > 0:
            return vec / vec.sum()
    nu = np.full(transition.shape[0], 1.0 / transition.shape[0])
    for _ in range(max_iter):
        nxt = nu @ transition
        if np.abs(nxt - nu).max() < tol:
            return nxt / nxt.sum()
        nu = nxt
    raise NumericalError("stationary distribution did not converge")


def alpharank(
    hpt: HeuristicPayoffTable, alpha: float, m: int | None = None
) -> AlphaRankResult:
    """Two-strategy alpha-rank over the monomorphic chain.

    A mutant's takeover probability is evaluated along the whole invasion
    path, reading the mutant-vs-resident payoff gap from every mixed profile
    row it passes through; with one builder the builder column is the mutant
    payoff, and symmetrically for sharing. Intermediate competition therefore
    matters: a profitable first deviant can still fail to take over when two
    of its kind underperform.
    """
    if alpha <= 0:
        raise ConfigError(f"ranking intensity must be positive, got {alpha}")
    m = hpt.m if m is None else m

    # every mixed profile is consumed; monomorphic rows ground the chain
    hpt.row(0)
    hpt.row(m)
    mixed = {}
    for k in range(1, m):
        row = hpt.row(k)
        if row.u_building is None or row.u_sharing is None:
            raise ConfigError(
                f"payoff table row ({row.n_building}, {row.n_sharing}) is missing a payoff"
            )
        mixed[k] = row

    # k builders present -> gap seen by the growing builder minority
    build_gaps = [mixed[k].u_building - mixed[k].u_sharing for k in range(1, m)]
    # k searchers present -> profile (m - k) builders, sharing is the mutant
    share_gaps = [mixed[m - k].u_sharing - mixed[m - k].u_building for k in range(1, m)]

    rho_share_to_build = path_fixation_probability(build_gaps, alpha)
    rho_build_to_share = path_fixation_probability(share_gaps, alpha)
    transition = np.array(
        [
            [1.0 - rho_build_to_share, rho_build_to_share],
            [rho_share_to_build, 1.0 - rho_share_to_build],
        ]
    )
    stationary = stationary_distribution(transition)
    return AlphaRankResult(transition=transition, stationary=stationary, alpha=alpha)


def intensity_sweep(
    hpt: HeuristicPayoffTable, alphas: list[float], m: int | None = None
) -> list[AlphaRankResult]:
    return [alpharank(hpt, a, m) for a in alphas]
