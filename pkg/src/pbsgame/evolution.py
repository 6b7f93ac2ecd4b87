"""Per-agent strategy pools: softmax selection, fitness updates, and the GA.

Each agent keeps a pool of 20 chromosomes. Every round it plays one, chosen by
softmax roulette over fitness; the played strategy's fitness moves toward the
realized payoff by an exponential moving average. With a small per-round
probability the pool is rebuilt: the worst half is eliminated and offspring
are bred from the survivors by roulette selection, single-point crossover,
and bit-flip mutation until the pool is full again.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codec import Chromosome, random_chromosome
from .errors import ConfigError

POOL_SIZE = 20


@dataclass
class GAConfig:
    trigger: float = 0.01  # per-agent per-round probability of a GA step
    elimination: float = 0.5  # fraction of the pool removed
    mutation: float = 0.01  # per-bit flip probability

    def __post_init__(self):
        for name in ("trigger", "elimination", "mutation"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"GA {name} must be in [0, 1], got {value}")


@dataclass
class StrategyPool:
    owner: int
    strategies: list[Chromosome]
    temperature: float = 2.0
    learning_rate: float = 0.5

    def __post_init__(self):
        if not self.strategies:
            raise ConfigError("strategy pool cannot be empty")
        if self.temperature <= 0:
            raise ConfigError(f"temperature must be positive, got {self.temperature}")
        if not 0.0 <= self.learning_rate <= 1.0:
            raise ConfigError(f"learning rate must be in [0, 1], got {self.learning_rate}")

    @classmethod
    def random(
        cls,
        owner: int,
        width: int,
        rng: np.random.Generator,
        size: int = POOL_SIZE,
        temperature: float = 2.0,
        learning_rate: float = 0.5,
    ) -> "StrategyPool":
        strategies = [random_chromosome(width, rng) for _ in range(size)]
        return cls(owner, strategies, temperature, learning_rate)


def selection_probabilities(pool: StrategyPool) -> np.ndarray:
    """Softmax over fitness at the pool's temperature; shift-invariant."""
    fitness = np.array([c.fitness for c in pool.strategies])
    scaled = (fitness - fitness.max()) / pool.temperature
    weights = np.exp(scaled)
    return weights / weights.sum()


def select_strategy(pool: StrategyPool, rng: np.random.Generator) -> int:
    """Roulette-wheel draw; returns the index of the selected strategy."""
    probs = selection_probabilities(pool)
    u = rng.random()
    idx = int(np.searchsorted(np.cumsum(probs), u, side="right"))
    return min(idx, len(pool.strategies) - 1)


def update_fitness(pool: StrategyPool, index: int, payoff: float) -> None:
    """EMA update of the played strategy only: f <- (1 - eta) f + eta * payoff."""
    chrom = pool.strategies[index]
    eta = pool.learning_rate
    chrom.fitness = (1.0 - eta) * chrom.fitness + eta * payoff


def _crossover(
    parent_a: Chromosome, parent_b: Chromosome, rng: np.random.Generator
) -> tuple[Chromosome, Chromosome]:
    width = parent_a.width
    point = int(rng.integers(1, width))
    child_fitness = 0.5 * (parent_a.fitness + parent_b.fitness)
    bits_a = parent_a.bits[:point] + parent_b.bits[point:]
    bits_b = parent_b.bits[:point] + parent_a.bits[point:]
    return Chromosome(bits_a, child_fitness), Chromosome(bits_b, child_fitness)


def _mutate(chrom: Chromosome, rate: float, rng: np.random.Generator) -> Chromosome:
    if rate <= 0:
        return chrom
    flips = rng.random(chrom.width) < rate
    if not flips.any():
        return chrom
    bits = "".join(
        ("1" if b == "0" else "0") if flip else b for b, flip in zip(chrom.bits, flips)
    )
    return Chromosome(bits, chrom.fitness)


def evolve(pool: StrategyPool, config: GAConfig, rng: np.random.Generator) -> None:
    """One GA step: eliminate the worst half, breed back to full size.

    Elimination removes the lowest-fitness strategies (ties broken by lower
    index). Parents are drawn by softmax roulette from the survivors; each pair
    yields two single-point-crossover offspring whose fitness is the parents'
    mean, mutated bit-wise. A surplus offspring is dropped if the shortfall is
    odd.
    """
    size = len(pool.strategies)
    # keep at least one survivor so there is always a parent to breed from
    n_drop = min(int(size * config.elimination), size - 1)
    order = sorted(range(size), key=lambda k: (pool.strategies[k].fitness, k))
    dropped = set(order[:n_drop])
    survivors = [c for k, c in enumerate(pool.strategies) if k not in dropped]

    parent_pool = StrategyPool(
        pool.owner, survivors, pool.temperature, pool.learning_rate
    )
    probs = selection_probabilities(parent_pool)
    cumulative = np.cumsum(probs)

    offspring: list[Chromosome] = []
    while len(survivors) + len(offspring) < size:
        draws = rng.random(2)
        idx_a = min(int(np.searchsorted(cumulative, draws[0], side="right")), len(survivors) - 1)
        idx_b = min(int(np.searchsorted(cumulative, draws[1], side="right")), len(survivors) - 1)
        child_a, child_b = _crossover(survivors[idx_a], survivors[idx_b], rng)
        offspring.append(_mutate(child_a, config.mutation, rng))
        if len(survivors) + len(offspring) < size:
            offspring.append(_mutate(child_b, config.mutation, rng))

    pool.strategies = survivors + offspring
