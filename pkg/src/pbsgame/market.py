"""Bundles, the pairwise interaction graph, and per-round scenario generation.

A scenario is one round's market state: one bundle per agent with a private
value drawn from an exponential distribution, plus a symmetric conflict graph
where each unordered pair of bundles fully conflicts (weight -1) with
probability ``p_c`` and is independent (weight 0) otherwise.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class Bundle:
    """A single agent's profit opportunity for one round."""

    owner: int
    base_value: float

    def __post_init__(self):
        if self.base_value < 0:
            raise ConfigError(f"bundle value must be >= 0, got {self.base_value}")


class InteractionGraph:
    """Pairwise interaction weights between bundles.

    Weight semantics: negative = competitive, zero = independent, positive =
    altruistic. Weights are clamped to >= -1 so a single interaction can zero a
    bundle's value but never make it negative. The diagonal is always zero.
    """

    def __init__(self, weights: np.ndarray):
        weights = np.asarray(weights, dtype=float)
        if weights.ndim != 2 or weights.shape[0] != weights.shape[1]:
            raise ConfigError(f"weights must be a square matrix, got shape {weights.shape}")
        if np.any(np.diag(weights) != 0):
            raise ConfigError("interaction weights must be zero on the diagonal")
        if np.any(weights < -1):
            raise ConfigError("interaction weights must be >= -1")
        self._weights = weights
        self._weights.setflags(write=False)

    @property
    def n(self) -> int:
        return self._weights.shape[0]

    @property
    def weights(self) -> np.ndarray:
        return self._weights

    def weight(self, i: int, j: int) -> float:
        return float(self._weights[i, j])

    @classmethod
    def independent(cls, n: int) -> "InteractionGraph":
        return cls(np.zeros((n, n)))

    @classmethod
    def from_conflict_pairs(cls, n: int, pairs: Iterable[tuple[int, int]]) -> "InteractionGraph":
        """Two-point graph: listed unordered pairs conflict (-1), the rest are 0."""
        weights = np.zeros((n, n))
        for i, j in pairs:
            if i == j:
                raise ConfigError(f"self-conflict pair ({i}, {j})")
            weights[i, j] = weights[j, i] = -1.0
        return cls(weights)

    def conflict_pairs(self) -> list[tuple[int, int]]:
        i_idx, j_idx = np.nonzero(np.triu(self._weights, k=1) < 0)
        return [(int(i), int(j)) for i, j in zip(i_idx, j_idx)]


@dataclass(frozen=True)
class Scenario:
    """One round's bundles and interaction graph."""

    bundles: tuple[Bundle, ...]
    graph: InteractionGraph
    p_c: float
    seed: int | None = None

    @property
    def n(self) -> int:
        return len(self.bundles)

    def value_of(self, agent: int) -> float:
        return self.bundles[agent].base_value

    def to_json(self) -> str:
        payload = {
            "seed": self.seed,
            "n": self.n,
            "p_c": self.p_c,
            "values": [b.base_value for b in self.bundles],
            "conflict_pairs": [list(p) for p in self.graph.conflict_pairs()],
        }
        return json.dumps(payload)

    @classmethod
    def from_json(cls, text: str) -> "Scenario":
        payload = json.loads(text)
        values: Sequence[float] = payload["values"]
        n = int(payload["n"])
        if len(values) != n:
            raise ConfigError(f"scenario has {len(values)} values for n={n}")
        bundles = tuple(Bundle(i, float(v)) for i, v in enumerate(values))
        graph = InteractionGraph.from_conflict_pairs(
            n, [tuple(p) for p in payload["conflict_pairs"]]
        )
        return cls(bundles=bundles, graph=graph, p_c=float(payload["p_c"]), seed=payload["seed"])


def draw_scenario(
    n: int,
    p_c: float,
    value_rate: float,
    rng: np.random.Generator | int,
) -> Scenario:
    """Draw one round's private values and conflict graph.

    Values are i.i.d. Exponential with rate ``value_rate`` (mean 1/rate). Each
    unordered pair conflicts with probability ``p_c``. Passing an int seeds a
    fresh generator and records the seed on the scenario.
    """
    if n < 2:
        raise ConfigError(f"need at least 2 agents, got {n}")
    if not 0 <= p_c <= 1:
        raise ConfigError(f"conflict probability must be in [0, 1], got {p_c}")
    if value_rate <= 0:
        raise ConfigError(f"value rate must be positive, got {value_rate}")

    seed = None
    if isinstance(rng, (int, np.integer)):
        seed = int(rng)
        rng = np.random.default_rng(seed)

    values = rng.exponential(scale=1.0 / value_rate, size=n)
    bundles = tuple(Bundle(i, float(v)) for i, v in enumerate(values))

    n_pairs = n * (n - 1) // 2
    draws = rng.random(n_pairs)
    pairs = []
    k = 0
    for i in range(n):
        for j in range(i + 1, n):
            if draws[k] < p_c:
                pairs.append((i, j))
            k += 1
    graph = InteractionGraph.from_conflict_pairs(n, pairs)
    return Scenario(bundles=bundles, graph=graph, p_c=p_c, seed=seed)


def apply_interaction(value: float, weight: float) -> float:
    """Update a bundle's effective value after a bundle with this edge weight executes."""
    return value * (1.0 + weight)
