"""Binary strategy genomes and their decoding to behavioral parameters.

Searcher genomes are 10 bits (two 5-bit segments decoding to gamma1 in [1, 5]
and gamma2 in [0, 4]); builder genomes are 5 bits decoding to a rebate ratio
alpha in [0, 1]. Each 5-bit segment is read most-significant-bit first and
mapped linearly, low + (d / 31) * (high - low).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .errors import CodecError

SEGMENT_BITS = 5
SEGMENT_MAX = 2**SEGMENT_BITS - 1  # 31
BUILDER_WIDTH = SEGMENT_BITS
SEARCHER_WIDTH = 2 * SEGMENT_BITS
GAMMA1_RANGE = (1.0, 5.0)
GAMMA2_RANGE = (0.0, 4.0)


class SearcherParams(NamedTuple):
    gamma1: float  # sensitivity of the bid ratio to the builder's rebate
    gamma2: float  # overall scale: higher gamma2, lower bids


class BuilderParams(NamedTuple):
    alpha: float  # fraction of surplus rebated to included searchers


@dataclass
class Chromosome:
    """Fixed-width bit string with a running fitness value."""

    bits: str
    fitness: float = 0.0

    def __post_init__(self):
        if len(self.bits) not in (BUILDER_WIDTH, SEARCHER_WIDTH):
            raise CodecError(f"chromosome width must be 5 or 10, got {len(self.bits)}")
        if any(c not in "01" for c in self.bits):
            raise CodecError(f"chromosome bits must be 0/1, got {self.bits!r}")

    @property
    def width(self) -> int:
        return len(self.bits)


def random_chromosome(width: int, rng: np.random.Generator) -> Chromosome:
    bits = "".join("1" if b else "0" for b in rng.integers(0, 2, size=width))
    return Chromosome(bits=bits)


def decode_segment(bits: str, low: float, high: float) -> float:
    """Map one 5-bit segment linearly onto [low, high]."""
    if len(bits) != SEGMENT_BITS or any(c not in "01" for c in bits):
        raise CodecError(f"expected a 5-bit segment, got {bits!r}")
    return low + (int(bits, 2) / SEGMENT_MAX) * (high - low)


def encode_segment(value: int) -> str:
    """Inverse of the segment integer: 5-bit, most-significant-bit first."""
    if not 0 <= value <= SEGMENT_MAX:
        raise CodecError(f"segment integer must be in [0, {SEGMENT_MAX}], got {value}")
    return format(value, f"0{SEGMENT_BITS}b")


@lru_cache(maxsize=4096)
def segment_ints(bits: str) -> tuple[int, ...]:
    """Decoded integer (0..31) of each 5-bit segment, used for consensus metrics."""
    if len(bits) % SEGMENT_BITS != 0:
        raise CodecError(f"bit string length must be a multiple of 5, got {len(bits)}")
    return tuple(
        int(bits[k : k + SEGMENT_BITS], 2) for k in range(0, len(bits), SEGMENT_BITS)
    )


@lru_cache(maxsize=4096)
def decode_searcher_bits(bits: str) -> SearcherParams:
    if len(bits) != SEARCHER_WIDTH:
        raise CodecError(f"searcher chromosome must have 10 bits, got {len(bits)}")
    gamma1 = decode_segment(bits[:SEGMENT_BITS], *GAMMA1_RANGE)
    gamma2 = decode_segment(bits[SEGMENT_BITS:], *GAMMA2_RANGE)
    return SearcherParams(gamma1, gamma2)


@lru_cache(maxsize=4096)
def decode_builder_bits(bits: str) -> BuilderParams:
    if len(bits) != BUILDER_WIDTH:
        raise CodecError(f"builder chromosome must have 5 bits, got {len(bits)}")
    return BuilderParams(int(bits, 2) / SEGMENT_MAX)


def decode_searcher(chromosome: Chromosome) -> SearcherParams:
    return decode_searcher_bits(chromosome.bits)


def decode_builder(chromosome: Chromosome) -> BuilderParams:
    return decode_builder_bits(chromosome.bits)


def bid_ratio(params: SearcherParams, alpha: float) -> float:
    """Modified sigmoid bid ratio, (1 / (1 + gamma1^-alpha))^gamma2.

    Lies in [0, 1] and is non-decreasing in the builder's rebate ratio for
    gamma1 >= 1.
    """
    base = 1.0 / (1.0 + params.gamma1 ** (-alpha))
    return base**params.gamma2
