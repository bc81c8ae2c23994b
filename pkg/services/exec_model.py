"""
Moldable-kernel execution model.

C = max(t_min, ceil(m / M) * load / m), with the maximum useful parallelism
m^max = floor(load / t_min) (at least 1).
"""
import math
from dataclasses import dataclass
from fractions import Fraction

from services.dag_model import NodeId


@dataclass(frozen=True)
class Platform:
    """M homogeneous SMs and the basic time unit t_min."""
    sm_count: int
    t_min: Fraction = Fraction(1)

    def __post_init__(self):
        if int(self.sm_count) < 1:
            raise ValueError(f"sm_count must be >= 1, got {self.sm_count}")
        object.__setattr__(self, "sm_count", int(self.sm_count))
        object.__setattr__(self, "t_min", Fraction(self.t_min))
        if self.t_min <= 0:
            raise ValueError(f"t_min must be positive, got {self.t_min}")


@dataclass(frozen=True)
class KernelConfig:
    node: NodeId
    parallelism: int

    def __post_init__(self):
        if self.parallelism < 1:
            raise ValueError(f"parallelism must be >= 1, got {self.parallelism}")

    def exec_time(self, load, platform: Platform) -> Fraction:
        return exec_time(load, self.parallelism, platform)


def exec_time(load, m: int, platform: Platform) -> Fraction:
    load = Fraction(load)
    rounds = -(-m // platform.sm_count)  # ceil(m / M)
    return max(platform.t_min, rounds * load / m)


def max_parallelism(load, platform: Platform) -> int:
    return max(1, math.floor(Fraction(load) / platform.t_min))


def full_parallel_time(load, platform: Platform) -> Fraction:
    """Execution time with the device to itself: m = min(m^max, M)."""
    return exec_time(load, min(max_parallelism(load, platform), platform.sm_count), platform)
