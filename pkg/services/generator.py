"""
Seeded synthetic layered DAG generator.

Construction:
- layer 0 is the single source
- depth - 1 internal layers follow, each 2..P nodes wide
- every node gets one parent drawn from the previous layer, plus an extra
  edge from each other previous-layer node with probability edge_density
- a final sink node absorbs every childless node
- loads are uniform in avg_load * (1 +/- load_jitter), rounded to t_min
  multiples unless round_loads is off, and never below t_min
"""
from decimal import Decimal
from fractions import Fraction
from typing import Dict, List, Optional, Set, Tuple

import numpy as np
from pydantic import BaseModel, Field, model_validator

from services.dag_model import DagTask, validate
from utils.structured_logging import log_info


class GenConfig(BaseModel):
    """Generator parameters. depth counts the source layer but not the sink."""
    depth_min: int = Field(5, ge=2)
    depth_max: int = Field(8, ge=2)
    max_width: int = Field(8, ge=2)  # P
    avg_load: Decimal = Decimal(20)
    load_jitter: Decimal = Field(Decimal("0.5"), ge=0, lt=1)
    edge_density: Decimal = Field(Decimal("0.005"), ge=0, le=1)
    t_min: Decimal = Field(Decimal(1), gt=0)
    seed: int = 0
    normalize_mean: bool = False
    round_loads: bool = True

    @model_validator(mode="after")
    def check_ranges(self):
        if self.depth_min > self.depth_max:
            raise ValueError(f"depth_min {self.depth_min} exceeds depth_max {self.depth_max}")
        if self.avg_load < self.t_min:
            raise ValueError(f"avg_load {self.avg_load} is below t_min {self.t_min}")
        return self


def _layers(config: GenConfig, rng: np.random.Generator) -> Tuple[List[List[int]], Set[Tuple[int, int]]]:
    depth = int(rng.integers(config.depth_min, config.depth_max + 1))
    density = float(config.edge_density)
    layers = [[0]]
    edges: Set[Tuple[int, int]] = set()
    next_id = 1
    for _ in range(depth - 1):
        width = int(rng.integers(2, config.max_width + 1))
        prev = layers[-1]
        layer = list(range(next_id, next_id + width))
        next_id += width
        for v in layer:
            parent = prev[int(rng.integers(len(prev)))]
            edges.add((parent, v))
            for u, draw in zip(prev, rng.random(len(prev))):
                if u != parent and draw < density:
                    edges.add((u, v))
        layers.append(layer)

    sink = next_id
    has_child = {u for u, _ in edges}
    for layer in layers:
        for u in layer:
            if u not in has_child:
                edges.add((u, sink))
    layers.append([sink])
    return layers, edges


def _loads(config: GenConfig, count: int, rng: np.random.Generator) -> Dict[int, Fraction]:
    avg = float(config.avg_load)
    jitter = float(config.load_jitter)
    t_min = Fraction(config.t_min)
    samples = rng.uniform(avg * (1 - jitter), avg * (1 + jitter), size=count)

    loads = {}
    for v, x in enumerate(samples):
        if config.round_loads:
            c = round(Fraction(float(x)) / t_min) * t_min
        else:
            c = Fraction(float(x)).limit_denominator(10 ** 6)
        loads[v] = max(c, t_min)

    if config.normalize_mean:
        mean = sum(loads.values(), Fraction(0)) / count
        factor = Fraction(config.avg_load) / mean
        loads = {v: max(c * factor, t_min) for v, c in loads.items()}
    return loads


def generate(config: GenConfig, seed: Optional[int] = None) -> DagTask:
    """Build one DAG from `seed` (defaults to config.seed). Same inputs, same DAG."""
    seed = config.seed if seed is None else seed
    rng = np.random.default_rng(seed)
    layers, edges = _layers(config, rng)
    count = sum(len(layer) for layer in layers)
    task = DagTask.build(_loads(config, count, rng), edges, seed=seed)
    validate(task, Fraction(config.t_min))
    return task


def generate_corpus(config: GenConfig, count: int) -> List[DagTask]:
    if count < 1:
        raise ValueError(f"corpus size must be >= 1, got {count}")
    corpus = [generate(config, seed=config.seed + i) for i in range(count)]
    log_info(
        "Generated DAG corpus",
        count=count,
        seed=config.seed,
        nodes=sum(len(t.loads) for t in corpus),
    )
    return corpus
