"""
Benchmark fixture DAGs (Gaussian elimination, Laplace, Stencil).

Fixture files hold relative weights; every kernel runs the same body with a
different iteration count, so loads are weight * average load.
"""
from fractions import Fraction
from pathlib import Path
from typing import Dict, Optional, Union

import config
from services.dag_io import read_dag
from services.dag_model import DagTask

FIXTURES = ("gaussian", "laplace", "stencil")


class MissingFixtureError(FileNotFoundError):
    pass


def fixture_path(name: str, directory: Optional[Union[str, Path]] = None) -> Path:
    return Path(directory or config.benchmark_dir) / f"{name}.json"


def load_fixture(name: str, avg_load=1, directory: Optional[Union[str, Path]] = None) -> DagTask:
    path = fixture_path(name, directory)
    if not path.is_file():
        raise MissingFixtureError(f"benchmark fixture {name!r} not found at {path}")
    return read_dag(path).scaled(Fraction(avg_load))


def load_fixtures(avg_load=1, directory: Optional[Union[str, Path]] = None) -> Dict[str, DagTask]:
    return {name: load_fixture(name, avg_load, directory) for name in FIXTURES}
