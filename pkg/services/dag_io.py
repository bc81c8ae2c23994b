"""
DAG file codec. One JSON document per task:

    {"nodes": [{"id": 1, "load": 4}, ...], "edges": [[1, 2], ...],
     "period": 16, "seed": 7, "description": "..."}

Loads and period accept integers, decimals ("2.5") or exact fractions ("5/2").
"""
import json
from fractions import Fraction
from pathlib import Path
from typing import List, Optional, Tuple, Union

from pydantic import BaseModel, ValidationError, field_validator

from services.dag_model import DagTask

Number = Union[int, float, str]


class DagFileError(ValueError):
    pass


def _exact(value):
    try:
        Fraction(str(value))
    except (ValueError, ZeroDivisionError) as e:
        raise ValueError(f"not an exact number: {value!r}") from e
    return value


def _plain(x: Fraction):
    return x.numerator if x.denominator == 1 else str(x)


class NodeDocument(BaseModel):
    id: int
    load: Number

    @field_validator("load")
    @classmethod
    def check_load(cls, v):
        return _exact(v)


class DagDocument(BaseModel):
    nodes: List[NodeDocument]
    edges: List[Tuple[int, int]] = []
    period: Optional[Number] = None
    seed: Optional[int] = None
    description: Optional[str] = None

    @field_validator("period")
    @classmethod
    def check_period(cls, v):
        return None if v is None else _exact(v)

    def to_task(self) -> DagTask:
        ids = [n.id for n in self.nodes]
        if len(ids) != len(set(ids)):
            raise DagFileError(f"duplicate node ids in {sorted(ids)}")
        return DagTask.build(
            {n.id: Fraction(str(n.load)) for n in self.nodes},
            self.edges,
            period=None if self.period is None else Fraction(str(self.period)),
            seed=self.seed,
        )

    @classmethod
    def from_task(cls, task: DagTask, description: Optional[str] = None) -> "DagDocument":
        return cls(
            nodes=[NodeDocument(id=v, load=_plain(c)) for v, c in task.loads.items()],
            edges=sorted(task.edges),
            period=_plain(task.period),
            seed=task.seed,
            description=description,
        )


def parse_dag(text: str) -> DagTask:
    try:
        return DagDocument.model_validate_json(text).to_task()
    except ValidationError as e:
        raise DagFileError(f"invalid DAG document: {e}") from e


def read_dag(path: Union[str, Path]) -> DagTask:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise DagFileError(f"cannot read DAG file {path}: {e}") from e
    try:
        return parse_dag(text)
    except DagFileError as e:
        raise DagFileError(f"{path}: {e}") from e


def dump_dag(task: DagTask, description: Optional[str] = None) -> str:
    doc = DagDocument.from_task(task, description)
    return json.dumps(doc.model_dump(exclude_none=True), indent=2)


def write_dag(task: DagTask, path: Union[str, Path], description: Optional[str] = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dump_dag(task, description) + "\n")
    return path
