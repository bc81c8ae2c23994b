from decimal import Decimal
from fractions import Fraction
from typing import Optional, Tuple

from fastapi import APIRouter, HTTPException
from pydantic import BaseModel, Field

import config
from services.analysis import analyze
from services.dag_io import DagDocument, DagFileError
from services.dag_model import DagTask, DagValidationError, validate
from services.division import divide
from services.exec_model import Platform
from services.generator import GenConfig, generate
from services.scheduler import schedule
from services.simulator import DispatchPolicy, SimConfig, SimMode, TimeModel, simulate
from utils.structured_logging import log_warning

router = APIRouter(prefix="/dags", tags=["dags"])


# Pydantic models
class DagRequest(BaseModel):
    dag: DagDocument
    sm_count: int = Field(default_factory=lambda: config.default_sm_count, ge=1)
    t_min: Decimal = Field(default_factory=lambda: Decimal(config.default_t_min), gt=0)


class SimulateRequest(DagRequest):
    mode: SimMode = SimMode.SCHEME
    policy: DispatchPolicy = DispatchPolicy.FIFO
    time_model: TimeModel = TimeModel.WORST_CASE
    seed: int = 0
    scale_min: Decimal = Decimal("0.5")
    scale_max: Decimal = Decimal(1)


def _load(request: DagRequest) -> Tuple[DagTask, Platform]:
    """Build and validate the posted task; input problems become 422s."""
    platform = Platform(request.sm_count, t_min=Fraction(request.t_min))
    try:
        task = request.dag.to_task()
        validate(task, platform.t_min)
    except DagValidationError as e:
        log_warning("Rejected DAG", error=str(e))
        raise HTTPException(
            status_code=422,
            detail={"message": str(e), "nodes": e.nodes, "edges": [list(x) for x in e.edges]},
        )
    except DagFileError as e:
        log_warning("Rejected DAG", error=str(e))
        raise HTTPException(status_code=422, detail={"message": str(e)})
    return task, platform


# POST /dags/validate
@router.post("/validate")
def validate_dag(request: DagRequest):
    task, _ = _load(request)
    return {
        "valid": True,
        "nodes": len(task.loads),
        "edges": len(task.edges),
        "source": task.source,
        "sink": task.sink,
        "total_workload": str(task.total_workload),
    }


# POST /dags/divide
@router.post("/divide")
def divide_dag(request: DagRequest):
    task, platform = _load(request)
    result = divide(task, platform)
    return {
        "blocks": [
            {"join": b.join, "members": list(b.members)}
            for b in result.blocks
        ],
        "local_paths": [
            [list(p.nodes) for p in ps.paths]
            for ps in result.path_sets
        ],
        "groups": [list(g) for g in result.groups],
    }


# POST /dags/schedule
@router.post("/schedule")
def schedule_dag(request: DagRequest):
    task, platform = _load(request)
    return schedule(task, platform).to_document()


# POST /dags/analyze
@router.post("/analyze")
def analyze_dag(request: DagRequest):
    task, platform = _load(request)
    return analyze(task, platform).to_document()


# POST /dags/simulate
@router.post("/simulate")
def simulate_dag(request: SimulateRequest):
    task, platform = _load(request)
    try:
        sim_config = SimConfig(
            platform=platform,
            mode=request.mode,
            policy=request.policy,
            time_model=request.time_model,
            seed=request.seed,
            scale_min=Fraction(request.scale_min),
            scale_max=Fraction(request.scale_max),
        )
    except ValueError as e:
        raise HTTPException(status_code=422, detail={"message": str(e)})
    return simulate(task, sim_config).to_document()


# POST /dags/generate
@router.post("/generate", response_model=DagDocument, response_model_exclude_none=True)
def generate_dag(gen: GenConfig, seed: Optional[int] = None):
    task = generate(gen, seed=seed)
    return DagDocument.from_task(task)
