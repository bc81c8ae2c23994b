from datetime import datetime
from typing import List, Optional

from fastapi import APIRouter, Depends, HTTPException, Query
from fastapi.responses import PlainTextResponse
from pydantic import BaseModel
from sqlalchemy.orm import Session, joinedload

from models import ExperimentResult, ExperimentRun, get_db
from services.experiments import ExperimentSpec, ResultRow, rows_to_csv, run_experiment
from utils.structured_logging import log_info

router = APIRouter(prefix="/experiments", tags=["experiments"])


# Pydantic models
class ExperimentResultResponse(BaseModel):
    sweep_value: int
    method: str
    mean_norm: float
    std_norm: float
    mean_abs: float
    n: int

    class Config:
        from_attributes = True


class ExperimentRunResponse(BaseModel):
    id: int
    sweep_var: str
    seed: int
    corpus_size: int
    created_at: Optional[datetime] = None
    results: List[ExperimentResultResponse] = []

    class Config:
        from_attributes = True


def _get_run(run_id: int, db: Session) -> ExperimentRun:
    run = (
        db.query(ExperimentRun)
        .options(joinedload(ExperimentRun.results))
        .filter(ExperimentRun.id == run_id)
        .first()
    )
    if not run:
        raise HTTPException(status_code=404, detail="Experiment run not found")
    return run


# POST /experiments - run a sweep and store its rows
@router.post("", response_model=ExperimentRunResponse, status_code=201)
def create_experiment(spec: ExperimentSpec, db: Session = Depends(get_db)):
    rows = run_experiment(spec)
    run = ExperimentRun(
        sweep_var=spec.sweep_var,
        seed=spec.seed,
        corpus_size=spec.corpus_size,
        spec=spec.model_dump(mode="json"),
    )
    for r in rows:
        run.results.append(ExperimentResult(
            sweep_value=r.sweep_value,
            method=r.method,
            mean_norm=r.mean_norm,
            std_norm=r.std_norm,
            mean_abs=r.mean_abs,
            n=r.n,
        ))
    db.add(run)
    db.commit()
    db.refresh(run)
    log_info("Stored experiment run", run_id=run.id, rows=len(rows))
    return run


# GET /experiments - list runs
@router.get("", response_model=List[ExperimentRunResponse])
def list_experiments(
    skip: int = Query(0, ge=0),
    limit: int = Query(100, le=1000),
    db: Session = Depends(get_db),
):
    return (
        db.query(ExperimentRun)
        .options(joinedload(ExperimentRun.results))
        .order_by(ExperimentRun.id.desc())
        .offset(skip)
        .limit(limit)
        .all()
    )


# GET /experiments/{run_id}
@router.get("/{run_id}", response_model=ExperimentRunResponse)
def get_experiment(run_id: int, db: Session = Depends(get_db)):
    return _get_run(run_id, db)


# GET /experiments/{run_id}/csv - the CSV contract for a stored run
@router.get("/{run_id}/csv", response_class=PlainTextResponse)
def get_experiment_csv(run_id: int, db: Session = Depends(get_db)):
    run = _get_run(run_id, db)
    rows = [
        ResultRow(
            sweep_var=run.sweep_var,
            sweep_value=r.sweep_value,
            method=r.method,
            mean_norm=r.mean_norm,
            std_norm=r.std_norm,
            mean_abs=r.mean_abs,
            n=r.n,
            seed=run.seed,
        )
        for r in run.results
    ]
    return PlainTextResponse(rows_to_csv(rows), media_type="text/csv")
