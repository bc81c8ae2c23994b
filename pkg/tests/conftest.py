"""
Shared fixtures: the worked-example DAG, platforms, an in-memory database and
a FastAPI test client bound to it.
"""
import os
import sys

# Keep the test run off the on-disk database
os.environ.setdefault("DATABASE_URL", "sqlite://")
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import pytest
from fastapi.testclient import TestClient
from sqlalchemy import create_engine
from sqlalchemy.orm import sessionmaker
from sqlalchemy.pool import StaticPool

from models import Base, get_db
from services.dag_model import DagTask
from services.exec_model import Platform

EXAMPLE_LOADS = {1: 1, 2: 4, 3: 3, 4: 3, 5: 2, 6: 2, 7: 1}
EXAMPLE_EDGES = [(1, 2), (1, 3), (1, 4), (3, 5), (4, 5), (4, 6), (2, 7), (5, 7), (6, 7)]

GAUSSIAN_EDGES = [
    (0, 1), (0, 2), (0, 3), (1, 4), (4, 5), (2, 5), (4, 6), (3, 6), (5, 7), (7, 8), (6, 8),
]


@pytest.fixture
def example_task():
    """Seven-kernel example DAG with joins v5 and v7."""
    return DagTask.build(EXAMPLE_LOADS, EXAMPLE_EDGES)


@pytest.fixture
def gaussian_weights():
    return DagTask.build({v: 1 for v in range(9)}, GAUSSIAN_EDGES)


@pytest.fixture
def chain_task():
    return DagTask.build({1: 4, 2: 4}, [(1, 2)])


@pytest.fixture
def platform6():
    return Platform(6)


@pytest.fixture
def platform8():
    return Platform(8)


engine = create_engine(
    "sqlite://",
    connect_args={"check_same_thread": False},
    poolclass=StaticPool,
)
TestingSessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=engine)


@pytest.fixture(scope="function")
def db_session():
    Base.metadata.create_all(bind=engine)
    db = TestingSessionLocal()
    try:
        yield db
    finally:
        db.close()
        Base.metadata.drop_all(bind=engine)


@pytest.fixture(scope="function")
def client(db_session):
    from main import app

    def override_get_db():
        yield db_session

    app.dependency_overrides[get_db] = override_get_db
    with TestClient(app) as c:
        yield c
    app.dependency_overrides.clear()
