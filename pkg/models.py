from sqlalchemy import Column, Integer, String, DateTime, Float, ForeignKey, create_engine, JSON
from sqlalchemy.orm import declarative_base, sessionmaker, relationship
from sqlalchemy.sql import func
from config import database_url

Base = declarative_base()


class ExperimentRun(Base):
    __tablename__ = "experiment_run"

    id = Column(Integer, primary_key=True, index=True)
    sweep_var = Column(String(1), nullable=False)  # M, P or V
    seed = Column(Integer, nullable=False)
    corpus_size = Column(Integer, nullable=False)
    spec = Column(JSON, nullable=False)  # ExperimentSpec as submitted
    created_at = Column(DateTime(timezone=True), server_default=func.now())

    results = relationship(
        "ExperimentResult",
        back_populates="run",
        cascade="all, delete-orphan",
        order_by="ExperimentResult.id",
    )


class ExperimentResult(Base):
    __tablename__ = "experiment_result"

    id = Column(Integer, primary_key=True, index=True)
    run_id = Column(Integer, ForeignKey("experiment_run.id", ondelete="CASCADE"), nullable=False, index=True)
    sweep_value = Column(Integer, nullable=False)
    method = Column(String(32), nullable=False)
    mean_norm = Column(Float, nullable=False)
    std_norm = Column(Float, nullable=False)
    mean_abs = Column(Float, nullable=False)
    n = Column(Integer, nullable=False)

    run = relationship("ExperimentRun", back_populates="results")


# SQLite needs check_same_thread off when FastAPI hands the session to worker threads
connect_args = {"check_same_thread": False} if database_url.startswith("sqlite") else {}
engine = create_engine(database_url, pool_pre_ping=True, connect_args=connect_args)

SessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=engine)

Base.metadata.create_all(bind=engine)


# Dependency to get DB session
def get_db():
    db = SessionLocal()
    try:
        yield db
    finally:
        db.close()
