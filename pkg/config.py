from dotenv import load_dotenv
import os

load_dotenv()

_ROOT = os.path.dirname(os.path.abspath(__file__))

database_url = os.getenv("DATABASE_URL", "sqlite:///./gpu_dag_sched.db")

# Platform defaults used by the CLI and the HTTP API when a request omits them.
default_sm_count = int(os.getenv("DEFAULT_SM_COUNT", "80"))
default_t_min = os.getenv("DEFAULT_T_MIN", "1")

# Experiment harness
default_seed = int(os.getenv("DEFAULT_SEED", "0"))
default_corpus_size = int(os.getenv("DEFAULT_CORPUS_SIZE", "1000"))
experiment_workers = int(os.getenv("EXPERIMENT_WORKERS", "1"))
benchmark_dir = os.getenv("BENCHMARK_DIR", os.path.join(_ROOT, "data", "benchmarks"))

log_level = os.getenv("LOG_LEVEL", "INFO").upper()
