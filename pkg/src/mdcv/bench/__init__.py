"""Experiment orchestration: configuration, replicate execution, metric
aggregation, result persistence, and the real-data harness."""

from .config import ExperimentConfig, Setting, load_config      # noqa: F401
from .records import ReplicateRecord, read_records, write_records  # noqa: F401
from .runner import run_and_persist, run_simulation             # noqa: F401
from .summary import summarize                                  # noqa: F401
