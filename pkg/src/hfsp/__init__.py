"""Discrete-event simulator for size-based MapReduce scheduling (HFSP) with
FIFO and FAIR baselines."""

import logging

from .baselines import FairScheduler, FifoScheduler
from .core import ClusterConfig, JobSpec, Kind, ValidationError
from .engine import PreemptionCostModel, SimulationResult, Simulator, run_simulation
from .estimator import EstimatorConfig
from .scheduler import HfspConfig, HfspScheduler
from .workload import WorkloadSpec, WorkloadTrace, generate_workload, parse_trace, write_trace

__all__ = [
    "ClusterConfig", "EstimatorConfig", "FairScheduler", "FifoScheduler", "HfspConfig",
    "HfspScheduler", "JobSpec", "Kind", "PreemptionCostModel", "SimulationResult",
    "Simulator", "ValidationError", "WorkloadSpec", "WorkloadTrace", "generate_workload",
    "parse_trace", "run_simulation", "write_trace",
]
__version__ = "0.1.0"

logging.getLogger(__name__).addHandler(logging.NullHandler())
