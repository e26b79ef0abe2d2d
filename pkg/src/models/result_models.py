from typing import Any, Dict, Optional

RESULT_COLUMNS = [
    "experiment",
    "snr_db",
    "scheme",
    "iteration",
    "metric",
    "value",
    "trials",
    "stderr",
    "wall_time_ms",
    "seed",
]


class ResultRecord:
    """One metric value of an experiment at one operating point."""
    def __init__(self, experiment: str, metric: str, value: float, seed: int,
                 snr_db: Optional[float] = None, scheme: Optional[str] = None,
                 iteration: Optional[int] = None, trials: Optional[int] = None,
                 stderr: Optional[float] = None, wall_time_ms: Optional[float] = None):
        self.experiment = experiment
        self.snr_db = snr_db
        self.scheme = scheme
        self.iteration = iteration
        self.metric = metric
        self.value = float(value)
        self.trials = trials
        self.stderr = stderr
        self.wall_time_ms = wall_time_ms
        self.seed = seed

    def to_dict(self) -> Dict[str, Any]:
        return {column: getattr(self, column) for column in RESULT_COLUMNS}

    def __repr__(self):
        return (f"ResultRecord({self.experiment}, {self.metric}={self.value:.6g}, "
                f"snr_db={self.snr_db}, scheme={self.scheme})")
