from harness.config_loader import load_experiment_config, read_ini, validate_config
from harness.experiments import allocate_power, draw_channel, noise_variance, run_experiment
from harness.results import emit_results, load_results
from harness.seeding import trial_streams

__all__ = [
    "load_experiment_config",
    "read_ini",
    "validate_config",
    "allocate_power",
    "draw_channel",
    "noise_variance",
    "run_experiment",
    "emit_results",
    "load_results",
    "trial_streams",
]
