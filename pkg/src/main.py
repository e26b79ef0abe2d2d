"""
Command-line entry point.

    python src/main.py run config/experiments/ber_siso.ini --seed 3 --snr-db 0,5,10
    python src/main.py validate config/experiments/pa_siso.ini
    python src/main.py list-experiments
"""
import argparse
import sys
import time
from pathlib import Path

# Add src and the project root to the Python path
current_dir = Path(__file__).parent
sys.path.insert(0, str(current_dir))
sys.path.insert(0, str(current_dir.parent))

from config.simulation_config import get_config
from harness import emit_results, load_experiment_config, run_experiment
from models.experiment_models import ExperimentKind, OutputFormat
from utils.errors import ConfigError, RandomModulationError
from utils.formatting import format_run_summary

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


def _snr_list(text: str):
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"invalid SNR list {text!r}") from e


def _add_overrides(parser):
    parser.add_argument("config", help="experiment INI file")
    parser.add_argument("--seed", type=int, help="master seed")
    parser.add_argument("--trials", type=int, help="Monte-Carlo trials per operating point")
    parser.add_argument("--output", help="results file")
    parser.add_argument("--snr-db", type=_snr_list, dest="snr_db", help="comma-separated SNR grid in dB")
    parser.add_argument("--workers", type=int, help="worker threads (default: RM_WORKERS)")
    parser.add_argument("--format", choices=[f.value for f in OutputFormat], help="results format")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="random-modulation",
        description="Random-modulation detection, analysis and power-allocation experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run an experiment and write its results")
    _add_overrides(run)
    run.add_argument("--quiet", action="store_true", help="no progress bars")
    validate = sub.add_parser("validate", help="check an experiment file without running it")
    _add_overrides(validate)
    sub.add_parser("list-experiments", help="list experiment kinds")
    return parser


def cli_main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    settings = get_config()
    settings.configure_logging()

    if args.command == "list-experiments":
        for kind in ExperimentKind:
            print(kind.value)
        return EXIT_OK

    overrides = {
        "seed": args.seed,
        "trials": args.trials,
        "output": args.output,
        "snr_db": args.snr_db,
        "workers": args.workers if args.workers is not None else settings.workers,
        "format": args.format,
    }
    try:
        cfg = load_experiment_config(args.config, overrides)
    except ConfigError as e:
        print(f"❌ Config error: {e}", file=sys.stderr)
        return EXIT_CONFIG

    if args.command == "validate":
        print(f"✅ {args.config}: valid {cfg.experiment.value} experiment")
        return EXIT_OK

    print(f"🚀 Running {cfg.experiment.value} experiment from {args.config}")
    started = time.perf_counter()
    try:
        records = run_experiment(cfg, progress=not args.quiet,
                                 profile_dir=settings.get_results_directory() / "profiles")
        path = emit_results(records, cfg.output_path, cfg.format)
    except ConfigError as e:
        print(f"❌ Config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (RandomModulationError, OSError, ValueError) as e:
        print(f"❌ Run failed: {e}", file=sys.stderr)
        return EXIT_RUNTIME

    print(format_run_summary({
        "experiment": cfg.experiment.value,
        "records": len(records),
        "wall_time_s": time.perf_counter() - started,
        "output": str(path),
    }))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(cli_main())
