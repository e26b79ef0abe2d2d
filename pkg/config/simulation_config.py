"""
Runtime settings for the random-modulation toolkit.

Experiment content lives in the INI files under config/experiments; this
class only carries execution and presentation settings read from the
environment (optionally through a .env file).
"""
import logging
import os
from pathlib import Path

from dotenv import load_dotenv

# Load environment variables
load_dotenv()

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


class SimulationConfig:
    """Centralized runtime configuration"""

    def __init__(self):
        self.project_root = Path(__file__).parent.parent.absolute()
        self.experiments_directory = self.project_root / "config" / "experiments"

        # Execution: worker count is the only environment override that touches a run
        self.workers = self._get_int("RM_WORKERS", 1)

        # Presentation
        self.log_level = os.getenv("RM_LOG_LEVEL", "WARNING").upper()
        self.results_directory = Path(os.getenv("RM_RESULTS_DIR", "results"))

        self._validate_config()

    def _get_int(self, name, default):
        raw = os.getenv(name)
        if raw is None or raw.strip() == "":
            return default
        try:
            return int(raw)
        except ValueError:
            self._bad_values = getattr(self, "_bad_values", []) + [f"{name} must be an integer, got {raw!r}"]
            return default

    def _validate_config(self):
        """Validate settings"""
        self.validation_errors = list(getattr(self, "_bad_values", []))
        if self.workers < 1:
            self.validation_errors.append(f"RM_WORKERS must be at least 1, got {self.workers}")
            self.workers = 1
        if self.log_level not in LOG_LEVELS:
            self.validation_errors.append(f"RM_LOG_LEVEL must be one of {', '.join(LOG_LEVELS)}")
            self.log_level = "WARNING"

    def is_valid(self):
        return len(self.validation_errors) == 0

    def get_validation_errors(self):
        return self.validation_errors

    def get_results_directory(self):
        return self.results_directory

    def get_config_summary(self):
        return {
            "workers": self.workers,
            "log_level": self.log_level,
            "results_directory": str(self.results_directory),
            "experiments_directory": str(self.experiments_directory),
            "valid": self.is_valid(),
        }

    def configure_logging(self):
        logging.basicConfig(
            level=getattr(logging, self.log_level),
            format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        )

    def print_config_summary(self):
        print("🔧 Random Modulation Toolkit Configuration")
        print("=" * 50)
        summary = self.get_config_summary()
        print(f"⚙️  Workers: {summary['workers']}")
        print(f"📝 Log level: {summary['log_level']}")
        print(f"📁 Results: {summary['results_directory']}")
        print(f"🧪 Experiments: {summary['experiments_directory']}")
        if self.validation_errors:
            print("❌ Configuration errors:")
            for error in self.validation_errors:
                print(f"   - {error}")
        else:
            print("✅ Configuration valid")


# Global configuration instance
simulation_config = SimulationConfig()


def get_config():
    """Get the global configuration instance"""
    return simulation_config
