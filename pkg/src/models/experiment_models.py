"""
Experiment configuration models.
"""
from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from channel.doubly_selective import ChannelSpec
from detectors.common import DetectorConfig
from transforms.random_transform import TransformKind
from utils.validation import validate_snr_grid

SCHEMA_VERSION = 1
CONSTELLATIONS = ("bpsk", "qpsk", "16qam", "gaussian")


def _first_problem(error: ValidationError) -> str:
    first = error.errors()[0]
    return str(first.get("ctx", {}).get("error", first["msg"]))


class ExperimentKind(str, Enum):
    BER = "ber"
    SE = "se"
    PA = "pa"
    CAPACITY = "capacity"
    UNIVERSALITY = "universality"
    BENCH = "bench"


class PaScheme(str, Enum):
    AVERAGE = "average"
    MAP = "map"
    CAPACITY = "capacity"
    WATER_FILLING = "water_filling"
    SVD_PARALLEL = "svd_parallel"


class ChannelModel(str, Enum):
    DOUBLY_SELECTIVE = "doubly_selective"
    IDENTITY = "identity"


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON_LINES = "json-lines"


class SystemSettings(BaseModel):
    """Model for the transmission system of one experiment."""
    n: int = Field(default=256, ge=2)
    delta: float = Field(default=1.0, gt=0.0)
    snr_grid_db: List[float] = Field(default_factory=lambda: [10.0])
    constellation: str = "qpsk"
    transform_kind: TransformKind = TransformKind.PERMUTATION_DFT
    channel_model: ChannelModel = ChannelModel.DOUBLY_SELECTIVE
    channel: Optional[ChannelSpec] = None

    @field_validator("snr_grid_db")
    @classmethod
    def _sorted_grid(cls, grid):
        if not validate_snr_grid(grid):
            raise ValueError("snr grid must be nonempty, finite and sorted ascending")
        return grid

    @field_validator("constellation")
    @classmethod
    def _known_constellation(cls, name):
        name = name.lower()
        if name not in CONSTELLATIONS:
            raise ValueError(f"unknown constellation '{name}', expected one of {', '.join(CONSTELLATIONS)}")
        return name

    @model_validator(mode="after")
    def _channel_matches(self):
        if self.channel_model is ChannelModel.IDENTITY:
            if self.delta != 1.0:
                raise ValueError("delta: the identity channel is square, delta must be 1")
            return self
        try:
            if self.channel is None:
                self.channel = ChannelSpec(n=self.n, delta=self.delta)
            elif self.channel.n != self.n or self.channel.delta != self.delta:
                self.channel = ChannelSpec.model_validate({**self.channel.model_dump(), "n": self.n, "delta": self.delta})
        except ValidationError as e:
            raise ValueError(f"channel: {_first_problem(e)}") from e
        return self


class ExperimentConfig(BaseModel):
    """Model for a complete, validated experiment description."""
    schema_version: int = SCHEMA_VERSION
    experiment: ExperimentKind
    system: SystemSettings = Field(default_factory=SystemSettings)
    detector: DetectorConfig = Field(default_factory=DetectorConfig)
    pa_scheme: PaScheme = PaScheme.AVERAGE
    pa_schemes: List[PaScheme] = Field(default_factory=list)
    trials: int = Field(default=10, ge=1)
    seed: int = Field(default=0, ge=0)
    output_path: str = "results/results.csv"
    format: OutputFormat = OutputFormat.CSV
    workers: int = Field(default=1, ge=1)
    max_bit_errors: int = Field(default=500, ge=1)
    sizes: List[int] = Field(default_factory=lambda: [64, 128, 256, 512])
    k_values: List[int] = Field(default_factory=lambda: [1, 2])
    se_iterations: int = Field(default=10, ge=1)

    @field_validator("schema_version")
    @classmethod
    def _known_version(cls, version):
        if version != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema_version {version}, expected {SCHEMA_VERSION}")
        return version

    @field_validator("sizes")
    @classmethod
    def _sizes(cls, sizes):
        if not sizes or any(n < 2 for n in sizes):
            raise ValueError("sizes must be a nonempty list of integers >= 2")
        return sorted(sizes)

    @field_validator("k_values")
    @classmethod
    def _k_values(cls, ks):
        if not ks or any(k < 1 or k > 4 for k in ks):
            raise ValueError("k_values must lie in 1..4")
        return ks

    @model_validator(mode="after")
    def _valid_combination(self):
        schemes = set(self.pa_schemes) | {self.pa_scheme}
        if PaScheme.MAP in schemes and self.system.constellation == "gaussian":
            raise ValueError("pa_scheme: MAP-BER allocation needs a discrete constellation, not gaussian")
        if self.experiment in (ExperimentKind.BER,) and self.system.constellation == "gaussian":
            raise ValueError("constellation: bit error rates need a discrete constellation")
        if self.experiment in (ExperimentKind.UNIVERSALITY, ExperimentKind.BENCH) and self.system.channel is not None:
            for n in self.sizes:
                problem = self.system.channel.model_copy(update={"n": n}).dimension_problem()
                if problem:
                    raise ValueError(f"sizes: {problem}")
        return self

    @property
    def schemes(self) -> List[PaScheme]:
        """Schemes to evaluate, ``pa_scheme`` first."""
        out = [self.pa_scheme]
        out.extend(s for s in self.pa_schemes if s not in out)
        return out
