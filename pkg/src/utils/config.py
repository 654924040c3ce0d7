"""Experiment configuration: YAML sections merged over the packaged defaults."""

import hashlib
import json
import os
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from ..percolation.model import ModelParams
from .errors import ConfigError

CONFIG_DIR = Path(__file__).resolve().parents[2] / "config"
DEFAULT_CONFIG = CONFIG_DIR / "default.yaml"
ACCEPTANCE_CONFIG = CONFIG_DIR / "acceptance.yaml"

SECTIONS = ("model", "pipeline", "seed", "grids", "walks", "tolerances", "exploration", "estimators", "output", "checks")


class Pipeline(str, Enum):
    STABLE = "stable"
    BROWNIAN = "brownian"
    EXPLORATION = "exploration"
    COUPLING = "coupling"
    HEATKERNEL = "heatkernel"
    CUTPOINTS = "cutpoints"
    KCONSTANT = "kconstant"


class OutputFormat(str, Enum):
    JSON = "json"
    CSV = "csv"
    MD = "md"


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class Grids(_Section):
    n_exponents: List[int] = Field(default=[8, 9, 10, 11, 12, 13, 14], description="Walk lengths 2^e")
    k: List[int] = Field(default=[8, 10, 12], description="Exploration levels")
    t_exponents: List[int] = Field(default=[6, 7, 8, 9, 10, 11, 12], description="Heat-kernel times 2^e")
    small_jump_exponents: List[int] = Field(default=[10, 11, 12, 13, 14, 15, 16])
    J: List[int] = Field(default=[4, 8, 16], description="Type-grid sizes of the K_J sequence")
    marginal_times: List[float] = Field(default=[0.25, 0.5, 1.0])
    s_values: List[float] = Field(default_factory=list, description="Sweep over the tail exponent")

    @field_validator("n_exponents", "k", "t_exponents", "small_jump_exponents", "J", "marginal_times")
    @classmethod
    def _nonempty(cls, value: list) -> list:
        if not value:
            raise ValueError("grid must be nonempty")
        return value

    @property
    def n_grid(self) -> List[int]:
        return [1 << e for e in self.n_exponents]

    @property
    def t_grid(self) -> List[int]:
        return [1 << e for e in self.t_exponents]

    @property
    def small_jump_grid(self) -> List[int]:
        return [1 << e for e in self.small_jump_exponents]


class Walks(_Section):
    per_n: int = Field(default=500, ge=1, description="Walks per grid point of a scaling run")
    count: int = Field(default=50, ge=1, description="Walks of an ensemble")
    steps: int = Field(default=1 << 16, ge=1, description="Length of ensemble walks")
    environments: int = Field(default=1, ge=1, description="Independent environments (seeds)")
    exploration_walks: int = Field(default=8, ge=1)
    fixtures: int = Field(default=50, ge=1, description="Fixtures of the V* and oracle checks")
    trials: int = Field(default=10_000, ge=1, description="Trials per fixture")
    samples: int = Field(default=10_000, ge=1, description="Samples of a tail statistic")
    reference_paths: int = Field(default=100_000, ge=1)
    reference_n: int = Field(default=10_000, ge=1)


class Tolerances(_Section):
    stable_slope: float = 0.15
    brownian_slope: float = 0.05
    variance_spread: float = 0.10
    symmetry: float = 1e-10
    diffusivity: float = 0.15
    geometric_ks: float = 0.02
    heat_kernel_slope: float = 0.20
    small_jump_ratio: float = 0.5
    zmax: float = 0.1
    coupling_success: float = 0.9
    rate_spread: float = 0.05
    h_pass: float = 0.95
    marginal_ks: float = 0.03
    wilson_widths: float = 3.0
    oracle_pass: float = 0.95


class ExplorationKnobs(_Section):
    rho_floor: int = Field(default=2, ge=2)
    gamma: Optional[float] = None
    J: int = Field(default=8, ge=1)
    edge_sampler: str = Field(default="auto", pattern="^(auto|hash|skip)$")
    pilot_samples: int = Field(default=2000, ge=1)
    local_trials: int = Field(default=2000, ge=1)


class EstimatorKnobs(_Section):
    hill_top_fraction: float = Field(default=0.01, gt=0.0, le=0.2)
    bootstrap_resamples: int = Field(default=200, ge=1)
    wilson_z: float = Field(default=1.96, gt=0.0)
    statistic: str = Field(default="median", pattern="^(median|rms)$")
    chi: float = Field(default=0.05, gt=0.0)
    heat_kernel_mode: str = Field(default="exact", pattern="^(exact|monte-carlo)$")
    heat_kernel_trials: int = Field(default=10_000, ge=1)
    k_trials: int = Field(default=200_000, ge=1)
    lq: float = Field(default=2.0, ge=1.0)
    ball_radius: int = Field(default=8, ge=1)
    cap: int = Field(default=16, ge=1)


class Output(_Section):
    out: str = "results"
    format: OutputFormat = OutputFormat.JSON
    workers: int = Field(default=1, ge=1)
    compress: bool = False


class ExperimentConfig(BaseModel):
    """A validated experiment; every section is filled from the defaults."""

    model_config = ConfigDict(extra="forbid")

    model: ModelParams
    pipeline: Pipeline
    seed: int = Field(..., ge=0, lt=1 << 64)
    grids: Grids = Field(default_factory=Grids)
    walks: Walks = Field(default_factory=Walks)
    tolerances: Tolerances = Field(default_factory=Tolerances)
    exploration: ExplorationKnobs = Field(default_factory=ExplorationKnobs)
    estimators: EstimatorKnobs = Field(default_factory=EstimatorKnobs)
    output: Output = Field(default_factory=Output)
    checks: Optional[List[str]] = Field(default=None, description="Subset of the pipeline's checks")

    def canonical(self) -> str:
        return canonical_json(self.model_dump(mode="json"))

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()

    def with_overrides(self, **fields: Any) -> "ExperimentConfig":
        """Copy with dotted overrides, e.g. ``{"output.out": "x", "seed": 3}``; re-validated."""
        data = self.model_dump(mode="json")
        for dotted, value in fields.items():
            if value is None:
                continue
            node = data
            *head, last = dotted.split(".")
            for key in head:
                node = node[key]
            node[last] = value
        return ExperimentConfig.model_validate(data)


def canonical_json(data: Any) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"))


def blob_hash(raw: bytes) -> str:
    """Git-style blob hash of raw input bytes."""
    return hashlib.sha1(b"blob %d\0" % len(raw) + raw).hexdigest()


def load_defaults() -> Dict[str, Any]:
    """Load configuration from YAML file."""
    try:
        with open(DEFAULT_CONFIG, "r") as f:
            return yaml.safe_load(f) or {}
    except FileNotFoundError:
        return {}


def _merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    out = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


def _lift_model_keys(doc: Dict[str, Any]) -> Dict[str, Any]:
    """Accept model fields at the top level (``d: 1`` next to ``pipeline``)."""
    doc = dict(doc)
    lifted = {k: doc.pop(k) for k in list(doc) if k in ModelParams.model_fields}
    if lifted:
        doc["model"] = {**doc.get("model", {}), **lifted}
    return doc


def _line_index(text: str) -> Dict[Tuple[str, ...], int]:
    """Map key paths of a YAML mapping to 1-based line numbers."""
    index: Dict[Tuple[str, ...], int] = {}

    def walk(node, path):
        if isinstance(node, yaml.MappingNode):
            for key, value in node.value:
                here = path + (str(key.value),)
                index[here] = key.start_mark.line + 1
                walk(value, here)

    try:
        walk(yaml.compose(text), ())
    except yaml.YAMLError:
        pass
    return index


def _error_line(loc: Tuple[Any, ...], lines: Dict[Tuple[str, ...], int]) -> Optional[int]:
    path = tuple(str(p) for p in loc)
    candidates = [path]
    if path and path[0] == "model":
        candidates.append(path[1:])
        if len(path) == 1:
            # model-level validators concern the tail exponent
            candidates += [("model", "s"), ("s",)]
    for candidate in candidates:
        while candidate:
            if candidate in lines:
                return lines[candidate]
            candidate = candidate[:-1]
    return None


def parse_config_text(text: str, defaults: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
    """Parse a YAML document, merge it over ``defaults`` and validate.

    Raises:
        ConfigError: malformed YAML, a missing or unknown key, or a value that
            fails validation; carries the offending line when known
    """
    try:
        doc = yaml.safe_load(text) or {}
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        raise ConfigError(f"malformed YAML: {e}", line=mark.line + 1 if mark else None) from e
    if not isinstance(doc, dict):
        raise ConfigError("config must be a mapping of sections")
    lines = _line_index(text)
    unknown = [k for k in doc if k not in SECTIONS and k not in ModelParams.model_fields]
    if unknown:
        raise ConfigError(f"unknown key '{unknown[0]}'", line=lines.get((unknown[0],)))
    merged = _merge(_lift_model_keys(defaults if defaults is not None else load_defaults()), _lift_model_keys(doc))
    try:
        return ExperimentConfig.model_validate(merged)
    except ValidationError as e:
        first = e.errors()[0]
        where = ".".join(str(p) for p in first["loc"])
        kind = "missing required key" if first["type"] == "missing" else first["msg"]
        raise ConfigError(f"{where}: {kind}", line=_error_line(first["loc"], lines)) from e


def parse_config(source: Union[str, Path], defaults: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
    """Read and validate an experiment file.

    Raises:
        ConfigError: the file is missing or invalid
    """
    path = Path(source)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    return parse_config_text(path.read_text(), defaults)


def input_hash(source: Optional[Union[str, Path]]) -> Optional[str]:
    if source is None:
        return None
    return blob_hash(Path(source).read_bytes())


def environment_overrides() -> Dict[str, Any]:
    """Fallbacks from ``LRPLAB_OUT`` and ``LRPLAB_WORKERS``."""
    out: Dict[str, Any] = {}
    if os.getenv("LRPLAB_OUT"):
        out["output.out"] = os.environ["LRPLAB_OUT"]
    if os.getenv("LRPLAB_WORKERS"):
        try:
            out["output.workers"] = int(os.environ["LRPLAB_WORKERS"])
        except ValueError as e:
            raise ConfigError(f"LRPLAB_WORKERS must be an integer, got {os.environ['LRPLAB_WORKERS']!r}") from e
    return out


def load_acceptance(path: Union[str, Path] = ACCEPTANCE_CONFIG) -> List[Dict[str, Any]]:
    """Acceptance presets: a list of {id, name, config, targets}."""
    with open(path, "r") as f:
        presets = yaml.safe_load(f) or {}
    return list(presets.get("presets", []))
