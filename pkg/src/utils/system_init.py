"""System initialization utilities."""

from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Tuple, Union

import yaml

from ..harness.orchestrator import ExperimentOrchestrator
from ..pipelines.factory import create_registry
from .config import (
    ExperimentConfig,
    environment_overrides,
    input_hash,
    load_acceptance,
    parse_config,
    parse_config_text,
)
from .errors import ConfigError

QUICK_L = 1 << 14


def cli_overrides(
    seed: Optional[int] = None,
    out: Optional[str] = None,
    workers: Optional[int] = None,
    fmt: Optional[str] = None,
) -> Dict[str, Any]:
    """Environment fallbacks first, then the explicit flags."""
    overrides = environment_overrides()
    flags = {"seed": seed, "output.out": out, "output.workers": workers, "output.format": fmt}
    overrides.update({k: v for k, v in flags.items() if v is not None})
    return overrides


def build_config(path: Union[str, Path], **flags: Any) -> Tuple[ExperimentConfig, str]:
    """
    Parse an experiment file and apply environment and CLI overrides.

    Args:
        path: YAML experiment file
        **flags: seed, out, workers, fmt

    Returns:
        (validated config, git-style hash of the file)
    """
    config = parse_config(path).with_overrides(**cli_overrides(**flags))
    return config, input_hash(path)


def quick(config: ExperimentConfig) -> ExperimentConfig:
    """Scaled-down copy for smoke runs: smaller boxes, grids and ensembles."""
    data = config.model_dump(mode="json")
    data["model"]["L"] = min(data["model"]["L"], QUICK_L)
    grids, walks = data["grids"], data["walks"]
    grids["n_exponents"] = [e for e in grids["n_exponents"] if e <= 10][-4:] or grids["n_exponents"][:1]
    grids["small_jump_exponents"] = [e for e in grids["small_jump_exponents"] if e <= 12][-3:] or grids["small_jump_exponents"][:1]
    grids["t_exponents"] = [e for e in grids["t_exponents"] if e <= 9] or grids["t_exponents"][:1]
    grids["k"] = [k for k in grids["k"] if k <= 8] or grids["k"][:1]
    grids["J"] = [j for j in grids["J"] if j <= 8] or grids["J"][:1]
    limits = {
        "per_n": 100,
        "count": 10,
        "steps": 1 << 12,
        "environments": 5,
        "exploration_walks": 2,
        "fixtures": 10,
        "trials": 2000,
        "samples": 2000,
        "reference_paths": 10_000,
        "reference_n": 1000,
    }
    for key, cap in limits.items():
        walks[key] = min(walks[key], cap)
    data["estimators"]["k_trials"] = min(data["estimators"]["k_trials"], 20_000)
    data["estimators"]["bootstrap_resamples"] = min(data["estimators"]["bootstrap_resamples"], 50)
    data["exploration"]["pilot_samples"] = min(data["exploration"]["pilot_samples"], 300)
    return ExperimentConfig.model_validate(data)


def acceptance_jobs(
    only: Optional[Iterable[int]] = None, scale_down: bool = False, **flags: Any
) -> List[Dict[str, Any]]:
    """
    Orchestrator jobs for the acceptance presets.

    Args:
        only: Criterion numbers to keep; all when omitted
        scale_down: Apply ``quick`` to every preset
        **flags: seed, out, workers, fmt overrides

    Raises:
        ConfigError: a preset fails validation
    """
    keep = set(only or [])
    overrides = cli_overrides(**flags)
    jobs = []
    for preset in load_acceptance():
        if keep and preset["id"] not in keep:
            continue
        try:
            config = parse_config_text(yaml.safe_dump(preset["config"], sort_keys=True))
        except ConfigError as e:
            raise ConfigError(f"acceptance preset {preset['id']}: {e}") from e
        config = config.with_overrides(**overrides)
        if scale_down:
            config = quick(config)
        jobs.append({"config": config, "name": preset["name"], "criterion": preset["id"]})
    if keep and not jobs:
        raise ConfigError(f"no acceptance preset matches {sorted(keep)}")
    return jobs


def create_orchestrator(workers: int = 1, verbose: bool = False, event_callback=None) -> ExperimentOrchestrator:
    """
    Create the experiment orchestrator with the pipeline registry.

    Args:
        workers: Concurrent experiments
        verbose: Whether to enable verbose logging
        event_callback: Optional async callback for progress events

    Returns:
        ExperimentOrchestrator instance
    """
    return ExperimentOrchestrator(
        registry=create_registry(), workers=workers, verbose=verbose, event_callback=event_callback
    )
