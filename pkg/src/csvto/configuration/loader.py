"""
csvto.configuration.loader
==========================

Loading, overriding and validating experiment configuration.

Files are parsed with PyYAML (JSON is accepted as a YAML subset), merged
onto the structured schema in struct mode, then overridden with a dot-list
(``experiment.seeds=[3]``). Every failure is reported as a
`ConfigurationError` naming the offending key or line.

Classes
-------
ConfigProvider
    OmegaConf-backed access to a resolved configuration.

Functions
---------
load_config
    Load a configuration file with overrides.
"""

import logging
from dataclasses import asdict
from pathlib import Path
from typing import Any, Dict, Optional, Sequence

import yaml
from omegaconf import DictConfig, OmegaConf
from omegaconf.errors import OmegaConfBaseException

from csvto.baselines.mppi import MppiConfig
from csvto.benchmarks.quadrotor import QuadrotorParams
from csvto.configuration.schema import INITIALIZATIONS, PROBLEMS, SOLVERS, ExperimentConfig
from csvto.core.errors import ConfigurationError, CsvtoError
from csvto.solver.config import SolverConfig

logger = logging.getLogger(__name__)


def _read_mapping(path: Path) -> Dict[str, Any]:
    if not path.exists():
        raise ConfigurationError(f"Configuration file not found: {path}", path=str(path))
    try:
        data = yaml.safe_load(path.read_text())
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise ConfigurationError(f"Cannot parse configuration file: {path}", path=str(path), line=line) from e
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigurationError("Configuration file must contain a mapping", path=str(path))
    return data


def _merge(*layers: Any) -> DictConfig:
    schema = OmegaConf.structured(ExperimentConfig)
    OmegaConf.set_struct(schema, True)
    try:
        return OmegaConf.merge(schema, *layers)
    except OmegaConfBaseException as e:
        key = getattr(e, "full_key", None)
        raise ConfigurationError(f"Invalid configuration: {e}", config_key=key) from e


def _check_choices(cfg: DictConfig) -> None:
    choices = {
        "problem.name": (cfg.problem.name, PROBLEMS),
        "experiment.solver": (cfg.experiment.solver, SOLVERS),
        "experiment.init": (cfg.experiment.init, INITIALIZATIONS),
    }
    for key, (value, allowed) in choices.items():
        if value not in allowed:
            raise ConfigurationError(f"Unknown value '{value}'", config_key=key, allowed=list(allowed))
    if not cfg.experiment.seeds:
        raise ConfigurationError("At least one seed is required", config_key="experiment.seeds")
    if cfg.experiment.steps < 1:
        raise ConfigurationError("Step count must be positive", config_key="experiment.steps")


class ConfigProvider:
    """
    OmegaConf-backed access to a resolved experiment configuration.

    Parameters
    ----------
    config : DictConfig
        Merged configuration in struct mode.

    Examples
    --------
    >>> provider = load_config(None, ["problem.name=toy2d"])
    >>> provider.get("problem.name")
    'toy2d'
    """

    def __init__(self, config: DictConfig) -> None:
        self._config = config

    @property
    def config(self) -> DictConfig:
        return self._config

    def get(self, path: str) -> Any:
        """
        Retrieve a value by dotted path.

        Raises
        ------
        ConfigurationError
            If the path does not exist.
        """
        marker = object()
        value = OmegaConf.select(self._config, path, default=marker)
        if value is marker:
            raise ConfigurationError("Unknown configuration key", config_key=path)
        return value

    def to_dict(self) -> Dict[str, Any]:
        """Resolved plain-container representation."""
        return OmegaConf.to_container(self._config, resolve=True)  # type: ignore[return-value]

    def snapshot(self, path: Path) -> None:
        """Write the resolved configuration as YAML."""
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        OmegaConf.save(self._config, path, resolve=True)

    def experiment(self) -> ExperimentConfig:
        """Typed view of the configuration."""
        return OmegaConf.to_object(self._config)  # type: ignore[return-value]

    def solver_config(self, seed: int = 0) -> SolverConfig:
        """
        Solver settings for one trial.

        The trial seed is added to ``solver.rng_seed`` so trials draw
        independent particle streams.
        """
        section = asdict(self.experiment().solver)
        section["rng_seed"] += seed
        return _build(SolverConfig, section, "solver")

    def baseline_config(self, seed: int = 0) -> MppiConfig:
        """MPPI settings for one trial."""
        section = asdict(self.experiment().baseline)
        section["rng_seed"] += seed
        return _build(MppiConfig, section, "baseline")

    def quadrotor_params(self) -> QuadrotorParams:
        """Quadrotor parameters from the problem section."""
        problem = self.experiment().problem
        return _build(
            QuadrotorParams,
            {
                "dt": problem.dt,
                "horizon": problem.horizon,
                "surface_lengthscale": problem.surface_lengthscale,
                "surface_seed": problem.surface_seed,
                "obstacle_radius": problem.obstacle_radius,
                "obstacle_speed": problem.obstacle_speed,
                "second_order_dynamics": problem.second_order_dynamics,
                "likelihood_temperature": problem.likelihood_temperature,
            },
            "problem",
        )


def _build(cls: Any, values: Dict[str, Any], section: str) -> Any:
    try:
        return cls(**values)
    except ConfigurationError:
        raise
    except CsvtoError as e:
        raise ConfigurationError(str(e), config_key=section) from e


def load_config(path: Optional[Path] = None, overrides: Sequence[str] = ()) -> ConfigProvider:
    """
    Load a configuration file with overrides.

    Parameters
    ----------
    path : Optional[Path]
        YAML or JSON file; None uses the defaults only.
    overrides : Sequence[str]
        Dot-list overrides applied last, e.g. ``["experiment.seeds=[3]"]``.

    Returns
    -------
    ConfigProvider
        The validated configuration.

    Raises
    ------
    ConfigurationError
        On a missing or unparsable file, unknown keys, wrong types or unknown
        problem/solver names.
    """
    layers = []
    if path is not None:
        layers.append(_read_mapping(Path(path)))
    if overrides:
        try:
            layers.append(OmegaConf.from_dotlist(list(overrides)))
        except OmegaConfBaseException as e:
            raise ConfigurationError(f"Invalid override: {e}", overrides=list(overrides)) from e
    config = _merge(*layers)
    _check_choices(config)
    logger.debug("Loaded configuration from %s with %d overrides", path or "defaults", len(overrides))
    return ConfigProvider(config)
