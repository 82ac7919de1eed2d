"""
csvto.configuration
===================

Experiment configuration: structured schemas, file loading and overrides.

Modules
-------
schema
    Structured schemas of the configuration sections.
loader
    Loading, overriding and validating configuration files.
"""

from csvto.configuration.loader import ConfigProvider, load_config
from csvto.configuration.schema import ExperimentConfig

__all__ = ["ConfigProvider", "ExperimentConfig", "load_config"]
