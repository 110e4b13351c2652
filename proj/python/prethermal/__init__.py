"""Classical Floquet spin chains: exact periodic evolution, effective Hamiltonians and
Monte Carlo references, driven by JSON experiment configurations."""

from ._core import (
    ConfigError,
    ContractError,
    Model,
    __version__,
    defaults,
    list_scenarios,
    load_config,
    run,
    verify_manifest,
)

__all__ = [
    "ConfigError",
    "ContractError",
    "Model",
    "__version__",
    "defaults",
    "list_scenarios",
    "load_config",
    "run",
    "verify_manifest",
]
