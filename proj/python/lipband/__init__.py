"""Simulators for cooperative Lipschitz bandits without communication."""

from ._lipband import (
    algorithms,
    canonical_config,
    choose_grid_k,
    config_hash,
    run,
)

__all__ = [
    "algorithms",
    "canonical_config",
    "choose_grid_k",
    "config_hash",
    "run",
]
