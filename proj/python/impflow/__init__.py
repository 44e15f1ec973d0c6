"""Importance-aware deadline flow simulator for BCube fabrics."""

from ._impflow import (  # noqa: F401
    SimError,
    Topology,
    average_importance,
    fic,
    final_rates,
    minimal_rate,
    oracle_gap,
    precision_at_k,
    proportional_requests,
    run,
    run_config,
    split_importances,
)

__all__ = [
    "SimError",
    "Topology",
    "average_importance",
    "fic",
    "final_rates",
    "minimal_rate",
    "oracle_gap",
    "precision_at_k",
    "proportional_requests",
    "run",
    "run_config",
    "split_importances",
]
