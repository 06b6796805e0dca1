"""Website discovery from a handful of seed sites."""

from ._disco import (
    ConfigError,
    DiscoError,
    MetricError,
    SimWeb,
    SpecError,
    coverage,
    discover,
    ensemble_rank,
    harvest_rate,
    mean_rank,
    median_rank,
    normalize_site_key,
    parse_page,
    precision_at_k,
    rank,
    run_cli,
    select_operator,
    tokenize,
)

__all__ = [
    "ConfigError",
    "DiscoError",
    "MetricError",
    "SimWeb",
    "SpecError",
    "coverage",
    "discover",
    "ensemble_rank",
    "harvest_rate",
    "mean_rank",
    "median_rank",
    "normalize_site_key",
    "parse_page",
    "precision_at_k",
    "rank",
    "run_cli",
    "select_operator",
    "tokenize",
]
