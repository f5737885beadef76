"""Property generation, checking and verification for MiniSol contracts."""

import json

from ._core import (
    ConfigError,
    Error,
    KnowledgeStore,
    ProviderError,
    SolverError,
    StoreError,
    check_spec,
    default_weights,
    fit_weights,
    rank_topk,
    reference_weights,
    score,
)
from . import _core


def _records(jsonl):
    return [json.loads(line) for line in jsonl.splitlines() if line.strip()]


def verify(contract_path, spec_path, config=None):
    """Verify every property of a spec file; one dict per property."""
    return _records(_core.verify_jsonl(str(contract_path), str(spec_path), None if config is None else str(config)))


def run_pipeline(config, contract_path, function, verify=True):
    """Retrieve, generate, rank and (optionally) verify; one dict per candidate."""
    return _records(_core.pipeline_jsonl(str(config), str(contract_path), function, verify))


__all__ = [
    "ConfigError",
    "Error",
    "KnowledgeStore",
    "ProviderError",
    "SolverError",
    "StoreError",
    "check_spec",
    "default_weights",
    "fit_weights",
    "rank_topk",
    "reference_weights",
    "run_pipeline",
    "score",
    "verify",
]
