"""Exact Probabilistic Serial assignments, best responses and equilibria."""

from .equilibria import compute_granularity, enumerate_pne, leaf_equilibria, spne_construct, verify_pne
from .model import Instance, PSLabError, social_welfare
from .ps import run_ps
from .relations import Comparison, dl_compare, eu_compare, eu_value
from .strategy import dl_best_response, eu_best_response, replay_path, run_dynamics
from .threat import check_threat_guarantees, threat_profile

__version__ = "0.1.0"

__all__ = [
    "Comparison",
    "Instance",
    "PSLabError",
    "check_threat_guarantees",
    "compute_granularity",
    "dl_best_response",
    "dl_compare",
    "enumerate_pne",
    "eu_best_response",
    "eu_compare",
    "eu_value",
    "replay_path",
    "run_dynamics",
    "run_ps",
    "social_welfare",
    "spne_construct",
    "leaf_equilibria",
    "threat_profile",
    "verify_pne",
]
