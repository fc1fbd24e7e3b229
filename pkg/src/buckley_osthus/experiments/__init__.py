"""Monte Carlo ensembles, exact enumeration, perturbation audits and stable covers."""

from .cover import StableCover, build_stable_cover, check_stability, check_witness
from .ensemble import (
    EnsembleReport,
    EnsembleSpec,
    ReplicaError,
    concentration_probe,
    fit_power_law,
    run_ensemble,
)
from .exact import exact_small_n, sampler_graph_law, sequential_graph_law
from .perturbation import lipschitz_audit, lipschitz_bound, perturb_one_coordinate, perturb_sequence

__all__ = [
    "EnsembleReport",
    "EnsembleSpec",
    "ReplicaError",
    "StableCover",
    "build_stable_cover",
    "check_stability",
    "check_witness",
    "concentration_probe",
    "exact_small_n",
    "fit_power_law",
    "lipschitz_audit",
    "lipschitz_bound",
    "perturb_one_coordinate",
    "perturb_sequence",
    "run_ensemble",
    "sampler_graph_law",
    "sequential_graph_law",
]
