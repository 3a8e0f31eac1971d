"""Macroscopic quantum uncertainty e_rho of n-qubit states under local noise."""

from .channels import InstrumentConfig, apply_D, apply_Dl, apply_G, apply_Gl, apply_local, binomial_weight
from .circuits import Circuit, Gate, cat_circuit, random_circuit, run_circuit, simulate, verify_haupt
from .fragility import (
    CommutatorModel,
    EstimateConfig,
    FragilityReport,
    asymptotic_bound,
    bound_table,
    cluster_bound,
    estimate_e,
    gl_bound,
    haupt_x,
    hypergeom_sigma,
    hypersurface_check,
    inner_sup,
    r_wn,
)
from .linalg import hermitian_eigen, jacobi_eigen, operator_norm, trace_norm
from .observables import BlochFamily, averaging_observable, commutator_expectation, std_dev
from .states import pair_mixture, pair_superposition, standard_state, validate_density

__version__ = "0.1.0"
