"""Exact Floor-ReLU networks that approximate continuous functions on cubes.

Networks carry dyadic-rational weights and are evaluated exactly; builders
return a certificate with the audited size and a rigorous error bound.
"""
from .bitextract import (
    build_bit_locator,
    build_block_extractor,
    build_gate,
    build_point_fitter,
    oracle_extract,
)
from .bounds import (
    bound_corollary1,
    bound_holder,
    bound_parameter_budget,
    bound_theorem1,
    bound_theorem2,
)
from .constructor import (
    Certificate,
    GridSpec,
    SampleTable,
    TargetFunction,
    build_theorem1,
    build_theorem2,
    reparameterize,
    wrap_domain,
)
from .dyadic import BitString, Dyadic, round_down_dyadic, round_nearest_dyadic, round_up_dyadic
from .modulus import ModulusSpec
from .network import (
    ActivationKind,
    Affine,
    Layer,
    Network,
    ObligationError,
    audit,
    compose_serial,
    eval_exact,
    eval_float,
    stack_parallel,
)
from .registry import lookup, registry
from .verification import (
    check_certificate,
    exhaustive_bit_check,
    float_divergence_probe,
    measure_sup_error,
    memorization_demo,
)

__version__ = "0.1.0"

__all__ = [
    "ActivationKind",
    "Affine",
    "audit",
    "BitString",
    "bound_corollary1",
    "bound_holder",
    "bound_parameter_budget",
    "bound_theorem1",
    "bound_theorem2",
    "build_bit_locator",
    "build_block_extractor",
    "build_gate",
    "build_point_fitter",
    "build_theorem1",
    "build_theorem2",
    "Certificate",
    "check_certificate",
    "compose_serial",
    "Dyadic",
    "eval_exact",
    "eval_float",
    "exhaustive_bit_check",
    "float_divergence_probe",
    "GridSpec",
    "Layer",
    "lookup",
    "measure_sup_error",
    "memorization_demo",
    "ModulusSpec",
    "Network",
    "ObligationError",
    "oracle_extract",
    "registry",
    "reparameterize",
    "round_down_dyadic",
    "round_nearest_dyadic",
    "round_up_dyadic",
    "SampleTable",
    "stack_parallel",
    "TargetFunction",
    "wrap_domain",
]
