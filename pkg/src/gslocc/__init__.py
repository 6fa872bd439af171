"""Symmetric multipartite Gaussian states under Gaussian LOCC.

Covariance matrices use vacuum variance 1 (``x = a + a^dagger``) and mode
ordering ``(x1, p1, ..., xN, pN)``.
"""

from .entanglement import (
    ClassMap,
    EntanglementClass,
    Grid,
    class_map,
    classify,
    is_fully_separable,
    ppt_min_symplectic,
    separability_oracle,
)
from .protocols import (
    NoisePlan,
    NotTransformable,
    QndPlan,
    Reason,
    TargetRatios,
    apply_noise,
    apply_protocol_full,
    apply_qnd,
    plan_noise,
    plan_qnd,
    transform_state,
)
from .states import EffectiveScheme, SymmetricState, build_cm, from_effective, sample_physical, to_effective
from .teleportation import (
    CharlieSetup,
    bipartite_fidelity,
    fidelity,
    fidelity_closed,
    fidelity_vs_g,
    fidelity_vs_squeezing,
    optimal_squeezing,
)

__version__ = "0.1.0"
