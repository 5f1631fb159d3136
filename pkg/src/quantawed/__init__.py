"""Polarization-photon simulations: optimal cloning, quantum weddings and EPR no-signaling."""

from .channels import (
    UNWED,
    KrausChannel,
    MarriageMillSpec,
    MillOutcome,
    clone_ensemble,
    hom_coincidence,
    mandel_clone,
    mill_apply,
    mill_linear_extension,
    validate_channel,
)
from .ensembles import Ensemble, TwoLightKind, ensemble_density, one_light, sample_sequence, two_light
from .epr import ProtocolConfig, ProtocolRecord, mutual_information, run_protocol
from .measurement import OutcomeStats, ensemble_stats, hv_split_probs, measure_single, sample_stats
from .nogo import (
    build_residuals,
    certify_no_fat_light,
    probability_deficit,
    solve_constraint_family,
)
from .qmath import partial_trace, symmetric_projector, tensor_product, validate_density
from .states import (
    Biphoton,
    PhotonState,
    Polarization,
    basis_state,
    biphoton_in_basis,
    epr_state,
    orthogonal_of,
    symmetrize_pair,
)

__version__ = "0.1.0"
