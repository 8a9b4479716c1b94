"""Finite-ball verification of Hilbert-space embeddings of groups.

Groups, free and amalgamated products, HNN extensions, explicit embeddings,
chain machinery for HNN extensions, conditionally negative definite functions
and a distortion estimator.
"""

from .config import CAPS, TOL
from .errors import (
    BallTooLarge,
    ConfigurationError,
    HscompressError,
    NotCND,
    PreconditionError,
    RadiusExceeded,
)
from .groups import (
    DirectProduct,
    FiniteGroup,
    FreeGroup,
    Group,
    Integers,
    QuotientGroup,
    cyclic,
    enumerate_ball,
    group_from_spec,
    verify_length_axioms,
    word_length,
)
from .constructions import (
    AmalgamatedProduct,
    FiniteCosetApparatus,
    FreeProduct,
    HNNExtension,
    IntegerCosetApparatus,
    amalgam_normal_form,
    britton_normal_form,
    common_part,
    compute_Z,
    construction_from_spec,
    fp_distance,
    hnn_length,
    load_spec,
    recompose_amalgam,
    recompose_britton,
    resolve_construction,
    shipped_specs,
    shortest_blocklength,
)
from .hilbert import (
    KernelUnitFamily,
    SparseVector,
    choose_t,
    exp_inner,
    inner,
    truncated_exp,
)
from .embeddings import (
    DistortionCertificate,
    VectorEmbedding,
    embedding_to_family,
    exactify,
    exactify_constant,
    factor_embedding,
    free_product_embed,
    integer_scale_families,
    quotient_transfer,
    standard_free_product_embedding,
    transfer_certificate,
    vectors_to_embedding,
)
from .hnn_chains import (
    ChainParams,
    ChainSystem,
    chain_lemma_report,
    finite_instance,
    minimal_feasible_m,
    schedule,
    tree_path_distance,
    verify_chains,
)
from .cnd import (
    CNDFunction,
    amalgam_bounds,
    amalgam_cnd,
    check_cnd,
    cocycle,
    cocycle_check,
    gns_embed,
    gns_residuals,
    hnn_bounds,
    hnn_cnd,
    unit_indicator,
)
from .estimator import DistortionProfile, distortion_profile, fit_compression, verify_certificate

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
