"""Hausdorff moment sequences, the Pascal dimension group and Cantor-set embeddings, in exact arithmetic."""
from .arith import (
    Enclosure,
    GroupElement,
    Subgroup,
    contains,
    evaluate,
    fmt,
    rational_rank,
    round_into,
    sign,
)
from .cantor import (
    CylinderFunction,
    EmbeddingCertificate,
    build_embedding,
    lattice_spacing,
    select_in_intervals,
    verify_embedding,
)
from .errors import (
    DepthCapExceeded,
    DepthExhausted,
    MixedDescriptors,
    MomentlabError,
    NotAMomentVector,
    NotInterior,
    OutOfRange,
    PrecisionExhausted,
    RecurrenceError,
    SpecError,
    TooShort,
)
from .measures import GridWitness, Measure, lp_feasible, mixed_moment, moments_of
from .moments import (
    Classification,
    ExtensionInterval,
    InteriorCertificate,
    Kind,
    MomentVector,
    Verdict,
    classify,
    completely_monotone_prefix,
    derivative,
    extension_interval,
    iterated_difference,
    membership,
)
from .pascal import HomomorphismReport, PascalTable, build_table, gicar_trace, verify_hom
from .perturb import (
    PerturbationRequest,
    PerturbationResult,
    check_result,
    extend,
    interiorize,
    perturb,
    perturb_independent,
    perturb_prefix,
)

__version__ = "0.1.0"
