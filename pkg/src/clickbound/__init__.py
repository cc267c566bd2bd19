"""Upper bounds on the click probability of a finite-size local detector
in a coherent state of the massless scalar field, given its dark-count
probability."""

__version__ = "0.1.0"

from .bound import (  # noqa: E402
    BoundResult,
    ZetaSearchSpec,
    approx_error,
    bound_curve,
    bound_min,
    generic_bound,
    norm_factor,
    p_ideal,
)
from .special import InvalidParameterError  # noqa: E402
from .testfn import ModelParams, onshell_ft, smearing_f  # noqa: E402
from .wightman import (  # noqa: E402
    OverlapTable,
    TableSettings,
    boosted_overlap,
    build_overlap_table,
    load_or_build_table,
    w2_self,
)

__all__ = [
    "BoundResult",
    "InvalidParameterError",
    "ModelParams",
    "OverlapTable",
    "TableSettings",
    "ZetaSearchSpec",
    "approx_error",
    "boosted_overlap",
    "bound_curve",
    "bound_min",
    "build_overlap_table",
    "generic_bound",
    "load_or_build_table",
    "norm_factor",
    "onshell_ft",
    "p_ideal",
    "smearing_f",
    "w2_self",
]
