"""Generalized configuration spaces W_{k,n}(M) of R^d, S^m and RP^m.

Submodules:

    geometry      specs, configurations, rank and membership
    bundle        retractions, sections, trivializations, projective frames
    arrangements  degeneracy sets Q and the graphs of their complements
    clifford      exact blades and dense multivectors
    paths         sampled paths, named loops, covering and spin lifts
    groups        finite groups and the spin groups pi_1(W_{m,m}(RP^m))
    homotopy      the symbolic homotopy-group calculator
    verify        the acceptance checks
    cli           command-line entry point
"""

from .errors import (
    BoundaryError,
    ClassificationError,
    ConfSpaceError,
    DegenerateInputError,
    DisconnectedGraphError,
    InputError,
    MeshError,
    SamplingError,
    UnsupportedError,
)
from .geometry import (
    Ambient,
    Configuration,
    SpaceSpec,
    Tolerance,
    canonical_base,
    gram_schmidt,
    is_member,
    rank,
    sample,
)

__version__ = "0.1.0"

__all__ = [
    "Ambient", "Configuration", "SpaceSpec", "Tolerance",
    "canonical_base", "gram_schmidt", "is_member", "rank", "sample",
    "ConfSpaceError", "InputError", "DegenerateInputError", "UnsupportedError",
    "SamplingError", "BoundaryError", "MeshError", "ClassificationError",
    "DisconnectedGraphError",
]
