"""Protograph LDPC toolkit: block, tail-biting, and convolutional codes.

Submodules
----------
protograph  protograph types, validation, JSON IO, graph-cover expansion
unwrap      cutting a protograph into a convolutional band (P_l, P_u)
lift        GF(2) lifting, band/wrap assembly, alist interchange
oracle      exact small-instance spectra and free-distance witnesses
spectral    asymptotic ensemble enumerators, delta_min, bound curves
decode      belief-propagation and sliding-window decoders
sim         BPSK/AWGN Monte Carlo bit-error-rate harness
cli         command-line interface with reproducible run manifests
"""

__version__ = "0.1.0"

from .protograph import (  # noqa: F401
    DegreeProfile,
    Protograph,
    ProtographError,
    degree_profile,
    expand,
    load_protograph,
    rates,
    save_protograph,
)
from .unwrap import (  # noqa: F401
    ConvWindow,
    TrivialCutError,
    Unwrapping,
    conv_window,
    cut,
    derived_params,
    tailbite,
    terminate,
)
from .lift import (  # noqa: F401
    EntryExceedsLiftError,
    LiftSpec,
    SparseBinaryMatrix,
    assemble_tailbiting,
    assemble_window,
    export_alist,
    import_alist,
    lift,
    lift_pair,
)
from .spectral import (  # noqa: F401
    BoundCurve,
    GrowthResult,
    SpectralCurve,
    SpectralOptions,
    check_enumerator,
    conv_bound,
    growth_rate,
    spectral_shape,
)
