"""Free metaplectic transforms, convolution operators and spectral filtering."""

from .errors import (
    BadBounds,
    BadParams,
    ConstructionFailed,
    DegenerateCase,
    DimMismatch,
    FmtError,
    FormatError,
    Fault,
    GridMismatch,
    NotSymplectic,
    OffGrid,
    ShapeMismatch,
    SingularB,
    ZeroReference,
)
from .symplectic import (
    SymplecticMatrix,
    constraint_residuals,
    from_free_params,
    from_special,
    ft_matrix,
    inverse,
    nonseparable_frft,
    nonseparable_fresnel,
    random_symplectic,
    separable_frft,
    separable_fresnel,
    separable_lct,
    validate,
)
from .sigspace import (
    Grid,
    Signal,
    add,
    constant_signal,
    l2_norm,
    make_chirp,
    make_delta,
    make_gaussian,
    mul,
    riemann_weight,
    scale,
    scale_grid,
)
from .fmt_core import (
    FmtPlan,
    fast_tier_description,
    fmt_direct,
    fmt_fast,
    ifmt,
    kernel_eval,
)
from .report import VerifyReport, signal_discrepancy
from .convolution import (
    TranslationPlan,
    conv_first_spatial,
    conv_first_spectral,
    conv_second,
    gen_translate,
    phase_factor_deviation,
    verify_product_theorem,
    verify_theorem1,
    verify_theorem2,
)
from .filtering import (
    DenoiseScenario,
    RegionMask,
    box_mask,
    build_demo,
    multiplicative_filter,
    snr_db,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
