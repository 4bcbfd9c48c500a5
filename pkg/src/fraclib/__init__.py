"""Self-affine fractal functions on interval meshes.

Construction of continuous and discontinuous self-referential interpolants,
certified evaluation and sampling, chaos-game rendering, moment and
integral-transform calculus, Minkowski dimension, and fractal histopolation
(area-matching densities for histograms).
"""

__version__ = "0.1.0"

from .calculus import (
    MomentTable,
    TransformKind,
    assemble_profile,
    moment_oracle,
    moments,
    panel_quadrature,
    transform,
    transform_residual,
)
from .errors import (
    BadData,
    CumulativeMismatch,
    DepthTooLarge,
    DerivativeScaleViolation,
    DomainMismatch,
    EndpointMismatch,
    FraclibError,
    GridMismatch,
    NonMonotonicKnots,
    OutOfDomain,
    ScaleOutOfRange,
    SchemaError,
    SeriesNotApplicable,
    SingularSystem,
    StieltjesPole,
    TooFewKnots,
    ZeroTotalArea,
)
from .evaluate import (
    Address,
    CollageReport,
    EvalResult,
    SampleSet,
    chaos_game,
    collage_bound,
    eval_at,
    grid_points,
    minkowski_dimension,
    panel_oscillation_bound,
    rb_apply,
    sample_grid,
    self_residual,
    sup_bound,
    vertical_distances,
)
from .histopolation import (
    Histogram,
    HistoSolution,
    areas,
    cumulative_data,
    decomposition_residuals,
    histospline,
    histospline_from_data,
    solve_continuous,
    solve_offsets,
    solve_scales,
)
from .poly import PiecewisePolynomial, stitch
from .system import (
    DataSet,
    FractalSystem,
    Partition,
    ScaleFactors,
    Variant,
    VariantReport,
    build_affine_fif,
    build_alpha_fractal,
    build_interpolatory_discontinuous,
    derivative_system,
    knot_values,
    left_knot_values,
    make_partition,
    validate,
)

__all__ = [name for name in dir() if not name.startswith("_")]
