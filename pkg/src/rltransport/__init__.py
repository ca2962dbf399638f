"""Transport in lossy dimerized lattices with nonlinear hoppings."""

__version__ = "0.1.0"

from .models import (  # noqa: E402
    CustomState,
    LatticeState,
    LatticeIndexError,
    ModelKind,
    ModelParams,
    ParameterError,
    SingleSite,
    build_state,
    effective_contrast,
    make_params,
    nonlinear_shift,
    rhs,
    winding_number,
)
from .integrate import (  # noqa: E402
    IntegrationDivergedError,
    SimConfig,
    Trajectory,
    convergence_probe,
    default_half_width,
    evolve,
)
from .observables import (  # noqa: E402
    ContrastSeries,
    DisplacementSeries,
    MeanDisplacement,
    TruncationWarning,
    contrast_series,
    displacement_of_time,
    incoherent_reference,
    mean_displacement,
    norm_rate_residual,
    occupancy_mirror_asymmetry,
)
from .sweeps import (  # noqa: E402
    DEFAULT_U_VALUES,
    HeatmapRun,
    SweepCurve,
    SweepPoint,
    SweepResult,
    SweepSpec,
    default_delta_g_grid,
    heatmap_run,
    run_sweep,
)
