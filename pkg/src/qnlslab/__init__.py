"""qnlslab: numerical laboratory for u_t = e^{i theta}(u_xx + u^2) on the torus.

theta = 0 is the quadratic heat flow, theta = +-pi/2 the quadratic
Schrodinger flow; the lab evolves the family pseudo-spectrally, hunts the
codimension-1 heat-flow stable manifold in additive families, computes exact
rational charts of invariant manifolds of Galerkin truncations, and extracts
self-similar blowup rates and profiles.
"""

__version__ = "0.1.0"

from .fields import (  # noqa: F401
    FourierField,
    GridField,
    TrappingStatus,
    energy_proportions,
    from_grid,
    l2_norm_sq,
    nonlinear_square,
    sup_norm,
    to_grid,
    trapping_status,
)
from .evolution import (  # noqa: F401
    EvolveConfig,
    TrajectoryRecord,
    etdrk4_step,
    evolve,
    linear_symbol,
    trapping_entry_time,
)
from .galerkin import (  # noqa: F401
    GalerkinSystem,
    SigmaState,
    closed_form_sigma,
    galerkin_rhs,
    integrate_galerkin,
    secular_crossing_times,
)
from .manifold import (  # noqa: F401
    ResonanceSet,
    TaylorModel,
    detect_resonances,
    estimate_radius,
    evaluate_W,
    invariance_residual,
    solve_cohomological,
    solve_sigma_for_constraints,
)
from .hunt import (  # noqa: F401
    FamilySpec,
    FateReport,
    bisect_manifold,
    classify_heat_fate,
    sweep_nls,
)
from .selfsim import (  # noqa: F401
    BlowupFit,
    SelfSimilarFrame,
    fit_blowup_rate,
    rescale_frame,
    track_blowup_points,
    typeI_residual,
)
from .rational import RationalComplex  # noqa: F401
from .recipes import ExperimentConfig, recipe  # noqa: F401
from .runner import run  # noqa: F401
