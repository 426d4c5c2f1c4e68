"""Convex lattice polygonal lines: exact counts, Gibbs sampling, calibration,
and limit-shape geometry."""

from .lattice import (
    ConvexPolyline,
    MultiplicityDistribution,
    omega_to_polyline,
    polyline_to_omega,
    primitive_vectors_in_box,
    primitive_vectors_by_weight,
)
from .counting import (
    CountTable,
    brute_force_enum,
    count_by_length,
    count_lines_k,
    erdos_lehner_ratio,
    line_length,
    max_vertices,
)
from .specialfn import (
    AsymptoticProfile,
    ZETA2,
    ZETA3,
    c_of_ell,
    e_of_ell,
    polylog,
    zeta,
)
from .gibbs import (
    EnergyModel,
    GibbsParams,
    MomentReport,
    log_partition,
    moments,
    parallel_probability,
    sample_omega,
)
from .calibrate import (
    CalibrationError,
    CalibrationResult,
    CalibrationTarget,
    asymptotic_params,
    exact_calibrate,
    llt_supported,
    predicted_log_pnk,
)
from .shapes import (
    NormalizedPolyline,
    ShapeCurve,
    hausdorff_distance,
    mixed_curve,
    mixed_length,
    normalize,
    overlay_svg,
    parabola_point,
)
from .experiments import (
    SUITE_NAMES,
    enumerate_ne_lines,
    gibbs_parabola_distances,
    jarnik_greedy_vertex_count,
    run_jarnik,
    run_suite,
    sample_valtr,
    typical_vertex_count,
    valtr_parabola_distances,
    valtr_uniformity_chisquare,
)

__version__ = "0.1.0"
