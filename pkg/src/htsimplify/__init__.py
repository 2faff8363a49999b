"""Fractal-guided polyline simplification.

Head/tail breaks over recursive vertex measures, alongside Douglas-Peucker
and Visvalingam-Whyatt, with exact Koch curves as reference fixtures.
"""

__version__ = "0.1.0"

from .exceptions import *  # noqa: F401,F403
from .geometry import (
    Point,
    Polyline,
    Segment,
    get_tolerance,
    perpendicular_distance,
    polyline_length,
    segments_intersect,
    set_tolerance,
    tolerance,
    triangle_area,
    turn_angle,
)
from .koch import KochSpec, TriangleInventory, koch_curve, koch_drop_levels, triangle_inventory
from .scaling import (
    DividerResult,
    DividerSample,
    HeadTailClassification,
    RankSize,
    divider_dimension,
    divider_walk,
    fit_dimension,
    head_tail_breaks,
    ht_index,
    rank_size,
)
from .simplify import (
    MeasureKind,
    MeasureTree,
    ScalingReport,
    SimplificationResult,
    assess_scaling_retention,
    compare_scaling,
    detect_self_intersections,
    measure_tree,
    repair_crossings,
    simplify_dp,
    simplify_ht,
    simplify_vw,
    simplify_vw_count,
)
from .io import (
    Feature,
    FeatureSet,
    dumps_features,
    parse_features,
    read_features,
    render_rank_size,
    render_svg,
    write_features,
)
from .estimators import (
    DividerDimension,
    DouglasPeuckerSimplifier,
    HeadTailBreaks,
    HeadTailSimplifier,
    VisvalingamWhyattSimplifier,
)
