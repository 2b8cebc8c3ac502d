"""Exact affine deformation and correction of nonholonomic robot trajectories."""

from .trajectory import (
    FrameSample,
    RegularityReport,
    Tolerances,
    Trajectory,
    check_regularity,
    diff_series,
    differentiate,
    frame_at,
    heading,
    inflection_indices,
    load_csv,
    save_csv,
)
from .deform import (
    AffineMap,
    ClassIParams,
    ClassIIParams,
    Uwv6Params,
    admissibility_of_map,
    apply_map,
    apply_piecewise,
    class1_map,
    class2_map,
    compose,
    uwv_map,
)
from .kinematics import (
    CommandProfile,
    RecoveryOptions,
    RobotModel,
    StateSeries,
    car_with_trailers,
    check_admissible,
    correspondence_map,
    integrate,
    is_admissible,
    kinematic_car,
    recover_commands,
    type_1_1,
    type_1_2,
    type_2_0,
    type_2_1,
    type_3_0,
    underwater_3d,
    unicycle,
)
from .fixtures import generate_builtin

__version__ = "0.1.0"
