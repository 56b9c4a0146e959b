"""ccpj: simulation, calibration, and gait optimization for
contracting-cord particle-jamming tripod robots."""

from .errors import CcpjError
from .params import (
    BeamParams,
    CalibrationTable,
    Current,
    GaitSignal,
    RobotParams,
    compaction_ratio,
    validate_table,
    weight_bearing_ratio,
)
from .kinematics import (
    StrokeGeometry,
    beta_for_height,
    cycle_speed,
    invert_beta,
    sit_advance,
    stand_advance,
    standing_height,
)
from .beam import (
    BeamShape,
    EquilibriumResult,
    FlexuralModel,
    LoadCase,
    ei_from_apparent,
    equilibrium_shape,
    is_deployed,
    max_chord_deviation,
    stiffness_at,
    three_point_bend,
)
from .gait import (
    ActuatorModel,
    CurrentHeightMap,
    FeasibilityReport,
    Scenario,
    SimTrace,
    SlipModel,
    StaticLoadResult,
    Terrain,
    drag_width,
    gait_width,
    navigate_confined,
    run,
    static_load_check,
    steady_cycle_displacement,
    sweep_period,
)
from .calibrate import (
    CalibrationResult,
    Dataset,
    fit_slip,
    fit_stiffness_table,
    fit_thermal,
    isotonic_nondecreasing,
    load_dataset,
    run_calibration,
)
from .optimize import (
    CurrentSearchResult,
    MaskChoice,
    SearchSpec,
    golden_section_max,
    max_feasible_current,
    optimize_period,
    select_mask,
)
from .config import build_scenario, load_config

__version__ = "0.1.0"

__all__ = [
    "ActuatorModel",
    "BeamParams",
    "BeamShape",
    "CalibrationResult",
    "CalibrationTable",
    "CcpjError",
    "Current",
    "CurrentHeightMap",
    "CurrentSearchResult",
    "Dataset",
    "EquilibriumResult",
    "FeasibilityReport",
    "FlexuralModel",
    "GaitSignal",
    "LoadCase",
    "MaskChoice",
    "RobotParams",
    "Scenario",
    "SearchSpec",
    "SimTrace",
    "SlipModel",
    "StaticLoadResult",
    "StrokeGeometry",
    "Terrain",
    "beta_for_height",
    "build_scenario",
    "compaction_ratio",
    "cycle_speed",
    "drag_width",
    "ei_from_apparent",
    "equilibrium_shape",
    "fit_slip",
    "fit_stiffness_table",
    "fit_thermal",
    "gait_width",
    "golden_section_max",
    "invert_beta",
    "is_deployed",
    "isotonic_nondecreasing",
    "load_config",
    "load_dataset",
    "max_chord_deviation",
    "max_feasible_current",
    "navigate_confined",
    "optimize_period",
    "run",
    "run_calibration",
    "select_mask",
    "sit_advance",
    "stand_advance",
    "standing_height",
    "static_load_check",
    "steady_cycle_displacement",
    "stiffness_at",
    "sweep_period",
    "three_point_bend",
    "validate_table",
    "weight_bearing_ratio",
]
