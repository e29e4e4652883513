from .types import GripperState, RodMaterial, RodState, SimConfig, init_rod
from .sim import (
    ConstraintSet,
    Multipliers,
    bend_residuals,
    eval_bend_twist,
    eval_stretch_shear,
    frame_diagnostics,
    resolve_collisions,
    step_frame,
    stretch_residuals,
    update_grasp,
    xpbd_project,
)

__all__ = [
    "GripperState", "RodMaterial", "RodState", "SimConfig", "init_rod",
    "ConstraintSet", "Multipliers", "eval_bend_twist", "eval_stretch_shear",
    "bend_residuals", "stretch_residuals", "frame_diagnostics",
    "resolve_collisions", "step_frame", "update_grasp", "xpbd_project",
]
