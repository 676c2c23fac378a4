"""4D driving-scene reconstruction and controllable keyframe rendering."""

from ._drive4d import (
    Drive4dError,
    Intrinsics,
    RigidTransform,
    evaluate_sequence,
    lift,
    load_cloud,
    project,
    psnr,
    rigid_solve,
    run_cli,
    ssim,
    synth_generate,
)

__all__ = [
    "Drive4dError",
    "Intrinsics",
    "RigidTransform",
    "evaluate_sequence",
    "lift",
    "load_cloud",
    "project",
    "psnr",
    "rigid_solve",
    "run_cli",
    "ssim",
    "synth_generate",
]
