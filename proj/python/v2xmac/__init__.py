"""Analytical MAC models of C-V2X Mode 4 and IEEE 802.11p, with a simulator."""

from ._core import (
    ModelError,
    Scenario,
    adaptive_cam_rate,
    config_keys,
    evaluate,
    oracle_steady_state,
    simulate,
    solve_cam,
    solve_denm,
    solve_queue,
    update_theta,
)

__all__ = [
    "ModelError",
    "Scenario",
    "adaptive_cam_rate",
    "config_keys",
    "evaluate",
    "oracle_steady_state",
    "simulate",
    "solve_cam",
    "solve_denm",
    "solve_queue",
    "update_theta",
]
