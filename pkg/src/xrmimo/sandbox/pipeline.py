"""End-to-end localisation pipeline with wireless bit errors.

Per frame: observe the scene, serialize the scenario payload, inject
binomial bit errors on the wire bytes, decode with range sanitisation,
match descriptors against the known map, and solve the camera pose.
Frames are independent given their derived random streams.
"""

from __future__ import annotations

import numpy as np

from ..biterrors import corrupt
from ..seeding import seed_sequence
from .camera import CameraModel
from .features import MIN_FEATURES_FOR_POSE, observe
from .matching import match_features
from .payload import decode_payload, encode_payload
from .scene import Scene
from .solver import PoseSolveResult, solve_pose
from .trajectory import GroundTruthTrajectory, TrajectoryEstimate


def run_pipeline(scene: Scene, camera: CameraModel, trajectory: GroundTruthTrajectory,
                 scenario: int, ber: float, rng=0) -> TrajectoryEstimate:
    """Recover the trajectory through the corrupted offloading link.

    Deterministic given ``rng``; each frame consumes its own spawned
    stream, so frame results do not depend on processing order.
    """
    n = trajectory.n_frames
    frame_streams = seed_sequence(rng).spawn(n)

    positions = np.full((n, 3), np.nan)
    quaternions = np.tile(np.array([0.0, 0.0, 0.0, 1.0]), (n, 1))
    inliers = np.zeros(n, dtype=int)
    solved = np.zeros(n, dtype=bool)

    for i in range(n):
        features = observe(scene, camera, trajectory.positions[i], trajectory.quaternions[i])
        if len(features) < MIN_FEATURES_FOR_POSE:
            continue
        payload = encode_payload(features, scenario, camera)
        gen = np.random.default_rng(frame_streams[i])
        received = corrupt(payload, ber, gen)
        decoded = decode_payload(received, scenario, camera)
        matches = match_features(decoded, scene)
        result: PoseSolveResult = solve_pose(matches, camera)
        if result.solved:
            positions[i] = result.position
            quaternions[i] = result.quaternion
            inliers[i] = result.n_inliers
            solved[i] = True

    return TrajectoryEstimate(
        timestamps=trajectory.timestamps.copy(),
        positions=positions,
        quaternions=quaternions,
        inlier_counts=inliers,
        solved=solved,
    )
