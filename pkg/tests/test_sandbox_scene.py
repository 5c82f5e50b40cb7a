"""Scene, camera, trajectory, and observation tests."""

import numpy as np
import pytest

from xrmimo.exceptions import ConfigurationError, FramingError
from xrmimo.sandbox import (
    Box,
    CameraModel,
    GroundTruthTrajectory,
    MIN_DESCRIPTOR_HAMMING,
    Scene,
    default_bounds,
    descriptor_distances,
    generate_scene,
    generate_trajectory,
    load_trajectory_file,
    observe,
    write_trajectory_file,
)


@pytest.fixture(scope="module")
def camera():
    return CameraModel()


def axis_scene(extra_landmarks=()):
    """Scene with one landmark straight ahead of an identity-pose camera."""
    positions = np.array([[0.0, 0.0, 1.0], [0.4, 0.1, 2.0], [-0.3, 0.2, 3.0],
                          [0.1, -0.2, 1.5], *extra_landmarks])
    n = len(positions)
    rng = np.random.default_rng(0)
    descriptors = rng.integers(0, 256, (n, 32), dtype=np.uint8)
    # Spread descriptors far apart by construction for test determinism.
    for i in range(n):
        descriptors[i, :8] = 0
        descriptors[i, i % 8] = 0xFF
    bounds = Box(lo=np.array([-5.0, -5.0, -5.0]), hi=np.array([5.0, 5.0, 5.0]))
    return Scene(positions=positions,
                 descriptors=descriptors,
                 intensities=rng.integers(0, 256, n, dtype=np.uint8),
                 bounds=bounds)


IDENTITY_QUAT = np.array([0.0, 0.0, 0.0, 1.0])


class TestCamera:
    def test_project_back_project_round_trip(self, camera):
        rng = np.random.default_rng(1)
        depths = rng.uniform(camera.depth_min, camera.depth_max, 200)
        pts = np.column_stack([rng.uniform(-1, 1, 200), rng.uniform(-1, 1, 200), depths])
        pixels = camera.project(pts)
        restored = camera.back_project(pixels, depths)
        assert np.abs(restored - pts).max() < 1e-9

    def test_optical_axis_lands_on_principal_point(self, camera):
        pixel = camera.project(np.array([[0.0, 0.0, 1.0]]))
        assert pixel[0] == pytest.approx([camera.cx, camera.cy])

    @pytest.mark.parametrize("kwargs", [
        {"fx": 0.0}, {"cx": 1000.0}, {"depth_min": 0.0}, {"depth_min": 11.0},
        {"width": 0},
    ])
    def test_validation(self, kwargs):
        with pytest.raises(ConfigurationError):
            CameraModel(**kwargs)


class TestScene:
    def test_generate_deterministic(self):
        a = generate_scene(64, rng=5)
        b = generate_scene(64, rng=5)
        assert np.array_equal(a.positions, b.positions)
        assert np.array_equal(a.descriptors, b.descriptors)

    def test_minimum_landmarks(self):
        scene = generate_scene(4, rng=6)
        assert scene.n_landmarks == 4
        with pytest.raises(ConfigurationError):
            generate_scene(3, rng=6)

    def test_landmarks_inside_bounds(self):
        scene = generate_scene(128, rng=7)
        assert scene.bounds.contains(scene.positions).all()

    def test_descriptor_separation_exhaustive_large(self):
        scene = generate_scene(2000, rng=8)
        dist = descriptor_distances(scene.descriptors, scene.descriptors)
        np.fill_diagonal(dist, 10_000)
        assert int(dist.min()) >= MIN_DESCRIPTOR_HAMMING

    def test_box_validation(self):
        with pytest.raises(ConfigurationError):
            Box(lo=np.zeros(3), hi=np.zeros(3))

    def test_default_bounds_size(self):
        assert default_bounds().size == pytest.approx([4.2, 2.5, 2.5])


class TestTrajectory:
    def test_two_frames_inside_bounds(self):
        traj = generate_trajectory(2, rng=9)
        assert default_bounds().contains(traj.positions).all()

    def test_unit_quaternions(self):
        traj = generate_trajectory(50, rng=10)
        norms = np.linalg.norm(traj.quaternions, axis=1)
        assert np.abs(norms - 1.0).max() <= 1e-9

    def test_default_run_stays_smooth(self):
        traj = generate_trajectory(100, rng=11)
        steps = np.linalg.norm(np.diff(traj.positions, axis=0), axis=1)
        assert steps.max() < 0.1
        assert default_bounds().contains(traj.positions).all()

    def test_timestamps_strictly_increasing(self):
        traj = generate_trajectory(20, rng=12)
        assert (np.diff(traj.timestamps) > 0).all()

    def test_deterministic(self):
        a = generate_trajectory(30, rng=13)
        b = generate_trajectory(30, rng=13)
        assert np.array_equal(a.positions, b.positions)
        assert np.array_equal(a.quaternions, b.quaternions)

    def test_file_round_trip_exact(self, tmp_path):
        traj = generate_trajectory(25, rng=14)
        path = tmp_path / "traj.txt"
        write_trajectory_file(path, traj)
        loaded = load_trajectory_file(path)
        assert np.array_equal(loaded.timestamps, traj.timestamps)
        assert np.array_equal(loaded.positions, traj.positions)
        assert np.array_equal(loaded.quaternions, traj.quaternions)

    def test_malformed_file(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("0.0 1.0 2.0\n")
        with pytest.raises(FramingError):
            load_trajectory_file(path)
        path.write_text("")
        with pytest.raises(FramingError):
            load_trajectory_file(path)

    def test_validation(self):
        with pytest.raises(ConfigurationError):
            GroundTruthTrajectory(
                timestamps=np.array([0.0, 0.0]),
                positions=np.zeros((2, 3)),
                quaternions=np.tile([0.0, 0.0, 0.0, 1.0], (2, 1)),
            )
        with pytest.raises(ConfigurationError):
            GroundTruthTrajectory(
                timestamps=np.array([0.0, 1.0]),
                positions=np.zeros((2, 3)),
                quaternions=np.tile([0.0, 0.0, 0.0, 2.0], (2, 1)),
            )


class TestObserve:
    def test_on_axis_landmark(self, camera):
        scene = axis_scene()
        feats = observe(scene, camera, np.zeros(3), IDENTITY_QUAT)
        on_axis = [f for f in feats if f.landmark_id == 0]
        assert len(on_axis) == 1
        assert on_axis[0].u == pytest.approx(camera.cx)
        assert on_axis[0].v == pytest.approx(camera.cy)
        assert on_axis[0].depth == pytest.approx(1.0)

    def test_landmark_behind_camera_excluded(self, camera):
        scene = axis_scene(extra_landmarks=[[0.0, 0.0, -2.0]])
        feats = observe(scene, camera, np.zeros(3), IDENTITY_QUAT)
        assert all(f.landmark_id != 4 for f in feats)

    def test_landmark_beyond_depth_range_excluded(self, camera):
        scene = axis_scene(extra_landmarks=[[0.0, 0.0, 20.0], [0.0, 0.0, 0.1]])
        feats = observe(scene, camera, np.zeros(3), IDENTITY_QUAT)
        ids = {f.landmark_id for f in feats}
        assert 4 not in ids and 5 not in ids

    def test_descriptor_and_intensity_copied(self, camera):
        scene = axis_scene()
        feats = observe(scene, camera, np.zeros(3), IDENTITY_QUAT)
        for f in feats:
            assert f.descriptor == scene.descriptors[f.landmark_id].tobytes()
            assert f.intensity == scene.intensities[f.landmark_id]

    def test_max_features_prefers_center(self, camera):
        scene = axis_scene()
        feats = observe(scene, camera, np.zeros(3), IDENTITY_QUAT, max_features=2)
        assert len(feats) == 2
        assert feats[0].landmark_id == 0  # on the optical axis

    def test_default_scene_always_has_enough_features(self, camera):
        scene = generate_scene(400, rng=15)
        traj = generate_trajectory(100, rng=16)
        counts = [len(observe(scene, camera, traj.positions[i], traj.quaternions[i]))
                  for i in range(traj.n_frames)]
        assert min(counts) >= 4

    def test_pixels_are_float32_exact(self, camera):
        scene = generate_scene(100, rng=17)
        traj = generate_trajectory(5, rng=18)
        feats = observe(scene, camera, traj.positions[0], traj.quaternions[0])
        for f in feats:
            assert f.u == float(np.float32(f.u))
            assert f.v == float(np.float32(f.v))
