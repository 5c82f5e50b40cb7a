"""Trajectory accuracy metrics.

Translation-only absolute trajectory error after a least-squares
similarity alignment over all solved poses, percentage errors against a
per-trajectory baseline with two-level averaging, and bootstrap
aggregation across trajectories.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import AlignmentError
from .seeding import as_generator

_DEGENERACY_RTOL = 1e-9


@dataclass(frozen=True)
class AteResult:
    """Translation RMSE after alignment, with the transform that achieved it."""

    rmse: float
    n_poses: int
    n_dropped: int
    rotation: np.ndarray
    translation: np.ndarray
    scale: float

    def __post_init__(self):
        if self.rmse < 0:
            raise ValueError("rmse must be >= 0")
        if not self.scale > 0:
            raise ValueError("scale must be positive")
        r = np.asarray(self.rotation, dtype=float)
        if np.abs(r @ r.T - np.eye(3)).max() > 1e-9 or abs(np.linalg.det(r) - 1.0) > 1e-9:
            raise ValueError("rotation must be orthonormal with determinant +1")


@dataclass(frozen=True)
class BootstrapStats:
    mean: float
    std: float
    ci_low: float
    ci_high: float
    n_draws: int


def umeyama_align(estimated, ground_truth, with_scale: bool = True):
    """Least-squares similarity transform mapping ``estimated`` onto ``ground_truth``.

    Returns (rotation, translation, scale) minimising
    sum ||gt_i - (s R est_i + t)||^2, with the usual SVD reflection
    correction.  Raises AlignmentError for fewer than 3 points or a
    configuration of rank < 2 (collinear or coincident points).
    """
    est = np.asarray(estimated, dtype=float)
    gt = np.asarray(ground_truth, dtype=float)
    if est.shape != gt.shape or est.ndim != 2 or est.shape[1] != 3:
        raise AlignmentError(f"point sets must both be (n, 3), got {est.shape} and {gt.shape}")
    n = est.shape[0]
    if n < 3:
        raise AlignmentError(f"need at least 3 correspondences, got {n}")

    mu_est = est.mean(axis=0)
    mu_gt = gt.mean(axis=0)
    centred_est = est - mu_est
    centred_gt = gt - mu_gt
    var_est = float(np.mean(np.sum(centred_est**2, axis=1)))
    cov = centred_gt.T @ centred_est / n
    u, d, vt = np.linalg.svd(cov)
    if var_est <= 0 or d[1] <= _DEGENERACY_RTOL * max(d[0], np.finfo(float).tiny):
        raise AlignmentError("degenerate point configuration (rank < 2)")
    sign = np.eye(3)
    if np.linalg.det(u) * np.linalg.det(vt) < 0:
        sign[2, 2] = -1.0
    rotation = u @ sign @ vt
    scale = float(np.trace(np.diag(d) @ sign) / var_est) if with_scale else 1.0
    translation = mu_gt - scale * (rotation @ mu_est)
    return rotation, translation, scale


def _nearest_timestamps(reference: np.ndarray, queries: np.ndarray):
    """Index of the nearest reference timestamp for each query, plus the gap."""
    idx = np.searchsorted(reference, queries)
    idx = np.clip(idx, 1, len(reference) - 1)
    left = reference[idx - 1]
    right = reference[idx]
    use_left = (queries - left) <= (right - queries)
    nearest = np.where(use_left, idx - 1, idx)
    return nearest, np.abs(reference[nearest] - queries)


def ate_translation(estimate, ground_truth, with_scale: bool = True) -> AteResult:
    """Translation ATE of an estimate against ground truth.

    Solved estimate poses are associated to the nearest ground-truth
    timestamp within half a frame period; unmatched ones are dropped and
    counted.  Needs at least 3 associated poses.
    """
    est_t = np.asarray(estimate.timestamps, dtype=float)
    est_p = np.asarray(estimate.positions, dtype=float)
    solved = np.asarray(getattr(estimate, "solved", np.ones(len(est_t), dtype=bool)), dtype=bool)
    gt_t = np.asarray(ground_truth.timestamps, dtype=float)
    gt_p = np.asarray(ground_truth.positions, dtype=float)
    if len(gt_t) < 2:
        raise AlignmentError("ground truth needs at least 2 poses to define a frame period")
    tolerance = float(np.median(np.diff(gt_t))) / 2.0

    est_idx = np.flatnonzero(solved)
    if est_idx.size == 0:
        raise AlignmentError("no solved poses in the estimate")
    nearest, gap = _nearest_timestamps(gt_t, est_t[est_idx])
    within = gap <= tolerance
    n_dropped = int(np.count_nonzero(~within))
    est_idx = est_idx[within]
    gt_idx = nearest[within]
    if est_idx.size < 3:
        raise AlignmentError(
            f"only {est_idx.size} associated poses; at least 3 are required"
        )
    rotation, translation, scale = umeyama_align(est_p[est_idx], gt_p[gt_idx], with_scale)
    aligned = scale * (est_p[est_idx] @ rotation.T) + translation
    rmse = float(np.sqrt(np.mean(np.sum((gt_p[gt_idx] - aligned) ** 2, axis=1))))
    return AteResult(rmse=rmse, n_poses=int(est_idx.size), n_dropped=n_dropped,
                     rotation=rotation, translation=translation, scale=scale)


def trajectory_error_percentages(run_errors, baselines) -> np.ndarray:
    """Per-trajectory mean percentage deviation from that trajectory's baseline."""
    if len(run_errors) != len(baselines):
        raise ValueError("run_errors and baselines must have equal length")
    if len(baselines) == 0:
        raise ValueError("no trajectories given")
    out = []
    for runs, baseline in zip(run_errors, baselines):
        runs = np.asarray(runs, dtype=float)
        if runs.size == 0:
            raise ValueError("each trajectory needs at least one run error")
        if not baseline > 0:
            raise ValueError("baseline error must be positive for normalisation")
        out.append(float(np.mean(100.0 * (runs - baseline) / baseline)))
    return np.asarray(out)


def normalize_vs_baseline(run_errors, baselines) -> float:
    """Average percentage error: first within, then across trajectories."""
    return float(np.mean(trajectory_error_percentages(run_errors, baselines)))


def bootstrap_stats(values, n_draws: int = 10_000, ci_level: float = 0.95,
                    rng=0) -> BootstrapStats:
    """Bootstrap mean, standard deviation, and percentile CI of a sample mean."""
    vals = np.asarray(values, dtype=float)
    if vals.size == 0:
        raise ValueError("values must be non-empty")
    if n_draws < 1:
        raise ValueError("n_draws must be >= 1")
    if not 0.0 < ci_level < 1.0:
        raise ValueError("ci_level must lie in (0, 1)")
    gen = as_generator(rng)
    idx = gen.integers(0, vals.size, size=(n_draws, vals.size))
    means = vals[idx].mean(axis=1)
    alpha = 100.0 * (1.0 - ci_level) / 2.0
    lo, hi = np.percentile(means, [alpha, 100.0 - alpha])
    return BootstrapStats(mean=float(means.mean()), std=float(means.std(ddof=0)),
                          ci_low=float(lo), ci_high=float(hi), n_draws=n_draws)
