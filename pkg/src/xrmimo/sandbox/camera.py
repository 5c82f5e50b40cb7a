"""Pinhole camera with a bounded depth range."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..exceptions import ConfigurationError


@dataclass(frozen=True)
class CameraModel:
    """640x480 RGB-D style camera; intrinsics are plausible defaults, not measured."""

    width: int = 640
    height: int = 480
    fx: float = 380.0
    fy: float = 380.0
    cx: float = 319.5
    cy: float = 239.5
    depth_min: float = 0.3
    depth_max: float = 10.0

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ConfigurationError("image dimensions must be positive")
        if not (self.fx > 0 and self.fy > 0):
            raise ConfigurationError("focal lengths must be positive")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise ConfigurationError("principal point must lie inside the image")
        if not 0 < self.depth_min < self.depth_max:
            raise ConfigurationError("need 0 < depth_min < depth_max")

    def project(self, points_cam) -> np.ndarray:
        """Camera-frame points (n, 3) with z > 0 to pixel coordinates (n, 2)."""
        pts = np.asarray(points_cam, dtype=float)
        z = pts[..., 2]
        u = self.fx * pts[..., 0] / z + self.cx
        v = self.fy * pts[..., 1] / z + self.cy
        return np.stack([u, v], axis=-1)

    def back_project(self, pixels, depths) -> np.ndarray:
        """Pixels (n, 2) and depths (n,) to camera-frame points (n, 3)."""
        px = np.asarray(pixels, dtype=float)
        z = np.asarray(depths, dtype=float)
        x = (px[..., 0] - self.cx) / self.fx * z
        y = (px[..., 1] - self.cy) / self.fy * z
        return np.stack([x, y, z], axis=-1)
