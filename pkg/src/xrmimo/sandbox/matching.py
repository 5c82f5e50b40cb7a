"""Descriptor matching against a known scene.

The receiver holds the full landmark map, so matching is a nearest-
descriptor search with an absolute distance gate and a second-best margin.
Scene descriptors are pairwise >= 80 apart, which makes uncorrupted
matches unambiguous.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scene import Scene, descriptor_distances

MAX_MATCH_DISTANCE = 64
MIN_SECOND_BEST_MARGIN = 32


@dataclass(frozen=True)
class Correspondence:
    feature_index: int
    landmark_index: int
    pixel: np.ndarray
    depth: float
    world_point: np.ndarray


def match_features(features, scene: Scene) -> list:
    """Accepted feature-to-landmark correspondences.

    A feature matches iff its nearest scene descriptor is within
    ``MAX_MATCH_DISTANCE`` and the second nearest is at least
    ``MIN_SECOND_BEST_MARGIN`` bits farther.  An empty result is valid.
    """
    if not features:
        return []
    desc = np.frombuffer(b"".join(f.descriptor for f in features), dtype=np.uint8)
    desc = desc.reshape(len(features), -1)
    dist = descriptor_distances(desc, scene.descriptors)
    best_idx = np.argmin(dist, axis=1)
    best = dist[np.arange(len(features)), best_idx]
    if scene.n_landmarks >= 2:
        second = np.partition(dist, 1, axis=1)[:, 1]
    else:
        second = np.full(len(features), np.iinfo(np.int32).max)
    accepted = (best <= MAX_MATCH_DISTANCE) & (second >= best + MIN_SECOND_BEST_MARGIN)

    matches = []
    for i in np.flatnonzero(accepted):
        feat = features[i]
        lm = int(best_idx[i])
        matches.append(Correspondence(
            feature_index=int(i),
            landmark_index=lm,
            pixel=np.array([feat.u, feat.v]),
            depth=float(feat.depth),
            world_point=scene.positions[lm].copy(),
        ))
    return matches
