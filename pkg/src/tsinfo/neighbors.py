"""Chebyshev-norm neighbor queries for the nearest-neighbor estimators."""

from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree

BRUTE_FORCE_BELOW = 64


class NeighborIndex:
    """Immutable spatial index over an ``N x d`` sample matrix.

    All distances use the max norm and a query point is never counted as its
    own neighbor. Small inputs (fewer than ``BRUTE_FORCE_BELOW`` points) use a
    dense pairwise scan instead of a kd-tree.
    """

    def __init__(self, points):
        pts = np.array(points, dtype=float, copy=True)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[1] == 0:
            raise ValueError("points must be an N x d matrix with d >= 1")
        pts.setflags(write=False)
        self.points = pts
        self._tree = None
        self._dense = None
        if pts.shape[0] >= BRUTE_FORCE_BELOW:
            self._tree = cKDTree(pts)
        else:
            self._dense = np.abs(pts[:, None, :] - pts[None, :, :]).max(axis=-1)

    def __len__(self):
        return self.points.shape[0]

    def kth_distance(self, k: int) -> np.ndarray:
        """Distance from every point to its k-th nearest other point."""
        n = len(self)
        if not 1 <= k < n:
            raise ValueError(f"k must satisfy 1 <= k < N={n}, got {k}")
        if self._tree is not None:
            # k + 1 because each point finds itself at distance 0
            dist, _ = self._tree.query(self.points, k=k + 1, p=np.inf)
            return dist[:, k]
        return np.sort(self._dense, axis=1)[:, k]

    def count_within(self, radii, strict: bool = True) -> np.ndarray:
        """Per-point count of other points at distance ``< r`` (or ``<= r``)."""
        r = np.broadcast_to(np.asarray(radii, dtype=float), (len(self),))
        if self._tree is not None:
            query_r = np.nextafter(r, -np.inf) if strict else r
            # a negative radius would be rejected by the tree
            query_r = np.maximum(query_r, 0.0)
            counts = self._tree.query_ball_point(
                self.points, query_r, p=np.inf, return_length=True
            ).astype(np.int64)
            counts -= 1
            if strict:
                counts[r <= 0] = 0
            return counts
        if strict:
            counts = (self._dense < r[:, None]).sum(axis=1)
        else:
            counts = (self._dense <= r[:, None]).sum(axis=1)
        # the diagonal (self) satisfies the test whenever r > 0, or r == 0 closed
        self_hit = (r > 0) if strict else (r >= 0)
        return counts - self_hit.astype(np.int64)
