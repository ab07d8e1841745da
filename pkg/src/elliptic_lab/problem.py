"""Problem descriptors: dimension, weight, nonlinearity, and the compact set."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class Origin:
    """The single point at the origin."""


@dataclass(frozen=True)
class Ball:
    """Closed ball of the given radius centered at the origin."""

    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise DomainError("ball radius must be positive")


@dataclass(frozen=True)
class PointSet:
    """A finite set of pairwise distinct points."""

    centers: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        centers = tuple(tuple(float(c) for c in pt) for pt in self.centers)
        object.__setattr__(self, "centers", centers)
        if not centers:
            raise DomainError("point set must be nonempty")
        dims = {len(pt) for pt in centers}
        if len(dims) != 1:
            raise DomainError("all centers must share one dimension")
        arr = np.asarray(centers)
        for i in range(len(centers)):
            for j in range(i + 1, len(centers)):
                if np.linalg.norm(arr[i] - arr[j]) == 0.0:
                    raise DomainError("centers must be pairwise distinct")

    def as_array(self) -> np.ndarray:
        return np.asarray(self.centers, dtype=float)

    def min_separation(self) -> float:
        arr = self.as_array()
        if len(arr) == 1:
            return np.inf
        d = np.inf
        for i in range(len(arr)):
            for j in range(i + 1, len(arr)):
                d = min(d, float(np.linalg.norm(arr[i] - arr[j])))
        return d


KSet = Origin | Ball | PointSet


@dataclass(frozen=True)
class ProblemSpec:
    """Dimension N, weight phi, nonlinearity f, and compact set K."""

    N: int
    phi: object
    f: object
    K: KSet

    def __post_init__(self):
        if self.N < 2:
            raise DomainError("dimension must be >= 2")
        if not isinstance(self.K, (Origin, Ball, PointSet)):
            raise DomainError("K must be Origin, Ball, or PointSet")
        if isinstance(self.K, PointSet) and len(self.K.centers[0]) != self.N:
            raise DomainError("point-set centers must live in dimension N")

    def delta_radial(self, r: np.ndarray) -> np.ndarray:
        """Distance to the boundary of K along a ray from the origin."""
        r = np.asarray(r, dtype=float)
        if isinstance(self.K, Origin):
            return r
        if isinstance(self.K, Ball):
            d = r - self.K.radius
            if np.any(d <= 0):
                raise DomainError("radial distance defined outside the ball only")
            return d
        raise DomainError("point sets have no radial distance function")

    def delta_points(self, x: np.ndarray) -> np.ndarray:
        """delta_K at arbitrary points (rows of x) for a point-set K or the origin."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if isinstance(self.K, Origin):
            return np.linalg.norm(x, axis=1)
        if isinstance(self.K, PointSet):
            centers = self.K.as_array()
            d = np.full(x.shape[0], np.inf)
            for a in centers:
                d = np.minimum(d, np.linalg.norm(x - a[None, :], axis=1))
            return d
        raise DomainError("delta_points supports Origin and PointSet")
