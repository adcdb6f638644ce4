"""Stereo depth estimation and touch-plane calibration.

Rectified parallel-axis pinhole pair with a shared focal length: the left
camera sits at the origin looking down +z, the right camera is offset by
the baseline along +x. Depth follows z = f*B/disparity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GeometryError, NoDepthError, TrackingGapError


@dataclass(frozen=True)
class StereoRig:
    f: float = 800.0            # focal length, px
    baseline: float = 60.0      # camera separation, mm
    c_left: tuple[float, float] = (285.0, 150.0)   # principal points, px
    c_right: tuple[float, float] = (285.0, 150.0)

    def __post_init__(self):
        if self.f <= 0:
            raise ValueError("focal length must be positive")
        if self.baseline <= 0:
            raise ValueError("baseline must be positive")


def project_point(p, rig: StereoRig) -> tuple[tuple[float, float], tuple[float, float]]:
    """Forward model: 3D point (mm, left-camera frame) -> (left px, right px)."""
    x, y, z = float(p[0]), float(p[1]), float(p[2])
    if z <= 0:
        raise GeometryError(f"point behind the cameras: z={z}")
    left = (rig.c_left[0] + rig.f * x / z, rig.c_left[1] + rig.f * y / z)
    right = (rig.c_right[0] + rig.f * (x - rig.baseline) / z, rig.c_right[1] + rig.f * y / z)
    return left, right


def triangulate(left, right, rig: StereoRig) -> np.ndarray:
    """Recover the 3D point (mm) seen at `left`/`right` pixel coordinates.

    Raises NoDepthError when disparity <= 0 and TrackingGapError when a
    marker is missing.
    """
    if left is None or right is None:
        raise TrackingGapError("marker missing from one camera")
    ul = left[0] - rig.c_left[0]
    vl = left[1] - rig.c_left[1]
    ur = right[0] - rig.c_right[0]
    disparity = ul - ur
    if disparity <= 0:
        raise NoDepthError(f"disparity {disparity!r} <= 0")
    z = rig.f * rig.baseline / disparity
    return np.array([ul * z / rig.f, vl * z / rig.f, z])


@dataclass(frozen=True)
class TouchPlane:
    """Plane {p : normal . p + d = 0} with unit normal oriented toward the cameras."""

    normal: tuple[float, float, float]
    d: float
    fit_rms: float

    def __post_init__(self):
        n = np.asarray(self.normal)
        if abs(np.linalg.norm(n) - 1.0) > 1e-9:
            raise ValueError("plane normal must be unit length")
        if self.fit_rms < 0:
            raise ValueError("fit_rms must be non-negative")


_COLLINEAR_RTOL = 1e-10


def fit_touch_plane(cloud) -> TouchPlane:
    """Total-least-squares plane through a 3D point cloud.

    Minimizes orthogonal RMS distance (smallest right singular vector of the
    centered cloud). Requires >= 3 non-collinear points. The normal is
    oriented so the cameras (origin) lie on the positive side.
    """
    pts = np.asarray(cloud, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise GeometryError(f"expected an (n, 3) cloud, got shape {pts.shape}")
    n_pts = pts.shape[0]
    if n_pts < 3:
        raise GeometryError(f"need >= 3 points to fit a plane, got {n_pts}")
    centroid = pts.mean(axis=0)
    centered = pts - centroid
    _, s, vt = np.linalg.svd(centered, full_matrices=False)
    if s[1] <= _COLLINEAR_RTOL * max(s[0], 1.0):
        raise GeometryError("degenerate cloud: points are collinear")
    normal = vt[2]
    normal = normal / np.linalg.norm(normal)
    d = -float(normal @ centroid)
    # positive side must contain the cameras at the origin: distance(0) = d
    if d < 0:
        normal = -normal
        d = -d
    fit_rms = float(s[2] / np.sqrt(n_pts))
    return TouchPlane(normal=(float(normal[0]), float(normal[1]), float(normal[2])), d=d, fit_rms=fit_rms)


def plane_distance(p, plane: TouchPlane) -> float:
    """Signed distance (mm), positive on the camera side."""
    n = plane.normal
    return float(n[0] * p[0] + n[1] * p[1] + n[2] * p[2] + plane.d)


def plane_basis(plane: TouchPlane) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic in-plane (u, v) frame: u tracks +x, v tracks +y.

    For a fronto-parallel plane this is exactly (e_x, e_y), so in-plane
    finger displacement maps to (right, down) in screen convention.
    """
    n = np.asarray(plane.normal)
    ex = np.array([1.0, 0.0, 0.0])
    u = ex - (ex @ n) * n
    nu = np.linalg.norm(u)
    if nu < 1e-12:
        raise GeometryError("plane normal is parallel to +x; no stable in-plane frame")
    u = u / nu
    v = np.cross(n, u)
    if v[1] < 0:
        v = -v
    return u, v
