"""Raster generators for the built-in demo shapes.

All rasters are boolean arrays; a pixel (voxel) is occupied when its centre
satisfies the predicate. Centres are measured from the middle of the raster
box, matching the vertex coordinates of :func:`~flatscan.complex.cubical_from_occupancy`.
"""

import numpy as np

__all__ = ["pixel_centers", "annulus", "disk", "pinhole_disk", "ball", "shell"]


def pixel_centers(shape):
    """Centre coordinates of every cell of a raster, in the complex's (x, y[, z]) frame."""
    idx = np.indices(shape).astype(float) + 0.5
    if len(shape) == 2:
        H, W = shape
        return np.stack([idx[1] - W / 2.0, H / 2.0 - idx[0]], axis=-1)
    D, H, W = shape
    return np.stack([idx[2] - W / 2.0, H / 2.0 - idx[1], idx[0] - D / 2.0], axis=-1)


def _radius(shape, center=None):
    pts = pixel_centers(shape)
    if center is not None:
        pts = pts - np.asarray(center, dtype=float)
    return np.linalg.norm(pts, axis=-1)


def annulus(size=64, outer=24.0, inner=10.0, center=None):
    r = _radius((size, size), center)
    return (r <= outer) & (r >= inner)


def disk(size=64, radius=24.0, center=None):
    return _radius((size, size), center) <= radius


def pinhole_disk(size=64, radius=24.0):
    """Disk with a single unoccupied pixel just up-right of the centre."""
    occ = disk(size, radius)
    occ[size // 2 - 1, size // 2] = False
    return occ


def ball(size=32, radius=14.0):
    return _radius((size, size, size)) <= radius


def shell(size=32, outer=14.0, inner=9.0):
    r = _radius((size, size, size))
    return (r <= outer) & (r >= inner)
