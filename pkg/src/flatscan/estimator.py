"""Scikit-learn transformer turning shapes into Betti-curve feature vectors."""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .complex import Shape, cubical_from_occupancy
from .grassmann import sample_flats
from .transform import dpht_scan

__all__ = ["DphtFeatures", "check_shapes", "betti_curve"]


def check_shapes(X):
    """Coerce a sequence of shapes or boolean rasters to a list of :class:`Shape`.

    All items must share one ambient dimension.
    """
    if isinstance(X, Shape):
        raise TypeError("expected a sequence of shapes, got a single Shape")
    if isinstance(X, np.ndarray) and X.ndim in (3, 4):
        items = list(X)
    else:
        try:
            items = list(X)
        except TypeError:
            raise TypeError("X must be a sequence of shapes or rasters") from None
    if not items:
        raise ValueError("X is empty")
    shapes = []
    for i, item in enumerate(items):
        if isinstance(item, Shape):
            shapes.append(item)
            continue
        arr = np.asarray(item)
        if arr.ndim not in (2, 3):
            raise ValueError(f"item {i} is a {arr.ndim}-D array; rasters must be 2-D or 3-D")
        if not np.isin(arr, (0, 1)).all():
            raise ValueError(f"item {i} is not a binary raster")
        shapes.append(cubical_from_occupancy(arr.astype(bool)))
    dims = {s.ambient_dim for s in shapes}
    if len(dims) > 1:
        raise ValueError(f"shapes mix ambient dimensions {sorted(dims)}")
    return shapes


def betti_curve(D, grid):
    """Number of diagram points alive at each value of ``grid`` (birth <= r < death)."""
    pts = D.points
    if not len(pts):
        return np.zeros(len(grid), dtype=float)
    alive = (pts[:, 0][None, :] <= grid[:, None]) & (grid[:, None] < pts[:, 1][None, :])
    return alive.sum(axis=1).astype(float)


class DphtFeatures(TransformerMixin, BaseEstimator):
    """Betti curves of distance-to-flat filtrations over a fixed random set of flats.

    ``fit`` draws the flats from a ball big enough for the training shapes;
    ``transform`` scans each shape with those flats and samples every
    diagram's Betti curve on an evenly spaced grid over ``[0, 2 * radius]``.

    Parameters
    ----------
    m : int
        Flat dimension.
    num_flats : int
    resolution : int
        Samples per Betti curve.
    max_degree : int or None
        Defaults to ``m - 1`` (0 for points).
    radius : float or None
        Sampling radius; defaults to the largest bounding radius seen in ``fit``.
    seed : int
    n_jobs : int or None
    """

    def __init__(self, m=1, num_flats=16, resolution=32, max_degree=None, radius=None, seed=42, n_jobs=None):
        self.m = m
        self.num_flats = num_flats
        self.resolution = resolution
        self.max_degree = max_degree
        self.radius = radius
        self.seed = seed
        self.n_jobs = n_jobs

    def fit(self, X, y=None):
        shapes = check_shapes(X)
        n = shapes[0].ambient_dim
        if not (0 <= self.m < n):
            raise ValueError(f"m must be in [0, {n - 1}]")
        if self.resolution < 1:
            raise ValueError("resolution must be at least 1")
        radius = self.radius if self.radius is not None else max(s.bounding_radius for s in shapes)
        if radius <= 0:
            raise ValueError("all training shapes are empty; set radius explicitly")
        self.ambient_dim_ = n
        self.radius_ = float(radius)
        self.flats_ = sample_flats(self.m, n, self.num_flats, self.radius_, self.seed)
        self.max_degree_ = max(self.m - 1, 0) if self.max_degree is None else int(self.max_degree)
        self.grid_ = np.linspace(0.0, 2.0 * self.radius_, self.resolution)
        self.n_features_out_ = self.num_flats * (self.max_degree_ + 1) * self.resolution
        return self

    def transform(self, X):
        check_is_fitted(self, "flats_")
        shapes = check_shapes(X)
        if shapes[0].ambient_dim != self.ambient_dim_:
            raise ValueError(f"fitted on R^{self.ambient_dim_}, got shapes in R^{shapes[0].ambient_dim}")
        out = np.empty((len(shapes), self.n_features_out_))
        for i, S in enumerate(shapes):
            res = dpht_scan(S, self.m, self.flats_, self.max_degree_, n_jobs=self.n_jobs)
            out[i] = np.concatenate([betti_curve(D, self.grid_) for ds in res.diagrams for D in ds])
        return out

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "flats_")
        return np.array(
            [
                f"flat{i}_deg{k}_r{j}"
                for i in range(self.num_flats)
                for k in range(self.max_degree_ + 1)
                for j in range(self.resolution)
            ],
            dtype=object,
        )
