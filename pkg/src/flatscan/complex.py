"""Finite cell complexes (cubical from rasters, simplicial from meshes) and lower-star filtrations."""

from dataclasses import dataclass, field
from itertools import product
import io
import math

import numpy as np

from .grassmann import distance_to_flat

__all__ = [
    "Shape",
    "FiltrationValues",
    "ParseError",
    "cubical_from_occupancy",
    "simplicial_from_triangles",
    "load_grid",
    "dump_grid",
    "load_off",
    "lower_star",
    "flat_filtration",
    "subcomplex",
    "slice_shape",
    "default_epsilon",
    "betti",
    "euler_characteristic",
]


class ParseError(ValueError):
    """Malformed shape file. ``lineno`` is 1-based, or None when not tied to a line."""

    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


@dataclass(frozen=True, eq=False)
class Shape:
    """A finite closed cell complex with vertex coordinates.

    ``cells[d]`` is an integer array ``(N_d, k_d)`` of vertex ids (``k_d = 2**d``
    for cubes, ``d + 1`` for simplices) and ``faces[d]`` an array
    ``(N_d, f_d)`` of indices into ``cells[d - 1]``. Global cell ids run over
    dimension 0 first, then 1, and so on.
    """

    kind: str
    vertices: np.ndarray
    cells: tuple
    faces: tuple
    occupancy: np.ndarray = None
    bounding_radius: float = field(init=False)

    def __post_init__(self):
        if self.kind not in ("cubical", "simplicial"):
            raise ValueError(f"unknown complex kind {self.kind!r}")
        vertices = np.asarray(self.vertices, dtype=float)
        if vertices.ndim != 2:
            raise ValueError("vertices must be a 2-D array")
        if len(self.cells) != len(self.faces):
            raise ValueError("cells and faces must cover the same dimensions")
        if len(self.cells) - 1 > vertices.shape[1]:
            raise ValueError("cell dimension exceeds ambient dimension")
        vertices.setflags(write=False)
        object.__setattr__(self, "vertices", vertices)
        radius = float(np.linalg.norm(vertices, axis=1).max()) if len(vertices) else 0.0
        object.__setattr__(self, "bounding_radius", radius)

    @property
    def ambient_dim(self):
        return self.vertices.shape[1]

    @property
    def dim(self):
        """Top cell dimension, -1 for the empty complex."""
        for d in range(len(self.cells) - 1, -1, -1):
            if len(self.cells[d]):
                return d
        return -1

    def count(self, d):
        return len(self.cells[d]) if d < len(self.cells) else 0

    @property
    def counts(self):
        return [len(c) for c in self.cells]

    @property
    def is_empty(self):
        return len(self.vertices) == 0

    def offsets(self):
        return np.concatenate([[0], np.cumsum(self.counts)])

    def max_cell_diameter(self):
        """Largest vertex-to-vertex distance within a single cell."""
        best = 0.0
        for cells in self.cells[1:]:
            if not len(cells):
                continue
            pts = self.vertices[cells]
            diff = pts[:, :, None, :] - pts[:, None, :, :]
            best = max(best, float(np.sqrt((diff**2).sum(-1)).max()))
        return best


@dataclass(frozen=True, eq=False)
class FiltrationValues:
    """Per-cell filtration values indexed by global cell id.

    ``order`` sorts cells by (value, dimension, cell id), which places every
    face before its cofaces.
    """

    values: np.ndarray
    dims: np.ndarray
    order: np.ndarray
    offsets: np.ndarray

    def by_dim(self, d):
        return self.values[self.offsets[d] : self.offsets[d + 1]]

    @property
    def vertex_values(self):
        return self.by_dim(0)


def _empty_shape(kind, n):
    cells = tuple(np.zeros((0, 2**d if kind == "cubical" else d + 1), dtype=np.int64) for d in range(n + 1))
    faces = tuple(np.zeros((0, 2 * d if kind == "cubical" else (d + 1 if d else 0)), dtype=np.int64) for d in range(n + 1))
    return Shape(kind, np.zeros((0, n)), cells, faces)


def cubical_from_occupancy(occupancy):
    """Closed cubical complex of the occupied pixels/voxels of a boolean raster.

    Axis 0 of a 2-D raster is the row (y, pointing down the page), axis 1 the
    column (x). A 3-D raster is indexed ``[depth, row, column]`` and depth
    becomes z. Vertices sit on integer corners shifted so the centre of the
    raster box is the origin.
    """
    occ = np.asarray(occupancy).astype(bool)
    k = occ.ndim
    if k not in (2, 3):
        raise ValueError("occupancy must be a 2-D or 3-D array")
    if not occ.any():
        empty = _empty_shape("cubical", k)
        return Shape("cubical", empty.vertices, empty.cells, empty.faces, occupancy=occ)

    # Doubled-coordinate (Khalimsky) grid: odd coordinates are extended axes.
    dshape = tuple(2 * s + 1 for s in occ.shape)
    present = np.zeros(dshape, dtype=bool)
    tops = 2 * np.argwhere(occ) + 1
    for offset in product((-1, 0, 1), repeat=k):
        idx = tops + np.array(offset)
        present[tuple(idx.T)] = True
    coords = np.argwhere(present)
    cell_dim = (coords % 2).sum(axis=1)
    index_map = np.full(dshape, -1, dtype=np.int64)
    by_dim = []
    for d in range(k + 1):
        sel = coords[cell_dim == d]
        index_map[tuple(sel.T)] = np.arange(len(sel))
        by_dim.append(sel)

    corners = by_dim[0] // 2
    if k == 2:
        H, W = occ.shape
        vertices = np.column_stack([corners[:, 1] - W / 2.0, H / 2.0 - corners[:, 0]])
    else:
        D, H, W = occ.shape
        vertices = np.column_stack([corners[:, 2] - W / 2.0, H / 2.0 - corners[:, 1], corners[:, 0] - D / 2.0])

    cells = [np.arange(len(by_dim[0]), dtype=np.int64)[:, None]]
    faces = [np.zeros((len(by_dim[0]), 0), dtype=np.int64)]
    for d in range(1, k + 1):
        sel = by_dim[d]
        rows = np.arange(len(sel))
        odd_axes = np.nonzero(sel % 2)[1].reshape(len(sel), d)
        verts = []
        for signs in product((-1, 1), repeat=d):
            pos = sel.copy()
            for t, s in enumerate(signs):
                pos[rows, odd_axes[:, t]] += s
            verts.append(index_map[tuple(pos.T)])
        cells.append(np.column_stack(verts))
        fcs = []
        for t in range(d):
            for s in (-1, 1):
                pos = sel.copy()
                pos[rows, odd_axes[:, t]] += s
                fcs.append(index_map[tuple(pos.T)])
        faces.append(np.column_stack(fcs))
    return Shape("cubical", vertices, tuple(cells), tuple(faces), occupancy=occ)


def simplicial_from_triangles(points, triangles, recenter=True):
    """Simplicial complex of a triangle mesh with all edges and vertices."""
    points = np.asarray(points, dtype=float)
    tris = np.sort(np.asarray(triangles, dtype=np.int64).reshape(-1, 3), axis=1)
    tris = np.unique(tris, axis=0)
    if recenter and len(points):
        points = points - points.mean(axis=0)
    n = points.shape[1]
    edge_list = np.concatenate([tris[:, [0, 1]], tris[:, [0, 2]], tris[:, [1, 2]]])
    edges, inverse = np.unique(edge_list, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    T = len(tris)
    tri_faces = np.column_stack([inverse[:T], inverse[T : 2 * T], inverse[2 * T :]])
    V = len(points)
    cells = [np.arange(V, dtype=np.int64)[:, None], edges.astype(np.int64), tris]
    faces = [np.zeros((V, 0), dtype=np.int64), edges.astype(np.int64), tri_faces.astype(np.int64)]
    while len(cells) < n + 1:
        d = len(cells)
        cells.append(np.zeros((0, d + 1), dtype=np.int64))
        faces.append(np.zeros((0, d + 1), dtype=np.int64))
    return Shape("simplicial", points, tuple(cells), tuple(faces))


def _lines(text):
    if isinstance(text, str):
        text = io.StringIO(text)
    for lineno, line in enumerate(text, start=1):
        stripped = line.split("#", 1)[0].strip()
        if stripped:
            yield lineno, stripped.split()


def load_grid(text):
    """Parse the ``grid H W`` / ``grid3 D H W`` raster format into a cubical complex.

    ``text`` is a string or a text stream. Rows follow the header, row-major
    (depth-major for 3-D); tokens may be split over lines freely as long as
    each line holds whole rows.
    """
    lines = _lines(text)
    try:
        lineno, header = next(lines)
    except StopIteration:
        raise ParseError("empty grid file", 1) from None
    if header[0] == "grid" and len(header) == 3:
        dims = header[1:]
    elif header[0] == "grid3" and len(header) == 4:
        dims = header[1:]
    else:
        raise ParseError(f"bad header {' '.join(header)!r}, expected 'grid H W' or 'grid3 D H W'", lineno)
    try:
        shape = tuple(int(t) for t in dims)
    except ValueError:
        raise ParseError("grid dimensions must be integers", lineno) from None
    if any(s <= 0 for s in shape):
        raise ParseError("grid dimensions must be positive", lineno)
    width = shape[-1]
    values = []
    for lineno, tokens in lines:
        if len(tokens) % width:
            raise ParseError(f"row length {len(tokens)} does not match width {width}", lineno)
        for tok in tokens:
            if tok not in ("0", "1"):
                raise ParseError(f"token {tok!r} is not 0 or 1", lineno)
            values.append(tok == "1")
    expected = math.prod(shape)
    if len(values) != expected:
        raise ParseError(f"expected {expected} cells, found {len(values)}")
    return cubical_from_occupancy(np.array(values, dtype=bool).reshape(shape))


def dump_grid(occupancy):
    """Serialise a boolean raster to the grid text format."""
    occ = np.asarray(occupancy).astype(bool)
    if occ.ndim == 2:
        header = f"grid {occ.shape[0]} {occ.shape[1]}"
    elif occ.ndim == 3:
        header = f"grid3 {occ.shape[0]} {occ.shape[1]} {occ.shape[2]}"
    else:
        raise ValueError("occupancy must be 2-D or 3-D")
    rows = occ.reshape(-1, occ.shape[-1]).astype(int)
    return "\n".join([header] + [" ".join(map(str, r)) for r in rows]) + "\n"


def load_off(text):
    """Parse an OFF triangle mesh (``OFF`` / ``V F E`` / vertex lines / ``3 i j k`` faces)."""
    lines = _lines(text)
    try:
        lineno, header = next(lines)
    except StopIteration:
        raise ParseError("empty OFF file", 1) from None
    if header[0] != "OFF":
        raise ParseError("missing OFF header", lineno)
    rest = header[1:]
    if not rest:
        try:
            lineno, rest = next(lines)
        except StopIteration:
            raise ParseError("missing counts line") from None
    try:
        nv, nf = int(rest[0]), int(rest[1])
    except (ValueError, IndexError):
        raise ParseError("counts line must be 'V F E'", lineno) from None
    points = []
    for _ in range(nv):
        try:
            lineno, tokens = next(lines)
        except StopIteration:
            raise ParseError(f"expected {nv} vertices, file ended early") from None
        try:
            points.append([float(t) for t in tokens[:3]])
        except ValueError:
            raise ParseError("vertex coordinates must be numbers", lineno) from None
        if len(tokens) < 3:
            raise ParseError("vertex line needs three coordinates", lineno)
    triangles = []
    for _ in range(nf):
        try:
            lineno, tokens = next(lines)
        except StopIteration:
            raise ParseError(f"expected {nf} faces, file ended early") from None
        try:
            ids = [int(t) for t in tokens]
        except ValueError:
            raise ParseError("face indices must be integers", lineno) from None
        if ids[0] != 3 or len(ids) < 4:
            raise ParseError(f"only triangles are supported, got a {ids[0]}-gon", lineno)
        tri = ids[1:4]
        if any(i < 0 or i >= nv for i in tri):
            raise ParseError(f"face index out of range in {tri}", lineno)
        triangles.append(tri)
    return simplicial_from_triangles(np.array(points).reshape(-1, 3), np.array(triangles, dtype=np.int64).reshape(-1, 3))


def lower_star(shape, vertex_value):
    """Extend a vertex function to all cells by the maximum over each cell's vertices.

    ``vertex_value`` is an array with one entry per vertex or a callable
    taking the ``(V, n)`` vertex array.
    """
    if callable(vertex_value):
        vertex_value = vertex_value(shape.vertices)
    f = np.asarray(vertex_value, dtype=float).reshape(-1)
    if f.shape[0] != len(shape.vertices):
        raise ValueError(f"expected {len(shape.vertices)} vertex values, got {f.shape[0]}")
    if not np.all(np.isfinite(f)):
        raise ValueError("vertex values must be finite")
    parts, dims = [], []
    for d, cells in enumerate(shape.cells):
        parts.append(f[cells].max(axis=1) if len(cells) else np.zeros(0))
        dims.append(np.full(len(cells), d, dtype=np.int64))
    values = np.concatenate(parts)
    dims = np.concatenate(dims)
    order = np.lexsort((np.arange(len(values)), dims, values))
    return FiltrationValues(values, dims, order, shape.offsets())


def flat_filtration(shape, P):
    """Lower-star filtration of the distance to the flat ``P``."""
    if P.ambient_dim != shape.ambient_dim:
        raise ValueError(f"flat lives in R^{P.ambient_dim} but the shape in R^{shape.ambient_dim}")
    return lower_star(shape, distance_to_flat(P, shape.vertices))


def subcomplex(shape, masks):
    """Sub-complex keeping the cells selected by ``masks[d]`` (must be closed under faces)."""
    keep = [np.asarray(m, dtype=bool) for m in masks]
    remap = []
    for d, m in enumerate(keep):
        r = np.full(len(m), -1, dtype=np.int64)
        r[m] = np.arange(int(m.sum()))
        remap.append(r)
    cells, faces = [], []
    for d, m in enumerate(keep):
        c = remap[0][shape.cells[d][m]]
        f = remap[d - 1][shape.faces[d][m]] if d else shape.faces[d][m]
        if (c < 0).any() or (f < 0).any():
            raise ValueError("selection is not closed under faces")
        cells.append(c)
        faces.append(f)
    return Shape(shape.kind, shape.vertices[keep[0]], tuple(cells), tuple(faces))


def default_epsilon(shape):
    """Half the largest cell diameter: the default slice thickness."""
    return 0.5 * shape.max_cell_diameter()


def slice_shape(shape, P, epsilon=None, filtration=None):
    """Discrete stand-in for the slice of ``shape`` by ``P``: the ``epsilon``-sublevel complex."""
    if epsilon is None:
        epsilon = default_epsilon(shape)
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    filt = flat_filtration(shape, P) if filtration is None else filtration
    masks = [filt.by_dim(d) <= epsilon for d in range(len(shape.cells))]
    return subcomplex(shape, masks)


def _gf2_rank(columns):
    pivots = {}
    for col in columns:
        while col:
            low = col.bit_length() - 1
            other = pivots.get(low)
            if other is None:
                pivots[low] = col
                break
            col ^= other
    return len(pivots)


def _boundary_rank(shape, d):
    if d <= 0 or d >= len(shape.cells) or not len(shape.cells[d]):
        return 0
    columns = []
    for fc in shape.faces[d].tolist():
        col = 0
        for f in fc:
            col ^= 1 << f
        columns.append(col)
    return _gf2_rank(columns)


def betti(shape, max_degree):
    """Betti numbers b_0..b_max_degree over the two-element field."""
    ranks = [_boundary_rank(shape, d) for d in range(max_degree + 2)]
    return [shape.count(k) - ranks[k] - ranks[k + 1] for k in range(max_degree + 1)]


def euler_characteristic(shape):
    return int(sum((-1) ** d * n for d, n in enumerate(shape.counts)))
