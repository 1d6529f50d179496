"""Structured triangulations of the nominal configuration.

Both problem domains are meshed from the same polar template: a fan around
the origin, concentric vertex rings with graded radial spacing, and one
vertex per ring and azimuth angle 2*pi*i/M.  Rings are placed exactly on
the mollifier breakpoint circles (and the absorbing-layer circles for the
disk), so no triangle straddles a coefficient discontinuity and every
triangle carries an unambiguous chi-branch tag.  The square domain adds a
few template rings that interpolate between the outermost circle and the
square boundary.

The binary mesh format is little-endian throughout: magic "IFSM", version,
counts, float64 vertices, uint32 connectivity, uint8 region and band tags,
conforming circle radii, boundary node list, and optional named fields
(real or complex nodal data).
"""

import struct

import numpy as np

from .geometry import BAND_CORE, BAND_FAR, BAND_INNER, BAND_OUTER, BAND_PML

REGION_INNER = 0
REGION_OUTER = 1
REGION_PML = 2

_REGION_OF_BAND = {
    BAND_CORE: REGION_INNER,
    BAND_INNER: REGION_INNER,
    BAND_OUTER: REGION_OUTER,
    BAND_FAR: REGION_OUTER,
    BAND_PML: REGION_PML,
}

_MAGIC = b"IFSM"
_VERSION = 1

# mesh size grows away from the interface band by this fraction per unit
# distance; 0.3 keeps the ratio of neighbouring ring gaps near 1.3
_GRADE = 0.3


class MeshError(ValueError):
    pass


class Mesh:
    """Conforming triangle mesh with region and chi-branch tags.

    vertices  : (n, 2) float64
    triangles : (m, 3) uint32, counterclockwise
    region    : (m,) uint8, REGION_INNER / REGION_OUTER / REGION_PML
    band      : (m,) uint8, geometry.BAND_* chi-branch of each triangle
    boundary  : sorted uint32 vertex ids of the outer (Dirichlet) boundary
    circles   : radii of the circles the mesh conforms to
    """

    def __init__(self, vertices, triangles, region, band, boundary, circles,
                 shape, h_interface, h_far):
        self.vertices = np.ascontiguousarray(vertices, dtype=np.float64)
        self.triangles = np.ascontiguousarray(triangles, dtype=np.uint32)
        self.region = np.ascontiguousarray(region, dtype=np.uint8)
        self.band = np.ascontiguousarray(band, dtype=np.uint8)
        self.boundary = np.ascontiguousarray(np.sort(boundary), dtype=np.uint32)
        self.circles = tuple(float(c) for c in circles)
        self.shape = shape  # "square" or "disk"
        self.h_interface = float(h_interface)
        self.h_far = float(h_far)
        self._grid = None

    @property
    def n_vertices(self):
        return self.vertices.shape[0]

    @property
    def n_triangles(self):
        return self.triangles.shape[0]

    def areas(self):
        v = self.vertices[self.triangles]
        d1 = v[:, 1] - v[:, 0]
        d2 = v[:, 2] - v[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    def centroids(self):
        return self.vertices[self.triangles].mean(axis=1)

    def interior_nodes(self):
        mask = np.ones(self.n_vertices, dtype=bool)
        mask[self.boundary] = False
        return np.nonzero(mask)[0]

    # -- point location ---------------------------------------------------

    def _build_grid(self):
        v = self.vertices[self.triangles]
        lo = v.min(axis=1)
        hi = v.max(axis=1)
        cell = max((hi - lo).max(), 1e-12)
        box_lo = self.vertices.min(axis=0)
        box_hi = self.vertices.max(axis=0)
        nx = max(1, int(np.ceil((box_hi[0] - box_lo[0]) / cell)))
        ny = max(1, int(np.ceil((box_hi[1] - box_lo[1]) / cell)))
        il = np.clip(((lo[:, 0] - box_lo[0]) / cell).astype(int), 0, nx - 1)
        jl = np.clip(((lo[:, 1] - box_lo[1]) / cell).astype(int), 0, ny - 1)
        ih = np.clip(((hi[:, 0] - box_lo[0]) / cell).astype(int), 0, nx - 1)
        jh = np.clip(((hi[:, 1] - box_lo[1]) / cell).astype(int), 0, ny - 1)
        cells = {}
        for t in range(self.n_triangles):
            for i in range(il[t], ih[t] + 1):
                for j in range(jl[t], jh[t] + 1):
                    cells.setdefault((i, j), []).append(t)
        for key in cells:
            cells[key] = np.array(cells[key], dtype=np.int64)
        self._grid = (box_lo, cell, nx, ny, cells)

    def locate(self, points, tol=1e-8):
        """Return (triangle index, barycentric coords) for each query point.

        Ties on shared edges resolve to the lowest triangle index.  Points
        outside the domain beyond the snap tolerance raise MeshError.
        """
        if self._grid is None:
            self._build_grid()
        box_lo, cell, nx, ny, cells = self._grid
        points = np.atleast_2d(np.asarray(points, dtype=float))
        tri_idx = np.full(points.shape[0], -1, dtype=np.int64)
        lams = np.zeros((points.shape[0], 3))
        verts = self.vertices
        tris = self.triangles
        for k, pt in enumerate(points):
            i = min(max(int((pt[0] - box_lo[0]) / cell), 0), nx - 1)
            j = min(max(int((pt[1] - box_lo[1]) / cell), 0), ny - 1)
            cand = cells.get((i, j))
            if cand is None:
                raise MeshError(f"point {pt} outside the mesh")
            for t in cand:
                a, b, c = verts[tris[t]]
                det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])
                l1 = ((pt[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (pt[1] - a[1])) / det
                l2 = ((b[0] - a[0]) * (pt[1] - a[1]) - (pt[0] - a[0]) * (b[1] - a[1])) / det
                l0 = 1.0 - l1 - l2
                if l0 >= -tol and l1 >= -tol and l2 >= -tol:
                    tri_idx[k] = t
                    lams[k] = (l0, l1, l2)
                    break
            else:
                raise MeshError(f"point {pt} outside the mesh (snap tolerance {tol})")
        return tri_idx, lams

    def interpolate(self, nodal, points):
        """P1 interpolation of nodal values at the given points."""
        tri_idx, lams = self.locate(points)
        vals = np.asarray(nodal)[self.triangles[tri_idx]]
        return (vals * lams).sum(axis=1)

    # -- serialization ----------------------------------------------------

    def save(self, path, fields=None):
        """Write the binary format; fields is an optional {name: nodal array}."""
        fields = fields or {}
        with open(path, "wb") as fh:
            fh.write(_MAGIC)
            fh.write(struct.pack("<I", _VERSION))
            fh.write(struct.pack("<B", 0 if self.shape == "square" else 1))
            fh.write(struct.pack("<2d", self.h_interface, self.h_far))
            fh.write(struct.pack("<3Q", self.n_vertices, self.n_triangles,
                                 len(self.boundary)))
            fh.write(struct.pack("<Q", len(self.circles)))
            fh.write(np.asarray(self.circles, dtype="<f8").tobytes())
            fh.write(self.vertices.astype("<f8").tobytes())
            fh.write(self.triangles.astype("<u4").tobytes())
            fh.write(self.region.tobytes())
            fh.write(self.band.tobytes())
            fh.write(self.boundary.astype("<u4").tobytes())
            fh.write(struct.pack("<Q", len(fields)))
            for name in sorted(fields):
                data = np.asarray(fields[name])
                if data.shape != (self.n_vertices,):
                    raise MeshError(f"field {name} is not nodal")
                iscomplex = np.iscomplexobj(data)
                blob = data.astype("<c16" if iscomplex else "<f8").tobytes()
                enc = name.encode("utf-8")
                fh.write(struct.pack("<H", len(enc)))
                fh.write(enc)
                fh.write(struct.pack("<B", int(iscomplex)))
                fh.write(blob)

    @classmethod
    def load(cls, path):
        with open(path, "rb") as fh:
            if fh.read(4) != _MAGIC:
                raise MeshError(f"{path} is not a mesh file")
            (version,) = struct.unpack("<I", fh.read(4))
            if version != _VERSION:
                raise MeshError(f"unsupported mesh format version {version}")
            (shape_flag,) = struct.unpack("<B", fh.read(1))
            h_int, h_far = struct.unpack("<2d", fh.read(16))
            nv, nt, nb = struct.unpack("<3Q", fh.read(24))
            (nc,) = struct.unpack("<Q", fh.read(8))
            circles = np.frombuffer(fh.read(8 * nc), dtype="<f8")
            vertices = np.frombuffer(fh.read(16 * nv), dtype="<f8").reshape(nv, 2)
            triangles = np.frombuffer(fh.read(12 * nt), dtype="<u4").reshape(nt, 3)
            region = np.frombuffer(fh.read(nt), dtype=np.uint8)
            band = np.frombuffer(fh.read(nt), dtype=np.uint8)
            boundary = np.frombuffer(fh.read(4 * nb), dtype="<u4")
            (nf,) = struct.unpack("<Q", fh.read(8))
            fields = {}
            for _ in range(nf):
                (ln,) = struct.unpack("<H", fh.read(2))
                name = fh.read(ln).decode("utf-8")
                (iscomplex,) = struct.unpack("<B", fh.read(1))
                width = 16 if iscomplex else 8
                fields[name] = np.frombuffer(
                    fh.read(width * nv), dtype="<c16" if iscomplex else "<f8")
        mesh = cls(vertices, triangles, region, band, boundary, circles,
                   "square" if shape_flag == 0 else "disk", h_int, h_far)
        mesh.fields = fields
        return mesh

    def save_text(self, path):
        """Human-readable dump for debugging."""
        with open(path, "w") as fh:
            fh.write(f"# mesh shape={self.shape} vertices={self.n_vertices} "
                     f"triangles={self.n_triangles}\n")
            fh.write("# circles " + " ".join(f"{c!r}" for c in self.circles) + "\n")
            for x, y in self.vertices:
                fh.write(f"v {x!r} {y!r}\n")
            for (a, b, c), reg, bnd in zip(self.triangles, self.region, self.band):
                fh.write(f"t {a} {b} {c} {reg} {bnd}\n")
            fh.write("b " + " ".join(str(i) for i in self.boundary) + "\n")


def _size_field(rho, r0, h_interface, h_far, pml_start=None, pml_h=None):
    band_lo, band_hi = 0.8 * r0, 1.25 * r0
    dist = np.maximum(0.0, np.maximum(band_lo - rho, rho - band_hi))
    h = np.minimum(h_far, h_interface + _GRADE * dist)
    if pml_start is not None:
        h = np.where(rho >= pml_start - 1e-15, np.minimum(h, pml_h), h)
    return h


def _segment_radii(a, b, size):
    """Subdivide [a, b] so local spacing tracks the size field."""
    xs = np.linspace(a, b, 257)
    dens = 1.0 / size(xs)
    cum = np.concatenate([[0.0], np.cumsum((dens[1:] + dens[:-1]) / 2 * np.diff(xs))])
    n = max(1, int(round(cum[-1])))
    targets = np.linspace(0.0, cum[-1], n + 1)[1:]
    radii = np.interp(targets, cum, xs)
    radii[-1] = b
    return radii


def _ring_radii(anchors, size):
    radii = []
    lo = 0.0
    for hi in anchors:
        radii.extend(_segment_radii(lo, hi, size))
        lo = hi
    return np.array(radii)


def _band_for_interval(lo, hi, r_inner, r0, r_outer, pml_start):
    mid = 0.5 * (lo + hi)
    if pml_start is not None and mid >= pml_start:
        return BAND_PML
    if mid <= r_inner:
        return BAND_CORE
    if mid <= r0:
        return BAND_INNER
    if mid <= r_outer:
        return BAND_OUTER
    return BAND_FAR


def _assemble_rings(ring_points, ring_bands):
    """Fan plus strip connectivity for a stack of equal-length vertex rings."""
    m = ring_points[0].shape[0]
    nring = len(ring_points)
    vertices = np.vstack([np.zeros((1, 2))] + ring_points)
    tris = []
    bands = []
    idx = lambda k, i: 1 + k * m + (i % m)
    for i in range(m):
        tris.append((0, idx(0, i), idx(0, i + 1)))
        bands.append(ring_bands[0])
    for k in range(nring - 1):
        for i in range(m):
            a0, a1 = idx(k, i), idx(k, i + 1)
            b0, b1 = idx(k + 1, i), idx(k + 1, i + 1)
            tris.append((a0, b0, b1))
            tris.append((a0, b1, a1))
            bands.append(ring_bands[k + 1])
            bands.append(ring_bands[k + 1])
    triangles = np.array(tris, dtype=np.uint32)
    band = np.array(bands, dtype=np.uint8)
    region = np.array([_REGION_OF_BAND[b] for b in band], dtype=np.uint8)
    boundary = np.arange(1 + (nring - 1) * m, 1 + nring * m, dtype=np.uint32)
    return vertices, triangles, region, band, boundary


def _azimuth_count(radii, size, minimum=16):
    need = (2 * np.pi * radii / size(radii)).max()
    return max(minimum, 8 * int(round(need / 8)))


def build_square_mesh(r0, r_inner, r_outer, h_interface, h_far):
    """Mesh of the square (-1,1)^2 conforming to the three mollifier circles.

    Azimuthal resolution is set at the nominal circle; radial rings follow
    the graded size field; template rings blend the outer circle into the
    square boundary.
    """
    if not (0 < r_inner < r0 < r_outer < 1.0):
        raise MeshError("need 0 < r_inner < r0 < r_outer < 1")
    size = lambda rho: _size_field(rho, r0, h_interface, h_far)
    radii = _ring_radii([r_inner, r0, r_outer], size)
    m = max(16, 8 * int(round(2 * np.pi * r0 / h_interface / 8)))
    theta = 2 * np.pi * np.arange(m) / m
    unit = np.stack([np.cos(theta), np.sin(theta)], axis=1)

    ring_points = [r * unit for r in radii]
    edges = np.concatenate([[0.0], radii])
    ring_bands = [_band_for_interval(edges[k], edges[k + 1], r_inner, r0,
                                     r_outer, None) for k in range(len(radii))]

    # template corner fill: interpolate radially towards the square boundary
    square = unit / np.maximum(np.abs(unit[:, 0]), np.abs(unit[:, 1]))[:, None]
    mean_gap = np.mean(np.hypot(square[:, 0], square[:, 1])) - r_outer
    n_fill = max(2, int(round(mean_gap / h_far)))
    for s in np.linspace(0.0, 1.0, n_fill + 1)[1:]:
        ring_points.append((1 - s) * r_outer * unit + s * square)
        ring_bands.append(BAND_FAR)
    # snap the last ring onto the exact square
    ring_points[-1] = square

    vertices, triangles, region, band, boundary = _assemble_rings(ring_points, ring_bands)
    return Mesh(vertices, triangles, region, band, boundary,
                (r_inner, r0, r_outer), "square", h_interface, h_far)


def build_disk_mesh(r0, r_inner, R, pml_thickness, h_interface, h_far):
    """Polar mesh of the disk of radius R (+ absorbing annulus if requested).

    The mollifier support is taken to end at R, matching the transmission
    problem setup; rings land exactly on r_inner, r0, R and R+thickness.
    The absorbing annulus uses radial spacing min(h_far, thickness/10).
    """
    if not (0 < r_inner < r0 < R):
        raise MeshError("need 0 < r_inner < r0 < R")
    if pml_thickness < 0:
        raise MeshError("pml_thickness must be >= 0")
    pml = pml_thickness > 0
    pml_h = min(h_far, pml_thickness / 10) if pml else None
    # wave meshes bound every edge (diagonals included) by the size field,
    # so quad legs stay a factor sqrt(2) below it; a plain disk keeps legs
    # at the field value
    shrink = np.sqrt(2.0) if pml else 1.0
    size = lambda rho: _size_field(rho, r0, h_interface, h_far,
                                   R if pml else None, pml_h) / shrink
    anchors = [r_inner, r0, R] + ([R + pml_thickness] if pml else [])
    radii = _ring_radii(anchors, size)
    m = _azimuth_count(radii, size)
    theta = 2 * np.pi * np.arange(m) / m
    unit = np.stack([np.cos(theta), np.sin(theta)], axis=1)

    ring_points = [r * unit for r in radii]
    edges = np.concatenate([[0.0], radii])
    ring_bands = [_band_for_interval(edges[k], edges[k + 1], r_inner, r0, R,
                                     R if pml else None)
                  for k in range(len(radii))]

    vertices, triangles, region, band, boundary = _assemble_rings(ring_points, ring_bands)
    circles = (r_inner, r0, R) + ((R + pml_thickness,) if pml else ())
    return Mesh(vertices, triangles, region, band, boundary,
                circles, "disk", h_interface, h_far)


def check_mesh(mesh, tol=1e-12):
    """Verify orientation, conformity, tags and circle alignment.

    Raises MeshError on the first violation, otherwise returns a stats
    dictionary (counts, area total, minimum angle, edge length range).
    """
    areas = mesh.areas()
    if areas.min() <= 0:
        raise MeshError(f"non-positive triangle area: min {areas.min():.3e}")

    if np.unique(mesh.triangles.ravel()).size != mesh.n_vertices:
        raise MeshError("mesh has unreferenced vertices")
    rounded = np.round(mesh.vertices / max(tol, 1e-15))
    if np.unique(rounded, axis=0).shape[0] != mesh.n_vertices:
        raise MeshError("duplicate vertices")

    tris = np.asarray(mesh.triangles, dtype=np.int64)
    edges = np.concatenate([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]])
    edges.sort(axis=1)
    uniq, counts = np.unique(edges, axis=0, return_counts=True)
    if counts.max() > 2:
        raise MeshError("edge shared by more than two triangles")
    once = uniq[counts == 1]
    on_boundary = np.zeros(mesh.n_vertices, dtype=bool)
    on_boundary[mesh.boundary] = True
    if not np.all(on_boundary[once].all(axis=1)):
        raise MeshError("interior edge with a single adjacent triangle")

    rho = np.hypot(mesh.vertices[:, 0], mesh.vertices[:, 1])
    for c in mesh.circles:
        side = np.zeros(mesh.n_vertices, dtype=np.int8)
        side[rho > c + tol] = 1
        side[rho < c - tol] = -1
        tri_sides = side[tris]
        if np.any((tri_sides.max(axis=1) == 1) & (tri_sides.min(axis=1) == -1)):
            raise MeshError(f"triangle straddles the circle of radius {c}")

    # band tags must be consistent with centroid radii
    cen = mesh.centroids()
    cen_rho = np.hypot(cen[:, 0], cen[:, 1])
    limits = {BAND_CORE: (0.0, mesh.circles[0]),
              BAND_INNER: (mesh.circles[0], mesh.circles[1]),
              BAND_OUTER: (mesh.circles[1], mesh.circles[2]),
              BAND_FAR: (mesh.circles[2], np.inf)}
    if len(mesh.circles) > 3:
        limits[BAND_PML] = (mesh.circles[2], mesh.circles[3])
    for bval, (lo, hi) in limits.items():
        sel = mesh.band == bval
        if np.any(sel) and (cen_rho[sel].min() < lo - 1e-9 or
                            cen_rho[sel].max() > hi + 1e-9):
            raise MeshError(f"band tag {bval} inconsistent with centroid radius")

    v = mesh.vertices[mesh.triangles]
    e = np.stack([v[:, 1] - v[:, 0], v[:, 2] - v[:, 1], v[:, 0] - v[:, 2]])
    lengths = np.hypot(e[..., 0], e[..., 1])
    # law of cosines per corner
    la, lb, lc = lengths[0], lengths[1], lengths[2]
    angles = []
    for x, y, z in ((la, lb, lc), (lb, lc, la), (lc, la, lb)):
        cosv = np.clip((y**2 + z**2 - x**2) / (2 * y * z), -1, 1)
        angles.append(np.arccos(cosv))
    min_angle = np.minimum.reduce(angles).min()

    return {
        "n_vertices": mesh.n_vertices,
        "n_triangles": mesh.n_triangles,
        "total_area": float(areas.sum()),
        "min_angle_deg": float(np.degrees(min_angle)),
        "edge_min": float(lengths.min()),
        "edge_max": float(lengths.max()),
    }
