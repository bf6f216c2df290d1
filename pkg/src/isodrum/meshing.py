"""Conforming P1 triangulations of labeled domains.

triangulate() samples every boundary piece at spacing <= h (arcs chorded so
the sagitta stays below h^2/diameter), seeds the interior with a hexagonal
lattice kept clear of the boundary, Delaunay-triangulates the combined point
set, and keeps the triangles whose barycenter lies inside the domain.  The
result is then certified: every required boundary segment must appear as a
triangle edge, interior edges must be shared by exactly two triangles, and
all triangles must be positively oriented.  Certification failures trigger
local repair (removing interior points that encroach on a missing segment)
and finally MeshFailure, so an accepted mesh is conforming by construction.

Meshing is deterministic: no randomness is used anywhere.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import shapely
from scipy.spatial import Delaunay

from .geometry import BC, Domain, MirrorLine, corners

D_CODE, N_CODE = 0, 1
_BC_CODE = {BC.DIRICHLET: D_CODE, BC.NEUMANN: N_CODE}
_CODE_BC = {D_CODE: BC.DIRICHLET, N_CODE: BC.NEUMANN}


class MeshFailure(RuntimeError):
    """Triangulation could not be certified at the requested size."""


def _cross2(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]


@dataclass(frozen=True)
class PieceInfo:
    """Geometry record for one boundary piece (flat index over all loops)."""

    bc: BC
    kind: str  # "line" or "arc"
    center: tuple[float, float] | None = None
    radius: float = 0.0


@dataclass
class Mesh:
    """Conforming triangle mesh with labeled boundary edges.

    vertices: (V,2) float array; triangles: (T,3) int array, counterclockwise;
    edges: (B,2) int array of boundary edges with per-edge bc codes and the
    flat index of the source boundary piece.  Treated as immutable.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    edges: np.ndarray
    edge_bc: np.ndarray  # int8 codes, 0 = Dirichlet, 1 = Neumann
    edge_piece: np.ndarray
    pieces: tuple[PieceInfo, ...]
    h: float

    # -- derived quantities -------------------------------------------------

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)

    @property
    def triangle_count(self) -> int:
        return len(self.triangles)

    def triangle_areas(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        return 0.5 * _cross2(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])

    def min_angle(self) -> float:
        """Smallest interior angle over all triangles, in radians."""
        p = self.vertices[self.triangles]
        angles = []
        for i in range(3):
            u = p[:, (i + 1) % 3] - p[:, i]
            v = p[:, (i + 2) % 3] - p[:, i]
            cross = np.abs(_cross2(u, v))
            dot = np.einsum("ij,ij->i", u, v)
            angles.append(np.arctan2(cross, dot))
        return float(np.min(angles))

    def boundary_vertices(self, bc: BC | None = None) -> np.ndarray:
        if bc is None:
            sel = slice(None)
        else:
            sel = self.edge_bc == _BC_CODE[bc]
        return np.unique(self.edges[sel])

    def diameter(self) -> float:
        lo = self.vertices.min(axis=0)
        hi = self.vertices.max(axis=0)
        return float(np.hypot(*(hi - lo)))

    def edge_bcs(self) -> list[BC]:
        return [_CODE_BC[int(c)] for c in self.edge_bc]

    # -- certification --------------------------------------------------------

    def validate(self) -> None:
        """Certify conformity; raises MeshFailure on any violation."""
        if np.any(self.triangle_areas() <= 0):
            raise MeshFailure("non-positive triangle area")
        counts: dict[tuple[int, int], int] = {}
        tri = self.triangles
        for i in range(3):
            a = tri[:, i]
            b = tri[:, (i + 1) % 3]
            for u, v in zip(a, b):
                key = (u, v) if u < v else (v, u)
                counts[key] = counts.get(key, 0) + 1
        if any(c > 2 for c in counts.values()):
            raise MeshFailure("edge shared by more than two triangles")
        rim = {k for k, c in counts.items() if c == 1}
        labeled = {
            (int(u), int(v)) if u < v else (int(v), int(u))
            for u, v in self.edges
        }
        if labeled != rim:
            missing = labeled - rim
            extra = rim - labeled
            raise MeshFailure(
                f"boundary mismatch: {len(missing)} labeled edges missing, "
                f"{len(extra)} rim edges unlabeled"
            )
        if len(labeled) != len(self.edges):
            raise MeshFailure("duplicate labeled boundary edge")


def _sample_boundary(domain: Domain, h: float):
    """Sample loops at spacing <= h.

    Returns vertex coordinates, required segments (v0, v1, bc, piece) and the
    per-piece geometry table.
    """
    diam = domain.diameter()
    coords: list[tuple[float, float]] = []
    segments: list[tuple[int, int, int, int]] = []
    pieces: list[PieceInfo] = []
    pid = 0
    for loop in domain.loops:
        loop_start = len(coords)
        prev_idx = None
        for pc in loop:
            seg = pc.segment
            if seg.is_line:
                pieces.append(PieceInfo(pc.bc, "line"))
                n = max(1, math.ceil(seg.length() / h))
            else:
                pieces.append(
                    PieceInfo(pc.bc, "arc", seg.center.as_floats(), seg.radius)
                )
                max_sag = h * h / diam
                r = seg.radius
                if max_sag >= r:
                    phi = math.pi / 2
                else:
                    phi = 2.0 * math.acos(1.0 - max_sag / r)
                n = max(
                    1,
                    math.ceil(seg.length() / h),
                    math.ceil(seg.sweep / phi),
                )
            pts = [seg.point_at(i / n) for i in range(n + 1)]
            idxs = []
            for j, p in enumerate(pts):
                if j == 0:
                    if prev_idx is None:
                        coords.append(p.as_floats())
                        idxs.append(len(coords) - 1)
                    else:
                        idxs.append(prev_idx)
                elif j == n and pc is loop[-1]:
                    idxs.append(loop_start)
                else:
                    coords.append(p.as_floats())
                    idxs.append(len(coords) - 1)
            bc_code = _BC_CODE[pc.bc]
            for j in range(n):
                segments.append((idxs[j], idxs[j + 1], bc_code, pid))
            prev_idx = idxs[-1]
            pid += 1
    return np.asarray(coords, dtype=float), segments, tuple(pieces)


def _hex_lattice(bbox, g: float) -> np.ndarray:
    x0, y0, x1, y1 = bbox
    row_h = g * math.sqrt(3.0) / 2.0
    rows = []
    j = 0
    y = y0 + 0.5 * row_h
    while y < y1:
        xoff = 0.25 * g if j % 2 else -0.25 * g
        xs = np.arange(x0 + 0.5 * g + xoff, x1, g)
        if len(xs):
            rows.append(np.column_stack([xs, np.full(len(xs), y)]))
        y += row_h
        j += 1
    if not rows:
        return np.empty((0, 2))
    return np.vstack(rows)


def _attempt(points: np.ndarray, required: set, poly) -> tuple:
    """Delaunay + degenerate-sliver drop + inside filter + rim certificate.

    Nearly collinear boundary runs make qhull tile hairline slivers between
    a chord and the true samples; their keep/drop classification is not
    stable, so anything with area at rounding scale is removed outright.
    Returns (ccw simplices, problem edges); simplices is None unless the
    kept rim consists of exactly the required segments.
    """
    tri = Delaunay(points)
    simplices = tri.simplices
    p = points[simplices]
    signed = 0.5 * _cross2(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
    span = points.max(axis=0) - points.min(axis=0)
    area_tol = 1e-12 * float(span @ span)
    simplices = simplices[np.abs(signed) > area_tol]
    bary = points[simplices].mean(axis=1)
    keep = shapely.contains_xy(poly, bary[:, 0], bary[:, 1])
    simplices = simplices[keep]
    counts: dict[tuple[int, int], int] = {}
    for i in range(3):
        a = simplices[:, i]
        b = simplices[:, (i + 1) % 3]
        for u, v in zip(a, b):
            key = (int(u), int(v)) if u < v else (int(v), int(u))
            counts[key] = counts.get(key, 0) + 1
    rim = {k for k, c in counts.items() if c == 1}
    if rim != required:
        return None, (required - rim) | (rim - required)
    # Orient counterclockwise.
    p = points[simplices]
    flip = _cross2(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]) < 0
    simplices[flip] = simplices[flip][:, [0, 2, 1]]
    return simplices, set()


def triangulate(
    domain: Domain, h: float, min_angle_deg: float = 20.0
) -> Mesh:
    """Conforming triangulation with boundary resolved within h.

    Corners (including label changes) are mesh vertices because every piece
    endpoint is sampled.  Raises MeshFailure when the certified quality floor
    cannot be met.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    domain.validate()
    bcoords, segments, pieces = _sample_boundary(domain, h)
    nb = len(bcoords)
    required = {
        (a, b) if a < b else (b, a) for a, b, _, _ in segments
    }
    sag = 1e-5 * max(domain.diameter(), 1e-30)
    rings = []
    for loop in domain.loops:
        pts: list[tuple[float, float]] = []
        for pc in loop:
            chain = pc.segment.chord_points(sag)
            pts.extend(q.as_floats() for q in chain[:-1])
        rings.append(pts)
    poly = shapely.geometry.Polygon(rings[0], rings[1:])
    boundary = poly.boundary

    g = h
    seeds = _hex_lattice(domain.bbox(), g)
    if len(seeds):
        inside = shapely.contains_xy(poly, seeds[:, 0], seeds[:, 1])
        seeds = seeds[inside]
    if len(seeds):
        dist = shapely.distance(shapely.points(seeds), boundary)
        seeds = seeds[dist >= 0.62 * g]

    points = np.vstack([bcoords, seeds]) if len(seeds) else bcoords.copy()
    simplices = None
    for _ in range(4):
        simplices, problems = _attempt(points, required, poly)
        if simplices is not None:
            break
        # Repair: drop interior seeds encroaching on the problem segments.
        # Boundary indices all sit below nb, so `required` stays valid.
        drop = np.zeros(len(points), dtype=bool)
        for (u, v) in problems:
            mid = 0.5 * (points[u] + points[v])
            rad = 0.5 * np.hypot(*(points[u] - points[v]))
            d = np.hypot(points[:, 0] - mid[0], points[:, 1] - mid[1])
            drop |= d < 1.25 * rad
        drop[:nb] = False
        if not drop.any():
            raise MeshFailure("boundary segment unrecoverable after repair")
        points = points[~drop]
    if simplices is None:
        raise MeshFailure("boundary conformity not achieved")

    # Laplacian smoothing of interior seeds, then re-triangulate; keep the
    # last certified configuration.
    best = (points, simplices)
    for _ in range(2):
        pts = best[0]
        tris = best[1]
        neighbor_sum = np.zeros_like(pts)
        neighbor_cnt = np.zeros(len(pts))
        for i in range(3):
            a = tris[:, i]
            b = tris[:, (i + 1) % 3]
            np.add.at(neighbor_sum, a, pts[b])
            np.add.at(neighbor_sum, b, pts[a])
            np.add.at(neighbor_cnt, a, 1)
            np.add.at(neighbor_cnt, b, 1)
        moved = pts.copy()
        interior = np.arange(nb, len(pts))
        if not len(interior):
            break
        avg = neighbor_sum[interior] / np.maximum(neighbor_cnt[interior], 1)[:, None]
        ok = shapely.contains_xy(poly, avg[:, 0], avg[:, 1])
        ok &= shapely.distance(shapely.points(avg), boundary) >= 0.45 * g
        moved[interior[ok]] = avg[ok]
        cand, _ = _attempt(moved, required, poly)
        if cand is not None:
            best = (moved, cand)
    points, simplices = best

    mesh = Mesh(
        vertices=points,
        triangles=simplices,
        edges=np.asarray([(a, b) for a, b, _, _ in segments], dtype=int),
        edge_bc=np.asarray([c for _, _, c, _ in segments], dtype=np.int8),
        edge_piece=np.asarray([p for _, _, _, p in segments], dtype=int),
        pieces=pieces,
        h=h,
    )
    mesh.validate()
    floor = math.radians(min_angle_deg)
    beta_min = min((c.beta for c in corners(domain)), default=math.pi)
    floor = min(floor, max(beta_min - 1e-9, 1e-3))
    if mesh.min_angle() < floor:
        raise MeshFailure(
            f"min angle {math.degrees(mesh.min_angle()):.2f} deg below floor "
            f"{math.degrees(floor):.2f} deg"
        )
    return mesh


# -- uniform refinement ---------------------------------------------------------


def refine(mesh: Mesh) -> Mesh:
    """Red refinement: each triangle into four; boundary midpoints on arc
    pieces re-projected onto the true circle."""
    V = mesh.vertex_count
    tris = mesh.triangles
    edge_mid: dict[tuple[int, int], int] = {}
    new_pts: list[np.ndarray] = []

    def midpoint(u: int, v: int) -> int:
        key = (u, v) if u < v else (v, u)
        idx = edge_mid.get(key)
        if idx is None:
            idx = V + len(new_pts)
            new_pts.append(0.5 * (mesh.vertices[u] + mesh.vertices[v]))
            edge_mid[key] = idx
        return idx

    new_tris = np.empty((4 * len(tris), 3), dtype=int)
    for t, (a, b, c) in enumerate(tris):
        mab = midpoint(a, b)
        mbc = midpoint(b, c)
        mca = midpoint(c, a)
        new_tris[4 * t + 0] = (a, mab, mca)
        new_tris[4 * t + 1] = (b, mbc, mab)
        new_tris[4 * t + 2] = (c, mca, mbc)
        new_tris[4 * t + 3] = (mab, mbc, mca)

    vertices = np.vstack([mesh.vertices, np.asarray(new_pts)])

    edges = np.empty((2 * len(mesh.edges), 2), dtype=int)
    edge_bc = np.repeat(mesh.edge_bc, 2)
    edge_piece = np.repeat(mesh.edge_piece, 2)
    for e, (u, v) in enumerate(mesh.edges):
        m = midpoint(int(u), int(v))
        info = mesh.pieces[mesh.edge_piece[e]]
        if info.kind == "arc":
            cx, cy = info.center
            p = vertices[m]
            d = math.hypot(p[0] - cx, p[1] - cy)
            if d > 0:
                vertices[m, 0] = cx + info.radius * (p[0] - cx) / d
                vertices[m, 1] = cy + info.radius * (p[1] - cy) / d
        edges[2 * e + 0] = (u, m)
        edges[2 * e + 1] = (m, v)

    out = Mesh(
        vertices=vertices,
        triangles=new_tris,
        edges=edges,
        edge_bc=edge_bc,
        edge_piece=edge_piece,
        pieces=mesh.pieces,
        h=mesh.h / 2.0,
    )
    return out


# -- reflection gluing ------------------------------------------------------------


@dataclass(frozen=True)
class MeshCorrespondence:
    """Vertex maps between a block mesh and its reflected-glued double.

    Vertices 0..V-1 of the glued mesh are the original block vertices;
    reflected_index[i] is the glued index of the mirror image of vertex i
    (the same index on the interface).
    """

    reflected_index: np.ndarray
    interface: np.ndarray  # bool mask over block vertices
    block_vertex_count: int

    def __post_init__(self):
        assert len(self.reflected_index) == self.block_vertex_count


def reflect_mesh(mesh: Mesh, axis: MirrorLine) -> tuple[Mesh, MeshCorrespondence]:
    """Glue a mesh with its mirror image across `axis`.

    Interface vertices (those on the axis) are shared exactly; edges lying on
    the axis disappear from the labeled boundary.  Reflected boundary edges
    keep their labels and get piece ids offset by the original piece count.
    """
    ax, ay = axis.point.as_floats()
    dx, dy = axis.direction.as_floats()
    pts = mesh.vertices
    rel = pts - (ax, ay)
    t = rel @ (dx, dy)
    refl = np.column_stack([ax + 2 * t * dx, ay + 2 * t * dy]) - rel
    offset = rel @ (-dy, dx)
    tol = 1e-9 * max(mesh.diameter(), 1e-30)
    interface = np.abs(offset) <= tol

    V = mesh.vertex_count
    reflected_index = np.empty(V, dtype=int)
    new_coords = []
    nxt = V
    for i in range(V):
        if interface[i]:
            reflected_index[i] = i
        else:
            reflected_index[i] = nxt
            new_coords.append(refl[i])
            nxt += 1
    vertices = np.vstack([pts, np.asarray(new_coords)]) if new_coords else pts.copy()

    mirror_tris = reflected_index[mesh.triangles][:, [0, 2, 1]]
    triangles = np.vstack([mesh.triangles, mirror_tris])

    on_axis = interface[mesh.edges[:, 0]] & interface[mesh.edges[:, 1]]
    keep = ~on_axis
    edges = mesh.edges[keep]
    edge_bc = mesh.edge_bc[keep]
    edge_piece = mesh.edge_piece[keep]
    m_edges = reflected_index[mesh.edges[keep]][:, [1, 0]]
    m_bc = mesh.edge_bc[keep]
    m_piece = mesh.edge_piece[keep] + len(mesh.pieces)

    glued = Mesh(
        vertices=vertices,
        triangles=triangles,
        edges=np.vstack([edges, m_edges]),
        edge_bc=np.concatenate([edge_bc, m_bc]),
        edge_piece=np.concatenate([edge_piece, m_piece]),
        pieces=mesh.pieces + mesh.pieces,
        h=mesh.h,
    )
    corr = MeshCorrespondence(
        reflected_index=reflected_index,
        interface=interface,
        block_vertex_count=V,
    )
    return glued, corr


def relabel_edges(mesh: Mesh, piece_ids: set[int], bc: BC) -> Mesh:
    """New mesh with edges from the given source pieces relabeled."""
    code = _BC_CODE[bc]
    edge_bc = mesh.edge_bc.copy()
    sel = np.isin(mesh.edge_piece, list(piece_ids))
    edge_bc[sel] = code
    pieces = tuple(
        PieceInfo(bc, p.kind, p.center, p.radius) if i in piece_ids else p
        for i, p in enumerate(mesh.pieces)
    )
    return Mesh(
        vertices=mesh.vertices,
        triangles=mesh.triangles,
        edges=mesh.edges,
        edge_bc=edge_bc,
        edge_piece=mesh.edge_piece,
        pieces=pieces,
        h=mesh.h,
    )


# -- plain-text mesh files ---------------------------------------------------------


def save_mesh(mesh: Mesh, path) -> None:
    """Plain-text export; deterministic for identical inputs."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"vertices {mesh.vertex_count}\n")
        for x, y in mesh.vertices:
            fh.write(f"{float(x)!r} {float(y)!r}\n")
        fh.write(f"triangles {mesh.triangle_count}\n")
        for a, b, c in mesh.triangles:
            fh.write(f"{a} {b} {c}\n")
        fh.write(f"boundary {len(mesh.edges)}\n")
        for (u, v), code, pid in zip(mesh.edges, mesh.edge_bc, mesh.edge_piece):
            fh.write(f"{u} {v} {_CODE_BC[int(code)].value} {pid}\n")
        fh.write(f"pieces {len(mesh.pieces)}\n")
        for i, p in enumerate(mesh.pieces):
            if p.kind == "arc":
                cx, cy = p.center
                fh.write(f"{i} {p.bc.value} arc {cx!r} {cy!r} {p.radius!r}\n")
            else:
                fh.write(f"{i} {p.bc.value} line\n")
        fh.write(f"h {mesh.h!r}\n")


def load_mesh(path) -> Mesh:
    with open(path, "r", encoding="utf-8") as fh:
        tokens = fh.read().split("\n")
    pos = 0

    def header(name: str) -> int:
        nonlocal pos
        tag, count = tokens[pos].split()
        if tag != name:
            raise ValueError(f"expected {name} header, got {tokens[pos]!r}")
        pos += 1
        return int(count)

    nv = header("vertices")
    vertices = np.asarray(
        [[float(t) for t in tokens[pos + i].split()] for i in range(nv)]
    )
    pos += nv
    nt = header("triangles")
    triangles = np.asarray(
        [[int(t) for t in tokens[pos + i].split()] for i in range(nt)], dtype=int
    )
    pos += nt
    nbnd = header("boundary")
    edges = np.empty((nbnd, 2), dtype=int)
    edge_bc = np.empty(nbnd, dtype=np.int8)
    edge_piece = np.empty(nbnd, dtype=int)
    for i in range(nbnd):
        u, v, bc, pid = tokens[pos + i].split()
        edges[i] = (int(u), int(v))
        edge_bc[i] = _BC_CODE[BC.parse(bc)]
        edge_piece[i] = int(pid)
    pos += nbnd
    npieces = header("pieces")
    pieces: list[PieceInfo] = []
    for i in range(npieces):
        parts = tokens[pos + i].split()
        bc = BC.parse(parts[1])
        if parts[2] == "arc":
            pieces.append(
                PieceInfo(bc, "arc", (float(parts[3]), float(parts[4])), float(parts[5]))
            )
        else:
            pieces.append(PieceInfo(bc, "line"))
    pos += npieces
    tag, hval = tokens[pos].split()
    if tag != "h":
        raise ValueError("missing h record")
    return Mesh(
        vertices=vertices,
        triangles=triangles,
        edges=edges,
        edge_bc=edge_bc,
        edge_piece=edge_piece,
        pieces=tuple(pieces),
        h=float(hval),
    )
