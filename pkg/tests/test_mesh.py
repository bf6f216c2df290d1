"""Triangulation: certificates, refinement, reflection sharing, file format."""
import math

import numpy as np
import pytest

from isodrum.construct import build_pair, load_block
from isodrum.geometry import (
    BC,
    BoundaryPiece,
    Domain,
    MirrorLine,
    Segment,
    point,
    polygon_domain,
)
from isodrum.meshing import (
    D_CODE,
    Mesh,
    MeshFailure,
    N_CODE,
    load_mesh,
    reflect_mesh,
    refine,
    relabel_edges,
    save_mesh,
    triangulate,
)

import importlib.resources as resources

FIXTURES = resources.files("isodrum") / "fixtures"

SQUARE = polygon_domain([(0, 0), (1, 0), (1, 1), (0, 1)], ["D", "N", "D", "N"])

HALF_DISK = Domain(
    [[
        BoundaryPiece(Segment(point(-1, 0), point(1, 0)), BC.DIRICHLET),
        BoundaryPiece(
            Segment(point(1, 0), point(-1, 0), center=point(0, 0), ccw=True),
            BC.NEUMANN,
        ),
    ]]
)


def mesh_area(mesh):
    return float(mesh.triangle_areas().sum())


def test_square_mesh_basics():
    mesh = triangulate(SQUARE, 0.15)
    mesh.validate()
    assert mesh_area(mesh) == pytest.approx(1.0, rel=1e-12)
    assert mesh.triangle_areas().min() > 0
    assert mesh.min_angle() >= math.radians(20.0) - 1e-12
    # every boundary edge carries the label of its piece
    assert set(np.unique(mesh.edge_bc)) == {D_CODE, N_CODE}


def test_mesh_is_deterministic():
    m1 = triangulate(SQUARE, 0.11)
    m2 = triangulate(SQUARE, 0.11)
    assert np.array_equal(m1.vertices, m2.vertices)
    assert np.array_equal(m1.triangles, m2.triangles)
    assert np.array_equal(m1.edges, m2.edges)
    assert np.array_equal(m1.edge_bc, m2.edge_bc)


def test_boundary_edges_shorter_than_h():
    h = 0.2
    mesh = triangulate(SQUARE, h)
    seg = mesh.vertices[mesh.edges[:, 0]] - mesh.vertices[mesh.edges[:, 1]]
    assert np.linalg.norm(seg, axis=1).max() <= h + 1e-12


def test_all_fixture_pairs_mesh():
    for name in ("basic_block", "strip_block", "sector_block"):
        pair = build_pair(load_block(FIXTURES / f"{name}.json"))
        for dom in (pair.omega1, pair.omega2):
            mesh = triangulate(dom, 0.12)
            mesh.validate()
            want = float(__import__("isodrum.geometry", fromlist=["area"]).area(dom))
            assert mesh_area(mesh) == pytest.approx(want, rel=1e-3)


def test_refine_quadruples_and_preserves_area():
    mesh = triangulate(SQUARE, 0.2)
    fine = refine(mesh)
    fine.validate()
    assert fine.triangles.shape[0] == 4 * mesh.triangles.shape[0]
    assert fine.edges.shape[0] == 2 * mesh.edges.shape[0]
    assert fine.h == pytest.approx(mesh.h / 2)
    assert mesh_area(fine) == pytest.approx(mesh_area(mesh), rel=1e-12)
    # original vertices survive refinement unchanged
    assert np.array_equal(fine.vertices[: len(mesh.vertices)], mesh.vertices)


def test_refine_reprojects_arc_midpoints():
    mesh = triangulate(HALF_DISK, 0.25)
    gaps = []
    for _ in range(3):
        gaps.append(abs(mesh_area(mesh) - math.pi / 2))
        mesh = refine(mesh)
        mesh.validate()
        arc = mesh.edges[mesh.edge_bc == N_CODE]
        r = np.linalg.norm(mesh.vertices[np.unique(arc)], axis=1)
        assert np.allclose(r, 1.0, atol=1e-12)
    gaps.append(abs(mesh_area(mesh) - math.pi / 2))
    # quadratic area convergence only happens if midpoints hit the circle
    assert gaps[-1] < gaps[0] / 16


def test_validate_rejects_flipped_triangle():
    mesh = triangulate(SQUARE, 0.3)
    bad = mesh.triangles.copy()
    bad[0] = bad[0][::-1]
    broken = Mesh(mesh.vertices, bad, mesh.edges, mesh.edge_bc,
                  mesh.edge_piece, mesh.pieces, mesh.h)
    with pytest.raises(MeshFailure):
        broken.validate()


def test_validate_rejects_rim_mismatch():
    mesh = triangulate(SQUARE, 0.3)
    with pytest.raises(MeshFailure):
        Mesh(mesh.vertices, mesh.triangles[1:], mesh.edges, mesh.edge_bc,
             mesh.edge_piece, mesh.pieces, mesh.h).validate()
    with pytest.raises(MeshFailure):
        Mesh(mesh.vertices, mesh.triangles, mesh.edges[1:], mesh.edge_bc[1:],
             mesh.edge_piece[1:], mesh.pieces, mesh.h).validate()


def test_validate_rejects_duplicate_labels():
    mesh = triangulate(SQUARE, 0.3)
    edges = np.vstack([mesh.edges, mesh.edges[:1]])
    bc = np.concatenate([mesh.edge_bc, [N_CODE]])
    piece = np.concatenate([mesh.edge_piece, mesh.edge_piece[:1]])
    with pytest.raises(MeshFailure):
        Mesh(mesh.vertices, mesh.triangles, edges, bc, piece,
             mesh.pieces, mesh.h).validate()


def test_reflect_mesh_bijection():
    mesh = triangulate(SQUARE, 0.2)
    axis = MirrorLine(point(1, 0), point(0, 1))
    out, corr = reflect_mesh(mesh, axis)
    out.validate()
    n_iface = int(corr.interface.sum())
    assert len(out.vertices) == 2 * len(mesh.vertices) - n_iface
    assert len(out.triangles) == 2 * len(mesh.triangles)
    assert corr.block_vertex_count == len(mesh.vertices)
    assert mesh_area(out) == pytest.approx(2 * mesh_area(mesh), rel=1e-12)
    # reflected copy of a block vertex maps back onto the mirror image
    img = out.vertices[corr.reflected_index]
    flipped = mesh.vertices.copy()
    flipped[:, 0] = 2.0 - flipped[:, 0]
    assert np.allclose(img, flipped, atol=1e-12)
    # interface vertices are shared, not duplicated
    iface_ids = corr.reflected_index[corr.interface]
    assert (iface_ids < len(mesh.vertices)).all()


def test_reflect_mesh_drops_axis_edges():
    mesh = triangulate(SQUARE, 0.2)
    axis = MirrorLine(point(1, 0), point(0, 1))
    out, _ = reflect_mesh(mesh, axis)
    x = out.vertices[out.edges]
    on_axis = np.all(np.abs(x[:, :, 0] - 1.0) < 1e-12, axis=1)
    assert not on_axis.any()


def test_relabel_edges():
    mesh = triangulate(SQUARE, 0.25)
    target = {1}  # the x = 1 side, labeled N in SQUARE
    out = relabel_edges(mesh, target, BC.DIRICHLET)
    sel = np.isin(out.edge_piece, list(target))
    assert (out.edge_bc[sel] == D_CODE).all()
    untouched = ~sel
    assert np.array_equal(out.edge_bc[untouched], mesh.edge_bc[untouched])
    out.validate()


def test_save_load_roundtrip(tmp_path):
    mesh = triangulate(HALF_DISK, 0.3)
    path = tmp_path / "hd.mesh"
    save_mesh(mesh, path)
    back = load_mesh(path)
    assert np.array_equal(back.vertices, mesh.vertices)
    assert np.array_equal(back.triangles, mesh.triangles)
    assert np.array_equal(back.edges, mesh.edges)
    assert np.array_equal(back.edge_bc, mesh.edge_bc)
    assert np.array_equal(back.edge_piece, mesh.edge_piece)
    assert back.h == mesh.h
    assert len(back.pieces) == len(mesh.pieces)
    for p, q in zip(back.pieces, mesh.pieces):
        assert p.bc == q.bc and p.kind == q.kind
    back.validate()


def test_quality_floor_respects_sharp_corners():
    # corner angles above 20 degrees leave the default floor in force
    wedge30 = polygon_domain(
        [(0, 0), (2, 0), (2, round(2 * math.tan(math.radians(30)), 6))],
        ["D", "D", "N"],
    )
    mesh = triangulate(wedge30, 0.2)
    mesh.validate()
    assert mesh.min_angle() >= math.radians(20.0) - 1e-12
    # a 12 degree corner lowers the floor to (almost) the corner itself
    wedge12 = polygon_domain(
        [(0, 0), (2, 0), (2, round(2 * math.tan(math.radians(12)), 6))],
        ["D", "D", "N"],
    )
    mesh = triangulate(wedge12, 0.2)
    mesh.validate()
    assert mesh.min_angle() >= math.radians(12.0) - 1e-6
    assert mesh.min_angle() < math.radians(20.0)


def test_pure_neumann_domain_meshes():
    dom = polygon_domain([(0, 0), (1, 0), (1, 1), (0, 1)], ["N"] * 4)
    mesh = triangulate(dom, 0.2)
    mesh.validate()
    assert (mesh.edge_bc == N_CODE).all()


def test_unmeshable_h_raises():
    with pytest.raises((MeshFailure, ValueError)):
        triangulate(SQUARE, 0.0)
