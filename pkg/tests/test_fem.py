"""P1 eigensolver: assembly identities, convergence, spectrum comparison."""
import importlib.resources as resources
import math

import numpy as np
import pytest

from isodrum.closed_form import lambda_value
from isodrum.construct import build_pair, load_block, splitting_chain
from isodrum.fem import (
    EmptySystem,
    NoConvergence,
    assemble,
    compare_spectra,
    converge,
    solve_lowest,
    verify_splitting,
)
from isodrum.geometry import MirrorLine, Point2, point, polygon_domain, reflect
from isodrum.meshing import triangulate
from isodrum.scalars import Q2, SQRT2

FIXTURES = resources.files("isodrum") / "fixtures"

ALL_D = polygon_domain([(0, 0), (1, 0), (1, 1), (0, 1)], ["D"] * 4)
ALL_N = polygon_domain([(0, 0), (1, 0), (1, 1), (0, 1)], ["N"] * 4)
MIXED = polygon_domain([(0, 0), (1, 0), (1, 1), (0, 1)], ["D", "N", "D", "D"])


def test_stiffness_kills_constants():
    sys_n = assemble(triangulate(ALL_N, 0.2))
    ones = np.ones(sys_n.dof_count)
    assert np.abs(sys_n.stiffness @ ones).max() < 1e-12


def test_mass_total_is_area():
    sys_n = assemble(triangulate(ALL_N, 0.2))
    assert sys_n.mass.sum() == pytest.approx(1.0, rel=1e-12)


def test_matrices_symmetric():
    sys_d = assemble(triangulate(ALL_D, 0.2))
    assert (sys_d.stiffness != sys_d.stiffness.T).nnz == 0
    assert (sys_d.mass != sys_d.mass.T).nnz == 0


def test_dirichlet_elimination():
    mesh = triangulate(ALL_D, 0.3)
    sys_d = assemble(mesh)
    assert sys_d.dof_count == mesh.vertex_count - len(mesh.boundary_vertices())
    assert not sys_d.pure_neumann
    assert assemble(triangulate(ALL_N, 0.3)).pure_neumann


def test_empty_system():
    # coarse all-Dirichlet mesh: every vertex constrained
    with pytest.raises(EmptySystem):
        assemble(triangulate(ALL_D, 0.9))


def test_mode_count_exceeding_dofs():
    sys_d = assemble(triangulate(ALL_D, 0.3))
    with pytest.raises(ValueError):
        solve_lowest(sys_d, sys_d.dof_count + 1)


def test_neumann_zero_mode():
    pairs = solve_lowest(assemble(triangulate(ALL_N, 0.15)), 3)
    assert abs(pairs[0].value) < 1e-8
    # the zero mode is the constant, mass-normalized to 1 on area 1
    v = pairs[0].vector
    assert np.abs(v - v[0]).max() < 1e-6 * abs(v[0])
    # raw P1 value at one coarse level only needs ballpark accuracy
    assert pairs[1].value == pytest.approx(math.pi**2, rel=0.05)


def test_solver_is_deterministic():
    sys_d = assemble(triangulate(ALL_D, 0.15))
    a = solve_lowest(sys_d, 4, seed=7)
    b = solve_lowest(sys_d, 4, seed=7)
    for x, y in zip(a, b):
        assert x.value == y.value
        assert np.array_equal(x.vector, y.vector)


def test_sign_convention():
    sys_d = assemble(triangulate(ALL_D, 0.15))
    for pair in solve_lowest(sys_d, 4):
        assert pair.vector[np.argmax(np.abs(pair.vector))] > 0


def test_residual_reported_and_small():
    sys_d = assemble(triangulate(ALL_D, 0.15))
    for pair in solve_lowest(sys_d, 4):
        assert pair.residual < 1e-8 * max(pair.value, 1.0)


def test_impossible_tolerance_raises():
    sys_d = assemble(triangulate(ALL_D, 0.2))
    with pytest.raises(NoConvergence):
        solve_lowest(sys_d, 3, tol=1e-30)


def test_discrete_values_overshoot():
    # conforming P1 eigenvalues bound the true ones from above
    vals = [p.value for p in solve_lowest(assemble(triangulate(ALL_D, 0.2)), 3)]
    exact = [2 * math.pi**2, 5 * math.pi**2, 5 * math.pi**2]
    for v, e in zip(vals, exact):
        assert v >= e - 1e-9


def test_refinement_monotone_on_polygon():
    # nested P1 spaces: every eigenvalue is non-increasing under refinement
    from isodrum.meshing import refine

    mesh = triangulate(ALL_D, 0.25)
    prev = None
    for _ in range(3):
        vals = np.array([p.value for p in solve_lowest(assemble(mesh), 4)])
        if prev is not None:
            assert (vals <= prev + 1e-9).all()
        prev = vals
        mesh = refine(mesh)


def test_converged_dirichlet_square():
    spec = converge(ALL_D, 4, levels=3, h0=0.12)
    exact = np.array([2, 5, 5, 8]) * math.pi**2
    assert np.allclose(spec.values, exact, rtol=2e-4)
    # extrapolation reports honest error bars
    assert (np.abs(spec.values - exact) <= 3 * spec.errors + 1e-6 * exact).all()


def test_converged_mixed_square_matches_closed_form():
    spec = converge(MIXED, 4, levels=3, h0=0.12)
    exact = np.array(
        [lambda_value(0, 1), lambda_value(1, 1), lambda_value(0, 2), lambda_value(1, 2)]
    )
    assert np.allclose(spec.values, exact, rtol=5e-4)


def test_rigid_motion_leaves_spectrum():
    half = SQRT2 / Q2(2)
    moved = reflect(
        reflect(MIXED, MirrorLine(point(3, 0), Point2(half, half))),
        MirrorLine(point(0, -2), point(1, 0)),
    )
    s1 = converge(MIXED, 3, levels=2, h0=0.15)
    s2 = converge(moved, 3, levels=2, h0=0.15)
    rep = compare_spectra(s1, s2, 3)
    assert rep.ok, str(rep)


def test_congruent_relabelings_match():
    # N on the right side vs N on the top: a rotation maps one to the other
    dndd = polygon_domain([(0, 0), (1, 0), (1, 1), (0, 1)], ["D", "N", "D", "D"])
    ddnd = polygon_domain([(0, 0), (1, 0), (1, 1), (0, 1)], ["D", "D", "N", "D"])
    rep = compare_spectra(
        converge(dndd, 3, levels=2, h0=0.15), converge(ddnd, 3, levels=2, h0=0.15), 3
    )
    assert rep.ok, str(rep)


def test_compare_spectra_self():
    spec = converge(ALL_D, 3, levels=2, h0=0.2)
    rep = compare_spectra(spec, spec, 3)
    assert rep.ok
    assert all(r.gap == 0.0 for r in rep.rows)
    assert rep.first_mismatch is None


def test_compare_spectra_detects_mismatch():
    rep = compare_spectra(
        converge(ALL_D, 3, levels=2, h0=0.2),
        converge(MIXED, 3, levels=2, h0=0.2),
        3,
    )
    assert not rep.ok
    assert rep.first_mismatch == 1
    assert "MISMATCH" in str(rep)


def test_report_formatting():
    spec = converge(ALL_D, 2, levels=2, h0=0.2)
    text = str(compare_spectra(spec, spec, 2))
    assert "mode" in text and "ok" in text


def test_verify_splitting_skips_covering_identities():
    chain = splitting_chain(load_block(FIXTURES / "basic_block.json"))
    skipped = [i for i in chain if not i.checkable]
    rep = verify_splitting(skipped[0], 4, levels=2, h0=0.2)
    assert rep.skipped and rep.ok
    assert rep.note


def test_verify_splitting_one_identity():
    chain = splitting_chain(load_block(FIXTURES / "basic_block.json"))
    rep = verify_splitting(chain[0], 4, levels=2, h0=0.15)
    assert not rep.skipped
    assert rep.ok, str(rep)


def test_pair_isospectral_few_modes():
    pair = build_pair(load_block(FIXTURES / "basic_block.json"))
    s1 = converge(pair.omega1, 4, levels=2, h0=0.15)
    s2 = converge(pair.omega2, 4, levels=2, h0=0.15)
    rep = compare_spectra(s1, s2, 4)
    assert rep.ok, str(rep)
    exact = np.array([5, 13, 17, 25]) / 4 * math.pi**2
    assert np.allclose(s1.values, exact, rtol=2e-3)


def test_negative_control_detected():
    # relabel one side of omega2: the fake pair must fail the comparison
    pair = build_pair(load_block(FIXTURES / "basic_block.json"))
    fake = polygon_domain(
        [(p.segment.a.x, p.segment.a.y) for p in pair.omega2.loops[0]], ["D"] * 4
    )
    rep = compare_spectra(
        converge(pair.omega1, 4, levels=2, h0=0.15),
        converge(fake, 4, levels=2, h0=0.15),
        4,
    )
    assert not rep.ok
    assert rep.first_mismatch == 1


def test_spectrum_clusters():
    spec = converge(ALL_D, 4, levels=3, h0=0.12)
    clusters = spec.clusters(1e-3)
    sizes = [len(c) for c in clusters]
    assert sizes == [1, 2, 1]  # 2pi^2, {5pi^2, 5pi^2}, 8pi^2
