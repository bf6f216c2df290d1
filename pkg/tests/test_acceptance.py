"""Acceptance gate: the nine headline claims, one printed verdict each.

Each test prints a single [PASS]/[FAIL] line on the real stdout so the
verdicts stay visible inside a captured pytest run.
"""
import importlib.resources as resources
import math
import sys
import time
from contextlib import contextmanager
from fractions import Fraction

import numpy as np
import pytest

from isodrum.closed_form import (
    lambda_coeff,
    lambda_to_mu,
    mu_coeff,
    mu_to_lambda,
    spectrum,
)
from isodrum.construct import build_pair, load_block, splitting_chain
from isodrum.fem import (
    _extrapolate,
    assemble,
    compare_spectra,
    converge,
    solve_lowest,
    verify_splitting,
)
from isodrum.geometry import polygon_domain
from isodrum.invariants import compare_invariants, heat_invariants
from isodrum.nodal import nodal_sequence
from isodrum.transplant import (
    TransplantInput,
    inverse_transplant,
    make_setup,
    refine_setup,
    residual,
    transplant,
)

FIXTURES = resources.files("isodrum") / "fixtures"
PI2 = math.pi * math.pi

_CAP = None


@pytest.fixture(autouse=True)
def _verdict_channel(capfd):
    global _CAP
    _CAP = capfd
    yield
    _CAP = None


def _emit(line):
    if _CAP is not None:
        with _CAP.disabled():
            print(line, flush=True)
    else:
        print(line, file=sys.__stdout__, flush=True)


@contextmanager
def verdict(label):
    try:
        yield
    except BaseException:
        _emit(f"[FAIL] {label}")
        raise
    _emit(f"[PASS] {label}")


@pytest.fixture(scope="module")
def basic_pair():
    return build_pair(load_block(FIXTURES / "basic_block.json"))


def test_criterion_1_exact_isospectrality():
    with verdict("criterion 1: exact square/triangle isospectrality to depth 10000"):
        t0 = time.time()
        sq = spectrum("square", 10_000)
        tr = spectrum("triangle", 10_000)
        assert sq.values()[:10_000] == tr.values()[:10_000]
        for k in range(1, 201):
            for l in range(k):
                m = mu_to_lambda(k, l)
                assert lambda_coeff(m.m, m.n) == mu_coeff(k, l)
                back = lambda_to_mu(m.m, m.n)
                assert (back.k, back.l) == (k, l)
        assert time.time() - t0 < 5.0


def test_criterion_2_bijection_anchor():
    with verdict("criterion 2: index anchor (3,0) <-> (1,2) at 25*pi^2/4"):
        sq = mu_to_lambda(3, 0)
        assert (sq.m, sq.n) == (1, 2)
        assert mu_coeff(3, 0) == lambda_coeff(1, 2) == Fraction(25, 4)
        assert abs(float(Fraction(25, 4)) * PI2 - 61.68502750680849) < 1e-12


def test_criterion_3_fem_oracle_accuracy(basic_pair):
    with verdict("criterion 3: extrapolated FEM within 0.5% of closed form (10 modes)"):
        t0 = time.time()
        spec = converge(basic_pair.omega1, 10, levels=3, h0=0.05)
        exact = np.array(
            [float(c) for c in spectrum("square", 10).values()[:10]]
        ) * PI2
        rel = np.abs(spec.values - exact) / exact
        assert rel.max() < 0.005, f"worst relative gap {rel.max():.2e}"
        assert time.time() - t0 < 120.0


def test_criterion_4_numerical_isospectrality():
    with verdict("criterion 4: three fixture pairs isospectral to 8 modes, control fails"):
        for name in ("basic_block", "strip_block", "sector_block"):
            pair = build_pair(load_block(FIXTURES / f"{name}.json"))
            s1 = converge(pair.omega1, 8, levels=3, h0=0.08)
            s2 = converge(pair.omega2, 8, levels=3, h0=0.08)
            rep = compare_spectra(s1, s2, 8)
            assert rep.ok, f"{name}:\n{rep}"
        # control: strip the reflection labeling from the second domain
        pair = build_pair(load_block(FIXTURES / "basic_block.json"))
        fake = polygon_domain(
            [(p.segment.a.x, p.segment.a.y) for p in pair.omega2.loops[0]],
            ["D"] * 4,
        )
        bad = compare_spectra(
            converge(pair.omega1, 8, levels=3, h0=0.08),
            converge(fake, 8, levels=3, h0=0.08),
            8,
        )
        assert not bad.ok and bad.first_mismatch == 1


def test_criterion_5_splitting_identities():
    with verdict("criterion 5: spectra split across the mirror lines as multisets"):
        basic = load_block(FIXTURES / "basic_block.json")
        chain = splitting_chain(basic)
        by_name = {i.name: i for i in chain}
        for name in (
            "sigma_DD(omega1) = sigma_DN(K) + sigma_DD(K)",
            "sigma_NN(omega1) = sigma_ND(K) + sigma_NN(K)",
        ):
            rep = verify_splitting(by_name[name], 8, levels=3, h0=0.08)
            assert not rep.skipped and rep.ok, f"{name}:\n{rep}"
        strip = load_block(FIXTURES / "strip_block.json")
        tower = {i.name: i for i in splitting_chain(strip)}
        rep = verify_splitting(
            tower["sigma_ND(K4) = sigma_DN(K4')"], 6, levels=3, h0=0.1
        )
        assert not rep.skipped and rep.ok, str(rep)


def test_criterion_6_heat_invariants(basic_pair):
    with verdict("criterion 6: heat-trace triple (1, 2, 0) and pairwise agreement"):
        for dom in (basic_pair.omega1, basic_pair.omega2):
            h = heat_invariants(dom)
            assert abs(h.a0 - 1.0) < 1e-12
            assert abs(h.a1 - 2.0) < 1e-12
            assert abs(h.a2) < 1e-12
        for name in ("basic_block", "strip_block", "sector_block"):
            pair = build_pair(load_block(FIXTURES / f"{name}.json"))
            assert compare_invariants(pair.omega1, pair.omega2, tol=1e-9).ok
        mislabeled = polygon_domain(
            [(p.segment.a.x, p.segment.a.y) for p in basic_pair.omega2.loops[0]],
            ["D"] * 4,
        )
        assert not compare_invariants(basic_pair.omega1, mislabeled).ok


def test_criterion_7_transplantation():
    with verdict("criterion 7: transplanted modes 1-5 solve the partner system at h=0.02"):
        block = load_block(FIXTURES / "basic_block.json")
        setups = [make_setup(block, 0.08)]
        while setups[-1].kmesh.h > 0.02 + 1e-12:
            setups.append(refine_setup(setups[-1]))
        assert setups[-1].kmesh.h == pytest.approx(0.02)
        per_level = []
        for s in setups:
            system = assemble(s.omega1)
            per_level.append((system, solve_lowest(system, 5)))
        finest_sys, finest_pairs = per_level[-1]
        system2 = assemble(setups[-1].omega2)
        eps = np.finfo(float).eps
        for mode in range(5):
            series = [pairs[mode].value for _, pairs in per_level]
            _, err = _extrapolate(series)
            pair = finest_pairs[mode]
            u1 = finest_sys.extend(pair.vector)
            out = transplant(TransplantInput(setups[-1], pair.value, u1))
            gap, bc = residual(out.u2, pair.value, system2)
            assert gap * pair.value <= 3.0 * err, f"mode {mode + 1}"
            assert bc == 0.0
            assert out.matching.max_value_gap == 0.0
            back = inverse_transplant(out.u2, setups[-1])
            assert np.abs(back - u1).max() <= 4 * eps * np.abs(u1).max()


def test_criterion_8_nodal_counts(basic_pair):
    with verdict("criterion 8: fourth modes split 4 vs 3 nodal domains, stably"):
        r1 = nodal_sequence(basic_pair.omega1, 4, h0=0.05, levels=2)
        r2 = nodal_sequence(basic_pair.omega2, 4, h0=0.05, levels=2)
        assert [r.count for r in r1] == [1, 2, 2, 4]
        assert [r.count for r in r2] == [1, 2, 2, 3]
        assert all(r.stable for r in r1) and all(r.stable for r in r2)
        assert r1[0].count == 1 and r2[0].count == 1
        for reports in (r1, r2):
            for r in reports:
                if not r.multiple:
                    assert r.count <= r.mode


def test_criterion_9_property_suites():
    with verdict("criterion 9: randomized property suites (>=100 cases each)"):
        import test_properties as props

        props.test_reflection_involution()
        props.test_glue_area_additivity()
        props.test_monotone_decrease_under_refinement()
        props.test_comparison_determinism_and_symmetry()
