"""Command-line entry point: spectra, constructions, verification, figures.

Exit codes: 0 when the requested claim verifies, 1 on a mismatch or failed
computation, 2 on usage errors.  Identical inputs and seed produce
byte-identical CSV output.
"""
from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from . import closed_form
from .construct import (
    InvalidBlock,
    build_pair,
    build_quad,
    build_tower,
    load_block,
    load_quad_block,
    splitting_chain,
)
from .fem import (
    NoConvergence,
    _extrapolate,
    assemble,
    compare_spectra,
    converge,
    solve_lowest,
    verify_splitting,
)
from .geometry import InvalidDomain, load_domain, save_domain
from .invariants import DegenerateCorner, compare_invariants, heat_invariants
from .meshing import MeshFailure, refine, triangulate
from .nodal import AllZeroVector, nodal_sequence
from .render import (
    render_domain,
    render_eigenfunction,
    render_nodal,
    render_spectra,
)
from .transplant import (
    TransplantInput,
    inverse_transplant,
    make_setup,
    refine_setup,
    residual,
    transplant,
)

EXACT_HEADER = [
    "rank",
    "value_over_pi2_num",
    "value_over_pi2_den",
    "value_float",
    "multiplicity",
    "indices",
]
SPECTRUM_HEADER = ["mode", "value", "error_estimate"]


def _exact_rows(which: str, count: int) -> list[list]:
    ms = closed_form.spectrum(which, count)
    rows = []
    rank = 1
    for e in ms.entries:
        idx = " ".join(f"{i}:{j}" for i, j in e.indices)
        rows.append(
            [
                rank,
                e.coeff.numerator,
                e.coeff.denominator,
                repr(e.value),
                e.multiplicity,
                idx,
            ]
        )
        rank += e.multiplicity
    return rows


def _write_csv(path, header: list[str], rows: list[list]) -> None:
    if path is None:
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        return
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def cmd_exact(args) -> int:
    families = ["square", "triangle"] if args.which == "both" else [args.which]
    tables = {f: _exact_rows(f, args.count) for f in families}
    for f in families:
        if args.out is None:
            print(f"# {f}")
            _write_csv(None, EXACT_HEADER, tables[f])
        else:
            out = Path(args.out)
            path = (
                out
                if len(families) == 1
                else out.with_name(f"{out.stem}_{f}{out.suffix}")
            )
            _write_csv(path, EXACT_HEADER, tables[f])
            print(path)
    if args.which == "both":
        same = [r[1:5] for r in tables["square"]] == [
            r[1:5] for r in tables["triangle"]
        ]
        print(f"families agree: {same}")
        return 0 if same else 1
    return 0


def cmd_construct(args) -> int:
    outdir = Path(args.out_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    if args.kind == "quad":
        domains = build_quad(load_quad_block(args.block))
    elif args.kind == "tower":
        domains = build_tower(load_block(args.block), args.n)
    else:
        pair = build_pair(load_block(args.block))
        domains = (pair.omega1, pair.omega2)
    for dom in domains:
        path = outdir / f"{dom.name}.json"
        save_domain(dom, path)
        print(path)
    return 0


def cmd_spectrum(args) -> int:
    dom = load_domain(args.spec)
    s = converge(
        dom, args.modes, levels=args.levels, h0=args.h0, tol=args.tol, seed=args.seed
    )
    rows = [
        [i + 1, repr(float(v)), repr(float(e))]
        for i, (v, e) in enumerate(zip(s.values, s.errors))
    ]
    _write_csv(args.out, SPECTRUM_HEADER, rows)
    return 0


def cmd_compare(args) -> int:
    d1 = load_domain(args.spec1)
    d2 = load_domain(args.spec2)
    kw = dict(levels=args.levels, h0=args.h0, tol=args.tol, seed=args.seed)
    s1 = converge(d1, args.modes, **kw)
    s2 = converge(d2, args.modes, **kw)
    rep = compare_spectra(s1, s2, args.modes)
    print(rep)
    if args.svg:
        render_spectra(
            s1.values,
            s2.values,
            args.svg,
            title="first modes",
            labels=(d1.name or "left", d2.name or "right"),
        )
        print(args.svg)
    return 0 if rep.ok else 1


def cmd_split(args) -> int:
    block = load_block(args.block)
    failures = 0
    for ident in splitting_chain(block):
        rep = verify_splitting(
            ident,
            args.modes,
            levels=args.levels,
            h0=args.h0,
            tol=args.tol,
            seed=args.seed,
        )
        if rep.skipped:
            print(f"{ident.name}: skipped ({rep.note})")
            continue
        verdict = "ok" if rep.ok else f"MISMATCH at mode {rep.first_mismatch}"
        print(f"{ident.name}: {verdict}")
        failures += 0 if rep.ok else 1
    return 1 if failures else 0


def cmd_invariants(args) -> int:
    d1 = load_domain(args.spec1)
    t1 = heat_invariants(d1)
    print(f"{d1.name or args.spec1}: a0={t1.a0!r} a1={t1.a1!r} a2={t1.a2!r}")
    if args.spec2 is None:
        return 0
    d2 = load_domain(args.spec2)
    t2 = heat_invariants(d2)
    print(f"{d2.name or args.spec2}: a0={t2.a0!r} a1={t2.a1!r} a2={t2.a2!r}")
    rep = compare_invariants(d1, d2, tol=args.tol)
    print(rep)
    return 0 if rep.ok else 1


def cmd_transplant(args) -> int:
    block = load_block(args.block)
    setups = [make_setup(block, args.h)]
    for _ in range(args.levels - 1):
        setups.append(refine_setup(setups[-1]))
    values = []
    finest_pairs = None
    system1 = None
    for s in setups:
        system1 = assemble(s.omega1)
        finest_pairs = solve_lowest(system1, args.mode, tol=args.tol, seed=args.seed)
        values.append([p.value for p in finest_pairs])
    table = np.asarray(values)
    _, err = _extrapolate(table[:, args.mode - 1])
    setup = setups[-1]
    pair = finest_pairs[args.mode - 1]
    u1 = system1.extend(pair.vector)
    out = transplant(TransplantInput(setup=setup, value=pair.value, u1=u1))
    system2 = assemble(setup.omega2)
    gap, bc = residual(out.u2, pair.value, system2)
    back = inverse_transplant(out.u2, setup)
    rt = float(np.abs(back - u1).max() / np.abs(u1).max())
    ok = gap * pair.value <= 3.0 * err and bc == 0.0
    print(f"mode {args.mode}: value {pair.value!r}")
    print(f"  discretization error estimate: {err:.3e}")
    print(f"  rayleigh gap (relative): {gap:.3e}")
    print(f"  dirichlet trace violation: {bc:.3e}")
    print(f"  interface value gap: {out.matching.max_value_gap:.3e}")
    print(f"  inverse roundtrip error: {rt:.3e}")
    print(f"  verdict: {'ok' if ok else 'MISMATCH'}")
    if args.svg_u1:
        render_eigenfunction(
            setup.omega1, u1, args.svg_u1, title=f"u1 mode {args.mode}"
        )
        print(args.svg_u1)
    if args.svg_u2:
        render_eigenfunction(
            setup.omega2, out.u2, args.svg_u2, title=f"u2 mode {args.mode}"
        )
        print(args.svg_u2)
    return 0 if ok else 1


def cmd_nodal(args) -> int:
    dom = load_domain(args.spec)
    reports = nodal_sequence(
        dom, args.modes, h0=args.h0, levels=args.levels, tol=args.tol, seed=args.seed
    )
    for r in reports:
        flags = []
        if r.multiple:
            flags.append("multiple")
        if not r.stable:
            flags.append("unstable")
        tail = f" ({', '.join(flags)})" if flags else ""
        print(f"mode {r.mode}: value {r.value:.6f} nu={r.count}{tail}")
    if args.svg:
        mesh = triangulate(dom, args.h0)
        for _ in range(args.levels - 1):
            mesh = refine(mesh)
        system = assemble(mesh)
        pairs = solve_lowest(system, args.modes, tol=args.tol, seed=args.seed)
        render_nodal(
            mesh,
            system.extend(pairs[args.modes - 1].vector),
            args.svg,
            title=f"{dom.name} mode {args.modes} sign regions",
        )
        print(args.svg)
    return 0


def cmd_render(args) -> int:
    dom = load_domain(args.spec)
    render_domain(dom, args.out, title=args.title if args.title else None)
    print(args.out)
    return 0


def _add_fem_flags(p, modes_default: int = 10) -> None:
    p.add_argument("--modes", type=int, default=modes_default, help="mode count")
    p.add_argument("--h0", type=float, default=0.1, help="coarsest mesh size")
    p.add_argument("--levels", type=int, default=3, help="refinement levels")
    p.add_argument("--tol", type=float, default=1e-8, help="solver tolerance")
    p.add_argument("--seed", type=int, default=0, help="iteration seed")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="isodrum",
        description="Spectra of planar domains with mixed boundary conditions: "
        "reflection constructions, verification, and figures.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("exact", help="closed-form spectra of the model pair")
    p.add_argument("--which", choices=["square", "triangle", "both"], default="both")
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--out", help="CSV path (suffixed per family for 'both')")
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("construct", help="build domains from a block spec")
    p.add_argument("--block", required=True)
    p.add_argument("--kind", choices=["pair", "tower", "quad"], default="pair")
    p.add_argument("-n", type=int, default=2, help="doublings for towers")
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("spectrum", help="converged FEM spectrum as CSV")
    p.add_argument("spec")
    _add_fem_flags(p)
    p.add_argument("--out", help="CSV path (stdout if omitted)")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("compare", help="compare two spectra mode by mode")
    p.add_argument("spec1")
    p.add_argument("spec2")
    _add_fem_flags(p)
    p.add_argument("--svg", help="eigenvalue-ladder figure path")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("split", help="verify spectral splitting identities")
    p.add_argument("--block", required=True)
    _add_fem_flags(p, modes_default=8)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("invariants", help="heat-trace triple and comparison")
    p.add_argument("spec1")
    p.add_argument("spec2", nargs="?")
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_invariants)

    p = sub.add_parser("transplant", help="transplant an eigenfunction")
    p.add_argument("--block", required=True)
    p.add_argument("--mode", type=int, default=1)
    p.add_argument("--h", type=float, default=0.05, help="block mesh size")
    p.add_argument("--levels", type=int, default=3)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--svg-u1", help="level-set figure of the source mode")
    p.add_argument("--svg-u2", help="level-set figure of the transplanted mode")
    p.set_defaults(func=cmd_transplant)

    p = sub.add_parser("nodal", help="nodal-domain counts per mode")
    p.add_argument("spec")
    _add_fem_flags(p, modes_default=4)
    p.set_defaults(levels=2)
    p.add_argument("--svg", help="sign-region figure of the last mode")
    p.set_defaults(func=cmd_nodal)

    p = sub.add_parser("render", help="SVG of a labeled domain")
    p.add_argument("spec")
    p.add_argument("--out", required=True)
    p.add_argument("--title", default="")
    p.set_defaults(func=cmd_render)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    for attr in ("modes", "h0", "levels", "tol", "count", "h", "mode", "n"):
        if getattr(args, attr, 1) is not None and getattr(args, attr, 1) <= 0:
            print(f"{attr} must be positive", file=sys.stderr)
            return 2
    try:
        return args.func(args)
    except (
        InvalidDomain,
        InvalidBlock,
        DegenerateCorner,
        AllZeroVector,
        FileNotFoundError,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (MeshFailure, NoConvergence) as exc:
        print(f"computation failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
