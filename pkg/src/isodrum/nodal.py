"""Nodal-domain counting for piecewise-linear eigenfunctions.

A P1 eigenfunction's zero set crosses triangles along line segments, so the
sign at the barycenter classifies each triangle except in a thin threshold
band.  Triangles below threshold adopt the sign of their largest vertex, and
fully-ambiguous ones are swept into an adjacent signed component, keeping the
count free of spurious slivers.  Components are connected through shared
edges between same-sign triangles.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fem import assemble, solve_lowest
from .geometry import Domain
from .meshing import Mesh, refine, triangulate

EPS_REL = 1e-8


class AllZeroVector(ValueError):
    """Eigenvector is identically zero; nodal domains are undefined."""


@dataclass(frozen=True)
class NodalReport:
    """Sign-component census of one eigenfunction."""

    mode: int
    value: float
    count: int
    multiple: bool  # inside an eigenvalue cluster: count not canonical
    stable: bool  # equal counts across the refinement ladder
    components: tuple[tuple[int, ...], ...]  # triangle indices per component

    def __post_init__(self):
        assert self.count >= 1
        assert self.count == len(self.components)


def _adjacency(mesh: Mesh) -> list[tuple[int, int]]:
    """Pairs of triangle indices sharing an edge."""
    owner: dict[tuple[int, int], int] = {}
    pairs: list[tuple[int, int]] = []
    tris = mesh.triangles
    for t in range(len(tris)):
        for i in range(3):
            u, v = int(tris[t, i]), int(tris[t, (i + 1) % 3])
            key = (u, v) if u < v else (v, u)
            other = owner.pop(key, None)
            if other is None:
                owner[key] = t
            else:
                pairs.append((other, t))
    return pairs


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def nodal_count(mesh: Mesh, eigenvector: np.ndarray) -> NodalReport:
    """Count sign components of a full nodal vector (Dirichlet nodes zero).

    The returned report carries mode=0 and no cluster information; use
    nodal_sequence for flagged per-mode censuses.
    """
    u = np.asarray(eigenvector, dtype=float)
    if len(u) != mesh.vertex_count:
        raise ValueError("vector length does not match mesh vertices")
    norm = float(np.abs(u).max())
    if norm == 0.0:
        raise AllZeroVector("eigenvector vanishes at every node")
    eps = EPS_REL * norm

    tris = mesh.triangles
    vals = u[tris]  # (T,3)
    bary = vals.mean(axis=1)
    sign = np.where(bary >= eps, 1, np.where(bary <= -eps, -1, 0))
    pending = np.flatnonzero(sign == 0)
    if len(pending):
        dominant = np.take_along_axis(
            vals[pending],
            np.argmax(np.abs(vals[pending]), axis=1)[:, None],
            axis=1,
        ).ravel()
        strong = np.abs(dominant) >= eps
        sign[pending[strong]] = np.where(dominant[strong] > 0, 1, -1)

    pairs = _adjacency(mesh)
    uf = _UnionFind(len(tris))
    for a, b in pairs:
        if sign[a] != 0 and sign[a] == sign[b]:
            uf.union(a, b)

    # Deterministic sweep: ambiguous triangles join an adjacent signed
    # component; repeat until no progress (isolated zero islands stay out).
    changed = True
    while changed and (sign == 0).any():
        changed = False
        for a, b in pairs:
            if sign[a] == 0 and sign[b] != 0:
                sign[a] = sign[b]
                uf.union(a, b)
                changed = True
            elif sign[b] == 0 and sign[a] != 0:
                sign[b] = sign[a]
                uf.union(a, b)
                changed = True

    groups: dict[int, list[int]] = {}
    for t in range(len(tris)):
        if sign[t] != 0:
            groups.setdefault(uf.find(t), []).append(t)
    if not groups:
        raise AllZeroVector("no triangle acquired a sign above threshold")
    components = tuple(
        tuple(groups[r]) for r in sorted(groups, key=lambda r: groups[r][0])
    )
    return NodalReport(
        mode=0,
        value=float("nan"),
        count=len(components),
        multiple=False,
        stable=True,
        components=components,
    )


def nodal_sequence(
    domain: Domain,
    count: int,
    h0: float = 0.1,
    levels: int = 2,
    tol: float = 1e-8,
    seed: int = 0,
) -> list[NodalReport]:
    """Per-mode nodal censuses with multiplicity and stability flags.

    Counts are computed on `levels` successive refinements; a mode whose
    count changes across levels is flagged unstable rather than silently
    accepted.  Modes inside an eigenvalue cluster carry multiple=True and no
    canonical count claim (their census reflects the solver's arbitrary
    basis choice within the eigenspace).
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    if levels < 1:
        raise ValueError("levels must be at least 1")
    mesh = triangulate(domain, h0)
    censuses = []  # per level: list of (value, count, components)
    for lev in range(levels):
        if lev:
            mesh = refine(mesh)
        system = assemble(mesh)
        pairs = solve_lowest(system, count, tol=tol, seed=seed)
        level_rows = []
        for p in pairs:
            rep = nodal_count(mesh, system.extend(p.vector))
            level_rows.append((p.value, rep.count, rep.components))
        censuses.append(level_rows)

    finest = censuses[-1]
    values = [row[0] for row in finest]
    # Degeneracies split by O(h^2) discretization error; the level-to-level
    # drift of each value sets the scale below which two modes cannot be
    # told apart.
    if levels > 1:
        drift = [
            abs(censuses[-1][i][0] - censuses[-2][i][0]) for i in range(count)
        ]
    else:
        drift = [0.0] * count
    reports: list[NodalReport] = []
    for i in range(count):
        value, nu, comps = finest[i]
        in_cluster = any(
            j != i
            and abs(values[j] - value)
            <= max(tol, drift[i] + drift[j], 1e-6 * abs(value))
            for j in range(count)
        )
        stable = all(censuses[lev][i][1] == nu for lev in range(levels))
        if not in_cluster:
            assert nu <= i + 1, (
                f"mode {i + 1} shows {nu} nodal domains, above the Courant bound"
            )
        reports.append(
            NodalReport(
                mode=i + 1,
                value=value,
                count=nu,
                multiple=in_cluster,
                stable=stable,
                components=comps,
            )
        )
    return reports
