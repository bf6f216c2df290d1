"""P1 finite elements for the mixed Dirichlet-Neumann Laplace eigenproblem.

assemble() builds piecewise-linear stiffness and mass matrices with Neumann
conditions natural and Dirichlet conditions imposed by dof elimination; a
vertex on the closure of both a Dirichlet and a Neumann piece is eliminated
(the trial space vanishes on the closed Dirichlet set).  solve_lowest() runs
a shift-inverted Lanczos iteration with a sparse direct factorization, and
converge() wraps it in uniform refinement with per-mode Richardson
extrapolation at a fitted rate, which absorbs the reduced convergence order
caused by corner and label-change singularities.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .geometry import BC, Domain
from .meshing import D_CODE, Mesh, refine, triangulate


class EmptySystem(ValueError):
    """Every vertex is Dirichlet-constrained; no degrees of freedom remain."""


class NoConvergence(RuntimeError):
    """Eigensolver failed to reach the requested residual tolerance."""


@dataclass
class DiscreteSystem:
    """Generalized eigensystem K u = lambda M u on the free vertices.

    stiffness and mass act on dofs (mesh vertices minus the constrained
    ones); the _full variants act on all vertices and back the Rayleigh
    quotient and residual checks for externally supplied nodal vectors.
    """

    stiffness: sp.csr_matrix
    mass: sp.csr_matrix
    free: np.ndarray
    dirichlet: np.ndarray
    mesh: Mesh
    stiffness_full: sp.csr_matrix = field(repr=False, default=None)
    mass_full: sp.csr_matrix = field(repr=False, default=None)

    @property
    def dof_count(self) -> int:
        return len(self.free)

    @property
    def pure_neumann(self) -> bool:
        return len(self.dirichlet) == 0

    def extend(self, vec: np.ndarray) -> np.ndarray:
        """Dof vector -> full vertex vector, zero on Dirichlet nodes."""
        full = np.zeros(self.mesh.vertex_count)
        full[self.free] = vec
        return full

    def restrict(self, full: np.ndarray) -> np.ndarray:
        return full[self.free]

    def rayleigh(self, full: np.ndarray) -> float:
        """Rayleigh quotient of a full nodal vector."""
        num = full @ (self.stiffness_full @ full)
        den = full @ (self.mass_full @ full)
        if den <= 0:
            raise ZeroDivisionError("vector has no mass")
        return float(num / den)


@dataclass(frozen=True)
class Eigenpair:
    value: float
    vector: np.ndarray  # over dofs, mass-normalized
    residual: float


def assemble(mesh: Mesh) -> DiscreteSystem:
    """P1 Galerkin matrices with Dirichlet elimination."""
    mesh.validate()
    pts = mesh.vertices
    tris = mesh.triangles
    p = pts[tris]  # (T,3,2)
    # Gradient coefficients: grad phi_i = (b_i, c_i) / (2A).
    b = p[:, [1, 2, 0], 1] - p[:, [2, 0, 1], 1]
    c = p[:, [2, 0, 1], 0] - p[:, [1, 2, 0], 0]
    u, v = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
    area = 0.5 * (u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0])
    ke = (b[:, :, None] * b[:, None, :] + c[:, :, None] * c[:, None, :]) / (
        4.0 * area
    )[:, None, None]
    me_ref = np.array([[2, 1, 1], [1, 2, 1], [1, 1, 2]]) / 12.0
    me = area[:, None, None] * me_ref[None]

    rows = np.repeat(tris, 3, axis=1).ravel()
    cols = np.tile(tris, (1, 3)).ravel()
    V = mesh.vertex_count
    K = sp.coo_matrix((ke.ravel(), (rows, cols)), shape=(V, V)).tocsr()
    M = sp.coo_matrix((me.ravel(), (rows, cols)), shape=(V, V)).tocsr()
    K = (K + K.T) * 0.5  # exact symmetry regardless of summation order
    M = (M + M.T) * 0.5

    dirichlet = np.unique(mesh.edges[mesh.edge_bc == D_CODE])
    mask = np.ones(V, dtype=bool)
    mask[dirichlet] = False
    free = np.flatnonzero(mask)
    if len(free) == 0:
        raise EmptySystem("all mesh vertices are Dirichlet-constrained")
    return DiscreteSystem(
        stiffness=K[np.ix_(free, free)].tocsr(),
        mass=M[np.ix_(free, free)].tocsr(),
        free=free,
        dirichlet=dirichlet,
        mesh=mesh,
        stiffness_full=K,
        mass_full=M,
    )


def solve_lowest(
    system: DiscreteSystem, count: int, tol: float = 1e-8, seed: int = 0
) -> list[Eigenpair]:
    """The `count` smallest eigenpairs, mass-normalized and sign-fixed.

    Shift-invert about zero once Dirichlet elimination makes the stiffness
    definite; pure-Neumann systems use a small positive shift so the
    factorization stays nonsingular despite the constant-function kernel.
    """
    n = system.dof_count
    if count >= n:
        raise ValueError(f"requested {count} modes but only {n} dofs")
    if count < 1:
        raise ValueError("count must be at least 1")
    K, M = system.stiffness, system.mass
    sigma = 0.0
    if system.pure_neumann:
        sigma = 1e-6 * K.diagonal().sum() / M.diagonal().sum()
    v0 = np.random.default_rng(seed).standard_normal(n)
    try:
        vals, vecs = eigsh(K, k=count, M=M, sigma=sigma, which="LM", v0=v0)
    except ArpackNoConvergence as exc:
        raise NoConvergence(
            f"{len(exc.eigenvalues)} of {count} modes converged"
        ) from exc
    order = np.argsort(vals)
    vals = vals[order]
    vecs = vecs[:, order]
    pairs = []
    for i in range(count):
        v = vecs[:, i]
        mv = M @ v
        v = v / math.sqrt(v @ mv)
        peak = np.argmax(np.abs(v))
        if v[peak] < 0:
            v = -v
        res = float(np.linalg.norm(K @ v - vals[i] * (M @ v)) / np.linalg.norm(M @ v))
        scale = max(abs(vals[i]), 1.0)
        if res > tol * scale:
            raise NoConvergence(
                f"mode {i} residual {res:.3e} above tolerance {tol * scale:.3e}"
            )
        pairs.append(Eigenpair(float(vals[i]), v, res))
    return pairs


@dataclass(frozen=True)
class ConvergedSpectrum:
    """Extrapolated low spectrum of one domain."""

    values: np.ndarray  # extrapolated, sorted ascending
    finest: np.ndarray
    errors: np.ndarray  # >= 0, |finest - extrapolated| based
    levels: int
    h0: float
    name: str = ""

    def __post_init__(self):
        assert np.all(self.errors >= 0)
        assert np.all(np.diff(self.values) >= -1e-9 * np.abs(self.values[-1]))

    def __len__(self) -> int:
        return len(self.values)

    def clusters(self, tol: float = 0.0) -> list[list[int]]:
        """Group mode indices by the multiplicity rule: values within
        max(tol, 1e-6 * value) of the running cluster head."""
        groups: list[list[int]] = []
        for i, v in enumerate(self.values):
            if groups:
                head = self.values[groups[-1][0]]
                if abs(v - head) <= max(tol, 1e-6 * max(abs(v), abs(head))):
                    groups[-1].append(i)
                    continue
            groups.append([i])
        return groups


def _extrapolate(series: np.ndarray) -> tuple[float, float]:
    """Richardson extrapolation with per-mode fitted rate.

    With three or more levels the rate 2^(-2 alpha) per halving is estimated
    from the last three values; outside a sane window the finest value is
    kept with the last decrement as the error bar.
    """
    c = float(series[-1])
    if len(series) == 2:
        b = float(series[0])
        e = b - c
        lam = c - e / 3.0  # assume full second-order rate
        return lam, abs(c - lam) + 1e-12 * abs(c)
    a, b = float(series[-3]), float(series[-2])
    e1, e2 = a - b, b - c
    if e1 <= 0 or e2 <= 0:
        # Non-monotone tail: already at rounding level.
        return c, abs(e2) + 1e-12 * abs(c)
    theta = e2 / e1
    if not (0.02 <= theta <= 0.95):
        return c, abs(e2) + 1e-12 * abs(c)
    lam = c - e2 * theta / (1.0 - theta)
    return lam, abs(c - lam) + 1e-12 * abs(c)


def converge(
    domain: Domain,
    count: int,
    levels: int = 3,
    h0: float = 0.1,
    tol: float = 1e-8,
    seed: int = 0,
) -> ConvergedSpectrum:
    """Solve on `levels` uniform refinements and extrapolate each mode."""
    if levels < 2:
        raise ValueError("levels must be at least 2")
    mesh = triangulate(domain, h0)
    table = np.empty((levels, count))
    for lev in range(levels):
        if lev:
            mesh = refine(mesh)
        pairs = solve_lowest(assemble(mesh), count, tol=tol, seed=seed)
        table[lev] = [p.value for p in pairs]
    values = np.empty(count)
    errors = np.empty(count)
    for i in range(count):
        values[i], errors[i] = _extrapolate(table[:, i])
    order = np.argsort(values, kind="stable")
    return ConvergedSpectrum(
        values=values[order],
        finest=table[-1][order],
        errors=errors[order],
        levels=levels,
        h0=h0,
        name=domain.name,
    )


@dataclass(frozen=True)
class ModeMatch:
    mode: int
    left: float
    right: float
    gap: float
    allowed: float

    @property
    def ok(self) -> bool:
        return self.gap <= self.allowed


@dataclass(frozen=True)
class MatchReport:
    """Per-mode comparison of two spectra (or spectrum unions)."""

    rows: tuple[ModeMatch, ...]
    left_name: str = ""
    right_name: str = ""
    skipped: bool = False
    note: str = ""

    @property
    def ok(self) -> bool:
        return self.skipped or all(r.ok for r in self.rows)

    @property
    def first_mismatch(self) -> int | None:
        for r in self.rows:
            if not r.ok:
                return r.mode
        return None

    def __str__(self) -> str:
        if self.skipped:
            return f"skipped: {self.note}"
        verdict = (
            "isospectral within error"
            if self.ok
            else f"counterexample at mode {self.first_mismatch}"
        )
        lines = [f"{self.left_name or 'left'} vs {self.right_name or 'right'}: {verdict}"]
        for r in self.rows:
            tag = "ok" if r.ok else "MISMATCH"
            lines.append(
                f"  mode {r.mode}: {r.left:.9g} vs {r.right:.9g} "
                f"gap {r.gap:.3e} allowed {r.allowed:.3e} {tag}"
            )
        return "\n".join(lines)


def compare_spectra(
    s1: ConvergedSpectrum, s2: ConvergedSpectrum, count: int
) -> MatchReport:
    """Greedy sorted pairing of the first `count` modes.

    A pair matches when the gap stays within the combined per-mode error
    estimates (plus a machine-precision floor).
    """
    if len(s1) < count or len(s2) < count:
        raise ValueError("spectra have fewer modes than requested")
    rows = []
    for i in range(count):
        v1, v2 = float(s1.values[i]), float(s2.values[i])
        allowed = float(s1.errors[i] + s2.errors[i])
        allowed += 1e-9 * max(abs(v1), abs(v2), 1.0)
        rows.append(
            ModeMatch(mode=i + 1, left=v1, right=v2, gap=abs(v1 - v2), allowed=allowed)
        )
    return MatchReport(rows=tuple(rows), left_name=s1.name, right_name=s2.name)


def _union(spectra: list[ConvergedSpectrum], count: int, name: str) -> ConvergedSpectrum:
    merged = sorted(
        (float(v), float(e))
        for s in spectra
        for v, e in zip(s.values, s.errors)
    )[:count]
    return ConvergedSpectrum(
        values=np.array([v for v, _ in merged]),
        finest=np.array([v for v, _ in merged]),
        errors=np.array([e for _, e in merged]),
        levels=spectra[0].levels,
        h0=spectra[0].h0,
        name=name,
    )


def verify_splitting(
    identity,
    count: int,
    levels: int = 3,
    h0: float = 0.1,
    tol: float = 1e-8,
    seed: int = 0,
) -> MatchReport:
    """Check a spectral-splitting identity numerically.

    Each side's spectra are converged to `count` modes and merged as sorted
    multisets; identities marked not checkable (covering-manifold left sides)
    are reported as skipped.
    """
    if not identity.checkable:
        return MatchReport(
            rows=(), skipped=True, note=identity.note or identity.name
        )
    lhs = [converge(d, count, levels, h0, tol, seed) for d in identity.lhs]
    rhs = [converge(d, count, levels, h0, tol, seed) for d in identity.rhs]
    left = _union(lhs, count, " + ".join(d.name for d in identity.lhs))
    right = _union(rhs, count, " + ".join(d.name for d in identity.rhs))
    return compare_spectra(left, right, count)
