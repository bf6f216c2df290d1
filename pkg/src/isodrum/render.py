"""Matplotlib SVG rendering of domains, sign regions and level sets.

Boundary pieces are drawn solid for Dirichlet and dashed for Neumann, the
convention used consistently across every figure this package emits.
"""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import matplotlib.tri as mtri
import numpy as np
from matplotlib.lines import Line2D

from .geometry import BC, Domain
from .meshing import D_CODE, Mesh

plt.rcParams["svg.hashsalt"] = "isodrum"

DIRICHLET_STYLE = dict(color="crimson", linestyle="-", linewidth=1.8)
NEUMANN_STYLE = dict(color="navy", linestyle="--", linewidth=1.8)


def _legend_handles():
    return [
        Line2D([], [], label="Dirichlet", **DIRICHLET_STYLE),
        Line2D([], [], label="Neumann", **NEUMANN_STYLE),
    ]


def draw_domain(ax, domain: Domain) -> None:
    """Draw labeled boundary pieces on an existing axes."""
    sag = 1e-4 * max(domain.diameter(), 1e-30)
    for _, _, pc in domain.pieces():
        pts = [p.as_floats() for p in pc.segment.chord_points(sag)]
        xs, ys = zip(*pts)
        style = DIRICHLET_STYLE if pc.bc is BC.DIRICHLET else NEUMANN_STYLE
        ax.plot(xs, ys, **style)
    ax.set_aspect("equal")


def _finish(fig, ax, title: str, path) -> None:
    ax.set_title(title)
    ax.legend(handles=_legend_handles(), loc="upper right", fontsize=8)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def render_domain(domain: Domain, path, title: str | None = None) -> None:
    """SVG figure of a labeled domain."""
    fig, ax = plt.subplots(figsize=(5, 5))
    draw_domain(ax, domain)
    ax.margins(0.08)
    _finish(fig, ax, title if title is not None else domain.name, path)


def _triangulation(mesh: Mesh) -> mtri.Triangulation:
    return mtri.Triangulation(
        mesh.vertices[:, 0], mesh.vertices[:, 1], mesh.triangles
    )


def _draw_mesh_boundary(ax, mesh: Mesh) -> None:
    for (u, v), code in zip(mesh.edges, mesh.edge_bc):
        style = DIRICHLET_STYLE if code == D_CODE else NEUMANN_STYLE
        ax.plot(
            mesh.vertices[[u, v], 0], mesh.vertices[[u, v], 1], **style
        )
    ax.set_aspect("equal")


def render_nodal(
    mesh: Mesh, vector: np.ndarray, path, title: str = ""
) -> None:
    """Two-color sign regions of a nodal vector with the zero set overlaid."""
    tri = _triangulation(mesh)
    bary = vector[mesh.triangles].mean(axis=1)
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.tripcolor(
        tri,
        facecolors=np.sign(bary),
        cmap="RdBu",
        vmin=-1.5,
        vmax=1.5,
        alpha=0.85,
    )
    scale = float(np.abs(vector).max())
    if scale > 0:
        ax.tricontour(tri, vector, levels=[0.0], colors="black", linewidths=1.0)
    _draw_mesh_boundary(ax, mesh)
    ax.margins(0.08)
    _finish(fig, ax, title, path)


def render_eigenfunction(
    mesh: Mesh, vector: np.ndarray, path, title: str = "", levels: int = 12
) -> None:
    """Filled level sets of a nodal vector."""
    tri = _triangulation(mesh)
    fig, ax = plt.subplots(figsize=(5, 5))
    m = ax.tricontourf(tri, vector, levels=levels, cmap="RdBu_r")
    fig.colorbar(m, ax=ax, shrink=0.8)
    ax.tricontour(tri, vector, levels=[0.0], colors="black", linewidths=0.8)
    _draw_mesh_boundary(ax, mesh)
    ax.margins(0.08)
    _finish(fig, ax, title, path)


def render_spectra(
    left_values, right_values, path, title: str = "", labels=("left", "right")
) -> None:
    """Side-by-side eigenvalue ladders for two spectra."""
    fig, ax = plt.subplots(figsize=(4, 5))
    for x, (vals, lab) in enumerate(zip((left_values, right_values), labels)):
        for v in vals:
            ax.hlines(v, x - 0.3, x + 0.3, color="black", linewidth=1.2)
        ax.text(x, -0.06, lab, transform=ax.get_xaxis_transform(), ha="center")
    ax.set_xlim(-0.7, 1.7)
    ax.set_xticks([])
    ax.set_ylabel("eigenvalue")
    ax.set_title(title)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
