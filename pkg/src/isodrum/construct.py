"""Isospectral-pair factory: reflection constructions on a building block.

A construction block is a domain K between two mirror lines a and b, with
some boundary pieces on each line.  Reflecting K across a (resp. b) and
labeling the outer line pieces with opposite conditions produces a pair of
mixed-boundary domains with identical spectra.  Iterating the doubling gives
towers of 2^n copies; a block inside a rectangle of four mirror lines gives
four mutually isospectral domains.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

from .geometry import (
    BC,
    BoundaryPiece,
    Domain,
    MirrorLine,
    OverlapError,
    Point2,
    _on_line_pieces,
    _point_from_json,
    area,
    domain_from_dict,
    domain_to_dict,
    glue,
    reflect,
)
from .scalars import is_exact


class InvalidBlock(ValueError):
    """The block violates a construction precondition."""


def _relabel_on_line(domain: Domain, line: MirrorLine, bc: BC) -> Domain:
    """New domain with every straight piece lying on `line` relabeled."""
    tol = domain.coincide_tol()
    hits = set(_on_line_pieces(domain, line, tol))
    if not hits:
        raise InvalidBlock("no boundary pieces on the expected outer line")
    loops = []
    for li, loop in enumerate(domain.loops):
        loops.append(
            [
                pc.with_bc(bc) if (li, pi) in hits else pc
                for pi, pc in enumerate(loop)
            ]
        )
    return Domain(loops, domain.name)


@dataclass(frozen=True)
class ConstructionBlock:
    """Domain K between mirror lines a and b.

    on_a / on_b hold outer-loop piece indices lying on the respective lines;
    every other piece belongs to the free boundary and keeps its own D/N
    label through all constructions.
    """

    K: Domain
    a: MirrorLine
    b: MirrorLine
    on_a: tuple[int, ...]
    on_b: tuple[int, ...]
    name: str = ""

    def __post_init__(self):
        if not self.on_a or not self.on_b:
            raise InvalidBlock("block must touch both mirror lines")
        if set(self.on_a) & set(self.on_b):
            raise InvalidBlock("a piece cannot lie on both mirror lines")
        tol = self.K.coincide_tol()
        for line, idxs in ((self.a, self.on_a), (self.b, self.on_b)):
            for pi in idxs:
                seg = self.K.loops[0][pi].segment
                if not (
                    seg.is_line
                    and line.contains(seg.a, tol)
                    and line.contains(seg.b, tol)
                ):
                    raise InvalidBlock(f"piece {pi} does not lie on its mirror line")
        # K must sit in one closed sector/strip of each line.
        for line in (self.a, self.b):
            signs = set()
            for _, _, pc in self.K.pieces():
                for p in (pc.segment.a, pc.segment.b):
                    off = line.offset(p)
                    v = off.sign() if is_exact(off) else (
                        0 if abs(off) <= tol else (1 if off > 0 else -1)
                    )
                    if v:
                        signs.add(v)
            if len(signs) > 1:
                raise InvalidBlock("block crosses a mirror line")

    @property
    def free_pieces(self) -> tuple[int, ...]:
        taken = set(self.on_a) | set(self.on_b)
        return tuple(
            pi for pi in range(len(self.K.loops[0])) if pi not in taken
        )

    def labeled_block(self, bc_b: BC, bc_a: BC, name: str = "") -> Domain:
        """K itself with chosen labels on the two mirror sides.

        Free pieces keep their own labels.  Argument order is (label on the
        b side, label on the a side).
        """
        loop = list(self.K.loops[0])
        for pi in self.on_b:
            loop[pi] = loop[pi].with_bc(bc_b)
        for pi in self.on_a:
            loop[pi] = loop[pi].with_bc(bc_a)
        loops = [loop, *self.K.loops[1:]]
        return Domain(loops, name or f"{self.name or self.K.name}[{bc_b}{bc_a}]")


@dataclass(frozen=True)
class IsospectralPair:
    omega1: Domain
    omega2: Domain
    provenance: ConstructionBlock


def _double(domain: Domain, axis: MirrorLine, name: str) -> Domain:
    return glue(domain, reflect(domain, axis), axis, name=name)


def _grow(
    dom: Domain,
    start: MirrorLine,
    far: MirrorLine,
    n: int,
    bc_start: BC,
    bc_far: BC,
    name: str,
) -> Domain:
    """Double `dom` across its far line n times and label the outer ends.

    The start pieces are labeled once up front; each mirror copy has its
    image-of-start pieces labeled bc_far before gluing, so the labels stay
    correct even when the final far line coincides with the start line as a
    point set (as happens for sector towers spanning a half turn).
    """
    tol = dom.coincide_tol()
    dom = _relabel_on_line(dom, start, bc_start)
    for i in range(n):
        if _same_line_set(far, start, tol):
            raise OverlapError(
                "tower wraps onto its starting line; reflections collide"
            )
        mirror = reflect(dom, far)
        new_far = far.reflect_line(start)  # image of the start line
        mirror = _relabel_on_line(mirror, new_far, bc_far)
        dom = glue(dom, mirror, far, name=f"{name}{2 ** (i + 1)}" if n > 1 else name)
        far = new_far
    return dom


def _same_line_set(l1: MirrorLine, l2: MirrorLine, tol: float) -> bool:
    cross = l1.direction.cross(l2.direction)
    parallel = cross == 0 if is_exact(cross) else abs(float(cross)) <= 1e-12
    return parallel and l1.contains(l2.point, tol)


def build_pair(block: ConstructionBlock) -> IsospectralPair:
    """The two-reflection construction.

    Omega1 doubles K across a; the b pieces become Neumann and their mirror
    images Dirichlet.  Omega2 doubles across b; the a pieces become Dirichlet
    and their images Neumann.  Free boundary labels propagate unchanged to
    the mirror copy.
    """
    base = block.name or block.K.name or "K"
    o1 = _grow(block.K, block.b, block.a, 1, BC.NEUMANN, BC.DIRICHLET, f"{base}_omega1")
    o2 = _grow(block.K, block.a, block.b, 1, BC.DIRICHLET, BC.NEUMANN, f"{base}_omega2")
    a1, a2 = area(o1), area(o2)
    if is_exact(a1) and is_exact(a2):
        assert a1 == a2
    else:
        assert abs(float(a1) - float(a2)) <= 1e-9 * abs(float(a1))
    return IsospectralPair(o1, o2, block)


def build_tower(block: ConstructionBlock, n: int) -> tuple[Domain, Domain]:
    """Towers of 2^n copies with a Neumann/Dirichlet end pair each.

    The first tower grows from b across a, keeps Neumann on the b end and
    gets Dirichlet on the far end; the second grows from a across b with the
    labels the other way around.  n=1 reproduces build_pair.
    """
    if n < 1:
        raise InvalidBlock("tower needs n >= 1")
    base = block.name or block.K.name or "K"
    k2n = _grow(
        block.K, block.b, block.a, n, BC.NEUMANN, BC.DIRICHLET, f"{base}_K"
    )
    k2np = _grow(
        block.K, block.a, block.b, n, BC.DIRICHLET, BC.NEUMANN, f"{base}_Kp"
    )
    return k2n, k2np


@dataclass(frozen=True)
class QuadBlock:
    """Block inside a rectangle of mirror lines a, b (parallel) and c, d."""

    K: Domain
    a: MirrorLine
    b: MirrorLine
    c: MirrorLine
    d: MirrorLine
    on_a: tuple[int, ...]
    on_b: tuple[int, ...]
    on_c: tuple[int, ...]
    on_d: tuple[int, ...]
    name: str = ""

    def __post_init__(self):
        for idxs, tag in (
            (self.on_a, "a"),
            (self.on_b, "b"),
            (self.on_c, "c"),
            (self.on_d, "d"),
        ):
            if not idxs:
                raise InvalidBlock(f"block must touch line {tag}")
        para = float(self.a.direction.cross(self.b.direction))
        perp = float(self.a.direction.dot(self.c.direction))
        if abs(para) > 1e-12 or abs(perp) > 1e-12:
            raise InvalidBlock("need a parallel to b and c perpendicular to a")


def build_quad(qblock: QuadBlock) -> tuple[Domain, Domain, Domain, Domain]:
    """Four mutually isospectral domains from a rectangle block.

    Stage one doubles K across a (Dirichlet on the image of the b pieces,
    Neumann on the b pieces) or across b (Dirichlet on the a pieces, Neumann
    on their image).  Stage two doubles each result across c or d with
    opposite labels on the remaining straight lines.
    """
    base = qblock.name or qblock.K.name or "K"
    a, b, c, d = qblock.a, qblock.b, qblock.c, qblock.d
    D, N = BC.DIRICHLET, BC.NEUMANN

    L = _grow(qblock.K, b, a, 1, N, D, f"{base}_L")
    M = _grow(qblock.K, a, b, 1, D, N, f"{base}_M")

    def stage2(dom: Domain, idx: int) -> Domain:
        if idx % 2 == 1:  # double across c, opposite labels on d and its image
            return _grow(dom, d, c, 1, N, D, f"{base}_omega{idx}")
        return _grow(dom, c, d, 1, D, N, f"{base}_omega{idx}")

    return (stage2(L, 1), stage2(L, 2), stage2(M, 3), stage2(M, 4))


@dataclass(frozen=True)
class SpectralIdentity:
    """A multiset identity between unions of spectra.

    checkable=False marks identities whose left side lives on the flat
    covering manifold rather than a planar domain; they are consequences of
    the checkable ones and are reported, not meshed.
    """

    name: str
    lhs: tuple[Domain, ...]
    rhs: tuple[Domain, ...]
    checkable: bool = True
    note: str = ""


def splitting_chain(block: ConstructionBlock) -> list[SpectralIdentity]:
    """Spectral splitting identities tying the pair, the block, the towers
    and the covering together.

    Notation sigma_XY(D): X is the condition on the b-type end of D, Y on
    the a-type (far) end; interior labels always stay as constructed.
    """
    D, N = BC.DIRICHLET, BC.NEUMANN
    base = block.name or block.K.name or "K"

    def k_var(bc_b: BC, bc_a: BC) -> Domain:
        return block.labeled_block(bc_b, bc_a, name=f"{base}[{bc_b}{bc_a}]")

    def o1_var(bc_b: BC, bc_far: BC) -> Domain:
        return _grow(
            block.K, block.b, block.a, 1, bc_b, bc_far,
            f"{base}_omega1[{bc_b}{bc_far}]",
        )

    def o2_var(bc_far: BC, bc_a: BC) -> Domain:
        return _grow(
            block.K, block.a, block.b, 1, bc_a, bc_far,
            f"{base}_omega2[{bc_far}{bc_a}]",
        )

    def k4_var(bc: BC) -> Domain:
        return _grow(
            block.K, block.b, block.a, 2, bc, bc, f"{base}_K4[{bc}{bc}]"
        )

    k4, k4p = build_tower(block, 2)

    out = [
        SpectralIdentity(
            "sigma_DD(omega1) = sigma_DN(K) + sigma_DD(K)",
            (o1_var(D, D),),
            (k_var(D, N), k_var(D, D)),
        ),
        SpectralIdentity(
            "sigma_NN(omega1) = sigma_ND(K) + sigma_NN(K)",
            (o1_var(N, N),),
            (k_var(N, D), k_var(N, N)),
        ),
        SpectralIdentity(
            "sigma_DD(omega2) = sigma_ND(K) + sigma_DD(K)",
            (o2_var(D, D),),
            (k_var(N, D), k_var(D, D)),
        ),
        SpectralIdentity(
            "sigma_NN(omega2) = sigma_DN(K) + sigma_NN(K)",
            (o2_var(N, N),),
            (k_var(D, N), k_var(N, N)),
        ),
        SpectralIdentity(
            "sigma_DD(K4) = sigma_DN(omega1) + sigma_DD(omega1)",
            (k4_var(D),),
            (o1_var(D, N), o1_var(D, D)),
        ),
        SpectralIdentity(
            "sigma_NN(K4) = sigma_ND(omega1) + sigma_NN(omega1)",
            (k4_var(N),),
            (o1_var(N, D), o1_var(N, N)),
        ),
        SpectralIdentity(
            "sigma_ND(K4) = sigma_DN(K4')",
            (k4,),
            (k4p,),
            note="the two towers carry opposite end labels by construction",
        ),
        SpectralIdentity(
            "sigma(K8hat) = sigma_DD(K4) + sigma_NN(K4)",
            (),
            (),
            checkable=False,
            note="K8hat is the flat covering glued from eight copies of K; "
            "derived, not meshed",
        ),
        SpectralIdentity(
            "2 sigma_ND(omega1) = sigma(K8hat) - sigma_DD(K) - sigma_DN(K) "
            "- sigma_ND(K) - sigma_NN(K)",
            (),
            (),
            checkable=False,
            note="consequence of the four splitting identities above",
        ),
    ]
    return out


# -- block-spec files ---------------------------------------------------------


def _mirror_from_json(obj: dict) -> MirrorLine:
    p = _point_from_json(obj["point"])
    d = _point_from_json(obj["direction"])
    from .geometry import _normalize_direction

    return MirrorLine(p, _normalize_direction(d))


def _mirror_to_json(line: MirrorLine) -> dict:
    from .geometry import _point_to_json

    return {
        "point": _point_to_json(line.point),
        "direction": _point_to_json(line.direction),
    }


def _auto_on_line(K: Domain, line: MirrorLine) -> tuple[int, ...]:
    tol = K.coincide_tol()
    return tuple(pi for li, pi in _on_line_pieces(K, line, tol) if li == 0)


def block_from_dict(obj: dict) -> ConstructionBlock:
    K = domain_from_dict(obj)
    a = _mirror_from_json(obj["mirror_a"])
    b = _mirror_from_json(obj["mirror_b"])
    on_a = tuple(obj.get("on_a") or _auto_on_line(K, a))
    on_b = tuple(obj.get("on_b") or _auto_on_line(K, b))
    if not on_a or not on_b:
        raise InvalidBlock("block has no boundary pieces on a mirror line")
    return ConstructionBlock(K, a, b, on_a, on_b, name=obj.get("name", ""))


def quad_block_from_dict(obj: dict) -> QuadBlock:
    K = domain_from_dict(obj)
    lines = {t: _mirror_from_json(obj[f"mirror_{t}"]) for t in "abcd"}
    on = {
        t: tuple(obj.get(f"on_{t}") or _auto_on_line(K, lines[t])) for t in "abcd"
    }
    return QuadBlock(
        K,
        lines["a"],
        lines["b"],
        lines["c"],
        lines["d"],
        on["a"],
        on["b"],
        on["c"],
        on["d"],
        name=obj.get("name", ""),
    )


def load_block(path) -> ConstructionBlock:
    with open(path, "r", encoding="utf-8") as fh:
        return block_from_dict(json.load(fh))


def load_quad_block(path) -> QuadBlock:
    with open(path, "r", encoding="utf-8") as fh:
        return quad_block_from_dict(json.load(fh))


def block_to_dict(block: ConstructionBlock) -> dict:
    obj = domain_to_dict(block.K)
    obj["name"] = block.name or obj["name"]
    obj["mirror_a"] = _mirror_to_json(block.a)
    obj["mirror_b"] = _mirror_to_json(block.b)
    obj["on_a"] = list(block.on_a)
    obj["on_b"] = list(block.on_b)
    return obj
