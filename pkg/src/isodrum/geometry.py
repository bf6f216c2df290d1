"""Planar domains with labeled boundaries, reflections, and gluing.

A Domain is a list of closed loops of boundary pieces (line segments or
circular arcs), each piece carrying a Dirichlet or Neumann label.  The first
loop is the outer boundary, traversed counterclockwise; remaining loops are
holes, traversed clockwise, so the interior always lies to the left of the
traversal direction.

Coordinates are either exact Q(sqrt2) scalars or floats.  Predicates
(coincidence, collinearity, straightness) are decided exactly whenever every
participating coordinate is exact, and with a relative tolerance of 1e-12
otherwise.  Interface matching during gluing uses 1e-9 times the domain
diameter in floating mode.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Sequence

import shapely
import shapely.geometry as sgeom

from .scalars import (
    Q2,
    Scalar,
    as_scalar,
    format_scalar,
    is_exact,
    scalar_from_json,
    scalar_to_json,
)

COINCIDE_RTOL = 1e-12  # float coincidence, relative to local scale
GLUE_RTOL = 1e-9  # interface matching, relative to domain diameter


class InvalidDomain(ValueError):
    """The boundary description violates a Domain invariant."""


class NonMatchingInterface(ValueError):
    """Gluing interfaces do not coincide as point sets."""


class OverlapError(ValueError):
    """Interiors intersect away from the gluing interface."""


class BC(enum.Enum):
    DIRICHLET = "D"
    NEUMANN = "N"

    def __str__(self) -> str:
        return self.value

    @classmethod
    def parse(cls, text: str) -> "BC":
        t = str(text).strip().upper()
        if t in ("D", "DIRICHLET"):
            return cls.DIRICHLET
        if t in ("N", "NEUMANN"):
            return cls.NEUMANN
        raise ValueError(f"unknown boundary condition {text!r}")


class CornerKind(enum.Enum):
    DD = "DD"
    NN = "NN"
    DN = "DN"


def _kind_of(bc1: BC, bc2: BC) -> CornerKind:
    if bc1 is bc2:
        return CornerKind.DD if bc1 is BC.DIRICHLET else CornerKind.NN
    return CornerKind.DN


@dataclass(frozen=True)
class Point2:
    """A point of the plane; coordinates exact (Q2) or float."""

    x: Scalar
    y: Scalar

    def __iter__(self) -> Iterator[Scalar]:
        yield self.x
        yield self.y

    @property
    def is_exact(self) -> bool:
        return is_exact(self.x) and is_exact(self.y)

    def as_floats(self) -> tuple[float, float]:
        return (float(self.x), float(self.y))

    def __add__(self, other: "Point2") -> "Point2":
        return Point2(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "Point2") -> "Point2":
        return Point2(self.x - other.x, self.y - other.y)

    def scaled(self, s: Scalar) -> "Point2":
        return Point2(self.x * s, self.y * s)

    def dot(self, other: "Point2") -> Scalar:
        return self.x * other.x + self.y * other.y

    def cross(self, other: "Point2") -> Scalar:
        return self.x * other.y - self.y * other.x

    def norm2(self) -> Scalar:
        return self.dot(self)

    def norm(self) -> float:
        return math.hypot(float(self.x), float(self.y))


def point(x, y) -> Point2:
    """Build a Point2, coercing ints/Fractions/strings to exact scalars."""
    return Point2(as_scalar(x), as_scalar(y))


def points_coincide(p: Point2, q: Point2, tol: float) -> bool:
    if p.is_exact and q.is_exact:
        return p.x == q.x and p.y == q.y
    dx = float(p.x) - float(q.x)
    dy = float(p.y) - float(q.y)
    return math.hypot(dx, dy) <= tol


def _exact_sqrt(value: Q2) -> Q2 | None:
    """sqrt of a Q2 number when it stays in Q(sqrt2), else None.

    Handles the forms needed for unit directions: rational squares r^2 and
    2*r^2 (whose roots are r and r*sqrt2).
    """
    if value.sign() < 0:
        return None

    def _frac_sqrt(f: Fraction) -> Fraction | None:
        if f < 0:
            return None
        num = math.isqrt(f.numerator)
        den = math.isqrt(f.denominator)
        if num * num == f.numerator and den * den == f.denominator:
            return Fraction(num, den)
        return None

    if value.q == 0:
        r = _frac_sqrt(value.p)
        if r is not None:
            return Q2(r)
        half = _frac_sqrt(value.p / 2)
        if half is not None:
            return Q2(0, half)
        return None
    if value.p == 0:
        return None
    # General (a + b*sqrt2)^2 = a^2 + 2 b^2 + 2ab*sqrt2.
    disc = value.p * value.p - 2 * value.q * value.q
    d = _frac_sqrt(disc) if disc >= 0 else None
    if d is None:
        return None
    for a2 in ((value.p + d) / 2, (value.p - d) / 2):
        a = _frac_sqrt(a2)
        if a is None or a == 0:
            continue
        b = value.q / (2 * a)
        cand = Q2(a, b)
        if cand * cand == value and cand.sign() >= 0:
            return cand
    return None


def _normalize_direction(d: Point2) -> Point2:
    n2 = d.norm2()
    if isinstance(n2, Q2):
        if n2 == Q2(1):
            return d
        root = _exact_sqrt(n2)
        if root is not None:
            return Point2(d.x / root, d.y / root)
    n = d.norm()
    if n == 0.0:
        raise ValueError("zero direction vector")
    return Point2(float(d.x) / n, float(d.y) / n)


@dataclass(frozen=True)
class MirrorLine:
    """An oriented line given by a point on it and a unit direction."""

    point: Point2
    direction: Point2

    def __post_init__(self):
        n2 = self.direction.norm2()
        if is_exact(n2):
            if n2 != Q2(1):
                raise ValueError("mirror direction must have unit norm")
        elif abs(float(n2) - 1.0) > 1e-12:
            raise ValueError("mirror direction must have unit norm")

    @classmethod
    def through(cls, p: Point2, q: Point2) -> "MirrorLine":
        return cls(p, _normalize_direction(q - p))

    def reflect_point(self, p: Point2) -> Point2:
        v = p - self.point
        t = v.dot(self.direction)
        proj = self.direction.scaled(2 * t if is_exact(t) else 2.0 * t)
        return self.point + proj - v

    def reflect_line(self, other: "MirrorLine") -> "MirrorLine":
        p = self.reflect_point(other.point)
        q = self.reflect_point(other.point + other.direction)
        return MirrorLine(p, q - p)

    def offset(self, p: Point2) -> Scalar:
        """Signed perpendicular offset; positive to the left of direction."""
        return self.direction.cross(p - self.point)

    def coord(self, p: Point2) -> Scalar:
        """Parameter of the projection of p along the line."""
        return self.direction.dot(p - self.point)

    def contains(self, p: Point2, tol: float) -> bool:
        off = self.offset(p)
        if is_exact(off):
            return off == 0
        return abs(float(off)) <= tol


@dataclass(frozen=True)
class Segment:
    """A line segment or circular arc from a to b.

    For arcs, center is the circle center and ccw tells whether the arc runs
    counterclockwise around it from a to b.
    """

    a: Point2
    b: Point2
    center: Point2 | None = None
    ccw: bool = True

    def __post_init__(self):
        if points_coincide(self.a, self.b, COINCIDE_RTOL):
            raise InvalidDomain("segment endpoints coincide")
        if self.center is not None:
            ra = (self.a - self.center).norm()
            rb = (self.b - self.center).norm()
            if abs(ra - rb) > 1e-9 * max(ra, rb):
                raise InvalidDomain("arc endpoints not equidistant from center")

    @property
    def kind(self) -> str:
        return "line" if self.center is None else "arc"

    @property
    def is_line(self) -> bool:
        return self.center is None

    @property
    def radius(self) -> float:
        assert self.center is not None
        return (self.a - self.center).norm()

    @property
    def curvature(self) -> float:
        """Signed curvature along traversal: +1/r for ccw arcs, 0 for lines."""
        if self.center is None:
            return 0.0
        r = self.radius
        return 1.0 / r if self.ccw else -1.0 / r

    def _angles(self) -> tuple[float, float]:
        assert self.center is not None
        ax, ay = (self.a - self.center).as_floats()
        bx, by = (self.b - self.center).as_floats()
        return math.atan2(ay, ax), math.atan2(by, bx)

    @property
    def sweep(self) -> float:
        """Traversed central angle in (0, 2*pi)."""
        t0, t1 = self._angles()
        if self.ccw:
            return (t1 - t0) % (2.0 * math.pi) or 2.0 * math.pi
        return (t0 - t1) % (2.0 * math.pi) or 2.0 * math.pi

    def length(self) -> float:
        if self.center is None:
            return (self.b - self.a).norm()
        return self.radius * self.sweep

    def reversed(self) -> "Segment":
        if self.center is None:
            return Segment(self.b, self.a)
        return Segment(self.b, self.a, self.center, not self.ccw)

    def reflect(self, axis: MirrorLine) -> "Segment":
        a = axis.reflect_point(self.a)
        b = axis.reflect_point(self.b)
        if self.center is None:
            return Segment(a, b)
        return Segment(a, b, axis.reflect_point(self.center), not self.ccw)

    def point_at(self, t) -> Point2:
        """Point at parameter t in [0,1]; exact for lines with exact t."""
        if self.center is None:
            return self.a + (self.b - self.a).scaled(as_scalar(t) if not isinstance(t, float) else t)
        t0, _ = self._angles()
        ang = t0 + (self.sweep * float(t) if self.ccw else -self.sweep * float(t))
        r = self.radius
        cx, cy = self.center.as_floats()
        return Point2(cx + r * math.cos(ang), cy + r * math.sin(ang))

    def tangent_out(self) -> Point2:
        """Direction leaving a (unnormalized for lines; exact if coords are)."""
        if self.center is None:
            return self.b - self.a
        v = self.a - self.center
        vx, vy = float(v.x), float(v.y)
        return Point2(-vy, vx) if self.ccw else Point2(vy, -vx)

    def tangent_in(self) -> Point2:
        """Direction arriving at b."""
        if self.center is None:
            return self.b - self.a
        v = self.b - self.center
        vx, vy = float(v.x), float(v.y)
        return Point2(-vy, vx) if self.ccw else Point2(vy, -vx)

    def chord_points(self, max_sagitta: float) -> list[Point2]:
        """Polyline approximation: endpoints plus arc samples."""
        if self.center is None:
            return [self.a, self.b]
        r = self.radius
        sweep = self.sweep
        if max_sagitta >= r:
            n = 2
        else:
            phi = 2.0 * math.acos(max(1.0 - max_sagitta / r, -1.0))
            n = max(2, math.ceil(sweep / max(phi, 1e-9)))
        return [self.point_at(i / n) for i in range(n + 1)]


@dataclass(frozen=True)
class BoundaryPiece:
    segment: Segment
    bc: BC

    def reversed(self) -> "BoundaryPiece":
        return BoundaryPiece(self.segment.reversed(), self.bc)

    def reflect(self, axis: MirrorLine) -> "BoundaryPiece":
        return BoundaryPiece(self.segment.reflect(axis), self.bc)

    def with_bc(self, bc: BC) -> "BoundaryPiece":
        return BoundaryPiece(self.segment, bc)


@dataclass(frozen=True)
class Corner:
    vertex: Point2
    beta: float  # interior angle in radians
    kind: CornerKind
    labels: tuple[BC, BC]  # (incoming piece, outgoing piece)
    loop: int
    piece: int  # index of the outgoing piece within the loop

    @property
    def is_straight(self) -> bool:
        return abs(self.beta - math.pi) <= 1e-12


Loop = tuple[BoundaryPiece, ...]


class Domain:
    """A plane domain bounded by labeled loops.  Treated as immutable."""

    def __init__(self, loops: Sequence[Sequence[BoundaryPiece]], name: str = ""):
        if not loops or not all(loops):
            raise InvalidDomain("domain needs at least one nonempty loop")
        self.loops: tuple[Loop, ...] = tuple(tuple(lp) for lp in loops)
        self.name = name
        self._check_closure()
        self._shapely_cache: sgeom.base.BaseGeometry | None = None

    # -- basic accessors -------------------------------------------------

    def pieces(self) -> Iterator[tuple[int, int, BoundaryPiece]]:
        for li, loop in enumerate(self.loops):
            for pi, piece in enumerate(loop):
                yield li, pi, piece

    @property
    def is_exact(self) -> bool:
        return all(
            p.segment.a.is_exact
            and p.segment.b.is_exact
            and (p.segment.center is None or p.segment.center.is_exact)
            for _, _, p in self.pieces()
        )

    def bbox(self) -> tuple[float, float, float, float]:
        xs: list[float] = []
        ys: list[float] = []
        for _, _, p in self.pieces():
            for q in p.segment.chord_points(0.0 if p.segment.is_line else 1e-3):
                x, y = q.as_floats()
                xs.append(x)
                ys.append(y)
        return min(xs), min(ys), max(xs), max(ys)

    def diameter(self) -> float:
        x0, y0, x1, y1 = self.bbox()
        return math.hypot(x1 - x0, y1 - y0)

    def coincide_tol(self) -> float:
        return GLUE_RTOL * max(self.diameter(), 1e-30)

    # -- validation -------------------------------------------------------

    def _check_closure(self):
        for li, loop in enumerate(self.loops):
            scale = max(
                (pc.segment.a - pc.segment.b).norm() for pc in loop
            )
            tol = COINCIDE_RTOL * max(scale, 1e-30) * 1e3
            for i, pc in enumerate(loop):
                nxt = loop[(i + 1) % len(loop)]
                if not points_coincide(pc.segment.b, nxt.segment.a, tol):
                    raise InvalidDomain(
                        f"loop {li} does not close between pieces {i} and "
                        f"{(i + 1) % len(loop)}"
                    )

    def validate(self) -> None:
        """Full validity check: orientation, simplicity, hole containment."""
        areas = [loop_signed_area(lp) for lp in self.loops]
        if areas[0] <= 0:
            raise InvalidDomain("outer loop must be counterclockwise")
        for a in areas[1:]:
            if a >= 0:
                raise InvalidDomain("hole loops must be clockwise")
        poly = self.to_shapely()
        if not poly.is_valid:
            raise InvalidDomain(f"invalid boundary: {shapely.is_valid_reason(poly)}")

    # -- conversions ------------------------------------------------------

    def to_shapely(self) -> sgeom.Polygon:
        if self._shapely_cache is None:
            sag = 1e-5 * max(self.diameter(), 1e-30)
            rings = []
            for loop in self.loops:
                pts: list[tuple[float, float]] = []
                for pc in loop:
                    chain = pc.segment.chord_points(sag)
                    pts.extend(q.as_floats() for q in chain[:-1])
                rings.append(pts)
            self._shapely_cache = sgeom.Polygon(rings[0], rings[1:])
        return self._shapely_cache

    def __repr__(self) -> str:
        n = sum(1 for _ in self.pieces())
        return f"Domain({self.name!r}, loops={len(self.loops)}, pieces={n})"


# -- measures -------------------------------------------------------------


def loop_signed_area(loop: Loop) -> float:
    """Shoelace over chord endpoints plus circular-segment corrections."""
    acc = 0.0
    for pc in loop:
        ax, ay = pc.segment.a.as_floats()
        bx, by = pc.segment.b.as_floats()
        acc += ax * by - bx * ay
        if not pc.segment.is_line:
            r = pc.segment.radius
            th = pc.segment.sweep
            seg = 0.5 * r * r * (th - math.sin(th))
            acc += 2.0 * seg if pc.segment.ccw else -2.0 * seg
    return 0.5 * acc


def _loop_exact_area(loop: Loop) -> Q2 | None:
    acc = Q2(0)
    for pc in loop:
        if not pc.segment.is_line:
            return None
        a, b = pc.segment.a, pc.segment.b
        if not (a.is_exact and b.is_exact):
            return None
        acc = acc + a.cross(b)
    return acc / 2


def area(domain: Domain) -> Scalar:
    """Domain area: exact Q2 for exact polygons, float otherwise."""
    exact_terms = [_loop_exact_area(lp) for lp in domain.loops]
    if all(t is not None for t in exact_terms):
        total = Q2(0)
        for t in exact_terms:
            total = total + t
        return total
    return math.fsum(loop_signed_area(lp) for lp in domain.loops)


def boundary_lengths(domain: Domain) -> tuple[float, float]:
    """(Dirichlet length, Neumann length)."""
    lend = math.fsum(
        p.segment.length() for _, _, p in domain.pieces() if p.bc is BC.DIRICHLET
    )
    lenn = math.fsum(
        p.segment.length() for _, _, p in domain.pieces() if p.bc is BC.NEUMANN
    )
    return lend, lenn


def _is_straight_junction(t_in: Point2, t_out: Point2) -> bool:
    cross = t_in.cross(t_out)
    dot = t_in.dot(t_out)
    if is_exact(cross) and is_exact(dot):
        return cross == 0 and (dot > 0 if is_exact(dot) else float(dot) > 0)
    cx, dx = float(cross), float(dot)
    scale = math.hypot(cx, dx)
    return scale > 0 and abs(cx) <= 1e-12 * scale and dx > 0


def corners(domain: Domain) -> list[Corner]:
    """Corners of the boundary: angle breaks and label changes.

    The angle beta is measured inside the domain.  A label change along a
    straight run is reported as a corner with beta = pi.
    """
    out: list[Corner] = []
    for li, loop in enumerate(domain.loops):
        n = len(loop)
        for i in range(n):
            prev = loop[i - 1]
            cur = loop[i]
            t_in = prev.segment.tangent_in()
            t_out = cur.segment.tangent_out()
            straight = _is_straight_junction(t_in, t_out)
            if straight and prev.bc is cur.bc:
                continue
            if straight:
                beta = math.pi
            else:
                turn = math.atan2(
                    float(t_in.cross(t_out)), float(t_in.dot(t_out))
                )
                beta = math.pi - turn
                if beta >= 2.0 * math.pi:
                    beta -= 2.0 * math.pi
            out.append(
                Corner(
                    vertex=cur.segment.a,
                    beta=beta,
                    kind=_kind_of(prev.bc, cur.bc),
                    labels=(prev.bc, cur.bc),
                    loop=li,
                    piece=i,
                )
            )
    return out


# -- reflection and gluing --------------------------------------------------


def reflect(domain: Domain, axis: MirrorLine, name: str | None = None) -> Domain:
    """Mirror image with loop orientations re-normalized and labels kept."""
    loops = []
    for loop in domain.loops:
        mirrored = [pc.reflect(axis) for pc in loop]
        mirrored.reverse()
        loops.append([pc.reversed() for pc in mirrored])
    return Domain(loops, name if name is not None else f"refl({domain.name})")


def _interval_union(intervals: list[tuple[float, float]], tol: float):
    ivs = sorted((min(s, e), max(s, e)) for s, e in intervals)
    merged: list[list[float]] = []
    for s, e in ivs:
        if merged and s <= merged[-1][1] + tol:
            merged[-1][1] = max(merged[-1][1], e)
        else:
            merged.append([s, e])
    return merged


def _on_line_pieces(domain: Domain, line: MirrorLine, tol: float):
    """Indices of line pieces lying on the given line."""
    found = []
    for li, pi, pc in domain.pieces():
        if pc.segment.is_line and line.contains(pc.segment.a, tol) and line.contains(
            pc.segment.b, tol
        ):
            found.append((li, pi))
    return found


def _subdivide_on_line(
    pc: BoundaryPiece, line: MirrorLine, cuts: list, tol: float
) -> list[BoundaryPiece]:
    """Split an on-line piece at the given line parameters (exact when possible)."""
    s0 = line.coord(pc.segment.a)
    s1 = line.coord(pc.segment.b)
    lo, hi = (s0, s1) if float(s0) <= float(s1) else (s1, s0)
    inner = [c for c in cuts if float(lo) + tol < float(c) < float(hi) - tol]
    if not inner:
        return [pc]
    inner.sort(key=float)
    params = [s0, *inner, s1] if float(s0) <= float(s1) else [s0, *reversed(inner), s1]
    pts = []
    for s in params:
        delta = s - line.coord(pc.segment.a)
        pts.append(pc.segment.a + line.direction.scaled(delta))
    pts[0] = pc.segment.a
    pts[-1] = pc.segment.b
    return [
        BoundaryPiece(Segment(pts[i], pts[i + 1]), pc.bc) for i in range(len(pts) - 1)
    ]


def _point_key_factory(exact_mode: bool, tol: float):
    """Canonical endpoint keys: exact values, or tolerance clusters."""
    if exact_mode:
        return lambda p: (p.x, p.y)

    reps: list[tuple[float, float]] = []

    def key(p: Point2):
        x, y = p.as_floats()
        for i, (rx, ry) in enumerate(reps):
            if math.hypot(x - rx, y - ry) <= tol:
                return i
        reps.append((x, y))
        return len(reps) - 1

    return key


def _stitch_loops(pieces: list[BoundaryPiece], key: Callable) -> list[list[BoundaryPiece]]:
    starts: dict = {}
    for idx, pc in enumerate(pieces):
        starts.setdefault(key(pc.segment.a), []).append(idx)
    used = [False] * len(pieces)
    loops = []
    for seed in range(len(pieces)):
        if used[seed]:
            continue
        chain = [pieces[seed]]
        used[seed] = True
        start_key = key(pieces[seed].segment.a)
        while True:
            end_key = key(chain[-1].segment.b)
            if end_key == start_key:
                break
            cands = [i for i in starts.get(end_key, []) if not used[i]]
            if not cands:
                raise NonMatchingInterface("glued boundary does not close")
            if len(cands) == 1:
                nxt = cands[0]
            else:
                # Pinch vertex: continue with the sharpest left turn so the
                # interior stays on the left.
                t_in = chain[-1].segment.tangent_in()
                tix, tiy = float(t_in.x), float(t_in.y)

                def left_turn(i):
                    t = pieces[i].segment.tangent_out()
                    return math.atan2(
                        tix * float(t.y) - tiy * float(t.x),
                        tix * float(t.x) + tiy * float(t.y),
                    )

                nxt = max(cands, key=left_turn)
            chain.append(pieces[nxt])
            used[nxt] = True
        loops.append(chain)
    return loops


def glue(d1: Domain, d2: Domain, interface: MirrorLine, name: str = "") -> Domain:
    """Interior of the union of two domains meeting along a mirror line.

    The parts of both boundaries lying on the interface must coincide as
    point sets; they disappear from the result.  All other pieces keep their
    labels.
    """
    exact_mode = d1.is_exact and d2.is_exact and interface.point.is_exact
    tol = max(d1.coincide_tol(), d2.coincide_tol())

    # Interiors may touch only along the interface.
    p1, p2 = d1.to_shapely(), d2.to_shapely()
    inter = p1.intersection(p2)
    if inter.area > 1e-9 * min(p1.area, p2.area):
        raise OverlapError(
            f"interiors of {d1.name!r} and {d2.name!r} overlap (area {inter.area:g})"
        )

    on1 = _on_line_pieces(d1, interface, tol)
    on2 = _on_line_pieces(d2, interface, tol)
    if not on1 or not on2:
        raise NonMatchingInterface("one of the domains has no boundary on the interface")

    def intervals(dom, idxs):
        out = []
        for li, pi in idxs:
            seg = dom.loops[li][pi].segment
            out.append(
                (float(interface.coord(seg.a)), float(interface.coord(seg.b)))
            )
        return out

    u1 = _interval_union(intervals(d1, on1), tol)
    u2 = _interval_union(intervals(d2, on2), tol)
    if len(u1) != len(u2) or any(
        abs(a[0] - b[0]) > tol or abs(a[1] - b[1]) > tol for a, b in zip(u1, u2)
    ):
        raise NonMatchingInterface(
            f"interface point sets differ: {u1} vs {u2}"
        )

    # Cut every on-line piece at the union of both sides' endpoints so the
    # two sides match sub-piece by sub-piece, then drop all of them.
    cutvals: list = []
    for dom, idxs in ((d1, on1), (d2, on2)):
        for li, pi in idxs:
            seg = dom.loops[li][pi].segment
            cutvals.extend((interface.coord(seg.a), interface.coord(seg.b)))
    survivors: list[BoundaryPiece] = []
    for dom, idxs in ((d1, on1), (d2, on2)):
        drop = set(idxs)
        for li, pi, pc in dom.pieces():
            if (li, pi) not in drop:
                survivors.append(pc)
    if not survivors:
        raise InvalidDomain("glue removed the entire boundary")

    key = _point_key_factory(exact_mode, tol)
    loops = _stitch_loops(survivors, key)
    loops.sort(key=lambda lp: -abs(loop_signed_area(lp)))
    if loop_signed_area(loops[0]) <= 0:
        raise InvalidDomain("glued outer loop is not counterclockwise")
    loops[1:] = sorted(
        loops[1:],
        key=lambda lp: min(q.segment.a.as_floats() for q in lp),
    )
    out = Domain(loops, name or f"{d1.name}|{d2.name}")
    out.validate()
    return out


# -- JSON domain-spec ---------------------------------------------------------


def _point_from_json(value) -> Point2:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ValueError(f"point must be [x, y], got {value!r}")
    return Point2(scalar_from_json(value[0]), scalar_from_json(value[1]))


def _point_to_json(p: Point2):
    return [scalar_to_json(p.x), scalar_to_json(p.y)]


def piece_from_json(obj: dict) -> BoundaryPiece:
    kind = obj.get("kind", "line")
    a = _point_from_json(obj["from"])
    b = _point_from_json(obj["to"])
    bc = BC.parse(obj["bc"])
    if kind == "line":
        return BoundaryPiece(Segment(a, b), bc)
    if kind == "arc":
        center = _point_from_json(obj["center"])
        ccw = bool(obj.get("ccw", True))
        return BoundaryPiece(Segment(a, b, center, ccw), bc)
    raise ValueError(f"unknown piece kind {kind!r}")


def piece_to_json(pc: BoundaryPiece) -> dict:
    obj = {
        "kind": pc.segment.kind,
        "from": _point_to_json(pc.segment.a),
        "to": _point_to_json(pc.segment.b),
        "bc": pc.bc.value,
    }
    if not pc.segment.is_line:
        obj["center"] = _point_to_json(pc.segment.center)
        obj["ccw"] = pc.segment.ccw
    return obj


def domain_from_dict(obj: dict) -> Domain:
    loops = [[piece_from_json(p) for p in lp] for lp in obj["loops"]]
    # Normalize orientations: outer ccw, holes cw.
    fixed = []
    for i, lp in enumerate(loops):
        sa = loop_signed_area(tuple(lp))
        want_ccw = i == 0
        if (sa > 0) != want_ccw:
            lp = [pc.reversed() for pc in reversed(lp)]
        fixed.append(lp)
    d = Domain(fixed, obj.get("name", ""))
    d.validate()
    return d


def domain_to_dict(domain: Domain) -> dict:
    return {
        "name": domain.name,
        "loops": [[piece_to_json(pc) for pc in lp] for lp in domain.loops],
    }


def load_domain(path) -> Domain:
    with open(path, "r", encoding="utf-8") as fh:
        return domain_from_dict(json.load(fh))


def save_domain(domain: Domain, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(domain_to_dict(domain), fh, indent=1)
        fh.write("\n")


# -- small constructors -------------------------------------------------------


def polygon_domain(
    vertices: Sequence, bcs: Sequence[BC | str], name: str = ""
) -> Domain:
    """Simple polygon from vertices and per-edge labels (edge i: v_i -> v_i+1)."""
    pts = [p if isinstance(p, Point2) else point(*p) for p in vertices]
    if len(bcs) != len(pts):
        raise ValueError("need one label per edge")
    loop = [
        BoundaryPiece(
            Segment(pts[i], pts[(i + 1) % len(pts)]),
            bc if isinstance(bc, BC) else BC.parse(bc),
        )
        for i, bc in enumerate(bcs)
    ]
    if loop_signed_area(tuple(loop)) < 0:
        loop = [pc.reversed() for pc in reversed(loop)]
    d = Domain([loop], name)
    d.validate()
    return d


def domain_equal(d1: Domain, d2: Domain) -> bool:
    """Piecewise exact equality of loops, coordinates and labels."""
    if len(d1.loops) != len(d2.loops):
        return False

    def piece_eq(p: BoundaryPiece, q: BoundaryPiece) -> bool:
        return (
            p.bc is q.bc
            and p.segment.kind == q.segment.kind
            and p.segment.ccw == q.segment.ccw
            and p.segment.a == q.segment.a
            and p.segment.b == q.segment.b
            and (p.segment.center is None or p.segment.center == q.segment.center)
        )

    for l1, l2 in zip(d1.loops, d2.loops):
        if len(l1) != len(l2):
            return False
        # Allow cyclic shift.
        n = len(l1)
        if not any(
            all(piece_eq(l1[(k + i) % n], l2[i]) for i in range(n)) for k in range(n)
        ):
            return False
    return True
