"""Boundary geometry: segments, corners, holes and domains.

Points are complex numbers z = x + iy. The outer loop runs counterclockwise and
hole loops run clockwise, so the fluid always lies to the left of the direction
of travel.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from enum import Enum
from functools import cached_property
from typing import TYPE_CHECKING, Callable, Iterable, Literal, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.interpolate import CubicSpline

from stokes.errors import GeometryError

if TYPE_CHECKING:
    from stokes.stokes_system import BoundaryConditionSpec

logger = logging.getLogger(__name__)

ComplexArray = NDArray[np.complex128]
FloatArray = NDArray[np.float64]

ENDPOINT_TOL = 1e-12
VERTEX_TOL = 1e-10
POLYLINE_DENSITY = 4
_TANGENT_STEP = 1e-7
DEFAULT_SIGMA = 4.0


class SegmentKind(str, Enum):
    LINE = "line"
    ARC = "arc"
    PARAMETRIC = "parametric"


class Clustering(str, Enum):
    UNIFORM = "uniform"
    TANH = "tanh"
    CORNER = "corner"


@dataclass(frozen=True)
class Segment:
    """One piece of a boundary loop, parametrized over s in [0, 1].

    Lines run from ``start`` to ``end``; arcs sweep ``theta0 -> theta1`` around
    ``center``; parametric segments call ``curve(s)``. ``curved`` asks the solver
    to place AAA poles from this segment's samples. Corner clustering puts
    ``n_samples`` points geometrically toward the corner end(s). Clustered
    segments (corner or tanh) also take ``uniform_samples`` evenly spaced ones.
    """

    kind: SegmentKind
    n_samples: int
    start: complex = 0j
    end: complex = 0j
    center: complex = 0j
    radius: float = 0.0
    theta0: float = 0.0
    theta1: float = 0.0
    curve: Callable[[FloatArray], ComplexArray] | None = None
    clustering: Clustering = Clustering.UNIFORM
    tanh_width: float = 14.0
    toward: Literal["start", "end", "both"] = "start"
    ratio: float = 0.5
    uniform_samples: int = 0
    curved: bool = False
    bc: BoundaryConditionSpec | None = None
    name: str = ""
    start_corner: bool = False
    end_corner: bool = False

    @classmethod
    def line(cls, start: complex, end: complex, n_samples: int, **options) -> Segment:
        return cls(SegmentKind.LINE, n_samples, start=complex(start), end=complex(end), **options)

    @classmethod
    def arc(cls, center: complex, radius: float, theta0: float, theta1: float, n_samples: int,
            **options) -> Segment:
        return cls(SegmentKind.ARC, n_samples, center=complex(center), radius=float(radius),
                   theta0=float(theta0), theta1=float(theta1), **options)

    @classmethod
    def parametric(cls, curve: Callable[[FloatArray], ComplexArray], n_samples: int, **options) -> Segment:
        return cls(SegmentKind.PARAMETRIC, n_samples, curve=curve, **options)

    @classmethod
    def from_points(cls, points: ArrayLike, n_samples: int, **options) -> Segment:
        """Parametric segment through an ordered point list (chord-length cubic spline)."""
        pts = np.asarray(points, dtype=complex).ravel()
        if pts.size < 2:
            raise GeometryError("A point-list segment needs at least two points")
        chords = np.abs(np.diff(pts))
        if np.any(chords == 0.0):
            raise GeometryError("Point-list segment contains repeated consecutive points")
        if _self_intersects(pts):
            raise GeometryError("Point-list segment intersects itself")
        knots = np.concatenate([[0.0], np.cumsum(chords)])
        knots /= knots[-1]
        spline = CubicSpline(knots, np.column_stack([pts.real, pts.imag]), axis=0)

        def curve(s: FloatArray) -> ComplexArray:
            xy = spline(s)
            return xy[..., 0] + 1j * xy[..., 1]

        return cls.parametric(curve, n_samples, **options)

    def point(self, s: ArrayLike) -> ComplexArray:
        s = np.asarray(s, dtype=float)
        if self.kind is SegmentKind.LINE:
            return self.start + (self.end - self.start) * s
        if self.kind is SegmentKind.ARC:
            return self.center + self.radius * np.exp(1j * (self.theta0 + (self.theta1 - self.theta0) * s))
        if self.curve is None:
            raise GeometryError(f"Parametric segment '{self.name}' has no curve")
        return np.asarray(self.curve(s), dtype=complex)

    def tangent(self, s: ArrayLike) -> ComplexArray:
        """Unit tangent in the direction of increasing s."""
        s = np.asarray(s, dtype=float)
        if self.kind is SegmentKind.LINE:
            d = (self.end - self.start) * np.ones_like(s)
        elif self.kind is SegmentKind.ARC:
            d = 1j * (self.theta1 - self.theta0) * np.exp(1j * (self.theta0 + (self.theta1 - self.theta0) * s))
        else:
            lo = np.clip(s - _TANGENT_STEP, 0.0, 1.0)
            hi = np.clip(s + _TANGENT_STEP, 0.0, 1.0)
            d = self.point(hi) - self.point(lo)
        return d / np.abs(d)

    @property
    def start_point(self) -> complex:
        return complex(self.point(np.array([0.0]))[0])

    @property
    def end_point(self) -> complex:
        return complex(self.point(np.array([1.0]))[0])

    @property
    def is_closed(self) -> bool:
        return abs(self.end_point - self.start_point) <= ENDPOINT_TOL * max(1.0, abs(self.start_point))

    def length(self) -> float:
        return float(np.sum(np.abs(np.diff(self.point(np.linspace(0.0, 1.0, 1025))))))

    def polyline(self, density: int = POLYLINE_DENSITY) -> ComplexArray:
        """Points at uniform parameters, the end point excluded."""
        return self.point(np.linspace(0.0, 1.0, density * self.n_samples + 1)[:-1])


def _self_intersects(pts: ComplexArray) -> bool:
    a, b = pts[:-1], pts[1:]
    n = a.size
    if n < 3:
        return False

    def orient(p, q, r):
        return np.sign(((q - p).conj() * (r - p)).imag)

    i, j = np.triu_indices(n, k=2)
    if pts[0] == pts[-1]:
        keep = ~((i == 0) & (j == n - 1))
        i, j = i[keep], j[keep]
    o1 = orient(a[i], b[i], a[j])
    o2 = orient(a[i], b[i], b[j])
    o3 = orient(a[j], b[j], a[i])
    o4 = orient(a[j], b[j], b[i])
    return bool(np.any((o1 * o2 < 0) & (o3 * o4 < 0)))


def _geometric_parameters(n: int, ratio: float, toward: str) -> FloatArray:
    if not 0.0 < ratio < 1.0:
        raise GeometryError(f"Corner clustering ratio must lie in (0, 1), got {ratio}")
    if toward == "start":
        return ratio ** np.arange(n, 0, -1, dtype=float)
    if toward == "end":
        return 1.0 - ratio ** np.arange(1, n + 1, dtype=float)
    head_count = (n + 1) // 2
    head = 0.5 * ratio ** np.arange(head_count, 0, -1, dtype=float)
    tail = 1.0 - 0.5 * ratio ** np.arange(1, n - head_count + 1, dtype=float)
    return np.concatenate([head, tail])


def sample_parameters(seg: Segment) -> FloatArray:
    """Sample parameters in [0, 1], strictly increasing."""
    n = seg.n_samples
    if n < 2:
        raise GeometryError(f"Segment '{seg.name}' needs at least 2 samples, got {n}")
    if seg.length() <= 1e-14:
        raise GeometryError(f"Segment '{seg.name}' has zero length")
    avoid_ends = seg.start_corner or seg.end_corner
    if seg.clustering is Clustering.TANH:
        s = 0.5 * (np.tanh(np.linspace(-seg.tanh_width, seg.tanh_width, n)) + 1.0)
    elif seg.clustering is Clustering.CORNER:
        s = _geometric_parameters(n, seg.ratio, seg.toward)
    elif avoid_ends:
        s = np.linspace(0.0, 1.0, n + 2)[1:-1]
    elif seg.is_closed:
        s = np.arange(1, n + 1, dtype=float) / n
    else:
        s = np.linspace(0.0, 1.0, n)
    if seg.clustering is not Clustering.UNIFORM and seg.uniform_samples > 0:
        s = np.union1d(s, np.linspace(0.0, 1.0, seg.uniform_samples + 2)[1:-1])
    if avoid_ends:
        s = s[(s > 0.0) & (s < 1.0)]
    return s


def sample_segment(seg: Segment) -> ComplexArray:
    return seg.point(sample_parameters(seg))


def corner_ratio(n_samples: int, innermost_distance: float, length: float) -> float:
    """Geometric ratio putting the first of n corner-clustered samples at a third
    of the innermost pole distance."""
    target = innermost_distance / (3.0 * length)
    return float(np.clip(target ** (1.0 / n_samples), 1e-3, 0.999))


@dataclass(frozen=True)
class Corner:
    vertex: complex
    exterior_bisector: float
    scale: float
    pole_count: int
    sigma: float = DEFAULT_SIGMA

    def __post_init__(self):
        if self.pole_count < 0:
            raise GeometryError(f"Corner pole count must be >= 0, got {self.pole_count}")
        if self.sigma <= 0 or self.scale <= 0:
            raise GeometryError("Corner sigma and scale must be positive")


def cluster_corner_poles(c: Corner) -> ComplexArray:
    """Lightning poles beta_n = w + L e^{i theta} exp(-sigma (sqrt(N) - sqrt(n))), n = 1..N."""
    if c.pole_count < 1:
        return np.empty(0, dtype=complex)
    n = np.arange(1, c.pole_count + 1, dtype=float)
    depth = np.exp(-c.sigma * (np.sqrt(c.pole_count) - np.sqrt(n)))
    return c.vertex + c.scale * np.exp(1j * c.exterior_bisector) * depth


def exterior_bisector(prev: complex, vertex: complex, next: complex) -> float | None:
    """Angle in [0, 2pi) of the ray bisecting the exterior angle at ``vertex``.

    ``prev -> vertex -> next`` is the direction of travel, fluid on the left.
    Returns None for a straight junction.
    """
    if prev == vertex or next == vertex or prev == next:
        raise GeometryError("exterior_bisector needs three distinct points")
    a_in = np.angle(prev - vertex)
    a_out = np.angle(next - vertex)
    interior = (a_in - a_out) % (2.0 * np.pi)
    if abs(interior - np.pi) < 1e-9:
        logger.debug(f"Straight junction at {vertex}, no corner")
        return None
    return float((a_out + 0.5 * interior + np.pi) % (2.0 * np.pi))


def point_in_region(z: ArrayLike, polyline: ArrayLike, include_boundary: bool = True,
                    chunk: int = 1024) -> bool | NDArray[np.bool_]:
    """Even-odd test against a closed polyline. Points on an edge count as inside
    unless ``include_boundary`` is False."""
    pts = np.asarray(polyline, dtype=complex).ravel()
    if pts.size < 3:
        raise GeometryError("Polyline needs at least three points")
    if pts[0] != pts[-1]:
        pts = np.append(pts, pts[0])
    a, b = pts[:-1], pts[1:]
    ab = b - a
    ab2 = np.abs(ab) ** 2
    ab2 = np.where(ab2 > 0, ab2, 1.0)
    tol = ENDPOINT_TOL * max(1.0, float(np.max(np.abs(pts))))

    scalar = np.ndim(z) == 0
    zz = np.atleast_1d(np.asarray(z, dtype=complex)).ravel()
    result = np.empty(zz.size, dtype=bool)
    for lo in range(0, zz.size, chunk):
        w = zz[lo:lo + chunk, None]
        straddle = (a.imag > w.imag) != (b.imag > w.imag)
        with np.errstate(divide="ignore", invalid="ignore"):
            x_cross = a.real + (w.imag - a.imag) * ab.real / ab.imag
        inside = np.count_nonzero(straddle & (w.real < x_cross), axis=1) % 2 == 1
        t = np.clip(((w - a) * ab.conj()).real / ab2, 0.0, 1.0)
        on_edge = np.any(np.abs(w - (a + t * ab)) <= tol, axis=1)
        result[lo:lo + chunk] = (inside | on_edge) if include_boundary else (inside & ~on_edge)
    if scalar:
        return bool(result[0])
    return result.reshape(np.shape(z))


def signed_area(polyline: ComplexArray) -> float:
    pts = np.asarray(polyline, dtype=complex)
    return 0.5 * float(np.sum((pts.conj() * np.roll(pts, -1)).imag))


@dataclass(frozen=True)
class Hole:
    boundary: tuple[Segment, ...]
    laurent_center: complex
    laurent_degree: int
    extra_centers: tuple[tuple[complex, int], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "boundary", tuple(self.boundary))
        object.__setattr__(self, "extra_centers", tuple((complex(c), int(q)) for c, q in self.extra_centers))
        if self.laurent_degree < 1:
            raise GeometryError(f"Laurent degree must be >= 1, got {self.laurent_degree}")


@dataclass(frozen=True)
class BoundarySamples:
    z: ComplexArray
    segment: NDArray[np.int_]
    parameter: FloatArray
    tangent: ComplexArray

    @property
    def size(self) -> int:
        return int(self.z.size)


@dataclass(frozen=True)
class Domain:
    outer: tuple[Segment, ...]
    holes: tuple[Hole, ...] = ()
    corners: tuple[Corner, ...] = ()
    name: str = "domain"

    def __post_init__(self):
        object.__setattr__(self, "outer", tuple(self.outer))
        object.__setattr__(self, "holes", tuple(self.holes))
        object.__setattr__(self, "corners", tuple(self.corners))
        self._validate()

    def _validate(self) -> None:
        for label, loop in zip(self.loop_names, self.loops):
            if not loop:
                raise GeometryError(f"{label} loop is empty")
            for prev, seg in zip(loop, loop[1:] + loop[:1]):
                gap = abs(prev.end_point - seg.start_point)
                if gap > ENDPOINT_TOL * max(1.0, abs(seg.start_point)):
                    raise GeometryError(
                        f"{label} loop is not closed between '{prev.name}' and '{seg.name}' (gap {gap:.3e})")
        outer_line = self.loop_polylines[0]
        if signed_area(outer_line) <= 0:
            raise GeometryError("Outer loop must run counterclockwise")
        for k, (hole, line) in enumerate(zip(self.holes, self.loop_polylines[1:])):
            if signed_area(line) >= 0:
                raise GeometryError(f"Hole {k} must run clockwise")
            if not point_in_region(hole.laurent_center, line, include_boundary=False):
                raise GeometryError(f"Laurent centre of hole {k} lies outside the hole")
            if not np.all(point_in_region(line, outer_line, include_boundary=False)):
                raise GeometryError(f"Hole {k} is not inside the outer loop")
            for j, other in enumerate(self.loop_polylines[1:k + 1]):
                if np.any(point_in_region(line, other)):
                    raise GeometryError(f"Holes {j} and {k} overlap")
        ends = np.array([seg.start_point for seg in self.segments])
        for corner in self.corners:
            if np.min(np.abs(ends - corner.vertex)) > VERTEX_TOL:
                raise GeometryError(f"Corner vertex {corner.vertex} is not a segment endpoint")

    @property
    def loops(self) -> tuple[tuple[Segment, ...], ...]:
        return (self.outer,) + tuple(h.boundary for h in self.holes)

    @property
    def loop_names(self) -> tuple[str, ...]:
        return ("outer",) + tuple(f"hole {k}" for k in range(len(self.holes)))

    @property
    def segments(self) -> tuple[Segment, ...]:
        return tuple(seg for loop in self.loops for seg in loop)

    @cached_property
    def loop_polylines(self) -> tuple[ComplexArray, ...]:
        return tuple(np.concatenate([seg.polyline() for seg in loop]) for loop in self.loops)

    @cached_property
    def bbox(self) -> tuple[float, float, float, float]:
        outer = self.loop_polylines[0]
        return (float(outer.real.min()), float(outer.real.max()),
                float(outer.imag.min()), float(outer.imag.max()))

    @property
    def scale(self) -> float:
        x0, x1, y0, y1 = self.bbox
        return max(x1 - x0, y1 - y0)

    @property
    def center(self) -> complex:
        x0, x1, y0, y1 = self.bbox
        return complex(0.5 * (x0 + x1), 0.5 * (y0 + y1))

    def contains(self, z: ArrayLike, include_boundary: bool = False) -> bool | NDArray[np.bool_]:
        """Membership in the fluid region (inside the outer loop, outside every hole)."""
        inside = point_in_region(z, self.loop_polylines[0], include_boundary=include_boundary)
        for line in self.loop_polylines[1:]:
            inside = np.logical_and(inside, np.logical_not(
                point_in_region(z, line, include_boundary=not include_boundary)))
        return bool(inside) if np.ndim(z) == 0 else inside

    def samples(self) -> BoundarySamples:
        zs, idx, params, tangents = [], [], [], []
        for k, seg in enumerate(self.segments):
            s = sample_parameters(seg)
            zs.append(seg.point(s))
            params.append(s)
            tangents.append(seg.tangent(s))
            idx.append(np.full(s.size, k, dtype=int))
        return BoundarySamples(np.concatenate(zs), np.concatenate(idx),
                               np.concatenate(params), np.concatenate(tangents))


def corner_between(incoming: Segment, outgoing: Segment, pole_count: int, sigma: float = DEFAULT_SIGMA,
                   scale: float | None = None) -> Corner | None:
    """Corner at the junction ``incoming.end == outgoing.start``; None if the junction is straight."""
    vertex = outgoing.start_point
    step = 1e-6
    theta = exterior_bisector(complex(incoming.point(np.array([1.0 - step]))[0]), vertex,
                              complex(outgoing.point(np.array([step]))[0]))
    if theta is None:
        return None
    if scale is None:
        ends = np.array([incoming.start_point, incoming.end_point, outgoing.start_point, outgoing.end_point])
        scale = float(np.max(np.abs(ends[:, None] - ends[None, :])))
    return Corner(vertex, theta, scale, pole_count, sigma)


def mark_corner_endpoints(segments: Iterable[Segment], vertices: Sequence[complex]) -> tuple[Segment, ...]:
    """Flag segment ends that sit on a corner vertex so they are never sampled."""
    verts = np.asarray(vertices, dtype=complex)
    marked = []
    for seg in segments:
        if verts.size == 0:
            marked.append(seg)
            continue
        marked.append(replace(
            seg,
            start_corner=seg.start_corner or bool(np.min(np.abs(verts - seg.start_point)) <= VERTEX_TOL),
            end_corner=seg.end_corner or bool(np.min(np.abs(verts - seg.end_point)) <= VERTEX_TOL),
        ))
    return tuple(marked)
