"""Built-in benchmark problems and analytic oracles.

Each case is a pydantic parameter model plus a builder returning a
:class:`CaseSetup`: the domain with its boundary conditions attached, the
default solver options and the reference points the diagnostics need.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Optional, Sequence

import numpy as np
from numpy.typing import ArrayLike
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from stokes.errors import ConfigurationError, EltDomainError, GeometryError
from stokes.geometry import (DEFAULT_SIGMA, Clustering, ComplexArray, Corner, Domain, FloatArray, Hole,
                             Segment, cluster_corner_poles, corner_between, corner_ratio,
                             mark_corner_endpoints, signed_area)
from stokes.pipeline import SolverOptions, solve_domain
from stokes.solution import StokesSolution, field_arrays, pressure_drop
from stokes.stokes_system import BoundaryConditionSpec, Functional

logger = logging.getLogger(__name__)

# Largest boundary gap between samples on clustered walls; a degree-n expansion
# over a region of half-size R needs spacing well below pi R / n.
MAX_SAMPLE_GAP = 0.02


@dataclass(frozen=True)
class CaseSetup:
    name: str
    domain: Domain
    options: SolverOptions
    parameters: dict[str, Any] = field(default_factory=dict)
    pressure_points: tuple[complex, complex] | None = None
    psi_reference_point: complex | None = None
    landmarks: dict[str, Any] = field(default_factory=dict)


def rigid_motion(u: float, v: float, omega: float, center: complex = 0j) -> BoundaryConditionSpec:
    """Velocity of a body translating with (u, v) and rotating at omega about ``center``."""
    return BoundaryConditionSpec.velocity(lambda z: u - omega * (z.imag - center.imag),
                                          lambda z: v + omega * (z.real - center.real))


# --- lubrication oracle -----------------------------------------------------

def constriction_shape(X: ArrayLike, lam: float):
    """Upper wall height H(X) = 1 - (lam / 2)(1 + cos(pi X)) on -1 <= X <= 1."""
    H = 1.0 - 0.5 * lam * (1.0 + np.cos(np.pi * np.asarray(X, dtype=float)))
    return float(H) if H.ndim == 0 else H


def elt_terms(lam: float) -> tuple[float, float, float]:
    """Leading-order, delta^2 and delta^4 lubrication pressure-drop terms."""
    if not 0.0 <= lam < 1.0:
        raise EltDomainError(f"Constriction amplitude must lie in [0, 1), got {lam}")
    root = math.sqrt(1.0 - lam)
    p0 = 3.0 * (3.0 * lam ** 2 - 8.0 * lam + 8.0) / (1.0 - lam) ** 2.5
    p2 = 12.0 * math.pi ** 2 * lam ** 2 / (5.0 * (1.0 - lam) ** 1.5)
    p4 = (8.0 * math.pi ** 4 * (428.0 * (root - 1.0) - 214.0 * (root - 2.0) * lam - 53.0 * lam ** 2)
          / (175.0 * root))
    return p0, p2, p4


def elt_pressure_drop(lam: float, delta: float = 1.0, order: int = 4) -> float:
    if order not in (0, 2, 4):
        raise EltDomainError(f"Lubrication order must be 0, 2 or 4, got {order}")
    p0, p2, p4 = elt_terms(lam)
    return p0 + (delta ** 2 * p2 if order >= 2 else 0.0) + (delta ** 4 * p4 if order >= 4 else 0.0)


def couette_oracle(r_in: float, r_out: float, omega_in: float, omega_out: float, r: ArrayLike):
    """Azimuthal velocity A r + B / r between concentric rotating cylinders."""
    if r_in == r_out:
        raise ConfigurationError("Couette oracle needs distinct radii")
    gap = r_out ** 2 - r_in ** 2
    A = (omega_out * r_out ** 2 - omega_in * r_in ** 2) / gap
    B = (omega_in - omega_out) * r_in ** 2 * r_out ** 2 / gap
    r = np.asarray(r, dtype=float)
    u_theta = A * r + B / r
    return float(u_theta) if u_theta.ndim == 0 else u_theta


# --- parameter models ------------------------------------------------------

class UniformFlowConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    u: float = Field(1.0, json_schema_extra={"example": 1.0})
    v: float = Field(0.0, json_schema_extra={"example": 0.0})
    polynomial_degree: int = Field(10, ge=0)
    samples_per_edge: int = Field(40, ge=2)


class ConstrictionConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    lam: float = Field(0.4, ge=0.0, lt=1.0, json_schema_extra={"example": 0.4})
    delta: float = Field(1.0, gt=0.0, description="Aspect ratio; enters the lubrication oracle only")
    polynomial_degree: int = Field(100, ge=0)
    aaa_tol: Optional[float] = Field(None, gt=0.0, description="Defaults to the STOKES_AAA_TOL setting")
    samples_per_segment: int = Field(600, ge=2)
    tanh_width: float = Field(14.0, gt=0.0)
    junction_poles: int = Field(16, ge=0, description="Lightning poles where the constriction meets the flat wall")
    use_aaa: bool = True


TWO_CYLINDER_CASES: dict[str, dict[str, float]] = {
    "a": dict(A_in=0.1, E=0.8, V_star=2.0, omega_in=-3.0, omega_out=1.0),
    "b": dict(A_in=0.4, E=0.3, V_star=1.0, omega_in=5.0, omega_out=-3.0),
    "c": dict(A_in=0.15, E=0.6, V_star=1.0, omega_in=10.0, omega_out=0.0),
    "d": dict(A_in=0.1, E=0.1, V_star=2.0, omega_in=0.0, omega_out=0.0),
    "e": dict(A_in=0.15, E=0.7, V_star=0.0, omega_in=3.33, omega_out=0.66),
    "f": dict(A_in=0.15, E=0.7, V_star=-1.0, omega_in=0.0, omega_out=0.66),
    "g": dict(A_in=0.3, E=0.65, V_star=0.0, omega_in=0.0, omega_out=-0.2),
    "h": dict(A_in=0.1, E=0.2, V_star=1.0, omega_in=5.0, omega_out=-1.0),
    "i": dict(A_in=0.3, E=0.5, V_star=1.0, omega_in=2.0, omega_out=-2.0),
}


class TwoCylinderConfig(BaseModel):
    """Inner cylinder of radius A_in centred at (E, 0) inside the unit cylinder.

    ``case`` fills the remaining fields from :data:`TWO_CYLINDER_CASES`; explicitly
    given fields take precedence.
    """

    model_config = ConfigDict(extra="forbid")

    case: Optional[str] = Field(None, json_schema_extra={"example": "d"})
    A_in: float = Field(0.1, gt=0.0)
    E: float = Field(0.1, gt=-1.0, lt=1.0)
    V_star: float = 2.0
    omega_in: float = 0.0
    omega_out: float = 0.0
    U_in: float = Field(1.0, description="Horizontal translation speed of the inner cylinder")
    polynomial_degree: int = Field(20, ge=0)
    laurent_degree: int = Field(50, ge=1)
    inner_samples: int = Field(200, ge=2)
    outer_samples: int = Field(500, ge=2)

    @model_validator(mode="before")
    @classmethod
    def fill_from_case(cls, data: Any) -> Any:
        if isinstance(data, dict) and data.get("case") is not None:
            letter = str(data["case"]).lower()
            if letter not in TWO_CYLINDER_CASES:
                raise ValueError(f"Unknown two-cylinder case '{data['case']}'")
            data = {**TWO_CYLINDER_CASES[letter], **data, "case": letter}
        return data

    @model_validator(mode="after")
    def check_clearance(self) -> TwoCylinderConfig:
        if self.A_in + abs(self.E) >= 1.0:
            raise ValueError(f"Inner cylinder touches the outer one (A_in + |E| = {self.A_in + abs(self.E)})")
        return self


class EllipseInEllipseConfig(BaseModel):
    """Ellipses given by semi-minor axis and eccentricity, major axes along x."""

    model_config = ConfigDict(extra="forbid")

    outer_minor: float = Field(1.0, gt=0.0)
    outer_eccentricity: float = Field(0.6, ge=0.0, lt=1.0)
    inner_minor: float = Field(0.15, gt=0.0)
    inner_eccentricity: float = Field(0.8, ge=0.0, lt=1.0)
    E: float = 0.6
    V_star: float = 1.0
    omega_in: float = 10.0
    omega_out: float = 0.0
    U_in: float = 1.0
    polynomial_degree: int = Field(40, ge=0)
    laurent_degree: int = Field(120, ge=1)
    outer_samples: int = Field(600, ge=2)
    inner_samples: int = Field(600, ge=2)

    @model_validator(mode="after")
    def check_clearance(self) -> EllipseInEllipseConfig:
        t = np.linspace(0.0, 2.0 * np.pi, 721)
        x = self.E + _major(self.inner_minor, self.inner_eccentricity) * np.cos(t)
        y = self.inner_minor * np.sin(t)
        a_out = _major(self.outer_minor, self.outer_eccentricity)
        if np.max((x / a_out) ** 2 + (y / self.outer_minor) ** 2) >= 1.0:
            raise ValueError("Inner ellipse does not fit inside the outer ellipse")
        return self


class HeartChannelConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    size: float = Field(0.5, gt=0.0, description="Cardioid scale; the hole spans about 1.1 size in x")
    cusp: float = Field(-0.5, description="x position of the cusp")
    half_length: float = Field(2.0, gt=0.0)
    half_height: float = Field(1.0, gt=0.0)
    inlet_pressure: float = 12.0
    outlet_pressure: float = 0.0
    polynomial_degree: int = Field(120, ge=0)
    laurent_degree: int = Field(80, ge=1)
    hole_samples: int = Field(800, ge=2)
    wall_samples: int = Field(300, ge=2)

    @model_validator(mode="after")
    def check_clearance(self) -> HeartChannelConfig:
        if self.hole_samples < 3 * self.laurent_degree:
            raise ValueError(f"hole_samples must be at least 3 * laurent_degree = {3 * self.laurent_degree}")
        if 0.65 * self.size >= self.half_height or abs(self.cusp) + 1.1 * self.size >= self.half_length:
            raise ValueError("Heart-shaped hole does not fit inside the channel")
        return self


class BifurcationConfig(BaseModel):
    """Parent channel x in [-2, 0], |y| <= 0.5, splitting into branches at +-45 degrees."""

    model_config = ConfigDict(extra="forbid")

    branch_width: float = Field(0.5, gt=0.0)
    branch_length: float = Field(2.0, gt=0.0)
    fillet_radius: float = Field(0.1, gt=0.0)
    lightning_poles: int = Field(48, ge=0)
    sigma: Optional[float] = Field(None, gt=0.0, description="Defaults to the STOKES_SIGMA setting")
    corner_scale: float = Field(1.0, gt=0.0)
    polynomial_degree: int = Field(96, ge=0)
    laurent_degree: int = Field(48, ge=1)
    with_hole: bool = True
    hole_center: tuple[float, float] = (-1.0, 0.0)
    hole_semi_axes: tuple[float, float] = (0.2, 0.1)
    inlet_pressure: float = 20.0
    upper_outlet_pressure: float = 4.0
    lower_outlet_pressure: float = 0.0
    wall_samples: int = Field(200, ge=2)
    inner_wall_samples: int = Field(300, ge=2)
    arc_samples: int = Field(150, ge=2)
    outlet_samples: int = Field(100, ge=2)
    hole_samples: int = Field(300, ge=2)
    tanh_width: float = Field(8.0, gt=0.0)

    @model_validator(mode="after")
    def check_apex(self) -> BifurcationConfig:
        if math.sqrt(2.0) * self.branch_width - 0.5 <= 0.0:
            raise ValueError("Branches are too narrow to meet beyond the parent channel")
        return self


# --- geometry helpers ------------------------------------------------------

def _major(minor: float, eccentricity: float) -> float:
    return minor / math.sqrt(1.0 - eccentricity ** 2)


def ellipse_segment(center: complex, semi_x: float, semi_y: float, n_samples: int,
                    clockwise: bool = False, **options) -> Segment:
    sign = -1.0 if clockwise else 1.0

    def curve(s: FloatArray) -> ComplexArray:
        t = sign * 2.0 * np.pi * np.asarray(s, dtype=float)
        return center + semi_x * np.cos(t) + 1j * semi_y * np.sin(t)

    return Segment.parametric(curve, n_samples, **options)


def _innermost_distance(corner: Corner) -> float:
    poles = cluster_corner_poles(corner)
    return float(np.min(np.abs(poles - corner.vertex))) if poles.size else corner.scale


def backfill(seg: Segment, gap: float = MAX_SAMPLE_GAP) -> Segment:
    """Add evenly spaced samples so no parameter gap along ``seg`` spans more than ``gap``."""
    return replace(seg, uniform_samples=max(seg.uniform_samples, math.ceil(seg.length() / gap)))


def cluster_toward(seg: Segment, toward: str, distance: float, n_cluster: int, uniform: int) -> Segment:
    """Corner-cluster ``seg`` so its first sample sits at a third of ``distance`` from the corner."""
    if toward == "both":
        ratio = corner_ratio((n_cluster + 1) // 2, distance, 0.5 * seg.length())
    else:
        ratio = corner_ratio(n_cluster, distance, seg.length())
    return replace(seg, clustering=Clustering.CORNER, toward=toward, ratio=ratio,
                   n_samples=n_cluster, uniform_samples=uniform)


@dataclass(frozen=True)
class CircularHole:
    center: complex
    radius: float
    laurent_degree: int = 30
    u: float = 0.0
    v: float = 0.0
    omega: float = 0.0
    n_samples: int = 200


def polygon_domain(vertices: Sequence[complex], conditions: Sequence[BoundaryConditionSpec],
                   samples_per_edge: int = 100, lightning_poles: int = 24, sigma: float | None = None,
                   holes: Sequence[CircularHole] = (), name: str = "polygon") -> Domain:
    """Counterclockwise polygon with one boundary condition per edge (edge k runs
    from vertex k to vertex k+1) and optional circular holes."""
    pts = np.asarray(vertices, dtype=complex).ravel()
    n = pts.size
    if n < 3:
        raise GeometryError(f"A polygon needs at least three vertices, got {n}")
    if len(conditions) != n:
        raise ConfigurationError(f"{len(conditions)} edge conditions for {n} edges")
    if signed_area(pts) <= 0:
        raise GeometryError("Polygon vertices must run counterclockwise")
    edges = [Segment.line(pts[k], pts[(k + 1) % n], samples_per_edge, bc=conditions[k], name=f"edge {k}")
             for k in range(n)]

    sigma = sigma if sigma is not None else DEFAULT_SIGMA
    corners: dict[int, Corner] = {}
    if lightning_poles > 0:
        for k in range(n):
            corner = corner_between(edges[k - 1], edges[k], lightning_poles, sigma)
            if corner is not None:
                corners[k] = corner
    clustered = []
    for k, seg in enumerate(edges):
        ends = [c for c in (corners.get(k), corners.get((k + 1) % n)) if c is not None]
        if not ends:
            clustered.append(seg)
            continue
        toward = "both" if len(ends) == 2 else ("start" if k in corners else "end")
        distance = min(_innermost_distance(c) for c in ends)
        clustered.append(cluster_toward(seg, toward, distance, 3 * lightning_poles, samples_per_edge))
    outer = mark_corner_endpoints(clustered, pts)

    hole_list = []
    for j, spec in enumerate(holes):
        arc = Segment.arc(spec.center, spec.radius, 2.0 * np.pi, 0.0, spec.n_samples,
                          bc=rigid_motion(spec.u, spec.v, spec.omega, complex(spec.center)), name=f"hole {j}")
        hole_list.append(Hole((arc,), complex(spec.center), spec.laurent_degree))
    return Domain(outer, tuple(hole_list), tuple(corners.values()), name=name)


# --- builders --------------------------------------------------------------

def build_uniform_flow(cfg: UniformFlowConfig) -> CaseSetup:
    bc = BoundaryConditionSpec.velocity(cfg.u, cfg.v)
    domain = polygon_domain([0, 1, 1 + 1j, 1j], [bc] * 4, cfg.samples_per_edge, lightning_poles=0,
                            name="uniform-flow")
    return CaseSetup("uniform-flow", domain, SolverOptions(polynomial_degree=cfg.polynomial_degree, use_aaa=False),
                     cfg.model_dump())


def build_constricted_channel(cfg: ConstrictionConfig) -> CaseSetup:
    """Channel X in [-2, 2] with lower wall Y = 0 and upper wall Y = H(X) on [-1, 1]."""
    lam = cfg.lam
    no_slip = BoundaryConditionSpec.no_slip()
    sampling = dict(clustering=Clustering.TANH, tanh_width=cfg.tanh_width)
    n = cfg.samples_per_segment

    def upper(x0: float, x1: float):
        def curve(s: FloatArray) -> ComplexArray:
            X = x0 + (x1 - x0) * np.asarray(s, dtype=float)
            return X + 1j * constriction_shape(X, lam)
        return curve

    outer = tuple(backfill(seg) for seg in (
        Segment.line(-2.0, 2.0, n, bc=no_slip, name="lower wall", **sampling),
        Segment.line(2.0, 2.0 + 1j, n, bc=BoundaryConditionSpec.outflow(0.0), name="outlet", **sampling),
        Segment.line(2.0 + 1j, 1.0 + 1j, n, bc=no_slip, name="upper wall right", **sampling),
        Segment.parametric(upper(1.0, 0.0), n, bc=no_slip, curved=True, name="constriction right", **sampling),
        Segment.parametric(upper(0.0, -1.0), n, bc=no_slip, curved=True, name="constriction left", **sampling),
        Segment.line(-1.0 + 1j, -2.0 + 1j, n, bc=no_slip, name="upper wall left", **sampling),
        Segment.line(-2.0 + 1j, -2.0, n, name="inlet", **sampling,
                     bc=BoundaryConditionSpec.velocity(lambda z: 6.0 * (z.imag - z.imag ** 2), 0.0)),
    ))
    # The wall curvature jumps at X = +-1; poles above the wall absorb the weak singularity.
    corners = ()
    if lam > 0.0 and cfg.junction_poles > 0:
        corners = tuple(Corner(complex(x, 1.0), 0.5 * np.pi, 1.0, cfg.junction_poles) for x in (1.0, -1.0))
    domain = Domain(outer, corners=corners, name=f"constricted-channel(lam={lam:g})")
    options = SolverOptions(polynomial_degree=cfg.polynomial_degree, use_aaa=cfg.use_aaa, aaa_tol=cfg.aaa_tol)
    return CaseSetup("constricted-channel", domain, options, cfg.model_dump(),
                     pressure_points=(-1.0 + 0.5j, 1.0 + 0.5j))


def build_two_cylinder(cfg: TwoCylinderConfig) -> CaseSetup:
    E, a = cfg.E, cfg.A_in
    width = math.ceil(1.0 / (1.0 - abs(E))) + 1
    outer = Segment.arc(0j, 1.0, -2.0 * np.pi, 0.0, cfg.outer_samples, clustering=Clustering.TANH,
                        tanh_width=width, bc=rigid_motion(0.0, 0.0, cfg.omega_out), name="outer cylinder")
    inner = Segment.arc(complex(E), a, 2.0 * np.pi, 0.0, cfg.inner_samples,
                        bc=rigid_motion(cfg.U_in, cfg.V_star, cfg.omega_in, complex(E)), name="inner cylinder")
    extra = ((1.0 / np.conj(complex(E)), cfg.laurent_degree),) if E != 0 else ()
    hole = Hole((inner,), complex(E), cfg.laurent_degree, extra)
    label = f"two-cylinder({cfg.case})" if cfg.case else "two-cylinder"
    domain = Domain((outer,), (hole,), name=label)
    return CaseSetup("two-cylinder", domain, SolverOptions(polynomial_degree=cfg.polynomial_degree, use_aaa=False),
                     cfg.model_dump(), psi_reference_point=None,
                     landmarks={"outer_radius": 1.0, "inner_center": complex(E), "inner_radius": a})


def build_ellipse_in_ellipse(cfg: EllipseInEllipseConfig) -> CaseSetup:
    a_out = _major(cfg.outer_minor, cfg.outer_eccentricity)
    a_in = _major(cfg.inner_minor, cfg.inner_eccentricity)
    outer = ellipse_segment(0j, a_out, cfg.outer_minor, cfg.outer_samples,
                            bc=rigid_motion(0.0, 0.0, cfg.omega_out), name="outer ellipse")
    inner = ellipse_segment(complex(cfg.E), a_in, cfg.inner_minor, cfg.inner_samples, clockwise=True,
                            bc=rigid_motion(cfg.U_in, cfg.V_star, cfg.omega_in, complex(cfg.E)), name="inner ellipse")
    domain = Domain((outer,), (Hole((inner,), complex(cfg.E), cfg.laurent_degree),), name="ellipse-in-ellipse")
    return CaseSetup("ellipse-in-ellipse", domain,
                     SolverOptions(polynomial_degree=cfg.polynomial_degree, use_aaa=False), cfg.model_dump())


def build_heart_channel(cfg: HeartChannelConfig) -> CaseSetup:
    """Cardioid hole, cusp facing upstream, in a pressure-driven channel."""
    L, h = cfg.half_length, cfg.half_height
    shift = complex(cfg.cusp)

    def heart(s: FloatArray) -> ComplexArray:
        theta = np.pi - 2.0 * np.pi * np.asarray(s, dtype=float)
        return shift + cfg.size * (1.0 + np.cos(theta)) * np.exp(1j * theta)

    walls = dict(clustering=Clustering.TANH, tanh_width=6.0)
    no_slip = BoundaryConditionSpec.no_slip()
    outer = tuple(backfill(seg) for seg in (
        Segment.line(-L - 1j * h, L - 1j * h, cfg.wall_samples, bc=no_slip, name="lower wall", **walls),
        Segment.line(L - 1j * h, L + 1j * h, cfg.wall_samples, name="outlet", **walls,
                     bc=BoundaryConditionSpec.parallel(cfg.outlet_pressure)),
        Segment.line(L + 1j * h, -L + 1j * h, cfg.wall_samples, bc=no_slip, name="upper wall", **walls),
        Segment.line(-L + 1j * h, -L - 1j * h, cfg.wall_samples, name="inlet", **walls,
                     bc=BoundaryConditionSpec.parallel(cfg.inlet_pressure)),
    ))
    # Uniform in the polar angle, so denser toward the cusp.
    hole_seg = Segment.parametric(heart, cfg.hole_samples, bc=no_slip, name="heart")
    centroid = shift + cfg.size * 5.0 / 6.0
    domain = Domain(outer, (Hole((hole_seg,), centroid, cfg.laurent_degree),), name="heart-hole-channel")
    return CaseSetup("heart-hole-channel", domain,
                     SolverOptions(polynomial_degree=cfg.polynomial_degree, use_aaa=False), cfg.model_dump(),
                     pressure_points=(-0.5 * (L + abs(shift) + cfg.size) + 0j, 0.5 * (L + 1.1 * cfg.size) + 0j),
                     psi_reference_point=complex(-0.5 * (L + abs(shift)), 0.0),
                     landmarks={"cusp": shift, "dent_depth": 0.25 * cfg.size, "dent_height": 0.45 * cfg.size})


def build_bifurcation(cfg: BifurcationConfig) -> CaseSetup:
    """Symmetric bifurcation with a rounded apex and two sharp re-entrant corners.

    Walls meeting at a corner (the re-entrant pair and the two inlet corners) carry
    lightning poles and corner-clustered samples; the apex fillet, the inner branch
    walls and the elliptical particle get AAA poles.
    """
    half = 0.5
    b, length, rho = cfg.branch_width, cfg.branch_length, cfg.fillet_radius
    up, down = np.exp(0.25j * np.pi), np.exp(-0.25j * np.pi)
    c_up, c_low = complex(0.0, half), complex(0.0, -half)
    in_up, in_low = complex(-2.0, half), complex(-2.0, -half)
    apex = math.sqrt(2.0) * b - half
    fillet_center = complex(apex + math.sqrt(2.0) * rho, 0.0)
    p1 = c_low + length * down
    p2 = p1 + b * up
    p3 = c_up + b * down + length * up
    p4 = c_up + length * up

    no_slip = BoundaryConditionSpec.no_slip()
    smooth = dict(clustering=Clustering.TANH, tanh_width=cfg.tanh_width)
    fillet = Segment.arc(fillet_center, rho, 1.25 * np.pi, 0.75 * np.pi, cfg.arc_samples, bc=no_slip,
                         curved=True, name="apex fillet", **smooth)
    bottom = Segment.line(in_low, c_low, cfg.wall_samples, bc=no_slip, name="parent lower wall")
    lower_outer = Segment.line(c_low, p1, cfg.wall_samples, bc=no_slip, name="lower branch outer wall")
    upper_outer = Segment.line(p4, c_up, cfg.wall_samples, bc=no_slip, name="upper branch outer wall")
    top = Segment.line(c_up, in_up, cfg.wall_samples, bc=no_slip, name="parent upper wall")
    inlet = Segment.line(in_up, in_low, cfg.outlet_samples, name="inlet", **smooth,
                         bc=BoundaryConditionSpec.parallel(cfg.inlet_pressure))

    poles = dict(sigma=cfg.sigma if cfg.sigma is not None else DEFAULT_SIGMA, scale=cfg.corner_scale)
    corner_low = corner_between(bottom, lower_outer, cfg.lightning_poles, **poles)
    corner_up = corner_between(upper_outer, top, cfg.lightning_poles, **poles)
    corner_in_low = corner_between(inlet, bottom, cfg.lightning_poles, **poles)
    corner_in_up = corner_between(top, inlet, cfg.lightning_poles, **poles)
    corners = tuple(c for c in (corner_low, corner_up, corner_in_low, corner_in_up) if c is not None)
    if cfg.lightning_poles > 0:
        n_cluster = 3 * cfg.lightning_poles
        d_low, d_up = _innermost_distance(corner_low), _innermost_distance(corner_up)
        d_in = min(_innermost_distance(corner_in_low), _innermost_distance(corner_in_up))
        bottom = cluster_toward(bottom, "both", min(d_in, d_low), n_cluster, cfg.wall_samples)
        lower_outer = cluster_toward(lower_outer, "start", d_low, n_cluster, cfg.wall_samples)
        upper_outer = cluster_toward(upper_outer, "end", d_up, n_cluster, cfg.wall_samples)
        top = cluster_toward(top, "both", min(d_in, d_up), n_cluster, cfg.wall_samples)
        inlet = cluster_toward(inlet, "both", d_in, n_cluster, cfg.outlet_samples)

    outer = tuple(backfill(seg) for seg in (
        bottom,
        lower_outer,
        Segment.line(p1, p2, cfg.outlet_samples, name="lower outlet", **smooth,
                     bc=BoundaryConditionSpec.parallel(cfg.lower_outlet_pressure)),
        Segment.line(p2, fillet.start_point, cfg.inner_wall_samples, bc=no_slip, curved=True,
                     name="lower branch inner wall", **smooth),
        fillet,
        Segment.line(fillet.end_point, p3, cfg.inner_wall_samples, bc=no_slip, curved=True,
                     name="upper branch inner wall", **smooth),
        Segment.line(p3, p4, cfg.outlet_samples, name="upper outlet", **smooth,
                     bc=BoundaryConditionSpec.parallel(cfg.upper_outlet_pressure)),
        upper_outer,
        top,
        inlet,
    ))
    outer = mark_corner_endpoints(outer, [c.vertex for c in corners])
    holes = ()
    if cfg.with_hole:
        center = complex(*cfg.hole_center)
        ellipse = ellipse_segment(center, cfg.hole_semi_axes[0], cfg.hole_semi_axes[1], cfg.hole_samples,
                                  clockwise=True, bc=no_slip, curved=True, name="ellipse")
        holes = (Hole((ellipse,), center, cfg.laurent_degree),)
    domain = Domain(outer, holes, corners, name="bifurcation-ellipse" if cfg.with_hole else "bifurcation")
    return CaseSetup("bifurcation-ellipse", domain, SolverOptions(polynomial_degree=cfg.polynomial_degree,
                                                                  sigma=cfg.sigma),
                     cfg.model_dump(), landmarks={"apex": complex(apex), "corners": (c_up, c_low),
                                                  "inlet_corners": (in_up, in_low)})


# --- registry ----------------------------------------------------------------

@dataclass(frozen=True)
class CaseEntry:
    config: type[BaseModel]
    builder: Callable[[Any], CaseSetup]
    description: str


CASES: dict[str, CaseEntry] = {
    "uniform-flow": CaseEntry(UniformFlowConfig, build_uniform_flow,
                              "Uniform flow imposed on the unit square"),
    "constricted-channel": CaseEntry(ConstrictionConfig, build_constricted_channel,
                                     "Poiseuille inflow through a smoothly constricted channel"),
    "two-cylinder": CaseEntry(TwoCylinderConfig, build_two_cylinder,
                              "Translating and rotating cylinder inside a rotating cylinder"),
    "ellipse-in-ellipse": CaseEntry(EllipseInEllipseConfig, build_ellipse_in_ellipse,
                                    "Translating and rotating ellipse inside a fixed ellipse"),
    "heart-hole-channel": CaseEntry(HeartChannelConfig, build_heart_channel,
                                    "Pressure-driven channel flow past a heart-shaped hole"),
    "bifurcation-ellipse": CaseEntry(BifurcationConfig, build_bifurcation,
                                     "Elliptical particle in a bifurcating channel"),
}

GALLERY = ("ellipse-in-ellipse", "heart-hole-channel", "bifurcation-ellipse")


def case_config(name: str, params: dict[str, Any] | None = None) -> BaseModel:
    if name not in CASES:
        raise ConfigurationError(f"Unknown case '{name}'; expected one of {sorted(CASES)}")
    try:
        return CASES[name].config.model_validate(params or {})
    except ValidationError as e:
        raise ConfigurationError(f"Invalid parameters for case '{name}': {e}") from e


def build_case(name: str, params: dict[str, Any] | None = None) -> CaseSetup:
    cfg = case_config(name, params)
    setup = CASES[name].builder(cfg)
    logger.info(f"Built case '{name}' with {len(setup.domain.segments)} segments, "
                f"{len(setup.domain.holes)} hole(s), {len(setup.domain.corners)} corner(s)")
    return setup


def build_gallery_case(name: str, params: dict[str, Any] | None = None) -> CaseSetup:
    if name not in GALLERY:
        raise ConfigurationError(f"Unknown gallery case '{name}'; expected one of {list(GALLERY)}")
    return build_case(name, params)


# --- sweeps and diagnostics ---------------------------------------------------

SWEEP_PARAMETERS: dict[str, tuple[str, ...]] = {"constricted-channel": ("lam",)}


def check_sweep(case: str, parameter: str) -> None:
    if parameter not in SWEEP_PARAMETERS.get(case, ()):
        raise ConfigurationError(f"Case '{case}' does not support sweeping '{parameter}'")


@dataclass(frozen=True)
class SweepRow:
    lam: float
    dp_solver: float
    dp_elt0: float
    dp_elt2: float
    dp_elt4: float
    digits: float

    def relative_difference(self, reference: float) -> float:
        return abs(self.dp_solver - reference) / abs(self.dp_solver)


def sweep_pressure_drop(values: Sequence[float], params: dict[str, Any] | None = None,
                        overrides: dict[str, Any] | None = None, workers: int = 4,
                        settings: Any | None = None) -> list[SweepRow]:
    """Solver pressure drop against the lubrication series for each constriction amplitude.

    ``overrides`` take precedence over the case defaults, which take precedence over ``settings``.
    """

    def run(lam: float) -> SweepRow:
        setup = build_case("constricted-channel", {**(params or {}), "lam": lam})
        options = setup.options.merged(**(overrides or {}))
        if settings is not None:
            options = options.with_settings(settings)
        outcome = solve_domain(setup.domain, options)
        delta = setup.parameters["delta"]
        row = SweepRow(lam, pressure_drop(outcome.solution, *setup.pressure_points),
                       elt_pressure_drop(lam, delta, 0), elt_pressure_drop(lam, delta, 2),
                       elt_pressure_drop(lam, delta, 4), outcome.residual.accuracy_digits)
        logger.info(f"lam={lam:g}: dP={row.dp_solver:.6f} (ELT4 {row.dp_elt4:.6f})")
        return row

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        return list(pool.map(run, values))


@dataclass(frozen=True)
class EddyExtremum:
    position: complex
    value: float


def moffatt_eddy_extrema(sol: StokesSolution, setup: CaseSetup, nx: int = 160,
                         ny: int = 60) -> list[EddyExtremum]:
    """Signed extrema of psi - psi_c in the dent of the heart-shaped hole, from the
    mouth toward the cusp. The first entry is the through-flow region at the mouth;
    the following ones are successive eddies."""
    if "cusp" not in setup.landmarks or setup.psi_reference_point is None:
        raise ConfigurationError(f"Case '{setup.name}' has no cusp to inspect")
    cusp = complex(setup.landmarks["cusp"])
    depth, height = setup.landmarks["dent_depth"], setup.landmarks["dent_height"]
    psi_c = float(field_arrays(sol, [setup.psi_reference_point])[Functional.PSI][0])
    x = cusp.real - depth * np.linspace(1.0, 0.0, nx, endpoint=False)
    y = cusp.imag + height * np.linspace(0.0, 1.0, ny + 1)[1:]
    nodes = x[None, :] + 1j * y[:, None]
    fluid = np.asarray(sol.domain.contains(nodes), dtype=bool)
    deviation = np.full(nodes.shape, np.nan)
    if np.any(fluid):
        deviation[fluid] = field_arrays(sol, nodes[fluid])[Functional.PSI] - psi_c

    extrema: list[EddyExtremum] = []
    for col in range(nx):
        column = deviation[:, col]
        if np.all(np.isnan(column)):
            continue
        row = int(np.nanargmax(np.abs(column)))
        value = float(column[row])
        if extrema and np.sign(value) == np.sign(extrema[-1].value):
            if abs(value) > abs(extrema[-1].value):
                extrema[-1] = EddyExtremum(complex(nodes[row, col]), value)
        elif value != 0.0:
            extrema.append(EddyExtremum(complex(nodes[row, col]), value))
    return extrema
