"""Evaluation of a solved flow and physics diagnostics."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Mapping

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.spatial import cKDTree

from stokes.errors import BasisError, SolutionError
from stokes.geometry import ComplexArray, Domain, FloatArray, sample_parameters
from stokes.rational_basis import OrthogonalBasisRecord, column_count, evaluate
from stokes.stokes_system import Functional, GoursatCoefficients, goursat_fields, log_terms

logger = logging.getLogger(__name__)

# (dx, dy, weight) of the 13-point biharmonic stencil
_BIHARMONIC = ((0, 0, 20.0),
               (1, 0, -8.0), (-1, 0, -8.0), (0, 1, -8.0), (0, -1, -8.0),
               (1, 1, 2.0), (1, -1, 2.0), (-1, 1, 2.0), (-1, -1, 2.0),
               (2, 0, 1.0), (-2, 0, 1.0), (0, 2, 1.0), (0, -2, 1.0))
_LAPLACIAN = ((0, 0, -4.0), (1, 0, 1.0), (-1, 0, 1.0), (0, 1, 1.0), (0, -1, 1.0))


@dataclass(frozen=True)
class StokesSolution:
    domain: Domain
    records: tuple[OrthogonalBasisRecord, ...]
    coefficients: GoursatCoefficients
    log_centers: tuple[complex, ...]
    chunk: int = 2048

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        object.__setattr__(self, "log_centers", tuple(complex(c) for c in self.log_centers))
        if column_count(self.records) != self.coefficients.cf.size:
            raise SolutionError(f"Basis has {column_count(self.records)} columns but "
                                f"{self.coefficients.cf.size} coefficients were given")
        if len(self.log_centers) != self.coefficients.f0.size:
            raise SolutionError("One log centre is required per log coefficient pair")


@dataclass(frozen=True)
class FieldSample:
    psi: float | FloatArray
    u: float | FloatArray
    v: float | FloatArray
    p: float | FloatArray
    omega: float | FloatArray


def eval_goursat(sol: StokesSolution, z: ArrayLike, branches: Mapping[int, int] | None = None):
    """(f, g, f', g') at z. ``branches`` shifts a hole's logarithm by 2*pi*i*k."""
    branches = branches or {}
    z_arr = np.asarray(z, dtype=complex)
    flat = z_arr.ravel()
    out = [np.empty(flat.size, dtype=complex) for _ in range(4)]
    c = sol.coefficients
    for lo in range(0, flat.size, sol.chunk):
        zz = flat[lo:lo + sol.chunk]
        try:
            be = evaluate(sol.records, zz)
        except BasisError as e:
            raise SolutionError(f"Cannot evaluate the solution: {e}") from e
        f, df = be.R0 @ c.cf, be.R1 @ c.cf
        g, dg = be.R0 @ c.cg, be.R1 @ c.cg
        for k, center in enumerate(sol.log_centers):
            if np.any(zz == center):
                raise SolutionError(f"Evaluation at log centre {center}")
            lf, ldf, lg, ldg = log_terms(zz, center, c.f0[k], c.g0[k], branches.get(k, 0))
            f, df, g, dg = f + lf, df + ldf, g + lg, dg + ldg
        for arr, part in zip(out, (f, g, df, dg)):
            arr[lo:lo + sol.chunk] = part
    if z_arr.ndim == 0:
        return tuple(complex(arr[0]) for arr in out)
    return tuple(arr.reshape(z_arr.shape) for arr in out)


def field_arrays(sol: StokesSolution, z: ArrayLike,
                 branches: Mapping[int, int] | None = None) -> dict[Functional, NDArray]:
    f, g, df, dg = eval_goursat(sol, np.asarray(z, dtype=complex).ravel(), branches)
    return goursat_fields(np.asarray(z, dtype=complex).ravel(), f, df, g, dg)


def eval_fields(sol: StokesSolution, z: ArrayLike) -> FieldSample:
    z_arr = np.asarray(z, dtype=complex)
    fields = field_arrays(sol, z_arr)
    if z_arr.ndim == 0:
        return FieldSample(*(float(fields[q][0]) for q in
                             (Functional.PSI, Functional.U, Functional.V, Functional.P, Functional.OMEGA)))
    return FieldSample(*(fields[q].reshape(z_arr.shape) for q in
                         (Functional.PSI, Functional.U, Functional.V, Functional.P, Functional.OMEGA)))


def pressure_drop(sol: StokesSolution, z1: complex, z2: complex) -> float:
    p = field_arrays(sol, [z1, z2])[Functional.P]
    return float(p[0] - p[1])


def functional_values(fields: Mapping[Functional, NDArray], functional: Functional,
                      tangent: ComplexArray | None = None) -> FloatArray:
    if functional in fields:
        return fields[functional]
    t = tangent if tangent is not None else np.ones_like(fields[Functional.U], dtype=complex)
    if functional is Functional.UT:
        return t.real * fields[Functional.U] + t.imag * fields[Functional.V]
    return -t.imag * fields[Functional.U] + t.real * fields[Functional.V]


@dataclass(frozen=True)
class ResidualReport:
    names: tuple[str, ...]
    segment_max: tuple[float, ...]
    segment_rms: tuple[float, ...]

    @property
    def max_error(self) -> float:
        return max(self.segment_max, default=0.0)

    @property
    def accuracy_digits(self) -> float:
        return float(-np.log10(max(self.max_error, np.finfo(float).tiny)))


def boundary_residual(sol: StokesSolution) -> ResidualReport:
    """Imposed-condition errors at quarter points between training samples."""
    names, maxima, rms = [], [], []
    for k, seg in enumerate(sol.domain.segments):
        if seg.bc is None:
            continue
        s = sample_parameters(seg)
        ds = np.diff(s)
        mid = np.sort(np.concatenate([s[:-1] + 0.25 * ds, s[:-1] + 0.75 * ds]))
        z = seg.point(mid)
        tangent = seg.tangent(mid)
        fields = field_arrays(sol, z)
        errors = np.concatenate([np.abs(functional_values(fields, cond.functional, tangent) - cond.values(z))
                                 for cond in seg.bc.conditions])
        names.append(seg.name or f"segment {k}")
        maxima.append(float(np.max(errors)))
        rms.append(float(np.sqrt(np.mean(errors ** 2))))
    report = ResidualReport(tuple(names), tuple(maxima), tuple(rms))
    logger.info(f"Boundary residual {report.max_error:.3e} ({report.accuracy_digits:.1f} digits)")
    return report


def _stencil(sol: StokesSolution, z: complex, h: float, stencil, quantity: Functional) -> tuple[float, float]:
    offsets = np.array([dx + 1j * dy for dx, dy, _ in stencil])
    weights = np.array([w for _, _, w in stencil])
    points = z + h * offsets
    if not np.all(sol.domain.contains(points)):
        raise SolutionError(f"Stencil of width {h:.3e} at {z} leaves the domain")
    values = field_arrays(sol, points)[quantity]
    return float(weights @ values), float(np.max(np.abs(values)))


def biharmonic_residual(sol: StokesSolution, z: complex, h: float) -> float:
    """13-point finite-difference biharmonic of psi."""
    value, _ = _stencil(sol, complex(z), h, _BIHARMONIC, Functional.PSI)
    return value / h ** 4


@dataclass(frozen=True)
class PhysicsResiduals:
    """Finite-difference identity checks, each normalized by its local field scale."""

    divergence: float
    vorticity: float
    stream_function: float
    laplacian_p: float
    laplacian_omega: float
    biharmonic: float

    def worst(self) -> float:
        return max(self.divergence, self.vorticity, self.stream_function,
                   self.laplacian_p, self.laplacian_omega, self.biharmonic)


def _relative(value: float, scale: float) -> float:
    return abs(value) / scale if scale > 0 else abs(value)


def physics_residuals(sol: StokesSolution, z: complex, h: float, h1: float) -> PhysicsResiduals:
    """Check the field identities at ``z`` with stencils of width ``h`` (second order and up)
    and ``h1`` (first derivatives); see ``Settings.fd_steps``.

    Each residual is relative to the local field size, floored by the flow velocity
    over the domain scale.
    """
    z = complex(z)
    length = sol.domain.scale
    points = z + h1 * np.array([0, 1, -1, 1j, -1j])
    if not np.all(sol.domain.contains(points)):
        raise SolutionError(f"Stencil of width {h1:.3e} at {z} leaves the domain")
    fields = field_arrays(sol, points)
    u, v, psi, omega = (fields[q] for q in (Functional.U, Functional.V, Functional.PSI, Functional.OMEGA))
    ux, uy = (u[1] - u[2]) / (2 * h1), (u[3] - u[4]) / (2 * h1)
    vx, vy = (v[1] - v[2]) / (2 * h1), (v[3] - v[4]) / (2 * h1)
    psix, psiy = (psi[1] - psi[2]) / (2 * h1), (psi[3] - psi[4]) / (2 * h1)
    gradient = float(np.sqrt(ux ** 2 + uy ** 2 + vx ** 2 + vy ** 2))
    speed = max(abs(u[0]), abs(v[0]))
    velocity = max(speed, gradient * length) or 1.0
    rate = velocity / length

    lap_p, p_scale = _stencil(sol, z, h, _LAPLACIAN, Functional.P)
    lap_omega, omega_scale = _stencil(sol, z, h, _LAPLACIAN, Functional.OMEGA)
    biharmonic, psi_scale = _stencil(sol, z, h, _BIHARMONIC, Functional.PSI)
    return PhysicsResiduals(
        divergence=_relative(ux + vy, max(gradient, rate)),
        vorticity=_relative(vx - uy - omega[0], max(gradient, abs(omega[0]), rate)),
        stream_function=_relative(max(abs(psiy - u[0]), abs(psix + v[0])), velocity),
        laplacian_p=_relative(lap_p, max(p_scale, rate)),
        laplacian_omega=_relative(lap_omega, max(omega_scale, rate)),
        biharmonic=_relative(biharmonic, max(psi_scale, velocity * length)),
    )


def interior_points(domain: Domain, n: int = 8, depth: float = 0.75, resolution: int = 60,
                    cut_margin: float = 0.05) -> ComplexArray:
    """Up to ``n`` fluid points at least ``depth`` times the largest boundary clearance
    away from every boundary, picked from a ``resolution``-square lattice.

    Points within ``cut_margin`` (relative to the domain scale) of a hole's log branch
    cut are skipped: psi jumps by a constant across it.
    """
    x0, x1, y0, y1 = domain.bbox
    lattice = (np.linspace(x0, x1, resolution)[None, :] + 1j * np.linspace(y0, y1, resolution)[:, None]).ravel()
    lattice = lattice[np.asarray(domain.contains(lattice), dtype=bool)]
    band = cut_margin * domain.scale
    for hole in domain.holes:
        c = hole.laurent_center
        lattice = lattice[~((lattice.real < c.real + band) & (np.abs(lattice.imag - c.imag) < band))]
    if lattice.size == 0:
        raise SolutionError(f"No lattice point falls inside '{domain.name}'")
    boundary = np.concatenate(domain.loop_polylines)
    tree = cKDTree(np.column_stack([boundary.real, boundary.imag]))
    clearance, _ = tree.query(np.column_stack([lattice.real, lattice.imag]))
    deep = lattice[clearance >= depth * clearance.max()]
    step = max(1, deep.size // n)
    return deep[::step][:n]


@dataclass(frozen=True)
class BranchCutReport:
    points: ComplexArray
    velocity_jump: float
    velocity_scale: float
    psi_jumps: FloatArray

    @property
    def psi_jump_spread(self) -> float:
        return float(np.ptp(self.psi_jumps)) if self.psi_jumps.size else 0.0


def branch_cut_check(sol: StokesSolution, hole: int, n_points: int = 64) -> BranchCutReport:
    """Compare the one-sided limits of u + iv and psi on the log branch cut of a hole.

    The cut runs from the hole's log centre toward -infinity; points on it are
    evaluated with the principal log (limit from above) and with the log shifted
    by -2*pi*i (limit from below).
    """
    if not 0 <= hole < len(sol.log_centers):
        raise SolutionError(f"Hole {hole} has no log centre")
    center = sol.log_centers[hole]
    x0 = sol.domain.bbox[0]
    extent = center.real - x0
    empty = BranchCutReport(np.empty(0, dtype=complex), 0.0, 0.0, np.empty(0))
    if extent <= 0:
        return empty
    points = center - np.linspace(0.0, extent, n_points + 2)[1:-1]
    points = points[np.atleast_1d(sol.domain.contains(points))]
    if points.size == 0:
        return empty
    above = field_arrays(sol, points)
    below = field_arrays(sol, points, branches={hole: -1})
    vel_above = above[Functional.U] + 1j * above[Functional.V]
    vel_below = below[Functional.U] + 1j * below[Functional.V]
    return BranchCutReport(points, float(np.max(np.abs(vel_above - vel_below))),
                           float(np.max(np.abs(vel_above))), above[Functional.PSI] - below[Functional.PSI])


@dataclass(frozen=True)
class FieldGrid:
    """Fields on an nx-by-ny lattice; ``mask`` is True at nodes outside the fluid,
    where every field holds NaN."""

    x: FloatArray
    y: FloatArray
    mask: NDArray[np.bool_]
    psi: FloatArray
    u: FloatArray
    v: FloatArray
    p: FloatArray
    omega: FloatArray
    psi_reference: float | None = None
    outline: tuple[ComplexArray, ...] = ()

    @property
    def shape(self) -> tuple[int, int]:
        return self.mask.shape


def grid_eval(sol: StokesSolution, bbox: tuple[float, float, float, float] | None = None,
              nx: int = 200, ny: int = 200, psi_reference_point: complex | None = None) -> FieldGrid:
    if nx < 2 or ny < 2:
        raise SolutionError(f"Grid resolution must be at least 2x2, got {nx}x{ny}")
    x0, x1, y0, y1 = bbox if bbox is not None else sol.domain.bbox
    x = np.linspace(x0, x1, nx)
    y = np.linspace(y0, y1, ny)
    nodes = x[None, :] + 1j * y[:, None]
    fluid = np.asarray(sol.domain.contains(nodes), dtype=bool)
    grids = {q: np.full(nodes.shape, np.nan) for q in
             (Functional.PSI, Functional.U, Functional.V, Functional.P, Functional.OMEGA)}
    if np.any(fluid):
        fields = field_arrays(sol, nodes[fluid])
        for q, arr in grids.items():
            arr[fluid] = fields[q]
    psi_ref = None
    if psi_reference_point is not None:
        psi_ref = float(field_arrays(sol, [psi_reference_point])[Functional.PSI][0])
    logger.info(f"Evaluated {int(fluid.sum())} of {fluid.size} grid nodes")
    return FieldGrid(x, y, ~fluid, grids[Functional.PSI], grids[Functional.U], grids[Functional.V],
                     grids[Functional.P], grids[Functional.OMEGA], psi_ref, sol.domain.loop_polylines)
