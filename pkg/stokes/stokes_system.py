"""Real least-squares system for the Goursat coefficients.

Unknowns are laid out as the real parts of (cf, cg, f0 per hole, g0 per hole)
followed by the imaginary parts in the same order. With mu = 1:

    psi = Im[conj(z) f + g]        u - iv = -conj(f) + conj(z) f' + g'
    p = Re[4 f']                   omega = -Im[4 f']

Each hole adds f0 log(z - zc) to f and g0 log(z - zc) - conj(f0)[(z - zc) log(z - zc) - z]
to g, which keeps the velocity single-valued.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Sequence, Union

import numpy as np
import scipy.linalg
from numpy.typing import ArrayLike, NDArray

from stokes.errors import ConfigurationError, SolveError
from stokes.geometry import BoundarySamples, ComplexArray, Domain, FloatArray
from stokes.rational_basis import BasisEval

logger = logging.getLogger(__name__)

Target = Union[float, Callable[[ComplexArray], ArrayLike]]


class Functional(str, Enum):
    PSI = "psi"
    U = "u"
    V = "v"
    P = "p"
    OMEGA = "omega"
    UT = "ut"
    UN = "un"


@dataclass(frozen=True)
class Condition:
    """One imposed quantity and its target, constant or a function of boundary position.

    ``ut`` and ``un`` are velocity components along the boundary tangent and its
    left normal.
    """

    functional: Functional
    target: Target = 0.0

    def __post_init__(self):
        try:
            object.__setattr__(self, "functional", Functional(self.functional))
        except ValueError as e:
            raise ConfigurationError(f"Unknown boundary functional '{self.functional}'") from e

    def values(self, z: ComplexArray) -> FloatArray:
        if callable(self.target):
            out = np.broadcast_to(np.asarray(self.target(z), dtype=float), z.shape).copy()
        else:
            out = np.full(z.shape, float(self.target))
        if not np.all(np.isfinite(out)):
            raise ConfigurationError(f"Non-finite target values for functional '{self.functional.value}'")
        return out


@dataclass(frozen=True)
class BoundaryConditionSpec:
    first: Condition
    second: Condition

    @classmethod
    def no_slip(cls) -> BoundaryConditionSpec:
        return cls(Condition(Functional.U), Condition(Functional.V))

    @classmethod
    def velocity(cls, u: Target, v: Target) -> BoundaryConditionSpec:
        return cls(Condition(Functional.U, u), Condition(Functional.V, v))

    @classmethod
    def outflow(cls, pressure: Target = 0.0) -> BoundaryConditionSpec:
        """Parallel flow along x (v = 0) at a given pressure."""
        return cls(Condition(Functional.V, 0.0), Condition(Functional.P, pressure))

    @classmethod
    def parallel(cls, pressure: Target = 0.0) -> BoundaryConditionSpec:
        """Flow normal to the segment (zero tangential velocity) at a given pressure."""
        return cls(Condition(Functional.UT, 0.0), Condition(Functional.P, pressure))

    @property
    def conditions(self) -> tuple[Condition, Condition]:
        return self.first, self.second


@dataclass(frozen=True)
class LogTermBlock:
    center: complex


@dataclass(frozen=True)
class ColumnMap:
    n_columns: int
    n_holes: int

    @property
    def n_complex(self) -> int:
        return 2 * self.n_columns + 2 * self.n_holes

    @property
    def n_real(self) -> int:
        return 2 * self.n_complex

    def labels(self) -> list[str]:
        names = ([f"cf[{j}]" for j in range(self.n_columns)] + [f"cg[{j}]" for j in range(self.n_columns)]
                 + [f"f0[{k}]" for k in range(self.n_holes)] + [f"g0[{k}]" for k in range(self.n_holes)])
        return [f"Re {n}" for n in names] + [f"Im {n}" for n in names]


@dataclass(frozen=True)
class GoursatCoefficients:
    cf: ComplexArray
    cg: ComplexArray
    f0: ComplexArray
    g0: ComplexArray

    def __post_init__(self):
        for name in ("cf", "cg", "f0", "g0"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=complex).ravel())
        if self.cf.size != self.cg.size or self.f0.size != self.g0.size:
            raise SolveError("Coefficient vector lengths do not match")
        if not all(np.all(np.isfinite(getattr(self, n))) for n in ("cf", "cg", "f0", "g0")):
            raise SolveError("Coefficients must be finite")

    @classmethod
    def zeros(cls, n_columns: int, n_holes: int = 0) -> GoursatCoefficients:
        return cls(np.zeros(n_columns), np.zeros(n_columns), np.zeros(n_holes), np.zeros(n_holes))

    @classmethod
    def from_real(cls, x: ArrayLike, cmap: ColumnMap) -> GoursatCoefficients:
        x = np.asarray(x, dtype=float)
        if x.size != cmap.n_real:
            raise SolveError(f"Expected {cmap.n_real} real unknowns, got {x.size}")
        c = x[:cmap.n_complex] + 1j * x[cmap.n_complex:]
        n, p = cmap.n_columns, cmap.n_holes
        return cls(c[:n], c[n:2 * n], c[2 * n:2 * n + p], c[2 * n + p:])

    @property
    def column_map(self) -> ColumnMap:
        return ColumnMap(self.cf.size, self.f0.size)

    def to_real(self) -> FloatArray:
        c = np.concatenate([self.cf, self.cg, self.f0, self.g0])
        return np.concatenate([c.real, c.imag])


def goursat_fields(z: ComplexArray, f, df, g, dg) -> dict[Functional, NDArray]:
    """psi, u, v, p, omega from values of f, f', g, g' (columnwise when 2-D)."""
    zc = np.conj(z)[:, None] if np.ndim(f) == 2 else np.conj(z)
    velocity = -np.conj(f) + zc * df + dg
    return {
        Functional.PSI: np.imag(zc * f + g),
        Functional.U: np.real(velocity),
        Functional.V: -np.imag(velocity),
        Functional.P: np.real(4.0 * df),
        Functional.OMEGA: -np.imag(4.0 * df),
    }


def log_terms(z: ComplexArray, center: complex, f0: complex, g0: complex,
              branch: int = 0) -> tuple[ComplexArray, ComplexArray, ComplexArray, ComplexArray]:
    """Contributions of one hole's log terms to (f, f', g, g')."""
    shifted = z - center
    log = np.log(shifted) + 2j * np.pi * branch
    inv = 1.0 / shifted
    tied = shifted * log - z
    return (f0 * log, f0 * inv,
            g0 * log - np.conj(f0) * tied, g0 * inv - np.conj(f0) * log)


@dataclass(frozen=True)
class RowBlocks:
    psi: FloatArray
    u: FloatArray
    v: FloatArray
    p: FloatArray
    omega: FloatArray

    def block(self, functional: Functional, tangent: ComplexArray | None = None,
              rows: NDArray | slice = slice(None)) -> FloatArray:
        blocks = {Functional.PSI: self.psi, Functional.U: self.u, Functional.V: self.v,
                  Functional.P: self.p, Functional.OMEGA: self.omega}
        if functional in blocks:
            return blocks[functional][rows]
        if functional not in (Functional.UT, Functional.UN) or tangent is None:
            raise ConfigurationError(f"No row block for functional '{functional}'")
        t = tangent[:, None]
        if functional is Functional.UT:
            return t.real * self.u[rows] + t.imag * self.v[rows]
        return -t.imag * self.u[rows] + t.real * self.v[rows]


def make_rows(Zs: ArrayLike, be: BasisEval, logs: Sequence[LogTermBlock]) -> RowBlocks:
    """Real rows mapping the unknown vector to psi, u, v, p, omega at each sample."""
    Z = np.asarray(Zs, dtype=complex).ravel()
    if be.R0.shape[0] != Z.size:
        raise ConfigurationError(f"Basis evaluated at {be.R0.shape[0]} points, expected {Z.size}")
    zero = np.zeros_like(be.R0)
    groups = [
        goursat_fields(Z, be.R0, be.R1, zero, zero),            # Re cf
        goursat_fields(Z, zero, zero, be.R0, be.R1),            # Re cg
    ]
    log_real_f, log_real_g, log_imag_f, log_imag_g = [], [], [], []
    for block in logs:
        if np.any(Z == block.center):
            raise ConfigurationError(f"Sample coincides with log centre {block.center}")
        log_real_f.append(log_terms(Z, block.center, 1.0, 0.0))
        log_real_g.append(log_terms(Z, block.center, 0.0, 1.0))
        log_imag_f.append(log_terms(Z, block.center, 1j, 0.0))
        log_imag_g.append(log_terms(Z, block.center, 0.0, 1j))

    def stack(terms):
        return [np.column_stack(part) for part in zip(*terms)] if terms else [np.empty((Z.size, 0))] * 4

    groups.append(goursat_fields(Z, *stack(log_real_f)))
    groups.append(goursat_fields(Z, *stack(log_real_g)))
    groups.append(goursat_fields(Z, 1j * be.R0, 1j * be.R1, zero, zero))
    groups.append(goursat_fields(Z, zero, zero, 1j * be.R0, 1j * be.R1))
    groups.append(goursat_fields(Z, *stack(log_imag_f)))
    groups.append(goursat_fields(Z, *stack(log_imag_g)))
    merged = {q: np.hstack([np.asarray(grp[q], dtype=float).reshape(Z.size, -1) for grp in groups])
              for q in groups[0]}
    return RowBlocks(merged[Functional.PSI], merged[Functional.U], merged[Functional.V],
                     merged[Functional.P], merged[Functional.OMEGA])


@dataclass(frozen=True)
class StokesLinearSystem:
    A: FloatArray
    rhs: FloatArray
    column_map: ColumnMap
    row_segment: NDArray[np.int_]
    row_weights: FloatArray

    @property
    def shape(self) -> tuple[int, int]:
        return self.A.shape


def spacing_weights(samples: BoundarySamples) -> FloatArray:
    """Square roots of local arclength spacing per segment, normalized to mean 1."""
    weights = np.ones(samples.size)
    for k in np.unique(samples.segment):
        sel = np.flatnonzero(samples.segment == k)
        if sel.size < 2:
            continue
        gaps = np.abs(np.diff(samples.z[sel]))
        local = np.empty(sel.size)
        local[0], local[-1] = gaps[0], gaps[-1]
        local[1:-1] = 0.5 * (gaps[:-1] + gaps[1:])
        weights[sel] = np.sqrt(local)
    return weights / np.mean(weights)


def assemble(dom: Domain, samples: BoundarySamples, be: BasisEval, logs: Sequence[LogTermBlock],
             bcs: Sequence[BoundaryConditionSpec] | None = None,
             weighting: str = "uniform") -> StokesLinearSystem:
    """Two rows per sample, chosen by the segment's boundary condition pair."""
    segments = dom.segments
    specs = list(bcs) if bcs is not None else [seg.bc for seg in segments]
    if len(specs) != len(segments):
        raise ConfigurationError(f"{len(specs)} boundary conditions for {len(segments)} segments")
    for k, spec in enumerate(specs):
        if spec is None:
            raise ConfigurationError(f"Segment {k} ('{segments[k].name}') has no boundary condition")

    blocks = make_rows(samples.z, be, logs)
    cmap = ColumnMap(be.n_columns, len(logs))
    M = samples.size
    halves = [(np.empty((M, cmap.n_real)), np.empty(M)) for _ in range(2)]
    for k, spec in enumerate(specs):
        sel = np.flatnonzero(samples.segment == k)
        for (A_part, b_part), cond in zip(halves, spec.conditions):
            A_part[sel] = blocks.block(cond.functional, samples.tangent[sel], sel)
            b_part[sel] = cond.values(samples.z[sel])

    if weighting == "uniform":
        w = np.ones(M)
    elif weighting == "spacing":
        w = spacing_weights(samples)
    else:
        raise ConfigurationError(f"Unknown row weighting '{weighting}'")
    A = np.vstack([halves[0][0], halves[1][0]]) * np.concatenate([w, w])[:, None]
    rhs = np.concatenate([halves[0][1], halves[1][1]]) * np.concatenate([w, w])
    return StokesLinearSystem(A, rhs, cmap, np.concatenate([samples.segment, samples.segment]),
                              np.concatenate([w, w]))


@dataclass(frozen=True)
class SolveReport:
    residual_max: float
    residual_rms: float
    segment_max: dict[int, float]
    segment_rms: dict[int, float]
    rank: int
    n_unknowns: int
    n_rows: int

    @property
    def free_directions(self) -> int:
        return self.n_unknowns - self.rank


def solve(sys: StokesLinearSystem) -> tuple[GoursatCoefficients, SolveReport]:
    """Least squares by QR with column pivoting."""
    A, b = sys.A, sys.rhs
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
        raise SolveError("System matrix or right-hand side has non-finite entries")
    n_rows, n_cols = A.shape
    if n_rows < n_cols:
        logger.warning(f"Underdetermined system: {n_rows} rows for {n_cols} unknowns")
    try:
        x, _, rank, _ = scipy.linalg.lstsq(A, b, lapack_driver="gelsy")
    except (scipy.linalg.LinAlgError, ValueError) as e:
        logger.error(f"Least-squares solve of a {n_rows}x{n_cols} system failed: {e}")
        raise SolveError("Least-squares solve failed") from e

    free = n_cols - int(rank)
    if 2 * int(rank) < n_cols:
        logger.warning(f"Severe rank deficiency: rank {rank} of {n_cols}; solution truncated")
    elif free:
        # Oversized rational bases are numerically rank deficient; gelsy truncates them.
        logger.debug(f"Rank {rank} of {n_cols} in a {n_rows}-row system; {free} direction(s) truncated")

    residual = np.abs(A @ x - b) / sys.row_weights
    seg_max, seg_rms = {}, {}
    for k in np.unique(sys.row_segment):
        r = residual[sys.row_segment == k]
        seg_max[int(k)] = float(np.max(r))
        seg_rms[int(k)] = float(np.sqrt(np.mean(r ** 2)))
    report = SolveReport(float(np.max(residual)) if residual.size else 0.0,
                         float(np.sqrt(np.mean(residual ** 2))) if residual.size else 0.0,
                         seg_max, seg_rms, int(rank), n_cols, n_rows)
    return GoursatCoefficients.from_real(x, sys.column_map), report
