"""Pole placement and the end-to-end solve of a domain."""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

from stokes.aaa import aaa_fit, filter_exterior, froissart_cleanup, poles_of, schwarz_values
from stokes.errors import ConfigurationError
from stokes.geometry import ComplexArray, Domain, cluster_corner_poles, sample_segment
from stokes.rational_basis import BasisFamily, Laurent, PoleGroup, Polynomial, evaluate, orthogonalize
from stokes.solution import ResidualReport, StokesSolution, boundary_residual
from stokes.stokes_system import LogTermBlock, SolveReport, assemble, solve

logger = logging.getLogger(__name__)


# Knobs a case leaves unset fall back to Settings, then to these values.
BUILTIN_DEFAULTS: dict[str, Any] = {
    "aaa_tol": 1e-8,
    "aaa_max_degree": 100,
    "cleanup_tol": 1e-13,
    "far_pole_factor": 1e3,
    "eval_chunk": 2048,
}

SETTINGS_FIELDS: dict[str, str] = {
    "sigma": "SIGMA",
    "aaa_tol": "AAA_TOL",
    "aaa_max_degree": "AAA_MAX_DEGREE",
    "cleanup_tol": "AAA_CLEANUP_TOL",
    "far_pole_factor": "FAR_POLE_FACTOR",
    "eval_chunk": "EVAL_CHUNK",
}


@dataclass(frozen=True)
class SolverOptions:
    """Discretization knobs.

    ``None`` means unset: ``sigma``, ``lightning_poles`` and ``laurent_degree`` then keep
    the values the domain carries, and the AAA and evaluation knobs are filled from
    :meth:`with_settings` or, failing that, from ``BUILTIN_DEFAULTS``.
    """

    polynomial_degree: int = 40
    laurent_degree: int | None = None
    lightning_poles: int | None = None
    sigma: float | None = None
    use_aaa: bool = True
    aaa_tol: float | None = None
    aaa_max_degree: int | None = None
    cleanup_tol: float | None = None
    far_pole_factor: float | None = None
    weighting: str = "uniform"
    eval_chunk: int | None = None

    def __post_init__(self):
        if self.polynomial_degree < 0:
            raise ConfigurationError(f"Polynomial degree must be >= 0, got {self.polynomial_degree}")
        if self.laurent_degree is not None and self.laurent_degree < 1:
            raise ConfigurationError(f"Laurent degree must be >= 1, got {self.laurent_degree}")
        if self.lightning_poles is not None and self.lightning_poles < 0:
            raise ConfigurationError(f"Lightning pole count must be >= 0, got {self.lightning_poles}")
        if self.weighting not in ("uniform", "spacing"):
            raise ConfigurationError(f"Unknown row weighting '{self.weighting}'")
        for name in ("sigma", "aaa_tol", "far_pole_factor", "eval_chunk"):
            value = getattr(self, name)
            if value is not None and value <= 0:
                raise ConfigurationError(f"{name} must be > 0, got {value}")
        if self.aaa_max_degree is not None and self.aaa_max_degree < 0:
            raise ConfigurationError(f"AAA degree must be >= 0, got {self.aaa_max_degree}")
        if self.cleanup_tol is not None and self.cleanup_tol < 0:
            raise ConfigurationError(f"Cleanup tolerance must be >= 0, got {self.cleanup_tol}")

    def merged(self, **overrides) -> SolverOptions:
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def with_settings(self, settings: Any) -> SolverOptions:
        """Fill the knobs still unset from the runtime settings."""
        return replace(self, **{name: getattr(settings, key) for name, key in SETTINGS_FIELDS.items()
                                if getattr(self, name) is None})

    def resolved(self) -> SolverOptions:
        return replace(self, **{name: value for name, value in BUILTIN_DEFAULTS.items()
                                if getattr(self, name) is None})


@dataclass(frozen=True)
class PolePlacement:
    groups: tuple[PoleGroup, ...] = ()

    def poles(self, source: str | None = None) -> ComplexArray:
        chosen = [g.poles for g in self.groups if source is None or g.source == source]
        return np.asarray([p for poles in chosen for p in poles], dtype=complex)

    def counts(self) -> dict[str, int]:
        return {source: int(self.poles(source).size) for source in ("lightning", "aaa")}


def _aaa_poles(domain: Domain, loop_index: int, options: SolverOptions) -> ComplexArray:
    curved = [sample_segment(seg) for seg in domain.loops[loop_index] if seg.curved]
    if not curved:
        return np.empty(0, dtype=complex)
    Z = np.concatenate(curved)
    _, first = np.unique(Z, return_index=True)
    Z = Z[np.sort(first)]
    if Z.size < 2:
        return np.empty(0, dtype=complex)
    F = schwarz_values(Z)
    rep = aaa_fit(Z, F, tol=options.aaa_tol, max_degree=options.aaa_max_degree)
    rep = froissart_cleanup(rep, Z, F, options.cleanup_tol)
    poles = filter_exterior(poles_of(rep), domain)
    near = np.abs(poles - domain.center) <= options.far_pole_factor * domain.scale
    logger.info(f"AAA on {domain.loop_names[loop_index]} loop: degree {rep.degree}, "
                f"{int(near.sum())} pole(s) kept of {poles.size} exterior")
    return poles[near]


def place_poles(domain: Domain, options: SolverOptions | None = None) -> PolePlacement:
    """Lightning poles at every corner and AAA poles near curved boundary segments."""
    options = (options or SolverOptions()).resolved()
    groups = []
    for corner in domain.corners:
        if options.lightning_poles is not None:
            corner = replace(corner, pole_count=options.lightning_poles)
        if options.sigma is not None:
            corner = replace(corner, sigma=options.sigma)
        poles = cluster_corner_poles(corner)
        if poles.size:
            groups.append(PoleGroup(tuple(poles), "lightning"))
    if options.use_aaa:
        for k in range(len(domain.loops)):
            poles = _aaa_poles(domain, k, options)
            if poles.size:
                groups.append(PoleGroup(tuple(poles), "aaa"))
    placement = PolePlacement(tuple(groups))
    logger.info(f"Placed poles: {placement.counts()}")
    return placement


def basis_families(domain: Domain, placement: PolePlacement,
                   options: SolverOptions) -> tuple[list[BasisFamily], list[LogTermBlock]]:
    families: list[BasisFamily] = [Polynomial(options.polynomial_degree)]
    logs = []
    for hole in domain.holes:
        families.append(Laurent(hole.laurent_center, options.laurent_degree or hole.laurent_degree))
        families.extend(Laurent(center, degree) for center, degree in hole.extra_centers)
        logs.append(LogTermBlock(hole.laurent_center))
    families.extend(placement.groups)
    return families, logs


@dataclass(frozen=True)
class SolveOutcome:
    solution: StokesSolution
    report: SolveReport
    residual: ResidualReport
    placement: PolePlacement
    n_samples: int
    n_unknowns: int
    timings: dict[str, float] = field(default_factory=dict)


def solve_domain(domain: Domain, options: SolverOptions | None = None) -> SolveOutcome:
    """Sample, place poles, orthogonalize, assemble, solve and measure the boundary residual."""
    options = (options or SolverOptions()).resolved()
    timings: dict[str, float] = {}
    clock = time.perf_counter()

    def lap(phase: str) -> None:
        nonlocal clock
        now = time.perf_counter()
        timings[phase] = now - clock
        clock = now

    samples = domain.samples()
    lap("sample")
    placement = place_poles(domain, options)
    lap("poles")
    families, logs = basis_families(domain, placement, options)
    records = orthogonalize(samples.z, families)
    be = evaluate(records, samples.z)
    lap("basis")
    system = assemble(domain, samples, be, logs, weighting=options.weighting)
    lap("assemble")
    coefficients, report = solve(system)
    lap("solve")
    solution = StokesSolution(domain, tuple(records), coefficients,
                              tuple(block.center for block in logs), chunk=options.eval_chunk)
    residual = boundary_residual(solution)
    lap("residual")
    logger.info(f"Solved '{domain.name}': {samples.size} samples, {system.column_map.n_real} unknowns, "
                f"{residual.accuracy_digits:.1f} digits in {sum(timings.values()):.2f}s")
    return SolveOutcome(solution, report, residual, placement, samples.size,
                        system.column_map.n_real, timings)
