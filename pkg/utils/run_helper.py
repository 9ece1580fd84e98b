# utils/run_helper.py
import logging
from typing import List, Optional, Tuple

import numpy as np

from config.app_config import Settings
from stokes.cases import CaseSetup, CircularHole, build_case, moffatt_eddy_extrema, polygon_domain
from stokes.pipeline import SolveOutcome, SolverOptions, solve_domain
from stokes.solution import branch_cut_check, pressure_drop
from utils.data_models import BranchJump, EddyReport, RunConfig, RunReport, SegmentResidual

logger = logging.getLogger(__name__)


def setup_from_config(cfg: RunConfig) -> CaseSetup:
    """Build the case named in the document, or the explicit polygon domain."""
    if cfg.case is not None:
        return build_case(cfg.case, cfg.parameters)
    spec = cfg.domain
    holes = [CircularHole(complex(*h.center), h.radius, h.laurent_degree, h.u, h.v, h.omega, h.samples)
             for h in spec.holes]
    domain = polygon_domain([complex(x, y) for x, y in spec.vertices], [e.to_spec() for e in spec.edges],
                            spec.samples_per_edge, spec.lightning_poles, spec.sigma, holes)
    options = SolverOptions(polynomial_degree=spec.polynomial_degree, use_aaa=False, sigma=spec.sigma)
    return CaseSetup("polygon", domain, options, spec.model_dump())


def solver_options(setup: CaseSetup, cfg: RunConfig, settings: Settings) -> SolverOptions:
    """Document overrides first, then the case defaults, then settings for whatever is still unset."""
    return setup.options.merged(**cfg.solver.overrides()).with_settings(settings)


def branch_jumps(outcome: SolveOutcome) -> List[BranchJump]:
    jumps = []
    for k in range(len(outcome.solution.log_centers)):
        check = branch_cut_check(outcome.solution, k)
        jumps.append(BranchJump(
            hole=k,
            velocity_jump=check.velocity_jump,
            velocity_scale=check.velocity_scale,
            psi_jump=float(np.mean(check.psi_jumps)) if check.psi_jumps.size else None,
            psi_jump_spread=check.psi_jump_spread,
            points=int(check.points.size),
        ))
    return jumps


def build_report(setup: CaseSetup, outcome: SolveOutcome, accuracy_target: Optional[float] = None) -> RunReport:
    residual = outcome.residual
    dp = pressure_drop(outcome.solution, *setup.pressure_points) if setup.pressure_points else None
    eddies = []
    if "cusp" in setup.landmarks:
        eddies = [EddyReport(x=e.position.real, y=e.position.imag, psi=e.value)
                  for e in moffatt_eddy_extrema(outcome.solution, setup)]
    target_met = accuracy_target is None or residual.accuracy_digits >= accuracy_target
    if not target_met:
        logger.warning(f"Accuracy target {accuracy_target} missed: {residual.accuracy_digits:.2f} digits")
    return RunReport(
        case=setup.name,
        accuracy_digits=residual.accuracy_digits,
        max_residual=residual.max_error,
        segments=[SegmentResidual(name=n, max_error=m, rms_error=r)
                  for n, m, r in zip(residual.names, residual.segment_max, residual.segment_rms)],
        n_unknowns=outcome.n_unknowns,
        n_samples=outcome.n_samples,
        rank=outcome.report.rank,
        pole_counts=outcome.placement.counts(),
        branch_jumps=branch_jumps(outcome),
        pressure_drop=dp,
        eddies=eddies,
        timings=outcome.timings,
        accuracy_target=accuracy_target,
        target_met=target_met,
    )


def run_config(cfg: RunConfig, settings: Settings) -> Tuple[CaseSetup, SolveOutcome, RunReport]:
    setup = setup_from_config(cfg)
    outcome = solve_domain(setup.domain, solver_options(setup, cfg, settings))
    return setup, outcome, build_report(setup, outcome, cfg.output.accuracy_target)
