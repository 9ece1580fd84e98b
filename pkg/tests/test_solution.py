import numpy as np
import pytest

from config.app_config import Settings
from stokes.cases import couette_oracle
from stokes.errors import SolutionError
from stokes.solution import (StokesSolution, biharmonic_residual, boundary_residual, branch_cut_check,
                             eval_fields, eval_goursat, grid_eval, interior_points, physics_residuals,
                             pressure_drop)
from stokes.stokes_system import GoursatCoefficients


class TestExactFlows:
    """Flows the representation contains exactly are recovered to rounding level."""

    def test_uniform_flow(self, uniform_flow_solved, rng):
        """Uniform flow: u = 1, v = 0 inside, psi rises like y."""
        _, outcome = uniform_flow_solved
        z = rng.uniform(0.05, 0.95, 50) + 1j * rng.uniform(0.05, 0.95, 50)
        fields = eval_fields(outcome.solution, z)
        np.testing.assert_allclose(fields.u, 1.0, atol=1e-10)
        np.testing.assert_allclose(fields.v, 0.0, atol=1e-10)
        np.testing.assert_allclose(fields.psi - fields.psi[0], z.imag - z.imag[0], atol=1e-10)
        assert outcome.residual.max_error <= 1e-10

    def test_poiseuille(self, poiseuille_solved):
        """Plane Poiseuille flow: parabolic profile and a pressure drop of 24 over the middle."""
        setup, outcome = poiseuille_solved
        assert outcome.residual.max_error <= 1e-10
        assert pressure_drop(outcome.solution, *setup.pressure_points) == pytest.approx(24.0, abs=1e-8)
        sample = eval_fields(outcome.solution, 0.3 + 0.25j)
        assert sample.u == pytest.approx(6 * (0.25 - 0.25 ** 2), abs=1e-10)
        assert sample.v == pytest.approx(0.0, abs=1e-10)

    def test_couette(self, couette_solved):
        """Concentric Couette flow matches A r + B / r."""
        _, outcome = couette_solved
        r = np.linspace(0.52, 0.98, 10)
        theta = np.linspace(0, 2 * np.pi, 10, endpoint=False)
        R, T = np.meshgrid(r, theta)
        fields = eval_fields(outcome.solution, R * np.exp(1j * T))
        u_theta = -fields.u * np.sin(T) + fields.v * np.cos(T)
        np.testing.assert_allclose(u_theta, couette_oracle(0.5, 1.0, 1.0, 0.0, R), atol=1e-8)


class TestEvaluation:
    """Shapes, scalars and invalid evaluation points."""

    def test_scalar_and_array_shapes(self, couette_solved):
        """Scalar input gives floats, array input keeps its shape."""
        _, outcome = couette_solved
        assert isinstance(eval_fields(outcome.solution, 0.7).u, float)
        assert eval_fields(outcome.solution, np.full((2, 3), 0.7 + 0.1j)).p.shape == (2, 3)
        f, g, df, dg = eval_goursat(outcome.solution, 0.7 + 0j)
        assert isinstance(f, complex)

    def test_chunking_does_not_change_values(self, two_cylinder_solved, rng):
        """Chunked evaluation gives the same values as a single block."""
        _, outcome = two_cylinder_solved
        z = 0.8 * np.sqrt(rng.uniform(0.1, 1.0, 100)) * np.exp(2j * np.pi * rng.uniform(size=100))
        z = z[np.abs(z - 0.1) > 0.15]
        small = StokesSolution(outcome.solution.domain, outcome.solution.records,
                               outcome.solution.coefficients, outcome.solution.log_centers, chunk=7)
        np.testing.assert_allclose(eval_fields(small, z).psi, eval_fields(outcome.solution, z).psi, atol=1e-13)

    def test_evaluation_at_log_centre(self, couette_solved):
        """The log centre is a singular point."""
        _, outcome = couette_solved
        with pytest.raises(SolutionError):
            eval_fields(outcome.solution, 0j)

    def test_coefficient_count_checked(self, couette_solved):
        """The coefficient vector must match the basis."""
        _, outcome = couette_solved
        with pytest.raises(SolutionError):
            StokesSolution(outcome.solution.domain, outcome.solution.records,
                           GoursatCoefficients.zeros(3, 1), outcome.solution.log_centers)


class TestResiduals:
    """Boundary residual table and finite-difference physics checks."""

    def test_digits_match_max_residual(self, two_cylinder_solved):
        """Accuracy digits are -log10 of the largest segment residual."""
        _, outcome = two_cylinder_solved
        report = boundary_residual(outcome.solution)
        assert report.names == ("outer cylinder", "inner cylinder")
        assert report.max_error == max(report.segment_max)
        assert report.accuracy_digits == pytest.approx(-np.log10(report.max_error))
        assert report.max_error <= 1e-8

    @pytest.mark.parametrize("z", [-0.6 + 0.2j, -0.55 + 0.3j, -0.4 - 0.5j])
    def test_physics_identities(self, two_cylinder_solved, z):
        """Divergence, vorticity, stream function and harmonic identities hold at interior points."""
        _, outcome = two_cylinder_solved
        h, h1 = Settings().fd_steps(outcome.solution.domain.scale)
        residuals = physics_residuals(outcome.solution, z, h, h1)
        assert residuals.worst() <= 1e-4

    def test_physics_of_gradient_free_flow(self, uniform_flow_solved):
        """Uniform flow has no gradients, vorticity or pressure variation; the checks stay at rounding level."""
        _, outcome = uniform_flow_solved
        h, h1 = Settings().fd_steps(outcome.solution.domain.scale)
        assert physics_residuals(outcome.solution, 0.5 + 0.5j, h, h1).worst() <= 1e-6

    def test_interior_points_avoid_walls_and_cut(self, two_cylinder_solved):
        """Check points sit deep in the fluid and off the log branch cut."""
        setup, outcome = two_cylinder_solved
        domain = outcome.solution.domain
        points = interior_points(domain, n=6)
        assert 0 < points.size <= 6
        assert np.all(domain.contains(points))
        center = domain.holes[0].laurent_center
        off_cut = (points.real >= center.real) | (np.abs(points.imag - center.imag) >= 0.05 * domain.scale)
        assert np.all(off_cut)
        assert np.all(np.abs(points - center) - setup.landmarks["inner_radius"] > 0.2)
        assert np.all(1.0 - np.abs(points) > 0.2)

    def test_biharmonic_of_exact_flow(self, couette_solved):
        """The biharmonic of psi vanishes to truncation level."""
        _, outcome = couette_solved
        value = biharmonic_residual(outcome.solution, -0.75 + 0j, 0.02)
        psi_scale = abs(eval_fields(outcome.solution, -0.75 + 0j).psi) + 1.0
        assert abs(value) * 0.02 ** 4 <= 1e-6 * psi_scale

    def test_stencil_leaving_domain(self, couette_solved):
        """A stencil crossing the wall is an error."""
        _, outcome = couette_solved
        with pytest.raises(SolutionError):
            biharmonic_residual(outcome.solution, 0.97 + 0j, 0.05)


class TestBranchCut:
    """Single-valuedness across the log branch cut."""

    def test_velocity_and_psi_jump(self, two_cylinder_solved):
        """Velocity is continuous across the cut and psi jumps by a constant."""
        setup, outcome = two_cylinder_solved
        report = branch_cut_check(outcome.solution, 0)
        assert report.points.size > 0
        assert report.velocity_jump <= 1e-10 * report.velocity_scale
        assert report.psi_jump_spread <= 1e-10 * outcome.solution.domain.scale

    def test_unknown_hole(self, two_cylinder_solved):
        """Only holes with a log centre can be checked."""
        _, outcome = two_cylinder_solved
        with pytest.raises(SolutionError):
            branch_cut_check(outcome.solution, 3)


class TestGrid:
    """Lattice evaluation with masking."""

    def test_mask_and_values(self, couette_solved):
        """Nodes in the hole or outside the outer cylinder are masked with NaN fields."""
        setup, outcome = couette_solved
        grid = grid_eval(outcome.solution, (-1, 1, -1, 1), 21, 21)
        assert grid.shape == (21, 21)
        assert grid.mask[10, 10] and grid.mask[0, 0] and grid.mask[-1, -1]
        assert np.isnan(grid.psi[10, 10])
        assert not grid.mask[10, 17]
        assert np.isfinite(grid.u[10, 17])
        assert np.all(np.isnan(grid.p[grid.mask]))
        assert np.all(np.isfinite(grid.omega[~grid.mask]))
        assert len(grid.outline) == 2

    def test_reference_value(self, poiseuille_solved):
        """The psi reference is psi at the requested point."""
        _, outcome = poiseuille_solved
        grid = grid_eval(outcome.solution, nx=5, ny=5, psi_reference_point=0.5j)
        assert grid.psi_reference == pytest.approx(eval_fields(outcome.solution, 0.5j).psi)

    def test_resolution_checked(self, couette_solved):
        """Grids need at least two nodes per direction."""
        _, outcome = couette_solved
        with pytest.raises(SolutionError):
            grid_eval(outcome.solution, nx=1, ny=10)
