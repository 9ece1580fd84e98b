import numpy as np
import pytest

from stokes.errors import ConfigurationError, SolveError
from stokes.geometry import Domain, Segment
from stokes.rational_basis import Polynomial, evaluate, orthogonalize
from stokes.stokes_system import (BoundaryConditionSpec, ColumnMap, Condition, Functional, GoursatCoefficients,
                                  LogTermBlock, StokesLinearSystem, assemble, goursat_fields, log_terms,
                                  make_rows, solve, spacing_weights)

Z = np.array([0.3 + 0.2j, -0.5 + 0.7j, 1.1 - 0.4j, 0.05 - 0.9j])


class TestConditions:
    """Boundary condition targets."""

    def test_constant_and_callable_targets(self):
        """Targets are constants or functions of position."""
        np.testing.assert_array_equal(Condition("u", 2.0).values(Z), np.full(4, 2.0))
        np.testing.assert_allclose(Condition("psi", lambda z: z.imag).values(Z), Z.imag)

    def test_unknown_functional(self):
        """Unknown functional names are configuration errors."""
        with pytest.raises(ConfigurationError):
            Condition("speed", 1.0)

    def test_non_finite_target(self):
        """Targets must be finite."""
        with pytest.raises(ConfigurationError):
            Condition("u", lambda z: np.full(z.shape, np.inf)).values(Z)

    def test_factories(self):
        """Named condition pairs impose the expected functionals."""
        assert [c.functional for c in BoundaryConditionSpec.no_slip().conditions] == [Functional.U, Functional.V]
        assert [c.functional for c in BoundaryConditionSpec.outflow(3.0).conditions] == [Functional.V, Functional.P]
        assert [c.functional for c in BoundaryConditionSpec.parallel().conditions] == [Functional.UT, Functional.P]
        assert BoundaryConditionSpec.outflow(3.0).second.target == 3.0


class TestGoursatFields:
    """Fields from the two Goursat functions."""

    def test_uniform_flow(self):
        """g = U z gives psi = U y, u = U, v = 0 and no pressure."""
        zero = np.zeros_like(Z)
        fields = goursat_fields(Z, zero, zero, 2.0 * Z, np.full_like(Z, 2.0))
        np.testing.assert_allclose(fields[Functional.PSI], 2.0 * Z.imag)
        np.testing.assert_allclose(fields[Functional.U], 2.0)
        np.testing.assert_allclose(fields[Functional.V], 0.0)
        np.testing.assert_allclose(fields[Functional.P], 0.0)

    def test_pressure_gauge(self):
        """f = a z with real a moves no fluid and adds 4a to the pressure."""
        zero = np.zeros_like(Z)
        fields = goursat_fields(Z, 0.5 * Z, np.full_like(Z, 0.5), zero, zero)
        np.testing.assert_allclose(fields[Functional.U], 0.0, atol=1e-15)
        np.testing.assert_allclose(fields[Functional.V], 0.0, atol=1e-15)
        np.testing.assert_allclose(fields[Functional.P], 2.0)
        np.testing.assert_allclose(fields[Functional.OMEGA], 0.0)

    def test_rigid_rotation(self):
        """f = i w z / 2 turns the fluid clockwise at rate w, vorticity -2w."""
        w = 1.5
        zero = np.zeros_like(Z)
        fields = goursat_fields(Z, 0.5j * w * Z, np.full_like(Z, 0.5j * w), zero, zero)
        np.testing.assert_allclose(fields[Functional.U], w * Z.imag)
        np.testing.assert_allclose(fields[Functional.V], -w * Z.real)
        np.testing.assert_allclose(fields[Functional.OMEGA], -2.0 * w)


class TestLogTerms:
    """The tied log terms keep the velocity single-valued around a hole."""

    CENTER = 0.1 - 0.2j
    F0, G0 = 0.7 - 0.3j, -0.2 + 1.1j

    def fields(self, branch):
        return goursat_fields(Z, *self.terms(branch))

    def terms(self, branch):
        f, df, g, dg = log_terms(Z, self.CENTER, self.F0, self.G0, branch)
        return f, df, g, dg

    def test_velocity_is_branch_independent(self):
        """Shifting the logarithm by 2 pi i leaves u and v unchanged."""
        a, b = self.fields(0), self.fields(1)
        np.testing.assert_allclose(a[Functional.U], b[Functional.U], atol=1e-12)
        np.testing.assert_allclose(a[Functional.V], b[Functional.V], atol=1e-12)
        np.testing.assert_allclose(a[Functional.P], b[Functional.P], atol=1e-12)

    def test_psi_jump_is_constant(self):
        """The stream function jumps by the same amount everywhere."""
        jump = self.fields(1)[Functional.PSI] - self.fields(0)[Functional.PSI]
        expected = 2 * np.pi * np.real(self.G0 + np.conj(self.F0) * self.CENTER)
        np.testing.assert_allclose(jump, expected, atol=1e-12)


class TestRows:
    """Row blocks reproduce the fields of the coefficient vector they multiply."""

    def test_rows_match_direct_evaluation(self, rng):
        """A @ x equals psi, u, v, p, omega evaluated from f and g directly."""
        records = orthogonalize(np.exp(2j * np.pi * np.arange(40) / 40), [Polynomial(4)])
        be = evaluate(records, Z)
        center = 0.9 + 0.9j
        coeffs = GoursatCoefficients(rng.normal(size=5) + 1j * rng.normal(size=5),
                                     rng.normal(size=5) + 1j * rng.normal(size=5), [0.3 - 0.1j], [0.2 + 0.5j])
        blocks = make_rows(Z, be, [LogTermBlock(center)])
        x = coeffs.to_real()
        lf, ldf, lg, ldg = log_terms(Z, center, coeffs.f0[0], coeffs.g0[0])
        direct = goursat_fields(Z, be.R0 @ coeffs.cf + lf, be.R1 @ coeffs.cf + ldf,
                                be.R0 @ coeffs.cg + lg, be.R1 @ coeffs.cg + ldg)
        for q, block in ((Functional.PSI, blocks.psi), (Functional.U, blocks.u), (Functional.V, blocks.v),
                         (Functional.P, blocks.p), (Functional.OMEGA, blocks.omega)):
            np.testing.assert_allclose(block @ x, direct[q], atol=1e-10)

    def test_tangential_and_normal_blocks(self):
        """ut and un rotate the u and v rows by the tangent angle."""
        be = evaluate(orthogonalize(np.exp(2j * np.pi * np.arange(20) / 20), [Polynomial(2)]), Z)
        blocks = make_rows(Z, be, [])
        t = np.full(Z.size, 1j)
        np.testing.assert_allclose(blocks.block(Functional.UT, t), blocks.v)
        np.testing.assert_allclose(blocks.block(Functional.UN, t), -blocks.u)
        with pytest.raises(ConfigurationError):
            blocks.block(Functional.UT)

    def test_column_map_layout(self):
        """Real parts of all complex unknowns come first, then imaginary parts."""
        cmap = ColumnMap(3, 1)
        assert cmap.n_complex == 8 and cmap.n_real == 16
        labels = cmap.labels()
        assert labels[0] == "Re cf[0]" and labels[3] == "Re cg[0]" and labels[7] == "Re g0[0]"
        assert labels[8] == "Im cf[0]" and labels[-1] == "Im g0[0]"

    def test_from_real_checks_length(self):
        """The real vector must match the column map."""
        with pytest.raises(SolveError):
            GoursatCoefficients.from_real(np.zeros(5), ColumnMap(3, 1))


def square_domain(bc=BoundaryConditionSpec.velocity(1.0, 0.0)):
    v = [0, 1, 1 + 1j, 1j]
    return Domain(tuple(Segment.line(v[k], v[(k + 1) % 4], 15, bc=bc) for k in range(4)))


class TestAssembleAndSolve:
    """System assembly and least-squares solution."""

    def build(self, domain, weighting="uniform"):
        samples = domain.samples()
        be = evaluate(orthogonalize(samples.z, [Polynomial(6)]), samples.z)
        return samples, assemble(domain, samples, be, [], weighting=weighting)

    def test_two_rows_per_sample(self):
        """Each sample contributes one row per imposed condition."""
        samples, system = self.build(square_domain())
        assert system.shape == (2 * samples.size, 4 * 7)

    def test_uniform_flow_is_solved_exactly(self):
        """Uniform flow on a square leaves no residual."""
        _, system = self.build(square_domain())
        coeffs, report = solve(system)
        assert report.residual_max < 1e-12
        assert report.free_directions >= 1
        assert coeffs.cf.size == 7

    def test_spacing_weights_have_unit_mean(self):
        """Spacing weights are normalized to mean one."""
        samples, system = self.build(square_domain(), weighting="spacing")
        assert np.mean(spacing_weights(samples)) == pytest.approx(1.0)
        assert solve(system)[1].residual_max < 1e-12

    def test_missing_condition(self):
        """Every segment needs a boundary condition."""
        with pytest.raises(ConfigurationError):
            self.build(square_domain(bc=None))

    def test_unknown_weighting(self):
        """Only uniform and spacing weights exist."""
        with pytest.raises(ConfigurationError):
            self.build(square_domain(), weighting="random")

    def test_non_finite_system(self):
        """Non-finite entries are rejected before solving."""
        system = StokesLinearSystem(np.array([[np.nan]]), np.ones(1), ColumnMap(0, 0), np.zeros(1, int), np.ones(1))
        with pytest.raises(SolveError):
            solve(system)
