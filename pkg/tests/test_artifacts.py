import csv
import json

import numpy as np
import pytest

from stokes.cases import SweepRow
from stokes.pipeline import PolePlacement
from stokes.rational_basis import PoleGroup
from stokes.solution import FieldGrid
from utils.artifacts import (FIELD_COLUMNS, SWEEP_COLUMNS, contour_lines, contour_svg, default_levels,
                             stream_deviation, write_field_csv, write_poles_csv, write_report_json,
                             write_sweep_csv)
from utils.data_models import RunReport


def make_grid(psi_of, bbox=(0.0, 1.0, 0.0, 1.0), n=11, mask_of=None, psi_reference=None, outline=()):
    x = np.linspace(bbox[0], bbox[1], n)
    y = np.linspace(bbox[2], bbox[3], n)
    X, Y = np.meshgrid(x, y)
    mask = mask_of(X, Y) if mask_of else np.zeros(X.shape, dtype=bool)
    psi = np.where(mask, np.nan, psi_of(X, Y))
    zeros = np.where(mask, np.nan, 0.0)
    return FieldGrid(x, y, mask, psi, zeros, zeros, zeros, zeros, psi_reference, outline)


class TestContours:
    """Marching squares on synthetic stream functions."""

    def test_horizontal_line(self):
        """psi = y gives a single straight contour at the level height."""
        (level, lines), = contour_lines(make_grid(lambda X, Y: Y), [0.55])
        assert level == 0.55
        assert len(lines) == 1
        np.testing.assert_allclose(lines[0][:, 1], 0.55, atol=1e-12)
        assert lines[0][:, 0].min() == pytest.approx(0.0) and lines[0][:, 0].max() == pytest.approx(1.0)

    def test_circle(self):
        """psi = x^2 + y^2 gives a closed circular loop to within a cell."""
        grid = make_grid(lambda X, Y: X ** 2 + Y ** 2, bbox=(-2.0, 2.0, -2.0, 2.0), n=41)
        (_, lines), = contour_lines(grid, [0.83])
        assert len(lines) == 1
        radius = np.hypot(lines[0][:, 0], lines[0][:, 1])
        assert np.max(np.abs(radius - np.sqrt(0.83))) < 0.1 * np.sqrt(2.0)
        np.testing.assert_allclose(lines[0][0], lines[0][-1])

    def test_masked_cells_are_skipped(self):
        """No contour passes through masked nodes."""
        grid = make_grid(lambda X, Y: Y, mask_of=lambda X, Y: X > 0.5)
        (_, lines), = contour_lines(grid, [0.55])
        assert lines and all(np.all(line[:, 0] <= 0.5 + 1e-12) for line in lines)

    def test_reference_is_subtracted(self):
        """Levels refer to psi minus the reference value."""
        grid = make_grid(lambda X, Y: Y + 10.0, psi_reference=10.0)
        np.testing.assert_allclose(stream_deviation(grid), grid.y[:, None] * np.ones((1, 11)), atol=1e-12)
        (_, lines), = contour_lines(grid, [0.25])
        np.testing.assert_allclose(lines[0][:, 1], 0.25, atol=1e-12)


class TestLevels:
    """Default contour levels."""

    def test_sixteen_levels_inside_range(self):
        """Sixteen levels strictly between the extreme values."""
        levels = default_levels(make_grid(lambda X, Y: Y))
        assert len(levels) == 16
        assert 0.0 < min(levels) and max(levels) < 1.0
        assert np.all(np.diff(levels) > 0)

    def test_degenerate_grids(self):
        """Flat or fully masked grids have no levels."""
        assert default_levels(make_grid(lambda X, Y: np.ones_like(X))) == []
        assert default_levels(make_grid(lambda X, Y: Y, mask_of=lambda X, Y: X > -1)) == []


class TestSvg:
    """SVG output of contours and outline."""

    def test_deterministic(self, tmp_path):
        """The same grid and levels give identical bytes."""
        grid = make_grid(lambda X, Y: X ** 2 + Y ** 2)
        a = contour_svg(grid, [0.2, 0.47, 0.83], tmp_path / "a.svg").read_bytes()
        b = contour_svg(grid, [0.2, 0.47, 0.83], tmp_path / "b.svg").read_bytes()
        assert a == b
        text = a.decode()
        assert text.startswith("<svg")
        assert text.count('data-level="0.47"') == 1

    def test_all_masked_grid_draws_outline_only(self, tmp_path):
        """A fully masked grid still gives a valid file with the outline."""
        outline = (np.array([0, 1, 1 + 1j, 1j]),)
        grid = make_grid(lambda X, Y: Y, mask_of=lambda X, Y: X > -1, outline=outline)
        text = contour_svg(grid, None, tmp_path / "masked.svg").read_text()
        assert "data-level" not in text
        assert text.count("<path") == 1
        assert text.rstrip().endswith("</svg>")


class TestTables:
    """CSV and JSON writers."""

    def test_field_csv(self, tmp_path):
        """Rows run x fastest; masked rows keep empty value cells."""
        grid = make_grid(lambda X, Y: X + 2 * Y, n=2, mask_of=lambda X, Y: (X > 0.5) & (Y < 0.5))
        with write_field_csv(grid, tmp_path / "field.csv").open() as f:
            rows = list(csv.reader(f))
        assert tuple(rows[0]) == FIELD_COLUMNS
        assert rows[1] == ["0", "0", "0", "0", "0", "0", "0", "0"]
        assert rows[2] == ["1", "0", "1", "", "", "", "", ""]
        assert rows[3][:4] == ["0", "1", "0", "2"]
        assert rows[4][:4] == ["1", "1", "0", "3"]
        assert len(rows) == 5

    def test_poles_csv(self, tmp_path):
        """One row per pole with its source and group index."""
        placement = PolePlacement((PoleGroup((1 + 2j, 1.5 - 0.5j), "lightning"), PoleGroup((3.0,), "aaa")))
        lines = write_poles_csv(placement, tmp_path / "poles.csv").read_text().splitlines()
        assert lines == ["source,group,real,imag", "lightning,0,1,2", "lightning,0,1.5,-0.5", "aaa,1,3,0"]

    def test_sweep_csv(self, tmp_path):
        """Relative differences are taken against the solver value."""
        rows = [SweepRow(0.5, 100.0, 80.0, 90.0, 98.0, 6.0)]
        with write_sweep_csv(rows, tmp_path / "sweep.csv").open() as f:
            header, values = list(csv.reader(f))
        assert tuple(header) == SWEEP_COLUMNS
        np.testing.assert_allclose([float(v) for v in values], [0.5, 100, 80, 90, 98, 0.2, 0.1, 0.02])

    def test_report_json(self, tmp_path):
        """The report round-trips through its JSON file."""
        report = RunReport(case="uniform-flow", accuracy_digits=14.2, max_residual=6e-15, segments=[],
                           n_unknowns=44, n_samples=160, rank=43, pole_counts={"lightning": 0, "aaa": 0})
        data = json.loads(write_report_json(report, tmp_path / "report.json").read_text())
        assert data["case"] == "uniform-flow"
        assert data["target_met"] is True
        assert RunReport.model_validate(data).model_dump() == report.model_dump()
