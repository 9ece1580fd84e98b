# utils/artifacts.py
import csv
import logging
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from contourpy import LineType, contour_generator

from stokes.cases import SweepRow
from stokes.pipeline import PolePlacement
from stokes.solution import FieldGrid
from utils.data_models import RunReport

logger = logging.getLogger(__name__)

FIELD_COLUMNS = ("x", "y", "mask", "psi", "u", "v", "p", "omega")
SWEEP_COLUMNS = ("lam", "dp_solver", "dp_elt0", "dp_elt2", "dp_elt4", "rel_elt0", "rel_elt2", "rel_elt4")
LEVEL_FRACTIONS = np.concatenate([np.linspace(0.1, 0.9, 13), [0.96, 0.99, 0.999]])

SVG_WIDTH = 800.0
SVG_PAD = 10.0


def _number(value: float) -> str:
    return format(float(value), ".17g")


def write_field_csv(grid: FieldGrid, path: Path) -> Path:
    """One row per lattice node, x varying fastest; masked nodes keep empty value cells."""
    path = Path(path)
    with path.open("w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(FIELD_COLUMNS)
        for j, y in enumerate(grid.y):
            for i, x in enumerate(grid.x):
                if grid.mask[j, i]:
                    writer.writerow([_number(x), _number(y), 1, "", "", "", "", ""])
                else:
                    writer.writerow([_number(x), _number(y), 0] +
                                    [_number(q[j, i]) for q in (grid.psi, grid.u, grid.v, grid.p, grid.omega)])
    logger.info(f"Wrote {grid.mask.size} grid nodes to {path}")
    return path


def write_poles_csv(placement: PolePlacement, path: Path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(("source", "group", "real", "imag"))
        for k, group in enumerate(placement.groups):
            for pole in group.poles:
                writer.writerow((group.source, k, _number(pole.real), _number(pole.imag)))
    return path


def write_sweep_csv(rows: Iterable[SweepRow], path: Path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(SWEEP_COLUMNS)
        for row in rows:
            writer.writerow([_number(v) for v in (
                row.lam, row.dp_solver, row.dp_elt0, row.dp_elt2, row.dp_elt4,
                row.relative_difference(row.dp_elt0), row.relative_difference(row.dp_elt2),
                row.relative_difference(row.dp_elt4))])
    return path


def write_report_json(report: RunReport, path: Path) -> Path:
    path = Path(path)
    path.write_text(report.model_dump_json(indent=2))
    return path


def stream_deviation(grid: FieldGrid) -> np.ndarray:
    """psi relative to the grid's reference value (raw psi when there is none)."""
    return grid.psi - (grid.psi_reference or 0.0)


def default_levels(grid: FieldGrid) -> List[float]:
    values = stream_deviation(grid)
    if np.all(grid.mask):
        return []
    lo, hi = float(np.nanmin(values)), float(np.nanmax(values))
    if hi <= lo:
        return []
    return list(lo + LEVEL_FRACTIONS * (hi - lo))


def contour_lines(grid: FieldGrid, levels: Sequence[float]) -> List[Tuple[float, List[np.ndarray]]]:
    """Marching-squares polylines of psi per level; masked cells are skipped."""
    if np.all(grid.mask) or not len(levels):
        return [(float(level), []) for level in levels]
    z = np.ma.masked_array(stream_deviation(grid), mask=grid.mask | ~np.isfinite(grid.psi))
    generator = contour_generator(grid.x, grid.y, z, line_type=LineType.Separate)
    return [(float(level), [np.asarray(line) for line in generator.lines(level) if len(line) > 1])
            for level in levels]


def _svg_path(points: np.ndarray, transform, closed: bool) -> str:
    xs, ys = transform(points[:, 0], points[:, 1])
    coords = " L ".join(f"{x:.3f},{y:.3f}" for x, y in zip(xs, ys))
    return f"M {coords}" + (" Z" if closed else "")


def contour_svg(grid: FieldGrid, levels: Optional[Sequence[float]], path: Path) -> Path:
    """Write psi contours and the domain outline as an SVG file."""
    path = Path(path)
    levels = default_levels(grid) if levels is None else list(levels)
    x0, x1, y0, y1 = float(grid.x[0]), float(grid.x[-1]), float(grid.y[0]), float(grid.y[-1])
    scale = SVG_WIDTH / max(x1 - x0, y1 - y0)
    width = (x1 - x0) * scale + 2 * SVG_PAD
    height = (y1 - y0) * scale + 2 * SVG_PAD

    def transform(x, y):
        return (np.asarray(x) - x0) * scale + SVG_PAD, (y1 - np.asarray(y)) * scale + SVG_PAD

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.1f}" height="{height:.1f}" '
             f'viewBox="0 0 {width:.3f} {height:.3f}" fill="none" stroke-linecap="round" stroke-linejoin="round">']
    parts.append('  <g stroke="#888" stroke-width="0.8">')
    for level, lines in contour_lines(grid, levels):
        for line in lines:
            closed = bool(np.allclose(line[0], line[-1]))
            parts.append(f'    <path data-level="{level:.6g}" d="{_svg_path(line, transform, closed)}"/>')
    parts.append("  </g>")
    parts.append('  <g stroke="#000" stroke-width="1.2">')
    outlines = grid.outline or (np.array([x0 + 1j * y0, x1 + 1j * y0, x1 + 1j * y1, x0 + 1j * y1]),)
    for loop in outlines:
        pts = np.column_stack([np.real(loop), np.imag(loop)])
        parts.append(f'    <path d="{_svg_path(pts, transform, True)}"/>')
    parts.append("  </g>")
    parts.append("</svg>")
    path.write_text("\n".join(parts) + "\n")
    logger.info(f"Wrote {len(levels)} contour level(s) to {path}")
    return path
