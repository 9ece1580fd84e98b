"""AAA barycentric rational fitting and pole extraction.

Fits boundary data (by default the Schwarz values conj(Z)) and returns the poles
that lie off the fluid region; these seed the pole groups of the rational basis.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from numpy.typing import ArrayLike

from stokes.errors import AAAError
from stokes.geometry import ComplexArray, Domain

logger = logging.getLogger(__name__)

# eigenvalues beyond this multiple of the support scale are numerically infinite
_INFINITE_POLE = 1e10


@dataclass(frozen=True)
class BarycentricRational:
    """r(z) = sum_j w_j f_j / (z - z_j) / sum_j w_j / (z - z_j)."""

    support_points: ComplexArray
    support_values: ComplexArray
    weights: ComplexArray

    def __post_init__(self):
        if not (self.support_points.size == self.support_values.size == self.weights.size):
            raise AAAError("Support points, values and weights must have equal length")
        if self.support_points.size == 0 or not np.any(self.weights):
            raise AAAError("Barycentric representation needs a nonzero weight vector")

    @property
    def degree(self) -> int:
        return self.support_points.size - 1

    def __call__(self, z: ArrayLike) -> ComplexArray:
        z = np.asarray(z, dtype=complex)
        zz = z.ravel()
        with np.errstate(divide="ignore", invalid="ignore"):
            cauchy = 1.0 / (zz[:, None] - self.support_points[None, :])
            r = (cauchy @ (self.weights * self.support_values)) / (cauchy @ self.weights)
        hit_row, hit_col = np.nonzero(zz[:, None] == self.support_points[None, :])
        r[hit_row] = self.support_values[hit_col]
        return r.reshape(z.shape)


@dataclass(frozen=True)
class PoleReport:
    poles: ComplexArray
    residues: ComplexArray

    def __len__(self) -> int:
        return self.poles.size


def schwarz_values(Z: ArrayLike) -> ComplexArray:
    """Boundary data whose analytic continuation is the Schwarz function."""
    return np.conj(np.asarray(Z, dtype=complex))


def _loewner_weights(Z: ComplexArray, F: ComplexArray, support: np.ndarray, rows: np.ndarray) -> ComplexArray:
    zj, fj = Z[support], F[support]
    if not np.any(rows):
        weights = np.zeros(zj.size, dtype=complex)
        weights[-1] = 1.0
        return weights
    cauchy = 1.0 / (Z[rows, None] - zj[None, :])
    loewner = F[rows, None] * cauchy - cauchy * fj[None, :]
    try:
        _, _, vh = np.linalg.svd(loewner)
    except np.linalg.LinAlgError as e:
        logger.error(f"SVD of the {loewner.shape} Loewner matrix failed: {e}")
        raise AAAError("Loewner SVD did not converge") from e
    return vh[-1].conj()


def aaa_fit(Z: ArrayLike, F: ArrayLike, tol: float = 1e-8, max_degree: int = 100) -> BarycentricRational:
    """Greedy AAA fit: add the worst-fit sample as a support point until
    max|r - F| <= tol * max|F| or the degree reaches ``max_degree``."""
    Z = np.asarray(Z, dtype=complex).ravel()
    F = np.asarray(F, dtype=complex).ravel()
    if Z.size != F.size or Z.size < 2:
        raise AAAError(f"AAA needs matching sample/value arrays of length >= 2, got {Z.size} and {F.size}")
    if tol <= 0:
        raise AAAError(f"AAA tolerance must be positive, got {tol}")
    if not (np.all(np.isfinite(Z)) and np.all(np.isfinite(F))):
        raise AAAError("AAA samples and values must be finite")

    target = tol * np.max(np.abs(F))
    rows = np.ones(Z.size, dtype=bool)
    support: list[int] = []
    r = np.full(Z.size, np.mean(F))
    weights = np.ones(1, dtype=complex)
    for _ in range(max_degree + 1):
        residual = np.where(rows, np.abs(F - r), -1.0)
        j = int(np.argmax(residual))
        support.append(j)
        rows[j] = False
        idx = np.asarray(support)
        weights = _loewner_weights(Z, F, idx, rows)
        cauchy = 1.0 / (Z[rows, None] - Z[idx][None, :])
        r = F.copy()
        r[rows] = (cauchy @ (weights * F[idx])) / (cauchy @ weights)
        err = float(np.max(np.abs(F[rows] - r[rows]))) if np.any(rows) else 0.0
        logger.debug(f"AAA degree {idx.size - 1}: max residual {err:.3e}")
        if err <= target or not np.any(rows):
            break
    idx = np.asarray(support)
    return BarycentricRational(Z[idx].copy(), F[idx].copy(), weights)


def poles_of(rep: BarycentricRational) -> PoleReport:
    """Poles from the arrowhead pencil, residues as N(p) / D'(p)."""
    m = rep.degree
    if m < 1:
        return PoleReport(np.empty(0, dtype=complex), np.empty(0, dtype=complex))
    zj, wj, fj = rep.support_points, rep.weights, rep.support_values
    E = np.zeros((m + 2, m + 2), dtype=complex)
    E[0, 1:] = wj
    E[1:, 0] = 1.0
    E[1:, 1:] = np.diag(zj)
    B = np.eye(m + 2)
    B[0, 0] = 0.0
    try:
        eigenvalues = scipy.linalg.eig(E, B, left=False, right=False)
    except (scipy.linalg.LinAlgError, ValueError) as e:
        logger.error(f"Generalized eigenvalue solve failed for degree {m}: {e}")
        raise AAAError(f"Pole computation failed; pencil:\n{np.array2string(E, precision=6)}") from e

    limit = _INFINITE_POLE * max(1.0, float(np.max(np.abs(zj))))
    finite = eigenvalues[np.isfinite(eigenvalues)]
    finite = finite[np.argsort(np.abs(finite), kind="stable")][:m]
    poles = finite[np.abs(finite) < limit]

    diff = poles[:, None] - zj[None, :]
    numerator = (1.0 / diff) @ (wj * fj)
    denominator_prime = -(1.0 / diff ** 2) @ wj
    residues = numerator / denominator_prime
    keep = np.isfinite(residues)
    return PoleReport(poles[keep], residues[keep])


def filter_exterior(poles: PoleReport | ArrayLike, dom: Domain) -> ComplexArray:
    """Poles off the closed fluid region; poles inside holes stay."""
    values = poles.poles if isinstance(poles, PoleReport) else np.asarray(poles, dtype=complex).ravel()
    if values.size == 0:
        return values
    in_fluid = np.atleast_1d(dom.contains(values, include_boundary=True))
    return values[~in_fluid]


def froissart_cleanup(rep: BarycentricRational, Z: ArrayLike, F: ArrayLike,
                      residue_tol: float) -> BarycentricRational:
    """Drop the support point nearest each spurious pole (tiny residue relative to
    max|F| and the local sample spacing), then recompute weights once."""
    if residue_tol <= 0 or rep.degree < 1:
        return rep
    Z = np.asarray(Z, dtype=complex).ravel()
    F = np.asarray(F, dtype=complex).ravel()
    report = poles_of(rep)
    if len(report) == 0:
        return rep

    nearest = np.argmin(np.abs(report.poles[:, None] - Z[None, :]), axis=1)
    neighbour = np.where(nearest + 1 < Z.size, nearest + 1, nearest - 1)
    spacing = np.abs(Z[nearest] - Z[neighbour])
    spurious = np.abs(report.residues) < residue_tol * np.max(np.abs(F)) * spacing
    if not np.any(spurious):
        return rep

    support_idx = np.array([int(np.argmin(np.abs(Z - zj))) for zj in rep.support_points])
    drop = {int(np.argmin(np.abs(rep.support_points - p))) for p in report.poles[spurious]}
    keep = np.array([k for k in range(support_idx.size) if k not in drop], dtype=int)
    if keep.size == 0:
        logger.warning("Froissart cleanup would remove every support point; keeping the fit unchanged")
        return rep
    logger.info(f"Froissart cleanup removed {len(drop)} support point(s), degree {rep.degree} -> {keep.size - 1}")
    support = support_idx[keep]
    rows = np.ones(Z.size, dtype=bool)
    rows[support] = False
    weights = _loewner_weights(Z, F, support, rows)
    return BarycentricRational(Z[support].copy(), F[support].copy(), weights)
