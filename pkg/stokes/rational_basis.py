"""Orthogonal bases for the polynomial, Laurent and pole-group parts of the
rational representation (Vandermonde with Arnoldi), with derivatives.

Every family runs the same recurrence: step k multiplies the previous
orthonormal column by m_k(z) and orthogonalizes against all earlier columns of
the family. The multiplier is z (polynomial), 1/(z - c) (Laurent) or
1/(z - beta_k) (pole group). Inner products are sample means.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from stokes.errors import BasisError
from stokes.geometry import ComplexArray

logger = logging.getLogger(__name__)

_BREAKDOWN = 1e-14
_REORTHOGONALIZE = 1e-8


@dataclass(frozen=True)
class Polynomial:
    degree: int

    @property
    def steps(self) -> int:
        return self.degree

    def singularities(self) -> ComplexArray:
        return np.empty(0, dtype=complex)


@dataclass(frozen=True)
class Laurent:
    center: complex
    degree: int

    @property
    def steps(self) -> int:
        return self.degree

    def singularities(self) -> ComplexArray:
        return np.array([self.center], dtype=complex)


@dataclass(frozen=True)
class PoleGroup:
    poles: tuple[complex, ...]
    source: str = "lightning"

    def __post_init__(self):
        object.__setattr__(self, "poles", tuple(complex(p) for p in self.poles))

    @property
    def steps(self) -> int:
        return len(self.poles)

    def singularities(self) -> ComplexArray:
        return np.asarray(self.poles, dtype=complex)


BasisFamily = Union[Polynomial, Laurent, PoleGroup]


def _multiplier(family: BasisFamily, k: int, z: ComplexArray) -> tuple[ComplexArray, ComplexArray]:
    """Multiplier of step k (1-based) and its derivative."""
    if isinstance(family, Polynomial):
        return z, np.ones_like(z)
    center = family.center if isinstance(family, Laurent) else family.poles[k - 1]
    inv = 1.0 / (z - center)
    return inv, -inv * inv


@dataclass(frozen=True)
class OrthogonalBasisRecord:
    family: BasisFamily
    H: NDArray[np.complex128]

    @property
    def steps(self) -> int:
        return self.H.shape[1]

    @property
    def columns(self) -> int:
        """Columns contributed to the concatenated basis (constant only in the polynomial block)."""
        return self.steps + 1 if isinstance(self.family, Polynomial) else self.steps


@dataclass(frozen=True)
class BasisEval:
    R0: NDArray[np.complex128]
    R1: NDArray[np.complex128]

    @property
    def n_columns(self) -> int:
        return self.R0.shape[1]


def column_count(records: Sequence[OrthogonalBasisRecord]) -> int:
    return sum(rec.columns for rec in records)


def _check_clearance(family: BasisFamily, Z: ComplexArray, what: str) -> None:
    sing = family.singularities()
    if sing.size and np.min(np.abs(Z[:, None] - sing[None, :])) == 0.0:
        raise BasisError(f"{what} point coincides with a singularity of {family}")


def _orthogonalize_family(Z: ComplexArray, family: BasisFamily) -> OrthogonalBasisRecord:
    M = Z.size
    d = family.steps
    Q = np.ones((M, d + 1), dtype=complex)
    H = np.zeros((d + 1, d), dtype=complex)
    for k in range(1, d + 1):
        m, _ = _multiplier(family, k, Z)
        v = m * Q[:, k - 1]
        scale = np.linalg.norm(v) / np.sqrt(M)
        for j in range(k):
            h = np.vdot(Q[:, j], v) / M
            v = v - h * Q[:, j]
            H[j, k - 1] += h
        correction = Q[:, :k].conj().T @ v / M
        norm = np.linalg.norm(v) / np.sqrt(M)
        if np.max(np.abs(correction)) > _REORTHOGONALIZE * max(norm, np.finfo(float).tiny):
            v = v - Q[:, :k] @ correction
            H[:k, k - 1] += correction
            norm = np.linalg.norm(v) / np.sqrt(M)
        if not np.isfinite(norm) or norm <= _BREAKDOWN * scale:
            raise BasisError(f"Arnoldi breakdown in {type(family).__name__} family at step {k} "
                             f"(subdiagonal {norm:.3e})")
        H[k, k - 1] = norm
        Q[:, k] = v / norm
    return OrthogonalBasisRecord(family, H)


def orthogonalize(Z: ArrayLike, families: Sequence[BasisFamily]) -> list[OrthogonalBasisRecord]:
    """Arnoldi records for each family on the training samples Z. The first
    family must be the polynomial block, which owns the constant column."""
    Z = np.asarray(Z, dtype=complex).ravel()
    if not families or not isinstance(families[0], Polynomial):
        raise BasisError("The first basis family must be Polynomial")
    if families[0].degree < 0:
        raise BasisError(f"Polynomial degree must be >= 0, got {families[0].degree}")
    active = [fam for k, fam in enumerate(families) if k == 0 or fam.steps > 0]
    total = sum(fam.steps + (1 if isinstance(fam, Polynomial) else 0) for fam in active)
    if Z.size < total:
        raise BasisError(f"{Z.size} samples cannot support {total} basis columns")
    records = []
    for fam in active:
        _check_clearance(fam, Z, "Training")
        records.append(_orthogonalize_family(Z, fam))
        logger.debug(f"Orthogonalized {type(fam).__name__} with {fam.steps} steps")
    return records


def evaluate(records: Sequence[OrthogonalBasisRecord], Zeval: ArrayLike) -> BasisEval:
    """Basis values R0 and derivatives R1 at Zeval from the stored recurrences."""
    Z = np.asarray(Zeval, dtype=complex).ravel()
    values, derivatives = [], []
    for rec in records:
        _check_clearance(rec.family, Z, "Evaluation")
        d = rec.steps
        Q = np.ones((Z.size, d + 1), dtype=complex)
        D = np.zeros((Z.size, d + 1), dtype=complex)
        for k in range(1, d + 1):
            m, dm = _multiplier(rec.family, k, Z)
            h = rec.H[:k, k - 1]
            sub = rec.H[k, k - 1]
            Q[:, k] = (m * Q[:, k - 1] - Q[:, :k] @ h) / sub
            D[:, k] = (m * D[:, k - 1] + dm * Q[:, k - 1] - D[:, :k] @ h) / sub
        first = 0 if isinstance(rec.family, Polynomial) else 1
        values.append(Q[:, first:])
        derivatives.append(D[:, first:])
    return BasisEval(np.hstack(values), np.hstack(derivatives))
