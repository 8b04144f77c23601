"""Dense complex linear algebra substrate.

Hermitian validation, spectral measures with eigenvalue grouping, singular
values, Schatten norms and rank-one builders.  Everything is built on
numpy's LAPACK bindings; the contracts live in the grouping logic and in
the tolerance conventions below.

Conventions
-----------
* Inner products are conjugate-linear in the SECOND slot:
  (x, y) = sum_i x_i * conj(y_i).  Consequently ``rank_one(u, v)`` is the
  map w -> (w, v) u with matrix u v*.
* Schatten indices are plain floats with ``math.inf`` as the operator-norm
  value; the infinite case is branched before any exponentiation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np


class NotSquareError(ValueError):
    """Matrix expected to be square."""


class NotHermitianError(ValueError):
    """Matrix deviates from its conjugate transpose beyond tolerance."""


class DimensionMismatchError(ValueError):
    """Operands have incompatible dimensions."""


class EigensolverError(RuntimeError):
    """Eigenvalue iteration did not converge."""


class SvdError(RuntimeError):
    """Singular value decomposition did not converge."""


DEFAULT_GROUP_TOL = 1e-8

# Relative floor below which a singular value is treated as exactly zero
# before exponentiation (avoids 0**p noise for the finite-p norms).
_SINGULAR_VALUE_FLOOR = 1e-14


def as_complex_matrix(entries) -> np.ndarray:
    """Coerce input to a 2-d complex128 array, rejecting non-finite entries."""
    M = np.asarray(entries, dtype=np.complex128)
    if M.ndim != 2:
        raise ValueError(f"expected a matrix, got an array of rank {M.ndim}")
    if M.size and not np.all(np.isfinite(M)):
        raise ValueError("matrix entries must be finite (no NaN/Inf)")
    return M


def hermitian_tolerance(M: np.ndarray) -> float:
    """Scale-aware tolerance for the M == M* check: 1e-10 * max(1, |M|_max)."""
    peak = float(np.max(np.abs(M))) if M.size else 0.0
    return 1e-10 * max(1.0, peak)


def projection_tolerance(dim: int) -> float:
    """Tolerance for projection algebra and completeness checks: 1e-8 * dim."""
    return 1e-8 * dim


@dataclass(frozen=True)
class HermitianOperator:
    """A square complex matrix equal to its conjugate transpose.

    Construct through :func:`hermitian_from_matrix`, which validates and
    symmetrizes; instances are treated as immutable.
    """

    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def scaled(self, factor: float) -> "HermitianOperator":
        """The operator multiplied by a real scalar (still Hermitian)."""
        return HermitianOperator(self.matrix * float(factor))


def hermitian_from_matrix(entries) -> HermitianOperator:
    """Validate Hermitian symmetry and return the symmetrized operator.

    The input must be square and satisfy |M - M*|_max <= hermitian_tolerance(M);
    the returned operator holds (M + M*)/2 so that the stored matrix is
    Hermitian to the last bit.

    Raises
    ------
    NotSquareError
        If the matrix is not square.
    NotHermitianError
        If the deviation from self-adjointness exceeds the tolerance.
    """
    M = as_complex_matrix(entries)
    if M.shape[0] != M.shape[1]:
        raise NotSquareError(f"expected a square matrix, got shape {M.shape}")
    deviation = float(np.max(np.abs(M - M.conj().T))) if M.size else 0.0
    if deviation > hermitian_tolerance(M):
        raise NotHermitianError(
            f"|M - M*|_max = {deviation:.3e} exceeds tolerance "
            f"{hermitian_tolerance(M):.3e}"
        )
    return HermitianOperator((M + M.conj().T) / 2.0)


def zero_operator(dim: int) -> HermitianOperator:
    return HermitianOperator(np.zeros((dim, dim), dtype=np.complex128))


@dataclass(frozen=True)
class SpectralAtom:
    """One atom of a finitely atomic spectral measure.

    ``basis`` holds orthonormal columns spanning the eigenspace; the dense
    orthogonal projection is materialized on demand.
    """

    eigenvalue: float
    basis: np.ndarray

    @property
    def multiplicity(self) -> int:
        return self.basis.shape[1]

    @property
    def projection(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T


@dataclass(frozen=True)
class SpectralMeasure:
    """Finitely atomic spectral measure: sorted (eigenvalue, projection) atoms.

    Atoms are ordered by strictly increasing eigenvalue and their
    projections resolve the identity.  The cached frame (all eigenspace
    bases stacked into one unitary) is what the operator-integral
    contractions consume.
    """

    atoms: tuple[SpectralAtom, ...]

    @property
    def dim(self) -> int:
        return self.atoms[0].basis.shape[0]

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([a.eigenvalue for a in self.atoms], dtype=float)

    def projections(self) -> list[np.ndarray]:
        return [a.projection for a in self.atoms]

    @cached_property
    def frame(self) -> np.ndarray:
        """dim x dim unitary whose column blocks are the atom bases."""
        return np.hstack([a.basis for a in self.atoms])

    @cached_property
    def column_slices(self) -> tuple[slice, ...]:
        slices = []
        start = 0
        for a in self.atoms:
            slices.append(slice(start, start + a.multiplicity))
            start += a.multiplicity
        return tuple(slices)

    @cached_property
    def column_atom_index(self) -> np.ndarray:
        """For each frame column, the index of the atom it belongs to."""
        return np.repeat(
            np.arange(len(self.atoms)), [a.multiplicity for a in self.atoms]
        )

    def reconstruct(self) -> np.ndarray:
        """Sum of eigenvalue * projection; recovers the source operator."""
        V = self.frame
        weights = self.eigenvalues[self.column_atom_index]
        return (V * weights) @ V.conj().T

    def deviations(self, source: HermitianOperator | None = None) -> dict[str, float]:
        """Max-entry deviations from the measure invariants.

        Orthonormality of the frame columns is equivalent to the projection
        algebra (idempotence, mutual orthogonality); completeness is frame
        surjectivity.  Keys: 'orthonormal', 'complete' and, when ``source``
        is given, 'reconstruction'.
        """
        V = self.frame
        eye = np.eye(self.dim)
        out = {
            "orthonormal": float(np.max(np.abs(V.conj().T @ V - eye))),
            "complete": float(np.max(np.abs(V @ V.conj().T - eye))),
        }
        if source is not None:
            out["reconstruction"] = float(
                np.max(np.abs(self.reconstruct() - source.matrix))
            )
        return out


def spectral_measure(
    A: HermitianOperator, group_tol: float = DEFAULT_GROUP_TOL
) -> SpectralMeasure:
    """Eigendecompose ``A`` and merge nearly equal eigenvalues into atoms.

    Consecutive eigenvalues whose gap is at most ``group_tol`` land in the
    same atom; the atom's eigenvalue is the group mean and its projection
    is the sum of the grouped rank-one eigenprojections.

    Raises
    ------
    EigensolverError
        If the underlying eigenvalue iteration fails to converge.
    """
    if group_tol < 0:
        raise ValueError("group_tol must be nonnegative")
    try:
        values, vectors = np.linalg.eigh(A.matrix)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(str(exc)) from exc
    gaps = np.diff(values)
    boundaries = [0, *(np.flatnonzero(gaps > group_tol) + 1), len(values)]
    atoms = []
    for lo, hi in zip(boundaries[:-1], boundaries[1:]):
        atoms.append(
            SpectralAtom(
                eigenvalue=float(np.mean(values[lo:hi])),
                basis=np.ascontiguousarray(vectors[:, lo:hi]),
            )
        )
    return SpectralMeasure(atoms=tuple(atoms))


def spectral_measure_from_projections(
    pairs: Iterable[tuple[float, np.ndarray]]
) -> SpectralMeasure:
    """Build a measure from explicit (eigenvalue, projection) atoms.

    Each projection is factored into an orthonormal eigenspace basis.
    Intended for hand-built measures in tests and cross-checks.
    """
    atoms = []
    for value, projection in sorted(pairs, key=lambda item: item[0]):
        P = as_complex_matrix(projection)
        evals, evecs = np.linalg.eigh(P)
        keep = evals > 0.5
        if not np.any(keep):
            raise ValueError(f"projection for eigenvalue {value} has rank zero")
        atoms.append(SpectralAtom(eigenvalue=float(value), basis=evecs[:, keep]))
    measure = SpectralMeasure(atoms=tuple(atoms))
    tol = projection_tolerance(measure.dim)
    worst = max(measure.deviations().values())
    if worst > tol:
        raise ValueError(
            f"atoms do not form a spectral resolution (deviation {worst:.3e})"
        )
    return measure


def singular_values(M) -> np.ndarray:
    """Singular values of ``M`` in descending order.

    Raises
    ------
    SvdError
        If the SVD iteration fails to converge.
    """
    M = as_complex_matrix(M)
    try:
        return np.linalg.svd(M, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise SvdError(str(exc)) from exc


def validate_schatten_index(p: float) -> float:
    """Check p >= 1 (math.inf allowed) and return it as a float."""
    p = float(p)
    if math.isnan(p) or p < 1.0:
        raise ValueError(
            f"Schatten index must satisfy p >= 1 (math.inf for the operator norm), got {p}"
        )
    return p


def schatten_norm(M, p: float) -> float:
    """The l^p norm of the singular values; p = math.inf gives the operator norm.

    Singular values below 1e-14 times the largest are treated as exact
    zeros before exponentiation.  The sum is scaled by the leading singular
    value so extreme finite p cannot overflow.
    """
    p = validate_schatten_index(p)
    s = singular_values(M)
    top = float(s[0]) if s.size else 0.0
    if math.isinf(p) or top == 0.0:
        return top
    kept = s[s > _SINGULAR_VALUE_FLOOR * top]
    return top * float(np.sum((kept / top) ** p)) ** (1.0 / p)


def rank_one(u: Sequence[complex], v: Sequence[complex]) -> np.ndarray:
    """The operator w -> (w, v) u, i.e. the matrix with entries u_i * conj(v_k)."""
    u = np.asarray(u, dtype=np.complex128)
    v = np.asarray(v, dtype=np.complex128)
    if u.ndim != 1 or v.ndim != 1:
        raise ValueError("rank_one expects two vectors")
    if u.shape[0] != v.shape[0]:
        raise DimensionMismatchError(
            f"vector lengths differ: {u.shape[0]} vs {v.shape[0]}"
        )
    return np.outer(u, v.conj())


def numerical_rank(M, rel_tol: float = 1e-10) -> int:
    """Number of singular values above rel_tol times the largest."""
    s = singular_values(M)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > rel_tol * s[0]))


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Haar-ish random unitary from the QR factorization of a complex Gaussian."""
    G = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    Q, R = np.linalg.qr(G)
    phases = np.diag(R).copy()
    phases /= np.abs(phases)
    return Q * phases.conj()


def random_hermitian(
    rng: np.random.Generator, dim: int, scale: float = 1.0
) -> HermitianOperator:
    G = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return HermitianOperator(scale * (G + G.conj().T) / 2.0)
