"""Dense complex linear algebra shared by every other module.

All matrices are numpy complex128 arrays. Helpers here validate shapes,
reject non-finite entries, and translate LAPACK failures into the
package's exceptions.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    ConvergenceFailureError,
    EmptySpectrumError,
    InvalidParamsError,
    NotHermitianError,
    ResolventSingularError,
    SingularMatrixError,
)

_EPS = float(np.finfo(np.float64).eps)


def as_matrix(obj, name: str = "matrix") -> np.ndarray:
    """Coerce to a read-only complex 2-D array, rejecting non-finite entries."""
    try:
        m = np.array(obj, dtype=np.complex128, order="C")
    except (TypeError, ValueError) as exc:
        raise InvalidParamsError(f"{name}: cannot interpret as a complex matrix: {exc}") from None
    if m.ndim != 2:
        raise InvalidParamsError(f"{name}: expected a 2-D array, got shape {m.shape}")
    if m.size and not np.all(np.isfinite(m)):
        raise InvalidParamsError(f"{name}: non-finite entries are not allowed")
    m.flags.writeable = False
    return m


def require_square(m: np.ndarray, name: str = "matrix") -> None:
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidParamsError(f"{name}: expected a square matrix, got shape {m.shape}")


def hermitian_defect(m: np.ndarray) -> float:
    """Largest absolute entry of m - m^*."""
    if m.size == 0:
        return 0.0
    return float(np.max(np.abs(m - m.conj().T)))


def default_hermitian_tol(m: np.ndarray) -> float:
    """Hermiticity tolerance 1e-12 * max(1, max|entry|)."""
    scale = float(np.max(np.abs(m))) if m.size else 0.0
    return 1e-12 * max(1.0, scale)


@dataclass(frozen=True)
class HermitianEig:
    """Decomposition m = V diag(w) V^* with w real ascending and V unitary."""

    eigenvalues: np.ndarray
    vectors: np.ndarray

    @property
    def dim(self) -> int:
        return int(self.eigenvalues.shape[0])


def hermitian_eig(m, tol: float | None = None) -> HermitianEig:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending.

    The input may deviate from exact Hermiticity by at most ``tol`` per entry
    (default 1e-12 * max(1, max|entry|)). It is symmetrized before the
    decomposition so input roundoff does not leak into the result.
    """
    m = as_matrix(m, "m")
    require_square(m, "m")
    if tol is None:
        tol = default_hermitian_tol(m)
    defect = hermitian_defect(m)
    if defect > tol:
        raise NotHermitianError(
            f"matrix is not Hermitian: defect {defect:.3e} exceeds tolerance {tol:.3e}"
        )
    sym = (m + m.conj().T) / 2.0
    try:
        w, v = np.linalg.eigh(sym)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailureError(f"Hermitian eigensolver did not converge: {exc}") from exc
    w.flags.writeable = False
    v.flags.writeable = False
    return HermitianEig(eigenvalues=w, vectors=v)


def solve_linear(m, rhs) -> np.ndarray:
    """Solve m @ x = rhs by pivoted LU factorization.

    Raises SingularMatrixError when the smallest pivot is negligible relative
    to the largest one; singularity is never reported through warnings.
    """
    m = as_matrix(m, "m")
    require_square(m, "m")
    rhs_arr = np.asarray(rhs, dtype=np.complex128)
    if rhs_arr.ndim not in (1, 2):
        raise InvalidParamsError(f"rhs: expected a 1-D or 2-D array, got shape {rhs_arr.shape}")
    if rhs_arr.shape[0] != m.shape[0]:
        raise InvalidParamsError(
            f"rhs: leading dimension {rhs_arr.shape[0]} does not match matrix dimension {m.shape[0]}"
        )
    if rhs_arr.size and not np.all(np.isfinite(rhs_arr)):
        raise InvalidParamsError("rhs: non-finite entries are not allowed")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(m, check_finite=False)
    pivots = np.abs(np.diag(lu))
    if pivots.size:
        largest = float(pivots.max())
        if largest == 0.0 or float(pivots.min()) <= largest * max(m.shape) * _EPS:
            raise SingularMatrixError(
                f"matrix of dimension {m.shape[0]} is numerically singular "
                f"(pivot range {float(pivots.min()):.3e} to {largest:.3e})"
            )
    return scipy.linalg.lu_solve((lu, piv), rhs_arr, check_finite=False)


def solve_row_systems(shifted: np.ndarray, rhs_rows: np.ndarray, shifts: np.ndarray) -> np.ndarray:
    """Solve row_k @ shifted[k] = rhs_rows[k] for every k in one batched call.

    ``shifted`` stacks the per-shift system matrices along axis 0. A shift
    whose system is numerically singular is reported through
    ResolventSingularError carrying the offending spectral point.
    """
    try:
        rows = np.linalg.solve(shifted.transpose(0, 2, 1), rhs_rows[:, :, np.newaxis])[:, :, 0]
    except np.linalg.LinAlgError:
        _locate_singular_shift(shifted, rhs_rows, shifts)
        raise
    residual = np.einsum("ki,kij->kj", rows, shifted) - rhs_rows
    scale = np.maximum(np.linalg.norm(rhs_rows, axis=1), 1.0)
    rel = np.linalg.norm(residual, axis=1) / scale
    worst = int(np.argmax(rel))
    if not np.all(np.isfinite(rows)) or float(rel[worst]) > 1e-6:
        raise ResolventSingularError(
            f"resolvent shift mu={complex(shifts[worst])} is numerically singular "
            f"(relative residual {float(rel[worst]):.3e})",
            mu=complex(shifts[worst]),
        )
    return rows


def _locate_singular_shift(shifted, rhs_rows, shifts) -> None:
    for k in range(shifted.shape[0]):
        try:
            solve_linear(shifted[k].T, rhs_rows[k])
        except SingularMatrixError:
            raise ResolventSingularError(
                f"resolvent shift mu={complex(shifts[k])} is singular", mu=complex(shifts[k])
            ) from None


def hilbert_schmidt_norm(m) -> float:
    """Frobenius norm, the square root of the summed squared moduli."""
    arr = np.asarray(m)
    if arr.size == 0:
        return 0.0
    return float(np.linalg.norm(arr))


def operator_norm(m) -> float:
    """Largest singular value."""
    arr = np.atleast_2d(np.asarray(m, dtype=np.complex128))
    if arr.size == 0:
        return 0.0
    try:
        return float(np.linalg.norm(arr, 2))
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailureError(f"singular value computation did not converge: {exc}") from exc


def spectral_distance(s1, s2) -> float:
    """Smallest |x - y| over all pairs drawn from the two spectra."""
    a = np.atleast_1d(np.asarray(s1, dtype=np.float64))
    b = np.atleast_1d(np.asarray(s2, dtype=np.float64))
    if a.size == 0 or b.size == 0:
        raise EmptySpectrumError("spectral distance of an empty spectrum is undefined")
    return float(np.min(np.abs(np.subtract.outer(a, b))))


def hermitian_sqrt_pair(m) -> tuple[np.ndarray, np.ndarray]:
    """Return (m^(1/2), m^(-1/2)) for a Hermitian positive definite matrix."""
    eig = hermitian_eig(m)
    smallest = float(eig.eigenvalues.min()) if eig.eigenvalues.size else 0.0
    if smallest <= 0.0:
        raise InvalidParamsError(
            f"matrix is not positive definite: smallest eigenvalue {smallest:.3e}"
        )
    v = eig.vectors
    root = (v * np.sqrt(eig.eigenvalues)) @ v.conj().T
    inv_root = (v / np.sqrt(eig.eigenvalues)) @ v.conj().T
    return root, inv_root


def sorted_match_error(values_a, values_b) -> float:
    """Largest |a_i - b_i| after sorting both lists by real part."""
    a = np.asarray(values_a, dtype=np.complex128).ravel()
    b = np.asarray(values_b, dtype=np.complex128).ravel()
    if a.size != b.size:
        raise InvalidParamsError(f"cannot match spectra of sizes {a.size} and {b.size}")
    if a.size == 0:
        return 0.0
    a = a[np.argsort(a.real, kind="stable")]
    b = b[np.argsort(b.real, kind="stable")]
    return float(np.max(np.abs(a - b)))
