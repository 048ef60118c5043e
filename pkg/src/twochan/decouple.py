"""Energy-independent channel Hamiltonians, the block transform, and invariant subspaces."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    ConvergenceFailureError,
    InvalidParamsError,
    NonRealSpectrumError,
    ResolventSingularError,
)
from .linalg import (
    hermitian_sqrt_pair,
    hilbert_schmidt_norm,
    solve_linear,
    solve_row_systems,
)
from .model import (
    TwoChannelHamiltonian,
    assemble_full,
    check_channel,
    effective_potential,
    other_channel,
)
from .riccati import RiccatiSolution


@dataclass(frozen=True)
class DecoupledChannel:
    """Energy-independent channel Hamiltonian with its biorthogonal eigensystem.

    h_alpha = a_alpha + w_alpha is similar to a Hermitian matrix, so its
    eigenvalues are real up to roundoff; they are stored sorted by real part.
    Column j of right_vectors is an eigenvector for eigenvalues[j] and column
    j of left_duals is the matching dual, normalized so the pairing
    <psi_j, dual_j> equals one.
    """

    alpha: int
    h_alpha: np.ndarray
    w_alpha: np.ndarray
    eigenvalues: np.ndarray
    right_vectors: np.ndarray
    left_duals: np.ndarray

    @property
    def dim(self) -> int:
        return int(self.h_alpha.shape[0])


@dataclass(frozen=True)
class DecouplingTransform:
    """Block similarity [[I, q12], [q21, I]] and its unitary refinement.

    q_block conjugates the full Hamiltonian into h_prime = diag(h1, h2).
    The weights x1 and x2 are I plus a positive semidefinite term, hence
    invertible; q_tilde = q_block diag(x1, x2)^(-1/2) is unitary and
    h_double_prime collects the Hermitian similarity images of the channel
    Hamiltonians.
    """

    q_block: np.ndarray
    q_block_inverse: np.ndarray
    x1: np.ndarray
    x2: np.ndarray
    q_tilde: np.ndarray
    h_prime: np.ndarray
    h_double_prime: np.ndarray


@dataclass(frozen=True)
class InvariantSubspace:
    """Graph of the coupling block: columns span a subspace the full operator preserves."""

    alpha: int
    basis: np.ndarray
    projector_like: np.ndarray


def reality_tolerance(h: TwoChannelHamiltonian) -> float:
    """Default bound on channel eigenvalue imaginary parts: 1e-10 * max(1, HS norm of H)."""
    return 1e-10 * max(1.0, hilbert_schmidt_norm(assemble_full(h)))


def _x_weight(sol: RiccatiSolution) -> np.ndarray:
    return np.eye(sol.q.shape[1]) + sol.q.conj().T @ sol.q


def _x_normalize(values: np.ndarray, vectors: np.ndarray, weight: np.ndarray) -> np.ndarray:
    """Normalize eigenvector columns so the weighted Gram matrix is the identity.

    Within a cluster of numerically equal eigenvalues any combination is still
    an eigenvector, so the whole Gram factor of the cluster can be absorbed;
    across distinct eigenvalues the weighted products vanish analytically and
    only the diagonal needs fixing.
    """
    cluster_tol = 1e-12 * max(1.0, float(np.max(np.abs(values))))
    out = np.array(vectors, copy=True)
    n = values.shape[0]
    start = 0
    while start < n:
        stop = start + 1
        while stop < n and abs(values[stop] - values[stop - 1]) <= cluster_tol:
            stop += 1
        block = out[:, start:stop]
        gram = block.conj().T @ weight @ block
        gram = (gram + gram.conj().T) / 2.0
        try:
            chol = np.linalg.cholesky(gram)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceFailureError(
                f"degenerate eigenvalue cluster at {values[start]} produced a "
                f"rank-deficient eigenbasis"
            ) from exc
        out[:, start:stop] = scipy.linalg.solve_triangular(
            chol, block.conj().T, lower=True
        ).conj().T
        start = stop
    return out


def build_channel(
    h: TwoChannelHamiltonian, sol: RiccatiSolution, reality_tol: float | None = None
) -> DecoupledChannel:
    """Assemble h_alpha = a_alpha + B q and compute its biorthogonal eigensystem.

    The eigenproblem is solved with a general (non-Hermitian) solver so the
    reality of the spectrum is measured rather than assumed. Eigenvectors are
    renormalized under the weight X = I + q^* q; the duals X psi_j then pair
    biorthogonally with the eigenvectors even through degenerate clusters.
    """
    alpha = check_channel(sol.alpha)
    w_matrix = h.coupling(alpha) @ sol.q
    h_alpha = h.a(alpha) + w_matrix
    if reality_tol is None:
        reality_tol = reality_tolerance(h)
    try:
        values, vectors = scipy.linalg.eig(h_alpha)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise ConvergenceFailureError(
            f"eigensolver failed on channel {alpha}: {exc}"
        ) from exc
    max_imag = float(np.max(np.abs(values.imag))) if values.size else 0.0
    if max_imag > reality_tol:
        raise NonRealSpectrumError(
            f"channel-{alpha} spectrum has imaginary parts up to {max_imag:.3e} "
            f"(tolerance {reality_tol:.3e}); the supplied coupling block does not "
            f"decouple this instance",
            max_imag=max_imag,
        )
    order = np.argsort(values.real, kind="stable")
    values = values[order]
    vectors = vectors[:, order]
    weight = _x_weight(sol)
    vectors = _x_normalize(values, vectors, weight)
    duals = weight @ vectors
    for arr in (h_alpha, w_matrix, values, vectors, duals):
        arr.flags.writeable = False
    return DecoupledChannel(
        alpha=alpha,
        h_alpha=h_alpha,
        w_alpha=w_matrix,
        eigenvalues=values,
        right_vectors=vectors,
        left_duals=duals,
    )


def verify_basic_equation(
    h: TwoChannelHamiltonian, ch: DecoupledChannel, guard: float | None = None
) -> float:
    """Residual of h_alpha = a_alpha + V(h_alpha) with V rebuilt from scratch.

    The operator-argument potential is evaluated through the complementary
    eigenbasis, one resolvent solve per spectral point, sharing no code with
    the fixed-point map's accumulated iterate.
    """
    alpha = check_channel(ch.alpha)
    beta = other_channel(alpha)
    eig_b = h.eig(beta)
    if guard is None:
        guard = 1e-8 * max(1.0, float(np.max(np.abs(eig_b.eigenvalues))))
    dists = np.min(np.abs(np.subtract.outer(eig_b.eigenvalues, ch.eigenvalues)), axis=1)
    nearest = int(np.argmin(dists))
    if float(dists[nearest]) <= guard:
        raise ResolventSingularError(
            f"spectral point mu={eig_b.eigenvalues[nearest]} of channel {beta} lies within "
            f"{float(dists[nearest]):.3e} of the channel-{alpha} spectrum (guard {guard:.3e})",
            mu=complex(eig_b.eigenvalues[nearest]),
        )
    rows_rhs = eig_b.vectors.conj().T @ h.coupling(beta)
    shifted = ch.h_alpha[np.newaxis, :, :] - eig_b.eigenvalues[
        :, np.newaxis, np.newaxis
    ] * np.eye(ch.dim)
    rows = solve_row_systems(shifted, rows_rhs, eig_b.eigenvalues)
    # (h_alpha - mu)^(-1) plays the role of (z - A_beta)^(-1), so no sign flip
    v_of_h = h.coupling(alpha) @ (eig_b.vectors @ rows)
    return hilbert_schmidt_norm(ch.h_alpha - h.a(alpha) - v_of_h)


def eigenpair_solves_original(h: TwoChannelHamiltonian, ch: DecoupledChannel, j: int) -> float:
    """Relative residual of the energy-dependent problem at channel eigenpair j.

    Evaluates (a_alpha + V(z_j)) psi_j - z_j psi_j with the potential computed
    at the scalar energy z_j, the form the decoupled problem must reproduce.
    """
    if not isinstance(j, (int, np.integer)) or not 0 <= j < ch.dim:
        raise InvalidParamsError(f"j: expected an index in [0, {ch.dim}), got {j!r}")
    z = complex(ch.eigenvalues[j])
    psi = ch.right_vectors[:, j]
    v = effective_potential(h, ch.alpha, z)
    residual = (h.a(ch.alpha) + v) @ psi - z * psi
    return float(np.linalg.norm(residual) / np.linalg.norm(psi))


def _q21_of(sol: RiccatiSolution) -> np.ndarray:
    # normalize either channel's solution to the channel-1 representation
    return sol.q if sol.alpha == 1 else -sol.q.conj().T


def _block_parts(h: TwoChannelHamiltonian, q21: np.ndarray):
    q12 = -q21.conj().T
    q_block = np.block(
        [[np.eye(h.n1), q12], [q21, np.eye(h.n2)]]
    )
    return q12, q_block


def build_transform(h: TwoChannelHamiltonian, sol: RiccatiSolution) -> DecouplingTransform:
    """Similarity transform that block-diagonalizes the full Hamiltonian.

    Accepts the solution of either channel; the complementary off-diagonal
    block is formed internally as the negative adjoint. SingularMatrixError
    from the inversion signals a corrupted solution; for solutions inside the
    unit operator-norm ball the transform cannot be singular.
    """
    q21 = _q21_of(sol)
    q12, q_block = _block_parts(h, q21)
    q_inverse = solve_linear(q_block, np.eye(h.n_total))
    x1 = np.eye(h.n1) + q21.conj().T @ q21
    x2 = np.eye(h.n2) + q21 @ q21.conj().T
    x1_root, x1_inv_root = hermitian_sqrt_pair(x1)
    x2_root, x2_inv_root = hermitian_sqrt_pair(x2)
    q_tilde = q_block @ scipy.linalg.block_diag(x1_inv_root, x2_inv_root)
    h1 = h.a1 + h.b12 @ q21
    h2 = h.a2 + h.b12.conj().T @ q12
    h_prime = scipy.linalg.block_diag(h1, h2)
    h_double_prime = scipy.linalg.block_diag(
        x1_root @ h1 @ x1_inv_root, x2_root @ h2 @ x2_inv_root
    )
    for arr in (q_block, q_inverse, x1, x2, q_tilde, h_prime, h_double_prime):
        arr.flags.writeable = False
    return DecouplingTransform(
        q_block=q_block,
        q_block_inverse=q_inverse,
        x1=x1,
        x2=x2,
        q_tilde=q_tilde,
        h_prime=h_prime,
        h_double_prime=h_double_prime,
    )


def invariant_subspace(h: TwoChannelHamiltonian, sol: RiccatiSolution) -> InvariantSubspace:
    """Graph basis of the coupling block and the full-space operator part acting in it.

    For channel 1 the basis stacks the identity over q21, so column k is the
    lift of the k-th channel basis vector; the full Hamiltonian maps each
    column back into the span. projector_like is the full-space operator that
    acts as h_alpha inside the subspace and annihilates its complement.
    """
    alpha = check_channel(sol.alpha)
    q21 = _q21_of(sol)
    q12, q_block = _block_parts(h, q21)
    if alpha == 1:
        basis = np.vstack([np.eye(h.n1), q21])
        h_alpha = h.a1 + h.b12 @ q21
        inner = scipy.linalg.block_diag(h_alpha, np.zeros((h.n2, h.n2)))
    else:
        basis = np.vstack([q12, np.eye(h.n2)])
        h_alpha = h.a2 + h.b12.conj().T @ q12
        inner = scipy.linalg.block_diag(np.zeros((h.n1, h.n1)), h_alpha)
    part = q_block @ inner @ solve_linear(q_block, np.eye(h.n_total))
    basis = np.ascontiguousarray(basis)
    for arr in (basis, part):
        arr.flags.writeable = False
    return InvariantSubspace(alpha=alpha, basis=basis, projector_like=part)
