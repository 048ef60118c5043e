"""Contraction fixed-point solver for the coupling-block Riccati equation.

The off-diagonal block q sought here satisfies
q A_alpha - A_beta q + q B_ab q = B_ba, which is equivalent to the channel
Hamiltonian A_alpha + B_ab q reproducing the energy-dependent potential at
its own spectral points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DivergedError,
    InadmissibleError,
    InvalidParamsError,
    NotConvergedError,
)
from .linalg import (
    as_matrix,
    hilbert_schmidt_norm,
    operator_norm,
    solve_row_systems,
)
from .model import TwoChannelHamiltonian, check_channel, gap_report, other_channel


@dataclass(frozen=True)
class SolverConfig:
    """Fixed-point iteration parameters.

    delta is the operator-norm radius of the ball in which the solution is
    sought; the admissibility bound is evaluated for this radius. A
    residual_tol of None selects 1e-12 * max(1, coupling HS norm) per
    instance.
    """

    delta: float = 1.0
    max_iterations: int = 500
    residual_tol: float | None = None
    divergence_guard: float = 1e3

    def __post_init__(self):
        if not np.isfinite(self.delta) or self.delta <= 0.0:
            raise InvalidParamsError(f"delta: expected a positive number, got {self.delta!r}")
        if not isinstance(self.max_iterations, (int, np.integer)) or self.max_iterations < 1:
            raise InvalidParamsError(
                f"max_iterations: expected a positive integer, got {self.max_iterations!r}"
            )
        if self.residual_tol is not None and (
            not np.isfinite(self.residual_tol) or self.residual_tol <= 0.0
        ):
            raise InvalidParamsError(
                f"residual_tol: expected a positive number or None, got {self.residual_tol!r}"
            )
        if not np.isfinite(self.divergence_guard) or self.divergence_guard <= 0.0:
            raise InvalidParamsError(
                f"divergence_guard: expected a positive number, got {self.divergence_guard!r}"
            )

    def effective_tol(self, h: TwoChannelHamiltonian) -> float:
        if self.residual_tol is not None:
            return float(self.residual_tol)
        return 1e-12 * max(1.0, hilbert_schmidt_norm(h.b12))


@dataclass(frozen=True)
class RiccatiSolution:
    """Coupling block q for one channel plus iteration diagnostics.

    q maps the alpha-channel space into the complementary one. step_norms
    and iterate_norms record the HS step size and the operator norm after
    each iteration; both are empty when no iteration was performed (solutions
    obtained by conjugation or supplied externally).
    """

    alpha: int
    q: np.ndarray
    iterations_used: int
    fixed_point_residual: float
    riccati_residual: float
    q_operator_norm: float
    admissible: bool
    step_norms: np.ndarray
    iterate_norms: np.ndarray


def admissibility_bound(d0: float, delta: float) -> float:
    """Largest coupling HS norm with a guaranteed fixed point in the delta ball."""
    if not np.isfinite(delta) or delta <= 0.0:
        raise InvalidParamsError(f"delta: expected a positive number, got {delta!r}")
    return d0 * min(1.0 / (1.0 + delta), delta / (1.0 + delta * delta))


def check_admissibility(h: TwoChannelHamiltonian, delta: float) -> tuple[bool, float]:
    """Whether the coupling norm lies strictly below the contraction bound.

    Returns (admissible, bound). The bound degenerates to zero when the
    channel spectra touch, so overlapping spectra are never admissible.
    """
    rep = gap_report(h)
    bound = admissibility_bound(rep.d0, delta)
    return bool(rep.b_hs_norm < bound), bound


def fixed_point_map(h: TwoChannelHamiltonian, alpha: int, q) -> np.ndarray:
    """One application of the contraction map whose fixed point solves the equation.

    In the eigenbasis of the complementary block the image has row k equal to
    (v_k^* B_ba) (A_alpha + B_ab q - mu_k I)^(-1); assembling the rows and
    rotating back realizes the spectral-measure sum exactly, so no quadrature
    error enters.
    """
    alpha = check_channel(alpha)
    beta = other_channel(alpha)
    q = as_matrix(q, "q")
    n_a, n_b = h.dim(alpha), h.dim(beta)
    if q.shape != (n_b, n_a):
        raise InvalidParamsError(
            f"q: expected shape {(n_b, n_a)} for channel {alpha}, got {q.shape}"
        )
    eig_b = h.eig(beta)
    rows_rhs = eig_b.vectors.conj().T @ h.coupling(beta)
    core = h.a(alpha) + h.coupling(alpha) @ q
    shifted = core[np.newaxis, :, :] - eig_b.eigenvalues[:, np.newaxis, np.newaxis] * np.eye(n_a)
    rows = solve_row_systems(shifted, rows_rhs, eig_b.eigenvalues)
    return eig_b.vectors @ rows


def riccati_residual(h: TwoChannelHamiltonian, alpha: int, q) -> float:
    """HS norm of q A_alpha - A_beta q + q B_ab q - B_ba, evaluated directly.

    This is an independent measurement: it never calls the fixed-point map,
    only plain matrix products against the stored blocks.
    """
    alpha = check_channel(alpha)
    beta = other_channel(alpha)
    q = np.asarray(q, dtype=np.complex128)
    residual = q @ h.a(alpha) - h.a(beta) @ q + q @ h.coupling(alpha) @ q - h.coupling(beta)
    return hilbert_schmidt_norm(residual)


def solve(
    h: TwoChannelHamiltonian,
    alpha: int,
    cfg: SolverConfig | None = None,
    *,
    allow_inadmissible: bool = False,
    initial=None,
) -> RiccatiSolution:
    """Iterate the contraction map from zero until the fixed point is reached.

    Args:
        h: block Hamiltonian to decouple.
        alpha: channel whose energy-independent block is sought.
        cfg: iteration parameters; defaults are used when None.
        allow_inadmissible: attempt the iteration even when the coupling bound
            fails; the result is then not guaranteed and is marked as such.
        initial: starting iterate (defaults to zero, which lies in every ball).

    Returns:
        RiccatiSolution with both residuals evaluated at the returned iterate.

    Raises:
        InadmissibleError: coupling bound violated and no override given.
        NotConvergedError: iteration budget exhausted.
        DivergedError: iterate operator norm exceeded divergence_guard.
        ResolventSingularError: a resolvent shift became singular, which can
            only happen outside the guaranteed regime.
    """
    alpha = check_channel(alpha)
    cfg = cfg if cfg is not None else SolverConfig()
    admissible, bound = check_admissibility(h, cfg.delta)
    if not admissible and not allow_inadmissible:
        b_norm = hilbert_schmidt_norm(h.b12)
        raise InadmissibleError(
            f"coupling norm {b_norm:.6e} is not below the contraction bound {bound:.6e} "
            f"for delta={cfg.delta:g}; pass allow_inadmissible to attempt anyway",
            b_norm=b_norm,
            bound=bound,
        )
    beta = other_channel(alpha)
    tol = cfg.effective_tol(h)
    if initial is None:
        q = np.zeros((h.dim(beta), h.dim(alpha)), dtype=np.complex128)
    else:
        q = as_matrix(initial, "initial")
        if q.shape != (h.dim(beta), h.dim(alpha)):
            raise InvalidParamsError(
                f"initial: expected shape {(h.dim(beta), h.dim(alpha))}, got {q.shape}"
            )

    steps: list[float] = []
    norms: list[float] = []
    pending = None
    iterations = 0
    last_residual = float("inf")
    while iterations < cfg.max_iterations:
        q_next = pending if pending is not None else fixed_point_map(h, alpha, q)
        pending = None
        iterations += 1
        step = hilbert_schmidt_norm(q_next - q)
        q = q_next
        q_norm = operator_norm(q)
        steps.append(step)
        norms.append(q_norm)
        last_residual = step
        if q_norm > cfg.divergence_guard:
            raise DivergedError(
                f"iterate operator norm {q_norm:.3e} exceeded the divergence guard "
                f"{cfg.divergence_guard:.3e} after {iterations} iterations",
                iterations=iterations,
                norm=q_norm,
            )
        if step <= tol:
            # the step being small is necessary but not sufficient; accept
            # only once the map itself reproduces the iterate
            image = fixed_point_map(h, alpha, q)
            residual = hilbert_schmidt_norm(image - q)
            if residual <= tol:
                q = q.copy()
                q.flags.writeable = False
                return RiccatiSolution(
                    alpha=alpha,
                    q=q,
                    iterations_used=iterations,
                    fixed_point_residual=residual,
                    riccati_residual=riccati_residual(h, alpha, q),
                    q_operator_norm=q_norm,
                    admissible=admissible,
                    step_norms=np.asarray(steps),
                    iterate_norms=np.asarray(norms),
                )
            pending = image
            last_residual = residual
    raise NotConvergedError(
        f"no fixed point within {cfg.max_iterations} iterations "
        f"(last residual {last_residual:.3e}, tolerance {tol:.3e})",
        iterations=iterations,
        last_residual=last_residual,
    )


def solution_from_q(
    h: TwoChannelHamiltonian, alpha: int, q, cfg: SolverConfig | None = None
) -> RiccatiSolution:
    """Package an externally supplied coupling block with fresh diagnostics.

    No iteration is performed; both residuals are measured for the given q,
    which makes this the entry point for auditing stored or edited solutions.
    """
    alpha = check_channel(alpha)
    cfg = cfg if cfg is not None else SolverConfig()
    q = as_matrix(q, "q")
    admissible, _ = check_admissibility(h, cfg.delta)
    image = fixed_point_map(h, alpha, q)
    return RiccatiSolution(
        alpha=alpha,
        q=q,
        iterations_used=0,
        fixed_point_residual=hilbert_schmidt_norm(image - q),
        riccati_residual=riccati_residual(h, alpha, q),
        q_operator_norm=operator_norm(q),
        admissible=admissible,
        step_norms=np.zeros(0),
        iterate_norms=np.zeros(0),
    )


def conjugate_solution(h: TwoChannelHamiltonian, sol: RiccatiSolution) -> RiccatiSolution:
    """Solution for the complementary channel, obtained as -q^*.

    Taking the adjoint of the solved equation shows -q^* satisfies the
    swapped-role equation exactly, so no second iteration is needed. Both
    residuals are recomputed here rather than copied; iterations_used is
    inherited from the solved channel and the per-iteration diagnostics are
    left empty.
    """
    beta = other_channel(sol.alpha)
    q_conj = -sol.q.conj().T
    q_conj.flags.writeable = False
    image = fixed_point_map(h, beta, q_conj)
    return RiccatiSolution(
        alpha=beta,
        q=q_conj,
        iterations_used=sol.iterations_used,
        fixed_point_residual=hilbert_schmidt_norm(image - q_conj),
        riccati_residual=riccati_residual(h, beta, q_conj),
        q_operator_norm=operator_norm(q_conj),
        admissible=sol.admissible,
        step_norms=np.zeros(0),
        iterate_norms=np.zeros(0),
    )
