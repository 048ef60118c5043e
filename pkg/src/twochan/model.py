"""Two-channel block Hamiltonians and the energy-dependent effective potential."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import InvalidParamsError, NotHermitianError, ResolventSingularError
from .linalg import (
    HermitianEig,
    as_matrix,
    default_hermitian_tol,
    hermitian_defect,
    hermitian_eig,
    hilbert_schmidt_norm,
    require_square,
    solve_linear,
    spectral_distance,
)


def check_channel(alpha: int) -> int:
    if alpha not in (1, 2):
        raise InvalidParamsError(f"channel index must be 1 or 2, got {alpha!r}")
    return int(alpha)


def other_channel(alpha: int) -> int:
    """The complementary channel index."""
    return 3 - check_channel(alpha)


def _hermitian_block(obj, name: str) -> np.ndarray:
    m = as_matrix(obj, name)
    require_square(m, name)
    tol = default_hermitian_tol(m)
    defect = hermitian_defect(m)
    if defect > tol:
        raise NotHermitianError(
            f"channel block {name} is not Hermitian: defect {defect:.3e} exceeds tolerance {tol:.3e}"
        )
    return m


@dataclass(eq=False)
class TwoChannelHamiltonian:
    """Self-adjoint block operator [[a1, b12], [b12^*, a2]].

    a1 and a2 are the Hermitian channel blocks and b12 couples channel 2 into
    channel 1. The adjoint coupling block is never stored; every formula uses
    b12^* directly, so the two off-diagonal blocks cannot disagree. Arrays are
    validated and frozen at construction, and the per-channel
    eigendecompositions are computed once and cached, which makes instances
    cheap to share across solver iterations and worker threads.
    """

    a1: np.ndarray
    a2: np.ndarray
    b12: np.ndarray

    def __post_init__(self):
        self.a1 = _hermitian_block(self.a1, "a1")
        self.a2 = _hermitian_block(self.a2, "a2")
        self.b12 = as_matrix(self.b12, "b12")
        if self.b12.shape != (self.n1, self.n2):
            raise InvalidParamsError(
                f"b12: expected shape {(self.n1, self.n2)} to match the channel blocks, "
                f"got {self.b12.shape}"
            )

    @property
    def n1(self) -> int:
        return int(self.a1.shape[0])

    @property
    def n2(self) -> int:
        return int(self.a2.shape[0])

    @property
    def n_total(self) -> int:
        return self.n1 + self.n2

    def dim(self, alpha: int) -> int:
        return self.n1 if check_channel(alpha) == 1 else self.n2

    def a(self, alpha: int) -> np.ndarray:
        """Channel block A_alpha."""
        return self.a1 if check_channel(alpha) == 1 else self.a2

    def coupling(self, alpha: int) -> np.ndarray:
        """Coupling block mapping the complementary channel into channel alpha."""
        return self.b12 if check_channel(alpha) == 1 else self._b21

    @cached_property
    def _b21(self) -> np.ndarray:
        b21 = self.b12.conj().T.copy()
        b21.flags.writeable = False
        return b21

    @cached_property
    def _eig1(self) -> HermitianEig:
        return hermitian_eig(self.a1)

    @cached_property
    def _eig2(self) -> HermitianEig:
        return hermitian_eig(self.a2)

    def eig(self, alpha: int) -> HermitianEig:
        """Cached eigendecomposition of the channel block."""
        return self._eig1 if check_channel(alpha) == 1 else self._eig2


@dataclass(frozen=True)
class GapReport:
    """Channel spectra plus the two numbers the contraction bound depends on.

    contraction_margin = d0 / 2 - b_hs_norm, the slack of the unit-ball
    sufficient condition; positive margin guarantees a unique solution with
    operator norm below one.
    """

    sigma1: np.ndarray
    sigma2: np.ndarray
    d0: float
    b_hs_norm: float
    contraction_margin: float


def assemble_full(h: TwoChannelHamiltonian) -> np.ndarray:
    """Dense (n1 + n2)-square matrix with blocks [[a1, b12], [b12^*, a2]]."""
    return np.block([[h.a1, h.b12], [h.b12.conj().T, h.a2]])


def gap_report(h: TwoChannelHamiltonian) -> GapReport:
    """Measure the distance between channel spectra and the coupling norm."""
    sigma1 = h.eig(1).eigenvalues
    sigma2 = h.eig(2).eigenvalues
    d0 = spectral_distance(sigma1, sigma2)
    b_hs = hilbert_schmidt_norm(h.b12)
    return GapReport(
        sigma1=sigma1,
        sigma2=sigma2,
        d0=d0,
        b_hs_norm=b_hs,
        contraction_margin=d0 / 2.0 - b_hs,
    )


def effective_potential(h: TwoChannelHamiltonian, alpha: int, z: complex, guard: float | None = None) -> np.ndarray:
    """Energy-dependent potential -B (A_beta - z I)^(-1) B^* felt in channel alpha.

    z must stay at least ``guard`` away from the spectrum of the complementary
    block (default guard 1e-8 * max(1, norm of A_beta)); closer evaluation
    points raise ResolventSingularError instead of returning garbage.
    """
    alpha = check_channel(alpha)
    beta = other_channel(alpha)
    z = complex(z)
    eig_b = h.eig(beta)
    scale = max(1.0, float(np.max(np.abs(eig_b.eigenvalues))))
    if guard is None:
        guard = 1e-8 * scale
    dist = float(np.min(np.abs(eig_b.eigenvalues - z)))
    if dist <= guard:
        raise ResolventSingularError(
            f"evaluation point z={z} lies within {dist:.3e} of the channel-{beta} spectrum "
            f"(guard {guard:.3e})",
            mu=z,
        )
    b_ab = h.coupling(alpha)
    resolvent_applied = solve_linear(h.a(beta) - z * np.eye(h.dim(beta)), b_ab.conj().T)
    return -(b_ab @ resolvent_applied)


def _haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    # fixing the R-diagonal phases makes the QR output Haar distributed
    safe = np.where(np.abs(d) == 0.0, 1.0, d)
    return q * (safe / np.abs(safe))


def _random_conjugation(values: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    u = _haar_unitary(values.shape[0], rng)
    m = (u * values) @ u.conj().T
    return (m + m.conj().T) / 2.0


def generate_instance(
    n1: int, n2: int, gap: float, coupling_scale: float, seed: int
) -> TwoChannelHamiltonian:
    """Random instance with channel spectra separated by exactly ``gap``.

    Channel-1 eigenvalues fill [-s, 0] and channel-2 eigenvalues [gap, gap + s]
    with spread s = max(gap, 1); the extreme eigenvalues are pinned so the gap
    is exact. Both blocks are conjugated by Haar-random unitaries. The coupling
    is a complex Gaussian matrix rescaled so its Hilbert-Schmidt norm equals
    coupling_scale * gap / 2, which keeps the contraction margin at
    (1 - coupling_scale) * gap / 2. Deterministic in ``seed``.
    """
    for label, n in (("n1", n1), ("n2", n2)):
        if not isinstance(n, (int, np.integer)) or isinstance(n, bool) or n < 1:
            raise InvalidParamsError(f"{label}: expected a positive integer, got {n!r}")
    gap = float(gap)
    if not np.isfinite(gap) or gap <= 0.0:
        raise InvalidParamsError(f"gap: expected a positive finite number, got {gap!r}")
    coupling_scale = float(coupling_scale)
    if not np.isfinite(coupling_scale) or not 0.0 < coupling_scale < 1.0:
        raise InvalidParamsError(
            f"coupling_scale: expected a value strictly between 0 and 1, got {coupling_scale!r}"
        )
    if not isinstance(seed, (int, np.integer)) or isinstance(seed, bool):
        raise InvalidParamsError(f"seed: expected an integer, got {seed!r}")

    rng = np.random.default_rng(int(seed))
    spread = max(gap, 1.0)
    vals1 = np.sort(rng.uniform(-spread, 0.0, size=int(n1)))
    vals1[-1] = 0.0
    vals2 = np.sort(rng.uniform(gap, gap + spread, size=int(n2)))
    vals2[0] = gap
    a1 = _random_conjugation(vals1, rng)
    a2 = _random_conjugation(vals2, rng)
    b = rng.standard_normal((int(n1), int(n2))) + 1j * rng.standard_normal((int(n1), int(n2)))
    b *= (coupling_scale * gap / 2.0) / hilbert_schmidt_norm(b)
    return TwoChannelHamiltonian(a1=a1, a2=a2, b12=b)
