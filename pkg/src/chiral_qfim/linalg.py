"""Dense complex-matrix kernel.

Matrix products, adjoints, commutators, and a Hermitian eigendecomposition
for the operator sizes this package works with (a few hundred rows at most).
Matrices are plain ``numpy.ndarray`` objects with dtype ``complex128``;
scalars are Python/NumPy complex numbers.  Finiteness (no NaN/Inf) is
enforced whenever a matrix crosses a public entry point.

Two eigensolver backends are provided:

* ``"lapack"`` (default): ``numpy.linalg.eigh``, fast and robust.
* ``"jacobi"``: cyclic Jacobi rotations in pure Python/NumPy.  Orders of
  magnitude slower, but independent of LAPACK; it exists as a verification
  backend and is cross-checked against ``"lapack"`` in the test suite.
  See ``benchmarks/bench_eigh.py`` for timings.

All tolerances are absolute-relative hybrids, ``tol * max(1, scale)``,
because entries span [0, 1] but can be exactly 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HERMITICITY_TOL = 1e-12
EIGEN_RESIDUAL_TOL = 1e-10
JACOBI_SWEEP_BUDGET = 100
JACOBI_OFF_TOL = 1e-14  # times ||A||_F


class DimensionMismatchError(ValueError):
    """Operands with incompatible shapes."""


class NonHermitianError(ValueError):
    """A matrix required to be Hermitian exceeds the Hermiticity tolerance."""


class EigenConvergenceError(RuntimeError):
    """Eigensolver failed to converge or to meet its residual bounds."""

    def __init__(self, message: str, residual: float | None = None):
        if residual is not None:
            message = f"{message} (residual {residual:.3e})"
        super().__init__(message)
        self.residual = residual


def as_complex_matrix(a) -> np.ndarray:
    """Coerce to a 2-D complex128 array, rejecting non-finite entries."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise DimensionMismatchError(f"expected a 2-D matrix, got ndim={m.ndim}")
    if m.shape[0] == 0 or m.shape[1] == 0:
        raise DimensionMismatchError(f"empty matrix of shape {m.shape}")
    if not np.all(np.isfinite(m.real)) or not np.all(np.isfinite(m.imag)):
        raise ValueError("matrix contains NaN or Inf entries")
    return m


def dagger(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return a.conj().T


def matmul(a, b) -> np.ndarray:
    """Matrix product with an explicit conformability check."""
    a = as_complex_matrix(a)
    b = as_complex_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise DimensionMismatchError(
            f"cannot multiply {a.shape[0]}x{a.shape[1]} by {b.shape[0]}x{b.shape[1]}:"
            f" inner dimensions {a.shape[1]} != {b.shape[0]}"
        )
    return a @ b


def commutator(a, b) -> np.ndarray:
    """[A, B] = AB - BA for square matrices of the same shape."""
    a = as_complex_matrix(a)
    b = as_complex_matrix(b)
    if a.shape != b.shape or a.shape[0] != a.shape[1]:
        raise DimensionMismatchError(
            f"commutator needs equal square shapes, got {a.shape} and {b.shape}"
        )
    return a @ b - b @ a


def hermiticity_defect(a: np.ndarray) -> float:
    """max |A - A†|."""
    return float(np.max(np.abs(a - a.conj().T)))


def is_hermitian(a: np.ndarray, tol: float = HERMITICITY_TOL) -> bool:
    scale = float(np.max(np.abs(a))) if a.size else 0.0
    return hermiticity_defect(a) <= tol * max(1.0, scale)


def require_hermitian(a, tol: float = HERMITICITY_TOL) -> np.ndarray:
    """Validate and return the exactly Hermitian part (A + A†)/2."""
    a = as_complex_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got {a.shape}")
    scale = float(np.max(np.abs(a)))
    defect = hermiticity_defect(a)
    if defect > tol * max(1.0, scale):
        raise NonHermitianError(
            f"matrix is not Hermitian: max|A - A†| = {defect:.3e}"
            f" exceeds {tol:.1e} * max(1, {scale:.3e})"
        )
    return 0.5 * (a + a.conj().T)


@dataclass(frozen=True)
class EigenDecomposition:
    """Spectral factorization A = V diag(w) V† of a Hermitian matrix.

    ``eigenvalues`` are real and ascending; ``eigenvectors`` holds the
    corresponding orthonormal eigenvectors as columns.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T

    def reconstruction_residual(self, a: np.ndarray) -> float:
        return float(np.max(np.abs(self.reconstruct() - a)))

    def orthonormality_residual(self) -> float:
        v = self.eigenvectors
        return float(np.max(np.abs(v.conj().T @ v - np.eye(self.dim))))


def hermitian_eigen(
    a,
    backend: str = "lapack",
    *,
    validate: bool = False,
    sweep_budget: int = JACOBI_SWEEP_BUDGET,
    hermiticity_tol: float = HERMITICITY_TOL,
) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending.

    The input is validated to be square and Hermitian within
    ``hermiticity_tol * max(1, max|A|)`` and symmetrized before solving.
    With ``validate=True`` the reconstruction and orthonormality residuals
    are checked against ``1e-10 * max(1, max|A|)`` after solving.
    """
    h = require_hermitian(a, tol=hermiticity_tol)
    if backend == "lapack":
        # a real symmetric matrix solves ~4x faster and yields real
        # eigenvectors, which downstream products inherit
        w, v = np.linalg.eigh(h.real if not h.imag.any() else h)
    elif backend == "jacobi":
        w, v = _jacobi_eigh(h, sweep_budget)
    else:
        raise ValueError(f"unknown eigensolver backend {backend!r}")
    decomp = EigenDecomposition(eigenvalues=np.asarray(w, dtype=float), eigenvectors=v)
    if validate:
        scale = max(1.0, float(np.max(np.abs(h))))
        rec = decomp.reconstruction_residual(h)
        orth = decomp.orthonormality_residual()
        if rec > EIGEN_RESIDUAL_TOL * scale or orth > EIGEN_RESIDUAL_TOL:
            raise EigenConvergenceError(
                f"eigendecomposition residuals out of bounds"
                f" (reconstruction {rec:.3e}, orthonormality {orth:.3e})",
                residual=max(rec, orth),
            )
    return decomp


def _offdiag_norm(h: np.ndarray) -> float:
    off = h - np.diag(np.diag(h))
    return float(np.linalg.norm(off))


def _jacobi_eigh(h: np.ndarray, sweep_budget: int) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi rotations for a complex Hermitian matrix.

    Each (p, q) pass first strips the phase of h[p,q] and then applies the
    classical symmetric rotation that zeroes it.  Convergence is declared
    when the off-diagonal Frobenius norm drops below
    ``JACOBI_OFF_TOL * ||A||_F``.
    """
    n = h.shape[0]
    h = h.astype(np.complex128, copy=True)
    v = np.eye(n, dtype=np.complex128)
    if n == 1:
        return np.array([h[0, 0].real]), v

    threshold = JACOBI_OFF_TOL * float(np.linalg.norm(h))
    converged = False
    for _ in range(sweep_budget):
        if _offdiag_norm(h) <= threshold:
            converged = True
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = h[p, q]
                mag = abs(apq)
                if mag == 0.0:
                    continue
                phase = apq / mag
                app = h[p, p].real
                aqq = h[q, q].real
                tau = (aqq - app) / (2.0 * mag)
                if tau == 0.0:
                    t = 1.0
                else:
                    t = np.sign(tau) / (abs(tau) + np.hypot(1.0, tau))
                c = 1.0 / np.hypot(1.0, t)
                s = t * c
                pbar = np.conj(phase)
                # H <- U† H U with U = [[c, s],[-s*pbar, c*pbar]] on (p, q)
                col_p = h[:, p].copy()
                col_q = h[:, q].copy()
                h[:, p] = c * col_p - s * pbar * col_q
                h[:, q] = s * col_p + c * pbar * col_q
                row_p = h[p, :].copy()
                row_q = h[q, :].copy()
                h[p, :] = c * row_p - s * phase * row_q
                h[q, :] = s * row_p + c * phase * row_q
                h[p, q] = 0.0
                h[q, p] = 0.0
                h[p, p] = h[p, p].real
                h[q, q] = h[q, q].real
                col_p = v[:, p].copy()
                col_q = v[:, q].copy()
                v[:, p] = c * col_p - s * pbar * col_q
                v[:, q] = s * col_p + c * pbar * col_q
    else:
        converged = _offdiag_norm(h) <= threshold
    if not converged:
        raise EigenConvergenceError(
            f"Jacobi sweep budget of {sweep_budget} exhausted",
            residual=_offdiag_norm(h),
        )
    w = np.real(np.diag(h))
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]
