"""Dense complex matrix kernels: commutators, norms, and exactly unitary exponentials.

All functions accept a single ``(d, d)`` matrix or a stack ``(..., d, d)``;
norms return a float for a single matrix and an array for a stack.  The
exponential of an anti-Hermitian matrix goes through the eigendecomposition
of the Hermitian matrix ``i * theta``, which keeps the result unitary to
machine precision regardless of the size of the exponent.
"""

from __future__ import annotations

import numpy as np

Array = np.ndarray

__all__ = [
    "PreconditionError",
    "DimensionMismatchError",
    "NotAntiHermitianError",
    "as_complex_square",
    "dagger",
    "commutator",
    "frobenius_norm",
    "hermiticity_defect",
    "anti_hermiticity_defect",
    "unitarity_defect",
    "expm_antihermitian",
]


class PreconditionError(ValueError):
    """A numerical precondition was violated (bad step size, broken symmetry, ...)."""


class DimensionMismatchError(ValueError):
    """Operands do not share a common square dimension."""


class NotAntiHermitianError(PreconditionError):
    """Exponent fails the anti-Hermiticity test; usually a buggy exponent formula.

    Attributes:
        defect: Frobenius norm of ``theta + theta†`` that tripped the check.
    """

    def __init__(self, defect: float, tol: float):
        self.defect = float(defect)
        self.tol = float(tol)
        super().__init__(
            f"matrix is not anti-Hermitian: defect {self.defect:.3e} "
            f"exceeds tolerance {self.tol:.3e}"
        )


def as_complex_square(a) -> Array:
    """Coerce to complex128 and validate a (stack of) finite square matrix(es)."""
    arr = np.asarray(a, dtype=np.complex128)
    if arr.ndim < 2 or arr.shape[-1] != arr.shape[-2]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix contains NaN or Inf entries")
    return arr


def dagger(a: Array) -> Array:
    """Conjugate transpose, batched over leading axes."""
    return np.conj(np.swapaxes(a, -1, -2))


def commutator(a, b) -> Array:
    """Return ``ab - ba``."""
    a = as_complex_square(a)
    b = as_complex_square(b)
    if a.shape[-1] != b.shape[-1]:
        raise DimensionMismatchError(
            f"incompatible operands: dims {a.shape[-1]} and {b.shape[-1]}"
        )
    return a @ b - b @ a


def frobenius_norm(a) -> float | Array:
    """Root-sum-square of entry magnitudes, (sum_ij |a_ij|^2)^(1/2)."""
    a = np.asarray(a)
    out = np.sqrt(np.sum(np.abs(a) ** 2, axis=(-2, -1)))
    return float(out) if out.ndim == 0 else out


def hermiticity_defect(a) -> float | Array:
    """``||a - a†||_F``; zero iff Hermitian."""
    a = as_complex_square(a)
    return frobenius_norm(a - dagger(a))


def anti_hermiticity_defect(a) -> float | Array:
    """``||a + a†||_F``; zero iff anti-Hermitian."""
    a = as_complex_square(a)
    return frobenius_norm(a + dagger(a))


def unitarity_defect(u) -> float | Array:
    """``||u†u - I||_F``."""
    u = as_complex_square(u)
    eye = np.eye(u.shape[-1], dtype=np.complex128)
    return frobenius_norm(dagger(u) @ u - eye)


def expm_antihermitian(theta, tol: float = 1e-10) -> Array:
    """Exponential of an anti-Hermitian matrix, exactly unitary up to rounding.

    Diagonalizes the Hermitian matrix ``i*theta = V diag(w) V†`` (real ``w``) and
    returns ``V diag(exp(-i w)) V†``.  Raises :class:`NotAntiHermitianError` when
    ``||theta + theta†||_F > tol * max(1, ||theta||_F)``.
    """
    theta = as_complex_square(theta)
    defect = np.asarray(anti_hermiticity_defect(theta))
    scale = np.maximum(1.0, np.asarray(frobenius_norm(theta)))
    if np.any(defect > tol * scale):
        raise NotAntiHermitianError(float(np.max(defect)), tol)
    w, v = np.linalg.eigh(1j * theta)
    return (v * np.exp(-1j * w)[..., None, :]) @ dagger(v)
