"""Input validation helpers shared by the public functions and estimators."""
import numpy as np


class DomainError(ValueError):
    """An argument lies outside the domain of the requested operation."""


class ParameterError(ValueError):
    """A family parameter or shape parameter is outside its admissible range."""


class ContractError(ValueError):
    """An input violates a structural precondition (e.g. Hermiticity)."""


class QuadratureError(RuntimeError):
    """An integral did not reach the requested accuracy."""

    def __init__(self, message, error_estimate=None):
        super().__init__(message)
        self.error_estimate = error_estimate


def check_spectrum(lam):
    """Return ``lam`` as a 1-d float array of strictly positive entries."""
    arr = np.atleast_1d(np.asarray(lam, dtype=float))
    if arr.ndim != 1 or arr.size == 0:
        raise DomainError("spectrum must be a non-empty 1-d sequence")
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise DomainError("spectrum entries must be finite and strictly positive")
    return arr


def check_square(M, name="matrix"):
    arr = np.asarray(M)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ContractError(f"{name} must be square, got shape {arr.shape}")
    if not np.issubdtype(arr.dtype, np.number):
        raise ContractError(f"{name} must be numeric")
    if np.iscomplexobj(arr):
        return arr.astype(complex)
    return arr.astype(float)


def hermitian_defect(M):
    M = np.asarray(M)
    scale = max(1.0, float(np.max(np.abs(M)))) if M.size else 1.0
    return float(np.max(np.abs(M - M.conj().T))) / scale if M.size else 0.0


def check_hermitian(M, name="matrix", rtol=1e-10):
    """Validate Hermiticity and return the symmetrized matrix.

    Real input stays real. The defect is measured relative to the largest
    entry, so the check is scale free.
    """
    arr = check_square(M, name)
    if hermitian_defect(arr) > rtol:
        raise ContractError(f"{name} is not Hermitian (relative defect {hermitian_defect(arr):.3g})")
    return 0.5 * (arr + arr.conj().T)


def check_positive_definite(M, name="matrix"):
    arr = check_hermitian(M, name)
    if np.linalg.eigvalsh(arr)[0] <= 0:
        raise DomainError(f"{name} must be positive definite")
    return arr


def check_grid(grid, name="grid"):
    arr = np.atleast_1d(np.asarray(grid, dtype=float))
    if arr.size == 0:
        raise DomainError(f"{name} must be non-empty")
    if np.any(arr <= 0) or not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} entries must be finite and > 0")
    return arr


def log_grid(lo=1e-4, hi=1e4, num=101):
    """Default verification grid: log-spaced points on ``[lo, hi]``."""
    return np.logspace(np.log10(lo), np.log10(hi), num)
