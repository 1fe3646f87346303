"""Dense Hermitian linear algebra for mean matrices.

The eigensolver is a cyclic Jacobi iteration; everything else (positivity
tests, functional calculus, Kubo-Ando type means) is built on it.
"""
from dataclasses import dataclass

import numpy as np

from ._validation import (
    DomainError,
    ParameterError,
    check_hermitian,
    check_spectrum,
)
from .functions import parse_function

__all__ = [
    "PsdReport",
    "MonotonePairReport",
    "derive_rng",
    "eig_herm",
    "fun_calc",
    "inverse_mean_matrix",
    "loewner_matrix",
    "matrix_mean",
    "mean_matrix",
    "monotone_pair_test",
    "psd_check",
    "random_psd",
]


def eig_herm(M, tol=1e-15, max_sweeps=60):
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Parameters
    ----------
    M : array_like, shape (n, n)
        Hermitian (real symmetric or complex) matrix.
    tol : float
        Sweeps stop once the off-diagonal Frobenius norm falls below
        ``tol * ||M||_F``.

    Returns
    -------
    w : ndarray, shape (n,)
        Eigenvalues in ascending order.
    V : ndarray, shape (n, n)
        Unitary matrix whose columns are the matching eigenvectors.
    """
    A = check_hermitian(M, "M").copy()
    n = A.shape[0]
    V = np.eye(n, dtype=A.dtype)
    scale = np.linalg.norm(A)
    if n == 1 or scale == 0.0:
        return np.real(np.diag(A)).copy(), V
    threshold = tol * scale
    iu = np.triu_indices(n, 1)
    for _ in range(max_sweeps):
        if np.sqrt(2.0) * np.linalg.norm(A[iu]) <= threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                b = abs(apq)
                if b <= threshold * 1e-3:
                    continue
                phase = apq / b
                theta = (A[q, q].real - A[p, p].real) / (2.0 * b)
                t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # J = diag(1, conj(phase)) @ [[c, s], [-s, c]] on the (p, q) plane
                J = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]], dtype=A.dtype)
                idx = [p, q]
                A[:, idx] = A[:, idx] @ J
                A[idx, :] = J.conj().T @ A[idx, :]
                A[p, q] = A[q, p] = 0.0
                V[:, idx] = V[:, idx] @ J
    w = np.real(np.diag(A)).copy()
    order = np.argsort(w, kind="stable")
    return w[order], V[:, order]


@dataclass
class PsdReport:
    """Outcome of a positive semidefiniteness test.

    ``witness`` is a unit vector with a negative quadratic form
    (``form_value``) when the matrix is not PSD.
    """

    min_eig: float
    is_psd: bool
    tol_used: float
    witness: np.ndarray | None = None
    form_value: float | None = None

    def to_dict(self):
        out = {"min_eig": repr(float(self.min_eig)), "is_psd": self.is_psd, "tol_used": self.tol_used}
        if self.witness is not None:
            w = self.witness
            out["witness"] = [[float(z.real), float(z.imag)] for z in w] if np.iscomplexobj(w) else [float(z) for z in w]
            out["form_value"] = repr(float(self.form_value))
        return out


def psd_check(M, rel_tol=1e-10):
    """Test ``M >= 0`` with tolerance ``rel_tol * max(1, ||M||_inf)``."""
    M = check_hermitian(M, "M")
    w, V = eig_herm(M)
    norm_inf = float(np.max(np.sum(np.abs(M), axis=1))) if M.size else 0.0
    tol = rel_tol * max(1.0, norm_inf)
    min_eig = float(w[0])
    if min_eig >= -tol:
        return PsdReport(min_eig, True, tol)
    v = V[:, 0]
    form = float(np.real(np.vdot(v, M @ v)))
    return PsdReport(min_eig, False, tol, v, form)


def mean_matrix(fn, lam):
    """``X_ij = m_f(lam_i, lam_j)``."""
    fn = parse_function(fn)
    lam = check_spectrum(lam)
    X = fn.mean(lam[:, None], lam[None, :])
    X = np.atleast_2d(X)
    X = 0.5 * (X + X.T)
    np.fill_diagonal(X, lam)
    return X


def inverse_mean_matrix(fn, lam):
    """``T_ij = 1 / m_f(lam_i, lam_j)``, the entrywise reciprocal of
    :func:`mean_matrix`."""
    return 1.0 / mean_matrix(fn, lam)


def loewner_matrix(g, lam, dg=None, rtol=1e-8):
    """Divided-difference (Loewner) matrix of ``g`` over the spectrum ``lam``.

    Near-coincident eigenvalues (``|lam_i - lam_j| < rtol * max``) use the
    derivative at the midpoint. ``dg`` defaults to a central difference.
    """
    lam = check_spectrum(lam)
    if dg is None:
        def dg(x):
            h = 1e-6 * max(x, 1e-300)
            return (g(x + h) - g(x - h)) / (2.0 * h)
    n = lam.size
    gl = np.array([g(x) for x in lam], dtype=float)
    L = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            a, b = lam[i], lam[j]
            if abs(a - b) < rtol * max(a, b):
                L[i, j] = dg(0.5 * (a + b))
            else:
                L[i, j] = (gl[i] - gl[j]) / (a - b)
    return 0.5 * (L + L.T)


def fun_calc(f, A, domain=(0.0, np.inf)):
    """Apply a scalar function to a Hermitian matrix: ``V f(w) V*``.

    ``domain`` is the open interval on which ``f`` is defined; a spectrum
    outside it raises :class:`DomainError`.
    """
    w, V = eig_herm(A)
    lo, hi = domain
    if np.any(w <= lo) or np.any(w >= hi):
        raise DomainError(f"spectrum [{w[0]:.3g}, {w[-1]:.3g}] leaves the domain {domain}")
    fw = np.asarray(f(w), dtype=float)
    out = (V * fw) @ V.conj().T
    return 0.5 * (out + out.conj().T)


def matrix_mean(fn, A, B):
    """Matrix mean ``A^(1/2) f(A^(-1/2) B A^(-1/2)) A^(1/2)``."""
    fn = parse_function(fn)
    A = check_hermitian(A, "A")
    B = check_hermitian(B, "B")
    if A.shape != B.shape:
        raise ParameterError("A and B must have the same shape")
    w, V = eig_herm(A)
    if w[0] <= 0:
        raise DomainError("A must be positive definite")
    sqrt_a = (V * np.sqrt(w)) @ V.conj().T
    isqrt_a = (V / np.sqrt(w)) @ V.conj().T
    inner = isqrt_a @ B @ isqrt_a
    mid = fun_calc(fn, 0.5 * (inner + inner.conj().T))
    out = sqrt_a @ mid @ sqrt_a
    return 0.5 * (out + out.conj().T)


def derive_rng(seed, *index):
    """Independent generator for ``(seed, *index)``.

    Per-trial streams are derived through :class:`numpy.random.SeedSequence`
    so any single trial can be regenerated without replaying earlier ones.
    """
    return np.random.default_rng(np.random.SeedSequence([int(seed) & (2**64 - 1), *map(int, index)]))


def random_psd(k, rng):
    """``G G^T`` with standard normal ``G`` (positive definite almost surely)."""
    G = rng.standard_normal((k, k))
    return G @ G.T


@dataclass
class MonotonePairReport:
    trials: int
    violations: int
    worst_min_eig: float
    worst_trial: int
    witness: tuple | None = None


def _pair_trial(f, k, seed, index, rel_tol):
    rng = derive_rng(seed, index)
    P = random_psd(k, rng)
    Q = random_psd(k, rng)
    A, B = P, P + Q
    diff = fun_calc(f, B) - fun_calc(f, A)
    w, _ = eig_herm(diff)
    scale = max(1.0, float(np.abs(diff).max()))
    return float(w[0]), w[0] < -rel_tol * scale, (A, B)


def monotone_pair_test(fn, k, trials=100, seed=0, rel_tol=1e-10, jobs=1):
    """Random check of ``A <= B  =>  f(A) <= f(B)``.

    ``fn`` may be a :class:`MeanFunction`, a ``family[:param]`` string or any
    vectorized scalar callable. Pairs are ``A = P``, ``B = P + Q`` with ``P``
    and ``Q`` from :func:`random_psd`, trial ``i`` drawing from
    ``derive_rng(seed, i)``.
    """
    if not 1 <= k <= 8:
        raise ParameterError("dimension k must lie in [1, 8]")
    f = fn if callable(fn) else parse_function(fn)
    if jobs and jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(jobs) as pool:
            results = list(pool.map(_pair_trial, [f] * trials, [k] * trials, [seed] * trials, range(trials), [rel_tol] * trials))
    else:
        results = [_pair_trial(f, k, seed, i, rel_tol) for i in range(trials)]
    worst = min(range(trials), key=lambda i: (results[i][0], i))
    violations = sum(1 for r in results if r[1])
    witness = results[worst][2] if results[worst][1] else None
    return MonotonePairReport(trials, violations, results[worst][0], worst, witness)
