"""scikit-learn style wrappers.

:class:`MeanSuperoperator` is fitted on a positive definite matrix ``D`` and
then maps matrices through the inverse map ``(J_D^f)^{-1}`` (``transform``)
or through ``J_D^f`` itself (``inverse_transform``), so it can sit in a
:class:`sklearn.pipeline.Pipeline` acting on stacks of matrices.
"""
import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import ContractError, check_positive_definite
from .functions import parse_function
from .linalg import eig_herm, inverse_mean_matrix, mean_matrix, psd_check

__all__ = ["MeanSuperoperator"]


class MeanSuperoperator(TransformerMixin, BaseEstimator):
    """Inverse of the mean-weighted multiplication map attached to ``D``.

    Parameters
    ----------
    fn : str or MeanFunction, default="logarithmic"
        Standard function, as a ``family[:param]`` string or instance.
    rel_tol : float, default=1e-10
        Tolerance used by :meth:`cp_report`.

    Attributes
    ----------
    eigvals_ : ndarray of shape (n,)
        Eigenvalues of the fitted ``D`` (ascending).
    eigvecs_ : ndarray of shape (n, n)
        Matching orthonormal eigenvectors.
    mean_matrix_ : ndarray of shape (n, n)
        ``m_f(lam_i, lam_j)``.
    inverse_mean_matrix_ : ndarray of shape (n, n)
        ``1 / m_f(lam_i, lam_j)``.
    n_features_in_ : int
        Matrix dimension ``n``.

    Examples
    --------
    >>> import numpy as np
    >>> est = MeanSuperoperator("geometric").fit(np.diag([1.0, 4.0]))
    >>> est.transform(np.ones((2, 2)))
    array([[1.  , 0.5 ],
           [0.5 , 0.25]])
    """

    def __init__(self, fn="logarithmic", rel_tol=1e-10):
        self.fn = fn
        self.rel_tol = rel_tol

    def fit(self, X, y=None):
        """Learn the eigenbasis of the positive definite matrix ``X``."""
        D = check_positive_definite(X, "D")
        fn = parse_function(self.fn)
        self.eigvals_, self.eigvecs_ = eig_herm(D)
        self.mean_matrix_ = mean_matrix(fn, self.eigvals_)
        self.inverse_mean_matrix_ = inverse_mean_matrix(fn, self.eigvals_)
        self.n_features_in_ = D.shape[0]
        return self

    def _apply(self, X, W):
        A = np.asarray(X)
        single = A.ndim == 2
        if single:
            A = A[None]
        n = self.n_features_in_
        if A.ndim != 3 or A.shape[1:] != (n, n):
            raise ContractError(f"expected matrices of shape ({n}, {n}), got {np.asarray(X).shape}")
        U = self.eigvecs_
        out = U @ ((U.conj().T @ A @ U) * W) @ U.conj().T
        return out[0] if single else out

    def transform(self, X):
        """Apply ``(J_D^f)^{-1}`` to one matrix or a stack of shape (k, n, n)."""
        check_is_fitted(self, "eigvecs_")
        return self._apply(X, self.inverse_mean_matrix_)

    def inverse_transform(self, X):
        """Apply ``J_D^f``."""
        check_is_fitted(self, "eigvecs_")
        return self._apply(X, self.mean_matrix_)

    def cp_report(self, inverse=False):
        """Complete positivity of the fitted map through its Schur multiplier:
        the inverse mean matrix for :meth:`transform`, the mean matrix for
        :meth:`inverse_transform` (``inverse=True``)."""
        check_is_fitted(self, "eigvecs_")
        return psd_check(self.mean_matrix_ if inverse else self.inverse_mean_matrix_, self.rel_tol)
