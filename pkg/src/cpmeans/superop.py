"""Superoperators on n x n matrices: the mean-weighted map J_D^f, its inverse,
Hilbert-Schmidt matrices, Choi matrices and quantum channels.

Conventions
-----------
* Matrix units ``E_ij`` are ordered row-major and ``vec`` is row-major
  (``A.ravel()``), so ``vec(X A Y) = kron(X, Y.T) @ vec(A)``.
* The Choi matrix is ``sum_ij kron(E_ij, S(E_ij))`` (input factor first).
"""
from dataclasses import dataclass, field
import json

import numpy as np

from ._validation import ContractError, DomainError, ParameterError, check_hermitian, check_square
from .functions import parse_function
from .linalg import derive_rng, eig_herm, inverse_mean_matrix, mean_matrix, psd_check

__all__ = [
    "DegenerateChannelError",
    "KrausChannel",
    "PositiveMatrix",
    "SuperOperator",
    "adjoint_channel",
    "apply_J",
    "apply_beta",
    "beta_map",
    "choi",
    "cp_check",
    "hadamard_map",
    "hermitian_basis",
    "hs_matrix",
    "identity_channel",
    "J_map",
    "lemma1_equivalence",
    "lemma1_reports",
    "monotonicity_gap",
    "monotonicity_sweep",
    "random_cptp",
    "random_density",
]


class DegenerateChannelError(DomainError):
    """The channel output ``alpha(D)`` is not positive definite."""


class PositiveMatrix:
    """A positive definite matrix with its eigendecomposition cached.

    Parameters
    ----------
    D : array_like
        Hermitian positive definite matrix, or a 1-d array of positive
        eigenvalues (interpreted as ``diag(D)``).
    """

    def __init__(self, D):
        D = np.asarray(D)
        if D.ndim == 1:
            D = np.diag(D)
        self.matrix = check_hermitian(D, "D")
        self.eigvals, self.eigvecs = eig_herm(self.matrix)
        if self.eigvals[0] <= 0:
            raise DomainError(f"D must be positive definite (min eigenvalue {self.eigvals[0]:.3g})")

    @property
    def n(self):
        return self.matrix.shape[0]

    def to_eigenbasis(self, A):
        U = self.eigvecs
        return U.conj().T @ A @ U

    def from_eigenbasis(self, B):
        U = self.eigvecs
        return U @ B @ U.conj().T

    def __repr__(self):
        return f"PositiveMatrix(n={self.n}, eigvals={np.array2string(self.eigvals, precision=4)})"


def _as_positive(D):
    return D if isinstance(D, PositiveMatrix) else PositiveMatrix(D)


def _hadamard_in_eigenbasis(D, A, W):
    A = check_square(A, "A")
    if A.shape[0] != D.n:
        raise ContractError(f"dimension mismatch: D is {D.n}x{D.n}, A is {A.shape}")
    return D.from_eigenbasis(D.to_eigenbasis(A) * W)


def apply_J(fn, D, A):
    """``J_D^f(A)``: multiply the entries of ``A`` (in the eigenbasis of ``D``)
    by ``m_f(lam_i, lam_j)``."""
    D = _as_positive(D)
    return _hadamard_in_eigenbasis(D, A, mean_matrix(fn, D.eigvals))


def apply_beta(fn, D, A):
    """``(J_D^f)^{-1}(A)``: Hadamard multiplication by the inverse mean matrix
    in the eigenbasis of ``D``."""
    D = _as_positive(D)
    return _hadamard_in_eigenbasis(D, A, inverse_mean_matrix(fn, D.eigvals))


def _matrix_units(n):
    for i in range(n):
        for j in range(n):
            E = np.zeros((n, n))
            E[i, j] = 1.0
            yield i, j, E


def hs_matrix(S):
    """Matrix of ``S`` in the row-major matrix-unit basis (columns are
    ``vec(S(E_ij))``)."""
    if isinstance(S, SuperOperator) and S._hs is not None:
        return S._hs
    n_in, n_out, action = S.n_in, S.n_out, S.action
    cols = [np.asarray(action(E)).ravel() for _, _, E in _matrix_units(n_in)]
    H = np.stack(cols, axis=1)
    assert H.shape == (n_out * n_out, n_in * n_in)
    return H


@dataclass(frozen=True)
class SuperOperator:
    """A linear map from ``n_in x n_in`` to ``n_out x n_out`` matrices.

    The Hilbert-Schmidt matrix is computed eagerly, so instances can be shared
    across threads once built.
    """

    n_in: int
    n_out: int
    action: object = field(repr=False)
    name: str = ""
    _hs: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self._hs is None:
            object.__setattr__(self, "_hs", hs_matrix(self))

    def __call__(self, A):
        return self.action(A)

    @property
    def hs(self):
        return self._hs

    def apply_hs(self, A):
        A = np.asarray(A)
        return (self._hs @ A.ravel()).reshape(self.n_out, self.n_out)

    def compose(self, other):
        """``self o other``."""
        if other.n_out != self.n_in:
            raise ContractError("dimension mismatch in composition")
        return SuperOperator(other.n_in, self.n_out, lambda A: self.action(other.action(A)), f"{self.name}*{other.name}")


def hadamard_map(T):
    """The Schur multiplier ``A -> A o T``."""
    T = check_square(T, "T")
    n = T.shape[0]
    return SuperOperator(n, n, lambda A: np.asarray(A) * T, "hadamard")


def J_map(fn, D):
    D = _as_positive(D)
    fn = parse_function(fn)
    W = mean_matrix(fn, D.eigvals)
    return SuperOperator(D.n, D.n, lambda A: _hadamard_in_eigenbasis(D, A, W), f"J[{fn}]")


def beta_map(fn, D):
    D = _as_positive(D)
    fn = parse_function(fn)
    W = inverse_mean_matrix(fn, D.eigvals)
    return SuperOperator(D.n, D.n, lambda A: _hadamard_in_eigenbasis(D, A, W), f"beta[{fn}]")


def choi(S, rtol=1e-10):
    """Choi matrix ``sum_ij kron(E_ij, S(E_ij))``.

    Raises :class:`ContractError` when ``S`` is not Hermiticity preserving
    (the Choi matrix of such a map is not Hermitian).
    """
    n_in, n_out = S.n_in, S.n_out
    H = hs_matrix(S)
    C = np.zeros((n_in * n_out, n_in * n_out), dtype=complex if np.iscomplexobj(H) else float)
    for i in range(n_in):
        for j in range(n_in):
            C[i * n_out:(i + 1) * n_out, j * n_out:(j + 1) * n_out] = H[:, i * n_in + j].reshape(n_out, n_out)
    scale = max(1.0, float(np.abs(C).max()))
    if np.abs(C - C.conj().T).max() > rtol * scale:
        raise ContractError("map is not Hermiticity preserving")
    return 0.5 * (C + C.conj().T)


def cp_check(S, rel_tol=1e-10):
    """Complete positivity via positivity of the Choi matrix."""
    return psd_check(choi(S), rel_tol)


def lemma1_reports(T, rel_tol=1e-10):
    """``(psd_check(T), cp_check(A -> A o T))`` for a symmetric ``T``."""
    T = check_hermitian(T, "T")
    return psd_check(T, rel_tol), cp_check(hadamard_map(T), rel_tol)


def lemma1_equivalence(fn=None, lam=None, rel_tol=1e-10, T=None):
    """Whether positivity of ``T`` and complete positivity of ``A -> A o T``
    give the same verdict. Pass either ``(fn, lam)`` or ``T`` directly."""
    if T is None:
        T = inverse_mean_matrix(fn, lam)
    t_rep, c_rep = lemma1_reports(T, rel_tol)
    return t_rep.is_psd == c_rep.is_psd


@dataclass
class KrausChannel:
    """Channel ``A -> sum_i K_i A K_i^*``."""

    kraus_ops: list

    def __post_init__(self):
        ops = [np.atleast_2d(np.asarray(K, dtype=complex)) for K in self.kraus_ops]
        if not ops:
            raise ParameterError("at least one Kraus operator is required")
        shape = ops[0].shape
        if any(K.shape != shape for K in ops):
            raise ParameterError("Kraus operators must share one shape")
        self.kraus_ops = ops

    @property
    def n_in(self):
        return self.kraus_ops[0].shape[1]

    @property
    def n_out(self):
        return self.kraus_ops[0].shape[0]

    def __call__(self, A):
        A = np.asarray(A)
        return sum(K @ A @ K.conj().T for K in self.kraus_ops)

    def trace_defect(self):
        S = sum(K.conj().T @ K for K in self.kraus_ops)
        return float(np.abs(S - np.eye(self.n_in)).max())

    def as_superoperator(self):
        return SuperOperator(self.n_in, self.n_out, self, "channel")

    def to_json(self):
        return json.dumps([[[[float(z.real), float(z.imag)] for z in row] for row in K] for K in self.kraus_ops])

    @classmethod
    def from_json(cls, text):
        data = json.loads(text)
        return cls([np.array([[complex(re, im) for re, im in row] for row in K]) for K in data])


def identity_channel(n):
    return KrausChannel([np.eye(n)])


def random_cptp(n_in, n_out, n_kraus, seed=0):
    """Random channel from a Haar-like isometry ``C^{n_in} -> C^{n_kraus n_out}``.

    The stacked isometry is the Q factor of a complex Gaussian matrix, phase
    fixed so the result is a deterministic function of ``seed``.
    """
    if n_kraus < 1 or n_in < 1 or n_out < 1:
        raise ParameterError("dimensions and n_kraus must be positive")
    if n_kraus * n_out < n_in:
        raise ParameterError(f"n_kraus * n_out = {n_kraus * n_out} < n_in = {n_in}: no isometry exists")
    rng = derive_rng(seed, n_in, n_out, n_kraus)
    Z = rng.standard_normal((n_kraus * n_out, n_in)) + 1j * rng.standard_normal((n_kraus * n_out, n_in))
    Q, R = np.linalg.qr(Z)
    d = np.diag(R)
    Q = Q * (d / np.abs(d))
    return KrausChannel([Q[i * n_out:(i + 1) * n_out, :] for i in range(n_kraus)])


def adjoint_channel(alpha):
    """Hilbert-Schmidt adjoint ``B -> sum_i K_i^* B K_i``."""
    ops = alpha.kraus_ops

    def action(B):
        B = np.asarray(B)
        return sum(K.conj().T @ B @ K for K in ops)

    return SuperOperator(alpha.n_out, alpha.n_in, action, "adjoint")


def hermitian_basis(n):
    """Orthonormal (Hilbert-Schmidt) basis of the real space of ``n x n``
    Hermitian matrices."""
    basis = []
    for i in range(n):
        E = np.zeros((n, n), dtype=complex)
        E[i, i] = 1.0
        basis.append(E)
    s = 1.0 / np.sqrt(2.0)
    for i in range(n):
        for j in range(i + 1, n):
            E = np.zeros((n, n), dtype=complex)
            E[i, j] = E[j, i] = s
            basis.append(E)
            F = np.zeros((n, n), dtype=complex)
            F[i, j] = -1j * s
            F[j, i] = 1j * s
            basis.append(F)
    return basis


def monotonicity_gap(fn, D, alpha, rel_tol=1e-12):
    """Smallest eigenvalue of ``beta_D - alpha^* beta_{alpha(D)} alpha`` on
    Hermitian matrices, with ``beta = (J^f)^{-1}``.

    ``D`` is normalized to unit trace first. A nonnegative result (up to
    rounding) certifies the monotonicity inequality for this instance.
    """
    fn = parse_function(fn)
    D = check_hermitian(D.matrix if isinstance(D, PositiveMatrix) else D, "D")
    if D.shape[0] != alpha.n_in:
        raise ContractError("D and alpha have incompatible dimensions")
    D = PositiveMatrix(D / np.real(np.trace(D)))
    aD = alpha(D.matrix)
    aD = 0.5 * (aD + aD.conj().T)
    w = np.linalg.eigvalsh(aD)
    if w[0] <= rel_tol * max(1.0, w[-1]):
        raise DegenerateChannelError(f"alpha(D) is singular (min eigenvalue {w[0]:.3g})")
    aD = PositiveMatrix(aD)
    W_in = inverse_mean_matrix(fn, D.eigvals)
    W_out = inverse_mean_matrix(fn, aD.eigvals)
    adj = adjoint_channel(alpha)
    basis = hermitian_basis(D.n)
    images = []
    for H in basis:
        lhs = _hadamard_in_eigenbasis(D, H, W_in)
        rhs = adj(_hadamard_in_eigenbasis(aD, alpha(H), W_out))
        images.append(lhs - rhs)
    G = np.array([[np.real(np.vdot(Ha, Y)) for Y in images] for Ha in basis])
    G = 0.5 * (G + G.T)
    return float(eig_herm(G)[0][0])


def random_density(n, rng):
    """Random full-rank density matrix ``G G^* / tr`` with complex Gaussian ``G``."""
    G = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    D = G @ G.conj().T
    return D / np.real(np.trace(D))


def _gap_row(fn, n, m, seed, n_kraus):
    rng = derive_rng(seed, n, m, 7)
    D = random_density(n, rng)
    alpha = random_cptp(n, m, n_kraus, seed)
    return str(fn), n, m, seed, monotonicity_gap(fn, D, alpha)


def monotonicity_sweep(fns, ns=(2, 3), ms=(2, 3), seeds=range(25), n_kraus=3, jobs=1):
    """Rows ``(fn, n, m, seed, gap)`` over the product of the arguments, in
    deterministic order."""
    tasks = [(parse_function(f), n, m, s, n_kraus) for f in fns for n in ns for m in ms for s in seeds]
    if jobs and jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(jobs) as pool:
            return list(pool.map(_gap_row, *zip(*tasks)))
    return [_gap_row(*t) for t in tasks]
