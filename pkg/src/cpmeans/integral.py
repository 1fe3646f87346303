"""Integral and series representations of the inverse maps, used as
independent cross-checks of the Hadamard (eigenbasis) forms.

None of these routines diagonalize ``D``: resolvents come from linear solves,
exponentials from :func:`scipy.linalg.expm` and fractional powers from
:func:`scipy.linalg.fractional_matrix_power`.

Semi-infinite integrals ``int_0^inf g(s) ds`` are mapped onto ``(0, 1)`` by
``s = (u / (1 - u))**k`` and integrated with adaptive Gauss-Kronrod
(:func:`scipy.integrate.quad_vec`). If ``g(s) ~ s**a`` at 0 and ``s**(-b)`` at
infinity, any ``k >= max(1/(a+1), 1/(b-1))`` leaves a bounded integrand; we
take twice that so it vanishes at both ends.
"""
from dataclasses import dataclass
import math

import numpy as np
from scipy import integrate
from scipy.linalg import expm, fractional_matrix_power, sqrtm

from ._validation import DomainError, ParameterError, QuadratureError, check_hermitian, check_spectrum
from .functions import MeanFunction
from .linalg import derive_rng
from .superop import apply_beta

__all__ = [
    "QuadratureSpec",
    "beta_arith_integral",
    "beta_gamma_composition",
    "beta_heinz_sylvester",
    "beta_log_integral",
    "beta_sqrt_double_exp",
    "beta_wyd_double_integral",
    "crosscheck",
    "gamma_t",
    "hansen_coefficients",
    "hansen_series_T",
    "phas_pointwise",
    "sylvester_residual",
]


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances for the adaptive Gauss-Kronrod rule.

    Nested integrals run the inner level ten times tighter than the outer.
    """

    abs_tol: float = 1e-13
    rel_tol: float = 1e-11
    max_subdivisions: int = 10000

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0 and self.max_subdivisions >= 1):
            raise ParameterError("tolerances must be > 0 and max_subdivisions >= 1")

    def inner(self):
        return QuadratureSpec(self.abs_tol / 10, self.rel_tol / 10, self.max_subdivisions)


DEFAULT_QUAD = QuadratureSpec()


def _power_map_exponent(a, b):
    return 2.0 * max(1.0 / (a + 1.0), 1.0 / (b - 1.0) if b > 1 else 1.0)


def _semi_infinite(g, shape, dtype, k, q):
    zero = np.zeros(shape, dtype=dtype)

    def h(u):
        if u <= 0.0 or u >= 1.0:
            return zero
        r = u / (1.0 - u)
        s = r**k
        if not np.isfinite(s):
            return zero
        val = np.asarray(g(s), dtype=dtype) * (k * r ** (k - 1.0) / (1.0 - u) ** 2)
        return val if np.all(np.isfinite(val)) else zero

    value, err, info = integrate.quad_vec(
        h, 0.0, 1.0, epsabs=q.abs_tol, epsrel=q.rel_tol, limit=q.max_subdivisions, norm="max", full_output=True
    )
    if info.status != 0:
        raise QuadratureError(f"quadrature did not converge (status {info.status}, error {err:.3g})", err)
    return value, float(err)


def _prepare(D, A):
    D = check_hermitian(D, "D")
    A = check_hermitian(A, "A")
    if D.shape != A.shape:
        raise ParameterError("D and A must have the same shape")
    if np.linalg.eigvalsh(D)[0] <= 0:
        raise DomainError("D must be positive definite")
    dtype = complex if (np.iscomplexobj(D) or np.iscomplexobj(A)) else float
    return D.astype(dtype), A.astype(dtype), dtype


def _hermitize(M):
    return 0.5 * (M + M.conj().T)


def _frac_power(D, p, dtype):
    out = fractional_matrix_power(D, p)
    if dtype is float:
        out = np.real(out)
    return _hermitize(out)


def beta_arith_integral(D, A, q=DEFAULT_QUAD):
    """``2 int_0^inf exp(-sD) A exp(-sD) ds``; returns ``(value, error)``."""
    D, A, dtype = _prepare(D, A)

    def g(s):
        E = expm(-s * D)
        return 2.0 * E @ A @ E

    value, err = _semi_infinite(g, A.shape, dtype, 1.0, q)
    return _hermitize(value), err


def beta_log_integral(D, A, q=DEFAULT_QUAD):
    """``int_0^inf (D + s)^-1 A (D + s)^-1 ds``; returns ``(value, error)``."""
    D, A, dtype = _prepare(D, A)
    eye = np.eye(D.shape[0])

    def g(s):
        R = np.linalg.inv(D + s * eye)
        return R @ A @ R

    value, err = _semi_infinite(g, A.shape, dtype, _power_map_exponent(0.0, 2.0), q)
    return _hermitize(value), err


def beta_heinz_sylvester(t, D, A, q=DEFAULT_QUAD):
    """Solve ``D^t Y D^(1-t) + D^(1-t) Y D^t = 2A`` through
    ``Y = int_0^inf exp(-s X) C exp(-s X) ds`` with ``X = D^(1-2t)`` and
    ``C = 2 D^-t A D^-t``.

    At ``t = 1/2`` the solution is ``D^-1/2 A D^-1/2`` in closed form.
    Returns ``(Y, error)``.
    """
    if not 0.0 <= t <= 1.0:
        raise ParameterError("t must lie in [0, 1]")
    D, A, dtype = _prepare(D, A)
    if t == 0.5:
        R = _frac_power(D, -0.5, dtype)
        return _hermitize(R @ A @ R), 0.0
    X = _frac_power(D, 1.0 - 2.0 * t, dtype)
    Dmt = _frac_power(D, -t, dtype)
    C = 2.0 * Dmt @ A @ Dmt

    def g(s):
        E = expm(-s * X)
        return E @ C @ E

    value, err = _semi_infinite(g, A.shape, dtype, 1.0, q)
    return _hermitize(value), err


def sylvester_residual(t, D, A, Y):
    """``||D^t Y D^(1-t) + D^(1-t) Y D^t - 2A||_max / max(1, ||A||_max)``."""
    D = check_hermitian(D, "D")
    dtype = complex if np.iscomplexobj(D) or np.iscomplexobj(Y) else float
    Dt = _frac_power(D, t, dtype)
    Ds = _frac_power(D, 1.0 - t, dtype)
    res = Dt @ Y @ Ds + Ds @ Y @ Dt - 2.0 * np.asarray(A)
    return float(np.abs(res).max() / max(1.0, np.abs(A).max()))


def gamma_t(D, A, t, q=DEFAULT_QUAD):
    """Derivative of ``x -> (D + xA)^t`` at 0, from the resolvent integral
    ``sin(pi t)/pi int_0^inf s^t (D+s)^-1 A (D+s)^-1 ds``.

    For diagonal ``D`` this is Hadamard multiplication by the divided
    differences of ``x^t``. Returns ``(value, error)``.
    """
    if not 0.0 < t < 1.0:
        raise ParameterError("t must lie in (0, 1)")
    D, A, dtype = _prepare(D, A)
    eye = np.eye(D.shape[0])

    def g(s):
        R = np.linalg.inv(D + s * eye)
        return s**t * (R @ A @ R)

    value, err = _semi_infinite(g, A.shape, dtype, _power_map_exponent(t, 2.0 - t), q)
    c = math.sin(math.pi * t) / math.pi
    return _hermitize(c * value), c * err


def beta_gamma_composition(t, D, A, q=DEFAULT_QUAD):
    """Inverse map of the ``wyd_efek:t`` mean as
    ``gamma_t(gamma_(1-t)(A)) / (t (1 - t))``; returns ``(value, error)``."""
    inner, e1 = gamma_t(D, A, 1.0 - t, q)
    outer, e2 = gamma_t(D, inner, t, q)
    c = 1.0 / (t * (1.0 - t))
    return c * outer, c * (e2 + e1)


def beta_wyd_double_integral(t, D, A, q=QuadratureSpec(abs_tol=1e-11, rel_tol=1e-8)):
    """Inverse map of ``wyd_efek:t`` as one nested double integral

    ``c int int r^(1-t) s^t R_r R_s A R_s R_r ds dr``,
    ``R_x = (D + x)^-1``, ``c = sin(pi t) sin(pi (1-t)) / (pi^2 t (1-t))``.

    The inner integral is recomputed for every outer node. Returns
    ``(value, error)``.
    """
    if not 0.0 < t < 1.0:
        raise ParameterError("t must lie in (0, 1)")
    D, A, dtype = _prepare(D, A)
    eye = np.eye(D.shape[0])
    q_in = q.inner()
    k_in = _power_map_exponent(t, 2.0 - t)
    k_out = _power_map_exponent(1.0 - t, 1.0 + t)
    inner_err = [0.0]

    def outer(r):
        Rr = np.linalg.inv(D + r * eye)

        def g(s):
            Rs = np.linalg.inv(D + s * eye)
            return s**t * (Rr @ Rs @ A @ Rs @ Rr)

        val, err = _semi_infinite(g, A.shape, dtype, k_in, q_in)
        inner_err[0] = max(inner_err[0], err)
        return r ** (1.0 - t) * val

    value, err = _semi_infinite(outer, A.shape, dtype, k_out, q)
    c = math.sin(math.pi * t) * math.sin(math.pi * (1.0 - t)) / (math.pi**2 * t * (1.0 - t))
    return _hermitize(c * value), c * (err + inner_err[0])


def beta_sqrt_double_exp(D, A, q=QuadratureSpec(abs_tol=1e-11, rel_tol=1e-8)):
    """``4 int int exp(-(s+r) D^1/2) A exp(-(s+r) D^1/2) ds dr`` (the
    ``wyd_efek:0.5`` inverse map); returns ``(value, error)``."""
    D, A, dtype = _prepare(D, A)
    S = sqrtm(D)
    S = _hermitize(np.real(S) if dtype is float else S)
    q_in = q.inner()

    def outer(r):
        Er = expm(-r * S)

        def g(s):
            Es = expm(-s * S)
            return Er @ Es @ A @ Es @ Er

        return _semi_infinite(g, A.shape, dtype, 1.0, q_in)[0]

    value, err = _semi_infinite(outer, A.shape, dtype, 1.0, q)
    return _hermitize(4.0 * value), 4.0 * err


def phas_pointwise(t, x, rel_tol=1e-7):
    """Triple-integral representation of ``1 / f_t(x)`` for ``wyd_efek:t``

    ``sin(t pi)/pi int_0^inf l^(t-1) int_0^1 int_0^1
    dr ds / (x((1-r) l + (1-s)) + (r l + s)) dl``.

    Inner levels run ten times tighter than ``rel_tol``. Returns
    ``(value, error)``.
    """
    if not 0.0 < t < 1.0:
        raise ParameterError("t must lie in (0, 1)")
    if not x > 0:
        raise DomainError("x must be positive")
    inner_tol = rel_tol / 10

    def over_r(s, lam):
        return integrate.quad(
            lambda r: 1.0 / (x * ((1.0 - r) * lam + (1.0 - s)) + (r * lam + s)), 0.0, 1.0, epsrel=inner_tol / 10, epsabs=0
        )[0]

    def over_s(lam):
        return integrate.quad(over_r, 0.0, 1.0, args=(lam,), epsrel=inner_tol, epsabs=0)[0]

    k = _power_map_exponent(t - 1.0, 2.0 - t)

    def h(u):
        if u <= 0.0 or u >= 1.0:
            return 0.0
        r = u / (1.0 - u)
        lam = r**k
        if lam == 0.0 or not np.isfinite(lam):
            return 0.0
        return lam ** (t - 1.0) * over_s(lam) * k * r ** (k - 1.0) / (1.0 - u) ** 2

    value, err, *rest = integrate.quad(h, 0.0, 1.0, epsrel=rel_tol, epsabs=0, limit=200, full_output=1)
    if len(rest) > 1:
        raise QuadratureError(f"triple integral did not converge: {rest[1]}", err)
    c = math.sin(t * math.pi) / math.pi
    return c * value, c * err


def hansen_coefficients(t, K):
    """``a_k = Gamma(alpha + k) / (Gamma(alpha) k!)``, ``alpha = 1 - 2t``:
    the (positive) coefficients of ``(1 - z)^-alpha``."""
    alpha = 1.0 - 2.0 * t
    a = np.empty(K + 1)
    a[0] = 1.0
    for k in range(1, K + 1):
        a[k] = a[k - 1] * (alpha + k - 1) / k
    return a


def hansen_series_T(t, lam, K):
    """Partial sum ``S_K`` of the rank-one expansion of the inverse mean
    matrix of ``hansen:t``, ``0 < t < 1/2``.

    Term ``k`` is ``a_k v_k v_k^T`` with
    ``v_k[i] = 2^((1-2t)/2) (l_i - 1/2)^k / ((l_i + 1/2)^(k + 1 - 2t) l_i^t)``.

    Returns ``(S_K, tail_bound)`` where ``tail_bound`` bounds the spectral
    norm of the omitted tail (the coefficients are decreasing in ``k``).
    """
    if not 0.0 < t < 0.5:
        raise ParameterError("t must lie in (0, 1/2)")
    if K < 0:
        raise ParameterError("K must be >= 0")
    lam = check_spectrum(lam)
    alpha = 1.0 - 2.0 * t
    a = hansen_coefficients(t, K + 1)
    q = (lam - 0.5) / (lam + 0.5)
    base = 2.0 ** (alpha / 2) * (lam + 0.5) ** (-alpha) * lam ** (-t)
    n = lam.size
    S = np.zeros((n, n))
    for k in range(K + 1):
        v = base * q**k
        S += a[k] * np.outer(v, v)
    rho = float(np.max(q**2))
    if rho >= 1.0:
        tail = math.inf
    else:
        tail = n * float(np.max(base**2)) * a[K + 1] * rho ** (K + 1) / (1.0 - rho)
    return S, tail


_FORMS = ("arith-integral", "log-integral", "heinz-sylvester", "gamma-compose", "wyd-double", "sqrt-double-exp", "phas")


def _random_instance(n, seed):
    rng = derive_rng(seed, n, 11)
    G = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    D = G @ G.conj().T / n + 0.1 * np.eye(n)
    B = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return _hermitize(D), _hermitize(B)


def crosscheck(form, n=3, seed=0, t=None, x=None, q=None):
    """Compare one integral/series form with its closed (Hadamard) form on a
    seeded random instance.

    Returns the record ``{form, fn, params, n, seed, discrepancy,
    error_estimate}``; ``discrepancy`` is the max-entry difference relative
    to ``max(1, max|reference|)``.
    """
    if form not in _FORMS:
        raise ParameterError(f"unknown form {form!r}; expected one of {', '.join(_FORMS)}")
    params = {}
    if form == "phas":
        t = 0.5 if t is None else float(t)
        x = 4.0 if x is None else float(x)
        value, err = phas_pointwise(t, x)
        ref = 1.0 / MeanFunction("wyd_efek", t)(x)
        rec = {"form": form, "fn": f"wyd_efek:{t:g}", "params": {"t": t, "x": x}, "n": 1, "seed": seed}
        rec.update(discrepancy=abs(value - ref) / abs(ref), error_estimate=err)
        return rec
    D, A = _random_instance(n, seed)
    kw = {} if q is None else {"q": q}
    if form == "arith-integral":
        fn = MeanFunction("arithmetic")
        value, err = beta_arith_integral(D, A, **kw)
    elif form == "log-integral":
        fn = MeanFunction("logarithmic")
        value, err = beta_log_integral(D, A, **kw)
    elif form == "heinz-sylvester":
        t = 0.3 if t is None else float(t)
        fn = MeanFunction("heinz", t)
        value, err = beta_heinz_sylvester(t, D, A, **kw)
    elif form == "gamma-compose":
        t = 0.3 if t is None else float(t)
        fn = MeanFunction("wyd_efek", t)
        value, err = beta_gamma_composition(t, D, A, **kw)
    elif form == "wyd-double":
        t = 0.25 if t is None else float(t)
        fn = MeanFunction("wyd_efek", t)
        value, err = beta_wyd_double_integral(t, D, A, **kw)
    else:
        fn = MeanFunction("wyd_efek", 0.5)
        value, err = beta_sqrt_double_exp(D, A, **kw)
    if t is not None:
        params["t"] = t
    ref = apply_beta(fn, D, A)
    disc = float(np.abs(value - ref).max() / max(1.0, np.abs(ref).max()))
    return {"form": form, "fn": str(fn), "params": params, "n": n, "seed": seed, "discrepancy": disc, "error_estimate": err}
