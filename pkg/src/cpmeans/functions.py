"""Catalog of standard functions and the scalar means they generate.

A standard function ``f`` on ``(0, inf)`` satisfies ``f(1) = 1`` and
``x * f(1/x) = f(x)``; it induces the symmetric mean ``m_f(x, y) = x f(y/x)``.

Every family whose closed form has a removable singularity at ``x = 1`` is
written through ``exprel(z) = (exp(z) - 1) / z`` applied to ``log x``, which is
accurate to a few ulps on both sides of the singularity and exact at it.
"""
from dataclasses import dataclass, field
from enum import Enum
import math

import numpy as np
from scipy.special import comb, exprel

from ._validation import DomainError, ParameterError, check_grid, log_grid

__all__ = [
    "FAMILIES",
    "MeanFunction",
    "Order",
    "SqrtComparison",
    "StandardReport",
    "TX_THRESHOLD",
    "binomial_expansion_identity",
    "catalog_samples",
    "check_standard",
    "compare_sqrt",
    "eval_f",
    "eval_mean",
    "parse_function",
    "power_diff_t_monotone",
]

# sqrt boundary for tx_interp: f_t >= sqrt(x) iff (1 - t)^2 <= 4t
TX_THRESHOLD = 3.0 - 2.0 * math.sqrt(2.0)

# (lo, hi, lo_open, hi_open); None means the family takes no parameter
_RANGES = {
    "arithmetic": None,
    "harmonic": None,
    "geometric": None,
    "logarithmic": None,
    "ando_mix": None,
    "identric": None,
    "heinz": (0.0, 1.0, False, False),
    "hansen": (0.0, 1.0, False, False),
    "wyd_efek": (0.0, 1.0, True, True),
    "power_difference": (-1.0, 2.0, False, False),
    "tx_interp": (0.0, 1.0, False, False),
    "stolarsky": (-2.0, 2.0, False, False),
    "binomial": (-1.0, 1.0, False, False),
}
FAMILIES = tuple(_RANGES)

_LIMIT_EPS = 1e-8


def _log(x):
    return np.log(x)


def _arithmetic(x, _):
    return 0.5 * (1.0 + x)


def _harmonic(x, _):
    return 2.0 * x / (1.0 + x)


def _geometric(x, _):
    return np.sqrt(x)


def _logarithmic(x, _):
    return exprel(_log(x))


def _identric(x, _):
    # x log x / (x - 1) == 1 / exprel(-log x)
    return np.exp(1.0 / exprel(-_log(x)) - 1.0)


def _heinz(x, t):
    return 0.5 * (x**t + x ** (1.0 - t))


def _hansen(x, t):
    return np.exp((2.0 * t - 1.0) * math.log(2.0) + t * _log(x) + (1.0 - 2.0 * t) * np.log1p(x))


def _wyd_efek(x, t):
    if t == 0.5:
        return (0.5 * (1.0 + np.sqrt(x))) ** 2
    L = _log(x)
    return exprel(L) ** 2 / (exprel(t * L) * exprel((1.0 - t) * L))


def _power_difference(x, t):
    # (t-1)/t * (x^t - 1)/(x^(t-1) - 1); no singularity left at t in {0, 1}
    L = _log(x)
    return exprel(t * L) / exprel((t - 1.0) * L)


def _ando_mix(x, _):
    return 0.5 * (0.5 * (1.0 + x) + 2.0 * x / (1.0 + x))


def _tx_interp(x, t):
    return 2.0 * (t * x + 1.0) * (t + x) / ((1.0 + t) ** 2 * (x + 1.0))


def _stolarsky(x, p):
    if abs(p - 1.0) < _LIMIT_EPS:
        return _identric(x, None)
    if abs(p) < _LIMIT_EPS:
        return _logarithmic(x, None)
    L = _log(x)
    return np.exp((np.log(exprel(L)) - np.log(exprel(p * L))) / (1.0 - p))


def _binomial(x, p):
    if p == 0.0:
        return np.sqrt(x)
    # ((x^p + 1)/2)^(1/p) = sqrt(x) * cosh(p L / 2)^(1/p)
    L = _log(x)
    return np.sqrt(x) * np.exp(np.log1p(2.0 * np.sinh(0.25 * p * L) ** 2) / p)


_EVAL = {
    "arithmetic": _arithmetic,
    "harmonic": _harmonic,
    "geometric": _geometric,
    "logarithmic": _logarithmic,
    "identric": _identric,
    "heinz": _heinz,
    "hansen": _hansen,
    "wyd_efek": _wyd_efek,
    "power_difference": _power_difference,
    "ando_mix": _ando_mix,
    "tx_interp": _tx_interp,
    "stolarsky": _stolarsky,
    "binomial": _binomial,
}


@dataclass(frozen=True)
class MeanFunction:
    """A named standard function, optionally parameterized.

    Parameters
    ----------
    family : str
        One of :data:`FAMILIES`.
    param : float, optional
        The family parameter (``t`` or ``p``). Required for parameterized
        families, forbidden otherwise.

    Examples
    --------
    >>> MeanFunction("heinz", 0.5)(4.0)
    2.0
    >>> str(MeanFunction.parse("stolarsky:-1"))
    'stolarsky:-1'
    """

    family: str
    param: float | None = field(default=None)

    def __post_init__(self):
        if self.family not in _RANGES:
            raise ParameterError(f"unknown family {self.family!r}; expected one of {', '.join(FAMILIES)}")
        rng = _RANGES[self.family]
        if rng is None:
            if self.param is not None:
                raise ParameterError(f"family {self.family!r} takes no parameter")
            return
        if self.param is None:
            raise ParameterError(f"family {self.family!r} requires a parameter")
        p = float(self.param)
        object.__setattr__(self, "param", p)
        lo, hi, lo_open, hi_open = rng
        below = p <= lo if lo_open else p < lo
        above = p >= hi if hi_open else p > hi
        if below or above or not math.isfinite(p):
            lb = "(" if lo_open else "["
            rb = ")" if hi_open else "]"
            raise ParameterError(f"{self.family} parameter {p} outside {lb}{lo}, {hi}{rb}")

    @classmethod
    def parse(cls, text):
        return parse_function(text)

    def __str__(self):
        if self.param is None:
            return self.family
        return f"{self.family}:{self.param:g}" if self.param == float(f"{self.param:g}") else f"{self.family}:{self.param!r}"

    def __call__(self, x):
        """Evaluate ``f(x)``; ``x`` may be a scalar or an array."""
        arr = np.asarray(x, dtype=float)
        if np.any(~(arr > 0)):
            raise DomainError("f is defined on strictly positive reals only")
        out = _EVAL[self.family](arr, self.param)
        return float(out) if np.ndim(out) == 0 else out

    def mean(self, x, y):
        """The induced mean ``m_f(x, y) = x f(y / x)``, broadcasting over arrays."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if np.any(~(x > 0)) or np.any(~(y > 0)):
            raise DomainError("means are defined on strictly positive reals only")
        out = x * _EVAL[self.family](y / x, self.param)
        return float(out) if np.ndim(out) == 0 else out

    @property
    def operator_monotone_claimed(self):
        """Whether matrix monotonicity of this member is asserted (so the
        harmonic/arithmetic bound chain must hold)."""
        if self.family == "tx_interp":
            return self.param >= TX_THRESHOLD
        return True

    @property
    def positive_T_claimed(self):
        """Whether positivity of the inverse mean matrix (equivalently complete
        positivity of the inverse superoperator) is asserted for this member."""
        fam, p = self.family, self.param
        if fam in ("arithmetic", "geometric", "logarithmic", "identric", "heinz", "wyd_efek"):
            return True
        if fam == "hansen":
            return p <= 0.5
        if fam == "power_difference":
            return p >= 0.5
        if fam == "stolarsky":
            return p >= -1.0
        if fam == "binomial":
            return True
        return False


def parse_function(text):
    """Parse a ``family[:param]`` identifier such as ``heinz:0.5``."""
    if isinstance(text, MeanFunction):
        return text
    family, sep, param = str(text).strip().partition(":")
    family = family.strip()
    if not sep:
        return MeanFunction(family)
    try:
        value = float(param)
    except ValueError:
        raise ParameterError(f"cannot parse parameter {param!r} in {text!r}") from None
    return MeanFunction(family, value)


def eval_f(fn, x):
    return parse_function(fn)(x)


def eval_mean(fn, x, y):
    return parse_function(fn).mean(x, y)


def catalog_samples(num=10):
    """``num`` admissible members per parameterized family plus every
    parameterless family once."""
    out = []
    for fam, rng in _RANGES.items():
        if rng is None:
            out.append(MeanFunction(fam))
            continue
        lo, hi, lo_open, hi_open = rng
        grid = np.linspace(lo, hi, num + 2 if (lo_open or hi_open) else num)
        if lo_open:
            grid = grid[1:]
        if hi_open:
            grid = grid[:-1]
        out.extend(MeanFunction(fam, float(p)) for p in grid[:num])
    return out


@dataclass
class StandardReport:
    fn: MeanFunction
    f1_defect: float
    symmetry_defect: float
    bound_checked: bool
    bound_violations: list

    @property
    def ok(self):
        return self.f1_defect <= 1e-12 and self.symmetry_defect <= 1e-12 and not self.bound_violations


def check_standard(fn, grid=None, tol=1e-12):
    """Measure the standardness defects of ``fn`` on ``grid``.

    The harmonic/arithmetic bound chain ``2x/(x+1) <= f(x) <= (x+1)/2`` is
    only checked where matrix monotonicity of ``fn`` is asserted; members such
    as ``tx_interp`` below its threshold are reported with
    ``bound_checked=False`` rather than rejected.
    """
    fn = parse_function(fn)
    x = check_grid(log_grid() if grid is None else grid)
    fx = np.asarray(fn(x), dtype=float)
    f1 = abs(fn(1.0) - 1.0)
    sym = np.abs(x * np.asarray(fn(1.0 / x)) - fx) / np.maximum(1.0, fx)
    violations = []
    checked = fn.operator_monotone_claimed
    if checked:
        lower = 2.0 * x / (x + 1.0)
        upper = 0.5 * (x + 1.0)
        scale = np.maximum(1.0, fx)
        bad = (fx < lower - tol * scale) | (fx > upper + tol * scale)
        violations = [float(v) for v in x[bad]]
    return StandardReport(fn, float(f1), float(sym.max()), checked, violations)


class Order(str, Enum):
    GEQ = "GEQ"
    LEQ = "LEQ"
    INCOMPARABLE = "INCOMPARABLE"


@dataclass
class SqrtComparison:
    order: Order
    above: float | None = None
    below: float | None = None


def compare_sqrt(fn, grid=None, tol=1e-12):
    """Compare ``f`` with the geometric mean ``sqrt(x)`` on ``grid``.

    When ``f`` coincides with ``sqrt`` the result is ``GEQ``. For
    ``INCOMPARABLE`` one grid point is reported per direction (the one with
    the largest gap).
    """
    fn = parse_function(fn)
    x = check_grid(log_grid() if grid is None else grid)
    diff = np.asarray(fn(x)) - np.sqrt(x)
    slack = tol * np.maximum(1.0, np.sqrt(x))
    geq = bool(np.all(diff >= -slack))
    leq = bool(np.all(diff <= slack))
    if geq:
        return SqrtComparison(Order.GEQ)
    if leq:
        return SqrtComparison(Order.LEQ)
    return SqrtComparison(Order.INCOMPARABLE, above=float(x[np.argmax(diff)]), below=float(x[np.argmin(diff)]))


def power_diff_t_monotone(x, t_grid, tol=1e-10):
    """Check that ``t -> f_t(x)`` is nondecreasing along ``t_grid`` for the
    power difference family.

    Returns ``(ok, worst_drop, values)`` where ``worst_drop`` is the largest
    decrease between consecutive grid values (0 when monotone).
    """
    if not x > 0:
        raise DomainError("x must be positive")
    ts = np.asarray(t_grid, dtype=float)
    values = np.array([MeanFunction("power_difference", t)(x) for t in ts])
    drops = values[:-1] - values[1:]
    worst = float(max(0.0, drops.max())) if drops.size else 0.0
    return worst <= tol, worst, values


def binomial_expansion_identity(n, x):
    """Compare the closed form of the binomial mean at ``p = 1/n`` with its
    finite binomial sum; returns ``(closed_form, |closed_form - sum|)``."""
    if not 1 <= n <= 20:
        raise ParameterError("n must lie in [1, 20]")
    if not x > 0:
        raise DomainError("x must be positive")
    closed = MeanFunction("binomial", 1.0 / n)(x)
    k = np.arange(n + 1)
    series = float(np.sum(comb(n, k, exact=False) * x ** (k / n)) / 2.0**n)
    return closed, abs(closed - series)
