"""Complete positivity of superoperators built from matrix means.

A standard operator monotone function ``f`` induces the mean
``m_f(x, y) = x f(y / x)`` and, for a positive definite ``D``, the map
``J_D^f`` acting as Hadamard multiplication by ``[m_f(lam_i, lam_j)]`` in the
eigenbasis of ``D``. The package evaluates the function catalog, tests
positivity of mean matrices and their inverses, checks complete positivity
through Choi matrices, cross-checks integral representations and searches
for spectra where positivity fails.
"""
__version__ = "0.1.0"

from ._validation import (
    ContractError,
    DomainError,
    ParameterError,
    QuadratureError,
    check_hermitian,
    check_positive_definite,
    check_spectrum,
    log_grid,
)
from .functions import *  # noqa: F401,F403
from .functions import __all__ as _functions_all
from .linalg import *  # noqa: F401,F403
from .linalg import __all__ as _linalg_all
from .superop import *  # noqa: F401,F403
from .superop import __all__ as _superop_all
from .integral import *  # noqa: F401,F403
from .integral import __all__ as _integral_all
from .search import *  # noqa: F401,F403
from .search import __all__ as _search_all
from .estimators import MeanSuperoperator

__all__ = [
    "ContractError",
    "DomainError",
    "MeanSuperoperator",
    "ParameterError",
    "QuadratureError",
    "check_hermitian",
    "check_positive_definite",
    "check_spectrum",
    "log_grid",
    *_functions_all,
    *_linalg_all,
    *_superop_all,
    *_integral_all,
    *_search_all,
]
