"""Jacobian-free Newton-Krylov solvers with finite-difference and forward-mode
automatic-differentiation Jacobian-vector products, plus a benchmark harness."""

from .autodiff import Dual, DerivativeSingularityError, jvp
from .krylov import KrylovConfig, KrylovMethod, KrylovReport, Preconditioner, solve
from .linops import JvpStrategy, LinearOperator, make_operator
from .newton import NewtonConfig, NewtonReport, newton_solve
from .numerics import Precision, dot, norm2

__all__ = [
    "Dual",
    "DerivativeSingularityError",
    "jvp",
    "KrylovConfig",
    "KrylovMethod",
    "KrylovReport",
    "Preconditioner",
    "solve",
    "JvpStrategy",
    "LinearOperator",
    "make_operator",
    "NewtonConfig",
    "NewtonReport",
    "newton_solve",
    "Precision",
    "dot",
    "norm2",
]

__version__ = "0.1.0"
