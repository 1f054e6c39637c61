"""p-version LDG solver and approximation toolkit for solutions with fractional singularities."""
from .exceptions import (ConfigError, DegenerateFit, FractionalDomainError, InvalidForHyperbolic,
                         LdgFracError, NonFinite, NotInSpace, OutOfDomain,
                         SingularPointEvaluation)
from .fracfun import SingularSolution, SolutionKind, exact_q, exact_u, forcing
from .ldg import LdgOperator, LdgProblem, recover_q, rhs
from .mesh import BrokenField, Mesh1D, ProjectionVariant, Side, eval_field
from .timestep import TimeStepPlan, integrate

__version__ = "0.1.0"

__all__ = [
    "BrokenField", "ConfigError", "DegenerateFit", "FractionalDomainError",
    "InvalidForHyperbolic", "LdgFracError", "LdgOperator", "LdgProblem", "Mesh1D", "NonFinite",
    "NotInSpace", "OutOfDomain", "ProjectionVariant", "Side", "SingularPointEvaluation",
    "SingularSolution", "SolutionKind", "TimeStepPlan", "eval_field", "exact_q", "exact_u",
    "forcing", "integrate", "recover_q", "rhs",
]
