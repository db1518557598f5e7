"""Finite-dimensional quantum coarse geometry toolkit."""

from .linalg import DEFAULT_TOL, OperatorSubspace, orthonormalize
from .vna import (RepresentedAlgebra, TraceFunctional, algebra_from_blocks,
                  algebra_from_generators, diagonal_algebra, trace_functional)

__version__ = "0.1.0"

__all__ = ["DEFAULT_TOL", "OperatorSubspace", "orthonormalize", "RepresentedAlgebra", "TraceFunctional",
           "algebra_from_blocks", "algebra_from_generators", "diagonal_algebra", "trace_functional"]
