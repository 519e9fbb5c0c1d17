"""Linear-stability verdicts for Einstein metrics of Riemannian-submersion type."""

from .errors import StabilityError
from .exactnum import Inertia, SymMatrix, inertia, newton_solve
from .verdict import Verdict

__all__ = ["Inertia", "StabilityError", "SymMatrix", "Verdict", "inertia", "newton_solve"]
__version__ = "0.1.0"
