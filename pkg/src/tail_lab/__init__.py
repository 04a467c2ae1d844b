"""Late-time tails for the inverse-square wave equation and massless Dirac-Coulomb."""
from .indexsets import IndexSet, RateTable, predicted_rates, closed_form_rates
from .spectrum import ModeSpec, Problem

__version__ = "0.1.0"

__all__ = ["IndexSet", "RateTable", "predicted_rates", "closed_form_rates", "ModeSpec", "Problem",
           "__version__"]
