"""Degradation-aware microgrid investment planning (DBIO pipeline)."""

__version__ = "0.1.0"

from .planning import InvestmentDecision  # noqa: F401
from .scenario import Scenario, load_scenario  # noqa: F401
