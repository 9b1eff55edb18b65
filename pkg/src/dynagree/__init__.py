"""Approximate consensus by averaging over time-varying directed networks."""
from . import algorithms, analysis, digraph, engine, models, stochmat
from .digraph import CommGraph, Digraph
from .engine import DelaySchedule, ExecutionTrace
from .models import NetworkModel, Pattern

__version__ = "0.1.0"

__all__ = [
    "algorithms", "analysis", "digraph", "engine", "models", "stochmat",
    "CommGraph", "Digraph", "DelaySchedule", "ExecutionTrace", "NetworkModel", "Pattern",
]
