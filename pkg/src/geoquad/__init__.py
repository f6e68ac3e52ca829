"""Geometric models and controllers for quadrotors, flexible cables and cable-suspended payloads."""
from .errors import GeoQuadError, NumericalError, ParseError, ValidationError
from .model import (CableParams, ChainState, ChainSystem, DisturbanceSet, MultiQuadState, MultiSystem,
                    PayloadParams, QuadParams, SingleQuadState, SingleQuadSystem)
from .scenarios import load_builtin, parse_scenario
from .sim import SimConfig, metrics, simulate

__version__ = "0.1.0"

__all__ = ["GeoQuadError", "NumericalError", "ParseError", "ValidationError", "CableParams", "ChainState",
           "ChainSystem", "DisturbanceSet", "MultiQuadState", "MultiSystem", "PayloadParams", "QuadParams",
           "SingleQuadState", "SingleQuadSystem", "load_builtin", "parse_scenario", "SimConfig", "metrics",
           "simulate"]
