"""Plastic quantum cellular automaton for 1+1 dimensional lattice QED."""

from ._backend import BACKEND
from .errors import BoundsError, BudgetError, ConfigError, DomainError, NumericalError, QCAError, ShapeError
from .evolution import StepProgram, SupportProgram, build_step, evolve, measure, step
from .gates import GateParams, GateVariant, build_gate, scaling_params
from .lattice import (
    BasisLabel,
    LatticeSpec,
    StateVector,
    TruncationMode,
    basis_state,
    flat_index,
    load_state,
    project_interior,
    save_state,
    unflatten,
    vacuum,
)
from .operators import LinearOperator, LinkKind, link_op, qubit_op

__all__ = [
    "BACKEND",
    "BasisLabel",
    "BoundsError",
    "BudgetError",
    "ConfigError",
    "DomainError",
    "GateParams",
    "GateVariant",
    "LatticeSpec",
    "LinearOperator",
    "LinkKind",
    "NumericalError",
    "QCAError",
    "ShapeError",
    "StateVector",
    "StepProgram",
    "SupportProgram",
    "TruncationMode",
    "basis_state",
    "build_gate",
    "build_step",
    "evolve",
    "flat_index",
    "link_op",
    "load_state",
    "measure",
    "project_interior",
    "qubit_op",
    "save_state",
    "scaling_params",
    "step",
    "unflatten",
    "vacuum",
]
