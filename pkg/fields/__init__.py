# fields package - Transaction fields on economic space
"""
Domain layer of espace.

- model_core: parameters, sign invariants, steady-state fields
- micro_aggregation: binning agents and transactions into macro fields
- wave_analysis: characteristic roots, dispersion and analytic surface-like modes
- field_solver: finite-difference integration of the linearized potential equations

Scenario orchestration and file output live in the scenarios package.
"""
from .errors import EspaceError
from .model_core import ModelParams, validate_params

__all__ = ['EspaceError', 'ModelParams', 'validate_params']
