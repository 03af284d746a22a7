"""Thermalization of two oscillators by repeated interactions."""

from ._core import (
    BranchError,
    EulerDecomposition,
    InvalidInput,
    OracleStep,
    RepintError,
    StepResult,
    SystemParams,
    ThermalState,
    Trajectory,
    TruncationError,
    check_equilibrium,
    compute_euler,
    iterate,
    oracle_iterate,
    oracle_step,
    predict_fixed_point,
    predict_reservoir_fixed_point,
    required_nmax,
    simulate_csv,
    step,
    step_oscillator1,
    step_oscillator2,
    total_occupation,
)

__all__ = [
    "BranchError",
    "EulerDecomposition",
    "InvalidInput",
    "OracleStep",
    "RepintError",
    "StepResult",
    "SystemParams",
    "ThermalState",
    "Trajectory",
    "TruncationError",
    "check_equilibrium",
    "compute_euler",
    "iterate",
    "oracle_iterate",
    "oracle_step",
    "predict_fixed_point",
    "predict_reservoir_fixed_point",
    "required_nmax",
    "simulate_csv",
    "step",
    "step_oscillator1",
    "step_oscillator2",
    "total_occupation",
]
