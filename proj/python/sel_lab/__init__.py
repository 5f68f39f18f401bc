from ._core import (
    NumericalFailure,
    Parameters,
    RadialSolution,
    RegimeError,
    beta,
    classify,
    eval_f,
    exact_U,
    exists,
    families,
    kelvin,
    kelvin_solution,
    report_json,
    roots,
    scale,
    shoot,
)

__all__ = [
    "NumericalFailure",
    "Parameters",
    "RadialSolution",
    "RegimeError",
    "beta",
    "classify",
    "eval_f",
    "exact_U",
    "exists",
    "families",
    "kelvin",
    "kelvin_solution",
    "report_json",
    "roots",
    "scale",
    "shoot",
]
