"""Python bindings for the bigsam C++ library."""

from ._core import (
    ConfigError,
    NumericalError,
    ParseError,
    alpha,
    difference_outer,
    generate_instance,
    iteration_bound,
    nnls,
    oracle,
    smoothing_parameter,
    solve,
    solve_tikhonov,
)

__all__ = [
    "ConfigError",
    "NumericalError",
    "ParseError",
    "alpha",
    "difference_outer",
    "generate_instance",
    "iteration_bound",
    "nnls",
    "oracle",
    "smoothing_parameter",
    "solve",
    "solve_tikhonov",
]
