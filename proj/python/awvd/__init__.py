"""Approximate multiplicatively weighted Voronoi diagrams."""

from ._core import (
    AwvdError,
    Diagram,
    brute_nn,
    derive_params,
    generate,
    make_ball,
    validate_sspd,
)

__all__ = [
    "AwvdError",
    "Diagram",
    "brute_nn",
    "derive_params",
    "generate",
    "make_ball",
    "validate_sspd",
]
