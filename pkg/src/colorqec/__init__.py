"""Triangular color-code simulation, decoding and trapped-ion compilation."""
from .pauli import PauliString, parse, commutes, multiply, weight
from .code import ColorCode, build_triangular_488, stabilizer_group, reduce_logical, logical_y

__version__ = "0.1.0"

__all__ = [
    "PauliString", "parse", "commutes", "multiply", "weight",
    "ColorCode", "build_triangular_488", "stabilizer_group", "reduce_logical", "logical_y",
]
