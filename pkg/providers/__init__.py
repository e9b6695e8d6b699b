"""
Coefficient models, initial data and window providers
"""
from providers.base import CoefficientModel
from providers.zero import ZeroCoefficient
from providers.soliton import SolitonCoefficient, soliton_from_ratio
from providers.custom import CustomCoefficient
from providers.data import (
    DataSource,
    backward_evolved_jump_datum,
    evolved,
    from_field,
    from_file,
    gaussian_datum,
    jump_gaussian_datum,
    zero_datum,
)
from providers.windows import WindowFunction, get_window, window_from_closure

__all__ = [
    "CoefficientModel",
    "ZeroCoefficient",
    "SolitonCoefficient",
    "CustomCoefficient",
    "soliton_from_ratio",
    "DataSource",
    "backward_evolved_jump_datum",
    "evolved",
    "from_field",
    "from_file",
    "gaussian_datum",
    "jump_gaussian_datum",
    "zero_datum",
    "WindowFunction",
    "get_window",
    "window_from_closure",
]
