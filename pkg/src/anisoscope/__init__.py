"""Dispersion, anisotropy and stability analysis of finite-difference schemes."""

from importlib.metadata import PackageNotFoundError, version

from anisoscope.errors import AnisoscopeError, NumericalError, ValidationError
from anisoscope.schemes import (
    MultiDimPrefactored,
    MultiDimScheme,
    PrefactoredScheme,
    SchemeSpec,
    Stencil2D,
    builtin_catalog,
    get_scheme,
    verify_formal_order,
)
from anisoscope.spectral import EXACT, advection_phase_group, anisotropy_polar, modified_wavenumber

try:
    __version__ = version("anisoscope")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.0.0"

__all__ = [
    "EXACT",
    "AnisoscopeError",
    "MultiDimPrefactored",
    "MultiDimScheme",
    "NumericalError",
    "PrefactoredScheme",
    "SchemeSpec",
    "Stencil2D",
    "ValidationError",
    "advection_phase_group",
    "anisotropy_polar",
    "builtin_catalog",
    "get_scheme",
    "modified_wavenumber",
    "verify_formal_order",
]
