"""Error-function family of complex argument.

All functions accept Python scalars or numpy arrays and return the same
shape. The Faddeeva function comes from ``scipy.special.wofz`` (region-split
Taylor / continued-fraction / rational algorithm, ~1e-13 relative accuracy);
erf, erfc and erfi of complex argument use the matching scipy kernels, which
are built on the same w(z) evaluation but keep the special cases (real axis,
imaginary axis, small |z|) exact.
"""

import logging
from typing import Union

import numpy as np
from scipy import special

from steerharvest.errors import SpecialFunctionDomainError

logger = logging.getLogger(__name__)

ComplexLike = Union[complex, float, np.ndarray]


def _checked(z: ComplexLike, name: str) -> np.ndarray:
    arr = np.asarray(z, dtype=complex)
    if not np.all(np.isfinite(arr)):
        raise SpecialFunctionDomainError(f"{name}: argument must be finite, got {z!r}")
    return arr


def _unwrap(value: np.ndarray):
    return value.item() if value.ndim == 0 else value


def faddeeva(z: ComplexLike):
    """w(z) = exp(-z^2) erfc(-iz)."""
    return _unwrap(special.wofz(_checked(z, "faddeeva")))


def erf_complex(z: ComplexLike):
    """erf(z) = 1 - exp(-z^2) w(iz)."""
    return _unwrap(special.erf(_checked(z, "erf_complex")))


def erfc_complex(z: ComplexLike):
    """erfc(z) = exp(-z^2) w(iz), without the 1 - erf(z) cancellation."""
    return _unwrap(special.erfc(_checked(z, "erfc_complex")))


def erfi_complex(z: ComplexLike):
    """erfi(z) = -i erf(iz)."""
    return _unwrap(special.erfi(_checked(z, "erfi_complex")))


def erfc_real(x: Union[float, np.ndarray]):
    """Real complementary error function.

    scipy evaluates the positive tail as exp(-x^2) erfcx(x), so large x keeps
    full relative precision instead of cancelling in 1 - erf(x).
    """
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise SpecialFunctionDomainError(f"erfc_real: argument must be finite, got {x!r}")
    return _unwrap(np.asarray(special.erfc(arr), dtype=float))
