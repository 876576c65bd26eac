"""Gamma and hypergeometric functions used by the Mellin-Barnes machinery.

``log_gamma`` is a vectorised Lanczos evaluation that accepts complex arrays,
which is what the contour quadrature feeds it.  The hypergeometric helpers
are plain series with the usual transformations; they back the Rice mean and
a few closed forms, and are not meant to be general purpose.
"""

import math

import numpy as np

from .errors import AccuracyError, DomainError

# Lanczos approximation, g = 671/128 with 14 terms (Numerical Recipes, 3rd ed.).
# Relative error below 1e-15 for Re z > 0.
_LANCZOS_G = 671.0 / 128.0
_LANCZOS_C0 = 0.999999999999997092
_LANCZOS_COEF = np.array([
    57.1562356658629235, -59.5979603554754912, 14.1360979747417471,
    -0.491913816097620199, 0.339946499848118887e-4, 0.465236289270485756e-4,
    -0.983744753048795646e-4, 0.158088703224912494e-3, -0.210264441724104883e-3,
    0.217439618115212643e-3, -0.164318106536763890e-3, 0.844182239838527433e-4,
    -0.261908384015814087e-4, 0.368991826595316234e-5,
])
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)

_MAX_SERIES_TERMS = 10_000


def _lanczos(z):
    # principal log Gamma for Re z >= 0.5; log(ser) - log(z) keeps the branch right
    t = z + _LANCZOS_G
    ser = np.full(z.shape, _LANCZOS_C0, dtype=z.dtype)
    for j, c in enumerate(_LANCZOS_COEF):
        ser = ser + c / (z + (j + 1))
    return (z + 0.5) * np.log(t) - t + _LOG_SQRT_2PI + np.log(ser) - np.log(z)


def _log_gamma_raw(z):
    """Principal-branch log Gamma on a complex array, no pole checks.

    Points with Re z < 0.5 are shifted right by the recurrence
    Gamma(z) = Gamma(z + n) / (z (z+1) ... (z+n-1)).  Summing the logs of the
    factors gives the principal branch directly, which the reflection formula
    only does after a branch correction.
    """
    z = np.asarray(z, dtype=complex)
    shift = np.where(z.real < 0.5, np.ceil(0.5 - z.real), 0.0).astype(np.int64)
    nmax = int(shift.max()) if shift.size else 0
    if nmax == 0:
        return _lanczos(z)
    zs = z + shift
    out = _lanczos(zs)
    for k in range(nmax):
        active = shift > k
        out = out - np.where(active, np.log(np.where(active, z + k, 1.0)), 0.0)
    return out


def log_gamma(z):
    """Principal branch of log Gamma(z) for complex (or real) input.

    Raises DomainError at the poles z = 0, -1, -2, ...
    """
    arr = np.asarray(z, dtype=complex)
    if np.any(np.isnan(arr)):
        raise DomainError("log_gamma: NaN argument")
    at_pole = (arr.imag == 0) & (arr.real <= 0) & (arr.real == np.round(arr.real))
    if np.any(at_pole):
        raise DomainError(f"log_gamma: pole at {arr[at_pole].ravel()[0].real:g}")
    out = _log_gamma_raw(arr)
    return complex(out) if np.ndim(z) == 0 else out


def gamma(z):
    """Gamma(z) via exp(log_gamma); complex output."""
    return np.exp(log_gamma(z))


def _series(a_list, b_list, z, what):
    # sum_k prod (a)_k / prod (b)_k z^k / k!, compensated, stops once terms are negligible
    total, comp, term = 1.0, 0.0, 1.0
    for k in range(_MAX_SERIES_TERMS):
        num = 1.0
        for a in a_list:
            num *= a + k
        den = float(k + 1)
        for b in b_list:
            den *= b + k
        ratio = num / den * z
        term *= ratio
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        if term == 0.0 or (abs(term) < 1e-17 * abs(total) and abs(ratio) < 1.0):
            return total
    raise AccuracyError(f"{what}: series did not converge in {_MAX_SERIES_TERMS} terms",
                        achieved=abs(term))


def _check_c(c, what):
    if c <= 0 and float(c).is_integer():
        raise DomainError(f"{what}: c = {c:g} is a non-positive integer")


def gauss_2f1(a, b, c, z):
    """Gauss hypergeometric 2F1(a, b; c; z) for real arguments, z <= 1.

    Power series for -0.5 <= z < 1, the Pfaff transformation for z < -0.5
    (maps z into (1/3, 1)), and Gauss's summation theorem at z = 1.  Close to
    z = 1 the series is slow; it gives up with AccuracyError after 10^4 terms.
    """
    a, b, c, z = float(a), float(b), float(c), float(z)
    _check_c(c, "gauss_2f1")
    a, b = sorted((a, b))  # exact symmetry in (a, b)
    if z > 1.0:
        raise DomainError("gauss_2f1: z > 1 lies on the branch cut")
    if a == 0.0 or b == 0.0:
        return 1.0
    if z == 1.0:
        if c - a - b <= 0:
            raise DomainError("gauss_2f1: diverges at z = 1 unless c - a - b > 0")
        val = log_gamma(c) + log_gamma(c - a - b) - log_gamma(c - a) - log_gamma(c - b)
        return float(np.exp(val).real)
    if z < -0.5:
        # 2F1(a,b;c;z) = (1-z)^{-a} 2F1(a, c-b; c; z/(z-1))
        return (1.0 - z) ** (-a) * gauss_2f1(a, c - b, c, z / (z - 1.0))
    return _series([a, b], [c], z, "gauss_2f1")


def kummer_1f1(a, b, z):
    """Confluent hypergeometric 1F1(a; b; z) for real arguments.

    Negative z goes through Kummer's transformation to avoid cancellation.
    """
    a, b, z = float(a), float(b), float(z)
    _check_c(b, "kummer_1f1")
    if z < 0 and not (a <= 0 and a.is_integer()):
        return math.exp(z) * _series([b - a], [b], -z, "kummer_1f1")
    return _series([a], [b], z, "kummer_1f1")
