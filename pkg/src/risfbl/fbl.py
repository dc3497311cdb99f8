"""Finite-blocklength primitives (normal approximation).

All functions broadcast over numpy arrays.
"""
import math

import numpy as np
from scipy.special import erfc

LN2 = math.log(2.0)
V_MAX = 1.0 / LN2**2

# Acklam's rational approximation of the standard normal quantile
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def q_function(x):
    """Gaussian tail probability Q(x) = P(Z > x)."""
    return 0.5 * erfc(np.asarray(x, dtype=float) / math.sqrt(2.0))


def _acklam(p):
    # lower-tail quantile Phi^{-1}(p), relative error ~1e-9
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        return ((((( _C[0]*q + _C[1])*q + _C[2])*q + _C[3])*q + _C[4])*q + _C[5]) / \
               ((((_D[0]*q + _D[1])*q + _D[2])*q + _D[3])*q + 1.0)
    if p > 1.0 - _P_LOW:
        return -_acklam(1.0 - p)
    q = p - 0.5
    r = q * q
    return ((((( _A[0]*r + _A[1])*r + _A[2])*r + _A[3])*r + _A[4])*r + _A[5]) * q / \
           ((((( _B[0]*r + _B[1])*r + _B[2])*r + _B[3])*r + _B[4])*r + 1.0)


def _q_inverse_scalar(p: float) -> float:
    if not (0.0 < p < 1.0):
        raise ValueError(f"q_inverse: probability must lie in (0, 1), got {p}")
    if p > 0.5:
        return -_q_inverse_scalar(1.0 - p)  # 1 - p is exact here
    x = -_acklam(p)
    # Newton on Q(x) - p; Q'(x) = -phi(x). Work with the smaller tail for accuracy.
    for _ in range(2):
        pdf = math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
        if pdf == 0.0:
            break
        x += (float(q_function(x)) - p) / pdf
    return x


def q_inverse(p):
    """Inverse of the Gaussian tail function: returns x with Q(x) = p.

    Raises:
        ValueError: if any ``p`` is outside the open interval (0, 1).
    """
    arr = np.asarray(p, dtype=float)
    if arr.ndim == 0:
        return _q_inverse_scalar(float(arr))
    return np.vectorize(_q_inverse_scalar, otypes=[float])(arr)


def shannon_capacity(sinr):
    """log2(1 + sinr) in bits per channel use."""
    return np.log2(1.0 + np.asarray(sinr, dtype=float))


def dispersion(sinr, mode: str = "exact"):
    """Channel dispersion V(gamma) in bits^2.

    ``mode="approximate"`` returns the high-SINR limit 1/ln^2 2 for every input.
    """
    sinr = np.asarray(sinr, dtype=float)
    if mode == "approximate":
        return np.full_like(sinr, V_MAX)
    if mode != "exact":
        raise ValueError(f"unknown dispersion mode {mode!r}")
    return V_MAX * (1.0 - 1.0 / (1.0 + sinr) ** 2)


def fbl_bits(sinr, blocklength, target_error, mode: str = "exact"):
    """Information bits deliverable over ``blocklength`` channel uses.

    L = m C(gamma) - Q^{-1}(eps) sqrt(m V(gamma)) + log2(m). The value can be
    negative for small m or gamma; callers decide how to treat that.
    """
    m = np.asarray(blocklength, dtype=float)
    penalty = q_inverse(target_error) * np.sqrt(m * dispersion(sinr, mode))
    return m * shannon_capacity(sinr) - penalty + np.log2(m)


def error_probability(sinr, blocklength, bits, mode: str = "exact", literal: bool = False):
    """Decoding error probability for ``bits`` sent over ``blocklength`` uses.

    By default the log2(m) credit is removed from ``bits`` first so that this
    is the exact inverse of :func:`fbl_bits`. ``literal=True`` drops that
    correction and evaluates Q(sqrt(m/V) (C - L/m)) as written.
    """
    m = np.asarray(blocklength, dtype=float)
    bits = np.asarray(bits, dtype=float)
    if not literal:
        bits = bits - np.log2(m)
    v = dispersion(sinr, mode)
    with np.errstate(divide="ignore", invalid="ignore"):
        f = np.sqrt(m / v) * (shannon_capacity(sinr) - bits / m)
    return q_function(f)
