"""
The perspective link-energy function h(y, t) = t * (exp(a*y/t) - 1).

h is the energy a link of unit gain spends to move y bits in t seconds, with
a = ln2 / bandwidth. It is jointly convex in (y, t) and strictly decreasing in
t for y > 0, approaching a*y as t grows.
"""

import math
from typing import Tuple

import numpy as np
from scipy.optimize import brentq


def _perspective(y: float, t: float, a: float) -> Tuple[float, np.ndarray, np.ndarray]:
    """Value, gradient and Hessian of t*(exp(a*y/t) - 1); inf when exp overflows."""
    u = a * y / t
    with np.errstate(over='ignore', invalid='ignore'):
        grow = float(np.exp(u))
        value = t * float(np.expm1(u))
        gradient = np.array([a * grow, grow * (1.0 - u) - 1.0])
        ratio = y / t
        hessian = (a * a * grow / t) * np.array([[1.0, -ratio], [-ratio, ratio * ratio]])
    return value, gradient, hessian


def perspective_eval(y: float, t: float, bandwidth: float) -> Tuple[float, np.ndarray, np.ndarray]:
    """
    Evaluate the link-energy perspective and its derivatives.

    Args:
        y: Bits to move, >= 0
        t: Slot length in seconds, > 0
        bandwidth: Link bandwidth in hertz

    Returns:
        (value, gradient (d/dy, d/dt), 2x2 Hessian)
    """
    if not t > 0:
        raise ValueError(f"perspective needs t > 0, got t={t}")
    if y < 0:
        raise ValueError(f"perspective needs y >= 0, got y={y}")
    return _perspective(y, t, math.log(2.0) / bandwidth)


def energy_limit(bits: float, gain: float, bandwidth: float) -> float:
    """Energy of a link as its slot grows without bound: bits*ln2/(gain*B)."""
    return bits * math.log(2.0) / (gain * bandwidth)


def headroom_exponent(headroom: float) -> float:
    """
    The exponent v > 0 with (exp(v) - 1)/v = 1 + headroom.

    A slot of length a*y/v then costs exactly (1 + headroom) times the
    t->inf energy limit.
    """
    if headroom <= 0:
        raise ValueError(f"headroom must be positive, got {headroom}")

    def excess(v: float) -> float:
        return float(np.expm1(v)) / v - (1.0 + headroom)

    upper = 1.0
    while excess(upper) < 0:
        upper *= 2.0
    return brentq(excess, 1e-12, upper, xtol=1e-15, rtol=1e-14)
