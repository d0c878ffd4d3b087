"""Exact fixed-point arithmetic for constraint slacks.

Every float is a dyadic rational, so a set of floats can be scaled by a
common power of two into Python integers without rounding. Those integers
are split into signed limbs of ``LIMB_BITS`` bits stored as float64. Sums of
limbs stay far below 2**53, so BLAS matrix products on limb arrays are exact
and the final result can be reassembled as an exact integer.
"""

from __future__ import annotations

import math

import numpy as np

LIMB_BITS = 30
_MASK = (1 << LIMB_BITS) - 1


def common_exponent(values) -> int:
    """Largest ``e`` such that every value is an integer multiple of ``2**e``."""
    e = 0
    for v in values:
        if v == 0:
            continue
        _, den = float(v).as_integer_ratio()
        e = min(e, -(den.bit_length() - 1))
    return e


def to_scaled_int(v: float, exponent: int) -> int:
    num, den = float(v).as_integer_ratio()
    scaled = num << -exponent if exponent <= 0 else num >> exponent
    q, r = divmod(scaled, den)
    assert r == 0, "value not representable at this exponent"
    return q


def limb_count(ints) -> int:
    bits = max((abs(v).bit_length() for v in ints), default=0)
    return max(1, -(-bits // LIMB_BITS))


def to_limbs(ints, nlimbs: int) -> np.ndarray:
    """Signed limb decomposition, shape ``(nlimbs, len(ints))``."""
    out = np.zeros((nlimbs, len(ints)), dtype=np.float64)
    for i, v in enumerate(ints):
        sign = -1 if v < 0 else 1
        a = abs(v)
        for k in range(nlimbs):
            out[k, i] = sign * ((a >> (LIMB_BITS * k)) & _MASK)
    return out


def shortfall(slack: np.ndarray) -> int:
    """Exact ``sum(max(0, -value))`` over limb-encoded integers.

    ``slack`` has the limb axis first; every entry must hold an exact
    integer. Returns the result in scaled integer units.
    """
    nlimbs = slack.shape[0]
    if slack.shape[1:] == () or slack[0].size == 0:
        return 0
    ints = slack.reshape(nlimbs, -1).astype(np.int64)
    digits = []
    carry = np.zeros(ints.shape[1], dtype=np.int64)
    for k in range(nlimbs - 1):
        c = ints[k] + carry
        digits.append(c & _MASK)
        carry = c >> LIMB_BITS
    top = ints[nlimbs - 1] + carry
    neg = top < 0
    if not neg.any():
        return 0
    # value = top * 2^(B(L-1)) + sum_k digits[k] * 2^(Bk), digits in [0, 2^B)
    t = top[neg]
    total = -(int((t >> LIMB_BITS).sum()) << (LIMB_BITS * nlimbs))
    total -= int((t & _MASK).sum()) << (LIMB_BITS * (nlimbs - 1))
    for k, d in enumerate(digits):
        total -= int(d[neg].sum()) << (LIMB_BITS * k)
    return total


def from_limbs(limbs: np.ndarray) -> int:
    """Exact integer from a single limb vector (limb axis only)."""
    total = 0
    for k, v in enumerate(limbs):
        total += int(v) << (LIMB_BITS * k)
    return total


def to_float(value: int, exponent: int) -> float:
    """Correctly rounded ``value * 2**exponent``."""
    if value == 0:
        return 0.0
    return math.ldexp(float(value), exponent)
