"""Bit-interleaving pairing on arbitrary-precision naturals.

``mingle(a, b)`` builds the number whose even-position bits come from ``b``
and whose odd-position bits come from ``a`` (bit 2k of the result is bit k
of ``b``, bit 2k+1 is bit k of ``a``).  It is a bijection N x N -> N, and
the fold variants extend it to fixed-length tuples.
"""

from __future__ import annotations

from collections.abc import Sequence

# Byte-at-a-time tables: _SPREAD[x] has bit k of x moved to bit 2k,
# _COMPACT[x] gathers the even bits of a 16-bit value back into a byte.
_SPREAD = [0] * 256
for _i in range(256):
    _s = 0
    for _k in range(8):
        if _i >> _k & 1:
            _s |= 1 << (2 * _k)
    _SPREAD[_i] = _s

_COMPACT = [0] * 65536
for _i in range(65536):
    _c = 0
    for _k in range(8):
        if _i >> (2 * _k) & 1:
            _c |= 1 << _k
    _COMPACT[_i] = _c


def _check_nat(n: int, what: str) -> None:
    if not isinstance(n, int) or isinstance(n, bool):
        raise TypeError(f"{what} must be an int, got {type(n).__name__}")
    if n < 0:
        raise ValueError(f"{what} must be nonnegative, got {n}")


def _spread(x: int) -> int:
    out = 0
    shift = 0
    while x:
        out |= _SPREAD[x & 0xFF] << shift
        x >>= 8
        shift += 16
    return out


def _compact(x: int) -> int:
    out = 0
    shift = 0
    while x:
        out |= _COMPACT[x & 0xFFFF] << shift
        x >>= 16
        shift += 8
    return out


def mingle(a: int, b: int) -> int:
    """Interleave the bits of two naturals, ``b`` taking the even positions."""
    _check_nat(a, "a")
    _check_nat(b, "b")
    return (_spread(a) << 1) | _spread(b)


def unmingle(n: int) -> tuple[int, int]:
    """Inverse of :func:`mingle`: recover ``(a, b)`` from ``mingle(a, b)``."""
    _check_nat(n, "n")
    return _compact(n >> 1), _compact(n)


def mingle_fold(codes: Sequence[int]) -> int:
    """Left-fold ``mingle`` over a nonempty sequence of naturals."""
    if not codes:
        raise ValueError("mingle_fold requires at least one code")
    acc = codes[0]
    _check_nat(acc, "codes[0]")
    for c in codes[1:]:
        acc = mingle(acc, c)
    return acc


def unmingle_fold(n: int, k: int) -> list[int]:
    """Split ``n`` into the ``k`` codes whose mingle_fold it is."""
    _check_nat(n, "n")
    if not isinstance(k, int) or k < 1:
        raise ValueError(f"k must be a positive int, got {k!r}")
    out = []
    for _ in range(k - 1):
        n, last = unmingle(n)
        out.append(last)
    out.append(n)
    out.reverse()
    return out
