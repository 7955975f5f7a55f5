"""Signed extended-range reals stored as ``(sign, log|value|)``.

Kernel magnitudes such as ``h0(t)**k`` with ``k ~ 1e5`` overflow every native
float type, so they are carried around as natural logs.  :class:`LogReal`
is a small immutable value type; :func:`logsumexp` is the bulk helper used
on plain arrays of logs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "LogReal",
    "ZERO",
    "ONE",
    "from_ln",
    "from_value",
    "mul",
    "add",
    "sub",
    "lsum",
    "compare",
    "logsumexp",
]


@dataclass(frozen=True)
class LogReal:
    """A real number ``sign * exp(loge)``; ``sign == 0`` means exactly zero."""

    sign: int
    loge: float = 0.0

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise ValueError(f"sign must be -1, 0 or 1, got {self.sign!r}")
        if self.sign != 0 and not math.isfinite(self.loge):
            raise ValueError(f"loge must be finite, got {self.loge!r}")

    @property
    def is_zero(self) -> bool:
        return self.sign == 0

    def to_value(self) -> float:
        if self.sign == 0:
            return 0.0
        return self.sign * math.exp(self.loge)

    def __neg__(self) -> LogReal:
        return LogReal(-self.sign, self.loge)

    def __mul__(self, other: LogReal) -> LogReal:
        return mul(self, other)

    def __truediv__(self, other: LogReal) -> LogReal:
        if other.sign == 0:
            raise ZeroDivisionError("LogReal division by zero")
        if self.sign == 0:
            return ZERO
        return LogReal(self.sign * other.sign, self.loge - other.loge)

    def __add__(self, other: LogReal) -> LogReal:
        return add(self, other)

    def __sub__(self, other: LogReal) -> LogReal:
        return sub(self, other)

    def __pow__(self, p: float) -> LogReal:
        if self.sign == 0:
            if p <= 0:
                raise ZeroDivisionError("0 raised to a non-positive power")
            return ZERO
        if self.sign < 0 and p != int(p):
            raise ValueError("negative LogReal raised to a non-integer power")
        sign = -1 if (self.sign < 0 and int(p) % 2) else 1
        return LogReal(sign, self.loge * p)

    def __eq__(self, other) -> bool:
        if not isinstance(other, LogReal):
            return NotImplemented
        return compare(self, other) == 0

    def __lt__(self, other: LogReal) -> bool:
        return compare(self, other) < 0

    def __le__(self, other: LogReal) -> bool:
        return compare(self, other) <= 0

    def __gt__(self, other: LogReal) -> bool:
        return compare(self, other) > 0

    def __ge__(self, other: LogReal) -> bool:
        return compare(self, other) >= 0

    def __hash__(self):
        return hash((0, 0.0) if self.sign == 0 else (self.sign, self.loge))

    def __repr__(self):
        if self.sign == 0:
            return "LogReal(0)"
        return f"LogReal({'+' if self.sign > 0 else '-'}exp({self.loge!r}))"


ZERO = LogReal(0, 0.0)
ONE = LogReal(1, 0.0)


def from_ln(l: float, sign: int = 1) -> LogReal:
    """Return ``sign * exp(l)``."""
    if sign not in (-1, 1):
        raise ValueError("sign must be +1 or -1")
    return LogReal(sign, float(l))


def from_value(v: float) -> LogReal:
    if v == 0:
        return ZERO
    return LogReal(1 if v > 0 else -1, math.log(abs(v)))


def mul(a: LogReal, b: LogReal) -> LogReal:
    if a.sign == 0 or b.sign == 0:
        return ZERO
    return LogReal(a.sign * b.sign, a.loge + b.loge)


def add(a: LogReal, b: LogReal) -> LogReal:
    if a.sign == 0:
        return b
    if b.sign == 0:
        return a
    if a.loge < b.loge:
        a, b = b, a
    delta = b.loge - a.loge  # <= 0
    if a.sign == b.sign:
        return LogReal(a.sign, a.loge + math.log1p(math.exp(delta)))
    if delta == 0.0:
        return ZERO
    return LogReal(a.sign, a.loge + math.log(-math.expm1(delta)))


def sub(a: LogReal, b: LogReal) -> LogReal:
    return add(a, -b)


def lsum(terms: Iterable[LogReal]) -> LogReal:
    """Sum of LogReals by max extraction and exactly rounded residual sum.

    Mixed-sign input is accepted, but the relative accuracy is only
    meaningful when the result does not cancel catastrophically.
    """
    terms = [x for x in terms if x.sign != 0]
    if not terms:
        return ZERO
    top = max(x.loge for x in terms)
    s = math.fsum(x.sign * math.exp(x.loge - top) for x in terms)
    if s == 0.0:
        return ZERO
    return LogReal(1 if s > 0 else -1, top + math.log(abs(s)))


def compare(a: LogReal, b: LogReal) -> int:
    """Three-way comparison of represented values."""
    if a.sign != b.sign:
        return -1 if a.sign < b.sign else 1
    if a.sign == 0 or a.loge == b.loge:
        return 0
    bigger = a.loge > b.loge
    if a.sign < 0:
        bigger = not bigger
    return 1 if bigger else -1


def logsumexp(logs: Sequence[float] | np.ndarray) -> float:
    """``log(sum(exp(logs)))`` for same-sign terms; ``-inf`` for no terms."""
    x = np.asarray(logs, dtype=float)
    if x.size == 0:
        return -math.inf
    top = float(np.max(x))
    if top == -math.inf:
        return -math.inf
    return top + math.log(math.fsum(np.exp(x - top)))
