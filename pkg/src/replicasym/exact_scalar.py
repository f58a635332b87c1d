"""Exact amplitudes of the form ``(p + i q) * sqrt(m)``.

``p`` and ``q`` are rationals and ``m`` is a square-free positive integer.
This is enough to carry every constant that shows up when replicas of
the library states are projected: each state has a single global radical,
so products stay in the tower and sums only ever meet a matching radical.

When two incompatible radicals are added the result degrades to an
:class:`ApproxScalar`.  Approximate values are contagious: anything computed
from one is approximate as well, and carries ``exact = False``.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from numbers import Rational

from sympy import factorint

__all__ = [
    "ExactScalar",
    "ApproxScalar",
    "ZERO",
    "ONE",
    "ZERO_THRESHOLD",
    "AMBIGUOUS_THRESHOLD",
    "PRUNE_THRESHOLD",
    "as_scalar",
    "add",
    "abs_sq",
    "zero_status",
    "squarefree_split",
    "common_scale",
]

# Residual norm^2 on the float path: below ZERO_THRESHOLD is zero, up to
# AMBIGUOUS_THRESHOLD is reported as ambiguous, above is nonzero.
ZERO_THRESHOLD = 1e-24
AMBIGUOUS_THRESHOLD = 1e-12
# Approximate amplitudes with |a|^2 below this are dropped from sparse states.
PRUNE_THRESHOLD = 1e-30


@lru_cache(maxsize=8192)
def squarefree_split(n: int) -> tuple[int, int]:
    """Return ``(k, m)`` with ``n == k*k*m`` and ``m`` square-free."""
    if n <= 0:
        raise ValueError(f"expected a positive integer, got {n}")
    k = m = 1
    for p, e in factorint(n).items():
        k *= p ** (e // 2)
        if e % 2:
            m *= p
    return k, m


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot read {x!r} as an exact rational")


class ExactScalar:
    """Gaussian rational times the square root of a square-free integer.

    Parameters
    ----------
    re, im : rational-like
        Real and imaginary parts of the Gaussian-rational coefficient.
    root : rational-like, optional
        Nonnegative radicand.  Perfect-square factors are absorbed into the
        coefficient, so ``ExactScalar(1, root=Fraction(1, 6))`` becomes
        ``(1/6) * sqrt(6)``.  A zero radicand gives the zero scalar.
    """

    __slots__ = ("re", "im", "root")
    exact = True

    def __init__(self, re=0, im=0, root=1):
        re = _frac(re)
        im = _frac(im)
        root = _frac(root)
        if root < 0:
            raise ValueError("root scale must be nonnegative")
        if root == 0 or (re == 0 and im == 0):
            re = im = Fraction(0)
            m = 1
        elif root.denominator == 1 and root.numerator == 1:
            m = 1
        else:
            # sqrt(p/q) = sqrt(p*q)/q
            k, m = squarefree_split(root.numerator * root.denominator)
            factor = Fraction(k, root.denominator)
            re *= factor
            im *= factor
        self.re = re
        self.im = im
        self.root = m

    @classmethod
    def _raw(cls, re: Fraction, im: Fraction, root: int) -> "ExactScalar":
        obj = object.__new__(cls)
        if re == 0 and im == 0:
            root = 1
        obj.re = re
        obj.im = im
        obj.root = root
        return obj

    @classmethod
    def sqrt(cls, q) -> "ExactScalar":
        """``sqrt(q)`` for a nonnegative rational ``q``."""
        return cls(1, 0, q)

    # -- predicates ---------------------------------------------------------
    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def is_real(self) -> bool:
        return self.im == 0

    # -- arithmetic ---------------------------------------------------------
    def __neg__(self):
        return ExactScalar._raw(-self.re, -self.im, self.root)

    def __pos__(self):
        return self

    def conjugate(self):
        return ExactScalar._raw(self.re, -self.im, self.root)

    def abs_sq(self) -> Fraction:
        return (self.re * self.re + self.im * self.im) * self.root

    def __add__(self, other):
        other = as_scalar(other)
        if not other.exact:
            return ApproxScalar(complex(self) + other.value)
        if other.is_zero():
            return self
        if self.is_zero():
            return other
        if self.root == other.root:
            return ExactScalar._raw(self.re + other.re, self.im + other.im, self.root)
        return ApproxScalar(complex(self) + complex(other))

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-as_scalar(other))

    def __rsub__(self, other):
        return as_scalar(other) + (-self)

    def __mul__(self, other):
        if isinstance(other, int):
            return ExactScalar._raw(self.re * other, self.im * other, self.root)
        other = as_scalar(other)
        if not other.exact:
            return ApproxScalar(complex(self) * other.value)
        g = math.gcd(self.root, other.root)
        root = (self.root // g) * (other.root // g)
        re = self.re * other.re - self.im * other.im
        im = self.re * other.im + self.im * other.re
        if g != 1:
            re *= g
            im *= g
        return ExactScalar._raw(re, im, root)

    __rmul__ = __mul__

    def inverse(self):
        if self.is_zero():
            raise ZeroDivisionError("inverse of exact zero")
        # 1/(z sqrt m) = conj(z) sqrt(m) / (|z|^2 m)
        d = (self.re * self.re + self.im * self.im) * self.root
        return ExactScalar._raw(self.re / d, -self.im / d, self.root)

    def __truediv__(self, other):
        other = as_scalar(other)
        if not other.exact:
            return ApproxScalar(complex(self) / other.value)
        return self * other.inverse()

    def __rtruediv__(self, other):
        return as_scalar(other) * self.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        result = ONE
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # -- conversions --------------------------------------------------------
    def __complex__(self):
        s = math.sqrt(self.root)
        return complex(float(self.re) * s, float(self.im) * s)

    def __float__(self):
        if self.im != 0:
            raise TypeError("complex scalar has no float value")
        return float(self.re) * math.sqrt(self.root)

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other):
        if isinstance(other, ExactScalar):
            return self.re == other.re and self.im == other.im and self.root == other.root
        if isinstance(other, (int, Fraction)):
            return self.im == 0 and self.root == 1 and self.re == other
        return NotImplemented

    def __hash__(self):
        if self.im == 0 and self.root == 1:
            return hash(self.re)
        return hash((self.re, self.im, self.root))

    def __repr__(self):
        return f"ExactScalar({self.re}, {self.im}, root={self.root})"

    def __str__(self):
        if self.im == 0:
            coef = str(self.re)
        elif self.re == 0:
            coef = f"{self.im}i"
        else:
            coef = f"({self.re}{'+' if self.im > 0 else '-'}{abs(self.im)}i)"
        if self.root == 1:
            return coef
        return f"{coef}*sqrt({self.root})"

    def to_json(self) -> dict:
        return {
            "num": self.re.numerator,
            "den": self.re.denominator,
            "imag_num": self.im.numerator,
            "imag_den": self.im.denominator,
            "root_num": self.root,
            "root_den": 1,
            "approx": _json_complex(complex(self)),
            "exact": True,
        }


class ApproxScalar:
    """Double precision stand-in used once exact closure is lost."""

    __slots__ = ("value",)
    exact = False

    def __init__(self, value):
        self.value = complex(value)

    def is_zero(self) -> bool:
        return self.abs_sq() < PRUNE_THRESHOLD

    def is_real(self) -> bool:
        return self.value.imag == 0

    def abs_sq(self) -> float:
        return self.value.real ** 2 + self.value.imag ** 2

    def conjugate(self):
        return ApproxScalar(self.value.conjugate())

    def __neg__(self):
        return ApproxScalar(-self.value)

    def __pos__(self):
        return self

    def __add__(self, other):
        return ApproxScalar(self.value + complex(as_scalar(other)))

    __radd__ = __add__

    def __sub__(self, other):
        return ApproxScalar(self.value - complex(as_scalar(other)))

    def __rsub__(self, other):
        return ApproxScalar(complex(as_scalar(other)) - self.value)

    def __mul__(self, other):
        return ApproxScalar(self.value * complex(as_scalar(other)))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return ApproxScalar(self.value / complex(as_scalar(other)))

    def __rtruediv__(self, other):
        return ApproxScalar(complex(as_scalar(other)) / self.value)

    def __pow__(self, n):
        return ApproxScalar(self.value ** n)

    def inverse(self):
        return ApproxScalar(1 / self.value)

    def __complex__(self):
        return self.value

    def __float__(self):
        if self.value.imag != 0:
            raise TypeError("complex scalar has no float value")
        return self.value.real

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other):
        if isinstance(other, ApproxScalar):
            return self.value == other.value
        return NotImplemented

    def __hash__(self):
        return hash(self.value)

    def __repr__(self):
        return f"ApproxScalar({self.value!r})"

    def __str__(self):
        v = self.value
        return repr(v.real) if v.imag == 0 else repr(v)

    def to_json(self) -> dict:
        return {"approx": _json_complex(self.value), "exact": False}


def _json_complex(z: complex):
    return z.real if z.imag == 0 else [z.real, z.imag]


ZERO = ExactScalar()
ONE = ExactScalar(1)


def as_scalar(x):
    """Coerce ints, rationals, rational strings, floats and complexes."""
    if isinstance(x, (ExactScalar, ApproxScalar)):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a scalar")
    if isinstance(x, (int, Fraction, Rational, str)):
        return ExactScalar(x)
    if isinstance(x, (float, complex)):
        return ApproxScalar(x)
    raise TypeError(f"cannot convert {x!r} to a scalar")


def add(a, b):
    """Sum of two scalars; approximate when the radicals are incompatible."""
    return as_scalar(a) + as_scalar(b)


def abs_sq(a):
    """``|a|^2``: a Fraction on the exact path, a float otherwise."""
    return as_scalar(a).abs_sq()


def zero_status(norm_sq, exact: bool) -> str:
    """Classify a squared residual norm as ``zero``, ``nonzero`` or ``ambiguous``."""
    if exact:
        return "zero" if norm_sq == 0 else "nonzero"
    norm_sq = float(norm_sq)
    if norm_sq < ZERO_THRESHOLD:
        return "zero"
    if norm_sq < AMBIGUOUS_THRESHOLD:
        return "ambiguous"
    return "nonzero"


def common_scale(values):
    """Factor exact real scalars sharing one radical as ``scale * ints``.

    Returns ``(scale, ints)`` or ``None`` when the values are not all exact,
    real and over the same radical.  Engines use this to run their inner
    loops on Python integers.
    """
    root = None
    dens = 1
    nums = []
    for v in values:
        if not isinstance(v, ExactScalar) or v.im != 0:
            return None
        if v.is_zero():
            nums.append(v.re)
            continue
        if root is None:
            root = v.root
        elif v.root != root:
            return None
        nums.append(v.re)
        dens = dens * v.re.denominator // math.gcd(dens, v.re.denominator)
    if root is None:
        root = 1
    ints = [int(x * dens) for x in nums]
    g = 0
    for n in ints:
        g = math.gcd(g, n)
    if g == 0:
        g = 1
    ints = [n // g for n in ints]
    return ExactScalar._raw(Fraction(g, dens), Fraction(0), root), ints

