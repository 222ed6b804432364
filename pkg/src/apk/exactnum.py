"""Exact arithmetic in real quadratic fields Q(sqrt n).

A :class:`QuadReal` is ``p + q*sqrt(n)`` with rational ``p, q`` and a
square-free ``n >= 2``.  Rationals embed in every field with ``q = 0``, so
ints and Fractions mix freely with QuadReals; floats never do.

Point sets store their coordinates as integer *keys* instead of QuadReal
objects: a coordinate ``(P + Q*sqrt n)/den`` becomes the pair ``(P, Q)`` and
the denominator is shared by the whole set.  The helpers at the bottom of this
module convert between the two representations.
"""
from __future__ import annotations

import ast
import math
import operator
from fractions import Fraction
from functools import lru_cache, total_ordering
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import DiscMismatch, UsageError

Rational = Union[int, Fraction]


@lru_cache(maxsize=None)
def is_squarefree(n: int) -> bool:
    if n < 2:
        return False
    k = 2
    while k * k <= n:
        if n % (k * k) == 0:
            return False
        k += 1
    return True


def sign_pq(u: Rational, v: Rational, n: int) -> int:
    """Exact sign of ``u + v*sqrt(n)`` for rationals u, v."""
    su = (u > 0) - (u < 0)
    sv = (v > 0) - (v < 0)
    if sv == 0:
        return su
    if su == 0 or su == sv:
        return sv
    # opposite signs: compare u^2 with n v^2
    lhs, rhs = u * u, n * v * v
    if lhs == rhs:
        return 0
    return su if lhs > rhs else sv


@total_ordering
class QuadReal:
    """Immutable element ``p + q*sqrt(disc)`` of a real quadratic field."""

    __slots__ = ("p", "q", "disc")

    def __init__(self, p: Rational = 0, q: Rational = 0, disc: int = 5):
        if isinstance(p, float) or isinstance(q, float):
            raise TypeError("QuadReal does not accept floats; use Fraction or a string")
        if not is_squarefree(disc):
            raise UsageError(f"disc must be square-free and >= 2, got {disc}")
        object.__setattr__(self, "p", Fraction(p))
        object.__setattr__(self, "q", Fraction(q))
        object.__setattr__(self, "disc", int(disc))

    def __setattr__(self, name, value):
        raise AttributeError("QuadReal is immutable")

    # -- construction helpers -------------------------------------------------
    @classmethod
    def sqrt(cls, n: int) -> "QuadReal":
        return cls(0, 1, n)

    @classmethod
    def golden(cls) -> "QuadReal":
        """tau = (1 + sqrt 5)/2."""
        return cls(Fraction(1, 2), Fraction(1, 2), 5)

    def _coerce(self, other) -> "QuadReal":
        if isinstance(other, QuadReal):
            if other.disc != self.disc and other.q != 0 and self.q != 0:
                raise DiscMismatch(f"disc {self.disc} vs {other.disc}")
            if other.disc != self.disc:
                # one side is rational: move it into the other field
                if other.q == 0:
                    return QuadReal(other.p, 0, self.disc)
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return QuadReal(other, 0, self.disc)
        if isinstance(other, float):
            raise TypeError("mixed QuadReal/float arithmetic is not allowed; use to_float()")
        return NotImplemented

    def _common(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented, None
        s = self
        if s.disc != o.disc:
            # self is rational, other is not
            s = QuadReal(s.p, 0, o.disc)
        return s, o

    # -- field operations -----------------------------------------------------
    def __add__(self, other):
        s, o = self._common(other)
        if s is NotImplemented:
            return NotImplemented
        return QuadReal(s.p + o.p, s.q + o.q, s.disc)

    __radd__ = __add__

    def __neg__(self):
        return QuadReal(-self.p, -self.q, self.disc)

    def __pos__(self):
        return self

    def __sub__(self, other):
        s, o = self._common(other)
        if s is NotImplemented:
            return NotImplemented
        return QuadReal(s.p - o.p, s.q - o.q, s.disc)

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        s, o = self._common(other)
        if s is NotImplemented:
            return NotImplemented
        n = s.disc
        return QuadReal(s.p * o.p + n * s.q * o.q, s.p * o.q + s.q * o.p, n)

    __rmul__ = __mul__

    def norm(self) -> Fraction:
        """Field norm ``p^2 - n q^2`` (= x * conj(x))."""
        return self.p * self.p - self.disc * self.q * self.q

    def inverse(self) -> "QuadReal":
        nm = self.norm()
        if nm == 0:
            raise ZeroDivisionError("QuadReal division by zero")
        return QuadReal(self.p / nm, -self.q / nm, self.disc)

    def __truediv__(self, other):
        s, o = self._common(other)
        if s is NotImplemented:
            return NotImplemented
        return s * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        base = self if k >= 0 else self.inverse()
        result = QuadReal(1, 0, self.disc)
        for _ in range(abs(k)):
            result = result * base
        return result

    def conj(self) -> "QuadReal":
        return QuadReal(self.p, -self.q, self.disc)

    # -- order ----------------------------------------------------------------
    def sign(self) -> int:
        return sign_pq(self.p, self.q, self.disc)

    def cmp(self, other) -> int:
        return (self - other).sign()

    def __eq__(self, other):
        if isinstance(other, float):
            return NotImplemented
        try:
            s, o = self._common(other)
        except DiscMismatch:
            return False
        if s is NotImplemented:
            return NotImplemented
        return s.p == o.p and s.q == o.q

    def __lt__(self, other):
        return self.cmp(other) < 0

    def __hash__(self):
        if self.q == 0:
            return hash(self.p)
        return hash((self.p, self.q, self.disc))

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def is_rational(self) -> bool:
        return self.q == 0

    # -- escape hatch ---------------------------------------------------------
    def to_float(self) -> float:
        p, q, n = self.p, self.q, self.disc
        if p == 0 or q == 0 or (p > 0) == (q > 0):
            return float(p) + float(q) * math.sqrt(n)
        # opposite signs: avoid cancellation via p + q r = (p^2 - n q^2)/(p - q r)
        return float(p * p - n * q * q) / (float(p) - float(q) * math.sqrt(n))

    __float__ = to_float

    def __repr__(self):
        if self.q == 0:
            return f"QuadReal({self.p})"
        return f"QuadReal({self.p} + {self.q}*sqrt{self.disc})"

    def __str__(self):
        if self.q == 0:
            return str(self.p)
        return f"{self.p}+{self.q}*sqrt{self.disc}"

    # -- JSON -----------------------------------------------------------------
    def to_json(self) -> dict:
        return {"p": _frac_str(self.p), "q": _frac_str(self.q), "disc": self.disc}

    @classmethod
    def from_json(cls, obj: dict) -> "QuadReal":
        return cls(Fraction(obj["p"]), Fraction(obj["q"]), int(obj["disc"]))


def _frac_str(f: Fraction) -> str:
    return f"{f.numerator}/{f.denominator}"


def qf_arith(x: QuadReal, y: QuadReal, op: str) -> QuadReal:
    """Dispatch one of ``+ - * /`` (also accepts the unicode minus/times/divide)."""
    table = {"+": operator.add, "-": operator.sub, "−": operator.sub,
             "*": operator.mul, "×": operator.mul, "/": operator.truediv,
             "÷": operator.truediv}
    if op not in table:
        raise UsageError(f"unknown op {op!r}")
    if x.disc != y.disc:
        raise DiscMismatch(f"disc {x.disc} vs {y.disc}")
    return table[op](x, y)


def qf_conj(x: QuadReal) -> QuadReal:
    return x.conj()


def qf_cmp(x: QuadReal, y: QuadReal) -> int:
    """-1, 0, +1 (LT, EQ, GT)."""
    if x.disc != y.disc:
        raise DiscMismatch(f"disc {x.disc} vs {y.disc}")
    return x.cmp(y)


def as_quad(value, disc: int) -> QuadReal:
    if isinstance(value, QuadReal):
        if value.disc != disc:
            if value.q != 0:
                raise DiscMismatch(f"disc {value.disc} vs {disc}")
            return QuadReal(value.p, 0, disc)
        return value
    if isinstance(value, (int, Fraction)) and not isinstance(value, bool):
        return QuadReal(value, 0, disc)
    if isinstance(value, str):
        return as_quad(parse_exact(value, disc), disc)
    raise TypeError(f"cannot make an exact value from {type(value).__name__}")


def is_exact_scalar(value) -> bool:
    return isinstance(value, (QuadReal, Fraction)) or (
        isinstance(value, int) and not isinstance(value, bool))


# -- expression parsing --------------------------------------------------------

_NAMES = {
    "tau": (QuadReal(Fraction(1, 2), Fraction(1, 2), 5)),
    "phi": (QuadReal(Fraction(1, 2), Fraction(1, 2), 5)),
    "silver": (QuadReal(1, 1, 2)),
}


def _name_value(name: str):
    if name in _NAMES:
        return _NAMES[name]
    if name.startswith("sqrt") and name[4:].isdigit():
        n = int(name[4:])
        r = math.isqrt(n)
        if r * r == n:
            return Fraction(r)
        # pull out square factors: sqrt(k^2 m) = k sqrt m
        k, m = 1, n
        f = 2
        while f * f <= m:
            while m % (f * f) == 0:
                m //= f * f
                k *= f
            f += 1
        return QuadReal(0, k, m)
    raise UsageError(f"unknown name {name!r} in exact expression")


def parse_exact(text: str, disc: int | None = None):
    """Parse ``"tau"``, ``"sqrt2"``, ``"3/2"``, ``"1.5"``, ``"1/2+1/2*sqrt5"``...

    Returns a Fraction for rational input, else a QuadReal.  Decimal literals
    are read exactly (``"0.1"`` is 1/10).  If ``disc`` is given, rationals are
    returned as QuadReal of that field and a conflicting field raises.
    """
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise UsageError(f"cannot parse exact expression {text!r}") from exc

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            seg = ast.get_source_segment(text.strip(), node)
            return Fraction(seg) if seg is not None else Fraction(str(node.value))
        if isinstance(node, ast.Name):
            return _name_value(node.id)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp):
            a, b = ev(node.left), ev(node.right)
            if isinstance(node.op, ast.Pow):
                if not (isinstance(b, Fraction) and b.denominator == 1):
                    raise UsageError("only integer powers are supported")
                if isinstance(a, QuadReal):
                    return a ** int(b)
                return a ** int(b)
            ops = {ast.Add: operator.add, ast.Sub: operator.sub,
                   ast.Mult: operator.mul, ast.Div: operator.truediv}
            for k, f in ops.items():
                if isinstance(node.op, k):
                    return f(a, b)
        raise UsageError(f"unsupported syntax in exact expression {text!r}")

    value = ev(tree)
    if isinstance(value, QuadReal) and value.q == 0:
        value = value.p
    if disc is not None:
        return as_quad(value, disc)
    return value


# -- integer keys ----------------------------------------------------------------


def keys_from_values(values: Iterable, disc: int) -> tuple[np.ndarray, int]:
    """Exact scalars -> ``(keys[..., 2], den)`` with a common denominator."""
    qs = [as_quad(v, disc) for v in values]
    den = 1
    for x in qs:
        den = math.lcm(den, x.p.denominator, x.q.denominator)
    out = np.empty((len(qs), 2), dtype=object)
    for i, x in enumerate(qs):
        out[i, 0] = int(x.p * den)
        out[i, 1] = int(x.q * den)
    return _to_int64(out), den


def _to_int64(arr: np.ndarray) -> np.ndarray:
    if arr.size == 0:
        return np.zeros(arr.shape, dtype=np.int64)
    lim = 2 ** 62
    flat = arr.ravel()
    if any(abs(int(v)) >= lim for v in flat):
        raise OverflowError("exact coordinates exceed the int64 key range")
    return arr.astype(np.int64)


def rescale_keys(keys: np.ndarray, den: int, new_den: int) -> np.ndarray:
    if new_den == den:
        return keys
    if new_den % den:
        raise ValueError("new denominator must be a multiple of the old one")
    return keys * (new_den // den)


def keys_to_float(keys: np.ndarray, den: int, disc: int) -> np.ndarray:
    """Float values of ``(P + Q sqrt n)/den`` for a ``(..., 2)`` key array."""
    keys = np.asarray(keys)
    P = keys[..., 0].astype(float)
    Q = keys[..., 1].astype(float)
    return (P + Q * math.sqrt(disc)) / den


def key_to_quad(key, den: int, disc: int) -> QuadReal:
    return QuadReal(Fraction(int(key[0]), den), Fraction(int(key[1]), den), disc)


def sq_norm_le(diff_keys: np.ndarray, den: int, disc: int, radius: Fraction) -> bool:
    """Exact test ``|v| <= radius`` for one vector given as ``(d, 2)`` keys."""
    A = 0
    B = 0
    for P, Q in diff_keys:
        P, Q = int(P), int(Q)
        A += P * P + disc * Q * Q
        B += 2 * P * Q
    # |v|^2 = (A + B sqrt n)/den^2  <=  radius^2
    u = Fraction(radius) ** 2 * den * den - A
    return sign_pq(u, -B, disc) >= 0


# -- small exact matrices ----------------------------------------------------------


def qmat_mul(a: Sequence[Sequence[QuadReal]], b: Sequence[Sequence[QuadReal]]):
    n, k, m = len(a), len(b), len(b[0])
    return [[sum((a[i][t] * b[t][j] for t in range(k)), start=a[i][0] * 0) for j in range(m)]
            for i in range(n)]


def qmat_transpose(a):
    return [list(col) for col in zip(*a)]


def qmat_det(a) -> QuadReal:
    m = [list(r) for r in a]
    n = len(m)
    det = m[0][0] * 0 + 1
    for c in range(n):
        piv = next((r for r in range(c, n) if m[r][c] != 0), None)
        if piv is None:
            return det * 0
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            det = -det
        det = det * m[c][c]
        inv = m[c][c].inverse() if isinstance(m[c][c], QuadReal) else 1 / m[c][c]
        for r in range(c + 1, n):
            f = m[r][c] * inv
            if f != 0:
                m[r] = [m[r][j] - f * m[c][j] for j in range(n)]
    return det


def qmat_inv(a):
    n = len(a)
    one = a[0][0] * 0 + 1
    zero = a[0][0] * 0
    m = [list(a[i]) + [one if i == j else zero for j in range(n)] for i in range(n)]
    for c in range(n):
        piv = next((r for r in range(c, n) if m[r][c] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        m[c], m[piv] = m[piv], m[c]
        inv = m[c][c].inverse()
        m[c] = [v * inv for v in m[c]]
        for r in range(n):
            if r != c and m[r][c] != 0:
                f = m[r][c]
                m[r] = [m[r][j] - f * m[c][j] for j in range(2 * n)]
    return [row[n:] for row in m]
