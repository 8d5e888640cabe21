"""Exact coefficient rings: rationals, sparse multivariate polynomials,
and univariate rational functions.

Everything in this package computes over a small tower of exact rings:

    QQ  ->  QQ[params]  ->  rational functions in one variable
        ->  truncated Laurent series (see :mod:`genusforge.series`)

A "ring" here is a lightweight handle object providing ``zero()``,
``one()``, ``from_fraction()``, ``coerce()``, ``is_zero()`` and
``invert()``.  Elements carry their own arithmetic through operator
overloading, so generic series code works over any level of the tower.

Polynomials are sparse: a dict from packed exponent vectors to nonzero
coefficients.  Exponents are packed seven bits per variable, so single
exponents must stay below 128 (far above anything this package needs).
A :class:`PolyRing` may declare some variables *nilpotent* with a total
degree bound; monomials exceeding the bound in those variables are
discarded on every operation.  This models formal chern roots of a
normal bundle, whose powers vanish above the dimension of the center.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd


class NotInvertibleError(ArithmeticError):
    """Raised when inverting a non-unit."""


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


def frac_str(q: Fraction) -> str:
    """Serialize a rational as "p/q" with q > 0 (always with denominator)."""
    q = as_fraction(q)
    return f"{q.numerator}/{q.denominator}"


def parse_frac(s: str) -> Fraction:
    return Fraction(s)


class RationalField:
    """The field of exact rationals; elements are ``fractions.Fraction``."""

    def zero(self):
        return Fraction(0)

    def one(self):
        return Fraction(1)

    def from_fraction(self, q):
        return as_fraction(q)

    def coerce(self, x):
        if isinstance(x, (int, Fraction)):
            return as_fraction(x)
        raise TypeError(f"cannot coerce {x!r} into QQ")

    def is_zero(self, x):
        return x == 0

    def invert(self, x):
        if x == 0:
            raise NotInvertibleError("not invertible")
        return 1 / as_fraction(x)

    def to_str(self, x):
        return frac_str(x)

    def __eq__(self, other):
        return isinstance(other, RationalField)

    def __hash__(self):
        return hash("QQ")

    def __repr__(self):
        return "QQ"


QQ = RationalField()

_SHIFT = 7
_MASK = (1 << _SHIFT) - 1


class PolyRing:
    """Sparse polynomial ring QQ[names] (or base[names]).

    ``nilpotent`` names share a total-degree ``bound``; any monomial whose
    combined degree in them exceeds the bound is treated as zero.  Units
    are elements with invertible constant term whose remaining terms are
    all nilpotent.
    """

    def __init__(self, names, nilpotent=(), bound=None, base=QQ):
        names = tuple(names)
        if len(set(names)) != len(names):
            raise ValueError("duplicate variable names")
        self.names = names
        self.base = base
        self.nilpotent = frozenset(nilpotent)
        if self.nilpotent and bound is None:
            raise ValueError("nilpotent variables need a degree bound")
        self.bound = bound
        self._index = {n: i for i, n in enumerate(names)}
        self._nil_shifts = tuple(
            self._index[n] * _SHIFT for n in names if n in self.nilpotent
        )
        for n in self.nilpotent:
            if n not in self._index:
                raise ValueError(f"unknown nilpotent variable {n!r}")

    # -- ring handle API ---------------------------------------------------

    def zero(self):
        return ParamPoly(self, {})

    def one(self):
        return ParamPoly(self, {0: self.base.one()})

    def from_fraction(self, q):
        c = self.base.from_fraction(q)
        if self.base.is_zero(c):
            return self.zero()
        return ParamPoly(self, {0: c})

    def var(self, name, power=1):
        key = power << (self._index[name] * _SHIFT)
        return ParamPoly(self, {key: self.base.one()})

    def monomial(self, exponents, coeff=1):
        key = self.pack(exponents)
        c = self.base.from_fraction(coeff) if isinstance(coeff, (int, Fraction)) else coeff
        if self._nil_degree(key) is None:
            return self.zero()
        return ParamPoly(self, {key: c})

    def coerce(self, x):
        if isinstance(x, ParamPoly):
            if x.ring == self:
                return x
            if set(x.ring.names) <= set(self.names) and x.ring.base == self.base:
                # embed a polynomial from a subring on matching names
                remap = {}
                for key, c in x.terms.items():
                    nk = self.pack(x.ring.unpack(key), partial=x.ring.names)
                    if self._nil_degree(nk) is not None:
                        remap[nk] = c
                return ParamPoly(self, remap)
            raise TypeError("polynomial from an incompatible ring")
        if isinstance(x, (int, Fraction)):
            return self.from_fraction(x)
        raise TypeError(f"cannot coerce {x!r} into {self!r}")

    def is_zero(self, x):
        return not x.terms

    def invert(self, x):
        return x.inverse()

    def to_str(self, x):
        return str(x)

    # -- exponent packing --------------------------------------------------

    def pack(self, exponents, partial=None):
        names = partial if partial is not None else self.names
        key = 0
        for name, e in zip(names, exponents):
            if e:
                if e < 0 or e > _MASK:
                    raise OverflowError("exponent out of packed range")
                key |= e << (self._index[name] * _SHIFT)
        return key

    def unpack(self, key):
        return tuple((key >> (i * _SHIFT)) & _MASK for i in range(len(self.names)))

    def _nil_degree(self, key):
        """Total degree in the nilpotent variables, or None if truncated away."""
        if not self._nil_shifts:
            return 0
        d = 0
        for s in self._nil_shifts:
            d += (key >> s) & _MASK
        if d > self.bound:
            return None
        return d

    def __eq__(self, other):
        return (
            isinstance(other, PolyRing)
            and self.names == other.names
            and self.nilpotent == other.nilpotent
            and self.bound == other.bound
            and self.base == other.base
        )

    def __hash__(self):
        return hash((self.names, self.nilpotent, self.bound))

    def __repr__(self):
        tail = ""
        if self.nilpotent:
            tail = f"; nilpotent {sorted(self.nilpotent)} <= {self.bound}"
        return f"Poly({', '.join(self.names)}{tail})"


class ParamPoly:
    """Element of a :class:`PolyRing`.  Immutable by convention."""

    __slots__ = ("ring", "terms")

    def __init__(self, ring, terms):
        self.ring = ring
        self.terms = terms

    # -- basic queries -----------------------------------------------------

    def is_zero(self):
        return not self.terms

    def constant_term(self):
        return self.terms.get(0, self.ring.base.zero())

    def is_constant(self):
        return all(k == 0 for k in self.terms)

    def coefficient(self, exponents):
        return self.terms.get(self.ring.pack(exponents), self.ring.base.zero())

    def total_degree(self):
        if not self.terms:
            return 0
        return max(sum(self.ring.unpack(k)) for k in self.terms)

    def degree_in(self, name):
        i = self.ring._index[name] * _SHIFT
        return max(((k >> i) & _MASK for k in self.terms), default=0)

    # -- arithmetic ----------------------------------------------------------

    def _coerce_other(self, other):
        if isinstance(other, ParamPoly) and other.ring == self.ring:
            return other
        if isinstance(other, (int, Fraction)):
            return self.ring.from_fraction(other)
        return None

    def __add__(self, other):
        o = self._coerce_other(other)
        if o is None:
            return NotImplemented
        base = self.ring.base
        out = dict(self.terms)
        for k, c in o.terms.items():
            if k in out:
                s = out[k] + c
                if base.is_zero(s):
                    del out[k]
                else:
                    out[k] = s
            else:
                out[k] = c
        return ParamPoly(self.ring, out)

    __radd__ = __add__

    def __neg__(self):
        return ParamPoly(self.ring, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        o = self._coerce_other(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                return self.ring.zero()
            return ParamPoly(self.ring, {k: c * other for k, c in self.terms.items()})
        if not (isinstance(other, ParamPoly) and other.ring == self.ring):
            return NotImplemented
        ring = self.ring
        base = ring.base
        nil = ring._nil_shifts
        bound = ring.bound
        out = {}
        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                k = k1 + k2
                if nil:
                    d = 0
                    for s in nil:
                        d += (k >> s) & _MASK
                    if d > bound:
                        continue
                p = c1 * c2
                if k in out:
                    s = out[k] + p
                    if base.is_zero(s):
                        del out[k]
                    else:
                        out[k] = s
                else:
                    if not base.is_zero(p):
                        out[k] = p
        return ParamPoly(self.ring, out)

    __rmul__ = __mul__

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            raise ValueError("polynomial powers must be non-negative integers")
        result = self.ring.one()
        square = self
        while n:
            if n & 1:
                result = result * square
            n >>= 1
            if n:
                square = square * square
        return result

    def __eq__(self, other):
        o = self._coerce_other(other)
        if o is None:
            return NotImplemented
        return self.terms == o.terms

    def __hash__(self):
        return hash((self.ring.names, tuple(sorted(self.terms.items()))))

    # -- units ---------------------------------------------------------------

    def inverse(self):
        """Invert a unit: constant term invertible, all other terms nilpotent."""
        ring = self.ring
        c0 = self.constant_term()
        if ring.base.is_zero(c0):
            raise NotInvertibleError("not invertible")
        for k in self.terms:
            if k == 0:
                continue
            if ring._nil_degree(k) == 0:
                # a non-nilpotent variable occurs: no inverse in this ring
                raise NotInvertibleError("not invertible")
        inv0 = ring.base.invert(c0)
        # self = c0(1 - q) with q nilpotent, so 1/self = (1 + q + q^2 + ...)/c0
        q = (ParamPoly(ring, {0: c0}) - self) * inv0
        result = ring.one()
        power = ring.one()
        for _ in range(ring.bound or 0):
            power = power * q
            if power.is_zero():
                break
            result = result + power
        return result * inv0

    # -- structure maps --------------------------------------------------------

    def substitute(self, mapping, ring=None):
        """Evaluate under name -> value.  Values live in ``ring`` (defaults to
        this ring); names missing from the mapping are sent to the target
        ring's variable of the same name."""
        target = ring if ring is not None else self.ring
        values = {}
        for name in self.ring.names:
            if name in mapping:
                v = mapping[name]
                if isinstance(v, (int, Fraction)):
                    v = target.from_fraction(v)
                values[name] = v
            else:
                values[name] = target.var(name)
        powers = {name: {0: target.one()} for name in self.ring.names}

        def vpow(name, e):
            cache = powers[name]
            if e not in cache:
                cache[e] = vpow(name, e - 1) * values[name]
            return cache[e]

        total = target.zero()
        for key, c in self.terms.items():
            term = target.from_fraction(c)
            for name, e in zip(self.ring.names, self.ring.unpack(key)):
                if e:
                    term = term * vpow(name, e)
            total = total + term
        return total

    def map_coefficients(self, fn, ring=None):
        target = ring if ring is not None else self.ring
        out = {}
        for k, c in self.terms.items():
            nc = fn(c)
            if not target.base.is_zero(nc):
                out[k] = nc
        return ParamPoly(target, out)

    # -- display -----------------------------------------------------------------

    def sorted_terms(self):
        """Terms in the canonical order: by total degree, then exponent vector."""
        items = []
        for key, c in self.terms.items():
            exps = self.ring.unpack(key)
            items.append((sum(exps), exps, c))
        items.sort(key=lambda t: (t[0], t[1]))
        return [(exps, c) for _, exps, c in items]

    def __str__(self):
        if not self.terms:
            return "0"
        base = self.ring.base
        parts = []
        for exps, c in self.sorted_terms():
            mono = "*".join(
                f"{n}^{e}" if e > 1 else n
                for n, e in zip(self.ring.names, exps)
                if e
            )
            cs = base.to_str(c) if hasattr(base, "to_str") else str(c)
            parts.append(f"({cs})*{mono}" if mono else f"({cs})")
        return " + ".join(parts)

    def __repr__(self):
        return f"ParamPoly({self})"


# -- univariate rational functions ---------------------------------------------


def _pstrip(c):
    while c and c[-1] == 0:
        c.pop()
    return c


def _padd(a, b):
    n = max(len(a), len(b))
    return _pstrip([(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)])


def _pneg(a):
    return [-x for x in a]


def _pmul(a, b):
    if not a or not b:
        return []
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                if y:
                    out[i + j] += x * y
    return _pstrip(out)


def _pdivmod(a, b):
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    a = list(a)
    q = [Fraction(0)] * max(0, len(a) - len(b) + 1)
    inv = 1 / b[-1]
    while len(a) >= len(b) and a:
        k = len(a) - len(b)
        c = a[-1] * inv
        q[k] = c
        for i, y in enumerate(b):
            a[k + i] -= c * y
        _pstrip(a)
    return _pstrip(q), a


def _pgcd(a, b):
    a, b = list(a), list(b)
    while b:
        a, b = b, _pdivmod(a, b)[1]
    if a:
        inv = 1 / a[-1]
        a = [x * inv for x in a]
    return a


class RationalFunction:
    """Fraction of two QQ-polynomials in one variable, stored gcd-reduced
    with monic denominator, so equality is structural."""

    __slots__ = ("ring", "num", "den")

    def __init__(self, ring, num, den):
        num = _pstrip([as_fraction(x) for x in num])
        den = _pstrip([as_fraction(x) for x in den])
        if not den:
            raise ZeroDivisionError("zero denominator")
        if num:
            g = _pgcd(num, den)
            if len(g) > 1:
                num = _pdivmod(num, g)[0]
                den = _pdivmod(den, g)[0]
        else:
            den = [Fraction(1)]
        lead = den[-1]
        if lead != 1:
            num = [x / lead for x in num]
            den = [x / lead for x in den]
        self.ring = ring
        self.num = tuple(num)
        self.den = tuple(den)

    def is_zero(self):
        return not self.num

    def _coerce_other(self, other):
        if isinstance(other, RationalFunction) and other.ring == self.ring:
            return other
        if isinstance(other, (int, Fraction)):
            return RationalFunction(self.ring, [as_fraction(other)], [1])
        return None

    def __add__(self, other):
        o = self._coerce_other(other)
        if o is None:
            return NotImplemented
        num = _padd(_pmul(list(self.num), list(o.den)), _pmul(list(o.num), list(self.den)))
        return RationalFunction(self.ring, num, _pmul(list(self.den), list(o.den)))

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(self.ring, _pneg(list(self.num)), list(self.den))

    def __sub__(self, other):
        o = self._coerce_other(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce_other(other)
        if o is None:
            return NotImplemented
        return RationalFunction(
            self.ring, _pmul(list(self.num), list(o.num)), _pmul(list(self.den), list(o.den))
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce_other(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __pow__(self, n):
        if n < 0:
            return self.inverse() ** (-n)
        out = self.ring.one()
        for _ in range(n):
            out = out * self
        return out

    def inverse(self):
        if not self.num:
            raise NotInvertibleError("not invertible")
        return RationalFunction(self.ring, list(self.den), list(self.num))

    def __eq__(self, other):
        o = self._coerce_other(other)
        if o is None:
            return NotImplemented
        return self.num == o.num and self.den == o.den

    def __hash__(self):
        return hash((self.num, self.den))

    def evaluate(self, x: Fraction) -> Fraction:
        x = as_fraction(x)
        num = sum(c * x**i for i, c in enumerate(self.num))
        den = sum(c * x**i for i, c in enumerate(self.den))
        if den == 0:
            raise ZeroDivisionError("pole of rational function")
        return num / den

    def _poly_str(self, coeffs):
        if not coeffs:
            return "0"
        y = self.ring.name
        parts = []
        for i, c in enumerate(coeffs):
            if c == 0:
                continue
            if i == 0:
                parts.append(frac_str(c))
            elif i == 1:
                parts.append(f"{frac_str(c)}*{y}")
            else:
                parts.append(f"{frac_str(c)}*{y}^{i}")
        return " + ".join(parts)

    def __str__(self):
        if self.den == (Fraction(1),):
            return self._poly_str(self.num)
        return f"({self._poly_str(self.num)})/({self._poly_str(self.den)})"

    def __repr__(self):
        return f"RationalFunction({self})"


class FunctionField:
    """Rational functions QQ(name) as a coefficient ring."""

    def __init__(self, name="y"):
        self.name = name

    def zero(self):
        return RationalFunction(self, [], [1])

    def one(self):
        return RationalFunction(self, [1], [1])

    def from_fraction(self, q):
        return RationalFunction(self, [as_fraction(q)], [1])

    def var(self, name=None, power=1):
        if name is not None and name != self.name:
            raise KeyError(name)
        if power >= 0:
            return RationalFunction(self, [0] * power + [1], [1])
        return RationalFunction(self, [1], [0] * (-power) + [1])

    def coerce(self, x):
        if isinstance(x, RationalFunction) and x.ring == self:
            return x
        if isinstance(x, (int, Fraction)):
            return self.from_fraction(x)
        raise TypeError(f"cannot coerce {x!r} into {self!r}")

    def is_zero(self, x):
        return x.is_zero()

    def invert(self, x):
        return x.inverse()

    def to_str(self, x):
        return str(x)

    def __eq__(self, other):
        return isinstance(other, FunctionField) and self.name == other.name

    def __hash__(self):
        return hash(("FunctionField", self.name))

    def __repr__(self):
        return f"QQ({self.name})"
