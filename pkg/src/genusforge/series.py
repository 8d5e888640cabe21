"""Truncated formal power series, Laurent series and bivariate series.

Precision is tracked honestly.  Every series records the last exponent
whose coefficient it actually knows (``order``); binary operations
compute the order of the result from the orders and valuations of the
operands, never claiming coefficients beyond what the inputs support.
Laurent series may also be exact (``order=None``), which is how finite
Laurent polynomials such as ``n - t`` enter computations.

Coefficients live in any exact ring from :mod:`genusforge.polynomials`
(or in a nested series ring from this module), accessed through the
shared ring-handle protocol.
"""

from __future__ import annotations

from fractions import Fraction
from math import factorial

from .polynomials import NotInvertibleError, as_fraction


class PrecisionError(ArithmeticError):
    """An operation would need coefficients beyond the valid window."""


def _minord(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def _addord(o, k):
    return None if o is None else o + k


class Series:
    """Power series truncated at ``order`` (inclusive) over ``ring``."""

    __slots__ = ("ring", "coeffs", "order", "var")

    def __init__(self, ring, coeffs, order, var="x"):
        if order < 0:
            raise ValueError("order must be >= 0")
        coeffs = [ring.coerce(c) for c in coeffs[: order + 1]]
        while len(coeffs) < order + 1:
            coeffs.append(ring.zero())
        self.ring = ring
        self.coeffs = coeffs
        self.order = order
        self.var = var

    # -- construction helpers ------------------------------------------------

    @classmethod
    def zero(cls, ring, order, var="x"):
        return cls(ring, [], order, var)

    @classmethod
    def one(cls, ring, order, var="x"):
        return cls(ring, [ring.one()], order, var)

    @classmethod
    def identity(cls, ring, order, var="x"):
        return cls(ring, [ring.zero(), ring.one()], order, var)

    def __getitem__(self, i):
        if i < 0:
            raise IndexError("power series have no negative exponents")
        if i > self.order:
            raise PrecisionError(f"coefficient {i} beyond truncation order {self.order}")
        return self.coeffs[i]

    def valuation(self):
        for i, c in enumerate(self.coeffs):
            if not self.ring.is_zero(c):
                return i
        return self.order + 1

    def is_zero(self):
        return all(self.ring.is_zero(c) for c in self.coeffs)

    def truncate(self, order, var=None):
        if order > self.order:
            raise PrecisionError("cannot extend a truncated series")
        return Series(self.ring, self.coeffs[: order + 1], order, var or self.var)

    def _check(self, other):
        if not isinstance(other, Series):
            return None
        if other.ring != self.ring:
            raise ValueError("binary operations require matching coefficient rings")
        return other

    # -- arithmetic -----------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, (int, Fraction)) or (
            not isinstance(other, Series) and _is_scalar(self.ring, other)
        ):
            c = list(self.coeffs)
            c[0] = c[0] + self.ring.coerce(other)
            return Series(self.ring, c, self.order, self.var)
        o = self._check(other)
        if o is None:
            return NotImplemented
        order = min(self.order, o.order)
        return Series(
            self.ring,
            [self.coeffs[i] + o.coeffs[i] for i in range(order + 1)],
            order,
            self.var,
        )

    __radd__ = __add__

    def __neg__(self):
        return Series(self.ring, [-c for c in self.coeffs], self.order, self.var)

    def __sub__(self, other):
        if isinstance(other, Series):
            return self + (-other)
        return self + (-self.ring.coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Series):
            try:
                s = self.ring.coerce(other)
            except TypeError:
                return NotImplemented
            return Series(self.ring, [c * s for c in self.coeffs], self.order, self.var)
        o = self._check(other)
        # valuations sharpen the valid order: a = x^va a', b = x^vb b'
        va, vb = self.valuation(), o.valuation()
        order = min(self.order + vb, o.order + va)
        zero = self.ring.zero()
        out = [zero] * (order + 1)
        for i in range(min(self.order, order) + 1):
            ci = self.coeffs[i]
            if self.ring.is_zero(ci):
                continue
            for j in range(min(o.order, order - i) + 1):
                cj = o.coeffs[j]
                if not self.ring.is_zero(cj):
                    out[i + j] = out[i + j] + ci * cj
        return Series(self.ring, out, order, self.var)

    __rmul__ = __mul__

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            raise ValueError("series powers must be non-negative integers")
        result = Series.one(self.ring, self.order, self.var)
        for _ in range(n):
            result = result * self
        return result

    def __eq__(self, other):
        if isinstance(other, Series):
            o = self._check(other)
            order = min(self.order, o.order)
            return all(
                not self.ring.is_zero(self.coeffs[i] - o.coeffs[i]) is False or
                self.ring.is_zero(self.coeffs[i] - o.coeffs[i])
                for i in range(order + 1)
            )
        return NotImplemented

    def __hash__(self):
        return None

    # -- calculus --------------------------------------------------------------

    def derivative(self):
        if self.order == 0:
            raise PrecisionError("cannot differentiate an order-0 series")
        return Series(
            self.ring,
            [self.coeffs[i] * Fraction(i) for i in range(1, self.order + 1)],
            self.order - 1,
            self.var,
        )

    def integrate(self):
        """Antiderivative with zero constant term."""
        out = [self.ring.zero()]
        for i, c in enumerate(self.coeffs):
            out.append(c * Fraction(1, i + 1))
        return Series(self.ring, out, self.order + 1, self.var)

    def eval_nilpotent(self, value, max_power):
        """Sum c_i * value^i for i <= max_power, for nilpotent ``value``.

        Requires the truncation order to cover max_power, so the result
        is exact whenever value^(max_power+1) = 0.
        """
        if self.order < max_power:
            raise PrecisionError("series order too small for nilpotent evaluation")
        acc = None
        power = None
        for i in range(max_power + 1):
            c = self.coeffs[i]
            term = c if i == 0 else power * c
            acc = term if acc is None else acc + term
            if i < max_power:
                power = value if power is None else power * value
        return acc

    def __str__(self):
        parts = []
        to_str = getattr(self.ring, "to_str", str)
        for i, c in enumerate(self.coeffs):
            if not self.ring.is_zero(c):
                parts.append(f"({to_str(c)})*{self.var}^{i}" if i else f"({to_str(c)})")
        body = " + ".join(parts) if parts else "0"
        return f"{body} + O({self.var}^{self.order + 1})"

    def __repr__(self):
        return f"Series({self})"


def _is_scalar(ring, x):
    try:
        ring.coerce(x)
        return True
    except TypeError:
        return False


def invert_unit(s: Series) -> Series:
    """Multiplicative inverse of a series whose constant term is a unit."""
    ring = s.ring
    try:
        b0 = ring.invert(s.coeffs[0])
    except NotInvertibleError:
        raise NotInvertibleError("not invertible") from None
    out = [b0]
    for n in range(1, s.order + 1):
        acc = ring.zero()
        for k in range(1, n + 1):
            if not ring.is_zero(s.coeffs[k]):
                acc = acc + s.coeffs[k] * out[n - k]
        out.append(-(b0 * acc))
    return Series(ring, out, s.order, s.var)


def compose(outer: Series, inner: Series) -> Series:
    """outer(inner) for inner with zero constant term."""
    if not inner.ring.is_zero(inner.coeffs[0]):
        raise ValueError("composition needs inner series with zero constant term")
    if outer.ring != inner.ring:
        raise ValueError("binary operations require matching coefficient rings")
    order = min(outer.order, inner.order)
    acc = Series(inner.ring, [outer.coeffs[min(outer.order, order)]], order, inner.var)
    for k in range(min(outer.order, order) - 1, -1, -1):
        acc = acc * inner + outer.coeffs[k]
        acc = acc.truncate(order) if acc.order > order else acc
    return acc


def reversion(f: Series) -> Series:
    """Compositional inverse: compose(f, reversion(f)) = identity.

    Newton iteration g <- g - (f(g) - y) / f'(g), starting from y/f'(0).
    """
    ring = f.ring
    if not ring.is_zero(f.coeffs[0]):
        raise ValueError("reversion needs f(0) = 0")
    try:
        f1inv = ring.invert(f.coeffs[1])
    except NotInvertibleError:
        raise NotInvertibleError("reversion needs unit linear coefficient") from None
    N = f.order
    var = "y" if f.var == "x" else f.var
    g = Series(ring, [ring.zero(), f1inv], N, var)
    ident = Series.identity(ring, N, var)
    fp = f.derivative()
    steps = 0
    while True:
        defect = compose(f, g) - ident
        if defect.is_zero():
            return g
        steps += 1
        if steps > N + 2:
            raise ArithmeticError("reversion failed to converge")
        corr = defect * invert_unit(compose(fp, g))
        g = Series(ring, [g.coeffs[i] - corr.coeffs[i] for i in range(N + 1)], N, var)


def series_exp(s: Series) -> Series:
    """exp of a series with zero constant term."""
    if not s.ring.is_zero(s.coeffs[0]):
        raise ValueError("exp needs zero constant term")
    acc = Series.one(s.ring, s.order, s.var)
    power = Series.one(s.ring, s.order, s.var)
    for k in range(1, s.order + 1):
        power = power * s
        if power.is_zero():
            break
        acc = acc + power * Fraction(1, factorial(k))
    return acc.truncate(s.order) if acc.order > s.order else acc


def series_log(s: Series) -> Series:
    """log of a series with constant term 1."""
    ring = s.ring
    if not ring.is_zero(s.coeffs[0] - ring.one()):
        raise ValueError("log needs constant term 1")
    u = s - ring.one()
    acc = Series.zero(ring, s.order, s.var)
    power = Series.one(ring, s.order, s.var)
    for k in range(1, s.order + 1):
        power = power * u
        if power.is_zero():
            break
        acc = acc + power * Fraction((-1) ** (k + 1), k)
    return acc.truncate(s.order) if acc.order > s.order else acc


# -- Laurent series -------------------------------------------------------------


class LaurentSeries:
    """Laurent series valid on the window [valuation, order].

    ``order=None`` marks an exact Laurent polynomial.  Stored
    coefficients start at ``val``; entries between the end of storage
    and ``order`` are exactly zero.
    """

    __slots__ = ("ring", "val", "coeffs", "order", "var")

    def __init__(self, ring, val, coeffs, order, var="t"):
        coeffs = [ring.coerce(c) for c in coeffs]
        if order is not None:
            if len(coeffs) > order - val + 1:
                coeffs = coeffs[: order - val + 1]
            if order < val and coeffs:
                raise PrecisionError("empty precision window")
        # trim trailing stored zeros (they are implied)
        while coeffs and ring.is_zero(coeffs[-1]):
            coeffs.pop()
        if not coeffs:
            val = 0
        self.ring = ring
        self.val = val
        self.coeffs = coeffs
        self.order = order
        self.var = var

    @classmethod
    def zero(cls, ring, var="t"):
        return cls(ring, 0, [], None, var)

    @classmethod
    def from_series(cls, s: Series, var=None):
        return cls(s.ring, 0, list(s.coeffs), s.order, var or s.var)

    def __getitem__(self, e):
        if self.order is not None and e > self.order:
            raise PrecisionError("insufficient valuation window")
        if e < self.val or e >= self.val + len(self.coeffs):
            return self.ring.zero()
        return self.coeffs[e - self.val]

    def window(self):
        return (self.val, self.order)

    def is_zero(self):
        return all(self.ring.is_zero(c) for c in self.coeffs)

    def true_valuation(self):
        for i, c in enumerate(self.coeffs):
            if not self.ring.is_zero(c):
                return self.val + i
        return None

    def _check(self, other):
        if other.ring != self.ring:
            raise ValueError("binary operations require matching coefficient rings")

    def _make(self, val, coeffs, order):
        return LaurentSeries(self.ring, val, coeffs, order, self.var)

    def _coerce_other(self, other):
        if isinstance(other, LaurentSeries):
            self._check(other)
            return other
        try:
            c = self.ring.coerce(other)
        except TypeError:
            return None
        return LaurentSeries(self.ring, 0, [c], None, self.var)

    # -- arithmetic -------------------------------------------------------------

    def __add__(self, other):
        o = self._coerce_other(other)
        if o is None:
            return NotImplemented
        if not self.coeffs:
            val = o.val
        elif not o.coeffs:
            val = self.val
        else:
            val = min(self.val, o.val)
        order = _minord(self.order, o.order)
        if order is not None:
            hi = order
        else:
            hi = max(
                self.val + len(self.coeffs) - 1 if self.coeffs else val,
                o.val + len(o.coeffs) - 1 if o.coeffs else val,
            )
        out = [self[e] + o[e] for e in range(val, hi + 1)]
        return self._make(val, out, order)

    __radd__ = __add__

    def __neg__(self):
        return self._make(self.val, [-c for c in self.coeffs], self.order)

    def __sub__(self, other):
        o = self._coerce_other(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, LaurentSeries):
            try:
                s = self.ring.coerce(other)
            except TypeError:
                return NotImplemented
            return self._make(self.val, [c * s for c in self.coeffs], self.order)
        self._check(other)
        o = other
        if self.is_zero() and self.order is None:
            return LaurentSeries.zero(self.ring, self.var)
        if o.is_zero() and o.order is None:
            return LaurentSeries.zero(self.ring, self.var)
        val = self.val + o.val
        order = _minord(_addord(self.order, o.val), _addord(o.order, self.val))
        if order is None:
            hi = val + len(self.coeffs) + len(o.coeffs) - 2
        else:
            hi = order
            if hi < val:
                raise PrecisionError("empty precision window")
        ring = self.ring
        zero = ring.zero()
        out = [zero] * (hi - val + 1)
        for i, ci in enumerate(self.coeffs):
            if ring.is_zero(ci):
                continue
            jmax = min(len(o.coeffs) - 1, hi - val - i)
            for j in range(jmax + 1):
                cj = o.coeffs[j]
                if not ring.is_zero(cj):
                    out[i + j] = out[i + j] + ci * cj
        return self._make(val, out, order)

    __rmul__ = __mul__

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            raise ValueError("Laurent powers here must be non-negative integers")
        result = LaurentSeries(self.ring, 0, [self.ring.one()], None, self.var)
        for _ in range(n):
            result = result * self
        return result

    def __eq__(self, other):
        o = self._coerce_other(other)
        if o is None:
            return NotImplemented
        diff = self - o
        if diff.order is not None and diff.order < diff.val and diff.coeffs:
            raise PrecisionError("empty comparison window")
        return diff.is_zero()

    __hash__ = None

    # -- calculus and structure ---------------------------------------------------

    def derivative(self):
        out = []
        for i, c in enumerate(self.coeffs):
            e = self.val + i
            out.append(c * Fraction(e))
        return self._make(self.val - 1, out, _addord(self.order, -1))

    def shift(self, k):
        """Multiply by var^k."""
        return self._make(self.val + k, list(self.coeffs), _addord(self.order, k))

    def truncate(self, order):
        if self.order is not None and order > self.order:
            raise PrecisionError("cannot extend a truncated Laurent series")
        return self._make(self.val, self.coeffs[: order - self.val + 1], order)

    def flip_argument(self):
        """Substitute var -> -var."""
        out = [c * Fraction((-1) ** (self.val + i)) for i, c in enumerate(self.coeffs)]
        return self._make(self.val, out, self.order)

    def residue(self):
        """Coefficient of the degree -1 term."""
        if self.order is not None and self.order < -1:
            raise PrecisionError("insufficient valuation window")
        return self[-1]

    def inverse(self, working_order=None):
        """Invert; the leading coefficient must be a unit of the base ring.

        Exact inputs need ``working_order`` (a relative order) to bound
        the expansion of the resulting genuine series.
        """
        lead = self.true_valuation()
        if lead is None:
            raise NotInvertibleError("not invertible")
        rel = None if self.order is None else self.order - lead
        if rel is None:
            if working_order is None:
                raise ValueError("inverting an exact Laurent series needs working_order")
            rel = working_order
        ring = self.ring
        u = [self[lead + i] for i in range(rel + 1)]
        b0 = ring.invert(u[0])
        out = [b0]
        for n in range(1, rel + 1):
            acc = ring.zero()
            for k in range(1, n + 1):
                if not ring.is_zero(u[k]):
                    acc = acc + u[k] * out[n - k]
            out.append(-(b0 * acc))
        return self._make(-lead, out, -lead + rel)

    def integrate(self):
        """Termwise antiderivative; fails if the residue is nonzero."""
        if not self.ring.is_zero(self[-1] if (self.order is None or self.order >= -1) and self.val <= -1 else self.ring.zero()):
            raise ValueError("cannot integrate a series with nonzero residue")
        out = []
        for i, c in enumerate(self.coeffs):
            e = self.val + i
            if e == -1:
                out.append(self.ring.zero())
            else:
                out.append(c * Fraction(1, e + 1))
        return self._make(self.val + 1, out, _addord(self.order, 1))

    def regular_part(self) -> Series:
        """The non-negative exponents, as a power series (requires order >= 0)."""
        if self.order is None:
            hi = max(self.val + len(self.coeffs) - 1, 0)
        else:
            hi = self.order
            if hi < 0:
                raise PrecisionError("no regular window")
        return Series(self.ring, [self[e] for e in range(hi + 1)], hi, self.var)

    def __str__(self):
        to_str = getattr(self.ring, "to_str", str)
        parts = []
        for i, c in enumerate(self.coeffs):
            if not self.ring.is_zero(c):
                e = self.val + i
                parts.append(f"({to_str(c)})*{self.var}^{e}" if e else f"({to_str(c)})")
        body = " + ".join(parts) if parts else "0"
        tail = "" if self.order is None else f" + O({self.var}^{self.order + 1})"
        return body + tail

    def __repr__(self):
        return f"LaurentSeries({self})"


def series_to_laurent(s: Series, var=None) -> LaurentSeries:
    return LaurentSeries.from_series(s, var)


def laurent_reciprocal_of_series(f: Series, var="t") -> LaurentSeries:
    """1/f as a Laurent series, for f of valuation exactly 1 with unit slope."""
    ring = f.ring
    if not ring.is_zero(f.coeffs[0]) or ring.is_zero(f.coeffs[1]):
        raise ValueError("need a series of valuation exactly 1")
    unit = Series(ring, f.coeffs[1:], f.order - 1, f.var)
    v = invert_unit(unit)
    return LaurentSeries(ring, -1, list(v.coeffs), v.order - 1, var)


def shifted_reciprocal_coefficients(f: Series, jmax: int, var="t"):
    """Coefficients C_j of the nilpotent-shift expansion
    1/f(n - t) = sum_{j>=0} n^j C_j(t),
    computed as C_j = (1/j!) (d^j (1/f))(-t)."""
    g = laurent_reciprocal_of_series(f, var)
    out = []
    fact = 1
    for j in range(jmax + 1):
        if j:
            g = g.derivative()
            fact *= j
        out.append(g.flip_argument() * Fraction(1, fact))
    return out


def reciprocal_shifted(f: Series, n_name: str, order: int) -> LaurentSeries:
    """Laurent-in-t expansion of 1/f(n - t), where n is a nilpotent
    parameter of f's coefficient ring (powers beyond the ring bound vanish).

    Uses 1/(n - t) = -(1/t)(1 + n/t + n^2/t^2 + ...), a finite sum by
    nilpotency, times the inverse unit part of f evaluated at n - t.
    """
    ring = f.ring
    if n_name not in getattr(ring, "nilpotent", ()):
        raise ValueError(f"{n_name!r} is not a nilpotent variable of the coefficient ring")
    if not ring.is_zero(f.coeffs[0]) or not ring.is_zero(f.coeffs[1] - ring.one()):
        raise ValueError("need f of valuation exactly 1 with f'(0) = 1")
    D = ring.bound
    if f.order < order + 2 * D + 2:
        raise PrecisionError("series order too small for the requested expansion window")
    n = ring.var(n_name)
    unit = Series(ring, f.coeffs[1:], f.order - 1, f.var)
    v = invert_unit(unit)
    inner = LaurentSeries(ring, 0, [n, ring.from_fraction(-1)], None, "t")
    acc = LaurentSeries(ring, 0, [v.coeffs[v.order]], None, "t")
    for k in range(v.order - 1, -1, -1):
        acc = acc * inner + v.coeffs[k]
    # v is only known through order v.order: contributions of unknown
    # higher coefficients reach down to exponent v.order + 1 - D
    acc = LaurentSeries(ring, acc.val, [acc[e] for e in range(acc.val, v.order - D + 1)],
                        v.order - D, "t")
    lead = LaurentSeries(ring, -(D + 1), [-(n**j) for j in range(D, -1, -1)], None, "t")
    return (lead * acc).truncate(order)


# -- bivariate series ------------------------------------------------------------


class BiSeries:
    """Bivariate series truncated by total degree."""

    __slots__ = ("ring", "terms", "order", "vars")

    def __init__(self, ring, terms, order, vars=("x", "y")):
        clean = {}
        for (i, j), c in terms.items():
            if i + j <= order:
                c = ring.coerce(c)
                if not ring.is_zero(c):
                    clean[(i, j)] = c
        self.ring = ring
        self.terms = clean
        self.order = order
        self.vars = vars

    @classmethod
    def zero(cls, ring, order, vars=("x", "y")):
        return cls(ring, {}, order, vars)

    @classmethod
    def from_linear(cls, f: Series, cx, cy, order=None, vars=("x", "y")):
        """f(cx*x + cy*y) by binomial expansion; cx, cy are rationals."""
        order = f.order if order is None else min(order, f.order)
        cx, cy = as_fraction(cx), as_fraction(cy)
        terms = {}
        binom = [Fraction(1)]
        for i in range(order + 1):
            c = f.coeffs[i]
            if not f.ring.is_zero(c):
                for a in range(i + 1):
                    w = binom[a] * cx**a * cy ** (i - a)
                    if w:
                        key = (a, i - a)
                        prev = terms.get(key)
                        cur = c * w
                        terms[key] = cur if prev is None else prev + cur
            binom = [Fraction(1)] + [binom[k] + binom[k + 1] for k in range(len(binom) - 1)] + [Fraction(1)]
        return cls(f.ring, terms, order, vars)

    def get(self, i, j):
        if i + j > self.order:
            raise PrecisionError("coefficient beyond total-degree truncation")
        return self.terms.get((i, j), self.ring.zero())

    def is_zero(self):
        return not self.terms

    def first_nonzero(self):
        """Locator of the first nonzero term (total degree, then i), or None."""
        if not self.terms:
            return None
        key = min(self.terms, key=lambda k: (k[0] + k[1], k[0]))
        return key, self.terms[key]

    def _check(self, other):
        if self.ring != other.ring:
            raise ValueError("binary operations require matching coefficient rings")

    def __add__(self, other):
        if not isinstance(other, BiSeries):
            out = dict(self.terms)
            c = out.get((0, 0), self.ring.zero()) + self.ring.coerce(other)
            out[(0, 0)] = c
            return BiSeries(self.ring, out, self.order, self.vars)
        self._check(other)
        order = min(self.order, other.order)
        out = dict((k, c) for k, c in self.terms.items() if k[0] + k[1] <= order)
        for k, c in other.terms.items():
            if k[0] + k[1] <= order:
                out[k] = out.get(k, self.ring.zero()) + c
        return BiSeries(self.ring, out, order, self.vars)

    __radd__ = __add__

    def __neg__(self):
        return BiSeries(self.ring, {k: -c for k, c in self.terms.items()}, self.order, self.vars)

    def __sub__(self, other):
        if isinstance(other, BiSeries):
            return self + (-other)
        return self + (-self.ring.coerce(other))

    def __mul__(self, other):
        if not isinstance(other, BiSeries):
            try:
                s = self.ring.coerce(other)
            except TypeError:
                return NotImplemented
            return BiSeries(self.ring, {k: c * s for k, c in self.terms.items()},
                            self.order, self.vars)
        self._check(other)
        order = min(self.order, other.order)
        out = {}
        ring = self.ring
        for (i1, j1), c1 in self.terms.items():
            d1 = i1 + j1
            for (i2, j2), c2 in other.terms.items():
                if d1 + i2 + j2 > order:
                    continue
                key = (i1 + i2, j1 + j2)
                p = c1 * c2
                if key in out:
                    out[key] = out[key] + p
                else:
                    out[key] = p
        return BiSeries(ring, out, order, self.vars)

    __rmul__ = __mul__

    def swap(self):
        """Exchange the two variables."""
        return BiSeries(self.ring, {(j, i): c for (i, j), c in self.terms.items()},
                        self.order, self.vars)

    def homogeneous(self, d):
        return {k: c for k, c in self.terms.items() if k[0] + k[1] == d}

    def __eq__(self, other):
        if not isinstance(other, BiSeries):
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None

    def __str__(self):
        to_str = getattr(self.ring, "to_str", str)
        parts = []
        for (i, j) in sorted(self.terms, key=lambda k: (k[0] + k[1], k[0])):
            c = self.terms[(i, j)]
            mono = "*".join(s for s in (
                f"{self.vars[0]}^{i}" if i else "", f"{self.vars[1]}^{j}" if j else ""
            ) if s)
            parts.append(f"({to_str(c)})*{mono}" if mono else f"({to_str(c)})")
        body = " + ".join(parts) if parts else "0"
        return f"{body} + O(total degree {self.order + 1})"


def bi_compose(outer: Series, inner: BiSeries) -> BiSeries:
    """outer(inner) for a bivariate inner with zero constant term."""
    if (0, 0) in inner.terms:
        raise ValueError("composition needs inner series with zero constant term")
    order = min(outer.order, inner.order)
    acc = BiSeries(inner.ring, {(0, 0): outer.coeffs[min(outer.order, order)]},
                   order, inner.vars)
    for k in range(min(outer.order, order) - 1, -1, -1):
        acc = acc * inner + outer.coeffs[k]
    return acc


def bi_eval_separable(F: BiSeries, su: Series, sv: Series) -> BiSeries:
    """F(su(u), sv(v)) as a bivariate series in (u, v); su, sv have zero
    constant term."""
    ring = F.ring
    order = min(F.order, su.order, sv.order)
    pu = {0: Series.one(ring, order, su.var)}
    pv = {0: Series.one(ring, order, sv.var)}

    def power(cache, s, n):
        if n not in cache:
            cache[n] = power(cache, s, n - 1) * s
        return cache[n]

    out = {}
    for (r, s), c in F.terms.items():
        if r + s > order:
            continue
        a = power(pu, su, r)
        b = power(pv, sv, s)
        for i in range(min(a.order, order) + 1):
            ai = a.coeffs[i]
            if ring.is_zero(ai):
                continue
            for j in range(min(b.order, order - i) + 1):
                bj = b.coeffs[j]
                if ring.is_zero(bj):
                    continue
                key = (i, j)
                p = c * ai * bj
                out[key] = out[key] + p if key in out else p
    return BiSeries(ring, out, order, (su.var, sv.var))


# -- series rings (series as coefficients of other series) ------------------------


class SeriesRing:
    """Power series in one variable, truncated at a fixed order, as a
    coefficient ring for other series (e.g. deformation tails)."""

    def __init__(self, base, var, order):
        self.base = base
        self.varname = var
        self.order = order

    def zero(self):
        return Series.zero(self.base, self.order, self.varname)

    def one(self):
        return Series.one(self.base, self.order, self.varname)

    def from_fraction(self, q):
        return Series(self.base, [self.base.from_fraction(q)], self.order, self.varname)

    def var(self, name=None, power=1):
        if name is not None and name != self.varname:
            raise KeyError(name)
        coeffs = [self.base.zero()] * power + [self.base.one()]
        return Series(self.base, coeffs, self.order, self.varname)

    def coerce(self, x):
        if isinstance(x, Series) and x.ring == self.base and x.var == self.varname:
            if x.order < self.order:
                raise PrecisionError("series element below ring truncation order")
            return x.truncate(self.order) if x.order > self.order else x
        if isinstance(x, (int, Fraction)):
            return self.from_fraction(x)
        try:
            return Series(self.base, [self.base.coerce(x)], self.order, self.varname)
        except TypeError:
            raise TypeError(f"cannot coerce {x!r} into {self!r}") from None

    def is_zero(self, x):
        return x.is_zero()

    def invert(self, x):
        return invert_unit(x)

    def to_str(self, x):
        return str(x)

    def __eq__(self, other):
        return (
            isinstance(other, SeriesRing)
            and self.base == other.base
            and self.varname == other.varname
            and self.order == other.order
        )

    def __hash__(self):
        return hash(("SeriesRing", self.varname, self.order))

    def __repr__(self):
        return f"SeriesRing({self.base!r}[[{self.varname}]], order {self.order})"


class LaurentRing:
    """Laurent series in one variable as scalars, with a hard order cap and
    an optional window-width cap trading precision for speed."""

    def __init__(self, base, var, cap, width=None):
        self.base = base
        self.varname = var
        self.cap = cap
        self.width = width

    def _clip(self, x: LaurentSeries) -> LaurentSeries:
        order = x.order
        hi_stored = x.val + len(x.coeffs) - 1 if x.coeffs else x.val
        if order is None and hi_stored > self.cap:
            order = self.cap
        if order is not None and order > self.cap:
            order = self.cap
        if self.width is not None and x.coeffs:
            lead = x.val
            limit = lead + self.width - 1
            order = limit if order is None else min(order, limit)
        if order == x.order:
            return x
        return LaurentSeries(self.base, x.val, x.coeffs[: (order - x.val + 1)], order, self.varname)

    def zero(self):
        return LaurentSeries.zero(self.base, self.varname)

    def one(self):
        return LaurentSeries(self.base, 0, [self.base.one()], None, self.varname)

    def from_fraction(self, q):
        return LaurentSeries(self.base, 0, [self.base.from_fraction(q)], None, self.varname)

    def var(self, name=None, power=1):
        if name is not None and name != self.varname:
            # fall through to a base-ring variable embedded as a scalar
            return LaurentSeries(self.base, 0, [self.base.var(name)], None, self.varname)
        return LaurentSeries(self.base, power, [self.base.one()], None, self.varname)

    def from_base(self, c):
        return LaurentSeries(self.base, 0, [c], None, self.varname)

    def coerce(self, x):
        if isinstance(x, LaurentSeries) and x.ring == self.base and x.var == self.varname:
            return self._clip(x)
        if isinstance(x, (int, Fraction)):
            return self.from_fraction(x)
        try:
            return LaurentSeries(self.base, 0, [self.base.coerce(x)], None, self.varname)
        except TypeError:
            raise TypeError(f"cannot coerce {x!r} into {self!r}") from None

    def is_zero(self, x):
        return x.is_zero()

    def invert(self, x):
        lead = x.true_valuation()
        if lead is None:
            raise NotInvertibleError("not invertible")
        rel = self.cap - (-lead) if x.order is None else None
        return self._clip(x.inverse(working_order=rel))

    def to_str(self, x):
        return str(x)

    def __eq__(self, other):
        return (
            isinstance(other, LaurentRing)
            and self.base == other.base
            and self.varname == other.varname
            and self.cap == other.cap
            and self.width == other.width
        )

    def __hash__(self):
        return hash(("LaurentRing", self.varname, self.cap, self.width))

    def __repr__(self):
        return f"LaurentRing({self.base!r}(({self.varname})), cap {self.cap})"


def residue(L: LaurentSeries):
    """Coefficient of the degree -1 term of a Laurent series."""
    return L.residue()
