"""Pluggable scalar arithmetic: exact rationals, Gaussian rationals,
multivariate polynomials, and complex floats.

Every algebraic routine in this package is generic over the scalars the
caller supplies.  Only ring operations are ever needed: addition, negation,
multiplication, integer multiples, and exact division by a nonzero integer.
Nothing here inverts a general ring element.  Python ints act as the
universal zero/one, so ``0`` and ``1`` literals seed every accumulator.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import HolodetError

FLOAT_REL_TOL = 1e-9
FLOAT_ABS_TOL = 1e-12


class Symbols:
    """Ordered, immutable table of polynomial indeterminates."""

    __slots__ = ("names", "_index")

    def __init__(self, names):
        names = tuple(names)
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate symbol names in {names!r}")
        self.names = names
        self._index = {name: i for i, name in enumerate(names)}

    def index(self, name):
        try:
            return self._index[name]
        except KeyError:
            raise HolodetError(f"unknown symbol '{name}'") from None

    def extended(self, extra):
        new = [n for n in extra if n not in self._index]
        return Symbols(self.names + tuple(new))

    def __len__(self):
        return len(self.names)

    def __iter__(self):
        return iter(self.names)

    def __contains__(self, name):
        return name in self._index

    def __eq__(self, other):
        return isinstance(other, Symbols) and self.names == other.names

    def __hash__(self):
        return hash(self.names)

    def __repr__(self):
        return f"Symbols({self.names!r})"


class GaussianRational:
    """Exact complex number with rational real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    def _coerce(self, other):
        if isinstance(other, GaussianRational):
            return other
        if isinstance(other, (int, Fraction)):
            return GaussianRational(other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return GaussianRational(o.re - self.re, o.im - self.im)

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return GaussianRational(
            self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        d = o.re * o.re + o.im * o.im
        if d == 0:
            raise ZeroDivisionError("division by zero GaussianRational")
        return GaussianRational(
            (self.re * o.re + self.im * o.im) / d,
            (self.im * o.re - self.re * o.im) / d,
        )

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        out = GaussianRational(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def conjugate(self):
        return GaussianRational(self.re, -self.im)

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"GaussianRational({self.re!r}, {self.im!r})"

    def __str__(self):
        return scalar_str(self)


class Poly:
    """Multivariate polynomial: map from exponent tuples to coefficients.

    Exponent tuples are dense over the symbol table; coefficients may be
    ints, Fractions, GaussianRationals, or complex floats.  No zero
    coefficient is ever stored.
    """

    __slots__ = ("syms", "terms")

    def __init__(self, syms, terms=None):
        self.syms = syms
        clean = {}
        if terms:
            width = len(syms)
            for exps, c in terms.items():
                if len(exps) != width:
                    raise ValueError(
                        f"exponent tuple {exps!r} does not match {width} symbols"
                    )
                if any(e < 0 for e in exps):
                    raise ValueError(f"negative exponent in {exps!r}")
                if not (c == 0):
                    clean[exps] = c
        self.terms = clean

    @classmethod
    def const(cls, syms, value):
        if value == 0:
            return cls(syms)
        return cls(syms, {(0,) * len(syms): value})

    @classmethod
    def variable(cls, syms, name):
        exps = [0] * len(syms)
        exps[syms.index(name)] = 1
        return cls(syms, {tuple(exps): 1})

    @property
    def is_zero(self):
        return not self.terms

    def constant_value(self):
        """Value of a polynomial with no surviving indeterminates."""
        zero = (0,) * len(self.syms)
        if any(e != zero for e in self.terms):
            raise HolodetError("polynomial is not constant")
        return self.terms.get(zero, 0)

    def degree(self):
        return max((sum(e) for e in self.terms), default=0)

    def _coerce(self, other):
        if isinstance(other, Poly):
            if other.syms != self.syms:
                raise HolodetError(
                    "polynomials over different symbol tables; lift them first"
                )
            return other
        if isinstance(other, (int, Fraction, GaussianRational, float, complex)):
            return Poly.const(self.syms, other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        res = dict(self.terms)
        for e, c in o.terms.items():
            s = res.get(e, 0) + c
            if s == 0:
                res.pop(e, None)
            else:
                res[e] = s
        out = Poly(self.syms)
        out.terms = res
        return out

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __neg__(self):
        out = Poly(self.syms)
        out.terms = {e: -c for e, c in self.terms.items()}
        return out

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        res = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in o.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                s = res.get(e, 0) + c1 * c2
                if s == 0:
                    res.pop(e, None)
                else:
                    res[e] = s
        out = Poly(self.syms)
        out.terms = res
        return out

    __rmul__ = __mul__

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        out = Poly.const(self.syms, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.syms == other.syms and self.terms == other.terms
        if isinstance(other, (int, Fraction, GaussianRational, float, complex)):
            return self.terms == Poly.const(self.syms, other).terms
        return NotImplemented

    __hash__ = None

    def divide_int(self, k):
        out = Poly(self.syms)
        out.terms = {e: int_div(c, k) for e, c in self.terms.items()}
        return out

    def occurring(self):
        """Names of symbols appearing with a positive exponent."""
        seen = set()
        for exps in self.terms:
            for i, e in enumerate(exps):
                if e:
                    seen.add(self.syms.names[i])
        return seen

    def eval(self, assignment):
        missing = self.occurring() - set(assignment)
        if missing:
            raise HolodetError(f"no value for symbol '{sorted(missing)[0]}'")
        total = 0
        for exps, c in sorted(self.terms.items()):
            term = c
            for i, e in enumerate(exps):
                if e:
                    term = term * assignment[self.syms.names[i]] ** e
            total = total + term
        return total

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda item: (sum(item[0]), item[0]))

    def __str__(self):
        return scalar_str(self)

    def __repr__(self):
        return f"Poly({self.syms.names!r}, {self.terms!r})"


def lift(value, syms):
    """Embed a scalar (or a polynomial over a sub-table) into Poly over syms."""
    if isinstance(value, Poly):
        if value.syms == syms:
            return value
        mapping = [syms.index(n) for n in value.syms.names]
        terms = {}
        for exps, c in value.terms.items():
            new = [0] * len(syms)
            for src, dst in enumerate(mapping):
                new[dst] = exps[src]
            terms[tuple(new)] = c
        return Poly(syms, terms)
    return Poly.const(syms, value)


def poly_eval(p, assignment):
    """Substitute values for every symbol occurring in p."""
    if not isinstance(p, Poly):
        return p
    return p.eval(assignment)


def int_div(s, k):
    """Exact division of a scalar by a positive integer."""
    if not isinstance(k, int) or k < 1:
        raise ValueError(f"int_div needs a positive integer, got {k!r}")
    if isinstance(s, int):
        return Fraction(s, k)
    if isinstance(s, Fraction):
        return s / k
    if isinstance(s, GaussianRational):
        return GaussianRational(s.re / k, s.im / k)
    if isinstance(s, Poly):
        return s.divide_int(k)
    if isinstance(s, (float, complex)):
        return s / k
    raise TypeError(f"unsupported scalar {type(s).__name__}")


def is_exact(s):
    if isinstance(s, (int, Fraction, GaussianRational)):
        return True
    if isinstance(s, Poly):
        return all(is_exact(c) for c in s.terms.values())
    return False


def to_complex(s):
    if isinstance(s, (int, float, complex)):
        return complex(s)
    if isinstance(s, Fraction):
        return complex(float(s))
    if isinstance(s, GaussianRational):
        return complex(s)
    if isinstance(s, Poly):
        return complex(to_complex(s.constant_value()))
    raise TypeError(f"cannot embed {type(s).__name__} into complex")


def scalars_close(a, b, rel=FLOAT_REL_TOL, abs_=FLOAT_ABS_TOL):
    if is_exact(a) and is_exact(b) and not isinstance(a, Poly) and not isinstance(b, Poly):
        return a == b
    za, zb = to_complex(a), to_complex(b)
    return abs(za - zb) <= max(abs_, rel * max(abs(za), abs(zb)))


def _sign_split(c):
    """(is_negative, magnitude) for display purposes."""
    if isinstance(c, (int, Fraction)):
        return (c < 0, -c if c < 0 else c)
    if isinstance(c, GaussianRational):
        neg = (c.re, c.im) < (Fraction(0), Fraction(0))
        return (neg, -c if neg else c)
    if isinstance(c, complex):
        neg = (c.real, c.imag) < (0.0, 0.0)
        return (neg, -c if neg else c)
    if isinstance(c, float):
        return (c < 0, -c if c < 0 else c)
    return (False, c)


def scalar_str(s):
    """Canonical display form: "3/4", "1/2+1/3i", sorted monomials."""
    if isinstance(s, (int, Fraction)):
        return str(s)
    if isinstance(s, GaussianRational):
        if s.im == 0:
            return str(s.re)
        if s.re == 0:
            return f"{s.im}i"
        sign = "+" if s.im > 0 else "-"
        return f"{s.re}{sign}{abs(s.im)}i"
    if isinstance(s, complex):
        if s.imag == 0:
            return repr(s.real)
        sign = "+" if s.imag >= 0 else "-"
        return f"{s.real!r}{sign}{abs(s.imag)!r}i"
    if isinstance(s, float):
        return repr(s)
    if isinstance(s, Poly):
        if s.is_zero:
            return "0"
        parts = []
        for exps, c in s.sorted_terms():
            mono = "*".join(
                name if e == 1 else f"{name}^{e}"
                for name, e in zip(s.syms.names, exps)
                if e
            )
            neg, mag = _sign_split(c)
            mag_s = scalar_str(mag)
            if any(ch in mag_s[1:] for ch in "+-"):
                mag_s = f"({mag_s})"
            if mono:
                body = mono if mag == 1 else f"{mag_s}*{mono}"
            else:
                body = mag_s
            parts.append(("-" if neg else "+", body))
        sign0, body0 = parts[0]
        text = ("-" if sign0 == "-" else "") + body0
        for sign, body in parts[1:]:
            text += f" {sign} {body}"
        return text
    raise TypeError(f"cannot format {type(s).__name__}")
