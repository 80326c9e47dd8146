"""Fixed-precision arithmetic in Q_p.

A scalar is stored as p^v * u with the unit u kept modulo p^W, where W is
the working digit count of the ambient context (target precision plus a
guard band for cancellation).  Every scalar carries the number of unit
digits it is actually certified to, so precision loss is explicit and
propagates pessimistically through arithmetic.
"""

from __future__ import annotations

from fractions import Fraction

INF = 10 ** 9  # absolute-precision sentinel for exact zero


class PrecisionError(ArithmeticError):
    """Raised when an operation cannot be certified at the working precision."""


class DomainError(ArithmeticError):
    """Raised when an argument is outside an operation's domain."""


def padic_val(n: int, p: int) -> int:
    """Valuation of a nonzero integer; INF for 0."""
    if n == 0:
        return INF
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


class PadicContext:
    """One session: a prime p and a target precision of `prec` digits.

    `work` digits (prec + guard) are carried internally so that guard-band
    cancellation does not eat into the certified target.
    """

    def __init__(self, p: int, prec: int, guard: int | None = None):
        if p < 2:
            raise DomainError("prime must be >= 2")
        self.p = p
        self.prec = prec
        self.guard = guard if guard is not None else prec + 24
        self.work = prec + self.guard
        self.pwork = p ** self.work
        self._teich_cache: dict[int, int] = {}

    # -- constructors ----------------------------------------------------

    def zero(self, absprec: int = INF) -> "PadicScalar":
        return PadicScalar(self, absprec, 0, 0)

    def one(self) -> "PadicScalar":
        return self.exact(1)

    def exact(self, x) -> "PadicScalar":
        """Embed an int or Fraction exactly (to working precision)."""
        if isinstance(x, PadicScalar):
            return x
        if isinstance(x, Fraction):
            if x == 0:
                return self.zero()
            num, den = x.numerator, x.denominator
            vn, vd = padic_val(num, self.p), padic_val(den, self.p)
            nu = num // self.p ** vn
            du = den // self.p ** vd
            u = nu * pow(du, -1, self.pwork) % self.pwork
            return PadicScalar(self, vn - vd, u, self.work)
        if isinstance(x, int):
            if x == 0:
                return self.zero()
            v = padic_val(x, self.p)
            return PadicScalar(self, v, (x // self.p ** v) % self.pwork, self.work)
        raise DomainError(f"cannot embed {type(x)} in Q_p")

    def from_unit(self, u: int, v: int = 0, rel: int | None = None) -> "PadicScalar":
        u %= self.pwork
        if u == 0:
            return self.zero()
        if u % self.p == 0:
            w = padic_val(u, self.p)
            u //= self.p ** w
            v += w
        return PadicScalar(self, v, u, self.work if rel is None else rel)

    # -- special functions ----------------------------------------------

    def teichmuller(self, a: int) -> "PadicScalar":
        """The (p-1)-st root of unity congruent to a mod p (a coprime to p)."""
        p = self.p
        if a % p == 0:
            raise DomainError("teichmuller needs a unit")
        if p == 2:
            return self.one()
        key = a % p
        if key not in self._teich_cache:
            x = key
            for _ in range(self.work + 2):
                y = pow(x, p, self.pwork)
                if y == x:
                    break
                x = y
            self._teich_cache[key] = x
        return PadicScalar(self, 0, self._teich_cache[key], self.work)

    def log(self, x: "PadicScalar | int") -> "PadicScalar":
        """log of a unit, Teichmuller part stripped first.

        After stripping, the argument must be in 1 + pZ_p (1 + 4Z_2 for p=2).
        """
        p = self.p
        x = self.exact(x) if isinstance(x, int) else x
        if x.is_zero() or x.v != 0:
            raise DomainError("log defined on units only")
        u = x
        if p != 2:
            u = x / self.teichmuller(x.u % p)
        d = u - self.one()
        vmin = 2 if p == 2 else 1
        if d.is_zero():
            return self.zero()
        if d.v < vmin:
            raise DomainError("argument is not a principal unit")
        # terms x^k/k; tail below p^-work once k*vmin - log_p(k) exceeds work
        nterms = (self.work // d.v) + self.work.bit_length() + 4
        acc = self.zero()
        xp = d
        for k in range(1, nterms + 1):
            term = xp / self.exact(k)
            acc = acc + term if k % 2 == 1 else acc - term
            xp = xp * d
        return acc

    def __repr__(self):
        return f"PadicContext(p={self.p}, prec={self.prec})"


class PadicScalar:
    """p^v * (u + O(p^rel)); u == 0 encodes O(p^v) (zero at precision v)."""

    __slots__ = ("ctx", "v", "u", "rel")

    def __init__(self, ctx: PadicContext, v: int, u: int, rel: int):
        self.ctx = ctx
        self.v = v
        self.u = u
        self.rel = rel

    # -- predicates ------------------------------------------------------

    def is_zero(self) -> bool:
        return self.u == 0

    def valuation(self) -> int:
        return self.v

    def absprec(self) -> int:
        """Valuation below which digits are unknown."""
        return self.v if self.u == 0 else self.v + self.rel

    def digits(self) -> int:
        """Certified significant digits relative to the session target."""
        return INF if self.u == 0 and self.v >= INF else min(self.rel, self.ctx.prec)

    # -- arithmetic -------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, PadicScalar):
            return other
        if isinstance(other, (int, Fraction)):
            return self.ctx.exact(other)
        return NotImplemented

    def __add__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return NotImplemented
        a, ctx = self, self.ctx
        if a.u == 0 and b.u == 0:
            return ctx.zero(min(a.v, b.v))
        if a.u == 0:
            a, b = b, a
        if b.u == 0:
            if a.v >= b.v:
                return ctx.zero(b.v)
            return PadicScalar(ctx, a.v, a.u, min(a.rel, b.v - a.v))
        m = min(a.v, b.v)
        ab = min(a.absprec(), b.absprec())
        known = ab - m
        if known <= 0:
            return ctx.zero(ab)
        s = (a.u * ctx.p ** (a.v - m) + b.u * ctx.p ** (b.v - m)) % ctx.pwork
        w = padic_val(s, ctx.p)
        if w >= known:
            return ctx.zero(ab)
        return PadicScalar(ctx, m + w, (s // ctx.p ** w) % ctx.pwork,
                           min(ctx.work, known - w))

    __radd__ = __add__

    def __neg__(self):
        if self.u == 0:
            return self
        return PadicScalar(self.ctx, self.v, (-self.u) % self.ctx.pwork, self.rel)

    def __sub__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return NotImplemented
        return self + (-b)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return NotImplemented
        ctx = self.ctx
        if self.u == 0 or b.u == 0:
            return ctx.zero(self.v + b.v)
        return PadicScalar(ctx, self.v + b.v, (self.u * b.u) % ctx.pwork,
                           min(self.rel, b.rel))

    __rmul__ = __mul__

    def inv(self) -> "PadicScalar":
        if self.u == 0:
            raise PrecisionError("insufficient precision: inverting zero-at-precision")
        return PadicScalar(self.ctx, -self.v, pow(self.u, -1, self.ctx.pwork), self.rel)

    def __truediv__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return NotImplemented
        return self * b.inv()

    def __rtruediv__(self, other):
        return self.inv() * other

    def __pow__(self, n: int):
        if n < 0:
            return self.inv() ** (-n)
        r = self.ctx.one()
        b = self
        while n:
            if n & 1:
                r = r * b
            b = b * b
            n >>= 1
        return r

    # -- comparison (to the shared certified precision) -------------------

    def __eq__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return NotImplemented
        d = self - b
        return d.u == 0 and d.v >= min(self.ctx.prec,
                                       self.absprec() - self.v if self.u else INF,
                                       b.absprec() - b.v if b.u else INF)

    def __ne__(self, other):
        r = self.__eq__(other)
        return r if r is NotImplemented else not r

    __hash__ = None

    # -- reporting ---------------------------------------------------------

    def agreement(self, other: "PadicScalar") -> int:
        """Absolute valuation of the difference (INF if indistinguishable)."""
        d = self - self._coerce(other)
        return d.v if d.u == 0 else d.v

    def cap_absprec(self, absprec: int) -> "PadicScalar":
        """Forget digits at or above p^absprec."""
        if self.u == 0:
            return PadicScalar(self.ctx, min(self.v, absprec), 0, 0)
        if absprec <= self.v:
            return self.ctx.zero(absprec)
        return PadicScalar(self.ctx, self.v, self.u, min(self.rel, absprec - self.v))

    def to_json(self) -> dict:
        ctx = self.ctx
        if self.u == 0:
            return {"p": ctx.p, "v": self.v, "u": "0", "M": 0}
        m = min(self.rel, ctx.prec)
        return {"p": ctx.p, "v": self.v, "u": str(self.u % ctx.p ** m), "M": m}

    def __repr__(self):
        if self.u == 0:
            return f"O({self.ctx.p}^{self.v if self.v < INF else 'inf'})"
        m = min(self.rel, self.ctx.prec)
        return f"{self.u % self.ctx.p ** m}*{self.ctx.p}^{self.v} (+O(p^{m}))"


def scalar_from_json(ctx: PadicContext, obj: dict) -> PadicScalar:
    if obj["u"] == "0":
        return ctx.zero(obj["v"])
    return PadicScalar(ctx, obj["v"], int(obj["u"]) % ctx.pwork, obj["M"])


def agree_digits(a: PadicScalar, b: PadicScalar, relative_to: PadicScalar | None = None) -> int:
    """Number of p-adic digits on which a and b agree.

    Absolute valuation of the difference, shifted by the valuation of
    `relative_to` (default: the smaller of the two inputs) so the count is
    significant digits, not absolute ones.
    """
    d = a - b
    av = d.v  # absolute agreement either way (zero stores absprec in v)
    if a.is_zero() and b.is_zero():
        return INF
    ref = relative_to if relative_to is not None else (b if not b.is_zero() else a)
    base = ref.v if not ref.is_zero() else 0
    return av - base
