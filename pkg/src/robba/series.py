"""Truncated Laurent-series model of the Robba ring.

A SeriesElement is a finite coefficient window [lo, hi] around pi = 0,
with poles allowed only at pi = 0.  Coefficients above hi are unknown
(never assumed zero) unless the element is flagged exact, in which case it
is an honest Laurent polynomial.  Every operation certifies the window of
its output; requesting more raises WindowError rather than padding zeros.

The operator set is the (phi, psi, gamma_a, partial) calculus:

    phi(f)     = f((1+pi)^p - 1)
    gamma_a(f) = f((1+pi)^a - 1)
    psi        = the left inverse of phi extracting the i = 0 component of
                 f = sum_i (1+pi)^i phi(f_i)
    partial    = (1+pi) d/dpi

psi is computed by exact binomial change of basis: on (1+pi)-powers psi is
the selection b_j -> b_{pj}, so no division ever happens.  Pole parts ride
along via psi(f * phi(pi^-m)) = psi(f) * pi^-m.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb

from .padic import DomainError, PadicContext, PadicScalar, PrecisionError, INF
from .cyclo import CycloElement, phi_pn, to_power_basis_at_zm1, zeta_minus_one


class WindowError(PrecisionError):
    """The requested exponent window exceeds what the inputs certify."""


def gbinom(m: int, k: int) -> int:
    """Binomial coefficient C(m, k) for any integer m, k >= 0."""
    if k < 0:
        return 0
    if m >= 0:
        return comb(m, k)
    return (-1) ** k * comb(-m + k - 1, k)


class SeriesElement:
    __slots__ = ("ctx", "lo", "coeffs", "exact", "level")

    def __init__(self, ctx: PadicContext, lo: int, coeffs: list, exact: bool = False,
                 level: int | None = None):
        self.ctx = ctx
        self.lo = lo
        self.coeffs = coeffs
        self.exact = exact
        self.level = level
        self._normalize()

    # -- basics -----------------------------------------------------------

    def _czero(self):
        if self.level is None:
            return self.ctx.zero()
        return CycloElement.zero(self.ctx, self.level)

    def _cexact(self, x):
        if self.level is None:
            return self.ctx.exact(x)
        if isinstance(x, CycloElement):
            return x
        return CycloElement.scalar(self.ctx, self.level, self.ctx.exact(x))

    def _is_exact_zero(self, c) -> bool:
        if isinstance(c, CycloElement):
            return all(s.u == 0 and s.v >= INF for s in c.vec)
        return c.u == 0 and c.v >= INF

    def _normalize(self):
        # trim exact zeros at the bottom so lo is the true support bound
        while self.coeffs and self._is_exact_zero(self.coeffs[0]):
            self.coeffs.pop(0)
            self.lo += 1
        if self.exact:
            while self.coeffs and self._is_exact_zero(self.coeffs[-1]):
                self.coeffs.pop()
        if not self.coeffs:
            self.lo = 0

    @property
    def hi(self) -> int:
        return self.lo + len(self.coeffs) - 1 if self.coeffs else self.lo - 1

    def cert_hi(self) -> int:
        return INF if self.exact else self.hi

    def is_plus(self) -> bool:
        return self.lo >= 0

    def coeff(self, k: int):
        if k < self.lo:
            return self._czero()
        if k > self.hi:
            if self.exact:
                return self._czero()
            raise WindowError(f"coefficient {k} outside certified window "
                              f"[{self.lo},{self.hi}]")
        return self.coeffs[k - self.lo]

    # -- constructors --------------------------------------------------------

    @classmethod
    def zero(cls, ctx, level=None):
        return cls(ctx, 0, [], exact=True, level=level)

    @classmethod
    def one(cls, ctx, level=None):
        return cls.constant(ctx, 1, level=level)

    @classmethod
    def constant(cls, ctx, c, level=None):
        s = cls(ctx, 0, [], exact=True, level=level)
        return cls(ctx, 0, [s._cexact(c)], exact=True, level=level)

    @classmethod
    def monomial(cls, ctx, k: int, c=1, level=None):
        s = cls(ctx, 0, [], exact=True, level=level)
        return cls(ctx, k, [s._cexact(c)], exact=True, level=level)

    @classmethod
    def from_list(cls, ctx, lo: int, values: list, exact=False, level=None):
        s = cls(ctx, 0, [], exact=True, level=level)
        return cls(ctx, lo, [s._cexact(v) for v in values], exact=exact, level=level)

    # -- window management -----------------------------------------------------

    def truncated(self, hi: int) -> "SeriesElement":
        if hi >= self.hi and self.exact:
            return self
        if hi > self.hi:
            raise WindowError(f"window through {hi} exceeds certified {self.hi}")
        n = hi - self.lo + 1
        return SeriesElement(self.ctx, self.lo, list(self.coeffs[:max(n, 0)]),
                             exact=False, level=self.level)

    def pole_part(self) -> "SeriesElement":
        if self.lo >= 0:
            return SeriesElement.zero(self.ctx, self.level)
        n = -self.lo
        return SeriesElement(self.ctx, self.lo, list(self.coeffs[:n]), exact=True,
                             level=self.level)

    def plus_part(self) -> "SeriesElement":
        if self.lo >= 0:
            return self
        n = -self.lo
        return SeriesElement(self.ctx, 0, list(self.coeffs[n:]), exact=self.exact,
                             level=self.level)

    def shift(self, k: int) -> "SeriesElement":
        """Multiply by pi^k."""
        return SeriesElement(self.ctx, self.lo + k, list(self.coeffs),
                             exact=self.exact, level=self.level)

    # -- linear arithmetic ---------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, SeriesElement):
            if other.level != self.level:
                raise DomainError("coefficient rings differ")
            return other
        return SeriesElement.constant(self.ctx, other, level=self.level)

    def __add__(self, other):
        g = self._coerce(other)
        if not self.coeffs:
            return g if self.exact else g.truncated(min(g.cert_hi(), self.hi))
        if not g.coeffs:
            return self if g.exact else self.truncated(min(self.cert_hi(), g.hi))
        lo = min(self.lo, g.lo)
        hi = min(self.cert_hi(), g.cert_hi())
        exact = self.exact and g.exact
        if exact:
            hi = max(self.hi, g.hi)
        out = []
        for k in range(lo, hi + 1):
            out.append(self.coeff(k) + g.coeff(k))
        return SeriesElement(self.ctx, lo, out, exact=exact, level=self.level)

    def __neg__(self):
        return SeriesElement(self.ctx, self.lo, [-c for c in self.coeffs],
                             exact=self.exact, level=self.level)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def scale(self, c) -> "SeriesElement":
        c = self._cexact(c)
        return SeriesElement(self.ctx, self.lo, [a * c for a in self.coeffs],
                             exact=self.exact, level=self.level)

    # -- multiplication --------------------------------------------------------

    def __mul__(self, other):
        g = self._coerce(other)
        if not self.coeffs or not g.coeffs:
            hi = self.cert_hi() if not g.coeffs else g.cert_hi()
            hi = min(hi, (self.cert_hi() if self.coeffs else INF))
            z = SeriesElement.zero(self.ctx, self.level)
            if self.exact and g.exact:
                return z
            # a truncated zero: certify nothing above the shorter window
            return z
        lo = self.lo + g.lo
        if self.exact and g.exact:
            hi = self.hi + g.hi
        else:
            hi = min(self.lo + g.cert_hi(), g.lo + self.cert_hi())
        n = hi - lo + 1
        if n <= 0:
            raise WindowError("product has empty certified window")
        if self.level is None:
            return self._mul_flat(g, lo, hi)
        out = [self._czero() for _ in range(n)]
        for i, a in enumerate(self.coeffs):
            ia = self.lo + i
            if self._is_exact_zero(a):
                continue
            for j, b in enumerate(g.coeffs):
                k = ia + g.lo + j
                if k > hi:
                    break
                out[k - lo] = out[k - lo] + a * b
        return SeriesElement(self.ctx, lo, out,
                             exact=self.exact and g.exact, level=self.level)

    __rmul__ = __mul__

    def _flat(self):
        """(shift, absprec, int list) with every coefficient = p^shift * r_k
        certified modulo p^absprec."""
        ctx = self.ctx
        shift = 0
        absp = INF
        any_nonzero = False
        for c in self.coeffs:
            if c.u == 0:
                absp = min(absp, c.v)
            else:
                shift = c.v if not any_nonzero else min(shift, c.v)
                any_nonzero = True
                absp = min(absp, c.absprec())
        if not any_nonzero:
            shift = 0
        ints = []
        for c in self.coeffs:
            if c.u == 0:
                ints.append(0)
            else:
                ints.append((c.u * ctx.p ** (c.v - shift)) % ctx.pwork)
        return shift, absp, ints

    def _from_flat(self, lo, shift, absp, ints, exact):
        ctx = self.ctx
        out = []
        known = absp - shift
        for r in ints:
            r %= ctx.pwork
            if known <= 0:
                out.append(ctx.zero(absp))
                continue
            if r == 0:
                out.append(ctx.zero(absp))
                continue
            w = 0
            rr = r
            while rr % ctx.p == 0 and w < known:
                rr //= ctx.p
                w += 1
            if w >= known:
                out.append(ctx.zero(absp))
            else:
                out.append(PadicScalar(ctx, shift + w, rr % ctx.pwork,
                                       min(ctx.work, known - w)))
        return SeriesElement(ctx, lo, out, exact=exact, level=self.level)

    def _mul_flat(self, g, lo, hi):
        s1, p1, a = self._flat()
        s2, p2, b = g._flat()
        n = hi - lo + 1
        out = [0] * n
        pw = self.ctx.pwork
        for i, ai in enumerate(a):
            if ai == 0:
                continue
            ia = self.lo + i
            jmax = min(len(b) - 1, hi - ia - g.lo)
            for j in range(jmax + 1):
                if b[j]:
                    out[ia + g.lo + j - lo] = (out[ia + g.lo + j - lo] + ai * b[j]) % pw
        absp = min(p1 + s2, p2 + s1)
        return self._from_flat(lo, s1 + s2, absp, out,
                               self.exact and g.exact)

    # -- inversion ----------------------------------------------------------

    def invert(self, out_hi: int) -> "SeriesElement":
        """1/f, assuming the lowest coefficient is invertible."""
        if not self.coeffs:
            raise PrecisionError("inverting a zero series")
        lead = self.coeffs[0]
        inv_lead = lead.inv()
        glo = -self.lo
        span_in = self.cert_hi() - self.lo
        span = min(out_hi - glo, span_in if not self.exact else out_hi - glo)
        if span < 0:
            raise WindowError("inversion window is empty")
        g = [inv_lead]
        for m in range(1, span + 1):
            acc = self._czero()
            for i in range(1, m + 1):
                k = self.lo + i
                if k > self.hi:
                    break
                acc = acc + self.coeffs[i] * g[m - i]
            g.append(-(inv_lead * acc))
        return SeriesElement(self.ctx, glo, g, exact=False, level=self.level)

    def __truediv__(self, other):
        g = self._coerce(other)
        hi = min(self.cert_hi() - g.lo, g.cert_hi() - g.lo + self.lo - g.lo)
        if hi >= INF:
            hi = self.hi - g.lo + max(0, g.hi - g.lo)
        return self * g.invert(hi)

    # -- operator calculus -----------------------------------------------------

    def compose_unit_power(self, a, out_hi: int | None = None) -> "SeriesElement":
        """f((1+pi)^a - 1) for integer a (unit or power of p) or a Z_p unit."""
        if isinstance(a, PadicScalar):
            return self._compose_scalar(a, out_hi)
        if a == 0:
            raise DomainError("exponent 0 collapses the variable")
        if self.level is not None:
            return self._compose_horner(a, out_hi)
        plus = self.plus_part()
        pole = self.pole_part()
        hi_plus = plus.cert_hi()
        exact_out = self.exact and a > 0
        if out_hi is None:
            out_hi = (self.hi * max(a, 1)) if exact_out else hi_plus
        res = SeriesElement.zero(self.ctx, self.level)
        if plus.coeffs:
            res = plus._compose_plus_int(a, out_hi if exact_out else min(out_hi, hi_plus))
        if pole.coeffs:
            res = res + pole._compose_pole_int(a, out_hi)
        return res

    def _compose_plus_int(self, a: int, out_hi: int):
        """Plus-part composition via (1+pi)-power coordinates, exactly."""
        ctx = self.ctx
        h = self.hi
        shift, absp, cints = self._flat()
        pw = ctx.pwork

        def cflat(k):
            i = k - self.lo
            return cints[i] if 0 <= i < len(cints) else 0

        # b_j = sum_k (-1)^(k-j) C(k,j) c_k  (integer matrix, computed mod p^work)
        b = [0] * (h + 1)
        for j in range(h + 1):
            acc = 0
            for k in range(j, h + 1):
                ck = cflat(k)
                if ck:
                    t = comb(k, j) * ck
                    acc = acc - t if (k - j) & 1 else acc + t
            b[j] = acc % pw
        # c'_k = sum_j b_j C(a j, k)
        out = [0] * (out_hi + 1)
        for j in range(h + 1):
            if b[j] == 0:
                continue
            m = a * j
            out[0] = (out[0] + b[j]) % pw
            cval = 1
            for k in range(1, out_hi + 1):
                cval = cval * (m - k + 1) // k
                if cval == 0 and m >= 0:
                    break
                out[k] = (out[k] + b[j] * cval) % pw
        exact_out = self.exact and a > 0
        return self._from_flat(0, shift, absp, out,
                               exact_out and out_hi >= a * h)

    def _compose_pole_int(self, a: int, out_hi: int):
        """Compose the (exact) pole part: powers of the inverse of (1+pi)^a - 1."""
        ctx = self.ctx
        m = -self.lo
        ua = u_poly(ctx, a, out_hi + 2 * m + 1)
        inv1 = ua.invert(out_hi + 2 * m)
        res = SeriesElement.zero(ctx, self.level)
        ipow = SeriesElement.one(ctx, self.level)
        for j in range(1, m + 1):
            ipow = ipow * inv1
            c = self.coeff(-j)
            if not self._is_exact_zero(c):
                res = res + ipow.scale(c)
        return res if res.cert_hi() <= out_hi else res.truncated(out_hi)

    def _compose_horner(self, a, out_hi):
        if out_hi is None:
            out_hi = self.cert_hi()
            if out_hi >= INF:
                out_hi = self.hi
        ua = u_poly(self.ctx, a, out_hi + 1 + 2 * max(0, -self.lo))
        if self.level is not None:
            ua = SeriesElement.from_list(self.ctx, ua.lo,
                                         [self._cexact(c) for c in ua.coeffs],
                                         exact=ua.exact, level=self.level)
        res = SeriesElement.zero(self.ctx, self.level)
        for k in range(min(self.hi, out_hi), max(self.lo, 0) - 1, -1):
            res = (res * ua).truncated(out_hi) if res.coeffs else res
            c = self.coeff(k)
            res = res + SeriesElement.constant(self.ctx, 1, level=self.level).scale(c)
        if self.lo < 0:
            res = res + self.pole_part()._compose_pole_generic(ua, out_hi)
        return res

    def _compose_scalar(self, a: PadicScalar, out_hi):
        if out_hi is None:
            out_hi = self.hi if self.exact else self.cert_hi()
        ua = u_series_scalar(self.ctx, a, out_hi + 1 - min(self.lo, 0))
        res = SeriesElement.zero(self.ctx, self.level)
        for k in range(min(self.hi, out_hi) if not self.exact else self.hi,
                       max(self.lo, 0) - 1, -1):
            res = (res * ua).truncated(out_hi) if res.coeffs else res
            c = self.coeff(k)
            res = res + SeriesElement.constant(self.ctx, 1, level=self.level).scale(c)
        if self.lo < 0:
            res = res + self.pole_part()._compose_pole_generic(ua, out_hi)
        return res

    def _compose_pole_generic(self, ua: "SeriesElement", out_hi: int):
        m = -self.lo
        inv1 = ua.invert(out_hi + 2 * m)
        res = SeriesElement.zero(self.ctx, self.level)
        ipow = SeriesElement.one(self.ctx, self.level)
        for j in range(1, m + 1):
            ipow = ipow * inv1
            c = self.coeff(-j)
            if not self._is_exact_zero(c):
                res = res + ipow.scale(c)
        return res if res.cert_hi() <= out_hi else res.truncated(out_hi)

    def phi(self, out_hi: int | None = None) -> "SeriesElement":
        return self.compose_unit_power(self.ctx.p, out_hi)

    def phi_iter(self, j: int, out_hi: int | None = None) -> "SeriesElement":
        return self.compose_unit_power(self.ctx.p ** j, out_hi)

    def gamma(self, a, out_hi: int | None = None) -> "SeriesElement":
        if isinstance(a, int) and a % self.ctx.p == 0:
            raise DomainError("gamma index must be a unit")
        return self.compose_unit_power(a, out_hi)

    def psi(self) -> "SeriesElement":
        """The canonical left inverse of phi (basis-selection route)."""
        plus = self.plus_part()
        pole = self.pole_part()
        parts = []
        if plus.coeffs:
            parts.append(plus._psi_plus())
        if pole.coeffs:
            parts.append(pole._psi_pole())
        if not parts:
            z = SeriesElement.zero(self.ctx, self.level)
            if not self.exact:
                return SeriesElement(self.ctx, 0, [], exact=False, level=self.level)
            return z
        res = parts[0]
        for q in parts[1:]:
            res = res + q
        return res

    def _psi_plus(self):
        ctx = self.ctx
        h = self.hi
        if self.level is not None:
            # generic-coefficient route: exact integer matrices applied objectwise
            b = []
            for j in range(h + 1):
                acc = self._czero()
                for k in range(j, h + 1):
                    c = comb(k, j)
                    t = self.coeff(k) * self._cexact(c if (k - j) % 2 == 0 else -c)
                    acc = acc + t
                b.append(acc)
            hh = h // ctx.p
            out = [self._czero() for _ in range(hh + 1)]
            for i in range(hh + 1):
                bi = b[ctx.p * i]
                for k in range(i + 1):
                    out[k] = out[k] + bi * self._cexact(comb(i, k))
            return SeriesElement(ctx, 0, out, exact=self.exact, level=self.level)
        shift, absp, cints = self._flat()
        A, B = _psi_matrices(ctx, h)
        pw = ctx.pwork

        def cflat(k):
            i = k - self.lo
            return cints[i] if 0 <= i < len(cints) else 0

        b = [0] * (h + 1)
        for j in range(h + 1):
            acc = 0
            row = A[j]
            for k in range(j, h + 1):
                ck = cflat(k)
                if ck:
                    acc += row[k - j] * ck
            b[j] = acc % pw
        hh = h // ctx.p
        out = [0] * (hh + 1)
        for i in range(hh + 1):
            bi = b[ctx.p * i]
            if bi == 0:
                continue
            row = B[i]
            for k in range(i + 1):
                out[k] = (out[k] + bi * row[k]) % pw
        return self._from_flat(0, shift, absp, out, self.exact)

    def _psi_pole(self):
        """psi on an exact pole part via psi(G * phi(pi^-m)) = psi(G) pi^-m."""
        ctx = self.ctx
        m = -self.lo
        G = self * u_poly(ctx, ctx.p, None, power=m)
        psiG = G._psi_plus()
        return psiG.shift(-m)

    def partial(self) -> "SeriesElement":
        """(1+pi) f'(pi)."""
        lo = self.lo - 1
        hi = self.cert_hi() - 1 if not self.exact else self.hi
        out = []
        for k in range(lo, hi + 1):
            term = self._czero()
            c1 = self.coeff(k + 1)
            term = term + c1 * self._cexact(k + 1)
            if self.lo <= k <= self.hi:
                term = term + self.coeff(k) * self._cexact(k)
            out.append(term)
        return SeriesElement(self.ctx, lo, out, exact=self.exact, level=self.level)

    def residue_form(self):
        """pi^-1 coefficient of f/(1+pi) (the residue of f dpi/(1+pi))."""
        if self.lo >= 0:
            if self.exact or self.lo >= 0:
                return self._czero() if self.level is not None else self.ctx.zero()
        if not self.exact and self.lo > -1 and self.hi < -1:
            raise WindowError("window excludes exponent -1")
        acc = self._czero() if self.level is not None else self.ctx.zero()
        for j in range(self.lo, 0):
            c = self.coeff(j)
            sign = 1 if (-1 - j) % 2 == 0 else -1
            acc = acc + c * self._cexact(sign)
        return acc

    # -- evaluation maps ---------------------------------------------------------

    def eval_at_zeta(self, n: int) -> CycloElement:
        """f(zeta_{p^n} - 1), allowing a pole at pi = 0 when n >= 1."""
        ctx = self.ctx
        if self.level is not None:
            raise DomainError("eval_at_zeta expects base-coefficient series")
        if n == 0:
            if self.lo < 0:
                raise DomainError("pole at pi = 0: level-0 evaluation undefined")
            return CycloElement(ctx, 0, [self.coeff(0)])
        z = zeta_minus_one(ctx, n)
        acc = CycloElement.zero(ctx, n)
        for k in range(self.hi, max(self.lo, 0) - 1, -1):
            acc = acc * z
            acc = acc + CycloElement.scalar(ctx, n, self.coeff(k))
        if self.lo < 0:
            zi = z.inv()
            ipow = CycloElement.one(ctx, n)
            for j in range(1, -self.lo + 1):
                ipow = ipow * zi
                c = self.coeff(-j)
                if not (c.u == 0 and c.v >= INF):
                    acc = acc + ipow.scale(c)
        return acc

    def eval_at_roots_sum(self, n: int, weight=None) -> CycloElement:
        """sum over primitive-and-lower roots is not needed; helper for oracles."""
        raise NotImplementedError

    def hasse_derivative(self, j: int) -> "SeriesElement":
        """f^(j)/j! with exact binomial coefficients."""
        out = []
        lo = self.lo - j
        hi = (self.hi if self.exact else self.cert_hi()) - j
        for k in range(lo, hi + 1):
            c = self.coeff(k + j)
            out.append(c * self._cexact(gbinom(k + j, j)))
        return SeriesElement(self.ctx, lo, out, exact=self.exact, level=self.level)

    def iota_n(self, n: int, depth: int) -> "DifElement":
        """Image in L_n[[t]]/t^depth under pi -> zeta_{p^n} exp(t/p^n) - 1."""
        ctx = self.ctx
        if n < 1:
            raise DomainError("iota_n needs level >= 1")
        z = zeta_minus_one(ctx, n)
        zeta = CycloElement.zeta(ctx, n)
        # eps = zeta * (exp(t/p^n) - 1); t-coefficients of eps^j, exactly
        pn = ctx.exact(ctx.p ** n)
        evals = [self.hasse_derivative(j).eval_at_zeta(n) for j in range(depth)]
        # E(t) = sum_{s>=1} (t/p^n)^s / s!; eps^j = zeta^j E^j
        epspow = [[ctx.one()] ]  # eps^0 = 1 (t-coeff list)
        E = [ctx.zero()] + [ (pn ** (-s)) * ctx.exact(Fraction(1, _fact(s)))
                             for s in range(1, depth) ]
        cur = [ctx.one()]
        for j in range(1, depth):
            nxt = [ctx.zero() for _ in range(depth)]
            for s1, c1 in enumerate(cur):
                if c1.is_zero():
                    continue
                for s2 in range(1, depth - s1):
                    nxt[s1 + s2] = nxt[s1 + s2] + c1 * E[s2]
            cur = nxt
            epspow.append(list(cur))
        tvec = [CycloElement.zero(ctx, n) for _ in range(depth)]
        for j in range(depth):
            zj = zeta ** j
            base = evals[j] * zj
            for s in range(depth):
                if j < len(epspow) and s < len(epspow[j]):
                    c = epspow[j][s]
                    if not c.is_zero():
                        tvec[s] = tvec[s] + base.scale(c)
        return DifElement(ctx, n, 0, tvec)

    # -- divisibility machinery ---------------------------------------------------

    def divmod_poly(self, q: "SeriesElement"):
        """Exact Euclidean division by a monic integer polynomial q."""
        if not q.exact or q.lo < 0:
            raise DomainError("divisor must be an exact polynomial")
        f = self
        shift_back = 0
        if f.lo < 0:
            shift_back = -f.lo
            f = f.shift(shift_back)
        d = q.hi
        n = f.hi
        rem = list(f.coeffs)
        lead = q.coeff(d)
        lead_inv = lead.inv() if isinstance(lead, PadicScalar) else lead.inv()
        quot = [f._czero() for _ in range(max(n - d + 1, 0))]
        for k in range(n, d - 1, -1):
            c = rem[k - f.lo]
            if f._is_exact_zero(c):
                continue
            c = c * lead_inv
            quot[k - d] = c
            for i in range(d + 1):
                rem[k - d + i - f.lo] = rem[k - d + i - f.lo] - c * q.coeff(i)
        qser = SeriesElement(self.ctx, -shift_back, quot, exact=f.exact,
                             level=self.level)
        rser = SeriesElement(self.ctx, f.lo, rem[:d], exact=f.exact, level=self.level)
        return qser, rser.shift(-shift_back)

    def divide_by_t(self, levels: int) -> "SeriesElement":
        """f/t via successive exact division by pi and Q_m(pi)/p, m <= levels.

        Vanishing at zeta_{p^m}-1 is checked through the division remainders;
        a nonzero remainder raises naming the offending level.  The finitely
        many discarded factors of t are restored through the exact quotient
        t_partial/t, so the result satisfies g * t = f on the window.
        """
        ctx = self.ctx
        r = self.shift(-1)
        pexact = ctx.exact(ctx.p)
        for m in range(1, levels + 1):
            q = Q_poly(ctx, m)
            quo, rem = r.divmod_poly(q)
            bad = _max_absprec_nonvanish(rem)
            if bad is not None:
                raise DomainError(f"input not divisible at level {m}: "
                                  f"remainder valuation {bad}")
            cap = _remainder_cap(rem)
            r = quo.scale(pexact)
            if cap < INF:
                r = SeriesElement(ctx, r.lo,
                                  [c.cap_absprec(cap) for c in r.coeffs],
                                  exact=False, level=r.level)
        # restore t_partial / t_log
        hi = r.cert_hi()
        if hi >= INF:
            hi = r.hi
        corr = _t_correction(ctx, levels, max(hi + 1, 1))
        return (r * corr) if not r.exact else (r * corr)

    # -- reporting -------------------------------------------------------------

    def agreement(self, other: "SeriesElement") -> int:
        g = self._coerce(other)
        lo = min(self.lo, g.lo)
        hi = min(self.cert_hi(), g.cert_hi())
        if hi >= INF:
            hi = max(self.hi, g.hi)
        worst = INF
        for k in range(lo, hi + 1):
            d = self.coeff(k) - g.coeff(k)
            if isinstance(d, CycloElement):
                worst = min(worst, d.agreement(CycloElement.zero(self.ctx, d.n)))
            else:
                worst = min(worst, d.v if d.u == 0 else d.v)
        return worst

    def min_valuation(self) -> int:
        worst = INF
        for c in self.coeffs:
            if isinstance(c, CycloElement):
                worst = min(worst, c.min_valuation())
            elif not c.is_zero():
                worst = min(worst, c.v)
        return worst

    def to_json(self) -> dict:
        return {"p": self.ctx.p, "lo": self.lo, "hi": self.hi,
                "coeffs": [c.to_json() for c in self.coeffs]}

    def __repr__(self):
        inner = ", ".join(f"pi^{self.lo + i}:{c!r}" for i, c in
                          enumerate(self.coeffs[:6]))
        tail = " ..." if len(self.coeffs) > 6 else ""
        return f"Series[{self.lo},{self.hi}]({inner}{tail})"


class DifElement:
    """Element of t^h * L_n[[t]] / t^(h+D): level, leading t-valuation, coeffs."""

    __slots__ = ("ctx", "n", "h", "tvec")

    def __init__(self, ctx: PadicContext, n: int, h: int, tvec: list[CycloElement]):
        self.ctx = ctx
        self.n = n
        self.h = h
        self.tvec = tvec

    @property
    def depth(self) -> int:
        return len(self.tvec)

    def tcoeff(self, s: int) -> CycloElement:
        if s < self.h:
            return CycloElement.zero(self.ctx, self.n)
        if s >= self.h + self.depth:
            raise WindowError(f"t^{s} outside depth window")
        return self.tvec[s - self.h]

    def shift_t(self, k: int) -> "DifElement":
        return DifElement(self.ctx, self.n, self.h + k, list(self.tvec))

    def scale(self, c) -> "DifElement":
        c = self.ctx.exact(c) if not isinstance(c, (PadicScalar, CycloElement)) else c
        if isinstance(c, PadicScalar):
            return DifElement(self.ctx, self.n, self.h,
                              [v.scale(c) for v in self.tvec])
        return DifElement(self.ctx, self.n, self.h, [v * c for v in self.tvec])

    def __add__(self, other):
        if self.n != other.n:
            raise DomainError("level mismatch")
        h = min(self.h, other.h)
        top = min(self.h + self.depth, other.h + other.depth)
        out = []
        for s in range(h, top):
            a = self.tcoeff(s) if self.h <= s < self.h + self.depth else \
                CycloElement.zero(self.ctx, self.n)
            b = other.tcoeff(s) if other.h <= s < other.h + other.depth else \
                CycloElement.zero(self.ctx, self.n)
            out.append(a + b)
        return DifElement(self.ctx, self.n, h, out)

    def __sub__(self, other):
        return self + DifElement(other.ctx, other.n, other.h,
                                 [-v for v in other.tvec])

    def __repr__(self):
        return f"Dif(n={self.n}, t^{self.h}*{self.tvec[:3]}...)"


# -- cached structural series ----------------------------------------------------


def _fact(n: int) -> int:
    r = 1
    for i in range(2, n + 1):
        r *= i
    return r


_U_CACHE: dict = {}


def u_poly(ctx: PadicContext, a: int, hi: int | None, power: int = 1) -> SeriesElement:
    """((1+pi)^a - 1)^power as an exact polynomial (a > 0) or truncated series."""
    key = (id(ctx), a, hi, power)
    if key in _U_CACHE:
        return _U_CACHE[key]
    if a > 0:
        base = SeriesElement.from_list(ctx, 1, [comb(a, k) for k in range(1, a + 1)],
                                       exact=True)
    else:
        if hi is None:
            raise DomainError("negative exponent needs a window")
        base = SeriesElement.from_list(ctx, 1,
                                       [gbinom(a, k) for k in range(1, hi + 1)],
                                       exact=False)
    out = SeriesElement.one(ctx)
    for _ in range(power):
        out = out * base
        if hi is not None and not out.exact:
            out = out.truncated(hi)
    _U_CACHE[key] = out
    return out


def u_series_scalar(ctx: PadicContext, a: PadicScalar, hi: int) -> SeriesElement:
    """(1+pi)^a - 1 for a p-adic integer a, via incremental binomials."""
    coeffs = []
    c = a
    coeffs.append(c)
    for k in range(2, hi + 1):
        c = c * (a - ctx.exact(k - 1)) / ctx.exact(k)
        coeffs.append(c)
    return SeriesElement(ctx, 1, coeffs, exact=False)


_T_CACHE: dict = {}


def t_series(ctx: PadicContext, hi: int) -> SeriesElement:
    """t = log(1+pi) truncated at pi^hi."""
    key = (id(ctx), hi)
    if key not in _T_CACHE:
        vals = [Fraction((-1) ** (k + 1), k) for k in range(1, hi + 1)]
        _T_CACHE[key] = SeriesElement.from_list(ctx, 1, vals, exact=False)
    return _T_CACHE[key]


_Q_CACHE: dict = {}


def Q_poly(ctx: PadicContext, m: int) -> SeriesElement:
    """Q_m(pi) = Phi_{p^m}(1+pi) = phi^(m-1)(phi(pi)/pi), an exact integer monic poly."""
    key = (id(ctx), m)
    if key not in _Q_CACHE:
        p = ctx.p
        step = p ** (m - 1)
        d = phi_pn(p, m)
        ints = [0] * (d + 1)
        for i in range(p):
            for k in range(i * step + 1):
                ints[k] += comb(i * step, k)
        _Q_CACHE[key] = SeriesElement.from_list(ctx, 0, ints, exact=True)
    return _Q_CACHE[key]


def _t_correction(ctx: PadicContext, levels: int, hi: int) -> SeriesElement:
    """(pi * prod_{m<=levels} Q_m/p) / log(1+pi), a unit series, on [0, hi]."""
    part = SeriesElement.monomial(ctx, 1)
    for m in range(1, levels + 1):
        part = part * Q_poly(ctx, m)
    part = part.scale(Fraction(1, ctx.p ** levels))
    tl = t_series(ctx, hi + part.hi + 1)
    return (part * tl.invert(hi + 1)).truncated(hi)


def _psi_matrices(ctx: PadicContext, h: int):
    """Cached mod-p^work rows of the two binomial basis-change matrices."""
    cache = getattr(ctx, "_psi_mat_cache", None)
    if cache is None:
        cache = {}
        ctx._psi_mat_cache = cache
    if h not in cache:
        pw = ctx.pwork
        A = []
        for j in range(h + 1):
            A.append([(comb(k, j) if (k - j) % 2 == 0 else -comb(k, j)) % pw
                      for k in range(j, h + 1)])
        B = []
        for i in range(h // ctx.p + 1):
            B.append([comb(i, k) % pw for k in range(i + 1)])
        cache[h] = (A, B)
    return cache[h]


def _max_absprec_nonvanish(rem: SeriesElement):
    """None if the remainder vanishes to precision, else its best valuation."""
    worst = None
    for c in rem.coeffs:
        if isinstance(c, CycloElement):
            if not c.is_zero():
                v = c.min_valuation()
                worst = v if worst is None else min(worst, v)
        elif not c.is_zero():
            if c.rel > 0 and c.v < rem.ctx.prec // 2:
                worst = c.v if worst is None else min(worst, c.v)
    return worst


def _remainder_cap(rem: SeriesElement) -> int:
    cap = INF
    for c in rem.coeffs:
        if isinstance(c, CycloElement):
            for s in c.vec:
                cap = min(cap, s.absprec() if s.u else s.v)
        else:
            cap = min(cap, c.absprec() if c.u else c.v)
    return cap


def lazard_interpolate(ctx: PadicContext, values: list) -> SeriesElement:
    """The plus-part polynomial f with f(zeta_{p^m} - 1) = values[m] for all m.

    values[0] prescribes f(0).  Incremental CRT against the pairwise-coprime
    pi, Q_1, ..., Q_N, with each correction computed in the level-m
    cyclotomic field and rewritten on the (zeta-1) power basis.
    """
    vals = [ctx.exact(v) if not isinstance(v, PadicScalar) else v for v in values]
    f = SeriesElement.constant(ctx, vals[0])
    B = SeriesElement.monomial(ctx, 1)
    for m in range(1, len(vals)):
        target = CycloElement.scalar(ctx, m, vals[m])
        cur = f.eval_at_zeta(m)
        r = target - cur
        Bz = B.eval_at_zeta(m)
        c = r * Bz.inv()
        w = to_power_basis_at_zm1(c)
        wpoly = SeriesElement(ctx, 0, list(w), exact=True)
        f = f + B * wpoly
        B = B * Q_poly(ctx, m)
    return f


def delta_project(f: SeriesElement, weights: list | None = None) -> SeriesElement:
    """Average over the torsion subgroup of Z_p^*: (1/|D|) sum_a w_a gamma_a(f).

    For p odd the torsion representatives are the Teichmuller lifts; for p = 2
    they are +-1.  Default weights are all 1 (trivial character).
    """
    ctx = f.ctx
    if ctx.p == 2:
        reps: list = [ctx.one(), ctx.exact(-1)]
    else:
        reps = [ctx.teichmuller(a) for a in range(1, ctx.p)]
    if weights is None:
        weights = [ctx.one()] * len(reps)
    acc = None
    out_hi = f.cert_hi()
    if out_hi >= INF:
        out_hi = f.hi
    for a, w in zip(reps, weights):
        g = f.compose_unit_power(a, out_hi).scale(w)
        acc = g if acc is None else acc + g
    return acc.scale(Fraction(1, len(reps)))
