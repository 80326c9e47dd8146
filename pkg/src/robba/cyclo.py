"""Arithmetic in the cyclotomic tower Q_p(zeta_{p^n}).

Elements are residues modulo the p^n-th cyclotomic polynomial, stored as
coefficient vectors on the power basis 1, z, ..., z^(d-1) with z = zeta_{p^n}
and d = phi(p^n).  Inversion goes through the Galois norm so no Euclidean
division over an inexact field is ever performed.
"""

from __future__ import annotations

from .padic import DomainError, PadicContext, PadicScalar, PrecisionError, INF


def phi_pn(p: int, n: int) -> int:
    """Degree of Q_p(zeta_{p^n}) over Q_p."""
    return 1 if n == 0 else p ** (n - 1) * (p - 1)


def units_mod(q: int) -> list[int]:
    return [a for a in range(1, q) if _coprime(a, q)]


def _coprime(a, q):
    while q:
        a, q = q, a % q
    return a == 1


class CycloElement:
    """An element of Q_p(zeta_{p^n}) at the session precision."""

    __slots__ = ("ctx", "n", "vec")

    def __init__(self, ctx: PadicContext, n: int, vec: list[PadicScalar]):
        d = phi_pn(ctx.p, n)
        if len(vec) != d:
            raise DomainError(f"level-{n} element needs {d} coefficients")
        self.ctx = ctx
        self.n = n
        self.vec = vec

    # -- constructors -----------------------------------------------------

    @classmethod
    def zero(cls, ctx, n):
        return cls(ctx, n, [ctx.zero() for _ in range(phi_pn(ctx.p, n))])

    @classmethod
    def one(cls, ctx, n):
        return cls.scalar(ctx, n, ctx.one())

    @classmethod
    def scalar(cls, ctx, n, c):
        c = ctx.exact(c) if not isinstance(c, PadicScalar) else c
        vec = [ctx.zero() for _ in range(phi_pn(ctx.p, n))]
        vec[0] = c
        return cls(ctx, n, vec)

    @classmethod
    def zeta(cls, ctx, n, power: int = 1):
        """zeta_{p^n}^power."""
        if n == 0:
            return cls.one(ctx, 0)
        expanded = [ctx.zero()] * ctx.p ** n
        expanded[power % ctx.p ** n] = ctx.one()
        return cls._fold(ctx, n, expanded)

    @classmethod
    def _fold(cls, ctx, n, expanded):
        """Reduce a coefficient list on 1..z^(p^n - 1) modulo Phi_{p^n}."""
        p = ctx.p
        q = p ** n
        d = phi_pn(p, n)
        step = p ** (n - 1)
        vec = list(expanded[:d])
        # z^(d+j) = -sum_{i=0..p-2} z^(i*step+j) for 0 <= j < step
        for e in range(d, q):
            c = expanded[e]
            if c.is_zero() and c.v >= INF:
                continue
            j = e - d
            for i in range(p - 1):
                k = i * step + j
                vec[k] = vec[k] - c
        return cls(ctx, n, vec)

    # -- ring operations ----------------------------------------------------

    def _check(self, other):
        if self.n != other.n:
            raise DomainError("level mismatch; embed first")

    def __add__(self, other):
        other = self._coerce(other)
        self._check(other)
        return CycloElement(self.ctx, self.n,
                            [a + b for a, b in zip(self.vec, other.vec)])

    def __sub__(self, other):
        other = self._coerce(other)
        self._check(other)
        return CycloElement(self.ctx, self.n,
                            [a - b for a, b in zip(self.vec, other.vec)])

    def __neg__(self):
        return CycloElement(self.ctx, self.n, [-a for a in self.vec])

    def _coerce(self, other):
        if isinstance(other, CycloElement):
            return other
        if isinstance(other, PadicScalar):
            return CycloElement.scalar(self.ctx, self.n, other)
        return CycloElement.scalar(self.ctx, self.n, self.ctx.exact(other))

    def __mul__(self, other):
        other = self._coerce(other)
        self._check(other)
        ctx, n = self.ctx, self.n
        if n == 0:
            return CycloElement(ctx, 0, [self.vec[0] * other.vec[0]])
        d = len(self.vec)
        q = ctx.p ** n
        prod = [ctx.zero() for _ in range(q)]
        for i, a in enumerate(self.vec):
            if a.is_zero() and a.v >= INF:
                continue
            for j, b in enumerate(other.vec):
                e = i + j
                if e >= q:
                    e -= q
                prod[e] = prod[e] + a * b
        return CycloElement._fold(ctx, n, prod)

    __rmul__ = __mul__

    def scale(self, c) -> "CycloElement":
        c = self.ctx.exact(c) if not isinstance(c, PadicScalar) else c
        return CycloElement(self.ctx, self.n, [a * c for a in self.vec])

    def __pow__(self, k: int):
        if k < 0:
            return self.inv() ** (-k)
        r = CycloElement.one(self.ctx, self.n)
        b = self
        while k:
            if k & 1:
                r = r * b
            b = b * b
            k >>= 1
        return r

    # -- Galois ------------------------------------------------------------

    def galois(self, a: int) -> "CycloElement":
        """sigma_a: zeta |-> zeta^a, for a a unit mod p^n."""
        ctx, n = self.ctx, self.n
        if n == 0:
            return self
        q = ctx.p ** n
        if not _coprime(a, q):
            raise DomainError("galois index must be a unit")
        expanded = [ctx.zero()] * q
        for e, c in enumerate(self.vec):
            expanded[(e * a) % q] = expanded[(e * a) % q] + c
        return CycloElement._fold(ctx, n, expanded)

    def trace_to_base(self) -> PadicScalar:
        """Trace to Q_p, by the closed form for traces of roots of unity."""
        ctx, n = self.ctx, self.n
        if n == 0:
            return self.vec[0]
        p = ctx.p
        step = p ** (n - 1)
        acc = self.vec[0] * ctx.exact(phi_pn(p, n))
        for i in range(1, p - 1):
            acc = acc - self.vec[i * step] * ctx.exact(step)
        return acc

    def trace_conjugate_sum(self) -> PadicScalar:
        """Oracle route: literally sum sigma_a(x) over all units a."""
        ctx, n = self.ctx, self.n
        if n == 0:
            return self.vec[0]
        acc = CycloElement.zero(ctx, n)
        for a in units_mod(ctx.p ** n):
            acc = acc + self.galois(a)
        return acc.as_scalar()

    def trace_one_level(self) -> "CycloElement":
        """Trace from level n down to level n-1 (sum over a = 1 mod p^(n-1))."""
        ctx, n = self.ctx, self.n
        if n == 0:
            raise DomainError("already at the base")
        q = ctx.p ** n
        acc = CycloElement.zero(ctx, n)
        for j in range(ctx.p):
            a = 1 + j * ctx.p ** (n - 1)
            if _coprime(a, q):
                acc = acc + self.galois(a)
        return acc.descend()

    # -- level moves ---------------------------------------------------------

    def embed(self, m: int) -> "CycloElement":
        """Embed into level m >= n via zeta_{p^n} = zeta_{p^m}^(p^(m-n))."""
        ctx, n = self.ctx, self.n
        if m < n:
            raise DomainError("embed goes up the tower")
        if m == n:
            return self
        scalefac = ctx.p ** (m - n)
        expanded = [ctx.zero()] * ctx.p ** m
        for e, c in enumerate(self.vec):
            expanded[e * scalefac] = expanded[e * scalefac] + c
        return CycloElement._fold(ctx, m, expanded)

    def descend(self) -> "CycloElement":
        """Rewrite an element of level n that lies in level n-1 (exact powers)."""
        ctx, n = self.ctx, self.n
        p = ctx.p
        vec = []
        loss_cap = INF
        for e, c in enumerate(self.vec):
            if e % p == 0 and e // p < phi_pn(p, n - 1):
                vec.append(c)
            else:
                if not (c.is_zero() or c.u == 0):
                    loss_cap = min(loss_cap, c.absprec())
                elif c.u == 0:
                    loss_cap = min(loss_cap, c.v)
        # n-1 power basis exponents e*p may exceed phi(p^n)-1 for none: d(n-1)*p = d(n) ok
        out = CycloElement(ctx, n - 1, vec)
        if loss_cap < INF:
            out = CycloElement(ctx, n - 1, [a.cap_absprec(loss_cap) for a in vec])
        return out

    def as_scalar(self) -> PadicScalar:
        """Extract the Q_p part; off-basis coefficients must vanish to precision."""
        s = self.vec[0]
        cap = INF
        for c in self.vec[1:]:
            if c.u == 0:
                cap = min(cap, c.v)
            else:
                raise PrecisionError("element is not a base scalar: "
                                     f"stray coefficient {c!r}")
        return s if cap >= INF else s.cap_absprec(cap)

    # -- inversion -----------------------------------------------------------

    def inv(self) -> "CycloElement":
        """Invert via the norm: x^-1 = (prod of other conjugates) / N(x)."""
        ctx, n = self.ctx, self.n
        if n == 0:
            return CycloElement(ctx, 0, [self.vec[0].inv()])
        cofactor = CycloElement.one(ctx, n)
        for a in units_mod(ctx.p ** n):
            if a != 1:
                cofactor = cofactor * self.galois(a)
        norm = (cofactor * self).as_scalar()
        return cofactor.scale(norm.inv())

    def __truediv__(self, other):
        other = self._coerce(other)
        return self * other.inv()

    # -- comparisons / io ------------------------------------------------------

    def __eq__(self, other):
        other = self._coerce(other)
        if self.n != other.n:
            return False
        return all(a == b for a, b in zip(self.vec, other.vec))

    __hash__ = None

    def is_zero(self) -> bool:
        return all(c.u == 0 for c in self.vec)

    def agreement(self, other: "CycloElement") -> int:
        """Worst absolute agreement valuation across coefficients."""
        other = self._coerce(other)
        d = self - other
        return min((c.v for c in d.vec), default=INF)

    def min_valuation(self) -> int:
        vals = [c.v for c in self.vec if not c.is_zero()]
        return min(vals) if vals else INF

    def to_json(self) -> dict:
        return {"p": self.ctx.p, "n": self.n, "coeffs": [c.to_json() for c in self.vec]}

    def __repr__(self):
        return f"Cyclo(n={self.n}, {self.vec})"


def zeta_minus_one(ctx: PadicContext, n: int) -> CycloElement:
    """zeta_{p^n} - 1 (the ramified uniformizer-ish element)."""
    z = CycloElement.zeta(ctx, n)
    return z - CycloElement.one(ctx, n)


def to_power_basis_at_zm1(x: CycloElement) -> list[PadicScalar]:
    """Coefficients of x on the basis (zeta-1)^s, s < d.

    zeta^e = sum_s C(e,s) (zeta-1)^s is unitriangular, so invert by back
    substitution with exact binomial coefficients.
    """
    from math import comb
    ctx, n = x.ctx, x.n
    d = phi_pn(ctx.p, n)
    a = list(x.vec)
    w = [ctx.zero()] * d
    # solve sum_{e>=s} a_e C(e,s) = w_s ... actually forward: w = M a with
    # M[s][e] = C(e,s); direct dense multiply (d is small).
    for s in range(d):
        acc = ctx.zero()
        for e in range(s, d):
            acc = acc + a[e] * ctx.exact(comb(e, s))
        w[s] = acc
    return w
