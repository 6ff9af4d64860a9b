"""Exact arithmetic in F_p, extension fields F_{p^n}, and polynomials over them.

Field elements are coefficient tuples over the prime field, reduced modulo a
monic irreducible modulus.  The modulus of degree n is chosen deterministically
as the lexicographically smallest monic irreducible (coefficient sequence
c0, c1, ..., c_{n-1} over 0..p-1), so every run produces bit-identical output.

Characteristic 2 is rejected everywhere: the curve model y^2 = f(x) needs an
odd prime.
"""

import itertools
from functools import lru_cache

from .config import CAPS, CapacityError


class FieldError(ValueError):
    pass


# ---------------------------------------------------------------------------
# prime-field polynomial helpers (coefficient lists of ints, low to high)
# ---------------------------------------------------------------------------

def _pf_trim(a):
    while a and a[-1] == 0:
        a.pop()
    return a


def _pf_add(a, b, p):
    n = max(len(a), len(b))
    return _pf_trim([((a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0)) % p
                     for i in range(n)])


def _pf_sub(a, b, p):
    n = max(len(a), len(b))
    return _pf_trim([((a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0)) % p
                     for i in range(n)])


def _pf_mul(a, b, p):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
    return _pf_trim([x % p for x in out])


def _pf_divmod(a, b, p):
    if not b:
        raise ZeroDivisionError("division by zero polynomial")
    a = list(a)
    q = [0] * max(0, len(a) - len(b) + 1)
    inv_lead = pow(b[-1], p - 2, p)
    for i in range(len(a) - len(b), -1, -1):
        c = (a[i + len(b) - 1] * inv_lead) % p
        if c:
            q[i] = c
            for j, bj in enumerate(b):
                a[i + j] = (a[i + j] - c * bj) % p
    return q, _pf_trim(a)


def _pf_mod(a, b, p):
    return _pf_divmod(a, b, p)[1]


def _pf_gcd(a, b, p):
    a, b = list(a), list(b)
    while b:
        a, b = b, _pf_mod(a, b, p)
    if a:
        inv = pow(a[-1], p - 2, p)
        a = [(x * inv) % p for x in a]
    return a


def _pf_powmod(a, e, mod, p):
    result = [1]
    base = _pf_mod(a, mod, p)
    while e:
        if e & 1:
            result = _pf_mod(_pf_mul(result, base, p), mod, p)
        base = _pf_mod(_pf_mul(base, base, p), mod, p)
        e >>= 1
    return result


def _pf_xgcd(a, b, p):
    # returns (g, s, t) with s*a + t*b = g, g monic (or [])
    r0, r1 = list(a), list(b)
    s0, s1 = [1], []
    t0, t1 = [], [1]
    while r1:
        q, r = _pf_divmod(r0, r1, p)
        r0, r1 = r1, r
        s0, s1 = s1, _pf_sub(s0, _pf_mul(q, s1, p), p)
        t0, t1 = t1, _pf_sub(t0, _pf_mul(q, t1, p), p)
    if r0:
        inv = pow(r0[-1], p - 2, p)
        r0 = [(x * inv) % p for x in r0]
        s0 = [(x * inv) % p for x in s0]
        t0 = [(x * inv) % p for x in t0]
    return r0, s0, t0


def _pf_is_irreducible(f, p):
    """Rabin irreducibility test via iterated p-power Frobenius.

    Computes x^(p^k) mod f incrementally (one exponent-p powmod per step),
    which keeps each candidate test at O(n) cheap powmods.
    """
    n = len(f) - 1
    if n <= 0:
        return False
    if n == 1:
        return True
    x = [0, 1]
    checks = {n // ell for ell in _prime_divisors(n)}
    h = x
    for k in range(1, n + 1):
        h = _pf_powmod(h, p, f, p)
        if k in checks:
            g = _pf_gcd(_pf_sub(h, x, p), f, p)
            if g != [1]:
                return False
    return not _pf_sub(h, x, p)


def _prime_divisors(n):
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


@lru_cache(maxsize=None)
def _default_modulus(p, n):
    """Lexicographically smallest monic irreducible of degree n over F_p.

    Coefficient sequences (c0, c1, ..., c_{n-1}) are compared left to right;
    c0 = 0 never yields an irreducible (x divides), so that block is skipped
    wholesale.
    """
    if n == 1:
        return (0, 1)
    for c0 in range(1, p):
        for rest in itertools.product(range(p), repeat=n - 1):
            cand = [c0] + list(rest) + [1]
            if _pf_is_irreducible(cand, p):
                return tuple(cand)
    raise FieldError(f"no irreducible of degree {n} over F_{p}")  # unreachable


def _is_prime(n):
    if n < 2:
        return False
    for d in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % d == 0:
            return n == d
    d = 41
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


# ---------------------------------------------------------------------------
# field contexts and elements
# ---------------------------------------------------------------------------

class FieldCtx:
    """The field F_{p^n} = F_p[x]/(modulus).

    Immutable and hash-shareable; build through :func:`field` so that equal
    parameters give the identical context object.
    """

    __slots__ = ("p", "n", "modulus", "_red_rows", "_np_red", "_ts_cache",
                 "__weakref__")

    def __init__(self, p, n, modulus=None):
        if not _is_prime(p):
            raise FieldError(f"{p} is not prime")
        if p == 2:
            raise FieldError("characteristic 2 is not supported")
        if n < 1:
            raise FieldError("extension degree must be >= 1")
        if modulus is None:
            modulus = _default_modulus(p, n)
        modulus = tuple(c % p for c in modulus)
        if len(modulus) != n + 1 or modulus[-1] != 1:
            raise FieldError("modulus must be monic of degree n")
        if n > 1 and not _pf_is_irreducible(list(modulus), p):
            raise FieldError("modulus is reducible")
        self.p = p
        self.n = n
        self.modulus = modulus
        # reduction table: x^(n+i) mod modulus for i in 0..n-2
        rows = []
        cur = [(-c) % p for c in modulus[:-1]]  # x^n
        for _ in range(max(0, n - 1)):
            rows.append(tuple(cur))
            cur = [0] + cur
            lead = cur.pop()
            if lead:
                cur = [(cur[j] - lead * modulus[j]) % p for j in range(n)]
        self._red_rows = rows
        if n >= 9 and n * p * p < 2 ** 62:
            import numpy as np
            self._np_red = np.array(rows, dtype=np.int64)
        else:
            self._np_red = None
        self._ts_cache = None

    @property
    def order(self):
        return self.p ** self.n

    def zero(self):
        return FqElem(self, (0,) * self.n)

    def one(self):
        return FqElem(self, (1,) + (0,) * (self.n - 1))

    def gen(self):
        """The residue class of x (a generator of the ring, not of F*)."""
        if self.n == 1:
            return self.one()
        return FqElem(self, (0, 1) + (0,) * (self.n - 2))

    def elem(self, value):
        """Coerce an int or coefficient sequence into the field."""
        if isinstance(value, FqElem):
            if value.ctx is self:
                return value
            raise FieldError("element from a different context")
        if isinstance(value, int):
            return FqElem(self, (value % self.p,) + (0,) * (self.n - 1))
        c = tuple(int(v) % self.p for v in value)
        if len(c) > self.n:
            raise FieldError("coefficient sequence too long")
        return FqElem(self, c + (0,) * (self.n - len(c)))

    def elements(self):
        """Iterate over all p^n elements (deterministic order)."""
        if self.order > CAPS.enumeration_limit:
            raise CapacityError(
                f"enumerating {self.order} field elements exceeds the cap "
                f"{CAPS.enumeration_limit}")
        for tail in itertools.product(range(self.p), repeat=self.n):
            yield FqElem(self, tail)

    def random_elem(self, rng):
        return FqElem(self, tuple(rng.randrange(self.p) for _ in range(self.n)))

    def _nonresidue(self):
        """Deterministic quadratic non-residue, for Tonelli-Shanks."""
        if self._ts_cache is not None:
            return self._ts_cache
        e = (self.order - 1) // 2
        for tail in itertools.product(range(self.p), repeat=self.n):
            cand = FqElem(self, tail)
            if cand.is_zero():
                continue
            if (cand ** e).c != self.one().c:
                self._ts_cache = cand
                return cand
        raise FieldError("no quadratic non-residue found")  # unreachable

    def __repr__(self):
        if self.n == 1:
            return f"F_{self.p}"
        return f"F_{self.p}^{self.n}"

    def __reduce__(self):
        return (field, (self.p, self.n, self.modulus))


@lru_cache(maxsize=None)
def _field_cached(p, n, modulus):
    return FieldCtx(p, n, modulus)


def field(p, n=1, modulus=None):
    """Shared FieldCtx for F_{p^n}; same parameters give the same object."""
    if modulus is not None:
        modulus = tuple(int(c) % p for c in modulus)
    return _field_cached(p, n, modulus)


class FqElem:
    """An element of F_{p^n}: coefficient tuple over F_p, low degree first."""

    __slots__ = ("ctx", "c")

    def __init__(self, ctx, c):
        self.ctx = ctx
        self.c = tuple(c)

    def is_zero(self):
        return not any(self.c)

    def _check(self, other):
        if not isinstance(other, FqElem):
            if isinstance(other, int):
                return self.ctx.elem(other)
            return NotImplemented
        if other.ctx is not self.ctx:
            raise FieldError("mixed field contexts")
        return other

    def __add__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return NotImplemented
        p = self.ctx.p
        return FqElem(self.ctx, tuple((a + b) % p for a, b in zip(self.c, other.c)))

    __radd__ = __add__

    def __neg__(self):
        p = self.ctx.p
        return FqElem(self.ctx, tuple((-a) % p for a in self.c))

    def __sub__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return NotImplemented
        p = self.ctx.p
        return FqElem(self.ctx, tuple((a - b) % p for a, b in zip(self.c, other.c)))

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return NotImplemented
        ctx = self.ctx
        p, n = ctx.p, ctx.n
        if n == 1:
            return FqElem(ctx, ((self.c[0] * other.c[0]) % p,))
        if ctx._np_red is not None:
            # numpy path for wide extensions; coefficients stay < p <= ~3e5
            # so int64 convolution cannot overflow at these degrees
            import numpy as np
            prod = np.convolve(np.array(self.c, dtype=np.int64),
                               np.array(other.c, dtype=np.int64)) % p
            out = prod[:n]
            hi = prod[n:]
            if hi.any():
                out = (out + hi @ ctx._np_red[:len(hi)]) % p
            return FqElem(ctx, out.tolist())
        a, b = self.c, other.c
        prod = [0] * (2 * n - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    prod[i + j] += ai * bj
        out = [x % p for x in prod[:n]]
        for i in range(n, 2 * n - 1):
            hi = prod[i] % p
            if hi:
                row = ctx._red_rows[i - n]
                for j in range(n):
                    out[j] = (out[j] + hi * row[j]) % p
        return FqElem(ctx, out)

    __rmul__ = __mul__

    def inv(self):
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero")
        ctx = self.ctx
        if ctx.n == 1:
            return FqElem(ctx, (pow(self.c[0], ctx.p - 2, ctx.p),))
        g, s, _ = _pf_xgcd(_pf_trim(list(self.c)), list(ctx.modulus), ctx.p)
        if g != [1]:
            raise FieldError("element not invertible (bad modulus?)")
        return ctx.elem(s)

    def __truediv__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inv()

    def __rtruediv__(self, other):
        return self.inv() * other

    def __pow__(self, e):
        if e < 0:
            return self.inv() ** (-e)
        result = self.ctx.one()
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def is_square(self):
        if self.is_zero():
            return True
        return (self ** ((self.ctx.order - 1) // 2)).c == self.ctx.one().c

    def sqrt(self):
        """A square root; raises FieldError on non-squares.

        Deterministic: of the two roots, returns the one whose coefficient
        tuple is lexicographically smallest.
        """
        if self.is_zero():
            return self
        ctx = self.ctx
        q = ctx.order
        if not self.is_square():
            raise FieldError("sqrt of a non-square")
        if q % 4 == 3:
            r = self ** ((q + 1) // 4)
        else:
            # Tonelli-Shanks in F_q*
            s, m = q - 1, 0
            while s % 2 == 0:
                s //= 2
                m += 1
            z = ctx._nonresidue() ** s
            t = self ** s
            r = self ** ((s + 1) // 2)
            one = ctx.one().c
            while t.c != one:
                i, t2 = 0, t
                while t2.c != one:
                    t2 = t2 * t2
                    i += 1
                b = z
                for _ in range(m - i - 1):
                    b = b * b
                z = b * b
                t = t * z
                r = r * b
                m = i
        return min(r, -r, key=lambda e: e.c)

    def frobenius(self, times=1):
        """Apply x -> x^p `times` times."""
        if self.ctx.n == 1:
            return self
        return self ** (self.ctx.p ** (times % self.ctx.n))

    def __eq__(self, other):
        if isinstance(other, int):
            return self.c == self.ctx.elem(other).c
        return isinstance(other, FqElem) and self.ctx is other.ctx and self.c == other.c

    def __hash__(self):
        return hash((id(self.ctx), self.c))

    def __repr__(self):
        if self.ctx.n == 1:
            return str(self.c[0])
        return "(" + ",".join(map(str, self.c)) + ")"


# ---------------------------------------------------------------------------
# polynomials over F_q
# ---------------------------------------------------------------------------

class Poly:
    """Univariate polynomial over a FieldCtx; coefficients low to high."""

    __slots__ = ("ctx", "c")

    def __init__(self, ctx, coeffs):
        self.ctx = ctx
        cs = []
        for v in coeffs:
            cs.append(ctx.elem(v) if not isinstance(v, FqElem) else v)
            if cs[-1].ctx is not ctx:
                raise FieldError("coefficient from a different context")
        while cs and cs[-1].is_zero():
            cs.pop()
        self.c = tuple(cs)

    @property
    def degree(self):
        return len(self.c) - 1  # -1 for the zero polynomial

    def is_zero(self):
        return not self.c

    def __getitem__(self, i):
        if 0 <= i < len(self.c):
            return self.c[i]
        return self.ctx.zero()

    def lead(self):
        if self.is_zero():
            raise ValueError("zero polynomial has no leading coefficient")
        return self.c[-1]

    def monic(self):
        if self.is_zero():
            return self
        inv = self.lead().inv()
        return Poly(self.ctx, [x * inv for x in self.c])

    def _coerce(self, other):
        if isinstance(other, Poly):
            if other.ctx is not self.ctx:
                raise FieldError("mixed polynomial contexts")
            return other
        if isinstance(other, (int, FqElem)):
            return Poly(self.ctx, [other])
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        n = max(len(self.c), len(other.c))
        return Poly(self.ctx, [self[i] + other[i] for i in range(n)])

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.ctx, [-x for x in self.c])

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        n = max(len(self.c), len(other.c))
        return Poly(self.ctx, [self[i] - other[i] for i in range(n)])

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.is_zero() or other.is_zero():
            return Poly(self.ctx, [])
        out = [self.ctx.zero()] * (len(self.c) + len(other.c) - 1)
        for i, ai in enumerate(self.c):
            if not ai.is_zero():
                for j, bj in enumerate(other.c):
                    out[i + j] = out[i + j] + ai * bj
        return Poly(self.ctx, out)

    __rmul__ = __mul__

    def __divmod__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if other.is_zero():
            raise ZeroDivisionError("division by zero polynomial")
        rem = list(self.c)
        dq = len(rem) - len(other.c)
        if dq < 0:
            return Poly(self.ctx, []), self
        quo = [self.ctx.zero()] * (dq + 1)
        inv = other.lead().inv()
        for i in range(dq, -1, -1):
            c = rem[i + len(other.c) - 1] * inv
            quo[i] = c
            if not c.is_zero():
                for j, bj in enumerate(other.c):
                    rem[i + j] = rem[i + j] - c * bj
        return Poly(self.ctx, quo), Poly(self.ctx, rem)

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def __pow__(self, e):
        result = Poly(self.ctx, [1])
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def powmod(self, e, mod):
        result = Poly(self.ctx, [1]) % mod
        base = self % mod
        while e:
            if e & 1:
                result = (result * base) % mod
            base = (base * base) % mod
            e >>= 1
        return result

    def gcd(self, other):
        a, b = self, self._coerce(other)
        while not b.is_zero():
            a, b = b, a % b
        return a.monic() if not a.is_zero() else a

    def derivative(self):
        return Poly(self.ctx, [self.c[i] * i for i in range(1, len(self.c))])

    def eval(self, x):
        if isinstance(x, int):
            x = self.ctx.elem(x)
        acc = self.ctx.zero()
        for coeff in reversed(self.c):
            acc = acc * x + coeff
        return acc

    def is_squarefree(self):
        if self.degree <= 0:
            return not self.is_zero()
        return self.gcd(self.derivative()).degree == 0

    def map_coeffs(self, fn, new_ctx=None):
        return Poly(new_ctx or self.ctx, [fn(x) for x in self.c])

    def frobenius(self, power):
        """Apply a -> a^(p^power) to every coefficient."""
        return Poly(self.ctx, [x ** (self.ctx.p ** power) for x in self.c])

    # -- factorization ------------------------------------------------------

    def roots(self):
        """All roots in the coefficient field, with multiplicity."""
        if self.is_zero():
            raise ValueError("zero polynomial")
        f = self
        if f.degree <= 0:
            return []
        q = self.ctx.order
        x = Poly(self.ctx, [0, 1])
        lin = (x.powmod(q, f) - x).gcd(f)  # product of distinct linear factors
        out = []
        for r in _linear_roots(lin):
            mult = 0
            while True:
                quo, rem = divmod(f, Poly(self.ctx, [-r, 1]))
                if not rem.is_zero():
                    break
                f = quo
                mult += 1
            out.extend([r] * mult)
        out.sort(key=lambda e: e.c)
        return out

    def factor(self, rng_seed=0):
        """Complete factorization into monic irreducibles.

        Returns a sorted list of (irreducible Poly, multiplicity).  Uses
        squarefree + distinct-degree + equal-degree (Cantor-Zassenhaus)
        splitting with a deterministic seeded generator.
        """
        import random
        rng = random.Random((rng_seed, self.ctx.p, self.ctx.n, tuple(x.c for x in self.c)).__repr__())
        if self.is_zero():
            raise ValueError("cannot factor the zero polynomial")
        factors = {}
        f = self.monic()
        # squarefree decomposition by repeated gcd with the derivative,
        # taking p-th roots when the derivative vanishes (char p)
        stack = [(f, 1)]
        while stack:
            g, m = stack.pop()
            if g.degree <= 0:
                continue
            d = g.gcd(g.derivative())
            if d.degree == 0:
                for irr in _factor_squarefree(g, rng):
                    key = tuple(x.c for x in irr.c)
                    factors[key] = (irr, factors.get(key, (irr, 0))[1] + m)
                continue
            if d.degree == g.degree:
                # g = h(x^p); take the p-th root coefficientwise
                p = self.ctx.p
                root = Poly(self.ctx, [g.c[i * p] ** (self.ctx.order // p)
                                       for i in range(g.degree // p + 1)])
                stack.append((root, m * p))
                continue
            stack.append((g // d, m))
            stack.append((d, m))
        out = sorted(factors.values(), key=lambda t: (t[0].degree, tuple(x.c for x in t[0].c)))
        return out

    def __eq__(self, other):
        return (isinstance(other, Poly) and other.ctx is self.ctx
                and self.c == other.c)

    def __hash__(self):
        return hash((id(self.ctx), tuple(x.c for x in self.c)))

    def __repr__(self):
        if self.is_zero():
            return "0"
        terms = []
        for i, a in enumerate(self.c):
            if a.is_zero():
                continue
            if i == 0:
                terms.append(f"{a}")
            elif i == 1:
                terms.append(f"{a}*x" if a != 1 else "x")
            else:
                terms.append(f"{a}*x^{i}" if a != 1 else f"x^{i}")
        return " + ".join(terms)


def _linear_roots(lin):
    """Roots of a product of distinct linear factors (possibly empty)."""
    ctx = lin.ctx
    roots = []
    stack = [lin.monic()] if lin.degree >= 1 else []
    shift = 0
    e = (ctx.order - 1) // 2
    while stack:
        f = stack.pop()
        if f.degree == 1:
            roots.append(-f.c[0])
            continue
        # split the root set by the quadratic character of r + s
        while True:
            s = _nth_elem(ctx, shift)
            shift += 1
            h = Poly(ctx, [s, 1]).powmod(e, f)
            for cand in (h - Poly(ctx, [1]), h + Poly(ctx, [1]), Poly(ctx, [s, 1])):
                g = cand.gcd(f)
                if 0 < g.degree < f.degree:
                    stack.append(g)
                    stack.append(f // g)
                    break
            else:
                continue
            break
    return roots


def _nth_elem(ctx, i):
    """The i-th field element in the deterministic enumeration order."""
    p, n = ctx.p, ctx.n
    digits = []
    v = i % (p ** n)
    for _ in range(n):
        digits.append(v % p)
        v //= p
    return ctx.elem(digits)


def _factor_squarefree(f, rng):
    """Factor a squarefree monic polynomial into irreducibles."""
    ctx = f.ctx
    q = ctx.order
    out = []
    x = Poly(ctx, [0, 1])
    # distinct degree
    h = x
    v = f
    d = 0
    dd = []  # (product of irreducibles of degree d, d)
    while v.degree > 0:
        d += 1
        if 2 * d > v.degree:
            dd.append((v, v.degree))
            break
        h = h.powmod(q, v)
        g = (h - x).gcd(v)
        if g.degree > 0:
            dd.append((g, d))
            v = v // g
            h = h % v
    for g, d in dd:
        out.extend(_edf(g, d, rng))
    out.sort(key=lambda t: (t.degree, tuple(c.c for c in t.c)))
    return out


def _edf(f, d, rng):
    """Equal-degree factorization (all irreducible factors have degree d)."""
    ctx = f.ctx
    q = ctx.order
    if f.degree == d:
        return [f.monic()]
    pieces = [f.monic()]
    done = []
    e = (q ** d - 1) // 2
    while pieces:
        g = pieces.pop()
        if g.degree == d:
            done.append(g)
            continue
        r = Poly(ctx, [ctx.random_elem(rng) for _ in range(g.degree)])
        if r.is_zero():
            pieces.append(g)
            continue
        h = r.powmod(e, g) - Poly(ctx, [1])
        w = h.gcd(g)
        if 0 < w.degree < g.degree:
            pieces.append(w)
            pieces.append(g // w)
        else:
            pieces.append(g)
    return done


# ---------------------------------------------------------------------------
# extensions and embeddings
# ---------------------------------------------------------------------------

class Embedding:
    """Field homomorphism F_{p^a} -> F_{p^b} determined by a root choice."""

    __slots__ = ("src", "dst", "_image_of_gen", "_powers")

    def __init__(self, src, dst, image_of_gen):
        self.src = src
        self.dst = dst
        self._image_of_gen = image_of_gen
        pw = [dst.one()]
        for _ in range(src.n - 1):
            pw.append(pw[-1] * image_of_gen)
        self._powers = pw

    def __call__(self, elem):
        if isinstance(elem, int):
            return self.dst.elem(elem)
        if elem.ctx is self.dst:
            return elem
        if elem.ctx is not self.src:
            raise FieldError("element not in the embedding's source field")
        acc = self.dst.zero()
        for coeff, pw in zip(elem.c, self._powers):
            if coeff:
                acc = acc + pw * coeff
        return acc

    def map_poly(self, poly):
        return Poly(self.dst, [self(c) for c in poly.c])


@lru_cache(maxsize=None)
def _embedding_cached(src, dst):
    if dst.n % src.n != 0:
        raise FieldError(f"no embedding F_{src.p}^{src.n} -> F_{dst.p}^{dst.n}")
    if src.p != dst.p:
        raise FieldError("different characteristics")
    if src.n == 1:
        return Embedding(src, dst, dst.one())
    if src is dst:
        return Embedding(src, dst, dst.gen())
    # image of the source generator = a root of the source modulus in dst
    mod = Poly(dst, [dst.elem(c) for c in src.modulus])
    roots = mod.roots()
    if not roots:
        raise FieldError("modulus has no root in the target (degree mismatch?)")
    return Embedding(src, dst, roots[0])


def embedding(src, dst):
    """Canonical embedding between cached contexts (root chosen deterministically)."""
    return _embedding_cached(src, dst)


def extension(ctx, k):
    """The degree-k extension of ctx, as an absolute field over F_p."""
    return field(ctx.p, ctx.n * k)


def splitting_ctx(f):
    """Smallest extension of f's context over which f splits into linear factors.

    Returns (ctx2, embedding); ctx2 is the input context itself when f already
    splits.
    """
    if f.is_zero():
        raise ValueError("zero polynomial has no splitting field")
    base = f.ctx
    k = 1
    for g, _mult in f.factor():
        if g.degree > 1:
            from math import lcm as _lcm
            k = _lcm(k, g.degree)
    ctx2 = extension(base, k)
    if ctx2 is base:
        return base, embedding(base, base)
    if ctx2.order > CAPS.field_order_limit:
        raise CapacityError(
            f"splitting field F_{ctx2.p}^{ctx2.n} exceeds the configured size cap")
    return ctx2, embedding(base, ctx2)
