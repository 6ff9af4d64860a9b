"""Elliptic curves and genus-2 Jacobians over F_q.

Genus-2 curves are y^2 = f(x) with f squarefree of degree 5 or 6 (p odd).
Divisor classes are held in Mumford form (u, v) with deg u <= 2.  For sextic
models whose leading coefficient is a square in the working field there are
two rational points at infinity and the pair (u, v) alone cannot represent
every class (e.g. the difference of the two infinite points), so divisors
carry an extra infinity weight `n`: the class is

    [ A + n*oo+ + (2 - deg u - n)*oo- ]  -  [ oo+ + oo- ]

with A the affine divisor cut out by (u, v).  For quintic models and for
sextic models with non-square leading coefficient the weight is forced and
callers can ignore it.  The neutral element is always (u, v) = (1, 0) with
the balanced weight.

Group arithmetic is Cantor composition followed by a reduction loop that
tracks the infinity weights through explicit principal divisors y - vtilde,
where vtilde is congruent to v mod u and adapted to the expansion of y at
one of the two infinite points.
"""

import random

from .config import CAPS, CapacityError
from .ff import FieldCtx, FqElem, Poly, embedding, extension, field


class CurveError(ValueError):
    pass


def _as_poly(ctx, coeffs):
    if isinstance(coeffs, Poly):
        return coeffs
    return Poly(ctx, coeffs)


def _poly_xgcd(a, b):
    """Extended gcd for Poly: returns (g, s, t) with s*a + t*b = g, g monic."""
    ctx = a.ctx
    r0, r1 = a, b
    s0, s1 = Poly(ctx, [1]), Poly(ctx, [])
    t0, t1 = Poly(ctx, []), Poly(ctx, [1])
    while not r1.is_zero():
        q, r = divmod(r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    if not r0.is_zero():
        inv = r0.lead().inv()
        r0, s0, t0 = r0 * inv, s0 * inv, t0 * inv
    return r0, s0, t0


# ---------------------------------------------------------------------------
# elliptic curves
# ---------------------------------------------------------------------------

class EllipticCurve:
    """y^2 = x^3 + a2 x^2 + a4 x + a6 over an odd-characteristic field.

    Points are (x, y) pairs of FqElem, or None for the point at infinity.
    """

    __slots__ = ("ctx", "a2", "a4", "a6")

    def __init__(self, ctx, a4=None, a6=None, a2=None):
        self.ctx = ctx
        self.a2 = ctx.elem(a2 if a2 is not None else 0)
        self.a4 = ctx.elem(a4 if a4 is not None else 0)
        self.a6 = ctx.elem(a6 if a6 is not None else 0)
        if self.discriminant().is_zero():
            raise CurveError("singular cubic")

    def rhs(self):
        return Poly(self.ctx, [self.a6, self.a4, self.a2, 1])

    def b_invariants(self):
        b2 = 4 * self.a2
        b4 = 2 * self.a4
        b6 = 4 * self.a6
        b8 = 4 * self.a2 * self.a6 - self.a4 * self.a4
        return b2, b4, b6, b8

    def discriminant(self):
        b2, b4, b6, b8 = self.b_invariants()
        return (-b2 * b2 * b8 - 8 * b4 ** 3 - 27 * b6 * b6 + 9 * b2 * b4 * b6)

    def j_invariant(self):
        b2, b4, b6, b8 = self.b_invariants()
        c4 = b2 * b2 - 24 * b4
        return (c4 ** 3) / self.discriminant()

    def is_on(self, pt):
        if pt is None:
            return True
        x, y = pt
        return y * y == self.rhs().eval(x)

    def add(self, P, Q):
        if P is None:
            return Q
        if Q is None:
            return P
        x1, y1 = P
        x2, y2 = Q
        if x1 == x2:
            if (y1 + y2).is_zero():
                return None
            lam = (3 * x1 * x1 + 2 * self.a2 * x1 + self.a4) / (2 * y1)
        else:
            lam = (y2 - y1) / (x2 - x1)
        x3 = lam * lam - self.a2 - x1 - x2
        y3 = lam * (x1 - x3) - y1
        return (x3, y3)

    def neg(self, P):
        if P is None:
            return None
        return (P[0], -P[1])

    def mul(self, k, P):
        if k < 0:
            return self.mul(-k, self.neg(P))
        R = None
        Q = P
        while k:
            if k & 1:
                R = self.add(R, Q)
            Q = self.add(Q, Q)
            k >>= 1
        return R

    def points(self):
        """All rational points (exhaustive; cap applies)."""
        out = [None]
        for x in self.ctx.elements():
            z = self.rhs().eval(x)
            if z.is_zero():
                out.append((x, self.ctx.zero()))
            elif z.is_square():
                y = z.sqrt()
                out.append((x, y))
                out.append((x, -y))
        return out

    def count(self, k=1):
        """#E(F_{q^k}) by exhaustive enumeration."""
        if k == 1:
            n = 1
            for x in self.ctx.elements():
                z = self.rhs().eval(x)
                if z.is_zero():
                    n += 1
                elif z.is_square():
                    n += 2
            return n
        return self.over(extension(self.ctx, k)).count()

    def trace(self):
        return self.ctx.order + 1 - self.count()

    def is_supersingular(self):
        return self.trace() % self.ctx.p == 0

    def char_poly_coeffs(self):
        """(t, q) with charpoly = T^2 - t T + q."""
        return self.trace(), self.ctx.order

    def over(self, ctx2):
        emb = embedding(self.ctx, ctx2)
        return EllipticCurve(ctx2, a2=emb(self.a2), a4=emb(self.a4), a6=emb(self.a6))

    def random_point(self, rng):
        while True:
            x = self.ctx.random_elem(rng)
            z = self.rhs().eval(x)
            if z.is_zero():
                return (x, self.ctx.zero())
            if z.is_square():
                y = z.sqrt()
                return (x, y if rng.random() < 0.5 else -y)

    def __repr__(self):
        return f"EllipticCurve({self.ctx}, y^2 = x^3 + {self.a2}x^2 + {self.a4}x + {self.a6})"


# ---------------------------------------------------------------------------
# genus-2 curves
# ---------------------------------------------------------------------------

class Genus2Curve:
    """y^2 = f(x), f squarefree of degree 5 or 6."""

    __slots__ = ("ctx", "f", "base_order", "_model", "_vplus", "_rplus")

    def __init__(self, ctx, f, base_order=None):
        f = _as_poly(ctx, f)
        if f.degree not in (5, 6):
            raise CurveError("f must have degree 5 or 6")
        if not f.is_squarefree():
            raise CurveError("f must be squarefree")
        self.ctx = ctx
        self.f = f
        self.base_order = base_order or ctx.order
        if f.degree == 5:
            self._model = "odd"
        elif f.lead().is_square():
            self._model = "split"
        else:
            self._model = "inert"
        self._vplus = None
        self._rplus = None

    @property
    def model(self):
        return self._model

    def vplus(self):
        """Cubic V with deg(f - V^2) <= 2, lc(V) the canonical sqrt of lc(f).

        Only defined for split sextic models; fixes which infinite point
        is oo+ (the one where y/x^3 equals lc(V)).
        """
        if self._vplus is None:
            if self._model != "split":
                raise CurveError("vplus needs a split sextic model")
            f = self.f
            s = f[6].sqrt()
            inv2s = (2 * s).inv()
            c2 = f[5] * inv2s
            c1 = (f[4] - c2 * c2) * inv2s
            c0 = (f[3] - 2 * c2 * c1) * inv2s
            self._vplus = Poly(self.ctx, [c0, c1, c2, s])
            self._rplus = f - self._vplus * self._vplus
            assert self._rplus.degree <= 2 and not self._rplus.is_zero()
        return self._vplus

    def infinity_count(self):
        return {"odd": 1, "split": 2, "inert": 0}[self._model]

    def zero_divisor(self):
        n = 1 if self._model == "split" else 0
        return MumfordDivisor(self, Poly(self.ctx, [1]), Poly(self.ctx, []), n,
                              _checked=True)

    def divisor(self, u, v, n=None):
        return MumfordDivisor(self, _as_poly(self.ctx, u), _as_poly(self.ctx, v), n)

    def over(self, ctx2):
        """The same curve with scalars extended to ctx2."""
        if ctx2 is self.ctx:
            return self
        emb = embedding(self.ctx, ctx2)
        return Genus2Curve(ctx2, emb.map_poly(self.f), base_order=self.base_order)

    def count(self, k=1):
        """#C(F_{q^k}): affine points plus points at infinity."""
        if k != 1:
            return self.over(extension(self.ctx, k)).count()
        ctx = self.ctx
        if ctx.order > CAPS.enumeration_limit:
            raise CapacityError(
                f"point count over a field of {ctx.order} elements exceeds the cap")
        if ctx.n == 1:
            p = ctx.p
            squares = set()
            for t in range((p + 1) // 2):
                squares.add(t * t % p)
            coeffs = [c.c[0] for c in self.f.c]
            total = 0
            for x in range(p):
                acc = 0
                for c in reversed(coeffs):
                    acc = (acc * x + c) % p
                if acc == 0:
                    total += 1
                elif acc in squares:
                    total += 2
        else:
            total = 0
            for x in ctx.elements():
                z = self.f.eval(x)
                if z.is_zero():
                    total += 1
                elif z.is_square():
                    total += 2
        return total + self.infinity_count()

    def random_divisor(self, rng):
        """A random divisor class with deg u = 2, by sampling monic quadratics."""
        ctx = self.ctx
        for _ in range(400):
            b = ctx.random_elem(rng)
            c = ctx.random_elem(rng)
            u = Poly(ctx, [c, b, 1])
            v = self._solve_v(u, rng)
            if v is not None:
                return MumfordDivisor(self, u, v, 0 if self._model == "split" else None)
        raise CurveError("failed to sample a divisor (tiny field?)")

    def _solve_v(self, u, rng):
        """A linear v with u | v^2 - f and (u, v) semireduced, or None."""
        ctx = self.ctx
        disc = u[1] * u[1] - 4 * u[0]
        if disc.is_zero():
            # u = (x - r)^2; need f(r) a nonzero square
            r = -u[1] / 2
            z = self.f.eval(r)
            if z.is_zero() or not z.is_square():
                return None
            y0 = z.sqrt()
            if rng.random() < 0.5:
                y0 = -y0
            yy = self.f.derivative().eval(r) / (2 * y0)
            return Poly(ctx, [y0 - yy * r, yy])
        if disc.is_square():
            # distinct rational roots
            sd = disc.sqrt()
            r1 = (-u[1] + sd) / 2
            r2 = (-u[1] - sd) / 2
            z1, z2 = self.f.eval(r1), self.f.eval(r2)
            if not (z1.is_square() and z2.is_square()):
                return None
            y1, y2 = z1.sqrt(), z2.sqrt()
            if rng.random() < 0.5:
                y1 = -y1
            if rng.random() < 0.5:
                y2 = -y2
            den = r1 - r2
            v1 = (y1 - y2) / den
            v0 = y1 - v1 * r1
            return Poly(ctx, [v0, v1])
        # u irreducible: its root lives in the quadratic extension
        ctx2 = extension(ctx, 2)
        emb = embedding(ctx, ctx2)
        half = emb(ctx.elem(2)).inv()
        rho = (emb(-u[1]) + emb(disc).sqrt()) * half
        z = emb.map_poly(self.f).eval(rho)
        if not z.is_square():
            return None
        w = z.sqrt()
        if rng.random() < 0.5:
            w = -w
        sig = ctx.order  # relative Frobenius of ctx2 / ctx
        rho_s = rho ** sig
        w_s = w ** sig
        v1e = (w - w_s) / (rho - rho_s)
        v0e = w - v1e * rho
        v1 = _embedding_section(emb, v1e)
        v0 = _embedding_section(emb, v0e)
        return Poly(ctx, [v0, v1])

    def enumerate_jacobian(self):
        """All canonical divisor classes (exhaustive; tiny fields only)."""
        ctx = self.ctx
        if ctx.order ** 2 * 4 > CAPS.enumeration_limit:
            raise CapacityError("Jacobian enumeration exceeds the cap")
        out = [self.zero_divisor()]
        elems = list(ctx.elements())
        # deg u = 2
        for b in elems:
            for c in elems:
                u = Poly(ctx, [c, b, 1])
                for v in self._all_v(u):
                    out.append(MumfordDivisor(self, u, v,
                                              0 if self._model == "split" else None,
                                              _checked=True))
        # deg u = 1 (odd model: weight forced; split model: two classes)
        if self._model in ("odd", "split"):
            for r in elems:
                z = self.f.eval(r)
                u = Poly(ctx, [-r, 1])
                ys = [ctx.zero()] if z.is_zero() else (
                    [z.sqrt(), -z.sqrt()] if z.is_square() else [])
                for y in ys:
                    v = Poly(ctx, [y])
                    if self._model == "odd":
                        out.append(MumfordDivisor(self, u, v, None, _checked=True))
                    else:
                        out.append(MumfordDivisor(self, u, v, 0, _checked=True))
                        out.append(MumfordDivisor(self, u, v, 1, _checked=True))
        if self._model == "split":
            one = Poly(ctx, [1])
            zero = Poly(ctx, [])
            out.append(MumfordDivisor(self, one, zero, 0, _checked=True))
            out.append(MumfordDivisor(self, one, zero, 2, _checked=True))
        return out

    def _all_v(self, u):
        """Every linear v with u | v^2 - f, (u, v) semireduced (u quadratic)."""
        ctx = self.ctx
        out = []
        fr = self.f % u  # f1 x + f0
        f1, f0 = fr[1], fr[0]
        b, c = u[1], u[0]
        disc = b * b - 4 * c
        two = ctx.elem(2)
        for v1 in ctx.elements():
            # v^2 mod u = (2 v1 v0 - v1^2 b) x + (v0^2 - v1^2 c)
            if v1.is_zero():
                if not f1.is_zero():
                    continue
                if f0.is_zero():
                    cands = [ctx.zero()]
                elif f0.is_square():
                    r0 = f0.sqrt()
                    cands = [r0, -r0] if not r0.is_zero() else [r0]
                else:
                    continue
                for v0 in cands:
                    if disc.is_zero() and v0.is_zero():
                        continue
                    out.append(Poly(ctx, [v0]))
                continue
            v0 = (f1 + v1 * v1 * b) / (two * v1)
            if v0 * v0 - v1 * v1 * c != f0:
                continue
            v = Poly(ctx, [v0, v1])
            if disc.is_zero() and v.eval(-b / two).is_zero():
                continue  # full fiber through a Weierstrass point
            out.append(v)
        return out

    def __repr__(self):
        return f"Genus2Curve({self.ctx}, y^2 = {self.f})"


def _embedding_section(emb, val):
    """Preimage in emb.src of val in emb.dst (val must lie in the image)."""
    src, dst = emb.src, emb.dst
    p = src.p
    cols = []
    g = src.gen()
    cur = src.one()
    for i in range(src.n):
        cols.append(emb(cur).c)
        cur = cur * g
    # solve sum_i x_i cols[i] == val.c over F_p
    rows = [[cols[i][j] for i in range(src.n)] for j in range(dst.n)]
    x = _fp_solve(rows, list(val.c), p)
    if x is None:
        raise CurveError("value not in the subfield image")
    return src.elem(x)


def _fp_solve(a, b, p):
    """Solve a x = b over F_p (a: m x n).  Returns one solution or None."""
    m, n = len(a), len(a[0])
    aug = [[a[i][j] % p for j in range(n)] + [b[i] % p] for i in range(m)]
    piv_cols = []
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, m) if aug[i][c]), None)
        if piv is None:
            continue
        aug[r], aug[piv] = aug[piv], aug[r]
        inv = pow(aug[r][c], p - 2, p)
        aug[r] = [(x * inv) % p for x in aug[r]]
        for i in range(m):
            if i != r and aug[i][c]:
                f = aug[i][c]
                aug[i] = [(x - f * y) % p for x, y in zip(aug[i], aug[r])]
        piv_cols.append(c)
        r += 1
        if r == m:
            break
    for i in range(r, m):
        if aug[i][n]:
            return None
    x = [0] * n
    for i, c in enumerate(piv_cols):
        x[c] = aug[i][n]
    return x


# ---------------------------------------------------------------------------
# Mumford divisors and Cantor arithmetic
# ---------------------------------------------------------------------------

class MumfordDivisor:
    """A divisor class on a genus-2 Jacobian in canonical Mumford form."""

    __slots__ = ("curve", "u", "v", "n")

    def __init__(self, curve, u, v, n=None, _checked=False):
        self.curve = curve
        u = u.monic() if not u.is_zero() else u
        self.u = u
        self.v = v
        model = curve.model
        d = u.degree
        if model == "split":
            if n is None:
                n = (2 - d) // 2 if d % 2 == 0 else 0
            if not (0 <= n <= 2 - d):
                raise CurveError("infinity weight out of range")
            self.n = n
        elif model == "inert":
            if d % 2 != 0:
                raise CurveError("odd-degree divisor on an inert model")
            self.n = (2 - d) // 2
        else:
            self.n = 2 - d
        if not _checked:
            if u.is_zero() or d > 2:
                raise CurveError("u must be monic of degree <= 2")
            if d == 0:
                if not v.is_zero():
                    raise CurveError("v must vanish when u = 1")
            elif not v.is_zero() and v.degree >= d:
                raise CurveError("v must satisfy deg v < deg u")
            if not ((v * v - curve.f) % u).is_zero():
                raise CurveError("u does not divide v^2 - f")

    def is_zero(self):
        if self.curve.model == "split":
            return self.u.degree == 0 and self.n == 1
        return self.u.degree == 0

    def key(self):
        return (tuple(c.c for c in self.u.c), tuple(c.c for c in self.v.c), self.n)

    def __eq__(self, other):
        return (isinstance(other, MumfordDivisor) and self.curve is other.curve
                and self.key() == other.key())

    def __hash__(self):
        return hash(self.key())

    def __neg__(self):
        curve = self.curve
        u, v = self.u, (-self.v) % self.u if self.u.degree > 0 else -self.v
        if curve.model == "split":
            m = 2 - self.u.degree - self.n
            return MumfordDivisor(curve, u, v, m, _checked=True)
        return MumfordDivisor(curve, u, v, _checked=True)

    def __add__(self, other):
        if not isinstance(other, MumfordDivisor):
            return NotImplemented
        if self.curve is not other.curve:
            raise CurveError("divisors on different curves")
        return _cantor_add(self, other)

    def __sub__(self, other):
        return self + (-other)

    def __rmul__(self, k):
        return self * k

    def __mul__(self, k):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return (-self) * (-k)
        R = self.curve.zero_divisor()
        Q = self
        while k:
            if k & 1:
                R = R + Q
            Q = Q + Q
            k >>= 1
        return R

    def frobenius(self, times=1):
        """The image under the q-power Frobenius (q = the curve's base order)."""
        curve = self.curve
        q = curve.base_order
        power = times
        u2 = Poly(curve.ctx, [c ** (q ** power) for c in self.u.c])
        v2 = Poly(curve.ctx, [c ** (q ** power) for c in self.v.c])
        n2 = self.n
        if curve.model == "split":
            s = curve.vplus().lead()
            if s ** (q ** power) != s:
                n2 = 2 - self.u.degree - self.n
        return MumfordDivisor(curve, u2, v2,
                              n2 if curve.model == "split" else None, _checked=True)

    def order(self, group_order):
        """Order of the class, given a multiple of it (e.g. #Jac)."""
        from sympy import factorint
        n = group_order
        assert (self * n).is_zero()
        for ell, e in factorint(group_order).items():
            for _ in range(e):
                if (self * (n // ell)).is_zero():
                    n //= ell
                else:
                    break
        return n

    def __repr__(self):
        w = f", n={self.n}" if self.curve.model == "split" else ""
        return f"Div(u={self.u}, v={self.v}{w})"


def _cantor_compose(D1, D2):
    """Cantor composition of semireduced affine parts; returns (u3, v3, degd)."""
    f = D1.curve.f
    u1, v1 = D1.u, D1.v
    u2, v2 = D2.u, D2.v
    d1, e1, e2 = _poly_xgcd(u1, u2)
    d, c1, c2 = _poly_xgcd(d1, v1 + v2)
    u3 = (u1 * u2) // (d * d)
    num = c1 * (e1 * u1 * v2 + e2 * u2 * v1) + c2 * (v1 * v2 + f)
    v3 = (num // d) % u3
    return u3, v3, d.degree


def _cantor_add(D1, D2):
    curve = D1.curve
    model = curve.model
    u3, v3, dd = _cantor_compose(D1, D2)
    if model == "split":
        m1 = 2 - D1.u.degree - D1.n
        m2 = 2 - D2.u.degree - D2.n
        return _normalize_split(curve, u3, v3, D1.n + D2.n + dd, m1 + m2 + dd)
    return _normalize_imag(curve, u3, v3)


def _normalize_imag(curve, u, v):
    """Reduction for odd and inert models (no weight bookkeeping)."""
    f = curve.f
    while u.degree > 2:
        u = (f - v * v) // u
        v = (-v) % u if u.degree > 0 else Poly(curve.ctx, [])
        u = u.monic()
    return MumfordDivisor(curve, u, v, _checked=True)


def _normalize_split(curve, u, v, N, M):
    """Reduce (affine (u,v), N*oo+ + M*oo-) to the canonical triple."""
    f = curve.f
    V = curve.vplus()
    r = curve._rplus
    zero = Poly(curve.ctx, [])
    while True:
        d = u.degree
        total = d + N + M
        if d <= 2:
            if N >= 1 and M >= 1 and total > 2:
                N -= 1
                M -= 1
                continue
            if total == 2 and 0 <= N <= 2 - d:
                return MumfordDivisor(curve, u, v, N, _checked=True)
        # one reduction / unload step through div(y - vtilde)
        if d > 2 or N >= M:
            vt = V + ((v - V) % u) if d > 0 else V
            diff = V - vt
            wplus = -diff.degree if not diff.is_zero() else 3 - r.degree
            ssum = V + vt
            wminus = -ssum.degree if not ssum.is_zero() else 3 - r.degree
        else:
            vt = -V + ((v + V) % u) if d > 0 else -V
            ssum = V + vt
            wminus = -ssum.degree if not ssum.is_zero() else 3 - r.degree
            diff = V - vt
            wplus = -diff.degree if not diff.is_zero() else 3 - r.degree
        unew = (f - vt * vt) // u
        degB = unew.degree
        assert degB == -wplus - wminus - d, "infinity order bookkeeping failed"
        vnew = (-vt) % unew if unew.degree > 0 else zero
        u, v = unew.monic(), vnew
        N = N - wplus - degB
        M = M - wminus - degB


# ---------------------------------------------------------------------------
# torsion bases
# ---------------------------------------------------------------------------

class TorsionBasis:
    """A basis of Jac(C)[l^e] over the extension where it is rational.

    gens are four divisors of order exactly l^e whose reductions generate
    Jac[l] (certified exhaustively); frob_matrix is the matrix of the
    q-power Frobenius on the basis, columns = images, entries mod l^e.
    """

    __slots__ = ("curve", "ell", "e", "ctx", "gens", "frob_matrix", "_shadow_table")

    def __init__(self, curve, ell, e, ctx, gens, frob_matrix, shadow_table):
        self.curve = curve
        self.ell = ell
        self.e = e
        self.ctx = ctx
        self.gens = gens
        self.frob_matrix = frob_matrix
        self._shadow_table = shadow_table

    def dlp(self, D):
        """Coordinates of D (an l^e-torsion class) in the basis, mod l^e."""
        ell, e = self.ell, self.e
        coords = [0, 0, 0, 0]
        R = D
        for t in range(e):
            shadow = R * (ell ** (e - 1 - t))
            digits = self._shadow_table.get(shadow.key())
            if digits is None:
                raise CurveError("point not in the torsion subgroup")
            for i in range(4):
                coords[i] += digits[i] * ell ** t
            if t + 1 < e:
                S = self.curve.zero_divisor()
                for i in range(4):
                    if digits[i]:
                        S = S + self.gens[i] * (digits[i] * ell ** t)
                R = R - S
        return coords


def torsion_basis(C, ell, e=1, fa=None, seed=0):
    """Basis of Jac(C)[l^e] with the Frobenius matrix (spec: TorsionBasis)."""
    from . import invariants as _inv

    if ell == C.ctx.p:
        raise CurveError("l = p torsion is not supported")
    if fa is None:
        fa = _inv.char_poly(C)
    m = ell ** e
    k = _inv.frobenius_order_mod(fa, m)
    if k * C.ctx.n > CAPS.torsion_degree_limit:
        raise CapacityError(
            f"{ell}^{e}-torsion needs an extension of degree {k} "
            f"(cap {CAPS.torsion_degree_limit})")
    ctx2 = extension(C.ctx, k)
    curve2 = C.over(ctx2)
    N = _inv.base_change(fa, k).jacobian_order()
    a = 0
    Nred = N
    while Nred % ell == 0:
        Nred //= ell
        a += 1
    if a < 4 * e:
        raise CurveError("full l^e-torsion is not rational here (bug?)")
    rng = random.Random(("torsion", C.ctx.p, C.ctx.n, ell, e, seed))
    cof = N // (ell ** a)

    gens = []
    shadows = []
    # shadow_table: key -> F_l coordinates of every combination found so far
    ztable = {curve2.zero_divisor().key(): (0, 0, 0, 0)}
    span = {curve2.zero_divisor().key(): curve2.zero_divisor()}
    tries = 0
    while len(gens) < 4:
        tries += 1
        if tries > 200:
            raise CurveError("torsion sampling failed to find a basis")
        D = curve2.random_divisor(rng)
        P = D * cof
        j = 0
        Q = P
        while not Q.is_zero():
            Q = Q * ell
            j += 1
        if j < e:
            continue
        P = P * (ell ** (j - e))  # order exactly l^e
        shadow = P * (ell ** (e - 1))
        if shadow.key() in ztable:
            continue
        # extend the exhaustive span table by the new generator
        idx = len(gens)
        new_table = dict(ztable)
        new_span = dict(span)
        for key, coords in ztable.items():
            base = span[key]
            acc = base
            for c in range(1, ell):
                acc = acc + shadow
                newc = coords[:idx] + (c,) + coords[idx + 1:]
                if acc.key() in new_table:
                    raise CurveError("independence certification failed")
                new_table[acc.key()] = newc
                new_span[acc.key()] = acc
        ztable, span = new_table, new_span
        gens.append(P)
        shadows.append(shadow)
    assert len(ztable) == ell ** 4

    basis = TorsionBasis(curve2, ell, e, ctx2, gens, None, ztable)
    cols = [basis.dlp(g.frobenius()) for g in gens]
    M = [[cols[j][i] % m for j in range(4)] for i in range(4)]
    basis.frob_matrix = M
    # the Frobenius matrix must satisfy the characteristic polynomial mod l^e
    cp = _charpoly_mod(M, m)
    target = [c % m for c in fa.coeffs()]
    if cp != target:
        raise CurveError("Frobenius matrix fails its characteristic polynomial")
    return basis


def _charpoly_mod(M, m):
    from ._intlinalg import charpoly
    return [c % m for c in charpoly(M)]


def torsion_module_generators(C, ell, e=1, fa=None, seed=0, need_matrix=False):
    """Generators of Jac(C)[l^e] as a module over (Z/l^e)[Frobenius].

    Much cheaper than a full basis: l-torsion is certified spanned by the
    Frobenius orbits of the generators' shadows.  Returns (curve2, gens).
    """
    from . import invariants as _inv

    if ell == C.ctx.p:
        raise CurveError("l = p torsion is not supported")
    if fa is None:
        fa = _inv.char_poly(C)
    m = ell ** e
    k = _inv.frobenius_order_mod(fa, m)
    if k * C.ctx.n > CAPS.torsion_degree_limit:
        raise CapacityError(
            f"{ell}^{e}-torsion needs an extension of degree {k} "
            f"(cap {CAPS.torsion_degree_limit})")
    ctx2 = extension(C.ctx, k)
    if ctx2.order > CAPS.field_order_limit:
        raise CapacityError("torsion field exceeds the size cap")
    curve2 = C.over(ctx2)
    N = _inv.base_change(fa, k).jacobian_order()
    a = 0
    while N % ell == 0:
        N //= ell
        a += 1
    cof = N
    if a < 4 * e:
        raise CurveError("full l^e-torsion is not rational here (bug?)")
    rng = random.Random(("torsion-mod", C.ctx.p, C.ctx.n, ell, e, seed))

    zero = curve2.zero_divisor()
    span = {zero.key(): zero}
    gens = []
    tries = 0
    while len(span) < ell ** 4:
        tries += 1
        if tries > 200:
            raise CurveError("torsion sampling failed to span")
        D = curve2.random_divisor(rng)
        P = D * cof
        j = 0
        Q = P
        while not Q.is_zero():
            Q = Q * ell
            j += 1
        if j < e:
            continue
        P = P * (ell ** (j - e))
        shadow = P * (ell ** (e - 1))
        orbit = [shadow]
        for _ in range(3):
            orbit.append(orbit[-1].frobenius())
        added = False
        for pt in orbit:
            if pt.key() not in span:
                added = True
                frontier = [pt]
                while frontier:
                    new = frontier.pop()
                    if new.key() in span:
                        continue
                    additions = [new + old for old in list(span.values())]
                    span[new.key()] = new
                    for x in additions:
                        if x.key() not in span:
                            frontier.append(x)
        if added:
            gens.append(P)
    return curve2, gens
