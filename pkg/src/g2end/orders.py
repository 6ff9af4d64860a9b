"""Orders in the quartic algebra Q[x]/(f), conjugation-stable lattices, and
the exact 2x2 quaternion adjugate identity.

Lattices are row spans of an integer matrix divided by a global denominator,
held in Hermite normal form so equality and index computations are canonical.
Coordinates are with respect to the power basis 1, pi, pi^2, pi^3.
"""

from fractions import Fraction
from functools import lru_cache
from math import gcd

from . import _intlinalg as la
from .invariants import FrobPoly, InvariantError


class OrderError(ValueError):
    pass


# ---------------------------------------------------------------------------
# the ambient algebra
# ---------------------------------------------------------------------------

class AlgebraCtx:
    """Q[x]/(f) for a Frobenius quartic f, with conjugation pi -> q/pi."""

    def __init__(self, F: FrobPoly):
        self.F = F
        c = F.coeffs()  # monic quartic, c[4] == 1
        # reduction of pi^4, pi^5, pi^6 in the power basis
        red = []
        cur = [-c[0], -c[1], -c[2], -c[3]]  # pi^4
        red.append(list(cur))
        for _ in range(2):
            cur = [0] + cur
            lead = cur.pop()
            cur = [cur[i] + lead * red[0][i] for i in range(4)]
            red.append(list(cur))
        self._red = red  # pi^(4+i) for i = 0, 1, 2
        # conjugation: pibar = -(pi^3 + a1 pi^2 + a2 pi + q a1)/q
        q = F.q
        pibar = (Fraction(-F.a1), Fraction(-F.a2, q), Fraction(-F.a1, q),
                 Fraction(-1, q))
        self.pibar = pibar
        cols = [self.one(), pibar, self.mul(pibar, pibar)]
        cols.append(self.mul(cols[2], pibar))
        # conj matrix: row i = image of pi^i (acting on row vectors from the right
        # is avoided; we apply conj componentwise through these images)
        self._conj_images = cols
        # involution sanity
        assert self.conj(self.conj(self.pi())) == self.pi()
        assert self.mul(self.pi(), pibar) == self.scalar(q)
        # power-sum traces tr(pi^k), k = 0..6
        s = [Fraction(4)]
        cs = [Fraction(x) for x in c]
        for k in range(1, 7):
            acc = Fraction(0)
            for i in range(1, min(k, 4) + 1):
                acc += cs[4 - i] * s[k - i]
            if k <= 4:
                acc += k * cs[4 - k]
            s.append(-acc)
        self._power_traces = s

    # -- element helpers (Fraction 4-tuples) --------------------------------

    @staticmethod
    def scalar(r):
        return (Fraction(r), Fraction(0), Fraction(0), Fraction(0))

    @staticmethod
    def one():
        return AlgebraCtx.scalar(1)

    @staticmethod
    def pi():
        return (Fraction(0), Fraction(1), Fraction(0), Fraction(0))

    def add(self, x, y):
        return tuple(a + b for a, b in zip(x, y))

    def sub(self, x, y):
        return tuple(a - b for a, b in zip(x, y))

    def smul(self, c, x):
        c = Fraction(c)
        return tuple(c * a for a in x)

    def mul(self, x, y):
        prod = [Fraction(0)] * 7
        for i, a in enumerate(x):
            if a:
                for j, b in enumerate(y):
                    if b:
                        prod[i + j] += a * b
        out = list(prod[:4])
        for i in range(4, 7):
            if prod[i]:
                row = self._red[i - 4]
                for j in range(4):
                    out[j] += prod[i] * row[j]
        return tuple(out)

    def power(self, x, k):
        out = self.one()
        base = x
        while k:
            if k & 1:
                out = self.mul(out, base)
            base = self.mul(base, base)
            k >>= 1
        return out

    def conj(self, x):
        out = (Fraction(0),) * 4
        for coeff, img in zip(x, self._conj_images):
            if coeff:
                out = self.add(out, self.smul(coeff, img))
        return out

    def trace(self, x):
        """Trace of multiplication-by-x on the 4-dimensional algebra."""
        return sum(Fraction(a) * self._power_traces[i] for i, a in enumerate(x))

    def pairing(self, x, y):
        """tr(x * conj(y)): the Rosati trace pairing for commuting elements."""
        return self.trace(self.mul(x, self.conj(y)))

    @property
    def irreducible(self):
        return len(factor_weil_quartic(self.F)) == 1

    def min_poly_degree(self, x):
        """Degree of the minimal polynomial of x over Q."""
        rows = [self.one()]
        cur = self.one()
        for _ in range(4):
            cur = self.mul(cur, x)
            rows.append(cur)
            den = 1
            for r in rows:
                for v in r:
                    den = den * v.denominator // gcd(den, v.denominator)
            imat = [[int(v * den) for v in r] for r in rows]
            if la.left_kernel(imat):
                return len(rows) - 1
        return 4

    def sqrt_of_rational(self, d, max_den=10 ** 8):
        """An element x with x*x == d, or None; exact verification."""
        from fractions import Fraction as Fr
        import mpmath as mp

        mp.mp.dps = 60
        c = self.F.coeffs()
        roots = mp.polyroots([1, c[3], c[2], c[1], c[0]], maxsteps=200,
                             extraprec=200)
        target = mp.sqrt(mp.mpf(d.numerator if isinstance(d, Fr) else d)
                         / (d.denominator if isinstance(d, Fr) else 1))
        import itertools
        for signs in itertools.product((1, -1), repeat=3):
            vals = [target] + [s * target for s in signs]
            # Lagrange interpolation through (roots[i], vals[i])
            coeffs = _lagrange_coeffs(roots, vals)
            cand = []
            ok = True
            for cf in coeffs:
                if abs(mp.im(cf)) > mp.mpf(10) ** (-25):
                    ok = False
                    break
                fr = Fr(str(mp.nstr(mp.re(cf), 30))).limit_denominator(max_den)
                cand.append(fr)
            if not ok:
                continue
            x = tuple(cand)
            if self.mul(x, x) == self.scalar(d):
                return x
        return None


def _lagrange_coeffs(xs, ys):
    import mpmath as mp
    n = len(xs)
    coeffs = [mp.mpc(0)] * n
    for i in range(n):
        num = [mp.mpc(1)]
        den = mp.mpc(1)
        for j in range(n):
            if j == i:
                continue
            num = _poly_mul_mp(num, [-xs[j], mp.mpc(1)])
            den *= (xs[i] - xs[j])
        scale = ys[i] / den
        for k in range(len(num)):
            coeffs[k] += scale * num[k]
    return coeffs


def _poly_mul_mp(a, b):
    import mpmath as mp
    out = [mp.mpc(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


# ---------------------------------------------------------------------------
# integer factorization of Weil quartics over Z
# ---------------------------------------------------------------------------

def _divisors_signed(n):
    n = abs(n)
    out = set()
    d = 1
    while d * d <= n:
        if n % d == 0:
            out.update({d, n // d, -d, -(n // d)})
        d += 1
    return sorted(out, key=abs)


def factor_weil_quartic(F):
    """Irreducible monic integer factors of f (degree and coefficients)."""
    c = F.coeffs()  # [c0, c1, c2, c3, 1]
    # rational roots
    roots = []
    rest = list(c)
    for r in _divisors_signed(c[0]):
        while _poly_eval_int(rest, r) == 0:
            roots.append(r)
            rest = _poly_div_linear(rest, r)
    deg = len(rest) - 1
    factors = [("linear", (r,)) for r in roots]
    if deg == 0:
        return factors
    if deg == 2:
        b, cc = rest[1], rest[0]
        disc = b * b - 4 * cc
        r = _isqrt_or_none(disc)
        if r is not None and (b + r) % 2 == 0:
            factors.append(("linear", ((-b + r) // 2,)))
            factors.append(("linear", ((-b - r) // 2,)))
        else:
            factors.append(("quadratic", (b, cc)))
        return factors
    if deg == 4:
        c0, c1, c2, c3 = rest[0], rest[1], rest[2], rest[3]
        for d in _divisors_signed(c0):
            cc, cc2 = d, c0 // d
            if cc > cc2:
                continue  # unordered pairs once
            if cc != cc2:
                num = c1 - c3 * cc
                den = cc2 - cc
                if num % den != 0:
                    continue
                b = num // den
                b2 = c3 - b
                if cc + cc2 + b * b2 == c2 and b * cc2 + b2 * cc == c1:
                    return (factor_quadratic(b, cc) + factor_quadratic(b2, cc2))
            else:
                if c1 != c3 * cc:
                    continue
                disc = c3 * c3 - 4 * (c2 - 2 * cc)
                r = _isqrt_or_none(disc)
                if r is None or (c3 + r) % 2 != 0:
                    continue
                b = (c3 + r) // 2
                b2 = (c3 - r) // 2
                return factor_quadratic(b, cc) + factor_quadratic(b2, cc)
        return [("quartic", tuple(rest[:4]))]
    raise InvariantError("odd-degree remainder while factoring a Weil quartic")


def factor_quadratic(b, c):
    disc = b * b - 4 * c
    r = _isqrt_or_none(disc)
    if r is not None and (b + r) % 2 == 0:
        return [("linear", ((-b + r) // 2,)), ("linear", ((-b - r) // 2,))]
    return [("quadratic", (b, c))]


def _isqrt_or_none(n):
    from math import isqrt
    if n < 0:
        return None
    r = isqrt(n)
    return r if r * r == n else None


def _poly_eval_int(coeffs, t):
    acc = 0
    for c in reversed(coeffs):
        acc = acc * t + c
    return acc


def _poly_div_linear(coeffs, r):
    # synthetic division by (t - r); the remainder must vanish
    out = [0] * (len(coeffs) - 1)
    carry = 0
    for i in range(len(coeffs) - 1, 0, -1):
        carry = coeffs[i] + carry * r
        out[i - 1] = carry
    assert coeffs[0] + carry * r == 0
    return out


# ---------------------------------------------------------------------------
# lattices
# ---------------------------------------------------------------------------

class OrderLattice:
    """A full or partial rank lattice in Q[x]/(f), rows/denominator in HNF."""

    __slots__ = ("ctx", "rows", "den", "flag_2")

    def __init__(self, ctx, rows, den=1, flag_2=False):
        if den == 0:
            raise OrderError("zero denominator")
        h = la.hnf([list(r) for r in rows])
        g = abs(den)
        for r in h:
            for x in r:
                g = gcd(g, x)
        if g == 0:
            raise OrderError("empty lattice")
        self.rows = tuple(tuple(x // g for x in r) for r in h)
        self.den = abs(den) // g
        self.ctx = ctx
        self.flag_2 = flag_2

    @property
    def rank(self):
        return len(self.rows)

    def basis_elements(self):
        """Basis as Fraction 4-tuples."""
        return [tuple(Fraction(x, self.den) for x in r) for r in self.rows]

    def contains(self, x):
        """Membership of a Fraction 4-tuple."""
        den = self.den
        for v in x:
            den = den * v.denominator // gcd(den, v.denominator)
        target = [int(v * den) for v in x]
        scaled = [[x * (den // self.den) for x in r] for r in self.rows]
        return la.solve_integer(scaled, target) is not None

    def __le__(self, other):
        return all(other.contains(b) for b in self.basis_elements())

    def __eq__(self, other):
        return (isinstance(other, OrderLattice) and self.rows == other.rows
                and self.den == other.den)

    def __hash__(self):
        return hash((self.rows, self.den))

    def is_ring(self):
        bs = self.basis_elements()
        if not self.contains(AlgebraCtx.one()):
            return False
        for i, x in enumerate(bs):
            for y in bs[i:]:
                if not self.contains(self.ctx.mul(x, y)):
                    return False
        return True

    def conj_stable(self):
        return all(self.contains(self.ctx.conj(b)) for b in self.basis_elements())

    def key(self):
        return (self.rows, self.den)

    def __repr__(self):
        return f"Lattice(den={self.den}, rows={[list(r) for r in self.rows]})"


def from_generators(ctx, gens, flag_2=False):
    """Lattice spanned by Fraction 4-tuples."""
    den = 1
    for g in gens:
        for v in g:
            v = Fraction(v)
            den = den * v.denominator // gcd(den, v.denominator)
    rows = [[int(Fraction(v) * den) for v in g] for g in gens]
    return OrderLattice(ctx, rows, den, flag_2=flag_2)


def lattice_sum(L1, L2):
    if L1.ctx is not L2.ctx:
        raise OrderError("mixed algebra contexts")
    return from_generators(L1.ctx, L1.basis_elements() + L2.basis_elements())


def lattice_intersect(L1, L2):
    D = L1.den * L2.den // gcd(L1.den, L2.den)
    A = [[x * (D // L1.den) for x in r] for r in L1.rows]
    B = [[x * (D // L2.den) for x in r] for r in L2.rows]
    ker = la.left_kernel([row[:] for row in A] + [[-x for x in row] for row in B])
    # kernel rows are (u | v) with u*A == v*B; the intersection is u*A
    inter = []
    na = len(A)
    for k in ker:
        u = k[:na]
        vec = [sum(u[i] * A[i][j] for i in range(na)) for j in range(4)]
        inter.append(vec)
    if not inter:
        inter = [[0, 0, 0, 0]]
    return OrderLattice(L1.ctx, inter, D)


def index(L1, L2):
    """[L2 : L1] for L1 a finite-index sublattice of L2 (equal ranks)."""
    if not (L1 <= L2):
        raise OrderError("L1 is not contained in L2")
    if L1.rank != L2.rank:
        raise OrderError("rank mismatch")
    # coordinates of L1's basis in terms of L2's basis
    coords = []
    for b in L1.basis_elements():
        den = L2.den
        for v in b:
            den = den * v.denominator // gcd(den, v.denominator)
        target = [int(v * den) for v in b]
        scaled = [[x * (den // L2.den) for x in r] for r in L2.rows]
        sol = la.solve_integer(scaled, target)
        coords.append(sol)
    if len(coords) != len(coords[0]):
        raise OrderError("index needs equal-rank lattices")
    return abs(la.det(coords))


def lattice_member(L, int_vec):
    return L.contains(tuple(Fraction(v) for v in int_vec))


def same_lattice(L1, L2):
    return L1 == L2


def conjugate_lattice(ctx, L):
    return from_generators(ctx, [ctx.conj(b) for b in L.basis_elements()])


# ---------------------------------------------------------------------------
# canonical orders
# ---------------------------------------------------------------------------

def equation_order(ctx):
    """Z[pi]."""
    return OrderLattice(ctx, la.identity(4))


def zpi_order(ctx):
    """Z[pi, pibar]: multiplicative closure of {1, pi, pibar}."""
    if not ctx.irreducible:
        raise OrderError("f is reducible; Z[pi, pibar] is not an order in a field")
    lat = from_generators(ctx, [ctx.one(), ctx.pi(), ctx.pibar])
    changed = True
    while changed:
        changed = False
        bs = lat.basis_elements()
        prods = []
        for i, x in enumerate(bs):
            for y in bs[i:]:
                prods.append(ctx.mul(x, y))
        newlat = from_generators(ctx, bs + prods)
        if newlat.key() != lat.key():
            lat = newlat
            changed = True
    assert lat.is_ring() and lat.conj_stable()
    return lat


def is_ring(L):
    return L.is_ring()


def conj_stable(L):
    return L.conj_stable()


def _mult_matrix(ctx, b):
    """Rows: coordinates of e_i * b (so row-vector x maps to x*b)."""
    basis = [AlgebraCtx.one(), AlgebraCtx.pi(),
             ctx.power(AlgebraCtx.pi(), 2), ctx.power(AlgebraCtx.pi(), 3)]
    return [list(ctx.mul(e, b)) for e in basis]


def multiplier_ring(ctx, L):
    """{x in K : x L <= L} as a lattice."""
    from ._intlinalg import frac_mat_inv, frac_mat_mul

    Minv = frac_mat_inv([[Fraction(x, L.den) for x in row] for row in L.rows])
    result = None
    for b in L.basis_elements():
        T = _mult_matrix(ctx, b)
        cond = frac_mat_mul(T, Minv)  # x * cond must be integral
        condinv = frac_mat_inv(cond)
        lat_b = from_generators(ctx, [tuple(row) for row in condinv])
        result = lat_b if result is None else lattice_intersect(result, lat_b)
    return result


def discriminant_equation_order(F):
    """disc(Z[pi]) = Res(f, f') for the monic quartic f."""
    c = F.coeffs()
    fp = [c[1], 2 * c[2], 3 * c[3], 4]  # derivative
    syl = []
    for i in range(3):
        syl.append([0] * i + c[::-1] + [0] * (2 - i))
    for i in range(4):
        syl.append([0] * i + fp[::-1] + [0] * (3 - i))
    return la.det(syl)


def _square_divisor_primes(n):
    """Primes l with l^2 | n."""
    from sympy import factorint
    n = abs(n)
    out = []
    for p, e in factorint(n).items():
        if e >= 2:
            out.append(int(p))
    return sorted(out)


@lru_cache(maxsize=None)
def _maximal_order_cached(F):
    ctx = AlgebraCtx(F)
    return _maximal_order_impl(ctx)


def maximal_order(ctx):
    """The ring of integers O_K, by radical-multiplier enlargement."""
    return _maximal_order_impl(ctx)


def _maximal_order_impl(ctx):
    if not ctx.irreducible:
        raise OrderError("f is reducible over Q")
    disc = discriminant_equation_order(ctx.F)
    order = equation_order(ctx)
    for ell in _square_divisor_primes(disc):
        while True:
            bigger = _enlarge_at(ctx, order, ell)
            if bigger.key() == order.key():
                break
            order = bigger
    zz = zpi_order(ctx)
    assert zz <= order
    assert order.is_ring() and order.conj_stable()
    return order


def _enlarge_at(ctx, order, ell):
    """One radical-multiplier step at ell."""
    bs = order.basis_elements()
    # matrix of x -> x^ell on O/ellO (F_ell-linear via the freshman's dream)
    cols = []
    for b in bs:
        img = ctx.power(b, ell)
        cols.append(_coords_mod(order, img, ell))
    j = 1
    size = ell
    while size < 4:
        size *= ell
        j += 1
    A = [[cols[jj][ii] for jj in range(4)] for ii in range(4)]
    P = _fp_mat_pow(A, j, ell)
    ker = _fp_nullspace(P, ell)
    gens = order.basis_elements()
    radical_gens = [self_lin_comb(bs, v) for v in ker]
    rad = from_generators(ctx, [ctx.smul(ell, g) for g in gens] + radical_gens)
    ring = multiplier_ring(ctx, rad)
    return ring


def self_lin_comb(basis, ints):
    out = (Fraction(0),) * 4
    for c, b in zip(ints, basis):
        if c:
            out = tuple(o + c * x for o, x in zip(out, b))
    return out


def _coords_mod(L, x, m):
    """Coordinates of x in L's basis, reduced mod m (x must lie in L)."""
    den = L.den
    for v in x:
        den = den * v.denominator // gcd(den, v.denominator)
    target = [int(v * den) for v in x]
    scaled = [[xx * (den // L.den) for xx in r] for r in L.rows]
    sol = la.solve_integer(scaled, target)
    if sol is None:
        raise OrderError("element outside the lattice")
    return [s % m for s in sol]


def _fp_mat_pow(A, k, p):
    n = len(A)
    R = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    B = [row[:] for row in A]
    while k:
        if k & 1:
            R = [[sum(R[i][t] * B[t][j] for t in range(n)) % p for j in range(n)]
                 for i in range(n)]
        B = [[sum(B[i][t] * B[t][j] for t in range(n)) % p for j in range(n)]
             for i in range(n)]
        k >>= 1
    return R


def _fp_nullspace(A, p):
    """Basis of the right nullspace of A over F_p."""
    n = len(A)
    m = len(A[0])
    mat = [row[:] for row in A]
    piv_of_col = {}
    r = 0
    for c in range(m):
        piv = next((i for i in range(r, n) if mat[i][c] % p), None)
        if piv is None:
            continue
        mat[r], mat[piv] = mat[piv], mat[r]
        inv = pow(mat[r][c], p - 2, p)
        mat[r] = [(x * inv) % p for x in mat[r]]
        for i in range(n):
            if i != r and mat[i][c] % p:
                f = mat[i][c]
                mat[i] = [(x - f * y) % p for x, y in zip(mat[i], mat[r])]
        piv_of_col[c] = r
        r += 1
    basis = []
    free = [c for c in range(m) if c not in piv_of_col]
    for fc in free:
        v = [0] * m
        v[fc] = 1
        for c, rr in piv_of_col.items():
            v[c] = (-mat[rr][fc]) % p
        basis.append(v)
    return basis


# ---------------------------------------------------------------------------
# overorders, real parts, counting lemma
# ---------------------------------------------------------------------------

def _fl_subspaces(dim, ell):
    """All subspaces of F_ell^dim as lists of basis vectors (echelon forms)."""
    import itertools
    vectors = [v for v in itertools.product(range(ell), repeat=dim)
               if any(v)]

    def rref_key(vecs):
        mat = [list(v) for v in vecs]
        # reduce
        r = 0
        cols = len(mat[0]) if mat else 0
        for c in range(cols):
            piv = next((i for i in range(r, len(mat)) if mat[i][c] % ell), None)
            if piv is None:
                continue
            mat[r], mat[piv] = mat[piv], mat[r]
            inv = pow(mat[r][c], ell - 2, ell)
            mat[r] = [(x * inv) % ell for x in mat[r]]
            for i in range(len(mat)):
                if i != r and mat[i][c] % ell:
                    f = mat[i][c]
                    mat[i] = [(x - f * y) % ell for x, y in zip(mat[i], mat[r])]
            r += 1
        mat = [tuple(row) for row in mat if any(row)]
        return tuple(sorted(mat))

    seen = set()
    subs = [[]]
    seen.add(())
    frontier = [[]]
    while frontier:
        cur = frontier.pop()
        for v in vectors:
            cand = cur + [v]
            key = rref_key(cand)
            if len(key) != len(cand):
                continue
            if key in seen:
                continue
            seen.add(key)
            as_list = [list(t) for t in key]
            subs.append(as_list)
            frontier.append(as_list)
    return subs


def minimal_overorders(O, ell):
    """Conjugation-stable rings directly above O inside (1/ell)O cap O_K."""
    ctx = O.ctx
    OK = maximal_order(ctx)
    if index(O, OK) % ell != 0:
        return []
    upper = lattice_intersect(
        from_generators(ctx, [ctx.smul(Fraction(1, ell), b) for b in O.basis_elements()]),
        OK)
    # quotient upper/O is an F_ell space
    qb = _quotient_basis(O, upper, ell)
    dim = len(qb)
    rings = []
    seen = set()
    for sub in _fl_subspaces(dim, ell):
        if not sub:
            continue
        gens = O.basis_elements() + [
            _lift_comb(qb, v) for v in sub]
        cand = from_generators(ctx, gens)
        if cand.key() in seen or cand.key() == O.key():
            continue
        seen.add(cand.key())
        if not cand.is_ring() or not cand.conj_stable():
            continue
        rings.append(cand)
    # minimality filter
    out = []
    for r in rings:
        if not any(other.key() != r.key() and other <= r for other in rings):
            out.append(r)
    out.sort(key=lambda L: (L.den, L.rows))
    return out


def _quotient_basis(L_small, L_big, ell):
    """Elements of L_big spanning L_big / (L_small + ell*L_big) as F_ell space."""
    ctx = L_small.ctx
    base = from_generators(
        ctx, L_small.basis_elements()
        + [ctx.smul(ell, b) for b in L_big.basis_elements()])
    out = []
    cur = base
    for b in L_big.basis_elements():
        if not cur.contains(b):
            out.append(b)
            cur = from_generators(ctx, cur.basis_elements() + [b])
    return out


def _lift_comb(qbasis, ints):
    out = (Fraction(0),) * 4
    for c, b in zip(ints, qbasis):
        if c:
            out = tuple(o + c * x for o, x in zip(out, b))
    return out


def real_suborder(O):
    """O cap K^+: the +1 eigenlattice of conjugation inside O (rank 2)."""
    ctx = O.ctx
    bs = O.basis_elements()
    # integer kernel of (conj - id) on O's coordinates
    rows = []
    den = 1
    for b in bs:
        diff = ctx.sub(ctx.conj(b), b)
        for v in diff:
            den = den * v.denominator // gcd(den, v.denominator)
    for b in bs:
        diff = ctx.sub(ctx.conj(b), b)
        rows.append([int(v * den) for v in diff])
    ker = la.left_kernel(rows)
    gens = [self_lin_comb(bs, v) for v in ker]
    lat = from_generators(ctx, gens)
    assert lat.rank == 2
    return lat


def real_maximal_order(ctx):
    """O_{K^+} = O_K cap K^+."""
    return real_suborder(maximal_order(ctx))


def sharp_order(O_plus, ctx):
    """Largest order with real part O_plus; flagged (possibly short) at 2.

    Greedy ascent from the seed O_plus + c*O_K, where c = [O_{K^+} : O_plus]:
    at odd primes the orders with real part O_plus are closed under sums, so
    the greedy maximum is the maximum; at 2 the result is sound but only a
    lower bound, and the returned lattice carries flag_2 = True in that case.
    """
    OK = maximal_order(ctx)
    OKp = real_suborder(OK)
    c = index(O_plus, OKp)
    seed = from_generators(
        ctx, O_plus.basis_elements() + [ctx.smul(c, b) for b in OK.basis_elements()])
    assert seed.is_ring() and seed.conj_stable()
    assert real_suborder(seed) == O_plus
    cur = seed
    flagged = False
    progress = True
    while progress:
        progress = False
        idx = index(cur, OK)
        for ell in sorted(set(_prime_factors(idx))):
            for cand in minimal_overorders(cur, ell):
                if real_suborder(cand) == O_plus:
                    if ell == 2:
                        flagged = True
                    cur = cand
                    progress = True
                    break
            if progress:
                break
    if index(cur, OK) % 2 == 0:
        flagged = True  # the 2-part was never certified maximal
    return OrderLattice(ctx, [list(r) for r in cur.rows], cur.den, flag_2=flagged)


def _prime_factors(n):
    out = []
    n = abs(n)
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


def count_stable_orders(O, ell, rings_only=False):
    """Conjugation-stable lattices between O cap K^+ + l^2 O and O cap K^+ + l O.

    This is the candidate count of the order-ascent lower bound: the
    conjugation-stable sublattices of the displayed quotient (the objects the
    counting lemma's proof enumerates).  With rings_only=True only the
    multiplicatively closed ones are counted; that stricter count can drop to
    the number of ideals of (O cap K^+)/l and in particular below l, so it is
    NOT what the lemma bounds.
    """
    if ell == 2:
        raise OrderError("the counting lemma needs an odd prime")
    ctx = O.ctx
    if not O.conj_stable():
        raise OrderError("O must be stable under conjugation")
    Op = real_suborder(O)
    ell2 = ell * ell
    hi = from_generators(ctx, Op.basis_elements()
                         + [ctx.smul(ell, b) for b in O.basis_elements()])
    lo = from_generators(ctx, Op.basis_elements()
                         + [ctx.smul(ell2, b) for b in O.basis_elements()])
    qb = _quotient_basis(lo, hi, ell)
    dim = len(qb)
    count = 0
    for sub in _fl_subspaces(dim, ell):
        gens = lo.basis_elements() + [_lift_comb(qb, v) for v in sub]
        cand = from_generators(ctx, gens)
        if not cand.conj_stable():
            continue
        if rings_only and not cand.is_ring():
            continue
        count += 1
    return count


def stable_submodule_count_oracle(O, ell):
    """Submodule count of the quotient as an F_ell[conjugation]-module.

    Decomposes V into the +1/-1 eigenspaces of conjugation and counts
    submodules of V_+^{n+} + V_-^{n-} directly: subspaces inside each
    isotypic block, combined multiplicatively.
    """
    ctx = O.ctx
    Op = real_suborder(O)
    hi = from_generators(ctx, Op.basis_elements()
                         + [ctx.smul(ell, b) for b in O.basis_elements()])
    lo = from_generators(ctx, Op.basis_elements()
                         + [ctx.smul(ell * ell, b) for b in O.basis_elements()])
    qb = _quotient_basis(lo, hi, ell)
    dim = len(qb)
    # conjugation acts on the quotient; diagonalize into eigenspaces
    mats = []
    for b in qb:
        img = ctx.conj(b)
        mats.append(_quotient_coords(lo, qb, img, ell))
    # count submodules: for sigma with eigenvalues +-1, submodules are
    # direct sums of subspaces of the two eigenspaces when the characters
    # differ; if sigma is scalar the submodules are all subspaces.
    A = [[mats[j][i] % ell for j in range(dim)] for i in range(dim)]
    idmat = [[1 if i == j else 0 for j in range(dim)] for i in range(dim)]
    neg = [[(-x) % ell for x in row] for row in idmat]
    if A == idmat or A == neg:
        return sum(_gaussian(dim, k, ell) for k in range(dim + 1))
    # mixed action: eigenspace dims
    nplus = dim - _fp_rank([[(A[i][j] - idmat[i][j]) % ell for j in range(dim)]
                            for i in range(dim)], ell)
    nminus = dim - _fp_rank([[(A[i][j] + idmat[i][j]) % ell for j in range(dim)]
                             for i in range(dim)], ell)
    assert nplus + nminus == dim
    total = 0
    for k1 in range(nplus + 1):
        for k2 in range(nminus + 1):
            total += _gaussian(nplus, k1, ell) * _gaussian(nminus, k2, ell)
    return total


def _gaussian(n, k, q):
    """Gaussian binomial coefficient [n choose k]_q."""
    if k < 0 or k > n:
        return 0
    num = den = 1
    for i in range(k):
        num *= q ** (n - i) - 1
        den *= q ** (i + 1) - 1
    return num // den


def _fp_rank(A, p):
    if not A:
        return 0
    mat = [row[:] for row in A]
    n, m = len(mat), len(mat[0])
    r = 0
    for c in range(m):
        piv = next((i for i in range(r, n) if mat[i][c] % p), None)
        if piv is None:
            continue
        mat[r], mat[piv] = mat[piv], mat[r]
        inv = pow(mat[r][c], p - 2, p)
        mat[r] = [(x * inv) % p for x in mat[r]]
        for i in range(n):
            if i != r and mat[i][c] % p:
                f = mat[i][c]
                mat[i] = [(x - f * y) % p for x, y in zip(mat[i], mat[r])]
        r += 1
        if r == n:
            break
    return r


def _quotient_coords(lo, qbasis, x, ell):
    """Coordinates of x in the quotient basis mod ell (x in hi)."""
    # solve x = sum c_i qb_i  (mod lo), c_i in 0..ell-1, by brute force over
    # the small quotient
    import itertools
    for cs in itertools.product(range(ell), repeat=len(qbasis)):
        cand = (Fraction(0),) * 4
        for c, b in zip(cs, qbasis):
            if c:
                cand = tuple(o + c * v for o, v in zip(cand, b))
        diff = tuple(a - b for a, b in zip(x, cand))
        if lo.contains(diff):
            return list(cs)
    raise OrderError("element not in the span of the quotient basis")


def prime_decomposition(ctx, OK, p):
    """The primes of O_K over p, with ramification data and pi-valuations.

    Works directly in the quotient algebra O_K / p O_K (no Dedekind
    hypothesis): the radical is the kernel of the iterated p-power map, the
    semisimple quotient is split by factoring the minimal polynomial of a
    primitive element, and valuations are read off ideal powers.

    Returns a list of dicts: {lat, e, f, v_pi, conj_index}.
    """
    from .ff import Poly, field

    bs = OK.basis_elements()
    # p-power map on A = O_K/p as an F_p matrix (columns = images)
    cols = [_coords_mod(OK, ctx.power(b, p), p) for b in bs]
    A = [[cols[j][i] for j in range(4)] for i in range(4)]
    j = 1
    size = p
    while size < 4:
        size *= p
        j += 1
    P = _fp_mat_pow(A, j, p)
    rad_vecs = _fp_nullspace(P, p)
    rad_dim = len(rad_vecs)
    # complement basis of the semisimple quotient, greedily
    taken = [v[:] for v in rad_vecs]
    quot_idx = []
    for i in range(4):
        e = [0] * 4
        e[i] = 1
        if _fp_rank(taken + [e], p) > len(taken):
            taken.append(e)
            quot_idx.append(i)
    m = 4 - rad_dim
    assert len(quot_idx) == m

    # multiplication-by-x matrices on the quotient
    def quot_coords(vec):
        # solve vec = sum(rad) + sum(c_i e_{quot_idx[i]}) mod p
        rows = [[rv[k] for k in range(4)] for rv in rad_vecs]
        for qi in quot_idx:
            e = [0] * 4
            e[qi] = 1
            rows.append(e)
        sol = _fp_solve_rows(rows, vec, p)
        return [sol[rad_dim + t] for t in range(m)]

    def elem_from_quot(cvec):
        out = (Fraction(0),) * 4
        for c, qi in zip(cvec, quot_idx):
            if c:
                out = ctx.add(out, ctx.smul(c, bs[qi]))
        return out

    # find a primitive element of the semisimple quotient
    fl = field(p)
    prim = None
    import itertools
    for coeffs in itertools.islice(itertools.product(range(3), repeat=m), 1, 3 ** m):
        z = elem_from_quot(list(coeffs))
        # matrix of multiplication by z on the quotient
        mat = []
        for qi in quot_idx:
            img = ctx.mul(bs[qi], z)
            mat.append(quot_coords(_coords_mod(OK, img, p)))
        mz = [[mat[jj][ii] % p for jj in range(m)] for ii in range(m)]
        cp = _fp_charpoly(mz, p)
        poly = Poly(fl, cp)
        if poly.is_squarefree():
            prim = (z, mz, poly)
            break
    if prim is None:
        raise OrderError("no primitive element found in O_K/p (unexpected)")
    z, mz, minpoly = prim

    primes = []
    for g, _mult in minpoly.factor():
        # maximal ideal = radical + preimage of g(z) * quotient
        gz = [[1 if i == jj else 0 for jj in range(m)] for i in range(m)]
        acc = [[0] * m for _ in range(m)]
        powm = [row[:] for row in gz]
        for c in [int(cc.c[0]) for cc in g.c]:
            if c:
                for r in range(m):
                    for s in range(m):
                        acc[r][s] = (acc[r][s] + c * powm[r][s]) % p
            powm = [[sum(mz[r][t] * powm[t][s] for t in range(m)) % p
                     for s in range(m)] for r in range(m)]
        # ideal basis in the quotient: columns of acc applied to quotient basis
        gens = [ctx.smul(p, b) for b in bs]
        for v in rad_vecs:
            gens.append(self_lin_comb(bs, v))
        for jj in range(m):
            col = [acc[ii][jj] for ii in range(m)]
            gens.append(elem_from_quot(col))
        lat = from_generators(ctx, gens)
        primes.append({"lat": lat, "f": g.degree})

    # valuations via ideal powers
    pivec = AlgebraCtx.pi()
    pvec = AlgebraCtx.scalar(p)
    for pr in primes:
        powers = [OK, pr["lat"]]
        for _ in range(8):
            nxt = _ideal_product(ctx, powers[-1], pr["lat"], OK)
            powers.append(nxt)
        pr["e"] = _val_in_chain(powers, pvec)
        pr["v_pi"] = _val_in_chain(powers, pivec)
    assert sum(pr["e"] * pr["f"] for pr in primes) == 4
    for i, pr in enumerate(primes):
        cl = conjugate_lattice(ctx, pr["lat"])
        pr["conj_index"] = next(
            k for k, other in enumerate(primes) if cl == other["lat"])
    return primes


def _ideal_product(ctx, I, J, OK):
    gens = []
    for x in I.basis_elements():
        for y in J.basis_elements():
            gens.append(ctx.mul(x, y))
    return from_generators(ctx, gens)


def _val_in_chain(powers, vec):
    x = tuple(Fraction(v) for v in vec)
    v = 0
    for k in range(1, len(powers)):
        if powers[k].contains(x):
            v = k
        else:
            break
    return v


def _fp_solve_rows(rows, target, p):
    """Solve sum_i x_i rows[i] = target over F_p (rows spanning)."""
    n = len(rows[0])
    m = len(rows)
    # transpose to standard Ax = b
    a = [[rows[i][j] % p for i in range(m)] for j in range(n)]
    b = [t % p for t in target]
    sol = _fp_solve_system(a, b, p)
    if sol is None:
        raise OrderError("vector outside the span (bug)")
    return sol


def _fp_solve_system(a, b, p):
    n, m = len(a), len(a[0])
    aug = [[a[i][j] % p for j in range(m)] + [b[i] % p] for i in range(n)]
    piv_cols = []
    r = 0
    for c in range(m):
        piv = next((i for i in range(r, n) if aug[i][c]), None)
        if piv is None:
            continue
        aug[r], aug[piv] = aug[piv], aug[r]
        invv = pow(aug[r][c], p - 2, p)
        aug[r] = [(x * invv) % p for x in aug[r]]
        for i in range(n):
            if i != r and aug[i][c]:
                f = aug[i][c]
                aug[i] = [(x - f * y) % p for x, y in zip(aug[i], aug[r])]
        piv_cols.append(c)
        r += 1
        if r == n:
            break
    for i in range(r, n):
        if aug[i][m]:
            return None
    x = [0] * m
    for i, c in enumerate(piv_cols):
        x[c] = aug[i][m]
    return x


def _fp_charpoly(mat, p):
    """char poly of a small matrix over F_p, coefficients low to high."""
    from ._intlinalg import charpoly
    cp = charpoly([[int(x) for x in row] for row in mat])
    return [c % p for c in cp]


def prime_from_factor(ctx, OK, g, p):
    """The prime (p, g(pi)) of O_K, as a lattice (Dedekind, p coprime to index)."""
    gp = [int(c.c[0]) for c in g.c]
    gpi = (Fraction(0),) * 4
    cur = AlgebraCtx.one()
    for c in gp:
        if c:
            gpi = ctx.add(gpi, ctx.smul(c, cur))
        cur = ctx.mul(cur, AlgebraCtx.pi())
    gens = [ctx.smul(p, b) for b in OK.basis_elements()]
    gens += [ctx.mul(gpi, b) for b in OK.basis_elements()]
    return from_generators(ctx, gens)


# ---------------------------------------------------------------------------
# quaternions
# ---------------------------------------------------------------------------

class QuatCtx:
    """The rational quaternion algebra (a, b): i^2 = a, j^2 = b, ij = -ji."""

    def __init__(self, a, b):
        self.a = Fraction(a)
        self.b = Fraction(b)

    def elem(self, c0, c1=0, c2=0, c3=0):
        return QuatElem(self, (Fraction(c0), Fraction(c1), Fraction(c2), Fraction(c3)))

    def zero(self):
        return self.elem(0)

    def one(self):
        return self.elem(1)

    def random(self, rng, span=10):
        return self.elem(*[Fraction(rng.randint(-span, span),
                                    rng.randint(1, 4)) for _ in range(4)])


class QuatElem:
    __slots__ = ("ctx", "c")

    def __init__(self, ctx, coords):
        self.ctx = ctx
        self.c = tuple(Fraction(x) for x in coords)

    def __add__(self, other):
        return QuatElem(self.ctx, tuple(x + y for x, y in zip(self.c, other.c)))

    def __sub__(self, other):
        return QuatElem(self.ctx, tuple(x - y for x, y in zip(self.c, other.c)))

    def __neg__(self):
        return QuatElem(self.ctx, tuple(-x for x in self.c))

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return QuatElem(self.ctx, tuple(Fraction(other) * x for x in self.c))
        a, b = self.ctx.a, self.ctx.b
        x0, x1, x2, x3 = self.c
        y0, y1, y2, y3 = other.c
        return QuatElem(self.ctx, (
            x0 * y0 + a * x1 * y1 + b * x2 * y2 - a * b * x3 * y3,
            x0 * y1 + x1 * y0 - b * x2 * y3 + b * x3 * y2,
            x0 * y2 + x2 * y0 + a * x1 * y3 - a * x3 * y1,
            x0 * y3 + x3 * y0 + x1 * y2 - x2 * y1,
        ))

    __rmul__ = __mul__

    def hat(self):
        """The standard involution (conjugate)."""
        return QuatElem(self.ctx, (self.c[0], -self.c[1], -self.c[2], -self.c[3]))

    def norm(self):
        """Reduced norm as a scalar element x * hat(x)."""
        prod = self * self.hat()
        assert prod.c[1] == prod.c[2] == prod.c[3] == 0
        return prod.c[0]

    def trace(self):
        """Reduced trace x + hat(x) as a scalar."""
        return 2 * self.c[0]

    def is_scalar(self):
        return self.c[1] == self.c[2] == self.c[3] == 0

    def __eq__(self, other):
        return isinstance(other, QuatElem) and self.ctx is other.ctx and self.c == other.c

    def __repr__(self):
        return f"Quat{self.c}"


def _qmat_mul(A, B):
    return [[A[0][0] * B[0][0] + A[0][1] * B[1][0], A[0][0] * B[0][1] + A[0][1] * B[1][1]],
            [A[1][0] * B[0][0] + A[1][1] * B[1][0], A[1][0] * B[0][1] + A[1][1] * B[1][1]]]


def quat_adjugate_identity(x, y, z, w):
    """Both sides of the 2x2 adjugate identity; returns (product, scalar).

    product is [[x, y], [z, w]] times the adjugate-style matrix built from
    duals and norms; scalar is |x||w| + |y||z| - tr(x zhat w yhat).  The
    identity asserts product == scalar * I; callers should verify.
    """
    ctx = x.ctx
    xh, yh, zh, wh = x.hat(), y.hat(), z.hat(), w.hat()
    nx, ny, nz, nw = x.norm(), y.norm(), z.norm(), w.norm()
    adj = [[xh * nw - zh * w * yh, zh * ny - xh * y * wh],
           [yh * nz - wh * z * xh, wh * nx - yh * x * zh]]
    left = _qmat_mul([[x, y], [z, w]], adj)
    scalar = nx * nw + ny * nz - (x * zh * w * yh).trace()
    return left, scalar
