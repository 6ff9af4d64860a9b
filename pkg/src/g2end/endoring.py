"""Endomorphism-ring computation: trace pairings on torsion, the
Eisentrager-Lauter divisibility test, greedy order ascent, saturation of
endomorphism sublattices, and coprime-isogeny lattice combination.

Endomorphisms here are the evaluable commutative class g(pi)/m: an integer
polynomial in Frobenius over a positive denominator.  That covers every
algorithm in scope for simple surfaces; split-surface pullbacks enter as
plain lattices through combine_coprime.
"""

import random
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from math import gcd, isqrt

from . import _intlinalg as la
from . import invariants as inv
from . import orders as ords
from .config import CAPS, CapacityError
from .curves import torsion_basis, torsion_module_generators


class EndoError(ValueError):
    pass


class UnsupportedDenominator(RuntimeError):
    """An l = p part in a denominator that cannot be shifted into Z[pi, pibar]."""


# ---------------------------------------------------------------------------
# evaluable endomorphisms
# ---------------------------------------------------------------------------

class EndoElement:
    """g(pi)/m with integer g of degree <= 3 and positive denominator m."""

    __slots__ = ("ctx", "g", "m", "tag")

    def __init__(self, ctx, g, m=1, tag=None):
        if m == 0:
            raise EndoError("zero denominator")
        if m < 0:
            g, m = [-x for x in g], -m
        g = list(g) + [0] * (4 - len(g))
        d = m
        for x in g:
            d = gcd(d, x)
        if d > 1:
            g = [x // d for x in g]
            m //= d
        self.ctx = ctx
        self.g = tuple(g)
        self.m = m
        self.tag = tag

    @classmethod
    def from_vector(cls, ctx, vec, tag=None):
        den = 1
        for v in vec:
            v = Fraction(v)
            den = den * v.denominator // gcd(den, v.denominator)
        return cls(ctx, [int(Fraction(v) * den) for v in vec], den, tag=tag)

    def vector(self):
        return tuple(Fraction(x, self.m) for x in self.g)

    def rosati_dual(self):
        """The Rosati involute; for this commutative class it is conjugation."""
        return EndoElement.from_vector(self.ctx, self.ctx.conj(self.vector()),
                                       tag=self.tag)

    def norm_pairing(self):
        """<alpha, alpha> = tr(alpha alphabar), exact."""
        v = self.ctx.pairing(self.vector(), self.vector())
        assert v.denominator == 1 or True
        return v

    def evaluate_numerator(self, D, modulus=None):
        """sum_i g_i pi^i (D) on a divisor; coefficients reduced mod `modulus`."""
        return evaluate_in_frobenius(self.g, D, modulus)

    def __repr__(self):
        return f"Endo({self.g}/{self.m})"


def evaluate_in_frobenius(g, D, modulus=None):
    """Apply the integer polynomial g (low to high) in Frobenius to a divisor."""
    acc = D.curve.zero_divisor()
    P = D
    for i, c in enumerate(g):
        if modulus:
            c %= modulus
        if c:
            acc = acc + P * c
        if i < len(g) - 1:
            P = P.frobenius()
    return acc


def pi_endo(ctx):
    return EndoElement(ctx, [0, 1, 0, 0])


def one_endo(ctx):
    return EndoElement(ctx, [1, 0, 0, 0])


@dataclass
class GoodRep:
    """An evaluable endomorphism, its Rosati dual, and a trace bound."""

    elem: EndoElement
    dual: EndoElement
    bound: int

    @classmethod
    def of(cls, elem):
        dual = elem.rosati_dual()
        b = elem.norm_pairing()
        if b.denominator != 1:
            raise EndoError("non-integral self-pairing")
        return cls(elem, dual, max(int(b), 1))


# ---------------------------------------------------------------------------
# torsion action and the trace pairing
# ---------------------------------------------------------------------------

def act_on_torsion(alpha, basis):
    """Matrix of alpha on a TorsionBasis, mod l^e."""
    m = basis.ell ** basis.e
    if gcd(alpha.m, basis.ell) != 1:
        raise EndoError(
            f"denominator {alpha.m} not invertible mod {basis.ell}^{basis.e}")
    M = basis.frob_matrix
    acc = [[0] * 4 for _ in range(4)]
    P = [[1 if i == j else 0 for j in range(4)] for i in range(4)]
    for i, c in enumerate(alpha.g):
        c %= m
        if c:
            for r in range(4):
                for s in range(4):
                    acc[r][s] = (acc[r][s] + c * P[r][s]) % m
        if i < 3:
            P = [[sum(M[r][t] * P[t][s] for t in range(4)) % m for s in range(4)]
                 for r in range(4)]
    minv = pow(alpha.m % m, -1, m)
    return [[(x * minv) % m for x in row] for row in acc]


def _trace_primes(C, fa, need_product, skip):
    """Smallest usable primes l (not p, not in skip, torsion in reach).

    A prime is usable when its torsion field fits the degree cap AND the
    l^4-entry independence table is feasible (the brute-force certification
    is the point of this representation; large l are simply skipped).
    """
    out = []
    prod = 1
    ell = 2
    while prod <= need_product:
        if ell > CAPS.trace_prime_limit:
            raise CapacityError("ran out of CRT primes under the configured cap")
        if (ell != C.ctx.p and ell not in skip and _is_prime_int(ell)
                and ell ** 4 <= 20000):
            try:
                k = inv.frobenius_order_mod(fa, ell)
                if k * C.ctx.n <= CAPS.torsion_degree_limit:
                    out.append(ell)
                    prod *= ell
            except CapacityError:
                pass
        ell += 1
    return out


def _is_prime_int(n):
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


_TORSION_CACHE = {}


def _curve_key(C):
    return (C.ctx.p, C.ctx.n, tuple(x.c for x in C.f.c))


def cached_torsion_basis(C, ell, e, fa, seed=0):
    key = (_curve_key(C), ell, e, seed)
    if key not in _TORSION_CACHE:
        _TORSION_CACHE[key] = torsion_basis(C, ell, e, fa=fa, seed=seed)
    return _TORSION_CACHE[key]


_TORSION_GENS_CACHE = {}


def _cached_module_generators(C, ell, e, fa, seed=0):
    key = (_curve_key(C), ell, e, seed)
    if key not in _TORSION_GENS_CACHE:
        _TORSION_GENS_CACHE[key] = torsion_module_generators(C, ell, e, fa=fa,
                                                             seed=seed)
    return _TORSION_GENS_CACHE[key]


def trace_pairing(a, b, C, fa=None, seed=0):
    """<a, b> = tr(a b^dagger) as an exact integer, by CRT over torsion primes."""
    if fa is None:
        fa = inv.char_poly(C)
    bound = isqrt(a.bound * b.bound) + 1
    skip = set()
    for m in (a.elem.m, b.dual.m):
        for ell in _prime_factors(m):
            skip.add(ell)
    primes = _trace_primes(C, fa, 2 * bound, skip)
    residues = []
    for ell in primes:
        tb = cached_torsion_basis(C, ell, 1, fa, seed=seed)
        ma = act_on_torsion(a.elem, tb)
        mb = act_on_torsion(b.dual, tb)
        prod = [[sum(ma[i][t] * mb[t][j] for t in range(4)) % ell for j in range(4)]
                for i in range(4)]
        residues.append(sum(prod[i][i] for i in range(4)) % ell)
    # CRT and centered lift
    mmod, val = 1, 0
    for ell, r in zip(primes, residues):
        g, s, t = _xgcd(mmod, ell)
        val = (val * t * ell + r * s * mmod) % (mmod * ell)
        mmod *= ell
    val %= mmod
    if val > mmod // 2:
        val -= mmod
    return val


def _xgcd(a, b):
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


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


# ---------------------------------------------------------------------------
# Eisentrager-Lauter divisibility
# ---------------------------------------------------------------------------

def el_divisibility_test(alpha, C, fa=None, seed=0):
    """alpha = g(pi)/m integral as an endomorphism?  True iff for every
    prime power l^e || m, g(pi) kills A[l^e].

    A p-part of m is first shifted away modulo Z[pi, pibar] (those are always
    endomorphisms); if it survives the shift the case is unsupported (the
    divisibility criterion is stated for l coprime to p).
    """
    if fa is None:
        fa = inv.char_poly(C)
    if alpha.m == 1:
        return True
    p = C.ctx.p
    if alpha.m % p == 0:
        ctx = alpha.ctx
        w = _reduce_p_denominator(ctx, alpha.vector(), ords.zpi_order(ctx))
        if w is None:
            raise UnsupportedDenominator(
                "p-part of the denominator survives reduction mod Z[pi, pibar]")
        alpha = EndoElement.from_vector(ctx, w, tag=alpha.tag)
        if alpha.m == 1:
            return True
    m = alpha.m
    for ell in _prime_factors(m):
        e = 0
        mm = m
        while mm % ell == 0:
            mm //= ell
            e += 1
        if not _kills_torsion(alpha.g, C, ell, e, fa, seed):
            return False
    return True


def _kills_torsion(g, C, ell, e, fa, seed):
    """Does g(pi) annihilate A[l^e]?

    Fast path: with a full torsion basis available, g kills A[l^e] iff
    g(M) = 0 mod l^e for M the Frobenius matrix.  For primes too large for
    the basis table, certified Frobenius-module generators are evaluated
    directly through Cantor arithmetic.
    """
    m = ell ** e
    if ell ** 4 <= 20000:
        tb = cached_torsion_basis(C, ell, e, fa, seed=seed)
        M = tb.frob_matrix
        acc = [[0] * 4 for _ in range(4)]
        P = [[1 if i == j else 0 for j in range(4)] for i in range(4)]
        for i, c in enumerate(g):
            c %= m
            if c:
                for r in range(4):
                    for s in range(4):
                        acc[r][s] = (acc[r][s] + c * P[r][s]) % m
            if i < len(g) - 1:
                P = [[sum(M[r][t] * P[t][s] for t in range(4)) % m
                      for s in range(4)] for r in range(4)]
        return all(x == 0 for row in acc for x in row)
    _curve2, gens = _cached_module_generators(C, ell, e, fa, seed=seed)
    for P in gens:
        if not evaluate_in_frobenius(g, P, modulus=m).is_zero():
            return False
    return True


def order_in_end(O, C, fa=None, zpi=None, seed=0):
    """Is the order O contained in End(Jac C)?  Elementwise EL tests.

    Basis elements are first reduced modulo Z[pi, pibar] (always inside the
    endomorphism ring), which clears every p-part that can be cleared.
    """
    if fa is None:
        fa = inv.char_poly(C)
    ctx = O.ctx
    if zpi is None:
        zpi = ords.zpi_order(ctx)
    for b in O.basis_elements():
        alpha = EndoElement.from_vector(ctx, b)
        if not el_divisibility_test(alpha, C, fa=fa, seed=seed):
            return False
    return True


def _reduce_p_denominator(ctx, x, zpi):
    """x - z for z in Z[pi,pibar] with p-free denominator, or None."""
    p = ctx.F.p
    den = 1
    for v in x:
        den = den * Fraction(v).denominator // gcd(den, Fraction(v).denominator)
    a = 0
    while den % p == 0:
        den //= p
        a += 1
    if a == 0:
        return x
    # solve x = z + w with z in zpi, w with denominator coprime to p:
    # equivalently x in zpi + (1/den') Z^4 where den' = p-free part
    pa = p ** a
    # target in the lattice (1/(den*pa)) Z^4: stack zpi basis and (1/den)e_i
    full_den = den * pa
    rows = []
    for r in zpi.rows:
        rows.append([v * (full_den // zpi.den) for v in r])
    for i in range(4):
        e = [0] * 4
        e[i] = full_den // den
        rows.append(e)
    target = [int(Fraction(v) * full_den) for v in x]
    sol = la.solve_integer(rows, target)
    if sol is None:
        return None
    w = [Fraction(0)] * 4
    for c, r in zip(sol[len(zpi.rows):], range(4)):
        w[r] = Fraction(c, den)
    return tuple(w)


# ---------------------------------------------------------------------------
# order ascent
# ---------------------------------------------------------------------------

@dataclass
class AscendResult:
    order: ords.OrderLattice          # best certified lower bound
    upper: ords.OrderLattice          # O_K
    exact: bool                       # no undetermined primes remain
    undetermined: list = dc_field(default_factory=list)
    certificate: list = dc_field(default_factory=list)

    def bounds(self):
        return (self.order, self.upper)


def ascend(C, fa=None, seed=0):
    """Greedy ascent over minimal overorders, per the lattice-of-orders method.

    Returns an AscendResult; when a prime's torsion field is out of reach the
    result is inexact with that prime recorded, and the certified bounds are
    [current order, O_K].
    """
    if fa is None:
        fa = inv.char_poly(C)
    rep = inv.classify(C, fa=fa)
    if not rep.simple_over_base or rep.p_rank == 0:
        raise EndoError("ascent applies to base-simple surfaces of p-rank 1 or 2")
    ctx = ords.AlgebraCtx(fa)
    OK = ords.maximal_order(ctx)
    zpi = ords.zpi_order(ctx)
    cur = zpi
    undetermined = set()
    cert = []
    progress = True
    while progress:
        progress = False
        nu = ords.index(cur, OK)
        for ell in sorted(set(_prime_factors(nu))):
            if ell in undetermined:
                continue
            for cand in ords.minimal_overorders(cur, ell):
                try:
                    ok = order_in_end(cand, C, fa=fa, zpi=zpi, seed=seed)
                except CapacityError as exc:
                    undetermined.add(ell)
                    cert.append({"ell": ell, "result": "undetermined",
                                 "reason": str(exc)})
                    break
                except UnsupportedDenominator as exc:
                    undetermined.add(ell)
                    cert.append({"ell": ell, "result": "undetermined",
                                 "reason": str(exc)})
                    break
                cert.append({"ell": ell,
                             "index_in_OK": ords.index(cand, OK),
                             "result": "passed" if ok else "failed"})
                if ok:
                    cur = cand
                    progress = True
                    break
            if progress:
                break
    return AscendResult(
        order=cur,
        upper=OK,
        exact=not undetermined,
        undetermined=sorted(undetermined),
        certificate=cert,
    )


# ---------------------------------------------------------------------------
# saturation (augment-subring)
# ---------------------------------------------------------------------------

def augment_subring(reps, C, fa=None, seed=0, use_crt_gram=False):
    """Saturate span_Q(reps) cap End(A): returns (basis EndoElements, Gram).

    Implements the Gram-determinant driven saturation: for each prime l with
    l^2 | det(G), enumerate S/lS, divide out elements killing A[l], repeat
    until l-maximal; the S/lS list length is capped (exponential in general).

    The Gram entries are tr(alpha betabar), computed exactly in the algebra
    by default; use_crt_gram=True routes them through the torsion/CRT
    machinery instead (same values, exercised separately by its own tests,
    and much slower since the pairing bounds grow like q^3).
    """
    if fa is None:
        fa = inv.char_poly(C)
    ctx = reps[0].elem.ctx if isinstance(reps[0], GoodRep) else reps[0].ctx
    elems = [r.elem if isinstance(r, GoodRep) else r for r in reps]
    vecs = [e.vector() for e in elems]
    # select a linearly independent subset (coordinates are exact)
    basis_vecs = []
    for v in vecs:
        if _rank_of(basis_vecs + [v]) > len(basis_vecs):
            basis_vecs.append(v)
    rank = len(basis_vecs)

    def gram_of(bvs):
        g = [[0] * len(bvs) for _ in range(len(bvs))]
        for i in range(len(bvs)):
            for j in range(i, len(bvs)):
                if use_crt_gram:
                    gr_i = GoodRep.of(EndoElement.from_vector(ctx, bvs[i]))
                    gr_j = GoodRep.of(EndoElement.from_vector(ctx, bvs[j]))
                    val = trace_pairing(gr_i, gr_j, C, fa=fa, seed=seed)
                else:
                    val = ctx.pairing(bvs[i], bvs[j])
                    assert val.denominator == 1
                    val = int(val)
                g[i][j] = g[j][i] = int(val)
        return g

    G = gram_of(basis_vecs)
    detG = la.det(G)
    if detG == 0:
        raise EndoError("degenerate Gram matrix (dependent inputs?)")
    for ell in sorted(set(p for p in _prime_factors(detG)
                          if detG % (p * p) == 0)):
        if ell == C.ctx.p:
            continue  # p-denominators are out of EL scope
        while True:
            if ell ** rank > CAPS.subring_list_limit:
                raise CapacityError(
                    f"S/lS enumeration at l={ell} exceeds the configured cap")
            found = None
            import itertools
            for cs in itertools.product(range(ell), repeat=rank):
                if not any(cs):
                    continue
                beta = tuple(sum(Fraction(c) * bv[k] for c, bv in zip(cs, basis_vecs))
                             for k in range(4))
                eb = EndoElement.from_vector(ctx, beta)
                v = 0
                mm = eb.m
                while mm % ell == 0:
                    mm //= ell
                    v += 1
                if _kills_torsion_vec(eb, C, ell, v + 1, fa, seed):
                    found = tuple(Fraction(b, ell) for b in beta)
                    break
            if found is None:
                break
            rows = [[Fraction(x) for x in bv] for bv in basis_vecs] + [list(found)]
            basis_vecs = _hnf_frac(rows)[:rank]
            G = gram_of(basis_vecs)
    out = [EndoElement.from_vector(ctx, v) for v in basis_vecs]
    return out, G


def _kills_torsion_vec(eb, C, ell, level, fa, seed):
    """Does the endomorphism eb kill A[l]?  (beta(A[l]) = 0 in the paper.)

    beta = g(pi)/m with l^v || m: beta kills A[l] iff g(pi) kills A[l^(v+1)];
    `level` must be v+1.
    """
    return _kills_torsion(eb.g, C, ell, level, fa, seed)


def _rank_of(vecs):
    if not vecs:
        return 0
    den = 1
    for v in vecs:
        for x in v:
            den = den * Fraction(x).denominator // gcd(den, Fraction(x).denominator)
    mat = [[int(Fraction(x) * den) for x in v] for v in vecs]
    return len(la.hnf(mat))


def _hnf_frac(rows):
    den = 1
    for r in rows:
        for x in r:
            den = den * Fraction(x).denominator // gcd(den, Fraction(x).denominator)
    mat = [[int(Fraction(x) * den) for x in r] for r in rows]
    h = la.hnf(mat)
    return [tuple(Fraction(x, den) for x in r) for r in h]


def brute_force_saturation(reps, C, fa=None, max_den=6, seed=0):
    """Oracle: {gamma in span_Q(reps) : EL-integral} over denominators <= max_den.

    Enumerates candidate denominators directly and tests each gamma with the
    Eisentrager-Lauter criterion; exponентially slower than augment_subring
    but independent of the Gram bookkeeping.
    """
    if fa is None:
        fa = inv.char_poly(C)
    ctx = reps[0].elem.ctx if isinstance(reps[0], GoodRep) else reps[0].ctx
    elems = [r.elem if isinstance(r, GoodRep) else r for r in reps]
    vecs = []
    for e in elems:
        if _rank_of(vecs + [e.vector()]) > len(vecs):
            vecs.append(e.vector())
    cur = list(vecs)
    import itertools
    for m in range(2, max_den + 1):
        if m % C.ctx.p == 0:
            continue
        changed = True
        while changed:
            changed = False
            for cs in itertools.product(range(m), repeat=len(cur)):
                if not any(cs):
                    continue
                cand = tuple(sum(Fraction(c, m) * v[k] for c, v in zip(cs, cur))
                             for k in range(4))
                eb = EndoElement.from_vector(ctx, cand)
                if eb.m == 1:
                    continue
                if eb.m % C.ctx.p == 0:
                    continue
                try:
                    if el_divisibility_test(eb, C, fa=fa, seed=seed):
                        newbasis = _hnf_frac([list(v) for v in cur] + [list(cand)])
                        if newbasis != cur:
                            cur = newbasis
                            changed = True
                except CapacityError:
                    continue
    return cur


# ---------------------------------------------------------------------------
# coprime-isogeny combination
# ---------------------------------------------------------------------------

@dataclass
class PullbackLattice:
    """phihat . End(B) . phi as an integer lattice in a fixed ambient Z^r."""

    degree: int
    rows: list
    label: str = ""


def combine_coprime(lat_b, lat_c):
    """HNF basis of Lambda_B + Lambda_C for coprime-degree pullbacks.

    Verifies the degrees are coprime and that the two sublattice indices in
    the sum are coprime (deg(phi)^2 End(A) lies inside each pullback).
    """
    if gcd(lat_b.degree, lat_c.degree) != 1:
        raise EndoError("isogeny degrees are not coprime")
    rows = [list(r) for r in lat_b.rows] + [list(r) for r in lat_c.rows]
    total = la.hnf(rows)
    ib = _sublattice_index(lat_b.rows, total)
    ic = _sublattice_index(lat_c.rows, total)
    if gcd(ib, ic) != 1:
        raise EndoError(
            f"sublattice indices {ib}, {ic} are not coprime; inputs are not "
            "full pullback lattices of coprime isogenies")
    return total


def _sublattice_index(rows, total):
    coords = []
    for r in rows:
        sol = la.solve_integer([list(t) for t in total], list(r))
        if sol is None:
            raise EndoError("row escapes the sum lattice (bug)")
        coords.append(sol)
    if len(coords) != len(total):
        raise EndoError("rank mismatch between summand and sum")
    return abs(la.det(coords))
