"""Exact integer / rational linear algebra helpers.

Everything here works on plain lists of lists of Python ints (or Fractions
where noted).  Matrices are row-major; lattices are row spans.  No numpy in
this module: the matrix sizes are tiny (4x4 mostly) and exactness is the point.
"""

from fractions import Fraction
from math import gcd


def identity(n):
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def mat_mul(a, b):
    n, k, m = len(a), len(b), len(b[0])
    out = [[0] * m for _ in range(n)]
    for i in range(n):
        ai = a[i]
        oi = out[i]
        for t in range(k):
            ait = ai[t]
            if ait:
                bt = b[t]
                for j in range(m):
                    oi[j] += ait * bt[j]
    return out


def mat_vec(a, v):
    return [sum(a[i][j] * v[j] for j in range(len(v))) for i in range(len(a))]


def vec_mat(v, a):
    m = len(a[0])
    return [sum(v[i] * a[i][j] for i in range(len(v))) for j in range(m)]


def mat_pow(a, k):
    n = len(a)
    result = identity(n)
    base = [row[:] for row in a]
    while k:
        if k & 1:
            result = mat_mul(result, base)
        base = mat_mul(base, base)
        k >>= 1
    return result


def transpose(a):
    return [list(col) for col in zip(*a)]


def hnf(rows):
    """Row Hermite normal form of the lattice spanned by `rows`.

    Returns a list of nonzero rows, pivots positive, entries above each pivot
    reduced into [0, pivot).  The input is not modified.
    """
    h, _ = hnf_with_transform(rows)
    return h


def hnf_with_transform(rows):
    """HNF plus a record of zero-combinations.

    Returns (H, kernel) where H is the list of nonzero HNF rows and kernel is
    a basis (list of integer vectors, length == len(rows)) of the left kernel:
    combinations of the input rows that vanish.
    """
    m = len(rows)
    if m == 0:
        return [], []
    n = len(rows[0])
    a = [list(r) for r in rows]
    u = identity(m)

    pivot_row = 0
    for col in range(n):
        # find a row at or below pivot_row with nonzero entry in col
        nz = [i for i in range(pivot_row, m) if a[i][col]]
        if not nz:
            continue
        # euclidean elimination within the column
        while len(nz) > 1:
            nz.sort(key=lambda i: abs(a[i][col]))
            i0 = nz[0]
            for i in nz[1:]:
                q = a[i][col] // a[i0][col]
                if q:
                    for j in range(n):
                        a[i][j] -= q * a[i0][j]
                    for j in range(m):
                        u[i][j] -= q * u[i0][j]
            nz = [i for i in nz if a[i][col]]
        i0 = nz[0]
        if i0 != pivot_row:
            a[i0], a[pivot_row] = a[pivot_row], a[i0]
            u[i0], u[pivot_row] = u[pivot_row], u[i0]
        if a[pivot_row][col] < 0:
            a[pivot_row] = [-x for x in a[pivot_row]]
            u[pivot_row] = [-x for x in u[pivot_row]]
        # reduce the rows ABOVE the pivot
        piv = a[pivot_row][col]
        for i in range(pivot_row):
            q = a[i][col] // piv
            if q:
                for j in range(n):
                    a[i][j] -= q * a[pivot_row][j]
                for j in range(m):
                    u[i][j] -= q * u[pivot_row][j]
        pivot_row += 1
        if pivot_row == m:
            break

    nonzero = [row for row in a if any(row)]
    kernel = [u[i] for i in range(m) if not any(a[i])]
    return nonzero, kernel


def left_kernel(a):
    """Basis of integer row vectors v with v*a == 0."""
    _, ker = hnf_with_transform(a)
    return hnf(ker) if ker else []


def det(a):
    """Exact determinant via fraction-free Bareiss elimination."""
    n = len(a)
    m = [row[:] for row in a]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if m[i][k]), None)
            if swap is None:
                return 0
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
            m[i][k] = 0
        prev = m[k][k]
    return sign * m[-1][-1]


def frac_mat_inv(a):
    """Inverse of a square matrix over Q (entries int or Fraction)."""
    n = len(a)
    aug = [[Fraction(a[i][j]) for j in range(n)] + [Fraction(int(i == j)) for j in range(n)]
           for i in range(n)]
    for col in range(n):
        piv = next((i for i in range(col, n) if aug[i][col] != 0), None)
        if piv is None:
            raise ValueError("matrix is singular")
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [x * inv for x in aug[col]]
        for i in range(n):
            if i != col and aug[i][col] != 0:
                f = aug[i][col]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[col])]
    return [row[n:] for row in aug]


def frac_mat_mul(a, b):
    n, k, m = len(a), len(b), len(b[0])
    return [[sum(Fraction(a[i][t]) * Fraction(b[t][j]) for t in range(k)) for j in range(m)]
            for i in range(n)]


def charpoly(a):
    """Characteristic polynomial det(tI - a) of an integer matrix.

    Returns coefficients [c0, c1, ..., 1] low to high, as ints.
    Uses Faddeev-LeVerrier; the intermediate divisions are exact.
    """
    n = len(a)
    af = [[Fraction(x) for x in row] for row in a]
    coeffs = [Fraction(1)]  # leading
    m = [[Fraction(0)] * n for _ in range(n)]
    c = Fraction(1)
    for k in range(1, n + 1):
        # M_k = A*M_{k-1} + c_{k-1} I
        if k == 1:
            m = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
        else:
            m = frac_mat_mul(af, m)
            for i in range(n):
                m[i][i] += c
        am = frac_mat_mul(af, m)
        c = -sum(am[i][i] for i in range(n)) / k
        coeffs.append(c)
    # coeffs[k] multiplies t^(n-k)
    out = [coeffs[n - j] for j in range(n + 1)]
    assert all(x.denominator == 1 for x in out)
    return [int(x) for x in out]


def lattice_contains(basis, denom, vec, vdenom=1):
    """Does vec/vdenom lie in the lattice spanned by basis/denom?

    basis: integer rows (full column rank not required), denom: positive int.
    """
    # want integer x with x * basis / denom == vec / vdenom
    # i.e. x * (vdenom * basis) == denom * vec
    target = [denom * v for v in vec]
    scaled = [[vdenom * x for x in row] for row in basis]
    sol = solve_integer(scaled, target)
    return sol is not None


def solve_integer(rows, target):
    """Solve x * rows == target over the integers, or None."""
    h, u = _hnf_rows_transform(rows)
    # express target over the HNF rows by pivot elimination
    t = list(target)
    coeff = [0] * len(h)
    n = len(target)
    for idx, row in enumerate(h):
        piv = next((j for j in range(n) if row[j]), None)
        if piv is None:
            continue
        # floor division: a non-exact quotient leaves a residue in this
        # column that no later row can clear (pivots move right), so the
        # final any(t) check rejects it.
        q = t[piv] // row[piv]
        if q:
            for j in range(n):
                t[j] -= q * row[j]
        coeff[idx] = q
    if any(t):
        return None
    # map back through the transform
    m = len(rows)
    x = [0] * m
    for idx, q in enumerate(coeff):
        if q:
            for j in range(m):
                x[j] += q * u[idx][j]
    return x


def _hnf_rows_transform(rows):
    """HNF rows together with the transform rows (U with U*rows == H)."""
    m = len(rows)
    if m == 0:
        return [], []
    a = [list(r) for r in rows]
    u = identity(m)
    n = len(rows[0])
    pivot_row = 0
    for col in range(n):
        nz = [i for i in range(pivot_row, m) if a[i][col]]
        if not nz:
            continue
        while len(nz) > 1:
            nz.sort(key=lambda i: abs(a[i][col]))
            i0 = nz[0]
            for i in nz[1:]:
                q = a[i][col] // a[i0][col]
                if q:
                    for j in range(n):
                        a[i][j] -= q * a[i0][j]
                    for j in range(m):
                        u[i][j] -= q * u[i0][j]
            nz = [i for i in nz if a[i][col]]
        i0 = nz[0]
        if i0 != pivot_row:
            a[i0], a[pivot_row] = a[pivot_row], a[i0]
            u[i0], u[pivot_row] = u[pivot_row], u[i0]
        if a[pivot_row][col] < 0:
            a[pivot_row] = [-x for x in a[pivot_row]]
            u[pivot_row] = [-x for x in u[pivot_row]]
        piv = a[pivot_row][col]
        for i in range(pivot_row):
            q = a[i][col] // piv
            if q:
                for j in range(n):
                    a[i][j] -= q * a[pivot_row][j]
                for j in range(m):
                    u[i][j] -= q * u[pivot_row][j]
        pivot_row += 1
        if pivot_row == m:
            break
    keep = [i for i in range(m) if any(a[i])]
    return [a[i] for i in keep], [u[i] for i in keep]


def lcm(a, b):
    return a // gcd(a, b) * b
