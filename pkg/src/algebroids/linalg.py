"""Dense exact linear algebra over the Expr fraction field.

Everything here is plain Gaussian elimination with deterministic pivoting
(first nonzero entry scanning rows and columns in index order), which keeps
extracted coefficients, nullspace bases and remainders reproducible between
runs.  Matrices are lists of lists of Expr, vectors are lists of Expr.
"""

from __future__ import annotations


def zeros(env, rows, cols):
    return [[env.zero for _ in range(cols)] for _ in range(rows)]


def identity(env, n):
    out = zeros(env, n, n)
    for i in range(n):
        out[i][i] = env.one
    return out


def transpose(mat):
    return [list(col) for col in zip(*mat)]


def mat_add(a, b):
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_sub(a, b):
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_scale(f, a):
    return [[f * x for x in row] for row in a]


def mat_mul(a, b):
    bt = transpose(b)
    return [[_dot(row, col) for col in bt] for row in a]


def mat_vec(a, v):
    return [_dot(row, v) for row in a]


def _dot(u, v):
    total = u[0] * v[0]
    for x, y in zip(u[1:], v[1:]):
        total = total + x * y
    return total


def _echelon(rows):
    """Row-reduce in place; returns list of (row_index, pivot_col) pairs."""
    pivots = []
    r = 0
    ncols = len(rows[0]) if rows else 0
    for c in range(ncols):
        pivot = None
        for i in range(r, len(rows)):
            if not rows[i][c].is_zero:
                pivot = i
                break
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        inv = rows[r][c]
        rows[r] = [x / inv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and not rows[i][c].is_zero:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append((r, c))
        r += 1
        if r == len(rows):
            break
    return pivots


def rank(mat) -> int:
    if not mat:
        return 0
    work = [list(row) for row in mat]
    return len(_echelon(work))


def determinant(mat, env):
    """Exact determinant (Gaussian elimination, first-nonzero pivoting)."""
    n = len(mat)
    if n == 0:
        return env.one
    work = [list(row) for row in mat]
    det = env.one
    for c in range(n):
        pivot = None
        for i in range(c, n):
            if not work[i][c].is_zero:
                pivot = i
                break
        if pivot is None:
            return env.zero
        if pivot != c:
            work[c], work[pivot] = work[pivot], work[c]
            det = -det
        det = det * work[c][c]
        inv = work[c][c]
        for i in range(c + 1, n):
            if not work[i][c].is_zero:
                f = work[i][c] / inv
                work[i] = [x - f * y for x, y in zip(work[i], work[c])]
    return det


def reduce_against(basis, target):
    """Express target as a combination of basis vectors plus a remainder.

    Returns (coeffs, remainder) with target = sum(c_a * basis[a]) + remainder
    and remainder canonical (zero in every pivot column of the echelonized
    basis).  remainder is all zero exactly when target lies in the span.
    """
    if not basis:
        return [], list(target)
    env = target[0].env
    n = len(basis)
    # Augment each basis row with a unit tracker so the elimination history
    # yields coefficients with respect to the original rows.
    work = [list(row) + [env.one if j == i else env.zero for j in range(n)]
            for i, row in enumerate(basis)]
    width = len(target)
    pivots = _echelon(work)
    remainder = list(target)
    coeffs = [env.zero] * n
    for r, c in pivots:
        if c >= width:
            break
        f = remainder[c]
        if f.is_zero:
            continue
        for j in range(width):
            remainder[j] = remainder[j] - f * work[r][j]
        for a in range(n):
            coeffs[a] = coeffs[a] + f * work[r][width + a]
    return coeffs, remainder


def in_span(basis, target) -> bool:
    _, rem = reduce_against(basis, target)
    return all(x.is_zero for x in rem)


def nullspace(mat, env, ncols=None):
    """Basis of {x : mat @ x = 0} with pivots at the lowest possible columns.

    Basis vectors are indexed by the free columns in increasing order and
    have a 1 in their own free column, which makes the output canonical.
    """
    if ncols is None:
        ncols = len(mat[0]) if mat else 0
    if not mat:
        return [[env.one if j == i else env.zero for j in range(ncols)]
                for i in range(ncols)]
    work = [list(row) for row in mat]
    pivots = _echelon(work)
    pivot_cols = {c: r for r, c in pivots}
    free_cols = [c for c in range(ncols) if c not in pivot_cols]
    basis = []
    for fc in free_cols:
        vec = [env.zero] * ncols
        vec[fc] = env.one
        for c, r in pivot_cols.items():
            vec[c] = -work[r][fc]
        basis.append(vec)
    return basis


def solve(mat, rhs, env):
    """One solution of mat @ x = rhs, or None when inconsistent.

    Free variables are set to zero, so the answer is deterministic.
    """
    nrows = len(mat)
    ncols = len(mat[0]) if nrows else 0
    work = [list(mat[i]) + [rhs[i]] for i in range(nrows)]
    pivots = _echelon(work)
    x = [env.zero] * ncols
    for r, c in pivots:
        if c == ncols:
            return None  # a pivot in the augmented column: inconsistent
        x[c] = work[r][ncols]
    for i in range(nrows):
        if all(work[i][j].is_zero for j in range(ncols)) and not work[i][ncols].is_zero:
            return None
    return x


def inverse(mat, env):
    """Exact inverse of a square matrix; raises ValueError when singular."""
    n = len(mat)
    work = [list(mat[i]) + [env.one if j == i else env.zero for j in range(n)]
            for i in range(n)]
    pivots = _echelon(work)
    if len(pivots) < n or any(c >= n for _, c in pivots):
        raise ValueError("matrix is singular")
    # _echelon fully reduces, so columns 0..n-1 now hold the identity.
    return [row[n:] for row in work]
