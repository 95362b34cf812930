"""Operator systems on a trivial bundle and the bracket structures they induce.

An n-system consists of n first-order operators X_1..X_n on a rank-m
trivial bundle together with n pointwise independent covectors xi^1..xi^n.
From that data one derives an anchor, a connection, a bracket, structure
constants, curvature and the Bianchi identity, and classifies the result
as PURE, DULL or LIE depending on which bracket laws hold identically.
"""

from __future__ import annotations

from fractions import Fraction

from . import linalg
from .bundles import (
    CDO,
    frame_vector,
    vec_add,
    vec_is_zero,
    vec_scale,
    vec_sub,
    vec_zero,
    vf_bracket,
    zero_cdo,
)
from .report import ResidualReport

TIERS = ("PURE", "DULL", "LIE")


class SpanViolation(ValueError):
    """An operator image left the span it was required to stay inside."""

    code = "SPAN_VIOLATION"

    def __init__(self, message, where=None, remainder=None):
        super().__init__(message)
        self.where = where
        self.remainder = remainder


class NSystem:
    """n operators with n independent covectors on a rank-m bundle."""

    def __init__(self, operators, covectors):
        operators = tuple(operators)
        covectors = tuple(tuple(c) for c in covectors)
        if not operators:
            raise ValueError("need at least one operator")
        if len(operators) != len(covectors):
            raise ValueError(
                "got %d operators but %d covectors"
                % (len(operators), len(covectors))
            )
        env = operators[0].env
        m = operators[0].m
        for op in operators:
            if op.env is not env:
                raise ValueError("operators use different environments")
            if op.m != m:
                raise ValueError("operators have mixed ranks")
        for c in covectors:
            if len(c) != m:
                raise ValueError("covector length does not match rank %d" % m)
        if linalg.rank([list(c) for c in covectors]) != len(covectors):
            raise ValueError("covectors are linearly dependent")
        self.env = env
        self.m = m
        self.n = len(operators)
        self.operators = operators
        self.covectors = covectors
        self._table = None
        self._constants = None

    @property
    def symbols(self):
        return tuple(op.symbol for op in self.operators)

    def __repr__(self):
        return "NSystem(n=%d, m=%d)" % (self.n, self.m)


class StructureConstants:
    """Expansion coefficients a[i][k][j] of X_i(xi^j) = sum_k a[i][k][j] xi^k."""

    def __init__(self, a):
        self.a = a

    def bracket_coeff(self, i, j, k):
        """Coefficient of X_k in the operator commutator [X_i, X_j]."""
        return self.a[j][i][k] - self.a[i][j][k]


def structure_constants(sys: NSystem) -> StructureConstants:
    """Expand each operator's dual action in the covector basis.

    Raises SpanViolation when some X_i(xi^j) fails to lie in the span of
    the covectors; the offending (i, j) pair and the remainder are kept on
    the exception.
    """
    if sys._constants is not None:
        return sys._constants
    basis = [list(c) for c in sys.covectors]
    n = sys.n
    a = []
    for i, op in enumerate(sys.operators):
        ai = [[None] * n for _ in range(n)]
        for j, cov in enumerate(sys.covectors):
            image = op.apply_dual(list(cov))
            coeffs, remainder = linalg.reduce_against(basis, image)
            if not all(x.is_zero for x in remainder):
                raise SpanViolation(
                    "operator %d applied to covector %d leaves the covector span"
                    % (i + 1, j + 1),
                    where=(i + 1, j + 1),
                    remainder=remainder,
                )
            for k in range(n):
                ai[k][j] = coeffs[k]
        a.append(ai)
    sys._constants = StructureConstants(a)
    return sys._constants


class LieStructureTable:
    """Anchor, connection and bracket derived from an n-system.

    The direction operator along the frame section w_p is
    N_p = sum_i <w_p, xi^i> X_i, so nabla_y z = sum_p y_p N_p(z) is
    tensorial in y, and the bracket is its antisymmetrization.
    """

    def __init__(self, sys: NSystem):
        self.system = sys
        self.env = sys.env
        self.m = sys.m
        ops = []
        for p in range(sys.m):
            acc = zero_cdo(sys.env, sys.m)
            for i, op in enumerate(sys.operators):
                w = sys.covectors[i][p]
                if not w.is_zero:
                    acc = acc + op.scale(w)
            ops.append(acc)
        self.nabla_ops = ops
        self.anchor_coeffs = tuple(op.symbol for op in ops)
        self.bracket_table = [
            [vec_sub(ops[p].rows[q], ops[q].rows[p]) for q in range(sys.m)]
            for p in range(sys.m)
        ]

    def anchor(self, y):
        """Coefficient of d/dt of the anchor image of the section y."""
        total = self.env.zero
        for yp, fp in zip(y, self.anchor_coeffs):
            if not yp.is_zero and not fp.is_zero:
                total = total + yp * fp
        return total

    def anchor_apply(self, y, f):
        return self.anchor(y) * f.differentiate()

    def nabla(self, y, z):
        out = vec_zero(self.env, self.m)
        for p, yp in enumerate(y):
            if yp.is_zero:
                continue
            out = vec_add(out, vec_scale(yp, self.nabla_ops[p].apply(z)))
        return out

    def bracket(self, y, z):
        return vec_sub(self.nabla(y, z), self.nabla(z, y))


def build_structure(sys: NSystem) -> LieStructureTable:
    if sys._table is None:
        sys._table = LieStructureTable(sys)
    return sys._table


def compat_residuals(sys: NSystem) -> ResidualReport:
    """Residuals of the two compatibility conditions of an n-system.

    span[i,j]       X_i(xi^j) minus its expansion in the covectors
    symbol-bracket[i,j]   defect of [x_i, x_j] against the expansion constants
    operator-bracket[i,j] defect of the operator commutator, expanded on the
                          frame and on the dual frame
    """
    sc = structure_constants(sys)
    report = ResidualReport()
    env = sys.env
    n = sys.n
    for i, op in enumerate(sys.operators):
        for j, cov in enumerate(sys.covectors):
            image = op.apply_dual(list(cov))
            for k in range(n):
                c = sc.a[i][k][j]
                if not c.is_zero:
                    image = vec_sub(image, vec_scale(c, list(sys.covectors[k])))
            report.add("span[%d,%d]" % (i + 1, j + 1), image)
    for i in range(n):
        for j in range(i + 1, n):
            defect = vf_bracket(sys.operators[i].symbol, sys.operators[j].symbol)
            for k in range(n):
                c = sc.bracket_coeff(i, j, k)
                if not c.is_zero:
                    defect = defect - c * sys.operators[k].symbol
            report.add("symbol-bracket[%d,%d]" % (i + 1, j + 1), defect)
    for i in range(n):
        for j in range(i + 1, n):
            defect = sys.operators[i].commutator(sys.operators[j])
            for k in range(n):
                c = sc.bracket_coeff(i, j, k)
                if not c.is_zero:
                    defect = defect - sys.operators[k].scale(c)
            report.add("operator-bracket[%d,%d].frame" % (i + 1, j + 1), defect.rows)
            report.add(
                "operator-bracket[%d,%d].dual" % (i + 1, j + 1), defect.dual_rows()
            )
    return report


def classify(sys: NSystem):
    """Classify the induced bracket structure; returns (tier, report).

    anchor-hom[p,q] entries are the defects of the anchor being a bracket
    homomorphism on frame pairs (zero exactly for DULL and above) and
    jacobi[p,q,r] entries are the Jacobiator components on frame triples
    (additionally zero exactly for LIE).  Both families are antisymmetric
    in the frame indices, so increasing index tuples carry everything.
    """
    table = build_structure(sys)
    env = sys.env
    m = sys.m
    report = ResidualReport()
    dull_ok = True
    for p in range(m):
        for q in range(p + 1, m):
            defect = vf_bracket(table.anchor_coeffs[p], table.anchor_coeffs[q])
            for r in range(m):
                c = table.bracket_table[p][q][r]
                if not c.is_zero:
                    defect = defect - c * table.anchor_coeffs[r]
            defect = -defect
            report.add("anchor-hom[%d,%d]" % (p + 1, q + 1), defect)
            if not defect.is_zero:
                dull_ok = False
    jacobi_ok = True
    for p in range(m):
        wp = frame_vector(env, m, p)
        for q in range(p + 1, m):
            wq = frame_vector(env, m, q)
            for r in range(q + 1, m):
                wr = frame_vector(env, m, r)
                acc = table.bracket(wp, table.bracket_table[q][r])
                acc = vec_add(acc, table.bracket(wq, table.bracket_table[r][p]))
                acc = vec_add(acc, table.bracket(wr, table.bracket_table[p][q]))
                report.add("jacobi[%d,%d,%d]" % (p + 1, q + 1, r + 1), acc)
                if not vec_is_zero(acc):
                    jacobi_ok = False
    if dull_ok and jacobi_ok:
        tier = "LIE"
    elif dull_ok:
        tier = "DULL"
    else:
        tier = "PURE"
    return tier, report


def _as_table(obj):
    if isinstance(obj, NSystem):
        return build_structure(obj)
    return obj


def curvature(obj, x, y, z):
    """R(x,y)z = nabla_x nabla_y z - nabla_y nabla_x z - nabla_[x,y] z."""
    table = _as_table(obj)
    out = table.nabla(x, table.nabla(y, z))
    out = vec_sub(out, table.nabla(y, table.nabla(x, z)))
    out = vec_sub(out, table.nabla(table.bracket(x, y), z))
    return out


def bianchi_cyclic(obj, x, y, z):
    """Both sides of the cyclic Bianchi identity; returns (lhs, rhs).

    lhs is the cyclic sum of curvature terms, rhs the cyclic sum of nested
    brackets; the two agree for every torsion-free connection built from a
    bracket, whatever laws the bracket itself satisfies.
    """
    table = _as_table(obj)
    lhs = curvature(table, x, y, z)
    lhs = vec_add(lhs, curvature(table, y, z, x))
    lhs = vec_add(lhs, curvature(table, z, x, y))
    rhs = table.bracket(x, table.bracket(y, z))
    rhs = vec_add(rhs, table.bracket(y, table.bracket(z, x)))
    rhs = vec_add(rhs, table.bracket(z, table.bracket(x, y)))
    return lhs, rhs


class Connection:
    """A connection given by one direction operator per frame section.

    ops[p] is nabla along w_p; symbols play the role of anchor
    coefficients so the same curvature and Bianchi helpers apply.
    """

    def __init__(self, ops):
        ops = tuple(ops)
        if not ops:
            raise ValueError("need at least one direction operator")
        env = ops[0].env
        m = ops[0].m
        if len(ops) != m:
            raise ValueError("expected %d direction operators, got %d" % (m, len(ops)))
        for op in ops:
            if op.env is not env or op.m != m:
                raise ValueError("direction operators disagree on the bundle")
        self.env = env
        self.m = m
        self.ops = ops
        self.anchor_coeffs = tuple(op.symbol for op in ops)

    def anchor(self, y):
        total = self.env.zero
        for yp, fp in zip(y, self.anchor_coeffs):
            if not yp.is_zero and not fp.is_zero:
                total = total + yp * fp
        return total

    def nabla(self, y, z):
        out = vec_zero(self.env, self.m)
        for p, yp in enumerate(y):
            if yp.is_zero:
                continue
            out = vec_add(out, vec_scale(yp, self.ops[p].apply(z)))
        return out

    def bracket(self, y, z):
        """The torsion bracket nabla_y z - nabla_z y."""
        return vec_sub(self.nabla(y, z), self.nabla(z, y))

    def frame_bracket_table(self):
        return [
            [vec_sub(self.ops[p].rows[q], self.ops[q].rows[p]) for q in range(self.m)]
            for p in range(self.m)
        ]


def connection_from_bracket(bracket_table, anchor_coeffs, aux_matrix=None) -> Connection:
    """Torsion-free connection reproducing a given antisymmetric bracket.

    bracket_table[p][q] holds [w_p, w_q] as a section; anchor_coeffs[p] is
    the d/dt coefficient of the anchor on w_p.  aux_matrix is the frame
    action of an auxiliary base connection: direction w_p acts with symbol
    anchor_coeffs[p] and frame action anchor_coeffs[p] times the matrix
    (the zero matrix by default).  The result is aux plus half of the
    correction tensor K(x,y) = [x,y] - (aux_x y - aux_y x), which is
    tensorial once the table is antisymmetric, so the returned connection
    satisfies nabla_x y - nabla_y x = [x, y] on all sections.
    """
    env = anchor_coeffs[0].env
    m = len(bracket_table)
    for p in range(m):
        for q in range(p, m):
            total = vec_add(bracket_table[p][q], bracket_table[q][p])
            if not vec_is_zero(total):
                raise ValueError(
                    "bracket table is not antisymmetric at (%d,%d)" % (p + 1, q + 1)
                )
    if aux_matrix is None:
        aux_matrix = linalg.zeros(env, m, m)
    half = env.const(Fraction(1, 2))
    aux_ops = []
    for p in range(m):
        f = anchor_coeffs[p]
        rows = [[f * aux_matrix[r][q] for r in range(m)] for q in range(m)]
        aux_ops.append(CDO(env, f, rows))
    ops = []
    for p in range(m):
        rows = []
        for q in range(m):
            aux_term = vec_sub(aux_ops[p].rows[q], aux_ops[q].rows[p])
            corr = vec_sub(bracket_table[p][q], aux_term)
            rows.append(vec_add(aux_ops[p].rows[q], vec_scale(half, corr)))
        ops.append(CDO(env, anchor_coeffs[p], rows))
    return Connection(ops)
