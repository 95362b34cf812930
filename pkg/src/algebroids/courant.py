"""Metric operator systems: pairings, Dorfman products and their laws.

A metric n-system adds a nondegenerate symmetric pairing to the picture;
its operators must preserve the pairing up to the symbol derivative.  The
derived structure is the Dorfman-style product
e1 o e2 = nabla_{e1} e2 - nabla_{e2} e1 + Delta_{e2} e1 together with the
anchor and the coderivative D, checked here against three cumulative
tiers of axioms (METRIC, PRE_COURANT, COURANT) plus the two Bianchi-type
identities built from the curvature of nabla.
"""

from __future__ import annotations

from fractions import Fraction

from . import linalg
from .bundles import (
    CDO,
    frame_vector,
    metric_compat_residual,
    metric_pair,
    vec_add,
    vec_is_zero,
    vec_scale,
    vec_sub,
    vec_zero,
    vf_bracket,
    zero_cdo,
)
from .lie import SpanViolation
from .report import ResidualReport

TIERS = ("METRIC", "PRE_COURANT", "COURANT")


class MetricNSystem:
    """n pairing-preserving operators with n independent sections."""

    def __init__(self, gram, operators, sections):
        operators = tuple(operators)
        sections = tuple(tuple(s) for s in sections)
        if not operators:
            raise ValueError("need at least one operator")
        if len(operators) != len(sections):
            raise ValueError(
                "got %d operators but %d sections" % (len(operators), len(sections))
            )
        env = operators[0].env
        m = len(gram)
        for row in gram:
            if len(row) != m:
                raise ValueError("pairing matrix is not square")
        for p in range(m):
            for q in range(p + 1, m):
                if gram[p][q] != gram[q][p]:
                    raise ValueError("pairing matrix is not symmetric")
        if linalg.determinant(gram, env).is_zero:
            raise ValueError("pairing matrix is degenerate")
        for i, op in enumerate(operators):
            if op.env is not env or op.m != m:
                raise ValueError("operator %d does not live on the bundle" % (i + 1))
            residual = metric_compat_residual(op, gram)
            for p in range(m):
                for q in range(m):
                    if not residual[p][q].is_zero:
                        raise ValueError(
                            "operator %d does not preserve the pairing "
                            "(defect at frame pair (%d,%d))" % (i + 1, p + 1, q + 1)
                        )
        for s in sections:
            if len(s) != m:
                raise ValueError("section length does not match rank %d" % m)
        if linalg.rank([list(s) for s in sections]) != len(sections):
            raise ValueError("sections are linearly dependent")
        self.env = env
        self.m = m
        self.n = len(operators)
        self.gram = [list(row) for row in gram]
        self.operators = operators
        self.sections = sections
        self._table = None
        self._constants = None

    @property
    def symbols(self):
        return tuple(op.symbol for op in self.operators)

    def __repr__(self):
        return "MetricNSystem(n=%d, m=%d)" % (self.n, self.m)


class CourantStructureTable:
    """Anchor, connection, coderivative and product of a metric n-system."""

    def __init__(self, sys: MetricNSystem):
        self.system = sys
        self.env = sys.env
        self.m = sys.m
        self.gram = sys.gram
        self._gram_inv = None
        m = sys.m
        ops = []
        for p in range(m):
            acc = zero_cdo(sys.env, m)
            for i, op in enumerate(sys.operators):
                w = self._frame_pair(p, sys.sections[i])
                if not w.is_zero:
                    acc = acc + op.scale(w)
            ops.append(acc)
        self.nabla_ops = ops
        self.anchor_coeffs = tuple(op.symbol for op in ops)
        # delta_table[p][q] = Delta_{w_q} w_p
        self.delta_table = []
        for p in range(m):
            row = []
            for q in range(m):
                acc = vec_zero(sys.env, m)
                for i, op in enumerate(sys.operators):
                    c = self._frame_pair(q, op.rows[p])
                    if not c.is_zero:
                        acc = vec_add(acc, vec_scale(c, list(sys.sections[i])))
                row.append(acc)
            self.delta_table.append(row)
        self.dorfman_table = [
            [
                vec_add(
                    vec_sub(ops[p].rows[q], ops[q].rows[p]), self.delta_table[p][q]
                )
                for q in range(m)
            ]
            for p in range(m)
        ]

    def _frame_pair(self, p, section):
        total = self.env.zero
        for r, s in enumerate(section):
            if not s.is_zero and not self.gram[p][r].is_zero:
                total = total + self.gram[p][r] * s
        return total

    @property
    def gram_inv(self):
        if self._gram_inv is None:
            self._gram_inv = linalg.inverse(self.gram, self.env)
        return self._gram_inv

    def pair(self, a, b):
        return metric_pair(self.gram, a, b)

    def anchor(self, e):
        total = self.env.zero
        for ep, fp in zip(e, self.anchor_coeffs):
            if not ep.is_zero and not fp.is_zero:
                total = total + ep * fp
        return total

    def anchor_apply(self, e, f):
        return self.anchor(e) * f.differentiate()

    def nabla(self, e1, e2):
        out = vec_zero(self.env, self.m)
        for p, ep in enumerate(e1):
            if ep.is_zero:
                continue
            out = vec_add(out, vec_scale(ep, self.nabla_ops[p].apply(e2)))
        return out

    def delta(self, e, by):
        """Delta_{by} e = sum_i <Z_i(e), by> u^i."""
        out = vec_zero(self.env, self.m)
        for i, op in enumerate(self.system.operators):
            c = self.pair(op.apply(e), by)
            if not c.is_zero:
                out = vec_add(out, vec_scale(c, list(self.system.sections[i])))
        return out

    def dorfman(self, e1, e2):
        out = vec_sub(self.nabla(e1, e2), self.nabla(e2, e1))
        return vec_add(out, self.delta(e1, by=e2))

    def dop(self, f):
        """The coderivative D(f) = sum_i z_i(f) u^i."""
        df = f.differentiate()
        out = vec_zero(self.env, self.m)
        for i, op in enumerate(self.system.operators):
            c = op.symbol * df
            if not c.is_zero:
                out = vec_add(out, vec_scale(c, list(self.system.sections[i])))
        return out


def build_structure(sys: MetricNSystem) -> CourantStructureTable:
    if sys._table is None:
        sys._table = CourantStructureTable(sys)
    return sys._table


def structure_constants(sys: MetricNSystem):
    """Expansion C[i][k][j] of Z_i(u^j) = sum_k C[i][k][j] u^k.

    Raises SpanViolation when an operator pushes a distinguished section
    out of the span of the sections.
    """
    if sys._constants is not None:
        return sys._constants
    basis = [list(s) for s in sys.sections]
    n = sys.n
    c = []
    for i, op in enumerate(sys.operators):
        ci = [[None] * n for _ in range(n)]
        for j, sec in enumerate(sys.sections):
            image = op.apply(list(sec))
            coeffs, remainder = linalg.reduce_against(basis, image)
            if not all(x.is_zero for x in remainder):
                raise SpanViolation(
                    "operator %d applied to section %d leaves the section span"
                    % (i + 1, j + 1),
                    where=(i + 1, j + 1),
                    remainder=remainder,
                )
            for k in range(n):
                ci[k][j] = coeffs[k]
        c.append(ci)
    sys._constants = c
    return c


def metric_compat_residuals(sys: MetricNSystem) -> ResidualReport:
    """Residuals of the metric n-system compatibility conditions.

    pairing[i]            pairing-invariance defect of operator i
    section-span[i,j]     Z_i(u^j) minus its expansion in the sections
    symbol-bracket[i,j]   symbol-level commutator defect
    operator-bracket[i,j] operator commutator defect on the frame
    isotropy[i,j]         <u^i, u^j>
    """
    report = ResidualReport()
    for i, op in enumerate(sys.operators):
        report.add("pairing[%d]" % (i + 1), metric_compat_residual(op, sys.gram))
    c = structure_constants(sys)
    n = sys.n
    for i, op in enumerate(sys.operators):
        for j, sec in enumerate(sys.sections):
            image = op.apply(list(sec))
            for k in range(n):
                coeff = c[i][k][j]
                if not coeff.is_zero:
                    image = vec_sub(image, vec_scale(coeff, list(sys.sections[k])))
            report.add("section-span[%d,%d]" % (i + 1, j + 1), image)
    for i in range(n):
        for j in range(i + 1, n):
            defect = vf_bracket(sys.operators[i].symbol, sys.operators[j].symbol)
            for k in range(n):
                coeff = c[j][i][k] - c[i][j][k]
                if not coeff.is_zero:
                    defect = defect - coeff * sys.operators[k].symbol
            report.add("symbol-bracket[%d,%d]" % (i + 1, j + 1), defect)
    for i in range(n):
        for j in range(i + 1, n):
            defect = sys.operators[i].commutator(sys.operators[j])
            for k in range(n):
                coeff = c[j][i][k] - c[i][j][k]
                if not coeff.is_zero:
                    defect = defect - sys.operators[k].scale(coeff)
            report.add("operator-bracket[%d,%d]" % (i + 1, j + 1), defect.rows)
    for i in range(n):
        for j in range(i, n):
            report.add(
                "isotropy[%d,%d]" % (i + 1, j + 1),
                metric_pair(sys.gram, list(sys.sections[i]), list(sys.sections[j])),
            )
    return report


def check_axioms(sys: MetricNSystem):
    """Check the tiered product axioms; returns (tier, report).

    METRIC tier: pairing invariance of the product and the square law
    e o e = (1/2) D <e,e>, both with indeterminate coefficients on frames.
    PRE_COURANT adds the anchor homomorphism law and the family
    Delta-term[p] = D(f) o w_p with f indeterminate.  COURANT adds the
    Leibniz law for the product on frame triples with indeterminate
    coefficients.  All residuals are always computed and reported; the
    tier is the highest one whose families (and all lower ones) vanish.
    """
    table = build_structure(sys)
    env = sys.env
    m = sys.m
    u0 = env.jet("u0")
    u1 = env.jet("u1")
    u2 = env.jet("u2")
    half = env.const(Fraction(1, 2))
    report = ResidualReport()
    metric_ok = True
    frames = [frame_vector(env, m, p) for p in range(m)]
    scaled0 = [vec_scale(u0, f) for f in frames]
    scaled1 = [vec_scale(u1, f) for f in frames]
    scaled2 = [vec_scale(u2, f) for f in frames]
    for p in range(m):
        d02 = [table.dorfman(scaled0[p], scaled2[r]) for r in range(m)]
        for q in range(m):
            d01 = table.dorfman(scaled0[p], scaled1[q])
            for r in range(m):
                g = u1 * u2 * sys.gram[q][r]
                defect = table.anchor_apply(scaled0[p], g)
                defect = defect - table.pair(d01, scaled2[r])
                defect = defect - table.pair(scaled1[q], d02[r])
                report.add("invariance[%d,%d,%d]" % (p + 1, q + 1, r + 1), defect)
                if metric_ok and not defect.is_zero:
                    metric_ok = False
    for p in range(m):
        defect = vec_sub(
            table.dorfman_table[p][p], vec_scale(half, table.dop(sys.gram[p][p]))
        )
        report.add("square[%d]" % (p + 1), defect)
        if metric_ok and not vec_is_zero(defect):
            metric_ok = False
    for p in range(m):
        for q in range(p + 1, m):
            e = vec_add(scaled0[p], scaled1[q])
            defect = vec_sub(
                table.dorfman(e, e), vec_scale(half, table.dop(table.pair(e, e)))
            )
            report.add("square-gen[%d,%d]" % (p + 1, q + 1), defect)
            if metric_ok and not vec_is_zero(defect):
                metric_ok = False
    pre_ok = True
    for p in range(m):
        for q in range(m):
            defect = table.anchor(table.dorfman_table[p][q]) - vf_bracket(
                table.anchor_coeffs[p], table.anchor_coeffs[q]
            )
            report.add("anchor-hom[%d,%d]" % (p + 1, q + 1), defect)
            if pre_ok and not defect.is_zero:
                pre_ok = False
    du = table.dop(u0)
    for p in range(m):
        defect = table.dorfman(du, frames[p])
        report.add("Delta-term[%d]" % (p + 1), defect)
        if pre_ok and not vec_is_zero(defect):
            pre_ok = False
    courant_ok = True
    d12 = [
        [table.dorfman(scaled1[q], scaled2[r]) for r in range(m)] for q in range(m)
    ]
    for p in range(m):
        d02 = [table.dorfman(scaled0[p], scaled2[r]) for r in range(m)]
        for q in range(m):
            inner_pq = table.dorfman(scaled0[p], scaled1[q])
            for r in range(m):
                defect = table.dorfman(scaled0[p], d12[q][r])
                defect = vec_sub(defect, table.dorfman(inner_pq, scaled2[r]))
                defect = vec_sub(defect, table.dorfman(scaled1[q], d02[r]))
                report.add("leibniz[%d,%d,%d]" % (p + 1, q + 1, r + 1), defect)
                if courant_ok and not vec_is_zero(defect):
                    courant_ok = False
    if metric_ok and pre_ok and courant_ok:
        tier = "COURANT"
    elif metric_ok and pre_ok:
        tier = "PRE_COURANT"
    else:
        tier = "METRIC"
    return tier, report


def courant_curvature(table: CourantStructureTable, e1, e2, e3):
    """C(e1,e2)e3 with the Dorfman product in the direction slot."""
    out = table.nabla(e1, table.nabla(e2, e3))
    out = vec_sub(out, table.nabla(e2, table.nabla(e1, e3)))
    out = vec_sub(out, table.nabla(table.dorfman(e1, e2), e3))
    return out


def q_operator(table: CourantStructureTable, e1, e2, e3):
    """The section Q(e1,e2,e3) defined through its pairings with the frame."""
    env = table.env
    m = table.m
    frames = [frame_vector(env, m, q) for q in range(m)]
    b = []
    for q in range(m):
        val = table.pair(courant_curvature(table, e1, frames[q], e2), e3)
        val = val + table.pair(courant_curvature(table, e2, frames[q], e3), e1)
        val = val + table.pair(courant_curvature(table, e3, frames[q], e1), e2)
        b.append(val)
    inv = table.gram_inv
    out = []
    for r in range(m):
        total = env.zero
        for q in range(m):
            if not b[q].is_zero and not inv[r][q].is_zero:
                total = total + inv[r][q] * b[q]
        out.append(total)
    return out


def bianchi_check(table: CourantStructureTable, e1, e2, e3):
    """Both Bianchi-type quantities; returns (metric_residual, courant_lhs).

    courant_lhs is the curvature-side cyclic sum (plus Delta and Q
    corrections); it vanishes exactly on the COURANT tier.  The metric
    residual re-expresses courant_lhs against the product's associator
    and the D-correction term and is identically zero for every metric
    n-system, which makes it a strong internal consistency check.
    """
    pm = courant_curvature(table, e1, e2, e3)
    pm = vec_add(pm, courant_curvature(table, e2, e3, e1))
    pm = vec_add(pm, courant_curvature(table, e3, e1, e2))
    pm = vec_add(pm, table.nabla(table.delta(e2, by=e3), e1))
    pm = vec_add(pm, table.nabla(table.delta(e3, by=e1), e2))
    pm = vec_add(pm, table.nabla(table.delta(e1, by=e2), e3))
    pm = vec_add(pm, q_operator(table, e1, e2, e3))
    assoc = table.dorfman(e1, table.dorfman(e2, e3))
    assoc = vec_sub(assoc, table.dorfman(table.dorfman(e1, e2), e3))
    assoc = vec_sub(assoc, table.dorfman(e2, table.dorfman(e1, e3)))
    correction = table.dorfman(table.dop(table.pair(e1, e3)), e2)
    residual = vec_sub(vec_add(pm, correction), assoc)
    return residual, pm


class MetricConnection:
    """A pairing-compatible connection given by direction operators."""

    def __init__(self, gram, ops):
        ops = tuple(ops)
        if not ops:
            raise ValueError("need at least one direction operator")
        env = ops[0].env
        m = ops[0].m
        if len(ops) != m:
            raise ValueError("expected %d direction operators, got %d" % (m, len(ops)))
        self.env = env
        self.m = m
        self.gram = [list(row) for row in gram]
        self.ops = ops
        self.anchor_coeffs = tuple(op.symbol for op in ops)
        self._gram_inv = None

    @property
    def gram_inv(self):
        if self._gram_inv is None:
            self._gram_inv = linalg.inverse(self.gram, self.env)
        return self._gram_inv

    def pair(self, a, b):
        return metric_pair(self.gram, a, b)

    def anchor(self, e):
        total = self.env.zero
        for ep, fp in zip(e, self.anchor_coeffs):
            if not ep.is_zero and not fp.is_zero:
                total = total + ep * fp
        return total

    def nabla(self, e1, e2):
        out = vec_zero(self.env, self.m)
        for p, ep in enumerate(e1):
            if ep.is_zero:
                continue
            out = vec_add(out, vec_scale(ep, self.ops[p].apply(e2)))
        return out

    def delta(self, e, by):
        """Delta_{by} e, recovered from nabla through the pairing."""
        m = self.m
        b = [self.pair(self.ops[r].apply(e), by) for r in range(m)]
        inv = self.gram_inv
        out = []
        for r in range(m):
            total = self.env.zero
            for q in range(m):
                if not b[q].is_zero and not inv[r][q].is_zero:
                    total = total + inv[r][q] * b[q]
            out.append(total)
        return out

    def dorfman(self, e1, e2):
        out = vec_sub(self.nabla(e1, e2), self.nabla(e2, e1))
        return vec_add(out, self.delta(e1, by=e2))

    def dorfman_frame_table(self):
        m = self.m
        env = self.env
        frames = [frame_vector(env, m, p) for p in range(m)]
        return [
            [self.dorfman(frames[p], frames[q]) for q in range(m)] for p in range(m)
        ]


def make_metric_aux(gram, anchor_coeffs):
    """The canonical pairing-compatible auxiliary connection.

    Direction w_p acts with symbol f_p and frame action
    (1/2) f_p G' G^{-1}, which satisfies the pairing-invariance law for
    any symmetric invertible G.
    """
    env = anchor_coeffs[0].env
    m = len(gram)
    dgram = [[x.differentiate() for x in row] for row in gram]
    ginv = linalg.inverse(gram, env)
    base = linalg.mat_mul(dgram, ginv)
    half = env.const(Fraction(1, 2))
    ops = []
    for p in range(m):
        f = anchor_coeffs[p]
        scale = half * f
        rows = [[scale * base[q][r] for r in range(m)] for q in range(m)]
        ops.append(CDO(env, f, rows))
    return ops


class KPropertyError(ValueError):
    """The bracket difference tensor fails the pairing property."""


def connection_from_dorfman(dorfman_table, gram, anchor_coeffs, aux_ops) -> MetricConnection:
    """Pairing-compatible connection reproducing a given Dorfman table.

    dorfman_table[p][q] holds w_p o w_q; aux_ops is any pairing-compatible
    connection over the same anchor (see make_metric_aux).  The correction
    K(e1,e2) = e1 o e2 - e1 o0 e2 against the product induced by aux is
    tensorial and must be antisymmetric and satisfy
    <K(e1,e2),e3> + <e2,K(e1,e3)> = 0; the returned connection is
    aux + (1/3) K and induces the original table.
    """
    env = anchor_coeffs[0].env
    m = len(dorfman_table)
    aux = MetricConnection(gram, aux_ops)
    for p in range(m):
        if aux.anchor_coeffs[p] != anchor_coeffs[p]:
            raise ValueError("auxiliary connection disagrees with the anchor")
        residual = metric_compat_residual(aux.ops[p], aux.gram)
        for a in range(m):
            for b in range(m):
                if not residual[a][b].is_zero:
                    raise ValueError(
                        "auxiliary connection is not pairing-compatible"
                    )
    base_table = aux.dorfman_frame_table()
    ktab = [
        [vec_sub(dorfman_table[p][q], base_table[p][q]) for q in range(m)]
        for p in range(m)
    ]
    env_frames = [frame_vector(env, m, p) for p in range(m)]
    for p in range(m):
        for q in range(p, m):
            if not vec_is_zero(vec_add(ktab[p][q], ktab[q][p])):
                raise KPropertyError(
                    "K-property violation: correction tensor is not "
                    "antisymmetric at (%d,%d)" % (p + 1, q + 1)
                )
    for p in range(m):
        for q in range(m):
            for r in range(m):
                val = aux.pair(ktab[p][q], env_frames[r]) + aux.pair(
                    env_frames[q], ktab[p][r]
                )
                if not val.is_zero:
                    raise KPropertyError(
                        "K-property violation at (%d,%d,%d)" % (p + 1, q + 1, r + 1)
                    )
    third = env.const(Fraction(1, 3))
    ops = []
    for p in range(m):
        rows = [
            vec_add(aux.ops[p].rows[q], vec_scale(third, ktab[p][q]))
            for q in range(m)
        ]
        ops.append(CDO(env, anchor_coeffs[p], rows))
    return MetricConnection(gram, ops)
