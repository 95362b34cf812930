"""Covariant differential operators on a trivial bundle over a t-line.

A CDO is a pair (symbol, frame action): it acts on sections as the matrix
action plus symbol * d/dt on components, and on the dual bundle by the
pairing-compatible rule.  The frame action is stored primally: rows[p][q]
is the w_q coefficient of the operator applied to the frame section w_p.

Sections and cosections are tuples of Expr over the frame (w_1..w_m) or the
dual frame (w^1..w^m); there is no coordinate dependence beyond t.
"""

from __future__ import annotations

from .expr import Expr
from . import linalg


# -- section helpers -------------------------------------------------------


def vec_add(a, b):
    return tuple(x + y for x, y in zip(a, b))


def vec_sub(a, b):
    return tuple(x - y for x, y in zip(a, b))


def vec_scale(f, a):
    return tuple(f * x for x in a)


def vec_zero(env, m):
    return (env.zero,) * m


def vec_is_zero(a) -> bool:
    return all(x.is_zero for x in a)


def frame_vector(env, m, p):
    """The p-th frame section (0-based) as a component tuple."""
    return tuple(env.one if q == p else env.zero for q in range(m))


def nat_pair(cosec, sec):
    """Natural pairing of a cosection with a section, sum of products."""
    total = cosec[0] * sec[0]
    for x, y in zip(cosec[1:], sec[1:]):
        total = total + x * y
    return total


def metric_pair(gram, a, b):
    """Pairing of two sections through a symmetric Gram matrix."""
    total = None
    for p, ap in enumerate(a):
        if ap.is_zero:
            continue
        for q, bq in enumerate(b):
            if bq.is_zero:
                continue
            term = ap * gram[p][q] * bq
            total = term if total is None else total + term
    if total is None:
        return a[0].env.zero
    return total


def vf_bracket(f, g):
    """Commutator coefficient of f d/dt and g d/dt, namely f g' - g f'."""
    return f * g.differentiate() - g * f.differentiate()


class CDO:
    """First-order operator (symbol * d/dt) + frame action on a rank-m bundle."""

    __slots__ = ("env", "symbol", "rows")

    def __init__(self, env, symbol: Expr, rows):
        self.env = env
        self.symbol = symbol
        self.rows = tuple(tuple(r) for r in rows)
        m = len(self.rows)
        if any(len(r) != m for r in self.rows):
            raise ValueError("frame action matrix must be square")

    @classmethod
    def from_dual(cls, env, symbol, dual_rows):
        """Build from the action on the dual frame.

        dual_rows[j][k] is the w^k coefficient of the operator applied to
        w^j; pairing compatibility forces the primal action -transpose.
        """
        m = len(dual_rows)
        rows = [[-dual_rows[k][p] for k in range(m)] for p in range(m)]
        return cls(env, symbol, rows)

    @property
    def m(self) -> int:
        return len(self.rows)

    def dual_rows(self):
        """Action on the dual frame: row j lists the w^k coefficients."""
        m = self.m
        return tuple(
            tuple(-self.rows[k][j] for k in range(m)) for j in range(m)
        )

    def apply(self, section):
        """Apply to a section given by components over the frame."""
        m = self.m
        out = []
        for q in range(m):
            total = self.symbol * section[q].differentiate()
            for p in range(m):
                if not section[p].is_zero and not self.rows[p][q].is_zero:
                    total = total + section[p] * self.rows[p][q]
            out.append(total)
        return tuple(out)

    def apply_dual(self, cosection):
        """Apply to a cosection so that the natural pairing is respected:
        applying to <xi, s> as a function equals <apply_dual(xi), s> +
        <xi, apply(s)>."""
        m = self.m
        out = []
        for k in range(m):
            total = self.symbol * cosection[k].differentiate()
            for j in range(m):
                if not cosection[j].is_zero and not self.rows[k][j].is_zero:
                    total = total - self.rows[k][j] * cosection[j]
            out.append(total)
        return tuple(out)

    def commutator(self, other: "CDO") -> "CDO":
        symbol = vf_bracket(self.symbol, other.symbol)
        rows = [
            vec_sub(self.apply(other.rows[p]), other.apply(self.rows[p]))
            for p in range(self.m)
        ]
        return CDO(self.env, symbol, rows)

    def scale(self, f: Expr) -> "CDO":
        return CDO(self.env, f * self.symbol,
                   [[f * x for x in row] for row in self.rows])

    def __add__(self, other):
        if not isinstance(other, CDO):
            return NotImplemented
        return CDO(self.env, self.symbol + other.symbol,
                   linalg.mat_add([list(r) for r in self.rows],
                                  [list(r) for r in other.rows]))

    def __sub__(self, other):
        if not isinstance(other, CDO):
            return NotImplemented
        return CDO(self.env, self.symbol - other.symbol,
                   linalg.mat_sub([list(r) for r in self.rows],
                                  [list(r) for r in other.rows]))

    def __neg__(self):
        return self.scale(-self.env.one)

    def __eq__(self, other):
        if not isinstance(other, CDO):
            return NotImplemented
        return self.symbol == other.symbol and self.rows == other.rows

    def __hash__(self):
        return hash((self.symbol, self.rows))

    @property
    def is_zero(self) -> bool:
        return self.symbol.is_zero and all(
            x.is_zero for row in self.rows for x in row
        )

    def __repr__(self):
        return f"CDO(symbol={self.symbol}, rows={[[str(x) for x in r] for r in self.rows]})"


def zero_cdo(env, m) -> CDO:
    return CDO(env, env.zero, linalg.zeros(env, m, m))


def metric_compat_residual(op: CDO, gram):
    """Residual of the pairing-invariance law for a single operator.

    Entry (p, q) is the defect of symbol * d/dt <w_p, w_q> against
    <op(w_p), w_q> + <w_p, op(w_q)>; all zero means the operator preserves
    the pairing up to the symbol derivative term.
    """
    m = op.m
    out = []
    for p in range(m):
        row = []
        for q in range(m):
            acc = -op.symbol * gram[p][q].differentiate()
            for r in range(m):
                if not op.rows[p][r].is_zero:
                    acc = acc + op.rows[p][r] * gram[r][q]
                if not op.rows[q][r].is_zero:
                    acc = acc + gram[p][r] * op.rows[q][r]
            row.append(acc)
        out.append(row)
    return out


def metric_cdo_compat_check(gram, op: CDO):
    """Pairing-invariance residuals of one operator as a labelled report."""
    from .report import ResidualReport

    residual = metric_compat_residual(op, gram)
    report = ResidualReport()
    m = op.m
    for p in range(m):
        for q in range(m):
            report.add("compat[%d,%d]" % (p + 1, q + 1), residual[p][q])
    return report


def cdo_apply(op: CDO, section):
    return op.apply(section)


def cdo_apply_dual(op: CDO, cosection):
    return op.apply_dual(cosection)


def cdo_commutator(a: CDO, b: CDO) -> CDO:
    return a.commutator(b)
