"""Structures derived from verified systems.

This module builds on the bracket and product layers: the differential
complex of a system, restriction to a split pair of a Lie system, the
doubling of two compatible systems into a metric system on the direct
sum, isotropic splittings of metric systems and the induced quotient
connection.
"""

from __future__ import annotations

from . import courant, linalg, lie
from .bundles import CDO, frame_vector, nat_pair
from .lie import SpanViolation
from .report import ResidualReport


class SymmetryViolation(ValueError):
    """The split symmetry condition fails for a leading index pair."""

    code = "SYMMETRY_VIOLATION"

    def __init__(self, message, where=None):
        super().__init__(message)
        self.where = where


class ClosureViolation(ValueError):
    """A product or bracket of basis sections leaves the subspace."""

    code = "CLOSURE_VIOLATION"

    def __init__(self, message, where=None, remainder=None):
        super().__init__(message)
        self.where = where
        self.remainder = remainder


class CrossCommutatorViolation(ValueError):
    """A mixed commutator misses its prescribed expansion."""

    code = "CROSS_COMMUTATOR_VIOLATION"

    def __init__(self, message, where=None):
        super().__init__(message)
        self.where = where


class PairingViolation(ValueError):
    """Distinguished covectors of the two factors fail to annihilate."""

    code = "PAIRING_VIOLATION"

    def __init__(self, message, where=None, value=None):
        super().__init__(message)
        self.where = where
        self.value = value


class IsotropyViolation(ValueError):
    """Two basis sections of the would-be isotropic subbundle pair nonzero."""

    code = "ISOTROPY_VIOLATION"

    def __init__(self, message, where=None, value=None):
        super().__init__(message)
        self.where = where
        self.value = value


class NotMaximal(ValueError):
    """The candidate subbundle cannot be a maximal isotropic splitting."""

    code = "NOT_MAXIMAL"


# ---------------------------------------------------------------------------
# differential complex


def dg_check(sys: lie.NSystem) -> ResidualReport:
    """Residuals of D squared on a function and on the dual frame.

    D is the degree-raising operator of the system: on functions
    D(f) = sum_i x_i(f) xi^i, and in higher degree the wedge of the
    covectors against the operator action.  Every entry vanishes exactly
    when the system is LIE (the function family detects the anchor
    defect, the coframe family additionally detects the Jacobiator).
    """
    table = lie.build_structure(sys)
    env = sys.env
    m = sys.m
    u0 = env.jet("u0")
    report = ResidualReport()
    # degree 0 -> 2
    du = [env.zero] * m
    for i, op in enumerate(sys.operators):
        c = op.symbol * u0.differentiate()
        if not c.is_zero:
            du = [a + c * b for a, b in zip(du, sys.covectors[i])]
    two_form = _wedge_step(sys, du)
    for p in range(m):
        for q in range(p + 1, m):
            report.add("dsquare-function[%d,%d]" % (p + 1, q + 1), two_form[p][q])
    # degree 1 -> 3 on the dual frame
    for j in range(m):
        eta = [env.one if r == j else env.zero for r in range(m)]
        omega = _wedge_step(sys, eta)
        three = _wedge_step_2(sys, omega)
        for p in range(m):
            for q in range(p + 1, m):
                for r in range(q + 1, m):
                    report.add(
                        "dsquare-coframe[%d][%d,%d,%d]" % (j + 1, p + 1, q + 1, r + 1),
                        three[p][q][r],
                    )
    return report


def _wedge_step(sys, eta):
    """D of a covector eta as a 2-form on frame pairs."""
    m = sys.m
    images = [op.apply_dual(list(eta)) for op in sys.operators]
    out = [[sys.env.zero] * m for _ in range(m)]
    for p in range(m):
        for q in range(m):
            total = sys.env.zero
            for i in range(sys.n):
                xi = sys.covectors[i]
                if not xi[p].is_zero:
                    total = total + xi[p] * images[i][q]
                if not xi[q].is_zero:
                    total = total - xi[q] * images[i][p]
            out[p][q] = total
    return out


def _wedge_step_2(sys, omega):
    """D of a 2-form omega as a 3-form on frame triples."""
    m = sys.m
    env = sys.env
    acted = []
    for op in sys.operators:
        mat = [[env.zero] * m for _ in range(m)]
        for p in range(m):
            for q in range(m):
                total = op.symbol * omega[p][q].differentiate()
                for s in range(m):
                    if not op.rows[p][s].is_zero and not omega[s][q].is_zero:
                        total = total - op.rows[p][s] * omega[s][q]
                    if not omega[p][s].is_zero and not op.rows[q][s].is_zero:
                        total = total - omega[p][s] * op.rows[q][s]
                mat[p][q] = total
        acted.append(mat)
    out = [[[env.zero] * m for _ in range(m)] for _ in range(m)]
    for p in range(m):
        for q in range(m):
            for r in range(m):
                total = env.zero
                for i in range(sys.n):
                    xi = sys.covectors[i]
                    if not xi[p].is_zero:
                        total = total + xi[p] * acted[i][q][r]
                    if not xi[q].is_zero:
                        total = total - xi[q] * acted[i][p][r]
                    if not xi[r].is_zero:
                        total = total + xi[r] * acted[i][p][q]
                out[p][q][r] = total
    return out


# ---------------------------------------------------------------------------
# split pairs of a Lie system


class LiePair:
    """Restriction of a Lie system to the annihilator of trailing covectors."""

    def __init__(self, system, k, basis, anchor_coeffs, bracket_coords):
        self.system = system
        self.k = k
        self.basis = tuple(tuple(v) for v in basis)
        self.anchor_coeffs = tuple(anchor_coeffs)
        self.bracket_coords = bracket_coords

    def __repr__(self):
        return "LiePair(k=%d, dim=%d)" % (self.k, len(self.basis))


def lie_pair_extract(sys: lie.NSystem, k: int) -> LiePair:
    """Split a Lie system at index k and restrict to the annihilator.

    Checks the symmetry condition a[l1][l2][p] = a[l2][l1][p] for
    l1, l2 <= k < p, computes the annihilator S of the trailing
    covectors, verifies bracket closure of S and returns the restricted
    structure maps in the canonical S basis.
    """
    if not 1 <= k < sys.n:
        raise ValueError("split index must satisfy 1 <= k < n")
    tier, _ = lie.classify(sys)
    if tier != "LIE":
        raise ValueError("system classifies as %s, not LIE" % tier)
    sc = lie.structure_constants(sys)
    for l1 in range(k):
        for l2 in range(k):
            for p in range(k, sys.n):
                if sc.a[l1][l2][p] != sc.a[l2][l1][p]:
                    raise SymmetryViolation(
                        "split symmetry fails at (%d,%d;%d)"
                        % (l1 + 1, l2 + 1, p + 1),
                        where=(l1 + 1, l2 + 1, p + 1),
                    )
    trailing = [list(sys.covectors[p]) for p in range(k, sys.n)]
    basis = linalg.nullspace(trailing, sys.env, sys.m)
    table = lie.build_structure(sys)
    dim = len(basis)
    coords = [[None] * dim for _ in range(dim)]
    for a in range(dim):
        for b in range(dim):
            image = table.bracket(basis[a], basis[b])
            cs, rem = linalg.reduce_against(basis, image)
            if not all(x.is_zero for x in rem):
                raise ClosureViolation(
                    "bracket of annihilator sections %d and %d leaves the "
                    "annihilator" % (a + 1, b + 1),
                    where=(a + 1, b + 1),
                    remainder=rem,
                )
            coords[a][b] = cs
    anchors = [table.anchor(v) for v in basis]
    return LiePair(sys, k, basis, anchors, coords)


# ---------------------------------------------------------------------------
# doubling two systems


def cross_constants(primal: lie.NSystem, dual: lie.NSystem):
    """Expansion constants of each factor acting on the other's covectors.

    c[i][g][a] is the coefficient of the dual covector g in operator i of
    the primal factor applied to dual covector a; d[a][k][i] mirrors this
    with the roles swapped.  Raises SpanViolation when an image leaves
    the relevant span.
    """
    cbasis = [list(v) for v in dual.covectors]
    c = []
    for i, op in enumerate(primal.operators):
        ci = [[None] * dual.n for _ in range(dual.n)]
        for a, v in enumerate(dual.covectors):
            image = op.apply(list(v))
            cs, rem = linalg.reduce_against(cbasis, image)
            if not all(x.is_zero for x in rem):
                raise SpanViolation(
                    "primal operator %d pushes dual covector %d out of the "
                    "dual covector span" % (i + 1, a + 1),
                    where=(i + 1, a + 1),
                    remainder=rem,
                )
            for g in range(dual.n):
                ci[g][a] = cs[g]
        c.append(ci)
    dbasis = [list(x) for x in primal.covectors]
    d = []
    for a, op in enumerate(dual.operators):
        da = [[None] * primal.n for _ in range(primal.n)]
        for i, xi in enumerate(primal.covectors):
            image = op.apply(list(xi))
            cs, rem = linalg.reduce_against(dbasis, image)
            if not all(x.is_zero for x in rem):
                raise SpanViolation(
                    "dual operator %d pushes primal covector %d out of the "
                    "primal covector span" % (a + 1, i + 1),
                    where=(a + 1, i + 1),
                    remainder=rem,
                )
            for kk in range(primal.n):
                da[kk][i] = cs[kk]
        d.append(da)
    return c, d


def _extend_operator(env, op, primal_side):
    """Diagonal extension of an operator to the doubled bundle.

    primal_side selects whether the operator's own frame occupies the
    first block (its dual action then fills the second) or vice versa.
    """
    m = op.m
    rows = [[env.zero] * (2 * m) for _ in range(2 * m)]
    own = op.rows
    other = op.dual_rows()
    first = own if primal_side else other
    second = other if primal_side else own
    for p in range(m):
        for q in range(m):
            rows[p][q] = first[p][q]
            rows[m + p][m + q] = second[p][q]
    return CDO(env, op.symbol, rows)


def bialgebroid_assemble(primal: lie.NSystem, dual: lie.NSystem, strict=False):
    """Double two Lie systems into one metric system on the direct sum.

    Both factors must classify LIE on bundles of the same rank over the
    same environment, and the cross expansion constants must exist
    (SpanViolation otherwise).  Returns the assembled system together
    with a report of the doubling conditions: cross-pairing[i,a] holds
    the pairings of the distinguished covectors of the two factors, and
    mixed-symbol / mixed-bracket[a,i] hold the defect of the mixed
    commutator against its prescribed expansion in the extended
    operators.  With strict=True a nonzero cross pairing raises
    PairingViolation and a nonzero mixed defect raises
    CrossCommutatorViolation instead of being collected.

    The result carries the hyperbolic pairing on the doubled bundle, the
    extended operators of both factors, and the embedded covectors as
    distinguished sections.
    """
    if primal.env is not dual.env:
        raise ValueError("factor systems use different environments")
    if primal.m != dual.m:
        raise ValueError("factor systems live on different ranks")
    env = primal.env
    m = primal.m
    tier, _ = lie.classify(primal)
    if tier != "LIE":
        raise ValueError("first factor classifies as %s, not LIE" % tier)
    tier, _ = lie.classify(dual)
    if tier != "LIE":
        raise ValueError("second factor classifies as %s, not LIE" % tier)
    conditions = ResidualReport()
    for i, xi in enumerate(primal.covectors):
        for a, v in enumerate(dual.covectors):
            val = nat_pair(list(xi), list(v))
            if strict and not val.is_zero:
                raise PairingViolation(
                    "distinguished covectors %d and %d of the two factors "
                    "pair to a nonzero value" % (i + 1, a + 1),
                    where=(i + 1, a + 1),
                    value=val,
                )
            conditions.add("cross-pairing[%d,%d]" % (i + 1, a + 1), val)
    c, d = cross_constants(primal, dual)
    xs = [_extend_operator(env, op, True) for op in primal.operators]
    ys = [_extend_operator(env, op, False) for op in dual.operators]
    for a in range(dual.n):
        for i in range(primal.n):
            defect = ys[a].commutator(xs[i])
            for g in range(dual.n):
                coeff = c[i][a][g]
                if not coeff.is_zero:
                    defect = defect - ys[g].scale(coeff)
            for kk in range(primal.n):
                coeff = d[a][i][kk]
                if not coeff.is_zero:
                    defect = defect + xs[kk].scale(coeff)
            if strict and not defect.is_zero:
                raise CrossCommutatorViolation(
                    "mixed commutator of dual operator %d with primal "
                    "operator %d misses its expansion" % (a + 1, i + 1),
                    where=(a + 1, i + 1),
                )
            conditions.add("mixed-symbol[%d,%d]" % (a + 1, i + 1), defect.symbol)
            conditions.add("mixed-bracket[%d,%d]" % (a + 1, i + 1), defect.rows)
    gram = linalg.zeros(env, 2 * m, 2 * m)
    for p in range(m):
        gram[p][m + p] = env.one
        gram[m + p][p] = env.one
    sections = []
    for xi in primal.covectors:
        sections.append([env.zero] * m + list(xi))
    for v in dual.covectors:
        sections.append(list(v) + [env.zero] * m)
    return courant.MetricNSystem(gram, xs + ys, sections), conditions


# ---------------------------------------------------------------------------
# isotropic splittings


class ManinPair:
    """A metric system together with a maximal isotropic closed subbundle."""

    def __init__(self, system, basis, complement, bracket_coords, anchor_coeffs):
        self.system = system
        self.table = courant.build_structure(system)
        self.basis = tuple(tuple(v) for v in basis)
        self.complement = tuple(complement)
        self.bracket_coords = bracket_coords
        self.anchor_coeffs = tuple(anchor_coeffs)
        env = system.env
        k = len(self.basis)
        mat = [
            [self.table.pair(frame_vector(env, system.m, ci), list(self.basis[j]))
             for ci in self.complement]
            for j in range(k)
        ]
        self._proj_inv = linalg.inverse(mat, env)

    @property
    def k(self):
        return len(self.basis)

    def quotient_labels(self):
        return ["[w%d]" % (ci + 1) for ci in self.complement]

    def project(self, section):
        """Coordinates of the section's class over the complement classes."""
        env = self.system.env
        rhs = [self.table.pair(section, list(b)) for b in self.basis]
        out = []
        for r in range(self.k):
            total = env.zero
            for j in range(self.k):
                if not rhs[j].is_zero and not self._proj_inv[r][j].is_zero:
                    total = total + self._proj_inv[r][j] * rhs[j]
            out.append(total)
        return out

    def d_quotient(self, f):
        """Class of the coderivative D(f) in the quotient."""
        return self.project(self.table.dop(f))

    def __repr__(self):
        return "ManinPair(rank=%d, dim L=%d)" % (self.system.m, self.k)


def dirac_check(sys: courant.MetricNSystem, basis) -> ManinPair:
    """Verify that a subbundle is maximal isotropic and closed.

    basis is a list of sections spanning the candidate.  Raises
    IsotropyViolation when two basis sections pair to a nonzero value,
    NotMaximal when the rank is wrong (including odd-rank bundles, which
    admit no such splitting) or no complement realizes the quotient, and
    ClosureViolation when a product of basis sections leaves the span.
    Returns the pair with the induced structure maps on the subbundle.
    """
    table = courant.build_structure(sys)
    env = sys.env
    m = sys.m
    basis = [list(v) for v in basis]
    if m % 2 != 0:
        raise NotMaximal(
            "bundle rank %d is odd, so no subbundle of half rank exists" % m
        )
    got = linalg.rank(basis)
    if got != len(basis):
        raise ValueError("candidate basis is linearly dependent")
    if got != m // 2:
        raise NotMaximal(
            "candidate spans rank %d but maximal isotropic rank is %d"
            % (got, m // 2)
        )
    for a in range(len(basis)):
        for b in range(a, len(basis)):
            val = table.pair(basis[a], basis[b])
            if not val.is_zero:
                raise IsotropyViolation(
                    "sections %d and %d of the candidate pair to a nonzero "
                    "value" % (a + 1, b + 1),
                    where=(a + 1, b + 1),
                    value=val,
                )
    # greedy complement: frame sections whose pairing against the basis
    # keeps growing in rank, scanned in frame order for determinism
    k = m // 2
    chosen = []
    rows = []
    for q in range(m):
        row = [table.pair(frame_vector(env, m, q), b) for b in basis]
        if linalg.rank(rows + [row]) > len(rows):
            chosen.append(q)
            rows.append(row)
        if len(chosen) == k:
            break
    if len(chosen) < k:
        raise NotMaximal(
            "pairing against the candidate degenerates; no frame complement "
            "realizes the quotient"
        )
    coords = [[None] * k for _ in range(k)]
    for a in range(k):
        for b in range(k):
            image = table.dorfman(basis[a], basis[b])
            cs, rem = linalg.reduce_against(basis, image)
            if not all(x.is_zero for x in rem):
                raise ClosureViolation(
                    "product of candidate sections %d and %d leaves the span"
                    % (a + 1, b + 1),
                    where=(a + 1, b + 1),
                    remainder=rem,
                )
            coords[a][b] = cs
    anchors = [table.anchor(b) for b in basis]
    return ManinPair(sys, basis, chosen, coords, anchors)


def dorfman_connection(pair: ManinPair, v, e):
    """Quotient coordinates of v o e for v in the isotropic subbundle.

    The value is computed directly and cross-checked against the closed
    form -sum_i <e, u^i> proj(Z_i(v)); a mismatch means the pair data is
    inconsistent and raises ValueError.
    """
    table = pair.table
    sys = pair.system
    cs, rem = linalg.reduce_against([list(b) for b in pair.basis], list(v))
    if not all(x.is_zero for x in rem):
        raise SpanViolation(
            "direction section is not in the span of the isotropic basis",
            remainder=rem,
        )
    direct = pair.project(table.dorfman(list(v), list(e)))
    env = sys.env
    closed = [env.zero] * pair.k
    for i, op in enumerate(sys.operators):
        coeff = table.pair(list(e), list(sys.sections[i]))
        if coeff.is_zero:
            continue
        image = pair.project(op.apply(list(v)))
        closed = [a - coeff * b for a, b in zip(closed, image)]
    for a, b in zip(direct, closed):
        if not (a - b).is_zero:
            raise ValueError("quotient product disagrees with its closed form")
    return direct


def dorfman_connection_values(pair: ManinPair):
    """Table of quotient products: basis direction x complement class."""
    env = pair.system.env
    m = pair.system.m
    out = []
    for b in pair.basis:
        row = []
        for ci in pair.complement:
            row.append(dorfman_connection(pair, list(b), frame_vector(env, m, ci)))
        out.append(row)
    return out


def dorfman_axioms(pair: ManinPair) -> ResidualReport:
    """Residuals of the three quotient-connection laws with indeterminate f."""
    env = pair.system.env
    m = pair.system.m
    u0 = env.jet("u0")
    table = pair.table
    report = ResidualReport()
    dbu = pair.d_quotient(u0)
    for a, b in enumerate(pair.basis):
        av = table.anchor(list(b))
        for idx, ci in enumerate(pair.complement):
            c = frame_vector(env, m, ci)
            base = dorfman_connection(pair, list(b), c)
            # (a) direction scaling
            lhs = dorfman_connection(pair, [u0 * x for x in b], c)
            pairing = table.pair(list(b), c)
            resid = [
                x - u0 * y - pairing * z for x, y, z in zip(lhs, base, dbu)
            ]
            report.add("axiom-a[%d,%d]" % (a + 1, ci + 1), resid)
            # (b) argument scaling
            lhs = dorfman_connection(pair, list(b), [u0 * x for x in c])
            unit = pair.project(c)
            resid = [
                x - u0 * y - av * u0.differentiate() * z
                for x, y, z in zip(lhs, base, unit)
            ]
            report.add("axiom-b[%d,%d]" % (a + 1, ci + 1), resid)
        # (c) coderivative naturality
        lhs = pair.project(table.dorfman(list(b), table.dop(u0)))
        rhs = pair.d_quotient(av * u0.differentiate())
        report.add(
            "axiom-c[%d]" % (a + 1), [x - y for x, y in zip(lhs, rhs)]
        )
    return report
